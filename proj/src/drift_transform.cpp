#include "ifpt/drift_transform.hpp"

#include "ifpt/error.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

namespace ifpt {

namespace {

// Derivative at x[k] of the quadratic through (x[a], y[a]), (x[b], y[b]), (x[c], y[c]).
double lagrange_slope(std::span<const double> x, std::span<const double> y, std::size_t a,
                      std::size_t b, std::size_t c, std::size_t k) {
    const double xa = x[a], xb = x[b], xc = x[c], xk = x[k];
    const double da = ((xk - xb) + (xk - xc)) / ((xa - xb) * (xa - xc));
    const double db = ((xk - xa) + (xk - xc)) / ((xb - xa) * (xb - xc));
    const double dc = ((xk - xa) + (xk - xb)) / ((xc - xa) * (xc - xb));
    return da * y[a] + db * y[b] + dc * y[c];
}

std::vector<Vec2> step_inputs(const DriftSchedule& ds, const ModelParams& p, double h, std::size_t n_steps) {
    std::vector<Vec2> out(n_steps);
    for (std::size_t k = 0; k < n_steps; ++k) {
        const double mid = (static_cast<double>(k) + 0.5) * h;
        out[k] = input_response(h, ds.input_at(mid), p);
    }
    return out;
}

std::optional<std::size_t> crossing_step(const ExactStepper& stepper, std::span<const Vec2> drifts,
                                         double level, State2 y, Engine& engine, StandardNormal& normal) {
    for (std::size_t k = 0; k < drifts.size(); ++k) {
        y = stepper.step(y, drifts[k], stepper.draw_innovation(engine, normal));
        if (y.x1 > level) return k + 1;
    }
    return std::nullopt;
}

}  // namespace

Vec2 DriftSchedule::input_at(double t) const {
    if (grid.empty()) return {0.0, 0.0};
    if (t <= grid.front()) return {mu1.front(), mu2.front()};
    if (t >= grid.back()) return {mu1.back(), mu2.back()};
    const auto it = std::upper_bound(grid.begin(), grid.end(), t);
    const auto j = static_cast<std::size_t>(it - grid.begin());
    const double frac = (t - grid[j - 1]) / (grid[j] - grid[j - 1]);
    return {mu1[j - 1] + (mu1[j] - mu1[j - 1]) * frac, mu2[j - 1] + (mu2[j] - mu2[j - 1]) * frac};
}

DriftSchedule to_drift(std::span<const double> grid, std::span<const double> boundary,
                       double sigma_level, const ModelParams& p, State2 x0) {
    const std::size_t n = grid.size();
    if (n < 3) throw Error(ErrorCode::TooFewKnots, "drift transform needs at least 3 knots");
    if (boundary.size() != n) throw Error(ErrorCode::InvalidArgument, "grid and boundary sizes differ");

    DriftSchedule ds;
    ds.grid.assign(grid.begin(), grid.end());
    ds.mu1.resize(n);
    ds.mu2.resize(n);
    ds.sigma_level = sigma_level;
    ds.y0 = {x0.x1 - boundary[0] + sigma_level, x0.x2};
    for (std::size_t k = 0; k < n; ++k) {
        double slope = 0.0;
        if (k == 0) {
            slope = lagrange_slope(grid, boundary, 0, 1, 2, 0);
        } else if (k == n - 1) {
            slope = lagrange_slope(grid, boundary, n - 3, n - 2, n - 1, n - 1);
        } else {
            slope = lagrange_slope(grid, boundary, k - 1, k, k + 1, k);
        }
        const double excess = boundary[k] - sigma_level;
        ds.mu1[k] = -(p.alpha + p.beta) * excess - slope;
        ds.mu2[k] = p.mu + p.beta * excess;
    }
    return ds;
}

std::vector<State2> simulate_transformed_path(const DriftSchedule& ds, const ModelParams& p, double h,
                                              std::size_t n_steps, const RngStream& rng) {
    const ExactStepper stepper(p, h);
    const auto drifts = step_inputs(ds, p, h, n_steps);
    Engine engine = make_engine(rng);
    StandardNormal normal;
    std::vector<State2> path{ds.y0};
    path.reserve(n_steps + 1);
    for (const Vec2& drift : drifts) {
        path.push_back(stepper.step(path.back(), drift, stepper.draw_innovation(engine, normal)));
    }
    return path;
}

FptSampleSet simulate_transformed(const DriftSchedule& ds, const ModelParams& p, double h,
                                  double horizon, std::size_t n_paths, std::uint64_t seed,
                                  const ExecPolicy& exec) {
    if (n_paths < 1) throw Error(ErrorCode::InvalidArgument, "n_paths must be >= 1");
    if (ds.y0.x1 > ds.sigma_level) {
        throw Error(ErrorCode::BoundaryBelowStart, "transformed start lies above the constant level");
    }
    const std::size_t n_steps = steps_to_cover(horizon, h);
    const ExactStepper stepper(p, h);
    const auto drifts = step_inputs(ds, p, h, n_steps);

    std::vector<std::optional<std::size_t>> hits(n_paths);
    parallel_for(n_paths, exec, [&](std::size_t i) {
        Engine engine = make_engine({seed, i, 0});
        StandardNormal normal;
        hits[i] = crossing_step(stepper, drifts, ds.sigma_level, ds.y0, engine, normal);
    });

    FptSampleSet out;
    out.horizon = horizon;
    out.h = h;
    out.seed = seed;
    for (const auto& hit : hits) {
        if (hit) {
            out.times.push_back(static_cast<double>(*hit) * h);
        } else {
            ++out.censored_count;
        }
    }
    return out;
}

}  // namespace ifpt
