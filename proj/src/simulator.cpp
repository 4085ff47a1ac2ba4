#include "ifpt/simulator.hpp"

#include "ifpt/error.hpp"

#include <algorithm>
#include <cmath>

namespace ifpt {

PiecewiseLinearBoundary::PiecewiseLinearBoundary(std::vector<double> knot_times,
                                                 std::vector<double> knot_values)
    : times_(std::move(knot_times)), values_(std::move(knot_values)) {
    if (times_.empty() || times_.size() != values_.size()) {
        throw Error(ErrorCode::InvalidArgument, "boundary needs matching, non-empty knot arrays");
    }
    if (times_.front() != 0.0) throw Error(ErrorCode::InvalidArgument, "first knot must be at t = 0");
    for (std::size_t i = 1; i < times_.size(); ++i) {
        if (!(times_[i] > times_[i - 1])) {
            throw Error(ErrorCode::InvalidArgument, "knot times must be strictly increasing");
        }
    }
    for (double v : values_) {
        if (!std::isfinite(v)) throw Error(ErrorCode::InvalidArgument, "knot values must be finite");
    }
}

PiecewiseLinearBoundary PiecewiseLinearBoundary::constant(double value) {
    return PiecewiseLinearBoundary({0.0}, {value});
}

double PiecewiseLinearBoundary::operator()(double t) const {
    if (t <= times_.front()) return values_.front();
    if (t >= times_.back()) return values_.back();
    const auto it = std::upper_bound(times_.begin(), times_.end(), t);
    const std::size_t j = static_cast<std::size_t>(it - times_.begin());
    const double t0 = times_[j - 1];
    const double t1 = times_[j];
    if (t == t0) return values_[j - 1];
    return values_[j - 1] + (values_[j] - values_[j - 1]) * (t - t0) / (t1 - t0);
}

std::size_t steps_to_cover(double horizon, double h) {
    if (!(h > 0.0) || !(horizon > 0.0) || !std::isfinite(horizon)) {
        throw Error(ErrorCode::InvalidArgument, "horizon and step must be > 0");
    }
    const double ratio = horizon / h;
    const double nearest = std::round(ratio);
    if (std::abs(ratio - nearest) <= 1e-9 * std::max(1.0, ratio)) {
        return static_cast<std::size_t>(std::max(1.0, nearest));
    }
    return static_cast<std::size_t>(std::ceil(ratio));
}

ExactStepper::ExactStepper(const ModelParams& p, double h)
    : h_(h), tr_(ifpt::transition(h, p)), chol_(lower_sqrt(tr_.cov)) {}

std::vector<State2> simulate_path(const ModelParams& p, double h, std::size_t n_steps,
                                  const RngStream& rng, State2 x0) {
    if (n_steps < 1) throw Error(ErrorCode::InvalidArgument, "n_steps must be >= 1");
    const ExactStepper stepper(p, h);
    Engine engine = make_engine(rng);
    StandardNormal normal;
    std::vector<State2> path;
    path.reserve(n_steps + 1);
    path.push_back(x0);
    for (std::size_t k = 0; k < n_steps; ++k) path.push_back(stepper.step(path.back(), engine, normal));
    return path;
}

std::optional<PathCrossing> first_crossing(const ExactStepper& stepper,
                                           std::span<const double> thresholds, Engine& engine,
                                           StandardNormal& normal, State2 x0) {
    State2 x = x0;
    for (std::size_t k = 1; k < thresholds.size(); ++k) {
        x = stepper.step(x, engine, normal);
        if (x.x1 > thresholds[k]) return PathCrossing{k, x};
    }
    return std::nullopt;
}

namespace {

std::vector<double> grid_thresholds(const PiecewiseLinearBoundary& b, double horizon, double h) {
    if (b(0.0) < 0.0) {
        throw Error(ErrorCode::BoundaryBelowStart, "boundary starts below X1(0) = 0");
    }
    const std::size_t n = steps_to_cover(horizon, h);
    std::vector<double> out(n + 1);
    for (std::size_t k = 0; k <= n; ++k) out[k] = b(static_cast<double>(k) * h);
    return out;
}

void require_paths(std::size_t n_paths) {
    if (n_paths < 1) throw Error(ErrorCode::InvalidArgument, "n_paths must be >= 1");
}

}  // namespace

std::optional<double> sample_fpt(const ModelParams& p, const PiecewiseLinearBoundary& b,
                                 double horizon, double h, const RngStream& rng) {
    const auto thresholds = grid_thresholds(b, horizon, h);
    const ExactStepper stepper(p, h);
    Engine engine = make_engine(rng);
    StandardNormal normal;
    const auto hit = first_crossing(stepper, thresholds, engine, normal);
    if (!hit) return std::nullopt;
    return static_cast<double>(hit->step) * h;
}

namespace {

std::vector<std::optional<PathCrossing>> run_batch(const ModelParams& p,
                                                   const PiecewiseLinearBoundary& b, double horizon,
                                                   double h, std::size_t n_paths,
                                                   std::uint64_t seed, const ExecPolicy& exec) {
    require_paths(n_paths);
    const auto thresholds = grid_thresholds(b, horizon, h);
    const ExactStepper stepper(p, h);
    std::vector<std::optional<PathCrossing>> hits(n_paths);
    parallel_for(n_paths, exec, [&](std::size_t i) {
        Engine engine = make_engine({seed, i, 0});
        StandardNormal normal;
        hits[i] = first_crossing(stepper, thresholds, engine, normal);
    });
    return hits;
}

}  // namespace

FptSampleSet batch_fpt(const ModelParams& p, const PiecewiseLinearBoundary& b, double horizon,
                       double h, std::size_t n_paths, std::uint64_t seed, const ExecPolicy& exec) {
    const auto hits = run_batch(p, b, horizon, h, n_paths, seed, exec);
    FptSampleSet out;
    out.horizon = horizon;
    out.h = h;
    out.seed = seed;
    for (const auto& hit : hits) {
        if (hit) {
            out.times.push_back(static_cast<double>(hit->step) * h);
        } else {
            ++out.censored_count;
        }
    }
    return out;
}

std::vector<CrossingRecord> collect_crossing_records(const ModelParams& p,
                                                     const PiecewiseLinearBoundary& b,
                                                     double horizon, double h, std::size_t n_paths,
                                                     std::uint64_t seed, const ExecPolicy& exec) {
    const auto hits = run_batch(p, b, horizon, h, n_paths, seed, exec);
    std::vector<CrossingRecord> out;
    for (const auto& hit : hits) {
        if (hit) out.push_back({static_cast<double>(hit->step) * h, hit->state.x2, hit->step});
    }
    return out;
}

}  // namespace ifpt
