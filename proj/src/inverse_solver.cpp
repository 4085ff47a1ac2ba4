#include "ifpt/inverse_solver.hpp"

#include "ifpt/compensated_sum.hpp"
#include "ifpt/error.hpp"

#include <boost/math/special_functions/erf.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace ifpt {

namespace {

constexpr double kVarianceFloor = 1e-300;
constexpr double kFirstStepClamp = 1e-12;
constexpr std::size_t kMaxWidenedSteps = 3;
constexpr int kMaxBisections = 400;
constexpr std::size_t kScanCells = 64;

double checked_q11(double t, const ModelParams& p) {
    const double q = covariance_at(t, p).a11;
    if (!(q >= kVarianceFloor)) {
        throw Error(ErrorCode::DegenerateVariance,
                    "Var[X1(" + std::to_string(t) + ")] is below the variance floor");
    }
    return q;
}

// M Monte Carlo paths simulated against the knots fixed so far. Paths are
// regenerated with fresh streams on refresh() and continued on extend().
class RecordPool {
public:
    RecordPool(const ModelParams& p, double h, std::size_t n_paths, std::uint64_t seed,
               const ExecPolicy& exec)
        : stepper_(p, h), seed_(seed), exec_(exec), paths_(n_paths) {}

    // thresholds[k] is the boundary at t_k; paths are run up to the last index.
    void refresh(std::uint64_t substream, std::span<const double> thresholds) {
        parallel_for(paths_.size(), exec_, [&](std::size_t i) {
            LivePath& path = paths_[i];
            path.engine = make_engine({seed_, i, substream});
            path.normal.reset();
            path.x = {};
            path.crossed = false;
            advance(path, 0, thresholds);
        });
        regroup(thresholds.size() - 1);
    }

    void extend(std::span<const double> thresholds) {
        const std::size_t from = simulated_;
        parallel_for(paths_.size(), exec_, [&](std::size_t i) { advance(paths_[i], from, thresholds); });
        regroup(thresholds.size() - 1);
    }

    std::size_t simulated_steps() const noexcept { return simulated_; }

    // Records from step k are moved by anchor[target] - anchor[k] so that
    // they describe X2 at the target knot.
    void append_window(std::size_t first, std::size_t last, std::size_t target,
                       std::span<const double> anchor, std::vector<double>& out) const {
        for (std::size_t k = first; k <= last && k < z_by_step_.size(); ++k) {
            const double shift = k == target ? 0.0 : anchor[target] - anchor[k];
            for (double z : z_by_step_[k]) out.push_back(z + shift);
        }
    }

    std::size_t count_window(std::size_t first, std::size_t last) const {
        std::size_t n = 0;
        for (std::size_t k = first; k <= last && k < z_by_step_.size(); ++k) n += z_by_step_[k].size();
        return n;
    }

private:
    struct LivePath {
        Engine engine;
        StandardNormal normal;
        State2 x;
        bool crossed = false;
        std::size_t cross_step = 0;
        double z = 0.0;
    };

    void advance(LivePath& path, std::size_t from, std::span<const double> thresholds) const {
        if (path.crossed) return;
        for (std::size_t k = from + 1; k < thresholds.size(); ++k) {
            path.x = stepper_.step(path.x, path.engine, path.normal);
            if (path.x.x1 > thresholds[k]) {
                path.crossed = true;
                path.cross_step = k;
                path.z = path.x.x2;
                return;
            }
        }
    }

    void regroup(std::size_t last_step) {
        simulated_ = last_step;
        z_by_step_.assign(last_step + 1, {});
        for (const LivePath& path : paths_) {
            if (path.crossed) z_by_step_[path.cross_step].push_back(path.z);
        }
    }

    ExactStepper stepper_;
    std::uint64_t seed_;
    ExecPolicy exec_;
    std::vector<LivePath> paths_;
    std::vector<std::vector<double>> z_by_step_;
    std::size_t simulated_ = 0;
};

// Gaussian conditional mean of X2(t) given X1(t) = s.
double conditional_x2(double t, double s, const ModelParams& p) {
    const Moments2 m = moments_at(t, p);
    const double slope = m.cov.a11 > 0.0 ? m.cov.a12 / m.cov.a11 : 0.0;
    return m.mean[1] + slope * (s - m.mean[0]);
}

struct BinChoice {
    std::vector<double> z;
    std::uint32_t flags = kFlagNone;
};

// Crossing values used for theta at knot j, following the fallback chain:
// configured window, window widened up to 3 steps, window widened further
// until populated, whatever the 3-step window holds, Gaussian conditional
// mean. anchor[k] is E[X2(t_k) | X1(t_k) = S(t_k)]; records taken from other
// steps are re-centred on anchor[j].
BinChoice select_bin(const RecordPool& pool, std::size_t j, std::size_t radius, std::size_t min_records,
                     std::span<const double> anchor) {
    const std::size_t last = pool.simulated_steps();
    auto window = [&](std::size_t center, std::size_t r) {
        const std::size_t first = center > r ? center - r : 1;
        return std::pair{std::max<std::size_t>(first, 1), std::min(center + r, last)};
    };

    BinChoice out;
    const std::size_t widest = std::max(radius, kMaxWidenedSteps);
    for (std::size_t r = radius; r <= widest; ++r) {
        const auto [first, hi] = window(j, r);
        if (pool.count_window(first, hi) >= min_records) {
            pool.append_window(first, hi, j, anchor, out.z);
            if (r > radius) out.flags |= kFlagWidenedBin;
            return out;
        }
    }

    for (std::size_t r = widest + 1; r <= last; ++r) {
        const auto [first, hi] = window(j, r);
        if (pool.count_window(first, hi) >= min_records) {
            pool.append_window(first, hi, j, anchor, out.z);
            out.flags |= kFlagBorrowedBin;
            return out;
        }
        if (first == 1 && hi == last) break;
    }

    const auto [first, hi] = window(j, widest);
    pool.append_window(first, hi, j, anchor, out.z);
    if (!out.z.empty()) {
        out.flags |= kFlagSparseBin;
        return out;
    }

    out.z.push_back(anchor[j]);
    out.flags |= kFlagGaussianFallback | kFlagSparseBin;
    return out;
}

double bisect(const StepEquation& eq, double lo, double hi, double tol) {
    for (int it = 0; it < kMaxBisections && hi - lo > tol; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        if (eq(mid) > 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

// Root of the step residual nearest to `center`. The residual is scanned on
// a lattice of spacing `spacing` out to kScanCells cells on each side; the
// first down-crossing found wins. Past that the bracket doubles outward.
double bracketed_root(const StepEquation& eq, const SolverConfig& cfg, std::size_t step, double t,
                      double center, double spacing) {
    std::vector<double> left{eq(center)};
    std::vector<double> right{left.front()};
    for (std::size_t k = 0; k < kScanCells; ++k) {
        const double kd = static_cast<double>(k);
        right.push_back(eq(center + (kd + 1.0) * spacing));
        if (right[k] > 0.0 && right[k + 1] <= 0.0) {
            return bisect(eq, center + kd * spacing, center + (kd + 1.0) * spacing, cfg.root_tol);
        }
        left.push_back(eq(center - (kd + 1.0) * spacing));
        if (left[k + 1] > 0.0 && left[k] <= 0.0) {
            return bisect(eq, center - (kd + 1.0) * spacing, center - kd * spacing, cfg.root_tol);
        }
    }
    double half = static_cast<double>(kScanCells) * spacing;
    for (std::size_t e = 0; e <= cfg.max_bracket_expansions; ++e) {
        const double lo = center - half;
        const double hi = center + half;
        if (eq(lo) > 0.0 && eq(hi) <= 0.0) return bisect(eq, lo, hi, cfg.root_tol);
        half *= 2.0;
    }
    throw Error(ErrorCode::NoBracket, "no sign change of the step residual at step " + std::to_string(step) +
                                          " (t = " + std::to_string(t) + ")");
}

std::vector<double> knot_masses(const TargetDistribution& d, const SolverConfig& cfg) {
    const std::size_t n = cfg.n_steps;
    std::vector<double> w(n + 1, 0.0);
    const double h = cfg.h();
    double prev_cdf = 0.0;
    for (std::size_t i = 1; i <= n; ++i) {
        const double t = cfg.time_at(i);
        if (cfg.mass_rule == MassRule::PdfEuler) {
            w[i] = h * d.pdf(t);
        } else {
            const double c = d.cdf(t);
            w[i] = std::max(0.0, c - prev_cdf);
            prev_cdf = c;
        }
    }
    return w;
}

}  // namespace

void SolverConfig::validate() const {
    if (!(horizon > 0.0) || !std::isfinite(horizon)) {
        throw Error(ErrorCode::InvalidArgument, "solver horizon must be finite and > 0");
    }
    if (n_steps < 1 || mc_paths < 1 || refresh_every < 1 || min_records_per_bin < 1 ||
        max_bracket_expansions < 1) {
        throw Error(ErrorCode::InvalidArgument, "solver counts must be >= 1");
    }
    if (!(root_tol > 0.0)) throw Error(ErrorCode::InvalidArgument, "root_tol must be > 0");
    if (bin_halfwidth && !(*bin_halfwidth > 0.0)) {
        throw Error(ErrorCode::InvalidArgument, "bin_halfwidth must be > 0");
    }
}

double lhs_survival(double s, double t, const ModelParams& p) {
    if (!(t > 0.0)) throw Error(ErrorCode::InvalidArgument, "lhs_survival needs t > 0");
    const double q = checked_q11(t, p);
    return std::erfc((s - mean_at(t, p)[0]) / std::sqrt(2.0 * q));
}

ThetaTerm::ThetaTerm(double t_i, double t_j, double s_j, std::vector<double> z, const ModelParams& p)
    : z_(std::move(z)) {
    if (z_.empty()) throw Error(ErrorCode::InsufficientRecords, "no crossing records for theta");
    if (!(t_i > t_j)) throw Error(ErrorCode::OrderViolation, "theta needs t_i > t_j");
    const double lag = t_i - t_j;
    const Mat2 phi = transition_matrix(lag, p);
    offset_ = phi.a11 * s_j + mean_at(lag, p)[0];
    z_coeff_ = phi.a12;
    inv_scale_ = 1.0 / std::sqrt(2.0 * checked_q11(lag, p));
}

double ThetaTerm::operator()(double s_i) const {
    CompensatedSum sum;
    const double base = s_i - offset_;
    for (double z : z_) sum.add(std::erfc((base - z_coeff_ * z) * inv_scale_));
    return sum.value() / static_cast<double>(z_.size());
}

double theta_hat(double t_i, double t_j, double s_j, std::span<const double> z,
                 const ModelParams& p, double s_i) {
    return ThetaTerm(t_i, t_j, s_j, std::vector<double>(z.begin(), z.end()), p)(s_i);
}

StepEquation::StepEquation(double t_i, double diagonal_mass, const ModelParams& p)
    : t_(t_i), mean_(mean_at(t_i, p)[0]), var_(checked_q11(t_i, p)),
      inv_scale_(1.0 / std::sqrt(2.0 * var_)), diagonal_(2.0 * diagonal_mass) {}

void StepEquation::add_term(double mass, ThetaTerm term) {
    masses_.push_back(mass);
    terms_.push_back(std::move(term));
}

double StepEquation::operator()(double s) const {
    CompensatedSum rhs;
    for (std::size_t j = 0; j < terms_.size(); ++j) rhs.add(masses_[j] * terms_[j](s));
    rhs.add(diagonal_);
    return std::erfc((s - mean_) * inv_scale_) - rhs.value();
}

FirstStepRoot first_step_root(double t1, double mass, const ModelParams& p) {
    const double m1 = mean_at(t1, p)[0];
    const double q = checked_q11(t1, p);
    double target = 2.0 * mass;
    FirstStepRoot out;
    if (target >= 1.0) out.clamped = true;
    const double lo = std::numeric_limits<double>::min();
    const double hi = 2.0 - kFirstStepClamp;
    if (!(target >= lo) || target > hi) {
        out.clamped = true;
        target = std::clamp(std::isnan(target) ? lo : target, lo, hi);
    }
    out.value = m1 + std::sqrt(2.0 * q) * boost::math::erfc_inv(target);
    return out;
}

BoundaryEstimate solve(const ModelParams& p, const TargetDistribution& d, const SolverConfig& cfg,
                       std::uint64_t seed) {
    validate_params(p);
    cfg.validate();
    const double total_mass = d.cdf(cfg.horizon);
    if (!(total_mass > 0.05)) {
        throw Error(ErrorCode::InsufficientMass,
                    "target cdf at the horizon is " + std::to_string(total_mass) + " (needs > 0.05)");
    }

    const std::size_t n = cfg.n_steps;
    const double h = cfg.h();
    BoundaryEstimate est;
    est.grid.resize(n + 1);
    for (std::size_t i = 0; i <= n; ++i) est.grid[i] = cfg.time_at(i);
    est.values.assign(n + 1, 0.0);
    est.residuals.assign(n + 1, 0.0);
    est.theta_counts.assign(n + 1, 0);
    est.flags.assign(n + 1, kFlagNone);
    est.masses = knot_masses(d, cfg);
    est.consumed_mass = total_mass;

    const FirstStepRoot first = first_step_root(est.grid[1], est.masses[1], p);
    est.values[1] = first.value;
    est.values[0] = first.value;
    est.residuals[1] = lhs_survival(first.value, est.grid[1], p) - 2.0 * est.masses[1];
    if (first.clamped) est.flags[1] |= kFlagClampedFirstStep;

    const double halfwidth = cfg.effective_bin_halfwidth();
    const auto radius = static_cast<std::size_t>(std::floor(halfwidth / h + 1e-9));
    RecordPool pool(p, h, cfg.mc_paths, seed, cfg.exec);
    const double scan_spacing = std::sqrt(covariance_at(h, p).a11);
    std::vector<double> anchor(n + 1, 0.0);
    anchor[1] = conditional_x2(est.grid[1], est.values[1], p);

    for (std::size_t i = 2; i <= n; ++i) {
        const std::span<const double> fixed(est.values.data(), i);
        if (i == 2 || (cfg.fresh_streams && (i - 2) % cfg.refresh_every == 0)) {
            pool.refresh(cfg.fresh_streams ? i : 0, fixed);
        } else {
            pool.extend(fixed);
        }

        StepEquation eq(est.grid[i], est.masses[i], p);
        for (std::size_t j = 1; j < i; ++j) {
            if (est.masses[j] == 0.0) continue;
            BinChoice bin = select_bin(pool, j, radius, cfg.min_records_per_bin, anchor);
            est.theta_counts[j] = bin.z.size();
            est.flags[j] = (est.flags[j] & kFlagClampedFirstStep) | bin.flags;
            eq.add_term(est.masses[j], ThetaTerm(est.grid[i], est.grid[j], est.values[j], std::move(bin.z), p));
        }
        est.values[i] = bracketed_root(eq, cfg, i, est.grid[i], est.values[i - 1], scan_spacing);
        est.residuals[i] = eq(est.values[i]);
        anchor[i] = conditional_x2(est.grid[i], est.values[i], p);
    }
    return est;
}

}  // namespace ifpt
