#pragma once

// Inverse first-passage solver: recovers the boundary S(t) of the first
// component from a target FPT density by stepping through the discretised
// Volterra equation
//
//   erfc((S(t_i) - m1(t_i)) / sqrt(2 Q11(t_i)))
//       = sum_{j<i} w_j theta_ij(S(t_i)) + 2 w_i,
//
// where w_j is the target mass attached to knot t_j and theta_ij is the
// Monte Carlo average of erfc over the second component at crossing time
// t_j, simulated against the boundary fixed so far.

#include "ifpt/ou2d_model.hpp"
#include "ifpt/parallel.hpp"
#include "ifpt/simulator.hpp"
#include "ifpt/target_dists.hpp"

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace ifpt {

// How the target law is turned into per-knot masses w_j.
enum class MassRule {
    // w_j = h f(t_j): right-endpoint Euler rule on the density.
    PdfEuler,
    // w_j = F(t_j) - F(t_{j-1}): exact interval mass; stays finite for
    // densities that blow up at 0 (gamma with kappa < 1).
    CdfIncrement,
};

struct SolverConfig {
    double horizon = 0.0;
    std::size_t n_steps = 0;
    std::size_t mc_paths = 5000;
    std::size_t refresh_every = 1;
    // false: path k always draws from stream {seed, k}, so a refresh would
    // regenerate exactly the paths it already has (the boundary at past grid
    // points is frozen) and the pool is simply extended step by step.
    // true: each refresh draws fresh streams {seed, k, step}.
    bool fresh_streams = false;
    std::optional<double> bin_halfwidth;  // defaults to h / 2
    std::size_t min_records_per_bin = 50;
    double root_tol = 1e-8;
    std::size_t max_bracket_expansions = 60;
    MassRule mass_rule = MassRule::CdfIncrement;
    ExecPolicy exec;

    double h() const { return horizon / static_cast<double>(n_steps); }
    double time_at(std::size_t i) const { return static_cast<double>(i) * h(); }
    double effective_bin_halfwidth() const { return bin_halfwidth.value_or(0.5 * h()); }

    // Throws InvalidArgument.
    void validate() const;
};

// Per-knot diagnostic flags (bitwise OR).
enum StepFlag : std::uint32_t {
    kFlagNone = 0,
    kFlagWidenedBin = 1u << 0,      // theta bin widened beyond the configured half width
    kFlagBorrowedBin = 1u << 1,     // window widened past 3 steps to find enough records
    kFlagSparseBin = 1u << 2,       // fewer than min_records_per_bin records used
    kFlagGaussianFallback = 1u << 3,  // no records at all; Gaussian conditional mean of X2 used
    kFlagClampedFirstStep = 1u << 4,  // first-step inverse erfc argument clamped
};

struct BoundaryEstimate {
    std::vector<double> grid;    // t_0 .. t_N
    std::vector<double> values;  // S*(t_i); values[0] repeats values[1]
    std::vector<double> residuals;
    // Records behind the theta bin of each knot the last time it was used.
    std::vector<std::size_t> theta_counts;
    std::vector<std::uint32_t> flags;
    std::vector<double> masses;  // w_i
    double consumed_mass = 0.0;  // target cdf at the horizon

    PiecewiseLinearBoundary as_boundary() const { return {grid, values}; }
};

// erfc((s - m1(t)) / sqrt(2 Q11(t))) = 2 P(X1(t) > s).
// Throws DegenerateVariance when Q11(t) < 1e-300.
double lhs_survival(double s, double t, const ModelParams& p);

// Monte Carlo estimate of theta_ij for one knot pair: the sample mean of
// erfc((s_i - m1(t_i | (s_j, z_k), t_j)) / sqrt(2 Q11(t_i - t_j))) over the
// crossing values z_k collected near t_j.
class ThetaTerm {
public:
    // Throws InsufficientRecords when z is empty, OrderViolation unless t_i > t_j.
    ThetaTerm(double t_i, double t_j, double s_j, std::vector<double> z, const ModelParams& p);

    double operator()(double s_i) const;
    std::size_t size() const noexcept { return z_.size(); }

private:
    std::vector<double> z_;
    double offset_;     // phi11 s_j + m1(t_i - t_j)
    double z_coeff_;    // phi12
    double inv_scale_;  // 1 / sqrt(2 Q11(t_i - t_j))
};

double theta_hat(double t_i, double t_j, double s_j, std::span<const double> z,
                 const ModelParams& p, double s_i);

// g(s) for one solver step: lhs_survival(s, t_i) minus the discretised
// right-hand side, with the diagonal theta fixed at 2.
class StepEquation {
public:
    StepEquation(double t_i, double diagonal_mass, const ModelParams& p);

    void add_term(double mass, ThetaTerm term);

    double operator()(double s) const;

private:
    double t_;
    double mean_;
    double var_;
    double inv_scale_;
    double diagonal_;
    std::vector<double> masses_;
    std::vector<ThetaTerm> terms_;
};

inline double step_residual(double s, const StepEquation& eq) { return eq(s); }

// Closed-form root of the first step: m1(t1) + sqrt(2 Q11(t1)) erfc^-1(2 w_1).
struct FirstStepRoot {
    double value = 0.0;
    bool clamped = false;
};
FirstStepRoot first_step_root(double t1, double mass, const ModelParams& p);

// Throws InsufficientMass (cdf(horizon) <= 0.05), NoBracket, DegenerateVariance.
BoundaryEstimate solve(const ModelParams& p, const TargetDistribution& d, const SolverConfig& cfg,
                       std::uint64_t seed);

}  // namespace ifpt
