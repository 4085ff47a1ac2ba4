#pragma once

// Exact-in-law simulation of the two-compartment process on a uniform grid,
// first-passage detection of X1 against a boundary at grid points, and batch
// sampling with per-path random streams (order- and thread-independent).

#include "ifpt/ou2d_model.hpp"
#include "ifpt/parallel.hpp"
#include "ifpt/rng.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <vector>

namespace ifpt {

class PiecewiseLinearBoundary {
public:
    // knot_times must start at 0 and be strictly increasing; sizes must match.
    PiecewiseLinearBoundary(std::vector<double> knot_times, std::vector<double> knot_values);

    static PiecewiseLinearBoundary constant(double value);

    // Linear interpolation between knots; the last value is held beyond the
    // last knot.
    double operator()(double t) const;

    std::span<const double> knot_times() const noexcept { return times_; }
    std::span<const double> knot_values() const noexcept { return values_; }

private:
    std::vector<double> times_;
    std::vector<double> values_;
};

struct CrossingRecord {
    double t_cross = 0.0;   // grid time of the first up-crossing
    double z = 0.0;         // X2 at that grid time
    std::size_t step = 0;   // grid index of t_cross
};

struct FptSampleSet {
    std::vector<double> times;  // crossing times, in path order
    std::size_t censored_count = 0;
    double horizon = 0.0;
    double h = 0.0;
    std::uint64_t seed = 0;

    std::size_t n_paths() const noexcept { return times.size() + censored_count; }
};

// Number of grid steps of length h covering [0, horizon].
std::size_t steps_to_cover(double horizon, double h);

using Engine = std::mt19937_64;
using StandardNormal = std::normal_distribution<double>;

// One exact step of the process over a fixed lag:
//   X <- phi X + drift + L xi,  xi ~ N(0, I).
class ExactStepper {
public:
    ExactStepper(const ModelParams& p, double h);

    Vec2 draw_innovation(Engine& engine, StandardNormal& normal) const {
        const double xi1 = normal(engine);
        const double xi2 = normal(engine);
        return {chol_.a11 * xi1, chol_.a21 * xi1 + chol_.a22 * xi2};
    }

    State2 step(const State2& x, const Vec2& drift, const Vec2& noise) const {
        const Mat2& f = tr_.phi;
        return {f.a11 * x.x1 + f.a12 * x.x2 + drift[0] + noise[0],
                f.a21 * x.x1 + f.a22 * x.x2 + drift[1] + noise[1]};
    }

    State2 step(const State2& x, Engine& engine, StandardNormal& normal) const {
        return step(x, tr_.drift, draw_innovation(engine, normal));
    }

    const Transition& transition() const noexcept { return tr_; }
    const Mat2& cholesky() const noexcept { return chol_; }
    double h() const noexcept { return h_; }

private:
    double h_;
    Transition tr_;
    Mat2 chol_;
};

// n_steps + 1 states starting with x0.
std::vector<State2> simulate_path(const ModelParams& p, double h, std::size_t n_steps,
                                  const RngStream& rng, State2 x0 = {});

// First grid time t_k (k >= 1) with X1(t_k) > b(t_k), or nullopt if censored
// at the horizon. Throws BoundaryBelowStart when b(0) < 0.
std::optional<double> sample_fpt(const ModelParams& p, const PiecewiseLinearBoundary& b,
                                 double horizon, double h, const RngStream& rng);

// Path i uses stream {seed, i}.
FptSampleSet batch_fpt(const ModelParams& p, const PiecewiseLinearBoundary& b, double horizon,
                       double h, std::size_t n_paths, std::uint64_t seed, const ExecPolicy& exec = {});

// One record per crossed path, in path order.
std::vector<CrossingRecord> collect_crossing_records(const ModelParams& p,
                                                     const PiecewiseLinearBoundary& b,
                                                     double horizon, double h, std::size_t n_paths,
                                                     std::uint64_t seed,
                                                     const ExecPolicy& exec = {});

// Runs one path against per-step thresholds (thresholds[k] is the boundary at
// t_k, k = 0..n). Returns the crossing step and state, if any.
struct PathCrossing {
    std::size_t step = 0;
    State2 state;
};

std::optional<PathCrossing> first_crossing(const ExactStepper& stepper,
                                           std::span<const double> thresholds, Engine& engine,
                                           StandardNormal& normal, State2 x0 = {});

}  // namespace ifpt
