#pragma once

// Space transformation Y1 = X1 - S(t) + Sigma: a time-varying boundary S on
// the autonomous process becomes the constant level Sigma for a process
// driven by the time-dependent input
//
//   mu1(t) = -(alpha + beta) (S(t) - Sigma) - S'(t)
//   mu2(t) = mu + beta (S(t) - Sigma)

#include "ifpt/inverse_solver.hpp"
#include "ifpt/ou2d_model.hpp"
#include "ifpt/parallel.hpp"
#include "ifpt/simulator.hpp"

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace ifpt {

struct DriftSchedule {
    std::vector<double> grid;
    std::vector<double> mu1;
    std::vector<double> mu2;
    double sigma_level = 0.0;
    State2 y0;

    // Linear interpolation of (mu1, mu2) on the grid, held constant outside.
    Vec2 input_at(double t) const;
};

// S' from 3-point finite differences: central at interior knots, one-sided
// second order at both ends. Throws TooFewKnots for fewer than 3 knots.
DriftSchedule to_drift(std::span<const double> grid, std::span<const double> boundary,
                       double sigma_level, const ModelParams& p, State2 x0 = {});

inline DriftSchedule to_drift(const BoundaryEstimate& b, double sigma_level, const ModelParams& p) {
    return to_drift(b.grid, b.values, sigma_level, p);
}

// Path of the transformed system with the input held at its step-midpoint
// value over each step. Consumes innovations exactly like simulate_path.
std::vector<State2> simulate_transformed_path(const DriftSchedule& ds, const ModelParams& p, double h,
                                              std::size_t n_steps, const RngStream& rng);

// First passage of Y1 over the constant level; path i uses stream {seed, i}.
FptSampleSet simulate_transformed(const DriftSchedule& ds, const ModelParams& p, double h,
                                  double horizon, std::size_t n_paths, std::uint64_t seed,
                                  const ExecPolicy& exec = {});

}  // namespace ifpt
