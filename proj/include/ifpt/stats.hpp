#pragma once

// Goodness-of-fit statistics for first-passage samples.

#include "ifpt/simulator.hpp"
#include "ifpt/target_dists.hpp"

#include <span>

namespace ifpt {

// One-sample KS distance between crossing times and the target, both
// conditioned on crossing before the sample horizon:
//   sup_t |#{T_k <= t} / #crossed - F(t) / F(horizon)|
// evaluated at every distinct sample value and at each extra point in
// [0, horizon]. Crossing times live on a grid, so the grid points are the
// natural extra points. Throws InsufficientMass for an empty sample.
double ks_censored(const FptSampleSet& sample, const TargetDistribution& target,
                   std::span<const double> extra_points = {});

struct TwoSampleKs {
    double statistic = 0.0;
    double p_value = 1.0;
};

// Two-sample KS on the sub-distribution functions #{T_k <= t} / n_paths, so
// censored paths count as mass beyond the horizon.
TwoSampleKs ks_two_sample(const FptSampleSet& a, const FptSampleSet& b);

// P(K > x) for the Kolmogorov distribution.
double kolmogorov_survival(double x);

}  // namespace ifpt
