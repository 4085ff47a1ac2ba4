#include "ifpt/stats.hpp"

#include "ifpt/error.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace ifpt {

namespace {

std::vector<double> sorted(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    return v;
}

double fraction_at_or_below(const std::vector<double>& sorted_times, double t, double denom) {
    const auto it = std::upper_bound(sorted_times.begin(), sorted_times.end(), t);
    return static_cast<double>(it - sorted_times.begin()) / denom;
}

}  // namespace

double ks_censored(const FptSampleSet& sample, const TargetDistribution& target,
                   std::span<const double> extra_points) {
    if (sample.times.empty()) {
        throw Error(ErrorCode::InsufficientMass, "no path crossed the boundary before the horizon");
    }
    const double target_mass = target.cdf(sample.horizon);
    if (!(target_mass > 0.0)) {
        throw Error(ErrorCode::InsufficientMass, "target has no mass before the horizon");
    }
    const auto times = sorted(sample.times);
    const auto n = static_cast<double>(times.size());

    std::vector<double> points(times.begin(), times.end());
    for (double t : extra_points) {
        if (t >= 0.0 && t <= sample.horizon) points.push_back(t);
    }
    std::sort(points.begin(), points.end());
    points.erase(std::unique(points.begin(), points.end()), points.end());

    double worst = 0.0;
    for (double t : points) {
        const double gap = std::abs(fraction_at_or_below(times, t, n) - target.cdf(t) / target_mass);
        worst = std::max(worst, gap);
    }
    return worst;
}

TwoSampleKs ks_two_sample(const FptSampleSet& a, const FptSampleSet& b) {
    const auto ta = sorted(a.times);
    const auto tb = sorted(b.times);
    const auto na = static_cast<double>(a.n_paths());
    const auto nb = static_cast<double>(b.n_paths());
    if (na == 0.0 || nb == 0.0) throw Error(ErrorCode::InvalidArgument, "empty sample");

    std::vector<double> points;
    points.reserve(ta.size() + tb.size());
    std::merge(ta.begin(), ta.end(), tb.begin(), tb.end(), std::back_inserter(points));
    points.erase(std::unique(points.begin(), points.end()), points.end());

    TwoSampleKs out;
    for (double t : points) {
        const double gap = std::abs(fraction_at_or_below(ta, t, na) - fraction_at_or_below(tb, t, nb));
        out.statistic = std::max(out.statistic, gap);
    }
    // Tails beyond the last crossing: the censored fractions.
    out.statistic = std::max(out.statistic, std::abs(static_cast<double>(ta.size()) / na -
                                                     static_cast<double>(tb.size()) / nb));
    const double ne = na * nb / (na + nb);
    const double root = std::sqrt(ne);
    out.p_value = kolmogorov_survival((root + 0.12 + 0.11 / root) * out.statistic);
    return out;
}

double kolmogorov_survival(double x) {
    if (x <= 0.0) return 1.0;
    if (x < 0.2) return 1.0;
    double sum = 0.0;
    double sign = 1.0;
    for (int k = 1; k <= 100; ++k) {
        const double term = sign * std::exp(-2.0 * k * k * x * x);
        sum += term;
        if (std::abs(term) < 1e-16) break;
        sign = -sign;
    }
    return std::clamp(2.0 * sum, 0.0, 1.0);
}

}  // namespace ifpt
