#pragma once

// Target first-passage-time laws consumed by the inverse solver.

#include <string>
#include <variant>

namespace ifpt {

struct InverseGaussian {
    double rho = 0.0;     // mean
    double lambda = 0.0;  // shape
};

// rho -> infinity limit of the inverse Gaussian (Levy law); infinite mean.
struct HeavyTailIG {
    double lambda = 0.0;
};

struct GammaDist {
    double kappa = 0.0;  // shape
    double rate = 0.0;   // 1/time
};

class TargetDistribution {
public:
    using Variant = std::variant<InverseGaussian, HeavyTailIG, GammaDist>;

    // Validates that every parameter is finite and > 0 (NonPositiveInput).
    explicit TargetDistribution(Variant v);

    const Variant& variant() const noexcept { return v_; }
    std::string family() const;

    double pdf(double t) const;
    double cdf(double t) const;

private:
    Variant v_;
};

TargetDistribution ig_from_mean_cv(double mean, double cv);
TargetDistribution gamma_from_mean_cv(double mean, double cv);
TargetDistribution make_inverse_gaussian(double rho, double lambda);
TargetDistribution make_heavy_tail_ig(double lambda);
TargetDistribution make_gamma(double kappa, double rate);
// Exponential law is the kappa == 1 gamma; shares its code path exactly.
TargetDistribution make_exponential(double rate);

inline double pdf(const TargetDistribution& d, double t) { return d.pdf(t); }
inline double cdf(const TargetDistribution& d, double t) { return d.cdf(t); }

// Regularized lower incomplete gamma P(a, x) = gamma(a, x) / Gamma(a).
// Series for x < a + 1, Lentz continued fraction for the complement otherwise.
double regularized_gamma_p(double a, double x);
double regularized_gamma_q(double a, double x);

}  // namespace ifpt
