#include "ifpt/target_dists.hpp"

#include "ifpt/error.hpp"

#include <cmath>
#include <limits>
#include <numbers>

namespace ifpt {

namespace {

constexpr double kInvSqrt2 = 0.70710678118654752440;

double normal_cdf(double x) { return 0.5 * std::erfc(-x * kInvSqrt2); }

// log(erfc(x)) for x >= 0, safe where erfc underflows.
double log_erfc(double x) {
    if (x < 25.0) return std::log(std::erfc(x));
    const double x2 = x * x;
    const double series = 1.0 - 0.5 / x2 + 0.75 / (x2 * x2) - 1.875 / (x2 * x2 * x2);
    return -x2 - std::log(x * std::sqrt(std::numbers::pi)) + std::log(series);
}

void require_positive(double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v)) {
        throw Error(ErrorCode::NonPositiveInput, std::string(name) + " must be finite and > 0");
    }
}

double ig_log_pdf(double lambda, double t, double quad_term) {
    return 0.5 * (std::log(lambda) - std::log(2.0 * std::numbers::pi) - 3.0 * std::log(t)) - quad_term;
}

struct PdfVisitor {
    double t;
    double operator()(const InverseGaussian& d) const {
        const double dev = t - d.rho;
        return std::exp(ig_log_pdf(d.lambda, t, d.lambda * dev * dev / (2.0 * d.rho * d.rho * t)));
    }
    double operator()(const HeavyTailIG& d) const {
        return std::exp(ig_log_pdf(d.lambda, t, d.lambda / (2.0 * t)));
    }
    double operator()(const GammaDist& d) const {
        const double log_pdf = d.kappa * std::log(d.rate) - std::lgamma(d.kappa) +
                               (d.kappa - 1.0) * std::log(t) - d.rate * t;
        return std::exp(log_pdf);
    }
};

struct CdfVisitor {
    double t;
    double operator()(const InverseGaussian& d) const {
        const double root = std::sqrt(d.lambda / t);
        const double lower = normal_cdf(root * (t / d.rho - 1.0));
        // exp(2 lambda / rho) * Phi(-z), z >= 0, in log space
        const double z = root * (t / d.rho + 1.0);
        const double upper = std::exp(2.0 * d.lambda / d.rho + std::log(0.5) + log_erfc(z * kInvSqrt2));
        return std::min(1.0, lower + upper);
    }
    double operator()(const HeavyTailIG& d) const { return std::erfc(std::sqrt(d.lambda / (2.0 * t))); }
    double operator()(const GammaDist& d) const { return regularized_gamma_p(d.kappa, d.rate * t); }
};

constexpr double kGammaEps = 1e-15;
constexpr int kGammaMaxIter = 10000;

double gamma_series(double a, double x) {
    double ap = a;
    double del = 1.0 / a;
    double sum = del;
    for (int n = 0; n < kGammaMaxIter; ++n) {
        ap += 1.0;
        del *= x / ap;
        sum += del;
        if (std::abs(del) < std::abs(sum) * kGammaEps) break;
    }
    return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

double gamma_continued_fraction(double a, double x) {
    constexpr double tiny = std::numeric_limits<double>::min() / kGammaEps;
    double b = x + 1.0 - a;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i < kGammaMaxIter; ++i) {
        const double an = -i * (i - a);
        b += 2.0;
        d = an * d + b;
        if (std::abs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < kGammaEps) break;
    }
    return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
}

}  // namespace

TargetDistribution::TargetDistribution(Variant v) : v_(std::move(v)) {
    std::visit(
        [](const auto& d) {
            using T = std::decay_t<decltype(d)>;
            if constexpr (std::is_same_v<T, InverseGaussian>) {
                require_positive(d.rho, "rho");
                require_positive(d.lambda, "lambda");
            } else if constexpr (std::is_same_v<T, HeavyTailIG>) {
                require_positive(d.lambda, "lambda");
            } else {
                require_positive(d.kappa, "kappa");
                require_positive(d.rate, "rate");
            }
        },
        v_);
}

std::string TargetDistribution::family() const {
    switch (v_.index()) {
        case 0: return "inverse_gaussian";
        case 1: return "heavy_tail_ig";
        default: return "gamma";
    }
}

double TargetDistribution::pdf(double t) const {
    if (!(t > 0.0)) return 0.0;
    return std::visit(PdfVisitor{t}, v_);
}

double TargetDistribution::cdf(double t) const {
    if (!(t > 0.0)) return 0.0;
    if (std::isinf(t)) return 1.0;
    return std::visit(CdfVisitor{t}, v_);
}

TargetDistribution ig_from_mean_cv(double mean, double cv) {
    require_positive(mean, "mean");
    require_positive(cv, "cv");
    return TargetDistribution(InverseGaussian{mean, mean / (cv * cv)});
}

TargetDistribution gamma_from_mean_cv(double mean, double cv) {
    require_positive(mean, "mean");
    require_positive(cv, "cv");
    const double kappa = 1.0 / (cv * cv);
    return TargetDistribution(GammaDist{kappa, kappa / mean});
}

TargetDistribution make_inverse_gaussian(double rho, double lambda) {
    return TargetDistribution(InverseGaussian{rho, lambda});
}

TargetDistribution make_heavy_tail_ig(double lambda) { return TargetDistribution(HeavyTailIG{lambda}); }

TargetDistribution make_gamma(double kappa, double rate) { return TargetDistribution(GammaDist{kappa, rate}); }

TargetDistribution make_exponential(double rate) { return make_gamma(1.0, rate); }

double regularized_gamma_p(double a, double x) {
    require_positive(a, "a");
    if (std::isnan(x)) return x;
    if (x <= 0.0) return 0.0;
    if (std::isinf(x)) return 1.0;
    if (x < a + 1.0) return gamma_series(a, x);
    return 1.0 - gamma_continued_fraction(a, x);
}

double regularized_gamma_q(double a, double x) {
    require_positive(a, "a");
    if (std::isnan(x)) return x;
    if (x <= 0.0) return 1.0;
    if (std::isinf(x)) return 0.0;
    if (x < a + 1.0) return 1.0 - gamma_series(a, x);
    return gamma_continued_fraction(a, x);
}

}  // namespace ifpt
