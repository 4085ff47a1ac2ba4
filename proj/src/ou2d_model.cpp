#include "ifpt/ou2d_model.hpp"

#include "ifpt/error.hpp"

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>
#include <string>

namespace ifpt {

namespace {

// integral_0^t exp(-k u) du
double decay_integral(double k, double t) {
    if (k == 0.0) return t;
    return -std::expm1(-k * t) / k;
}

void require_nonnegative_time(double t, const char* what) {
    if (!(t >= 0.0) || !std::isfinite(t)) {
        throw Error(ErrorCode::InvalidArgument, std::string(what) + " must be finite and >= 0");
    }
}

// Below this value of 2(alpha + 2 beta) t the closed form for Q11 loses
// digits to cancellation (it is O(t^3) built from O(t) terms).
constexpr double kSmallLagCutoff = 1.0;

double q11_small_lag(double t, const ModelParams& p) {
    const double s2 = p.sigma * p.sigma;
    auto integrand = [&](double u) {
        const double d = -std::expm1(-2.0 * p.beta * u);
        return std::exp(-2.0 * p.alpha * u) * d * d;
    };
    return 0.25 * s2 * boost::math::quadrature::gauss<double, 20>::integrate(integrand, 0.0, t);
}

}  // namespace

ParamValidation validate_params(const ModelParams& p) {
    if (!std::isfinite(p.alpha) || !std::isfinite(p.beta) || !std::isfinite(p.mu) ||
        !std::isfinite(p.sigma)) {
        throw Error(ErrorCode::NonFiniteParam, "process parameters must be finite");
    }
    if (p.alpha <= 0.0) throw Error(ErrorCode::NonPositiveAlpha, "alpha must be > 0");
    if (p.sigma <= 0.0) throw Error(ErrorCode::NonPositiveSigma, "sigma must be > 0");
    if (p.beta < 0.0) throw Error(ErrorCode::NegativeBeta, "beta must be >= 0");
    return {p, p.beta == 0.0};
}

Vec2 input_response(double h, const Vec2& u, const ModelParams& p) {
    const double slow = decay_integral(p.alpha, h);
    const double fast = decay_integral(p.fast_rate(), h);
    const double sum = slow + fast;
    const double diff = slow - fast;
    return {0.5 * (sum * u[0] + diff * u[1]), 0.5 * (diff * u[0] + sum * u[1])};
}

Vec2 mean_at(double t, const ModelParams& p) {
    require_nonnegative_time(t, "t");
    return input_response(t, {0.0, p.mu}, p);
}

Mat2 covariance_at(double t, const ModelParams& p) {
    require_nonnegative_time(t, "t");
    if (t == 0.0) return {};
    const double s2 = p.sigma * p.sigma;
    const double i_slow = decay_integral(2.0 * p.alpha, t);
    const double i_mid = decay_integral(2.0 * (p.alpha + p.beta), t);
    const double i_fast = decay_integral(2.0 * p.fast_rate(), t);

    double q11 = 0.0;
    if (2.0 * p.fast_rate() * t < kSmallLagCutoff) {
        q11 = q11_small_lag(t, p);
    } else {
        q11 = 0.25 * s2 * (i_slow - 2.0 * i_mid + i_fast);
    }
    const double q12 = 0.25 * s2 * (i_slow - i_fast);
    const double q22 = 0.25 * s2 * (i_slow + 2.0 * i_mid + i_fast);
    return {q11, q12, q12, q22};
}

Moments2 moments_at(double t, const ModelParams& p) { return {mean_at(t, p), covariance_at(t, p)}; }

Mat2 transition_matrix(double h, const ModelParams& p) {
    require_nonnegative_time(h, "h");
    const double slow = std::exp(-p.alpha * h);
    // slow - exp(-(alpha + 2 beta) h), without cancellation for small beta h
    const double diff = -slow * std::expm1(-2.0 * p.beta * h);
    const double sum = 2.0 * slow - diff;
    return {0.5 * sum, 0.5 * diff, 0.5 * diff, 0.5 * sum};
}

Transition transition(double h, const ModelParams& p) {
    if (!(h > 0.0)) throw Error(ErrorCode::InvalidArgument, "transition lag must be > 0");
    return {transition_matrix(h, p), mean_at(h, p), covariance_at(h, p)};
}

Mat2 lower_sqrt(const Mat2& cov) {
    Mat2 l{};
    if (cov.a11 > 0.0) {
        l.a11 = std::sqrt(cov.a11);
        l.a21 = cov.a21 / l.a11;
    }
    const double rest = cov.a22 - l.a21 * l.a21;
    l.a22 = rest > 0.0 ? std::sqrt(rest) : 0.0;
    return l;
}

double conditioned_mean_x1(double t, double theta, const State2& x, const ModelParams& p) {
    if (t < theta) throw Error(ErrorCode::OrderViolation, "conditioned mean needs t >= theta");
    const double lag = t - theta;
    const Mat2 phi = transition_matrix(lag, p);
    return phi.a11 * x.x1 + phi.a12 * x.x2 + mean_at(lag, p)[0];
}

double conditioned_var_x1(double t, double theta, const ModelParams& p) {
    if (t < theta) throw Error(ErrorCode::OrderViolation, "conditioned variance needs t >= theta");
    return covariance_at(t - theta, p).a11;
}

Mat2 covariance_by_quadrature(double t, const ModelParams& p) {
    require_nonnegative_time(t, "t");
    if (t == 0.0) return {};
    using boost::math::quadrature::gauss_kronrod;
    const double g = p.fast_rate();
    const double half_sigma = 0.5 * p.sigma;
    auto k1 = [&](double u) { return half_sigma * (std::exp(-p.alpha * u) - std::exp(-g * u)); };
    auto k2 = [&](double u) { return half_sigma * (std::exp(-p.alpha * u) + std::exp(-g * u)); };
    auto quad = [&](auto&& f) { return gauss_kronrod<double, 61>::integrate(f, 0.0, t, 15, 1e-13); };
    const double q11 = quad([&](double u) { return k1(u) * k1(u); });
    const double q12 = quad([&](double u) { return k1(u) * k2(u); });
    const double q22 = quad([&](double u) { return k2(u) * k2(u); });
    return {q11, q12, q12, q22};
}

}  // namespace ifpt
