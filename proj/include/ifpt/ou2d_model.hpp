#pragma once

// Closed-form description of the two-compartment Ornstein-Uhlenbeck process
//
//   dX1 = (-alpha X1 + beta (X2 - X1)) dt
//   dX2 = (-alpha X2 + beta (X1 - X2) + mu) dt + sigma dB
//
// started at X(0) = 0. The drift matrix has eigenvalues -alpha (direction
// (1,1)) and -(alpha + 2 beta) (direction (1,-1)); everything below is
// written in terms of those two decay rates.

#include <array>
#include <cstddef>

namespace ifpt {

struct ModelParams {
    double alpha = 0.0;  // decay rate, 1/time
    double beta = 0.0;   // coupling rate, 1/time
    double mu = 0.0;     // mean input on the second component, space/time
    double sigma = 0.0;  // noise intensity, space/sqrt(time)

    double fast_rate() const noexcept { return alpha + 2.0 * beta; }
};

struct ParamValidation {
    ModelParams params;
    // beta == 0: the first component carries no noise and stays at 0.
    bool beta_degenerate = false;
};

// Throws Error{NonPositiveAlpha | NonPositiveSigma | NegativeBeta | NonFiniteParam}.
ParamValidation validate_params(const ModelParams& p);

struct State2 {
    double x1 = 0.0;
    double x2 = 0.0;

    friend bool operator==(const State2&, const State2&) = default;
};

using Vec2 = std::array<double, 2>;

// Row-major 2x2.
struct Mat2 {
    double a11 = 0.0, a12 = 0.0, a21 = 0.0, a22 = 0.0;

    static constexpr Mat2 identity() noexcept { return {1.0, 0.0, 0.0, 1.0}; }

    Vec2 operator*(const Vec2& v) const noexcept {
        return {a11 * v[0] + a12 * v[1], a21 * v[0] + a22 * v[1]};
    }
    Mat2 operator*(const Mat2& o) const noexcept {
        return {a11 * o.a11 + a12 * o.a21, a11 * o.a12 + a12 * o.a22,
                a21 * o.a11 + a22 * o.a21, a21 * o.a12 + a22 * o.a22};
    }
    Mat2 transposed() const noexcept { return {a11, a21, a12, a22}; }
    double det() const noexcept { return a11 * a22 - a12 * a21; }
};

struct Moments2 {
    Vec2 mean{0.0, 0.0};
    Mat2 cov{};
};

// E[X(t)] for X(0) = 0.
Vec2 mean_at(double t, const ModelParams& p);

// Cov[X(t)] for X(0) = 0, including the sigma^2 prefactor.
Mat2 covariance_at(double t, const ModelParams& p);

Moments2 moments_at(double t, const ModelParams& p);

// Response of the noiseless system over a lag h to a constant input vector u:
//   integral_0^h exp(A s) ds * u.
// mean_at(t) is input_response(t, {0, mu}).
Vec2 input_response(double h, const Vec2& u, const ModelParams& p);

// exp(A h).
Mat2 transition_matrix(double h, const ModelParams& p);

// Exact one-step law: X(t+h) = phi X(t) + drift + N(0, cov).
struct Transition {
    Mat2 phi;
    Vec2 drift{0.0, 0.0};
    Mat2 cov;
};

Transition transition(double h, const ModelParams& p);

// Lower-triangular factor L with L L^T = cov. When the (1,1) entry vanishes
// (beta == 0) the first column is zeroed instead of failing.
Mat2 lower_sqrt(const Mat2& cov);

// E[X1(t) | X(theta) = x]; throws OrderViolation when t < theta.
double conditioned_mean_x1(double t, double theta, const State2& x, const ModelParams& p);

// Var[X1(t) | X(theta)]; independent of the conditioning state.
double conditioned_var_x1(double t, double theta, const ModelParams& p);

// Isometry integrals of the covariance evaluated by adaptive quadrature;
// used by the CLI moments printer as a cross-check column.
Mat2 covariance_by_quadrature(double t, const ModelParams& p);

}  // namespace ifpt
