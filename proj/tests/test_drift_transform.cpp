#include "ifpt/drift_transform.hpp"
#include "ifpt/error.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

using namespace ifpt;

namespace {

const ModelParams kP{0.33, 0.2, 0.6, 1.0};

std::vector<double> uniform_grid(std::size_t n, double h) {
    std::vector<double> g(n + 1);
    for (std::size_t i = 0; i <= n; ++i) g[i] = static_cast<double>(i) * h;
    return g;
}

// max_k |Y1(t_k) - (X1(t_k) - S(t_k) + level)| along noiseless paths.
double pathwise_gap(double h, double c, double level) {
    const ModelParams quiet{0.33, 0.2, 0.6, 1e-12};
    const std::size_t n = static_cast<std::size_t>(std::lround(5.0 / h));
    const auto grid = uniform_grid(n, h);
    std::vector<double> s(grid.size());
    for (std::size_t i = 0; i < s.size(); ++i) s[i] = level + 0.5 + c * grid[i];
    const DriftSchedule ds = to_drift(grid, s, level, quiet);
    const auto x = simulate_path(quiet, h, n, {4, 0});
    const auto y = simulate_transformed_path(ds, quiet, h, n, {4, 0});
    double worst = 0.0;
    for (std::size_t k = 0; k <= n; ++k) {
        worst = std::max(worst, std::abs(y[k].x1 - (x[k].x1 - s[k] + level)));
        worst = std::max(worst, std::abs(y[k].x2 - x[k].x2));
    }
    return worst;
}

}  // namespace

TEST_CASE("constant boundary at the level needs no input change") {
    const auto grid = uniform_grid(50, 0.1);
    const std::vector<double> s(grid.size(), 1.7);
    const DriftSchedule ds = to_drift(grid, s, 1.7, kP);
    for (std::size_t k = 0; k < grid.size(); ++k) {
        CHECK(std::abs(ds.mu1[k]) <= 1e-12);
        CHECK(std::abs(ds.mu2[k] - kP.mu) <= 1e-12);
    }
    CHECK(ds.y0 == State2{0.0, 0.0});

    SUBCASE("and simulates the same crossings") {
        const auto a = batch_fpt(kP, PiecewiseLinearBoundary(grid, s), 5.0, 0.1, 5000, 31);
        const auto b = simulate_transformed(ds, kP, 0.1, 5.0, 5000, 31);
        CHECK(a.times == b.times);
        CHECK(a.censored_count == b.censored_count);
    }
}

TEST_CASE("linear boundary gives the closed-form schedule") {
    const double level = 2.0;
    const double c = -0.15;
    const auto grid = uniform_grid(40, 0.25);
    std::vector<double> s(grid.size());
    for (std::size_t k = 0; k < s.size(); ++k) s[k] = level + c * grid[k];
    const DriftSchedule ds = to_drift(grid, s, level, kP);
    for (std::size_t k = 0; k < grid.size(); ++k) {
        CHECK(std::abs(ds.mu1[k] - (-(kP.alpha + kP.beta) * c * grid[k] - c)) <= 1e-10);
        CHECK(std::abs(ds.mu2[k] - (kP.mu + kP.beta * c * grid[k])) <= 1e-10);
    }
    const Vec2 mid = ds.input_at(0.5 * (grid[3] + grid[4]));
    CHECK(mid[0] == doctest::Approx(0.5 * (ds.mu1[3] + ds.mu1[4])));
    CHECK(ds.input_at(-1.0)[1] == ds.mu2.front());
    CHECK(ds.input_at(1e3)[1] == ds.mu2.back());
}

TEST_CASE("quadratic boundary slopes are exact at every knot") {
    const std::vector<double> grid{0.0, 0.3, 0.5, 1.1, 1.2, 2.0};
    std::vector<double> s;
    for (double t : grid) s.push_back(1.0 + 0.4 * t - 0.2 * t * t);
    const ModelParams p{0.5, 0.0, 0.0, 1.0};
    const DriftSchedule ds = to_drift(grid, s, 1.0, p);
    for (std::size_t k = 0; k < grid.size(); ++k) {
        const double slope = 0.4 - 0.4 * grid[k];
        CHECK(ds.mu1[k] == doctest::Approx(-p.alpha * (s[k] - 1.0) - slope).epsilon(1e-10));
    }
}

TEST_CASE("pathwise identity") {
    SUBCASE("constant offset holds exactly, with noise") {
        const auto grid = uniform_grid(100, 0.05);
        const std::vector<double> s(grid.size(), 0.9);
        const DriftSchedule ds = to_drift(grid, s, 2.5, kP);
        const auto x = simulate_path(kP, 0.05, 100, {8, 1});
        const auto y = simulate_transformed_path(ds, kP, 0.05, 100, {8, 1});
        REQUIRE(y.size() == x.size());
        for (std::size_t k = 0; k < x.size(); ++k) {
            CHECK(y[k].x1 == doctest::Approx(x[k].x1 - 0.9 + 2.5).epsilon(1e-9));
            CHECK(y[k].x2 == doctest::Approx(x[k].x2).epsilon(1e-9));
        }
    }
    SUBCASE("moving boundary converges at second order") {
        const double coarse = pathwise_gap(0.01, 0.3, 1.0);
        const double fine = pathwise_gap(0.005, 0.3, 1.0);
        CHECK(fine <= 1e-5);
        CHECK(coarse / fine >= 3.0);
    }
}

TEST_CASE("errors") {
    const std::vector<double> two{0.0, 1.0};
    try {
        to_drift(two, two, 1.0, kP);
        FAIL("expected throw");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::TooFewKnots);
    }
    const auto grid = uniform_grid(10, 0.1);
    const std::vector<double> s(grid.size(), 0.5);
    const DriftSchedule ds = to_drift(grid, s, 0.5, kP, {1.0, 0.0});
    try {
        simulate_transformed(ds, kP, 0.1, 1.0, 10, 1);
        FAIL("expected throw");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::BoundaryBelowStart);
    }
}
