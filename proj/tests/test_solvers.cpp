#include "dsr/error.hpp"
#include "dsr/gaussian.hpp"
#include "dsr/solvers.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace dsr;

TEST_CASE("find_root_1d") {
    auto r = find_root_1d([](double x) { return x - 1.0; }, 0.0, 2.0);
    CHECK(r.converged);
    CHECK(r.x(0) == doctest::Approx(1.0).epsilon(1e-12));

    r = find_root_1d([](double x) { return norm_cdf(x) - 0.5; }, -3.0, 3.0);
    CHECK(std::abs(r.x(0)) < 1e-12);

    const PartialMoments pm(-0.14, 0.4);
    r = find_root_1d([&](double x) { return pm.H(1.0, std::exp(x)) - 0.1; }, -5.0, 5.0);
    CHECK(std::exp(r.x(0)) == doctest::Approx(pm.invert_H1(0.1)).epsilon(1e-10));

    CHECK_THROWS_AS(find_root_1d([](double x) { return x * x + 1.0; }, -1.0, 1.0), Error);
    try {
        find_root_1d([](double x) { return x * x + 1.0; }, -1.0, 1.0);
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::NoSignChange);
    }
}

TEST_CASE("find_root_1d stays inside the bracket") {
    std::mt19937_64 gen(3);
    std::uniform_real_distribution<double> u(-10.0, 10.0);
    for (int i = 0; i < 200; ++i) {
        const double root = u(gen);
        const double lo = root - std::abs(u(gen)) - 1e-3, hi = root + std::abs(u(gen)) + 1e-3;
        const auto r = find_root_1d([&](double x) { return std::tanh(x - root); }, lo, hi);
        CHECK(r.x(0) >= lo);
        CHECK(r.x(0) <= hi);
        CHECK(r.x(0) == doctest::Approx(root).epsilon(1e-10));
    }
}

TEST_CASE("solve_2d") {
    auto r = solve_2d([](const Eigen::Vector2d& v) { return Eigen::Vector2d(v(0) - 1.0, v(1) - 2.0); },
                      Eigen::Vector2d(5.0, -3.0));
    CHECK(r.converged);
    CHECK(r.x(0) == doctest::Approx(1.0));
    CHECK(r.x(1) == doctest::Approx(2.0));

    r = solve_2d([](const Eigen::Vector2d& v) {
        return Eigen::Vector2d(v(0) * v(0) + v(1) * v(1) - 1.0, v(0) - v(1));
    }, Eigen::Vector2d(1.0, 0.5));
    CHECK(r.x(0) == doctest::Approx(std::sqrt(0.5)).epsilon(1e-10));
    CHECK(r.x(1) == doctest::Approx(std::sqrt(0.5)).epsilon(1e-10));
    CHECK(r.residual_norm <= 1e-10);

    try {
        solve_2d([](const Eigen::Vector2d& v) { return Eigen::Vector2d(v(0) + v(1) - 1.0, 2.0 * v(0) + 2.0 * v(1)); },
                 Eigen::Vector2d(0.0, 0.0));
        FAIL("expected SingularJacobian");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::SingularJacobian);
    }
}

TEST_CASE("solve_2d on random linear systems converges in at most 3 iterations") {
    std::mt19937_64 gen(5);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int i = 0; i < 100; ++i) {
        Eigen::Matrix2d A;
        A << 2.0 + u(gen), 0.3 * u(gen), 0.3 * u(gen), 2.0 + u(gen);
        const Eigen::Vector2d b(u(gen), u(gen));
        const auto r = solve_2d([&](const Eigen::Vector2d& v) -> Eigen::Vector2d { return A * v - b; },
                                Eigen::Vector2d(u(gen), u(gen)));
        CHECK(r.converged);
        CHECK(r.iterations <= 3);
    }
}

TEST_CASE("minimize_scalar_convex") {
    auto r = minimize_scalar_convex([](double x) { return (x - 3.0) * (x - 3.0); }, 0.0, 10.0);
    CHECK(r.x(0) == doctest::Approx(3.0).epsilon(1e-7));
    CHECK(r.width <= 1e-8);

    r = minimize_scalar_convex([](double x) { return std::abs(x); }, -1.0, 2.0);
    CHECK(std::abs(r.x(0)) < 1e-8);

    MinimizeOptions o;
    o.max_iter = 5;
    CHECK_THROWS_AS(minimize_scalar_convex([](double x) { return x * x; }, -1.0, 1.0, o), Error);
}
