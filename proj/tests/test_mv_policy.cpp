#include "support.hpp"

#include "dsr/error.hpp"
#include "dsr/mv_policy.hpp"

#include <doctest.h>

#include <cmath>

using namespace dsr;

TEST_CASE("Example 1 mean-variance multipliers") {
    const auto m = test::example1();
    const auto s = solve_mv(MvProblem{1.0, 1.3}, m);
    CHECK(s.mult.lambda == doctest::Approx(5.769441466752).epsilon(1e-9));
    CHECK(s.mult.eta == doctest::Approx(3.424115897754).epsilon(1e-9));
    CHECK(s.variance == doctest::Approx(0.348079004512).epsilon(1e-9));
    CHECK(s.mult.lambda == doctest::Approx(5.7694).epsilon(1e-2));
    CHECK(s.mult.eta == doctest::Approx(3.421).epsilon(1e-2));
}

TEST_CASE("moments by quadrature") {
    const auto m = test::example1();
    const auto s = solve_mv(MvProblem{1.0, 1.3}, m);
    const double cut = std::log(s.mult.lambda / s.mult.eta);
    auto x = [&](double y) { return std::max(0.0, 0.5 * (s.mult.lambda - s.mult.eta * std::exp(y))); };
    const double mean = test::normal_expectation(x, -0.14, 0.4, {cut});
    const double budget = test::normal_expectation([&](double y) { return std::exp(y) * x(y); }, -0.14, 0.4, {cut});
    const double second = test::normal_expectation([&](double y) { return x(y) * x(y); }, -0.14, 0.4, {cut});
    CHECK(std::abs(mean - 1.3) < 1e-6);
    CHECK(std::abs(budget - 1.0) < 1e-8);
    const double var_direct = test::normal_expectation(
        [&](double y) { return (x(y) - mean) * (x(y) - mean); }, -0.14, 0.4, {cut});
    CHECK(std::abs(var_direct - (second - mean * mean)) < 1e-8);
    CHECK(s.variance == doctest::Approx(var_direct).epsilon(1e-8));
}

TEST_CASE("wealth and policy") {
    const auto m = test::example1();
    const auto s = solve_mv(MvProblem{1.0, 1.3}, m);
    CHECK(mv_wealth(s, 0.0, 1.0) == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(mv_wealth(s, 0.5, 1e6) < 1e-12);
    for (double z : {0.5, 1.0, 1.5, 1.68}) {
        const double xT = std::max(0.0, 0.5 * (s.mult.lambda - s.mult.eta * z));
        CHECK(mv_wealth(s, 1.0 - 1e-10, z) == doctest::Approx(xT).epsilon(1e-3).scale(1.0));
        CHECK(s.policy.terminal(z) == doctest::Approx(xT).epsilon(1e-14));
    }
    for (double t : {0.2, 0.5, 0.8}) {
        for (double z : {0.3, 0.8, 1.0, 1.4, 2.5}) {
            const double h = 1e-5 * z;
            const double fd = (mv_wealth(s, t, z + h) - mv_wealth(s, t, z - h)) / (2.0 * h);
            const double ref = -z * fd * m.risky_direction(t)(0);
            CHECK(mv_policy(s, t, z)(0) == doctest::Approx(ref).epsilon(1e-5));
        }
    }
    CHECK_THROWS_AS(mv_policy(s, 1.0, 1.0), Error);
}

TEST_CASE("targets at or below riskless growth are rejected") {
    const auto m = test::example1();
    try {
        solve_mv(MvProblem{1.0, 1.0}, m);
        FAIL("expected InvalidProblem");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::InvalidProblem);
    }
}
