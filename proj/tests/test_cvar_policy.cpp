#include "support.hpp"

#include "dsr/cvar_policy.hpp"
#include "dsr/error.hpp"
#include "dsr/gaussian.hpp"
#include "dsr/simulation.hpp"

#include <doctest.h>

#include <cmath>
#include <limits>

using namespace dsr;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

CvarProblem ex2(double d = 12.0, double beta = 0.95) { return {10.0, d, 100.0, beta}; }

/// CVaR of the loss xbar - X* read off the payoff's atoms, using Gaussian probabilities of each piece.
double atom_cvar(const CvarSolution& s, const MarketModel& m) {
    const auto dm = m.deflator_moments(0.0);
    std::vector<double> losses, weights;
    double covered = 0.0;
    auto prob = [&](double lo, double hi) {
        const double a = lo <= 0.0 ? 0.0 : norm_cdf((std::log(lo) - dm.m) / dm.nu);
        const double b = hi == kInf ? 1.0 : norm_cdf((std::log(hi) - dm.m) / dm.nu);
        return b - a;
    };
    for (const auto& pc : s.policy.payoff().pieces) {
        REQUIRE(pc.c1 == 0.0);
        losses.push_back(s.xbar - pc.c0);
        weights.push_back(prob(pc.lo, pc.hi));
        covered = pc.hi;
    }
    if (covered < kInf) {
        losses.push_back(s.xbar);
        weights.push_back(prob(covered, kInf));
    }
    return cvar_of_losses(losses, weights, s.problem.beta);
}

}  // namespace

TEST_CASE("lower target bound as a function of alpha") {
    const auto m = test::example2();
    const auto p = ex2();
    const CvarObjective j(p, m);
    const double xbar = j.xbar();
    CHECK(xbar == doctest::Approx(10.0 * std::exp(0.016)).epsilon(1e-15));
    CHECK(underline_d_of_alpha(p, m, xbar) == 0.0);
    CHECK(underline_d_of_alpha(p, m, xbar + 1.0) == 0.0);

    LpmProblem emb{10.0, 12.0, xbar, 100.0, 1.0};
    CHECK(underline_d_of_alpha(p, m, 0.0) == doctest::Approx(d_bounds(emb, m).lower).epsilon(1e-13));

    // seam where x0 = (xbar - alpha) E[z(T)]
    const double seam = xbar - 10.0 / m.expected_deflator(0.0, 1.0);
    const double below = underline_d_of_alpha(p, m, seam - 1e-10);
    const double above = underline_d_of_alpha(p, m, seam + 1e-10);
    const double at = underline_d_of_alpha(p, m, seam);
    CHECK(std::abs(below - above) < 1e-6);
    CHECK(std::abs(at - below) < 1e-6);
}

TEST_CASE("J(alpha) basic properties") {
    const auto m = test::example2();
    const auto p = ex2();
    const CvarObjective j(p, m);
    CHECK(j(j.xbar()) == j.xbar());
    CHECK(j(j.xbar() + 0.5) == j.xbar() + 0.5);
    const auto [lo, hi] = j.window();
    CHECK(lo == doctest::Approx(j.xbar() - 100.0));
    CHECK(hi == j.xbar());
    for (int i = 0; i <= 50; ++i) {
        const double a = lo + (hi - lo) * i / 50.0;
        CHECK(j(a) >= a);
    }
    const CvarObjective jh(ex2(40.0), m);
    CHECK(jh(0.0) == kInf);
    CHECK(jh(-5.0) == kInf);
}

TEST_CASE("J is convex on a grid around its minimum") {
    const auto m = test::example2();
    const CvarObjective j(ex2(), m);
    std::vector<double> vals;
    const double lo = -1.0, hi = 1.5;
    for (int i = 0; i < 50; ++i) vals.push_back(j(lo + (hi - lo) * i / 49.0));
    for (std::size_t i = 1; i + 1 < vals.size(); ++i) {
        CHECK(vals[i - 1] - 2.0 * vals[i] + vals[i + 1] >= -1e-6);
    }
}

TEST_CASE("search on a synthetic quadratic") {
    const double c = 0.37;
    auto g = [&](double a) { return (a - c) * (a - c); };
    for (auto mode : {AlphaSearchMode::GoldenSection, AlphaSearchMode::Gradient}) {
        AlphaSearchOptions o;
        o.mode = mode;
        o.zeta = 1e-9;
        const auto tr = search_alpha(g, -2.0, 2.0, 1.0, o);
        CHECK(tr.alpha_star == doctest::Approx(c).epsilon(1e-6));
        CHECK(tr.mode == mode);
        CHECK_FALSE(tr.evaluated.empty());
    }
}

TEST_CASE("both alpha searches agree on Example 2") {
    const auto m = test::example2();
    const auto p = ex2();
    const CvarObjective j(p, m);
    const auto golden = search_alpha(j);
    AlphaSearchOptions o;
    o.mode = AlphaSearchMode::Gradient;
    const auto grad = search_alpha(j, o);
    CHECK(std::abs(golden.alpha_star - grad.alpha_star) < 1e-4 * j.xbar());
    CHECK(golden.j_star == doctest::Approx(grad.j_star).epsilon(1e-6));
    for (const auto& [a, v] : golden.evaluated) CHECK(v >= golden.j_star - 1e-12);
}

TEST_CASE("the set of minimizers on a grid is contiguous") {
    const auto m = test::example2();
    const CvarObjective j(ex2(), m);
    const auto tr = search_alpha(j);
    std::vector<int> hits;
    for (int i = 0; i <= 400; ++i) {
        const double a = tr.alpha_star - 0.5 + i / 400.0;
        if (j(a) <= tr.j_star + 1e-9) hits.push_back(i);
    }
    for (std::size_t k = 1; k < hits.size(); ++k) CHECK(hits[k] == hits[k - 1] + 1);
}

TEST_CASE("solved CVaR equals the CVaR of the optimal payoff distribution") {
    const auto m = test::example2();
    for (double beta : {0.9, 0.95, 0.99}) {
        for (double d : {11.0, 12.0, 13.0}) {
            const auto s = solve_cvar(ex2(d, beta), m);
            CAPTURE(beta);
            CAPTURE(d);
            CHECK(s.cvar == doctest::Approx(atom_cvar(s, m)).epsilon(1e-6));
            CHECK(s.policy.wealth(0.0, 1.0) == doctest::Approx(10.0).epsilon(1e-7));
            const auto mo = payoff_moments(s.policy.payoff(), m.deflator_moments(0.0).m, m.deflator_moments(0.0).nu);
            CHECK(mo.mean >= d - 1e-7);
        }
    }
}

TEST_CASE("CVaR tends to the expected loss as beta vanishes") {
    const auto m = test::example2();
    const auto s = solve_cvar(ex2(12.0, 1e-3), m);
    const auto dm = m.deflator_moments(0.0);
    const double mean_x = payoff_moments(s.policy.payoff(), dm.m, dm.nu).mean;
    // CVaR_beta - E[L] <= beta (E[L] - min L) / (1 - beta), and the loss range is B
    const double beta = s.problem.beta;
    CHECK(std::abs(s.cvar - (s.xbar - mean_x)) <= beta * s.problem.B / (1.0 - beta));
}

TEST_CASE("targets below the riskless level dispatch to the shortfall-only payoff") {
    const auto m = test::example2();
    const auto s = solve_cvar(ex2(10.0, 0.95), m);
    REQUIRE(s.lpm);
    CHECK(s.lpm->mult.tag == LpmCase::DegenerateLowTarget);
    REQUIRE(s.policy.payoff().pieces.size() == 1);
    CHECK(s.policy.payoff().pieces[0].c0 == doctest::Approx(s.xbar - s.alpha_star));
    // a tiny ruin probability buys a payoff above the safe level everywhere else
    CHECK(s.cvar < 0.0);
    CHECK(s.cvar == doctest::Approx(atom_cvar(s, m)).epsilon(1e-6));
    CHECK(s.policy.wealth(0.0, 1.0) == doctest::Approx(10.0).epsilon(1e-9));
}

TEST_CASE("budget that cannot finance the cap") {
    const auto m = test::example2();
    CvarProblem p{10.0, 9.0, 10.05, 0.95, 9.0};
    try {
        solve_cvar(p, m);
        FAIL("expected InfeasibleBudget");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::InfeasibleBudget);
    }
}

TEST_CASE("infeasible target") {
    const auto m = test::example2();
    try {
        solve_cvar(ex2(35.0), m);
        FAIL("expected TargetTooHigh");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::TargetTooHigh);
    }
    CHECK_THROWS_AS(solve_cvar(CvarProblem{10.0, 12.0, 100.0, 1.0}, m), Error);
}

TEST_CASE("frontier") {
    const auto m = test::example2();
    std::vector<double> grid;
    for (int i = 0; i <= 10; ++i) grid.push_back(11.0 + 0.2 * i);
    grid.push_back(40.0);
    const auto rows = frontier(ex2(), m, grid);
    REQUIRE(rows.size() == grid.size());
    for (std::size_t i = 1; i + 1 < rows.size(); ++i) {
        CHECK(rows[i].status == "ok");
        CHECK(rows[i].cvar >= rows[i - 1].cvar - 1e-9);
    }
    CHECK(rows.back().status == "TargetTooHigh");
    CHECK(std::isnan(rows.back().cvar));

    const auto one = frontier(ex2(), m, {12.0});
    REQUIRE(one.size() == 1);
    CHECK(one[0].cvar == doctest::Approx(solve_cvar(ex2(), m).cvar));
}
