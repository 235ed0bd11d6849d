#include "dsr/mv_policy.hpp"

#include "dsr/error.hpp"
#include "dsr/solvers.hpp"

#include <cmath>
#include <string>

namespace dsr {

namespace {

// E[X], E[zX] of (eta / 2)(delta - z)_+.
Eigen::Vector2d mv_moments(double delta, double eta, double m0, double nu0) {
    const double h0 = lognormal_partial(0, delta, m0, nu0);
    const double h1 = lognormal_partial(1, delta, m0, nu0);
    const double h2 = lognormal_partial(2, delta, m0, nu0);
    return {0.5 * eta * (delta * h0 - h1), 0.5 * eta * (delta * h1 - h2)};
}

double mean_budget_ratio(double delta, double m0, double nu0) {
    const auto mo = mv_moments(delta, 1.0, m0, nu0);
    return mo(0) / mo(1);
}

}  // namespace

Payoff mv_payoff(const MvMultipliers& m) {
    Payoff x;
    x.pieces.push_back({0.0, m.lambda / m.eta, 0.5 * m.lambda, -0.5 * m.eta});
    return x;
}

MvSolution solve_mv(const MvProblem& p, const MarketModel& model) {
    const double growth = std::exp(model.integrated_rate(0.0, model.horizon()));
    if (!(p.x0 > 0.0)) fail(ErrorCode::InvalidProblem, "x0 must be positive");
    if (!(p.d > p.x0 * growth)) {
        fail(ErrorCode::InvalidProblem, "target must exceed the riskless terminal wealth");
    }
    const auto dm = model.deflator_moments(0.0);
    if (!(dm.nu > 0.0)) fail(ErrorCode::InvalidProblem, "deflator is deterministic");
    const double m0 = dm.m, nu0 = dm.nu;

    auto residual = [&](double delta, double eta) {
        const auto mo = mv_moments(delta, eta, m0, nu0);
        return Eigen::Vector2d((mo(0) - p.d) / p.d, (mo(1) - p.x0) / p.x0);
    };

    double delta = 0.0, eta = 0.0;
    bool solved = false;
    try {
        const double delta0 = std::exp(m0 + 2.0 * nu0);
        const double eta0 = p.x0 / mv_moments(delta0, 1.0, m0, nu0)(1);
        const auto rep = solve_2d(
            [&](const Eigen::Vector2d& v) { return residual(std::exp(v(0)), std::exp(v(1))); },
            Eigen::Vector2d(std::log(delta0), std::log(eta0)));
        delta = std::exp(rep.x(0));
        eta = std::exp(rep.x(1));
        solved = residual(delta, eta).lpNorm<Eigen::Infinity>() <= 1e-10;
    } catch (const Error&) {
        solved = false;
    }
    if (!solved) {
        // the mean/budget ratio falls from +inf to e^{int r} as delta grows
        const double target = p.d / p.x0;
        auto g = [&](double u) { return mean_budget_ratio(std::exp(u), m0, nu0) / target - 1.0; };
        double lo = m0, hi = m0;
        for (int k = 0; g(lo) < 0.0 && k < 200; ++k) lo -= nu0;
        for (int k = 0; g(hi) > 0.0 && k < 200; ++k) hi += nu0;
        delta = std::exp(find_root_1d(g, lo, hi, RootOptions{1e-14, 300}).x(0));
        eta = p.x0 / mv_moments(delta, 1.0, m0, nu0)(1);
        if (!(residual(delta, eta).lpNorm<Eigen::Infinity>() <= 1e-9)) {
            fail(ErrorCode::SolverDiverged, "mean-variance multiplier system did not converge");
        }
    }

    MvMultipliers mult{eta * delta, eta};
    Payoff x = mv_payoff(mult);
    const auto mo = payoff_moments(x, m0, nu0);
    return MvSolution{p, mult, mo.second - mo.mean * mo.mean, PayoffPolicy(model, std::move(x))};
}

double mv_wealth(const MvSolution& s, double t, double z) { return s.policy.wealth(t, z); }

Eigen::VectorXd mv_policy(const MvSolution& s, double t, double z) {
    return s.policy.policy(t, z);
}

}  // namespace dsr
