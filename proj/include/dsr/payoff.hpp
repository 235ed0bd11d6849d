#pragma once

#include "dsr/market_model.hpp"

#include <Eigen/Dense>

#include <vector>

namespace dsr {

/// X = c0 + c1 z on lo < z <= hi. hi may be +infinity.
struct PayoffPiece {
    double lo = 0.0;
    double hi = 0.0;
    double c0 = 0.0;
    double c1 = 0.0;
};

/// Terminal wealth as a function of z(T): a sorted list of disjoint pieces, zero elsewhere.
struct Payoff {
    std::vector<PayoffPiece> pieces;

    double operator()(double z) const;
    /// Sorted breakpoints where the payoff has a kink or jump.
    std::vector<double> kinks() const;
};

/// E[Y^k 1{Y <= a}] for ln Y ~ N(m, nu^2); a may be 0 or +infinity.
double lognormal_partial(double k, double a, double m, double nu);

struct PayoffMoments {
    double mean = 0.0;    // E[X]
    double budget = 0.0;  // E[z X]
    double second = 0.0;  // E[X^2]
};

/// Moments of X(z(T)) with ln z(T) ~ N(m0, nu0^2).
PayoffMoments payoff_moments(const Payoff& x, double m0, double nu0);

/// Probability that z(T) lies in (lo, hi].
double piece_probability(double lo, double hi, double m0, double nu0);

/**
 * A payoff attached to a market: the replicating wealth x(t, z) = E[z(T)/z(t) X | z(t) = z]
 * and the portfolio pi(t, z) = -z dx/dz (sigma sigma')^{-1} b.
 */
class PayoffPolicy {
public:
    static constexpr double kTerminalNu = 1e-8;

    PayoffPolicy(MarketModel model, Payoff payoff);

    const MarketModel& model() const noexcept { return model_; }
    const Payoff& payoff() const noexcept { return payoff_; }

    double terminal(double z) const { return payoff_(z); }
    double wealth(double t, double z) const;
    /// dx/dz at (t, z).
    double wealth_dz(double t, double z) const;
    /// Throws PolicyUndefinedAtTerminal when nu(t) is below kTerminalNu.
    Eigen::VectorXd policy(double t, double z) const;

private:
    MarketModel model_;
    Payoff payoff_;
};

}  // namespace dsr
