#pragma once

#include "dsr/market_model.hpp"
#include "dsr/payoff.hpp"

#include <Eigen/Dense>

namespace dsr {

/// Minimize Var[X] subject to E[X] = d, E[z X] = x0 and X >= 0.
struct MvProblem {
    double x0 = 1.0;
    double d = 1.3;
};

struct MvMultipliers {
    double lambda = 0.0;
    double eta = 0.0;
};

struct MvSolution {
    MvProblem problem;
    MvMultipliers mult;
    double variance = 0.0;
    PayoffPolicy policy;
};

/// X = (lambda - eta z)_+ / 2.
Payoff mv_payoff(const MvMultipliers& m);

MvSolution solve_mv(const MvProblem& p, const MarketModel& model);

double mv_wealth(const MvSolution& s, double t, double z);
Eigen::VectorXd mv_policy(const MvSolution& s, double t, double z);

}  // namespace dsr
