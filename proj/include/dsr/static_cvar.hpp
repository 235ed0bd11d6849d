#pragma once

#include "dsr/market_model.hpp"
#include "dsr/simplex.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <string>

namespace dsr {

/// Gross returns over [0, T]: one row per equally likely scenario, risky assets then the bond.
struct ScenarioSet {
    Eigen::MatrixXd returns;
    std::uint64_t seed = 0;

    int size() const { return static_cast<int>(returns.rows()); }
    int n_assets() const { return static_cast<int>(returns.cols()) - 1; }
};

ScenarioSet generate_scenarios(const MarketModel& model, int n, std::uint64_t seed);

void write_scenarios_csv(std::ostream& os, const ScenarioSet& s);
ScenarioSet read_scenarios_csv(std::istream& is);

/**
 * Buy-and-hold CVaR program. Variables: dollar holdings w (assets then bond), alpha, and one
 * excess-loss variable u_k >= 0 per scenario. Rows: u_k + R_k'w + alpha >= xbar per scenario,
 * sum w = x0, mean(R)'w >= d. Objective alpha + sum u_k / ((1 - beta) N).
 */
LinearProgram build_ru_lp(const ScenarioSet& s, double beta, double d, double x0, double xbar);

struct StaticCvarSolution {
    LpStatus status = LpStatus::Infeasible;
    Eigen::VectorXd weights;
    double alpha = 0.0;
    double cvar = 0.0;
    /// CVaR of the weights re-estimated on the scenarios by sorting.
    double cvar_recomputed = 0.0;
    double primal_residual = 0.0;
    int iterations = 0;
    int n_scenarios = 0;
};

/// xbar defaults to x0 times the bond's gross return.
StaticCvarSolution solve_static_cvar(const ScenarioSet& s, double beta, double d, double x0,
                                     double xbar = std::numeric_limits<double>::quiet_NaN());
StaticCvarSolution solve_static_cvar(const MarketModel& model, double beta, double d, double x0,
                                     int n_scenarios, std::uint64_t seed);

}  // namespace dsr
