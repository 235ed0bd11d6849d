#pragma once

#include "dsr/market_model.hpp"
#include "dsr/payoff.hpp"

#include <Eigen/Dense>

#include <string_view>
#include <vector>

namespace dsr {

/// Minimize E[(gamma - X)_+^q] subject to E[X] >= d, E[z X] = x0 and 0 <= X <= B.
struct LpmProblem {
    double x0 = 1.0;
    double d = 1.0;
    double gamma = 1.0;
    double B = 10.0;
    /// 0, any value in (0, 1], or 2.
    double q = 2.0;
};

enum class LpmCase { Regular, DegenerateLowTarget, DegenerateRich };

std::string_view to_string(LpmCase c) noexcept;

struct Multipliers {
    double lambda = 0.0;
    double eta = 0.0;
    LpmCase tag = LpmCase::Regular;
};

struct DBounds {
    double lower = 0.0;
    double upper = 0.0;
};

/// Throws InvalidProblem when the standing assumptions fail.
void validate(const LpmProblem& p, const MarketModel& model);

/// Throws InfeasibleBudget when x0 / B >= E[z(T)].
DBounds d_bounds(const LpmProblem& p, const MarketModel& model);

/// Throws TargetTooHigh when d >= d_upper.
LpmCase classify(const LpmProblem& p, const MarketModel& model);

/// How a regular multiplier pair was obtained.
enum class SolvePath { ClosedForm, Newton, Nested };

struct LpmSolution {
    LpmProblem problem;
    DeflatorMoments moments0;
    Multipliers mult;
    /// Upper edge of the cap region, lambda / eta.
    double delta = 0.0;
    /// Width of the interior branch.
    double rho = 0.0;
    double objective = 0.0;
    double hit_probability = 0.0;
    DBounds bounds;
    SolvePath path = SolvePath::ClosedForm;
    /// Set for DegenerateRich: the reported payoff is one member of a family of optima.
    bool multiple_optima = false;
    PayoffPolicy policy;

    double terminal_wealth(double z) const { return policy.terminal(z); }
    double wealth(double t, double z) const { return policy.wealth(t, z); }
    Eigen::VectorXd portfolio(double t, double z) const { return policy.policy(t, z); }
};

struct LpmOptions {
    /// Try the 2-D Newton solve before the nested 1-D solves.
    bool newton_first = true;
};

LpmSolution solve_lpm(const LpmProblem& p, const MarketModel& model, const LpmOptions& opts = {});

/// Multipliers only; the same work as solve_lpm.
Multipliers solve_multipliers(const LpmProblem& p, const MarketModel& model);

/// Terminal payoff for given multipliers, built directly from the pointwise minimizer.
Payoff lpm_payoff(const LpmProblem& p, const Multipliers& m, double delta_rich = 0.0);

/// E[(gamma - X)_+^q] of a payoff built by lpm_payoff.
double lpm_objective(const LpmProblem& p, const Payoff& x, double m0, double nu0);

struct FeedbackRow {
    double z = 0.0;
    double x = 0.0;
    Eigen::VectorXd pi;
    Eigen::VectorXd w;
};

struct FeedbackCurve {
    std::vector<FeedbackRow> rows;
    /// x(t, .) was not strictly decreasing on the grid, so x does not determine z uniquely.
    bool monotonicity_warning = false;
};

FeedbackCurve feedback_curve(const PayoffPolicy& policy, double t, const std::vector<double>& z_grid);

/// Discounted bounds (0, B e^{-int_t^T r}) of the wealth process.
DBounds wealth_envelope(const LpmProblem& p, const MarketModel& model, double t);

}  // namespace dsr
