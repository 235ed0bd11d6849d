#pragma once

#include "dsr/lpm_policy.hpp"
#include "dsr/market_model.hpp"
#include "dsr/payoff.hpp"

#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace dsr {

/// Minimize CVaR_beta of the loss xbar - X subject to E[X] >= d, E[z X] = x0, 0 <= X <= B.
struct CvarProblem {
    double x0 = 10.0;
    double d = 11.0;
    double B = 100.0;
    double beta = 0.95;
    /// Safe level; NaN means x0 e^{int_0^T r}.
    double xbar = std::numeric_limits<double>::quiet_NaN();
};

double safe_level(const CvarProblem& p, const MarketModel& model);

enum class AlphaSearchMode { GoldenSection, Gradient };

struct AlphaSearchOptions {
    AlphaSearchMode mode = AlphaSearchMode::GoldenSection;
    /// Forward-difference step; NaN means 1e-5 * xbar.
    double zeta = std::numeric_limits<double>::quiet_NaN();
    /// Initial gradient step, adapted by backtracking.
    double theta = 1.0;
    double eps = 1e-7;
    double alpha0 = 0.0;
    double tol = 1e-8;
    int max_iter = 5000;
};

struct AlphaSearchTrace {
    std::vector<std::pair<double, double>> evaluated;
    double alpha_star = 0.0;
    double j_star = 0.0;
    AlphaSearchMode mode = AlphaSearchMode::GoldenSection;
    int iterations = 0;
};

/**
 * J(alpha) = alpha + E[(xbar - alpha - X_alpha)_+] / (1 - beta), X_alpha the optimal payoff of the
 * embedded q = 1 shortfall problem with benchmark xbar - alpha. Values are memoized on a 1e-12 grid.
 */
class CvarObjective {
public:
    CvarObjective(CvarProblem p, const MarketModel& model);

    double xbar() const noexcept { return xbar_; }
    const CvarProblem& problem() const noexcept { return p_; }
    /// Search window [xbar - B, xbar].
    std::pair<double, double> window() const { return {xbar_ - p_.B, xbar_}; }

    /// +infinity when the target cannot be met.
    double operator()(double alpha) const;
    /// Lower target bound of the embedded problem at alpha; 0 once alpha >= xbar.
    double d_lower(double alpha) const;

    LpmProblem embedded(double alpha) const;

private:
    CvarProblem p_;
    const MarketModel* model_;
    double xbar_;
    double d_upper_;
    mutable std::map<long long, double> cache_;
};

double underline_d_of_alpha(const CvarProblem& p, const MarketModel& model, double alpha);
double j_value(const CvarProblem& p, const MarketModel& model, double alpha);

AlphaSearchTrace search_alpha(const CvarObjective& j, const AlphaSearchOptions& opts = {});
/// Same search for any J on [lo, hi]; scale sets the default forward-difference step.
AlphaSearchTrace search_alpha(const std::function<double(double)>& j, double lo, double hi,
                              double scale, const AlphaSearchOptions& opts = {});

struct CvarSolution {
    CvarProblem problem;
    double xbar = 0.0;
    double alpha_star = 0.0;
    double cvar = 0.0;
    AlphaSearchTrace trace;
    /// Case of the embedded shortfall problem at alpha_star; empty when gamma reached the cap.
    std::optional<LpmSolution> lpm;
    PayoffPolicy policy;
};

CvarSolution solve_cvar(const CvarProblem& p, const MarketModel& model,
                        const AlphaSearchOptions& opts = {});

struct FrontierRow {
    double d = 0.0;
    double alpha_star = 0.0;
    double cvar = 0.0;
    std::string status;
};

std::vector<FrontierRow> frontier(const CvarProblem& base, const MarketModel& model,
                                  const std::vector<double>& d_grid,
                                  const AlphaSearchOptions& opts = {});

}  // namespace dsr
