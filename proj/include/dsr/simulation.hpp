#pragma once

#include "dsr/market_model.hpp"
#include "dsr/payoff.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace dsr {

/// Counter-based variates: each (seed, path, step, component) maps to one fixed number.
class CounterRng {
public:
    explicit CounterRng(std::uint64_t seed) : seed_(seed) {}

    std::uint64_t bits(std::uint64_t path, std::uint64_t step, std::uint64_t comp) const;
    /// Uniform on the open interval (0, 1).
    double uniform(std::uint64_t path, std::uint64_t step, std::uint64_t comp) const;
    double normal(std::uint64_t path, std::uint64_t step, std::uint64_t comp) const;

private:
    std::uint64_t seed_;
};

struct PathEnsemble {
    int n_paths = 0;
    int n_steps = 0;
    std::uint64_t seed = 0;
    std::vector<double> times;
    /// Terminal values, one per path.
    Eigen::VectorXd z_T;
    Eigen::VectorXd x_T;
    /// Full paths (n_paths x (n_steps + 1)); only filled when requested.
    Eigen::MatrixXd z_paths;
    Eigen::MatrixXd x_paths;
};

PathEnsemble simulate_deflator(const MarketModel& model, int n_paths, int n_steps,
                               std::uint64_t seed, bool keep_paths = false);

/// Portfolio as a function of (t, z(t)).
using PortfolioFn = std::function<Eigen::VectorXd(double, double)>;

/// Euler scheme for the self-financing wealth equation driven by the ensemble's Brownian increments.
void run_policy(const MarketModel& model, const PortfolioFn& policy, double x0, PathEnsemble& ens);
void run_policy(const MarketModel& model, const PayoffPolicy& policy, double x0, PathEnsemble& ens);

enum class Measure { Lpm, Cvar, Mean };

struct RiskEstimate {
    double value = 0.0;
    double std_error = 0.0;
    std::size_t n = 0;
    Measure measure = Measure::Mean;
    std::string label;
};

RiskEstimate estimate_mean(const Eigen::VectorXd& samples);
/// Sample mean of (gamma - x)_+^q with a jackknife standard error; q = 0 counts x < gamma.
RiskEstimate estimate_lpm(const Eigen::VectorXd& samples, double gamma, double q);
/// CVaR of the loss xbar - x: tail average over the worst 1 - beta mass, splitting the VaR atom.
RiskEstimate estimate_cvar(const Eigen::VectorXd& samples, double beta, double xbar);

/// Tail average of weighted losses over the worst 1 - beta probability mass.
double cvar_of_losses(std::vector<double> losses, std::vector<double> weights, double beta);
/// min over alpha of alpha + E[(loss - alpha)_+] / (1 - beta), computed over the kinks.
double ru_minimum(std::vector<double> losses, double beta);

}  // namespace dsr
