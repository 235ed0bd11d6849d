#pragma once

#include "dsr/cvar_policy.hpp"
#include "dsr/lpm_policy.hpp"
#include "dsr/market_model.hpp"
#include "dsr/mv_policy.hpp"
#include "dsr/payoff.hpp"

#include <json.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace dsr {

using json = nlohmann::json;

enum class ProblemKind { Lpm, Cvar, Mv };

struct RunOptions {
    std::uint64_t seed = 20240601;
    int paths = 10000;
    int steps = 256;
    int scenarios = 20000;
    /// Time at which policy tables are evaluated.
    double t = 0.5;
    std::optional<double> z_min;
    std::optional<double> z_max;
    int z_points = 400;
    std::vector<double> d_grid;
    std::vector<double> betas;
    std::string out = "out";
};

struct RunConfig {
    explicit RunConfig(MarketModel m) : market(std::move(m)) {}

    json market_json;
    MarketModel market;
    ProblemKind kind = ProblemKind::Lpm;
    LpmProblem lpm;
    CvarProblem cvar;
    MvProblem mv;
    AlphaSearchOptions alpha;
    RunOptions run;
    /// Free-form record of modelling assumptions, copied into every artifact.
    json assumptions;
};

/// Market block: {"horizon", "segments": [{"t_start", "r", "mu", "sigma"}]} or a single
/// constant segment given inline as {"horizon", "r", "mu", "sigma"}. Throws ConfigError.
MarketModel parse_market(const json& j);
json market_to_json(const MarketModel& m);

RunConfig parse_config(const json& j);
RunConfig load_config(const std::string& path);

json payoff_to_json(const Payoff& x);
Payoff payoff_from_json(const json& j);

/// Rebuilds the replicating policy stored in a solution artifact.
PayoffPolicy policy_from_solution(const json& solution);

/// 12 significant digits, '.' decimal.
std::string csv_number(double v);

}  // namespace dsr
