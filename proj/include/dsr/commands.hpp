#pragma once

#include "dsr/error.hpp"
#include "dsr/io.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace dsr {

/// Solves the configured problem. The result carries the market and payoff, so it can be reloaded.
json solve_to_json(const RunConfig& cfg);

// Each command writes its artifacts plus assumptions.json into cfg.run.out.
void cmd_solve(const RunConfig& cfg);
void cmd_policy_table(const RunConfig& cfg);
void cmd_frontier(const RunConfig& cfg);
void cmd_simulate(const RunConfig& cfg);
void cmd_compare_static(const RunConfig& cfg);

/// Log-spaced grid for the policy table; defaults to exp(mean +/- 3 sd) of ln z(t).
std::vector<double> policy_z_grid(const RunConfig& cfg);

/// 0 ok, 1 solver failure, 2 infeasible target or budget, 3 bad configuration.
int exit_code(ErrorCode code) noexcept;

/// Dispatches by name and maps failures to exit codes, writing diagnostics to err.
int run_command(const std::string& cmd, const RunConfig& cfg, std::ostream& err);

}  // namespace dsr
