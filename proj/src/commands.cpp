#include "dsr/commands.hpp"

#include "dsr/simulation.hpp"
#include "dsr/static_cvar.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <optional>
#include <ostream>

namespace dsr {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kInf = std::numeric_limits<double>::infinity();

std::string kind_name(ProblemKind k) {
    switch (k) {
        case ProblemKind::Lpm: return "lpm";
        case ProblemKind::Cvar: return "cvar";
        case ProblemKind::Mv: return "mv";
    }
    return "unknown";
}

std::string path_name(SolvePath p) {
    switch (p) {
        case SolvePath::ClosedForm: return "closed_form";
        case SolvePath::Newton: return "newton";
        case SolvePath::Nested: return "nested";
    }
    return "unknown";
}

json num(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

std::filesystem::path out_file(const RunConfig& cfg, const std::string& name) {
    std::filesystem::path dir(cfg.run.out);
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) fail(ErrorCode::ConfigError, "cannot create output directory " + dir.string());
    return dir / name;
}

std::ofstream open_out(const RunConfig& cfg, const std::string& name) {
    const auto path = out_file(cfg, name);
    std::ofstream os(path, std::ios::binary);
    if (!os) fail(ErrorCode::ConfigError, "cannot write " + path.string());
    return os;
}

void write_json(const RunConfig& cfg, const std::string& name, const json& j) {
    auto os = open_out(cfg, name);
    os << j.dump(2) << '\n';
}

double growth(const MarketModel& m) { return std::exp(m.integrated_rate(0.0, m.horizon())); }

bool riskless(const MarketModel& m) { return m.deflator_moments(0.0).nu < PayoffPolicy::kTerminalNu; }

double target_of(const RunConfig& cfg) {
    switch (cfg.kind) {
        case ProblemKind::Lpm: return cfg.lpm.d;
        case ProblemKind::Cvar: return cfg.cvar.d;
        case ProblemKind::Mv: return cfg.mv.d;
    }
    return kNaN;
}

double x0_of(const RunConfig& cfg) {
    switch (cfg.kind) {
        case ProblemKind::Lpm: return cfg.lpm.x0;
        case ProblemKind::Cvar: return cfg.cvar.x0;
        case ProblemKind::Mv: return cfg.mv.x0;
    }
    return kNaN;
}

RunConfig with_target(const RunConfig& cfg, double d) {
    RunConfig c = cfg;
    c.lpm.d = d;
    c.cvar.d = d;
    c.mv.d = d;
    return c;
}

json assumptions_json(const RunConfig& cfg) {
    const auto& m = cfg.market;
    json j;
    j["user"] = cfg.assumptions;
    j["market"] = market_to_json(m);
    j["riskless_growth"] = growth(m);
    j["problem_kind"] = kind_name(cfg.kind);
    if (cfg.kind == ProblemKind::Lpm) j["gamma"] = cfg.lpm.gamma;
    if (cfg.kind == ProblemKind::Cvar) {
        j["xbar"] = safe_level(cfg.cvar, m);
        j["B"] = cfg.cvar.B;
    }
    j["run"] = {{"seed", cfg.run.seed},
                {"paths", cfg.run.paths},
                {"steps", cfg.run.steps},
                {"scenarios", cfg.run.scenarios}};
    return j;
}

void write_assumptions(const RunConfig& cfg) { write_json(cfg, "assumptions.json", assumptions_json(cfg)); }

/// Deterministic deflator: the only budget-feasible payoff worth holding is the bond.
Payoff riskless_payoff(const RunConfig& cfg) {
    const double x = x0_of(cfg) * growth(cfg.market);
    if (target_of(cfg) > x * (1.0 + 1e-12)) {
        fail(ErrorCode::TargetTooHigh, "target d = " + std::to_string(target_of(cfg)) +
                                           " exceeds d_upper = " + std::to_string(x) + " (riskless market)");
    }
    return Payoff{{PayoffPiece{0.0, kInf, x, 0.0}}};
}

struct Solved {
    json result;
    PayoffPolicy policy;
};

Solved solve_riskless(const RunConfig& cfg) {
    const Payoff x = riskless_payoff(cfg);
    const double xt = x.pieces.front().c0;
    json r;
    r["case"] = "Riskless";
    switch (cfg.kind) {
        case ProblemKind::Lpm: {
            const double gap = cfg.lpm.gamma - xt;
            double obj = 0.0;
            if (gap > 0.0) obj = cfg.lpm.q == 0.0 ? 1.0 : std::pow(gap, cfg.lpm.q);
            r["objective"] = obj;
            r["hit_probability"] = 0.0;
            r["d_upper"] = xt;
            break;
        }
        case ProblemKind::Cvar: {
            const double loss = safe_level(cfg.cvar, cfg.market) - xt;
            r["xbar"] = safe_level(cfg.cvar, cfg.market);
            r["alpha_star"] = loss;
            r["cvar"] = loss;
            break;
        }
        case ProblemKind::Mv:
            r["variance"] = 0.0;
            break;
    }
    return {r, PayoffPolicy(cfg.market, x)};
}

Solved solve(const RunConfig& cfg) {
    if (riskless(cfg.market)) return solve_riskless(cfg);
    json r;
    switch (cfg.kind) {
        case ProblemKind::Lpm: {
            const auto s = solve_lpm(cfg.lpm, cfg.market);
            r["case"] = std::string(to_string(s.mult.tag));
            r["lambda"] = s.mult.lambda;
            r["eta"] = s.mult.eta;
            r["delta"] = num(s.delta);
            r["rho"] = num(s.rho);
            r["d_lower"] = s.bounds.lower;
            r["d_upper"] = s.bounds.upper;
            r["objective"] = s.objective;
            r["hit_probability"] = s.hit_probability;
            r["solve_path"] = path_name(s.path);
            r["multiple_optima"] = s.multiple_optima;
            return {r, s.policy};
        }
        case ProblemKind::Cvar: {
            const auto s = solve_cvar(cfg.cvar, cfg.market, cfg.alpha);
            r["xbar"] = s.xbar;
            r["alpha_star"] = s.alpha_star;
            r["cvar"] = s.cvar;
            r["alpha_search"] = s.trace.mode == AlphaSearchMode::GoldenSection ? "golden" : "gradient";
            r["alpha_iterations"] = s.trace.iterations;
            r["case"] = s.lpm ? std::string(to_string(s.lpm->mult.tag)) : std::string("CapReached");
            if (s.lpm) {
                r["embedded_gamma"] = s.lpm->problem.gamma;
                r["lambda"] = s.lpm->mult.lambda;
                r["eta"] = s.lpm->mult.eta;
                r["d_lower"] = s.lpm->bounds.lower;
                r["d_upper"] = s.lpm->bounds.upper;
            }
            return {r, s.policy};
        }
        case ProblemKind::Mv: {
            const auto s = solve_mv(cfg.mv, cfg.market);
            r["lambda"] = s.mult.lambda;
            r["eta"] = s.mult.eta;
            r["variance"] = s.variance;
            return {r, s.policy};
        }
    }
    fail(ErrorCode::ConfigError, "unknown problem kind");
}

json problem_json(const RunConfig& cfg) {
    switch (cfg.kind) {
        case ProblemKind::Lpm:
            return {{"x0", cfg.lpm.x0}, {"d", cfg.lpm.d}, {"gamma", cfg.lpm.gamma},
                    {"B", cfg.lpm.B}, {"q", cfg.lpm.q}};
        case ProblemKind::Cvar:
            return {{"x0", cfg.cvar.x0}, {"d", cfg.cvar.d}, {"B", cfg.cvar.B},
                    {"beta", cfg.cvar.beta}, {"xbar", num(cfg.cvar.xbar)}};
        case ProblemKind::Mv:
            return {{"x0", cfg.mv.x0}, {"d", cfg.mv.d}};
    }
    return json::object();
}

std::string error_status(const Error& e) { return std::string(to_string(e.code())); }

}  // namespace

json solve_to_json(const RunConfig& cfg) {
    const auto s = solve(cfg);
    json j;
    j["kind"] = kind_name(cfg.kind);
    j["problem"] = problem_json(cfg);
    j["result"] = s.result;
    j["market"] = market_to_json(cfg.market);
    j["payoff"] = payoff_to_json(s.policy.payoff());
    j["wealth_at_origin"] = s.policy.wealth(0.0, 1.0);
    j["assumptions"] = cfg.assumptions;
    return j;
}

void cmd_solve(const RunConfig& cfg) {
    const auto j = solve_to_json(cfg);
    write_json(cfg, "solution.json", j);
    write_assumptions(cfg);
}

std::vector<double> policy_z_grid(const RunConfig& cfg) {
    const auto& m = cfg.market;
    const double t = cfg.run.t;
    const auto d0 = m.deflator_moments(0.0);
    const auto dt = m.deflator_moments(t);
    // ln z(t) = ln z(T)/z(0) - ln z(T)/z(t), the two pieces independent
    const double mean = d0.m - dt.m;
    const double sd = std::sqrt(std::max(0.0, d0.nu * d0.nu - dt.nu * dt.nu));
    const double lo = cfg.run.z_min ? std::log(*cfg.run.z_min) : mean - 3.0 * sd;
    const double hi = cfg.run.z_max ? std::log(*cfg.run.z_max) : mean + 3.0 * sd;
    const int n = cfg.run.z_points;
    if (n < 1) fail(ErrorCode::ConfigError, "z_points must be at least 1");
    if (!std::isfinite(lo) || !std::isfinite(hi) || hi < lo) {
        fail(ErrorCode::ConfigError, "z range must satisfy 0 < z_min <= z_max");
    }
    if (n == 1 || hi == lo) {
        return {std::exp(cfg.run.z_min ? lo : 0.5 * (lo + hi))};
    }
    std::vector<double> z(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) z[static_cast<std::size_t>(i)] = std::exp(lo + (hi - lo) * i / (n - 1));
    return z;
}

void cmd_policy_table(const RunConfig& cfg) {
    const auto s = solve(cfg);
    const auto curve = feedback_curve(s.policy, cfg.run.t, policy_z_grid(cfg));
    const int na = cfg.market.n_assets();
    auto os = open_out(cfg, "policy_table.csv");
    os << "z,x";
    for (int i = 1; i <= na; ++i) os << ",pi_" << i;
    for (int i = 1; i <= na; ++i) os << ",w_" << i;
    os << '\n';
    for (const auto& row : curve.rows) {
        os << csv_number(row.z) << ',' << csv_number(row.x);
        for (int i = 0; i < na; ++i) os << ',' << csv_number(row.pi(i));
        for (int i = 0; i < na; ++i) os << ',' << csv_number(row.w(i));
        os << '\n';
    }
    write_assumptions(cfg);
}

void cmd_frontier(const RunConfig& cfg) {
    const auto& grid = cfg.run.d_grid;
    auto os = open_out(cfg, "frontier.csv");
    switch (cfg.kind) {
        case ProblemKind::Cvar: {
            os << "d,alpha_star,cvar,status\n";
            if (riskless(cfg.market)) {
                for (double d : grid) {
                    try {
                        const auto r = solve_riskless(with_target(cfg, d)).result;
                        os << csv_number(d) << ',' << csv_number(r["alpha_star"].get<double>()) << ','
                           << csv_number(r["cvar"].get<double>()) << ",ok\n";
                    } catch (const Error& e) {
                        os << csv_number(d) << ",nan,nan," << error_status(e) << '\n';
                    }
                }
                break;
            }
            for (const auto& row : frontier(cfg.cvar, cfg.market, grid, cfg.alpha)) {
                os << csv_number(row.d) << ',' << csv_number(row.alpha_star) << ','
                   << csv_number(row.cvar) << ',' << row.status << '\n';
            }
            break;
        }
        case ProblemKind::Lpm: {
            os << "d,lambda,eta,case,objective,hit_probability,status\n";
            for (double d : grid) {
                try {
                    const auto r = solve(with_target(cfg, d)).result;
                    os << csv_number(d) << ',' << csv_number(r.value("lambda", 0.0)) << ','
                       << csv_number(r.value("eta", 0.0)) << ',' << r["case"].get<std::string>() << ','
                       << csv_number(r["objective"].get<double>()) << ','
                       << csv_number(r["hit_probability"].get<double>()) << ",ok\n";
                } catch (const Error& e) {
                    os << csv_number(d) << ",nan,nan,,nan,nan," << error_status(e) << '\n';
                }
            }
            break;
        }
        case ProblemKind::Mv: {
            os << "d,lambda,eta,variance,std_dev,status\n";
            for (double d : grid) {
                try {
                    const auto r = solve(with_target(cfg, d)).result;
                    const double v = r["variance"].get<double>();
                    os << csv_number(d) << ',' << csv_number(r.value("lambda", 0.0)) << ','
                       << csv_number(r.value("eta", 0.0)) << ',' << csv_number(v) << ','
                       << csv_number(std::sqrt(v)) << ",ok\n";
                } catch (const Error& e) {
                    os << csv_number(d) << ",nan,nan,nan,nan," << error_status(e) << '\n';
                }
            }
            break;
        }
    }
    write_assumptions(cfg);
}

void cmd_simulate(const RunConfig& cfg) {
    const auto s = solve(cfg);
    const auto& run = cfg.run;
    if (run.paths < 1 || run.steps < 1) fail(ErrorCode::ConfigError, "paths and steps must be positive");
    auto ens = simulate_deflator(cfg.market, run.paths, run.steps, run.seed);
    run_policy(cfg.market, s.policy, x0_of(cfg), ens);

    Eigen::VectorXd target(ens.x_T.size());
    for (Eigen::Index k = 0; k < ens.x_T.size(); ++k) target(k) = s.policy.terminal(ens.z_T(k));
    const double err = (ens.x_T - target).cwiseAbs().mean();

    const auto mean = estimate_mean(ens.x_T);
    json j;
    j["kind"] = kind_name(cfg.kind);
    j["paths"] = run.paths;
    j["steps"] = run.steps;
    j["seed"] = run.seed;
    j["solution"] = s.result;
    j["terminal_mean"] = {{"value", mean.value}, {"std_error", mean.std_error}};
    j["target_mean"] = target_of(cfg);
    j["replication_error"] = err;
    j["closed_form_mean"] = payoff_moments(s.policy.payoff(), cfg.market.deflator_moments(0.0).m,
                                           cfg.market.deflator_moments(0.0).nu)
                                .mean;
    switch (cfg.kind) {
        case ProblemKind::Lpm: {
            const auto e = estimate_lpm(ens.x_T, cfg.lpm.gamma, cfg.lpm.q);
            j["lpm"] = {{"value", e.value}, {"std_error", e.std_error}};
            break;
        }
        case ProblemKind::Cvar: {
            const auto e = estimate_cvar(ens.x_T, cfg.cvar.beta, safe_level(cfg.cvar, cfg.market));
            j["cvar"] = {{"value", e.value}, {"std_error", e.std_error}};
            break;
        }
        case ProblemKind::Mv: {
            const double mu = mean.value;
            j["variance"] = (ens.x_T.array() - mu).square().sum() / std::max<Eigen::Index>(1, ens.x_T.size() - 1);
            break;
        }
    }
    write_json(cfg, "simulation.json", j);

    auto os = open_out(cfg, "samples.csv");
    os << "path,x_T,z_T\n";
    for (Eigen::Index k = 0; k < ens.x_T.size(); ++k) {
        os << k << ',' << csv_number(ens.x_T(k)) << ',' << csv_number(ens.z_T(k)) << '\n';
    }
    write_assumptions(cfg);
}

void cmd_compare_static(const RunConfig& cfg) {
    if (cfg.kind != ProblemKind::Cvar) fail(ErrorCode::ConfigError, "compare-static needs a cvar problem");
    std::vector<double> betas = cfg.run.betas;
    if (betas.empty()) betas.push_back(cfg.cvar.beta);

    auto os = open_out(cfg, "compare_static.csv");
    os << "d,beta,static_cvar,dynamic_cvar,status\n";
    if (!cfg.run.d_grid.empty()) {
        if (cfg.run.scenarios < 1) fail(ErrorCode::ConfigError, "scenarios must be positive");
        const auto scen = generate_scenarios(cfg.market, cfg.run.scenarios, cfg.run.seed);
        for (double beta : betas) {
            for (double d : cfg.run.d_grid) {
                CvarProblem p = cfg.cvar;
                p.beta = beta;
                p.d = d;
                const double xbar = safe_level(p, cfg.market);
                double st = kNaN, dy = kNaN;
                std::string status = "ok";
                const auto st_sol = solve_static_cvar(scen, beta, d, p.x0, xbar);
                if (st_sol.status == LpStatus::Optimal) st = st_sol.cvar;
                else status = "static_" + std::string(to_string(st_sol.status));
                try {
                    dy = solve_cvar(p, cfg.market, cfg.alpha).cvar;
                } catch (const Error& e) {
                    status = status == "ok" ? "dynamic_" + error_status(e)
                                            : status + ";dynamic_" + error_status(e);
                }
                os << csv_number(d) << ',' << csv_number(beta) << ',' << csv_number(st) << ','
                   << csv_number(dy) << ',' << status << '\n';
            }
        }
    }
    write_assumptions(cfg);
}

int exit_code(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::TargetTooHigh:
        case ErrorCode::InfeasibleBudget:
            return 2;
        case ErrorCode::ConfigError:
        case ErrorCode::InvalidProblem:
        case ErrorCode::DimensionMismatch:
        case ErrorCode::DegenerateVolatility:
        case ErrorCode::NonpositiveHorizon:
        case ErrorCode::SingularVolatility:
            return 3;
        default:
            return 1;
    }
}

int run_command(const std::string& cmd, const RunConfig& cfg, std::ostream& err) {
    try {
        if (cmd == "solve") cmd_solve(cfg);
        else if (cmd == "policy-table") cmd_policy_table(cfg);
        else if (cmd == "frontier") cmd_frontier(cfg);
        else if (cmd == "simulate") cmd_simulate(cfg);
        else if (cmd == "compare-static") cmd_compare_static(cfg);
        else {
            err << "error: unknown command '" << cmd
                << "' (expected solve, policy-table, frontier, simulate, compare-static)\n";
            return 3;
        }
    } catch (const Error& e) {
        if (e.code() == ErrorCode::TargetTooHigh) err << "error: target exceeds d_upper: ";
        else err << "error [" << to_string(e.code()) << "]: ";
        err << e.what() << '\n';
        return exit_code(e.code());
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}

}  // namespace dsr
