#include "dsr/commands.hpp"
#include "dsr/error.hpp"
#include "dsr/io.hpp"

#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <optional>
#include <sstream>
#include <string>

using namespace dsr;
namespace fs = std::filesystem;

namespace {

json example1_json() {
    return json::parse(R"({
      "market": {"horizon": 1.0, "r": 0.06, "mu": [0.12], "sigma": [[0.15]]},
      "problem": {"kind": "lpm", "x0": 1.0, "d": 1.3, "B": 10.0, "q": 2}
    })");
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

fs::path scratch(const std::string& name) {
    const auto dir = fs::temp_directory_path() / ("dsr_io_test_" + name);
    fs::remove_all(dir);
    return dir;
}

int run_cli(const std::string& args) {
    const std::string cmd = std::string("\"") + DSR_CLI_PATH + "\" " + args + " > /dev/null 2>&1";
    const int rc = std::system(cmd.c_str());
    return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

std::optional<ErrorCode> code_of(const json& j) {
    try {
        parse_config(j);
    } catch (const Error& e) {
        return e.code();
    }
    return std::nullopt;
}

}  // namespace

TEST_CASE("config parsing") {
    const auto cfg = parse_config(example1_json());
    CHECK(cfg.kind == ProblemKind::Lpm);
    CHECK(cfg.lpm.gamma == doctest::Approx(std::exp(0.06)).epsilon(1e-15));
    CHECK(cfg.lpm.q == 2.0);
    CHECK(cfg.run.paths == 10000);

    auto j = example1_json();
    j["problem"]["kind"] = "sharpe";
    CHECK(code_of(j) == ErrorCode::ConfigError);
    j = example1_json();
    j["problem"].erase("d");
    CHECK(code_of(j) == ErrorCode::ConfigError);
    j = example1_json();
    j["problem"]["B"] = "ten";
    CHECK(code_of(j) == ErrorCode::ConfigError);
    j = example1_json();
    j["market"]["sigma"] = json::array({json::array({0.1, 0.2}), json::array({0.3})});
    CHECK(code_of(j) == ErrorCode::ConfigError);
    j = example1_json();
    j["market"]["sigma"] = 0.0;
    CHECK(code_of(j).has_value());
    CHECK(code_of(json::parse(R"({"market": {}})")) == ErrorCode::ConfigError);
    CHECK_THROWS_AS(load_config("/nonexistent/config.json"), Error);

    j = example1_json();
    j["problem"] = {{"kind", "cvar"}, {"x0", 10}, {"d", 12}, {"B", 100}, {"alpha_search", "newton"}};
    CHECK(code_of(j) == ErrorCode::ConfigError);
}

TEST_CASE("market round trip through JSON") {
    const auto cfg = parse_config(example1_json());
    const auto back = parse_market(market_to_json(cfg.market));
    CHECK(back.horizon() == cfg.market.horizon());
    CHECK(back.segment_at(0.3).mu == cfg.market.segment_at(0.3).mu);
    CHECK(back.segment_at(0.3).sigma == cfg.market.segment_at(0.3).sigma);
}

TEST_CASE("solution artifact reloads into the same policy") {
    const auto cfg = parse_config(example1_json());
    const auto sol = solve_to_json(cfg);
    CHECK(sol["kind"] == "lpm");
    CHECK(sol["result"]["case"] == "Regular");
    const auto reparsed = json::parse(sol.dump());
    const auto policy = policy_from_solution(reparsed);
    CHECK(policy.wealth(0.0, 1.0) == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(sol["wealth_at_origin"].get<double>() == doctest::Approx(policy.wealth(0.0, 1.0)).epsilon(1e-12));
    const auto x = payoff_from_json(payoff_to_json(policy.payoff()));
    REQUIRE(x.pieces.size() == policy.payoff().pieces.size());
    for (std::size_t i = 0; i < x.pieces.size(); ++i) {
        CHECK(x.pieces[i].hi == policy.payoff().pieces[i].hi);
        CHECK(x.pieces[i].c1 == policy.payoff().pieces[i].c1);
    }
    Payoff open;
    open.pieces.push_back({1.0, INFINITY, 2.0, 0.0});
    const auto oj = payoff_to_json(open);
    CHECK(oj[0]["hi"].is_null());
    CHECK(std::isinf(payoff_from_json(oj).pieces[0].hi));
}

TEST_CASE("csv number formatting") {
    CHECK(csv_number(0.1) == "0.1");
    CHECK(csv_number(1.0 / 3.0) == "0.333333333333");
    CHECK(csv_number(std::nan("")) == "nan");
    CHECK(csv_number(-INFINITY) == "-inf");
}

TEST_CASE("exit codes") {
    CHECK(exit_code(ErrorCode::TargetTooHigh) == 2);
    CHECK(exit_code(ErrorCode::InfeasibleBudget) == 2);
    CHECK(exit_code(ErrorCode::ConfigError) == 3);
    CHECK(exit_code(ErrorCode::InvalidProblem) == 3);
    CHECK(exit_code(ErrorCode::NumericalBreakdown) == 1);

    auto cfg = parse_config(example1_json());
    cfg.run.out = scratch("codes").string();
    std::ostringstream err;
    CHECK(run_command("solve", cfg, err) == 0);
    CHECK(run_command("dance", cfg, err) == 3);
    cfg.lpm.d = 2.5;
    err.str("");
    CHECK(run_command("solve", cfg, err) == 2);
    CHECK(err.str().find("d_upper") != std::string::npos);
}

TEST_CASE("command line binary") {
    const auto dir = scratch("cli");
    const std::string cfg = std::string(DSR_CONFIG_DIR) + "/example1_lpm.json";
    CHECK(run_cli("--config \"" + cfg + "\" --out \"" + dir.string() + "\"") == 0);
    CHECK(fs::exists(dir / "solution.json"));
    CHECK(fs::exists(dir / "assumptions.json"));
    CHECK(run_cli("--config \"" + cfg + "\" --d 2.5 --out \"" + dir.string() + "\"") == 2);
    CHECK(run_cli("--config /nonexistent.json --out \"" + dir.string() + "\"") == 3);
    CHECK(run_cli("--config \"" + cfg + "\" --cmd nope --out \"" + dir.string() + "\"") == 3);
    CHECK(run_cli("--bogus-flag") == 3);
}

TEST_CASE("empty target grid writes a header only") {
    auto cfg = parse_config(example1_json());
    const auto dir = scratch("frontier");
    cfg.run.out = dir.string();
    cmd_frontier(cfg);
    CHECK(slurp(dir / "frontier.csv") == "d,lambda,eta,case,objective,hit_probability,status\n");
}

TEST_CASE("frontier rows report infeasible targets") {
    auto cfg = parse_config(example1_json());
    const auto dir = scratch("frontier2");
    cfg.run.out = dir.string();
    cfg.run.d_grid = {1.3, 2.5};
    cmd_frontier(cfg);
    std::istringstream in(slurp(dir / "frontier.csv"));
    std::string header, a, b;
    std::getline(in, header);
    std::getline(in, a);
    std::getline(in, b);
    CHECK(a.rfind("1.3,", 0) == 0);
    CHECK(b.rfind("2.5,", 0) == 0);
    CHECK(a.substr(a.rfind(',') + 1) == "ok");
    CHECK(b.substr(b.rfind(',') + 1) != "ok");
}

TEST_CASE("policy table") {
    auto cfg = parse_config(example1_json());
    const auto dir = scratch("table");
    cfg.run.out = dir.string();
    cfg.run.z_points = 1;
    CHECK(policy_z_grid(cfg).size() == 1);
    cmd_policy_table(cfg);
    std::istringstream in(slurp(dir / "policy_table.csv"));
    std::string line;
    int n = 0;
    while (std::getline(in, line)) ++n;
    CHECK(n == 2);

    cfg.run.z_points = 50;
    cfg.run.z_min = 0.5;
    cfg.run.z_max = 2.0;
    const auto z = policy_z_grid(cfg);
    REQUIRE(z.size() == 50);
    CHECK(z.front() == doctest::Approx(0.5));
    CHECK(z.back() == doctest::Approx(2.0));
}

TEST_CASE("riskless market gives a zero policy") {
    auto j = example1_json();
    j["market"]["mu"] = json::array({0.06});
    j["problem"]["d"] = 1.0;
    const auto cfg = parse_config(j);
    const auto sol = solve_to_json(cfg);
    CHECK(sol["result"]["case"] == "Riskless");
    auto c2 = cfg;
    const auto dir = scratch("riskless");
    c2.run.out = dir.string();
    c2.run.z_points = 5;
    cmd_policy_table(c2);
    std::istringstream in(slurp(dir / "policy_table.csv"));
    std::string line;
    std::getline(in, line);
    while (std::getline(in, line)) {
        const auto pi = std::stod(line.substr(line.find(',', line.find(',') + 1) + 1));
        CHECK(pi == 0.0);
    }
}

TEST_CASE("runs are byte-for-byte reproducible") {
    auto cfg = parse_config(example1_json());
    cfg.run.paths = 500;
    cfg.run.steps = 32;
    cfg.run.seed = 99;
    const auto a = scratch("det_a"), b = scratch("det_b");
    cfg.run.out = a.string();
    cmd_simulate(cfg);
    cfg.run.out = b.string();
    cmd_simulate(cfg);
    for (const char* f : {"simulation.json", "samples.csv", "assumptions.json"}) {
        CHECK(slurp(a / f) == slurp(b / f));
        CHECK(!slurp(a / f).empty());
    }
}
