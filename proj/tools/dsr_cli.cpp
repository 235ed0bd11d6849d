#include "dsr/commands.hpp"
#include "dsr/error.hpp"
#include "dsr/io.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <optional>
#include <string>

namespace {

struct Overrides {
    std::optional<double> q, beta, d;
    std::optional<std::uint64_t> seed;
    std::optional<int> paths, steps, scenarios;
    std::optional<std::string> out;
};

void apply(const Overrides& o, dsr::RunConfig& cfg) {
    if (o.q) cfg.lpm.q = *o.q;
    if (o.beta) cfg.cvar.beta = *o.beta;
    if (o.d) {
        cfg.lpm.d = *o.d;
        cfg.cvar.d = *o.d;
        cfg.mv.d = *o.d;
    }
    if (o.seed) cfg.run.seed = *o.seed;
    if (o.paths) cfg.run.paths = *o.paths;
    if (o.steps) cfg.run.steps = *o.steps;
    if (o.scenarios) cfg.run.scenarios = *o.scenarios;
    if (o.out) cfg.run.out = *o.out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Dynamic shortfall-risk portfolio solver"};
    std::string config;
    std::string cmd = "solve";
    Overrides o;
    app.add_option("--config", config, "JSON run configuration")->required();
    app.add_option("--cmd", cmd, "solve | policy-table | frontier | simulate | compare-static");
    app.add_option("--q", o.q, "moment order of the shortfall measure");
    app.add_option("--beta", o.beta, "CVaR confidence level");
    app.add_option("--d", o.d, "target expected terminal wealth");
    app.add_option("--seed", o.seed, "random seed");
    app.add_option("--paths", o.paths, "Monte Carlo paths");
    app.add_option("--steps", o.steps, "time steps per path");
    app.add_option("--scenarios", o.scenarios, "scenarios for the buy-and-hold LP");
    app.add_option("--out", o.out, "output directory");
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 3;
    }

    try {
        auto cfg = dsr::load_config(config);
        apply(o, cfg);
        return dsr::run_command(cmd, cfg, std::cerr);
    } catch (const dsr::Error& e) {
        std::cerr << "error [" << dsr::to_string(e.code()) << "]: " << e.what() << '\n';
        return dsr::exit_code(e.code());
    }
}
