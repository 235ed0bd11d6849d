#include "dsr/static_cvar.hpp"

#include "dsr/error.hpp"
#include "dsr/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <vector>

namespace dsr {

ScenarioSet generate_scenarios(const MarketModel& model, int n, std::uint64_t seed) {
    if (n < 1) fail(ErrorCode::InvalidProblem, "need at least one scenario");
    const int na = model.n_assets();
    const double horizon = model.horizon();

    Eigen::VectorXd log_mean = Eigen::VectorXd::Zero(na);
    Eigen::MatrixXd factor;
    const auto& segs = model.segments();
    if (segs.size() == 1) {
        const Eigen::MatrixXd cov = segs[0].sigma * segs[0].sigma.transpose();
        log_mean = (segs[0].mu - 0.5 * cov.diagonal()) * horizon;
        factor = segs[0].sigma * std::sqrt(horizon);
    } else {
        Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(na, na);
        const auto bp = model.breakpoints();
        for (std::size_t k = 0; k < segs.size(); ++k) {
            const double dt = bp[k + 1] - bp[k];
            const Eigen::MatrixXd c = segs[k].sigma * segs[k].sigma.transpose();
            cov += c * dt;
            log_mean += (segs[k].mu - 0.5 * c.diagonal()) * dt;
        }
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
        factor = eig.eigenvectors() *
                 eig.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal();
    }
    const double bond = std::exp(model.integrated_rate(0.0, horizon));

    ScenarioSet s;
    s.seed = seed;
    s.returns.resize(n, na + 1);
    const CounterRng rng(seed);
    Eigen::VectorXd g(na);
    for (int k = 0; k < n; ++k) {
        for (int j = 0; j < na; ++j) {
            g(j) = rng.normal(static_cast<std::uint64_t>(k), 0, static_cast<std::uint64_t>(j));
        }
        s.returns.row(k).head(na) = (log_mean + factor * g).array().exp().transpose();
        s.returns(k, na) = bond;
    }
    return s;
}

void write_scenarios_csv(std::ostream& os, const ScenarioSet& s) {
    const int na = s.n_assets();
    for (int j = 0; j < na; ++j) os << "asset_" << (j + 1) << ',';
    os << "bond\n";
    os << std::setprecision(17);
    for (int k = 0; k < s.size(); ++k) {
        for (int j = 0; j <= na; ++j) os << s.returns(k, j) << (j < na ? ',' : '\n');
    }
}

ScenarioSet read_scenarios_csv(std::istream& is) {
    std::string line;
    if (!std::getline(is, line)) fail(ErrorCode::ConfigError, "scenario CSV is empty");
    const auto cols = static_cast<int>(std::count(line.begin(), line.end(), ',')) + 1;
    if (cols < 2) fail(ErrorCode::ConfigError, "scenario CSV needs at least one asset and the bond");
    std::vector<double> vals;
    int rows = 0;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string cell;
        int c = 0;
        while (std::getline(ss, cell, ',')) {
            try {
                vals.push_back(std::stod(cell));
            } catch (const std::exception&) {
                fail(ErrorCode::ConfigError, "bad number in scenario CSV: " + cell);
            }
            ++c;
        }
        if (c != cols) fail(ErrorCode::ConfigError, "ragged scenario CSV row " + std::to_string(rows + 1));
        ++rows;
    }
    ScenarioSet s;
    s.returns.resize(rows, cols);
    for (int k = 0; k < rows; ++k) {
        for (int j = 0; j < cols; ++j) {
            const double v = vals[static_cast<std::size_t>(k) * cols + j];
            if (!(v > 0.0) || !std::isfinite(v)) fail(ErrorCode::ConfigError, "gross returns must be positive");
            s.returns(k, j) = v;
        }
    }
    return s;
}

LinearProgram build_ru_lp(const ScenarioSet& s, double beta, double d, double x0, double xbar) {
    if (!(beta > 0.0 && beta < 1.0)) fail(ErrorCode::InvalidProblem, "beta must lie in (0, 1)");
    const int N = s.size();
    const int nw = s.n_assets() + 1;
    const int nvar = nw + 1 + N;
    const int alpha = nw;

    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(static_cast<std::size_t>(N) * (nw + 2) + 2 * nw);
    for (int k = 0; k < N; ++k) {
        for (int j = 0; j < nw; ++j) trip.emplace_back(k, j, s.returns(k, j));
        trip.emplace_back(k, alpha, 1.0);
        trip.emplace_back(k, nw + 1 + k, 1.0);
    }
    const Eigen::VectorXd mean = s.returns.colwise().mean().transpose();
    for (int j = 0; j < nw; ++j) {
        trip.emplace_back(N, j, 1.0);
        trip.emplace_back(N + 1, j, mean(j));
    }

    LinearProgram lp;
    lp.A.resize(N + 2, nvar);
    lp.A.setFromTriplets(trip.begin(), trip.end());
    lp.A.makeCompressed();
    lp.b.resize(N + 2);
    lp.b.head(N).setConstant(xbar);
    lp.b(N) = x0;
    lp.b(N + 1) = d;
    lp.sense.assign(N + 2, RowSense::Geq);
    lp.sense[N] = RowSense::Eq;
    lp.c = Eigen::VectorXd::Zero(nvar);
    lp.c(alpha) = 1.0;
    lp.c.tail(N).setConstant(1.0 / ((1.0 - beta) * N));
    constexpr double inf = std::numeric_limits<double>::infinity();
    lp.lower = Eigen::VectorXd::Constant(nvar, -inf);
    lp.upper = Eigen::VectorXd::Constant(nvar, inf);
    lp.lower.tail(N).setZero();
    return lp;
}

StaticCvarSolution solve_static_cvar(const ScenarioSet& s, double beta, double d, double x0,
                                     double xbar) {
    const int na = s.n_assets();
    if (std::isnan(xbar)) xbar = x0 * s.returns(0, na);
    const auto lp = build_ru_lp(s, beta, d, x0, xbar);
    const auto res = simplex_solve(lp);

    StaticCvarSolution out;
    out.status = res.status;
    out.iterations = res.iterations;
    out.n_scenarios = s.size();
    if (res.status != LpStatus::Optimal) return out;
    out.weights = res.x.head(na + 1);
    out.alpha = res.x(na + 1);
    out.cvar = res.objective;
    out.primal_residual = res.primal_residual;
    const Eigen::VectorXd wealth = s.returns * out.weights;
    std::vector<double> losses(static_cast<std::size_t>(wealth.size()));
    for (Eigen::Index k = 0; k < wealth.size(); ++k) losses[k] = xbar - wealth(k);
    out.cvar_recomputed = cvar_of_losses(std::move(losses), {}, beta);
    return out;
}

StaticCvarSolution solve_static_cvar(const MarketModel& model, double beta, double d, double x0,
                                     int n_scenarios, std::uint64_t seed) {
    return solve_static_cvar(generate_scenarios(model, n_scenarios, seed), beta, d, x0);
}

}  // namespace dsr
