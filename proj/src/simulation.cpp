#include "dsr/simulation.hpp"

#include "dsr/error.hpp"
#include "dsr/gaussian.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace dsr {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

struct StepCoeffs {
    double r;
    double drift;  // -(r + |theta|^2 / 2)
    Eigen::VectorXd theta;
    Eigen::VectorXd b;
    Eigen::MatrixXd sigma;
};

std::vector<StepCoeffs> step_coefficients(const MarketModel& model, const std::vector<double>& times) {
    std::vector<StepCoeffs> out;
    out.reserve(times.size() - 1);
    for (std::size_t k = 0; k + 1 < times.size(); ++k) {
        const auto& seg = model.segment_at(times[k]);
        StepCoeffs c;
        c.r = seg.r;
        c.theta = model.market_price_of_risk(times[k]);
        c.drift = -(seg.r + 0.5 * c.theta.squaredNorm());
        c.b = seg.mu.array() - seg.r;
        c.sigma = seg.sigma;
        out.push_back(std::move(c));
    }
    return out;
}

std::vector<double> time_grid(double horizon, int n_steps) {
    std::vector<double> t(static_cast<std::size_t>(n_steps) + 1);
    for (int k = 0; k <= n_steps; ++k) t[k] = horizon * k / n_steps;
    t.back() = horizon;
    return t;
}

void draw(const CounterRng& rng, int path, int step, double sqrt_dt, Eigen::VectorXd& dw) {
    for (Eigen::Index j = 0; j < dw.size(); ++j) {
        dw(j) = sqrt_dt * rng.normal(static_cast<std::uint64_t>(path), static_cast<std::uint64_t>(step),
                                     static_cast<std::uint64_t>(j));
    }
}

double jackknife_se_of_mean(const Eigen::VectorXd& v) {
    const auto n = static_cast<double>(v.size());
    const double total = v.sum();
    double mean_loo = 0.0;
    Eigen::VectorXd loo(v.size());
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        loo(i) = (total - v(i)) / (n - 1.0);
        mean_loo += loo(i);
    }
    mean_loo /= n;
    const double ss = (loo.array() - mean_loo).square().sum();
    return std::sqrt((n - 1.0) / n * ss);
}

}  // namespace

std::uint64_t CounterRng::bits(std::uint64_t path, std::uint64_t step, std::uint64_t comp) const {
    std::uint64_t h = splitmix64(seed_);
    h = splitmix64(h ^ path);
    h = splitmix64(h ^ (step * 0xD1B54A32D192ED03ULL));
    return splitmix64(h ^ (comp * 0x8CB92BA72F3D8DD7ULL));
}

double CounterRng::uniform(std::uint64_t path, std::uint64_t step, std::uint64_t comp) const {
    return (static_cast<double>(bits(path, step, comp) >> 11) + 0.5) * 0x1.0p-53;
}

double CounterRng::normal(std::uint64_t path, std::uint64_t step, std::uint64_t comp) const {
    return norm_quantile(uniform(path, step, comp));
}

PathEnsemble simulate_deflator(const MarketModel& model, int n_paths, int n_steps,
                               std::uint64_t seed, bool keep_paths) {
    if (n_paths < 1 || n_steps < 1) fail(ErrorCode::InvalidProblem, "need at least one path and step");
    PathEnsemble ens;
    ens.n_paths = n_paths;
    ens.n_steps = n_steps;
    ens.seed = seed;
    ens.times = time_grid(model.horizon(), n_steps);
    const auto coeffs = step_coefficients(model, ens.times);
    const CounterRng rng(seed);
    const int n = model.n_assets();
    ens.z_T.resize(n_paths);
    if (keep_paths) ens.z_paths.resize(n_paths, n_steps + 1);

    Eigen::VectorXd dw(n);
    for (int p = 0; p < n_paths; ++p) {
        double log_z = 0.0;
        if (keep_paths) ens.z_paths(p, 0) = 1.0;
        for (int k = 0; k < n_steps; ++k) {
            const double dt = ens.times[k + 1] - ens.times[k];
            draw(rng, p, k, std::sqrt(dt), dw);
            log_z += coeffs[k].drift * dt - coeffs[k].theta.dot(dw);
            if (keep_paths) ens.z_paths(p, k + 1) = std::exp(log_z);
        }
        ens.z_T(p) = std::exp(log_z);
    }
    return ens;
}

void run_policy(const MarketModel& model, const PortfolioFn& policy, double x0, PathEnsemble& ens) {
    const auto coeffs = step_coefficients(model, ens.times);
    const CounterRng rng(ens.seed);
    const int n = model.n_assets();
    const bool keep = ens.z_paths.size() > 0;
    const double horizon = model.horizon();
    ens.x_T.resize(ens.n_paths);
    if (keep) ens.x_paths.resize(ens.n_paths, ens.n_steps + 1);

    Eigen::VectorXd dw(n);
    for (int p = 0; p < ens.n_paths; ++p) {
        double log_z = 0.0;
        double x = x0;
        if (keep) ens.x_paths(p, 0) = x0;
        for (int k = 0; k < ens.n_steps; ++k) {
            const double t = ens.times[k];
            const double dt = ens.times[k + 1] - t;
            draw(rng, p, k, std::sqrt(dt), dw);
            const auto& c = coeffs[k];
            const Eigen::VectorXd pi = policy(std::min(t, horizon - dt), std::exp(log_z));
            x += (c.r * x + c.b.dot(pi)) * dt + pi.dot(c.sigma * dw);
            log_z += c.drift * dt - c.theta.dot(dw);
            if (keep) ens.x_paths(p, k + 1) = x;
        }
        ens.x_T(p) = x;
    }
}

void run_policy(const MarketModel& model, const PayoffPolicy& policy, double x0, PathEnsemble& ens) {
    run_policy(model, [&](double t, double z) { return policy.policy(t, z); }, x0, ens);
}

RiskEstimate estimate_mean(const Eigen::VectorXd& samples) {
    if (samples.size() < 2) fail(ErrorCode::EmptySample, "need at least two samples");
    RiskEstimate e;
    e.n = static_cast<std::size_t>(samples.size());
    e.value = samples.mean();
    const double var = (samples.array() - e.value).square().sum() / (samples.size() - 1.0);
    e.std_error = std::sqrt(var / samples.size());
    e.measure = Measure::Mean;
    e.label = "mean";
    return e;
}

RiskEstimate estimate_lpm(const Eigen::VectorXd& samples, double gamma, double q) {
    if (samples.size() < 2) fail(ErrorCode::EmptySample, "need at least two samples");
    Eigen::VectorXd v(samples.size());
    for (Eigen::Index i = 0; i < samples.size(); ++i) {
        const double s = gamma - samples(i);
        v(i) = s > 0.0 ? (q == 0.0 ? 1.0 : std::pow(s, q)) : 0.0;
    }
    RiskEstimate e;
    e.n = static_cast<std::size_t>(v.size());
    e.value = v.mean();
    e.std_error = jackknife_se_of_mean(v);
    e.measure = Measure::Lpm;
    e.label = "lpm(q=" + std::to_string(q) + ",gamma=" + std::to_string(gamma) + ")";
    return e;
}

double cvar_of_losses(std::vector<double> losses, std::vector<double> weights, double beta) {
    if (losses.empty()) fail(ErrorCode::EmptySample, "no losses");
    if (!(beta > 0.0 && beta < 1.0)) fail(ErrorCode::DomainError, "beta must lie in (0, 1)");
    if (weights.empty()) weights.assign(losses.size(), 1.0);
    if (weights.size() != losses.size()) fail(ErrorCode::DimensionMismatch, "weights and losses differ");
    std::vector<std::size_t> idx(losses.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return losses[a] > losses[b]; });
    const long double total = std::accumulate(weights.begin(), weights.end(), 0.0L);
    const long double tail = (1.0L - beta) * total;
    long double mass = 0.0L, acc = 0.0L;
    for (std::size_t i : idx) {
        const long double w = std::min<long double>(weights[i], tail - mass);
        if (w <= 0.0L) break;
        acc += w * losses[i];
        mass += w;
    }
    return static_cast<double>(acc / tail);
}

double ru_minimum(std::vector<double> losses, double beta) {
    if (losses.empty()) fail(ErrorCode::EmptySample, "no losses");
    std::sort(losses.begin(), losses.end());
    const std::size_t n = losses.size();
    const long double scale = 1.0L / ((1.0L - beta) * n);
    std::vector<long double> suffix(n + 1, 0.0L);
    for (std::size_t i = n; i-- > 0;) suffix[i] = suffix[i + 1] + losses[i];
    // F(L_k) = L_k + scale * (sum_{i>k} L_i - (n-1-k) L_k); the minimum of the convex hull sits at a kink
    std::size_t best = 0;
    long double best_v = std::numeric_limits<long double>::infinity();
    for (std::size_t k = 0; k < n; ++k) {
        const long double a = losses[k];
        const long double v = a + scale * (suffix[k + 1] - static_cast<long double>(n - 1 - k) * a);
        if (v < best_v) {
            best_v = v;
            best = k;
        }
    }
    // recompute directly at the minimizer
    const long double a = losses[best];
    long double excess = 0.0L;
    for (std::size_t i = best + 1; i < n; ++i) excess += losses[i] - a;
    return static_cast<double>(a + scale * excess);
}

RiskEstimate estimate_cvar(const Eigen::VectorXd& samples, double beta, double xbar) {
    if (samples.size() < 2) fail(ErrorCode::EmptySample, "need at least two samples");
    std::vector<double> losses(static_cast<std::size_t>(samples.size()));
    for (Eigen::Index i = 0; i < samples.size(); ++i) losses[i] = xbar - samples(i);
    RiskEstimate e;
    e.n = losses.size();
    e.value = cvar_of_losses(losses, {}, beta);

    // standard error from the R-U representation at the empirical VaR
    std::vector<double> sorted = losses;
    const auto k = static_cast<std::size_t>(
        std::min<double>(sorted.size() - 1, std::ceil(beta * sorted.size()) - 1));
    std::nth_element(sorted.begin(), sorted.begin() + k, sorted.end());
    const double var = sorted[k];
    Eigen::VectorXd g(samples.size());
    for (std::size_t i = 0; i < losses.size(); ++i) {
        g(i) = var + std::max(0.0, losses[i] - var) / (1.0 - beta);
    }
    e.std_error = estimate_mean(g).std_error;
    e.measure = Measure::Cvar;
    e.label = "cvar(beta=" + std::to_string(beta) + ")";
    return e;
}

}  // namespace dsr
