#include "dsr/cvar_policy.hpp"

#include "dsr/error.hpp"
#include "dsr/gaussian.hpp"
#include "dsr/solvers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace dsr {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

long long quantize(double alpha) { return std::llround(alpha * 1e12); }

double max_mean_upper(const CvarProblem& p, const MarketModel& model) {
    const auto dm = model.deflator_moments(0.0);
    const PartialMoments pm(dm.m, dm.nu);
    if (p.x0 / p.B >= pm.mean()) {
        fail(ErrorCode::InfeasibleBudget, "x0 / B is not below E[z(T)]; the cap cannot be financed");
    }
    return p.B * pm.H(0.0, pm.invert_H1(p.x0 / p.B));
}

}  // namespace

double safe_level(const CvarProblem& p, const MarketModel& model) {
    if (std::isnan(p.xbar)) return p.x0 * std::exp(model.integrated_rate(0.0, model.horizon()));
    return p.xbar;
}

CvarObjective::CvarObjective(CvarProblem p, const MarketModel& model)
    : p_(p), model_(&model), xbar_(safe_level(p, model)) {
    if (!(p.beta > 0.0 && p.beta < 1.0)) fail(ErrorCode::InvalidProblem, "beta must lie in (0, 1)");
    if (!(p.x0 > 0.0)) fail(ErrorCode::InvalidProblem, "x0 must be positive");
    if (!(p.B > std::max(p.d, xbar_))) {
        fail(ErrorCode::InvalidProblem, "cap B must exceed d and the safe level");
    }
    d_upper_ = max_mean_upper(p, model);
}

LpmProblem CvarObjective::embedded(double alpha) const {
    return LpmProblem{p_.x0, p_.d, xbar_ - alpha, p_.B, 1.0};
}

double CvarObjective::d_lower(double alpha) const {
    if (alpha >= xbar_) return 0.0;
    if (xbar_ - alpha >= p_.B) return d_upper_;
    return d_bounds(embedded(alpha), *model_).lower;
}

double CvarObjective::operator()(double alpha) const {
    const auto key = quantize(alpha);
    if (auto it = cache_.find(key); it != cache_.end()) return it->second;

    const double gamma = xbar_ - alpha;
    double j;
    if (p_.d >= d_upper_) {
        j = kInf;
    } else if (gamma <= 0.0) {
        j = alpha;
    } else if (gamma >= p_.B) {
        // every payoff sits below the benchmark, so the shortfall is gamma - E[X] >= gamma - d_upper
        j = alpha + (gamma - d_upper_) / (1.0 - p_.beta);
    } else {
        const auto s = solve_lpm(embedded(alpha), *model_);
        j = alpha + s.objective / (1.0 - p_.beta);
    }
    cache_.emplace(key, j);
    return j;
}

double underline_d_of_alpha(const CvarProblem& p, const MarketModel& model, double alpha) {
    return CvarObjective(p, model).d_lower(alpha);
}

double j_value(const CvarProblem& p, const MarketModel& model, double alpha) {
    return CvarObjective(p, model)(alpha);
}

AlphaSearchTrace search_alpha(const std::function<double(double)>& j, double lo, double hi,
                              double scale, const AlphaSearchOptions& opts) {
    AlphaSearchTrace tr;
    tr.mode = opts.mode;
    auto eval = [&](double a) {
        const double v = j(a);
        tr.evaluated.emplace_back(a, v);
        return v;
    };

    if (opts.mode == AlphaSearchMode::GoldenSection) {
        const auto rep = minimize_scalar_convex(eval, lo, hi, MinimizeOptions{opts.tol, opts.max_iter});
        tr.iterations = rep.iterations;
    } else {
        const double zeta = std::isnan(opts.zeta) ? 1e-5 * scale : opts.zeta;
        const double step_floor = 1e-13 * std::max(1.0, scale);
        double alpha = std::clamp(opts.alpha0, lo, hi - zeta);
        double ja = eval(alpha);
        double theta = opts.theta;
        int it = 0;
        for (; it < opts.max_iter; ++it) {
            const double kappa = (eval(alpha + zeta) - ja) / zeta;
            if (std::abs(kappa) < opts.eps) break;
            // descent step, shortened until J does not increase
            bool moved = false;
            for (int h = 0; h < 60; ++h) {
                const double cand = std::clamp(alpha - theta * kappa, lo, hi - zeta);
                if (std::abs(cand - alpha) < step_floor) break;
                const double jc = eval(cand);
                if (jc <= ja) {
                    alpha = cand;
                    ja = jc;
                    moved = true;
                    theta *= 2.0;
                    break;
                }
                theta *= 0.5;
            }
            if (!moved) break;
        }
        if (it >= opts.max_iter) {
            fail(ErrorCode::MaxIterations, "gradient search for alpha did not converge");
        }
        tr.iterations = it;
    }

    auto best = std::min_element(tr.evaluated.begin(), tr.evaluated.end(),
                                 [](const auto& a, const auto& b) { return a.second < b.second; });
    tr.alpha_star = best->first;
    tr.j_star = best->second;
    if (!std::isfinite(tr.j_star)) {
        fail(ErrorCode::TargetTooHigh, "target exceeds d_upper for every alpha");
    }
    return tr;
}

AlphaSearchTrace search_alpha(const CvarObjective& j, const AlphaSearchOptions& opts) {
    const auto [lo, hi] = j.window();
    return search_alpha([&j](double a) { return j(a); }, lo, hi, j.xbar(), opts);
}

CvarSolution solve_cvar(const CvarProblem& p, const MarketModel& model,
                        const AlphaSearchOptions& opts) {
    const CvarObjective j(p, model);
    const auto upper = max_mean_upper(p, model);
    if (p.d >= upper) {
        fail(ErrorCode::TargetTooHigh, "target d = " + std::to_string(p.d) +
                                           " exceeds d_upper = " + std::to_string(upper));
    }
    auto tr = search_alpha(j, opts);
    const double gamma = j.xbar() - tr.alpha_star;

    std::optional<LpmSolution> lpm;
    Payoff x;
    if (gamma >= p.B) {
        const auto dm = model.deflator_moments(0.0);
        const PartialMoments pm(dm.m, dm.nu);
        x.pieces.push_back({0.0, pm.invert_H1(p.x0 / p.B), p.B, 0.0});
    } else if (gamma <= 0.0) {
        fail(ErrorCode::NumericalBreakdown, "alpha search ended at the safe level");
    } else {
        lpm = solve_lpm(j.embedded(tr.alpha_star), model);
        x = lpm->policy.payoff();
    }
    CvarSolution s{p, j.xbar(), tr.alpha_star, tr.j_star, std::move(tr), std::move(lpm),
                   PayoffPolicy(model, std::move(x))};
    return s;
}

std::vector<FrontierRow> frontier(const CvarProblem& base, const MarketModel& model,
                                  const std::vector<double>& d_grid,
                                  const AlphaSearchOptions& opts) {
    std::vector<FrontierRow> rows;
    rows.reserve(d_grid.size());
    for (double d : d_grid) {
        CvarProblem p = base;
        p.d = d;
        FrontierRow row;
        row.d = d;
        try {
            const auto s = solve_cvar(p, model, opts);
            row.alpha_star = s.alpha_star;
            row.cvar = s.cvar;
            row.status = "ok";
        } catch (const Error& e) {
            row.alpha_star = std::numeric_limits<double>::quiet_NaN();
            row.cvar = std::numeric_limits<double>::quiet_NaN();
            row.status = std::string(to_string(e.code()));
        }
        rows.push_back(row);
    }
    std::stable_sort(rows.begin(), rows.end(),
                     [](const FrontierRow& a, const FrontierRow& b) { return a.d < b.d; });
    return rows;
}

}  // namespace dsr
