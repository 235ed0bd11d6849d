#include "dsr/lpm_policy.hpp"

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
constexpr double kRichSeam = 1e-12;

bool q_supported(double q) { return q == 0.0 || q == 2.0 || (q > 0.0 && q <= 1.0); }

PartialMoments moments_at_zero(const MarketModel& model) {
    const auto dm = model.deflator_moments(0.0);
    if (!(dm.nu > 0.0)) {
        fail(ErrorCode::InvalidProblem, "deflator is deterministic; no risky opportunity to trade");
    }
    return PartialMoments(dm.m, dm.nu);
}

double H(const PartialMoments& pm, double p, double y) { return y <= 0.0 ? 0.0 : pm.H(p, y); }

bool rich(const LpmProblem& p, double ez) { return p.x0 >= p.gamma * ez * (1.0 - kRichSeam); }

double rich_delta(const LpmProblem& p, const PartialMoments& pm) {
    const double t = (p.x0 - p.gamma * pm.mean()) / (p.B - p.gamma);
    return t <= 0.0 ? 0.0 : pm.invert_H1(t);
}

// Interior-branch width for q > 1 is q gamma^{q-1} / eta, for q <= 1 it is gamma^{q-1} / eta.
double rho_scale(const LpmProblem& p) {
    if (p.q == 2.0) return 2.0 * p.gamma;
    return std::pow(p.gamma, p.q - 1.0);
}

Payoff regular_payoff(const LpmProblem& p, double delta, double rho) {
    Payoff x;
    if (delta > 0.0) x.pieces.push_back({0.0, delta, p.B, 0.0});
    if (p.q == 2.0) {
        x.pieces.push_back({delta, delta + rho, p.gamma * (1.0 + delta / rho), -p.gamma / rho});
    } else {
        x.pieces.push_back({delta, delta + rho, p.gamma, 0.0});
    }
    return x;
}

Payoff rich_payoff(const LpmProblem& p, double delta) {
    Payoff x;
    if (delta > 0.0) x.pieces.push_back({0.0, delta, p.B, 0.0});
    x.pieces.push_back({delta, kInf, p.gamma, 0.0});
    return x;
}

struct Regular {
    double delta;
    double rho;
    SolvePath path;
};

double rel_gap(const PayoffMoments& mo, const LpmProblem& p) {
    return std::max(std::abs(mo.mean - p.d) / p.d, std::abs(mo.budget - p.x0) / p.x0);
}

Regular solve_newton(const LpmProblem& p, const PartialMoments& pm, double delta_bar) {
    auto F = [&](const Eigen::Vector2d& v) {
        const auto mo = payoff_moments(regular_payoff(p, std::exp(v(0)), std::exp(v(1))),
                                       pm.m0(), pm.nu0());
        return Eigen::Vector2d((mo.mean - p.d) / p.d, (mo.budget - p.x0) / p.x0);
    };
    const auto rep = solve_2d(F, Eigen::Vector2d(std::log(delta_bar), 0.0));
    return {std::exp(rep.x(0)), std::exp(rep.x(1)), SolvePath::Newton};
}

Regular solve_nested_low_order(const LpmProblem& p, const PartialMoments& pm, double delta_bar) {
    const double ez = pm.mean();
    const double bg = p.B - p.gamma;
    auto upper_edge = [&](double delta) {
        const double target = (p.x0 - bg * H(pm, 1.0, delta)) / p.gamma;
        if (target >= ez) return kInf;
        if (target <= H(pm, 1.0, delta)) return delta;
        return std::max(delta, pm.invert_H1(target));
    };
    auto mean_of = [&](double delta) {
        const double u = upper_edge(delta);
        const double hu = u == kInf ? 1.0 : H(pm, 0.0, u);
        return bg * H(pm, 0.0, delta) + p.gamma * hu;
    };
    const double delta_min = rich(p, ez) ? rich_delta(p, pm) : 0.0;
    const auto rep = find_root_1d([&](double delta) { return (mean_of(delta) - p.d) / p.d; },
                                  delta_min, delta_bar, RootOptions{1e-14, 300});
    const double delta = rep.x(0);
    return {delta, upper_edge(delta) - delta, SolvePath::Nested};
}

Regular solve_nested_quadratic(const LpmProblem& p, const PartialMoments& pm, double delta_bar) {
    const double ez = pm.mean();
    const bool is_rich = rich(p, ez);
    auto budget = [&](double delta, double rho) {
        return payoff_moments(regular_payoff(p, delta, rho), pm.m0(), pm.nu0()).budget;
    };
    auto delta_hat = [&](double rho) {
        auto g = [&](double delta) { return (budget(delta, rho) - p.x0) / p.x0; };
        if (g(0.0) >= 0.0) return 0.0;
        return find_root_1d(g, 0.0, delta_bar, RootOptions{1e-15, 300}).x(0);
    };
    auto excess = [&](double log_rho) {
        const double rho = std::exp(log_rho);
        const auto mo = payoff_moments(regular_payoff(p, delta_hat(rho), rho), pm.m0(), pm.nu0());
        return (mo.mean - p.d) / p.d;
    };

    double lo = std::log(delta_bar) - 10.0;
    for (int k = 0; excess(lo) <= 0.0 && k < 40; ++k) lo -= 5.0;
    double hi;
    if (!is_rich) {
        hi = std::log(pm.invert_K(1.0, p.x0 / p.gamma));
    } else {
        hi = std::log(delta_bar) + 1.0;
        for (int k = 0; excess(hi) >= 0.0 && k < 200; ++k) hi += 1.0;
    }
    const auto rep = find_root_1d(excess, lo, hi, RootOptions{1e-14, 300});
    const double rho = std::exp(rep.x(0));
    return {delta_hat(rho), rho, SolvePath::Nested};
}

Regular solve_regular(const LpmProblem& p, const PartialMoments& pm, double delta_bar,
                      bool newton_first) {
    constexpr double kAccept = 1e-10;
    if (newton_first) try {
        const auto r = solve_newton(p, pm, delta_bar);
        const auto mo = payoff_moments(regular_payoff(p, r.delta, r.rho), pm.m0(), pm.nu0());
        if (std::isfinite(r.delta) && std::isfinite(r.rho) && r.delta > 0.0 && r.rho > 0.0 &&
            rel_gap(mo, p) <= kAccept) {
            return r;
        }
    } catch (const Error&) {
        // fall through to the nested solve
    }
    const auto r = p.q == 2.0 ? solve_nested_quadratic(p, pm, delta_bar)
                              : solve_nested_low_order(p, pm, delta_bar);
    const auto mo = payoff_moments(regular_payoff(p, r.delta, r.rho), pm.m0(), pm.nu0());
    if (!(rel_gap(mo, p) <= 1e-9)) {
        fail(ErrorCode::SolverDiverged, "multiplier system residual " + std::to_string(rel_gap(mo, p)));
    }
    return r;
}

}  // namespace

std::string_view to_string(LpmCase c) noexcept {
    switch (c) {
        case LpmCase::Regular: return "Regular";
        case LpmCase::DegenerateLowTarget: return "DegenerateLowTarget";
        case LpmCase::DegenerateRich: return "DegenerateRich";
    }
    return "?";
}

void validate(const LpmProblem& p, const MarketModel& model) {
    const double xbar = p.x0 * std::exp(model.integrated_rate(0.0, model.horizon()));
    if (!(p.x0 > 0.0) || !std::isfinite(p.x0)) fail(ErrorCode::InvalidProblem, "x0 must be positive");
    if (!(p.gamma > 0.0)) fail(ErrorCode::InvalidProblem, "benchmark gamma must be positive");
    if (!std::isfinite(p.d)) fail(ErrorCode::InvalidProblem, "target d must be finite");
    if (!q_supported(p.q)) {
        fail(ErrorCode::InvalidProblem, "q must be 0, in (0, 1], or 2; got " + std::to_string(p.q));
    }
    if (!(p.B > std::max({p.d, xbar, p.gamma})) || !std::isfinite(p.B)) {
        fail(ErrorCode::InvalidProblem, "cap B must exceed d, gamma and the riskless terminal wealth");
    }
}

DBounds d_bounds(const LpmProblem& p, const MarketModel& model) {
    validate(p, model);
    const auto pm = moments_at_zero(model);
    const double ez = pm.mean();
    if (p.x0 / p.B >= ez) {
        fail(ErrorCode::InfeasibleBudget, "x0 / B is not below E[z(T)]; the cap cannot be financed");
    }
    DBounds b;
    b.upper = p.B * H(pm, 0.0, pm.invert_H1(p.x0 / p.B));
    if (rich(p, ez)) {
        b.lower = (p.B - p.gamma) * H(pm, 0.0, rich_delta(p, pm)) + p.gamma;
    } else if (p.q == 2.0) {
        b.lower = p.gamma * pm.J(1.0, pm.invert_K(1.0, p.x0 / p.gamma));
    } else {
        b.lower = p.gamma * H(pm, 0.0, pm.invert_H1(p.x0 / p.gamma));
    }
    return b;
}

LpmCase classify(const LpmProblem& p, const MarketModel& model) {
    const auto b = d_bounds(p, model);
    if (p.d >= b.upper) {
        fail(ErrorCode::TargetTooHigh, "target d = " + std::to_string(p.d) +
                                           " exceeds d_upper = " + std::to_string(b.upper));
    }
    if (p.d > b.lower) return LpmCase::Regular;
    const auto pm = moments_at_zero(model);
    return rich(p, pm.mean()) ? LpmCase::DegenerateRich : LpmCase::DegenerateLowTarget;
}

Payoff lpm_payoff(const LpmProblem& p, const Multipliers& m, double delta_rich) {
    if (m.tag == LpmCase::DegenerateRich) return rich_payoff(p, delta_rich);
    const double rho = rho_scale(p) / m.eta;
    return regular_payoff(p, m.lambda / m.eta, rho);
}

double lpm_objective(const LpmProblem& p, const Payoff& x, double m0, double nu0) {
    auto shortfall = [&](double level) { return p.q == 0.0 ? 1.0 : std::pow(level, p.q); };
    double acc = 0.0;
    double covered_to = 0.0;
    for (const auto& pc : x.pieces) {
        if (pc.lo > covered_to) acc += shortfall(p.gamma) * piece_probability(covered_to, pc.lo, m0, nu0);
        covered_to = std::max(covered_to, pc.hi);
        if (pc.c1 == 0.0) {
            if (pc.c0 < p.gamma) acc += shortfall(p.gamma - pc.c0) * piece_probability(pc.lo, pc.hi, m0, nu0);
            continue;
        }
        // linear piece, only produced for q = 2 and lying below gamma
        double mk[3];
        for (int k = 0; k < 3; ++k) {
            mk[k] = lognormal_partial(k, pc.hi, m0, nu0) - lognormal_partial(k, pc.lo, m0, nu0);
        }
        const double a = p.gamma - pc.c0;
        acc += a * a * mk[0] - 2.0 * a * pc.c1 * mk[1] + pc.c1 * pc.c1 * mk[2];
    }
    if (covered_to < kInf) acc += shortfall(p.gamma) * piece_probability(covered_to, kInf, m0, nu0);
    return acc;
}

LpmSolution solve_lpm(const LpmProblem& p, const MarketModel& model, const LpmOptions& opts) {
    const auto bounds = d_bounds(p, model);
    const auto tag = classify(p, model);
    const auto pm = moments_at_zero(model);
    const double scale = rho_scale(p);

    Multipliers mult;
    mult.tag = tag;
    double delta = 0.0, rho = 0.0;
    SolvePath path = SolvePath::ClosedForm;
    Payoff x;
    switch (tag) {
        case LpmCase::Regular: {
            const auto r = solve_regular(p, pm, pm.invert_H1(p.x0 / p.B), opts.newton_first);
            delta = r.delta;
            rho = r.rho;
            path = r.path;
            mult.eta = scale / rho;
            mult.lambda = mult.eta * delta;
            x = regular_payoff(p, delta, rho);
            break;
        }
        case LpmCase::DegenerateLowTarget:
            rho = p.q == 2.0 ? pm.invert_K(1.0, p.x0 / p.gamma) : pm.invert_H1(p.x0 / p.gamma);
            mult.eta = scale / rho;
            x = regular_payoff(p, 0.0, rho);
            break;
        case LpmCase::DegenerateRich:
            delta = rich_delta(p, pm);
            rho = kInf;
            x = rich_payoff(p, delta);
            break;
    }

    LpmSolution s{p,
                  model.deflator_moments(0.0),
                  mult,
                  delta,
                  rho,
                  lpm_objective(p, x, pm.m0(), pm.nu0()),
                  H(pm, 0.0, delta),
                  bounds,
                  path,
                  tag == LpmCase::DegenerateRich,
                  PayoffPolicy(model, x)};
    return s;
}

Multipliers solve_multipliers(const LpmProblem& p, const MarketModel& model) {
    return solve_lpm(p, model).mult;
}

FeedbackCurve feedback_curve(const PayoffPolicy& policy, double t, const std::vector<double>& z_grid) {
    FeedbackCurve out;
    out.rows.reserve(z_grid.size());
    for (std::size_t i = 0; i < z_grid.size(); ++i) {
        FeedbackRow row;
        row.z = z_grid[i];
        row.x = policy.wealth(t, row.z);
        row.pi = policy.policy(t, row.z);
        row.w = row.pi / row.x;
        if (i > 0 && !(row.x < out.rows.back().x)) out.monotonicity_warning = true;
        out.rows.push_back(std::move(row));
    }
    std::stable_sort(out.rows.begin(), out.rows.end(),
                     [](const FeedbackRow& a, const FeedbackRow& b) { return a.x < b.x; });
    return out;
}

DBounds wealth_envelope(const LpmProblem& p, const MarketModel& model, double t) {
    return {0.0, p.B * std::exp(-model.integrated_rate(t, model.horizon()))};
}

}  // namespace dsr
