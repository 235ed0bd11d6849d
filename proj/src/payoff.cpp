#include "dsr/payoff.hpp"

#include "dsr/error.hpp"
#include "dsr/gaussian.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace dsr {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double log_or_inf(double a) {
    if (a <= 0.0) return -kInf;
    if (a == kInf) return kInf;
    return std::log(a);
}

// d/dz E[Y^k 1{Y <= h/z}] = -(h/z)^k phi((ln(h/z) - m)/nu) / (nu z); zero at h = 0 or +inf.
double partial_dz(double k, double h, double z, double m, double nu) {
    if (h <= 0.0 || h == kInf) return 0.0;
    const double a = h / z;
    const double f = (std::log(a) - m) / nu;
    return -std::pow(a, k) * norm_pdf(f) / (nu * z);
}

}  // namespace

double Payoff::operator()(double z) const {
    for (const auto& p : pieces) {
        if (z > p.lo && z <= p.hi) return p.c0 + p.c1 * z;
    }
    return 0.0;
}

std::vector<double> Payoff::kinks() const {
    std::vector<double> out;
    for (const auto& p : pieces) {
        if (p.lo > 0.0) out.push_back(p.lo);
        if (p.hi < kInf) out.push_back(p.hi);
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

double lognormal_partial(double k, double a, double m, double nu) {
    return truncated_exp_moment(k, m, nu, log_or_inf(a));
}

double piece_probability(double lo, double hi, double m0, double nu0) {
    if (hi == kInf) return lo <= 0.0 ? 1.0 : norm_sf((std::log(lo) - m0) / nu0);
    return lognormal_partial(0.0, hi, m0, nu0) - lognormal_partial(0.0, lo, m0, nu0);
}

PayoffMoments payoff_moments(const Payoff& x, double m0, double nu0) {
    PayoffMoments out;
    for (const auto& p : x.pieces) {
        double mk[3];
        for (int k = 0; k < 3; ++k) {
            mk[k] = lognormal_partial(k, p.hi, m0, nu0) - lognormal_partial(k, p.lo, m0, nu0);
        }
        out.mean += p.c0 * mk[0] + p.c1 * mk[1];
        out.budget += p.c0 * mk[1] + p.c1 * mk[2];
        out.second += p.c0 * p.c0 * mk[0] + 2.0 * p.c0 * p.c1 * mk[1] + p.c1 * p.c1 * mk[2];
    }
    return out;
}

PayoffPolicy::PayoffPolicy(MarketModel model, Payoff payoff)
    : model_(std::move(model)), payoff_(std::move(payoff)) {}

double PayoffPolicy::wealth(double t, double z) const {
    if (!(z > 0.0)) fail(ErrorCode::DomainError, "wealth needs z > 0");
    const auto dm = model_.deflator_moments(t);
    if (dm.nu < kTerminalNu) {
        const double y = std::exp(dm.m);
        return y * payoff_(z * y);
    }
    double x = 0.0;
    for (const auto& p : payoff_.pieces) {
        const double lo = p.lo / z;
        const double hi = p.hi / z;
        const double m1 = lognormal_partial(1, hi, dm.m, dm.nu) - lognormal_partial(1, lo, dm.m, dm.nu);
        const double m2 = lognormal_partial(2, hi, dm.m, dm.nu) - lognormal_partial(2, lo, dm.m, dm.nu);
        x += p.c0 * m1 + p.c1 * z * m2;
    }
    return x;
}

double PayoffPolicy::wealth_dz(double t, double z) const {
    if (!(z > 0.0)) fail(ErrorCode::DomainError, "wealth needs z > 0");
    const auto dm = model_.deflator_moments(t);
    if (dm.nu < kTerminalNu) {
        fail(ErrorCode::PolicyUndefinedAtTerminal, "wealth sensitivity undefined at t = T");
    }
    double dx = 0.0;
    for (const auto& p : payoff_.pieces) {
        const double d1 = partial_dz(1, p.hi, z, dm.m, dm.nu) - partial_dz(1, p.lo, z, dm.m, dm.nu);
        const double d2 = partial_dz(2, p.hi, z, dm.m, dm.nu) - partial_dz(2, p.lo, z, dm.m, dm.nu);
        const double m2 = lognormal_partial(2, p.hi / z, dm.m, dm.nu) -
                          lognormal_partial(2, p.lo / z, dm.m, dm.nu);
        dx += p.c0 * d1 + p.c1 * (m2 + z * d2);
    }
    return dx;
}

Eigen::VectorXd PayoffPolicy::policy(double t, double z) const {
    Eigen::VectorXd dir = model_.risky_direction(t);
    if (dir.isZero(0.0)) return dir;
    const double s = -z * wealth_dz(t, z);
    return s * dir;
}

}  // namespace dsr
