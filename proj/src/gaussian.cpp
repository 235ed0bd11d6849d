#include "dsr/gaussian.hpp"

#include "dsr/error.hpp"
#include "dsr/solvers.hpp"

#include <boost/math/special_functions/erf.hpp>

#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

namespace dsr {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

}  // namespace

double norm_cdf(double y) { return 0.5 * std::erfc(-y / std::numbers::sqrt2); }

double norm_sf(double y) { return 0.5 * std::erfc(y / std::numbers::sqrt2); }

double norm_pdf(double y) {
    return std::exp(-0.5 * y * y) * (0.5 * std::numbers::inv_sqrtpi * std::numbers::sqrt2);
}

double norm_quantile(double p) {
    if (!(p > 0.0 && p < 1.0)) {
        fail(ErrorCode::DomainError, "normal quantile needs 0 < p < 1, got " + std::to_string(p));
    }
    return -std::numbers::sqrt2 * boost::math::erfc_inv(2.0 * p);
}

double truncated_exp_moment(double a, double mu, double v, double dcut) {
    if (v <= 0.0) return mu <= dcut ? std::exp(a * mu) : 0.0;
    if (dcut == kInf) return std::exp(a * mu + 0.5 * a * a * v * v);
    if (dcut == -kInf) return 0.0;
    return std::exp(a * mu + 0.5 * a * a * v * v) * norm_cdf((dcut - mu) / v - a * v);
}

PartialMoments::PartialMoments(double m0, double nu0) : m0_(m0), nu0_(nu0) {
    if (!(nu0 > 0.0) || !std::isfinite(nu0) || !std::isfinite(m0)) {
        fail(ErrorCode::DomainError, "partial moments need finite m0 and nu0 > 0");
    }
}

double PartialMoments::F(double y) const { return (std::log(y) - m0_) / nu0_; }

double PartialMoments::full_moment(double p) const {
    return std::exp(p * m0_ + 0.5 * p * p * nu0_ * nu0_);
}

double PartialMoments::H(double p, double y) const {
    if (!(y > 0.0)) fail(ErrorCode::DomainError, "H_p(y) needs y > 0");
    if (y == kInf) return full_moment(p);
    return full_moment(p) * norm_cdf(F(y) - p * nu0_);
}

double PartialMoments::K(double p, double y) const {
    if (y == kInf) return mean();
    return H(1.0, y) - H(p + 1.0, y) / std::pow(y, p);
}

double PartialMoments::J(double p, double y) const {
    if (y == kInf) return 1.0;
    return H(0.0, y) - H(p, y) / std::pow(y, p);
}

double PartialMoments::K_complement(double p, double y) const {
    if (!(y > 0.0)) fail(ErrorCode::DomainError, "K_p(y) needs y > 0");
    if (y == kInf) return 0.0;
    return mean() * norm_sf(F(y) - nu0_) + H(p + 1.0, y) / std::pow(y, p);
}

namespace {

// Solve an increasing map G(u) = target on u = ln y, where G ranges over (0, sup).
// `lower` evaluates G, `upper` evaluates sup - G; the better conditioned side is used.
template <class Lower, class Upper>
double invert_log_increasing(Lower lower, Upper upper, double sup, double target, double seed,
                             double scale, double rel_tol) {
    const bool use_upper = target > 0.5 * sup;
    const double gap = sup - target;
    auto g = [&](double u) {
        return use_upper ? 1.0 - upper(std::exp(u)) / gap : lower(std::exp(u)) / target - 1.0;
    };

    const std::array<double, 4> offsets{-4.0, -1.0, 1.0, 4.0};
    std::array<double, 4> u{};
    std::array<double, 4> gv{};
    for (std::size_t i = 0; i < 4; ++i) {
        u[i] = seed + offsets[i] * scale;
        gv[i] = g(u[i]);
    }
    double lo = u[0], hi = u[3];
    double glo = gv[0], ghi = gv[3];
    for (std::size_t i = 0; i + 1 < 4; ++i) {
        if (gv[i] <= 0.0 && gv[i + 1] >= 0.0) {
            lo = u[i];
            hi = u[i + 1];
            glo = gv[i];
            ghi = gv[i + 1];
            break;
        }
    }
    double step = 4.0 * scale;
    for (int k = 0; glo > 0.0 && k < 60; ++k) {
        hi = lo;
        step *= 2.0;
        lo -= step;
        glo = g(lo);
    }
    for (int k = 0; ghi < 0.0 && k < 60; ++k) {
        lo = hi;
        step *= 2.0;
        hi += step;
        ghi = g(hi);
    }
    if (glo > 0.0 || ghi < 0.0) {
        fail(ErrorCode::NumericalBreakdown, "could not bracket partial-moment inverse");
    }
    const auto rep = find_root_1d(g, lo, hi, RootOptions{rel_tol, 300});
    return std::exp(rep.x(0));
}

void check_target(double target, double sup, const char* what) {
    if (!(target > 0.0 && target < sup)) {
        fail(ErrorCode::TargetOutOfRange, std::string(what) + " target " + std::to_string(target) +
                                              " outside (0, " + std::to_string(sup) + ")");
    }
}

}  // namespace

double PartialMoments::invert_K(double p, double target, double rel_tol) const {
    if (!(p > 0.0)) fail(ErrorCode::DomainError, "invert_K needs p > 0");
    const double sup = mean();
    check_target(target, sup, "K_p");
    return invert_log_increasing([&](double y) { return K(p, y); },
                                 [&](double y) { return K_complement(p, y); }, sup, target, m0_,
                                 nu0_, rel_tol);
}

double PartialMoments::invert_H1(double target, double rel_tol) const {
    const double sup = mean();
    check_target(target, sup, "H_1");
    // closed-form seed, then polished by the bracketed solve
    const double ratio = target / sup;
    const double z = ratio < 0.5 ? norm_quantile(ratio) : -norm_quantile((sup - target) / sup);
    const double seed = m0_ + nu0_ * (z + nu0_);
    return invert_log_increasing([&](double y) { return H(1.0, y); },
                                 [&](double y) { return sup * norm_sf(F(y) - nu0_); }, sup,
                                 target, seed, 1e-3 * nu0_, rel_tol);
}

}  // namespace dsr
