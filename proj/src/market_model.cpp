#include "dsr/market_model.hpp"

#include "dsr/error.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace dsr {

namespace {

bool all_finite(const Eigen::MatrixXd& m) { return m.allFinite(); }

}  // namespace

MarketModel MarketModel::create(double horizon, std::vector<MarketSegment> segments,
                                double eps_nd) {
    if (!(horizon > 0.0) || !std::isfinite(horizon)) {
        fail(ErrorCode::NonpositiveHorizon, "market horizon must be positive and finite");
    }
    if (segments.empty()) {
        fail(ErrorCode::DimensionMismatch, "market needs at least one segment");
    }
    std::sort(segments.begin(), segments.end(),
              [](const MarketSegment& a, const MarketSegment& b) { return a.t_start < b.t_start; });
    if (segments.front().t_start != 0.0) {
        fail(ErrorCode::DimensionMismatch, "first market segment must start at t=0");
    }

    const auto n = segments.front().mu.size();
    if (n < 1) fail(ErrorCode::DimensionMismatch, "market needs at least one risky asset");

    MarketModel model;
    model.horizon_ = horizon;
    for (std::size_t k = 0; k < segments.size(); ++k) {
        const auto& seg = segments[k];
        if (seg.mu.size() != n || seg.sigma.rows() != n || seg.sigma.cols() != n) {
            fail(ErrorCode::DimensionMismatch,
                 "segment " + std::to_string(k) + ": mu/sigma dimensions disagree with n=" +
                     std::to_string(n));
        }
        if (k > 0 && !(seg.t_start > segments[k - 1].t_start)) {
            fail(ErrorCode::DimensionMismatch, "segment start times must be strictly increasing");
        }
        if (seg.t_start >= horizon) {
            fail(ErrorCode::DimensionMismatch, "segment starts at or after the horizon");
        }
        if (!std::isfinite(seg.r) || !all_finite(seg.mu) || !all_finite(seg.sigma)) {
            fail(ErrorCode::DimensionMismatch,
                 "segment " + std::to_string(k) + " has non-finite coefficients");
        }

        const Eigen::MatrixXd ssT = seg.sigma * seg.sigma.transpose();
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(ssT, Eigen::EigenvaluesOnly);
        const double min_eig = eig.eigenvalues().minCoeff();
        if (!(min_eig >= eps_nd)) {
            fail(ErrorCode::DegenerateVolatility,
                 "segment " + std::to_string(k) + ": smallest eigenvalue of sigma sigma' is " +
                     std::to_string(min_eig));
        }

        Eigen::FullPivLU<Eigen::MatrixXd> lu(seg.sigma);
        if (!lu.isInvertible()) {
            fail(ErrorCode::SingularVolatility, "volatility matrix is singular");
        }
        const Eigen::VectorXd b = seg.mu.array() - seg.r;
        SegmentCache c;
        c.theta = lu.solve(b);
        c.theta_sq = c.theta.squaredNorm();
        c.direction = ssT.ldlt().solve(b);
        model.cache_.push_back(std::move(c));
    }
    model.segments_ = std::move(segments);
    return model;
}

MarketModel MarketModel::constant(double horizon, double r, const Eigen::VectorXd& mu,
                                  const Eigen::MatrixXd& sigma, double eps_nd) {
    return create(horizon, {MarketSegment{0.0, r, mu, sigma}}, eps_nd);
}

std::vector<double> MarketModel::breakpoints() const {
    std::vector<double> out;
    out.reserve(segments_.size() + 1);
    for (const auto& s : segments_) out.push_back(s.t_start);
    out.push_back(horizon_);
    return out;
}

std::size_t MarketModel::index_at(double t) const {
    if (!(t >= 0.0 && t <= horizon_)) {
        fail(ErrorCode::DomainError, "time " + std::to_string(t) + " outside [0, T]");
    }
    auto it = std::upper_bound(segments_.begin(), segments_.end(), t,
                               [](double v, const MarketSegment& s) { return v < s.t_start; });
    return static_cast<std::size_t>(std::distance(segments_.begin(), it)) - 1;
}

const MarketSegment& MarketModel::segment_at(double t) const { return segments_[index_at(t)]; }

Eigen::VectorXd MarketModel::excess_return(double t) const {
    const auto& s = segment_at(t);
    return s.mu.array() - s.r;
}

Eigen::VectorXd MarketModel::market_price_of_risk(double t) const {
    return cache_[index_at(t)].theta;
}

Eigen::VectorXd MarketModel::risky_direction(double t) const {
    return cache_[index_at(t)].direction;
}

template <class F>
double MarketModel::integrate(double t0, double t1, F&& value) const {
    if (!(t0 >= 0.0 && t1 <= horizon_ && t0 <= t1)) {
        fail(ErrorCode::DomainError, "integration range outside [0, T]");
    }
    double acc = 0.0;
    for (std::size_t k = 0; k < segments_.size(); ++k) {
        const double a = std::max(t0, segments_[k].t_start);
        const double b = std::min(t1, k + 1 < segments_.size() ? segments_[k + 1].t_start : horizon_);
        if (b > a) acc += (b - a) * value(k);
    }
    return acc;
}

double MarketModel::integrated_rate(double t0, double t1) const {
    return integrate(t0, t1, [&](std::size_t k) { return segments_[k].r; });
}

DeflatorMoments MarketModel::deflator_moments(double t) const {
    DeflatorMoments out;
    out.t = t;
    out.m = -integrate(t, horizon_,
                       [&](std::size_t k) { return segments_[k].r + 0.5 * cache_[k].theta_sq; });
    out.nu = std::sqrt(integrate(t, horizon_, [&](std::size_t k) { return cache_[k].theta_sq; }));
    return out;
}

double MarketModel::expected_deflator(double t0, double t1) const {
    return std::exp(-integrated_rate(t0, t1));
}

}  // namespace dsr
