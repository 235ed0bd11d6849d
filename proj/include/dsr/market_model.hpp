#pragma once

#include <Eigen/Dense>

#include <vector>

namespace dsr {

/// One piece of the piecewise-constant coefficient schedule, active on [t_start, next t_start).
struct MarketSegment {
    double t_start = 0.0;
    double r = 0.0;
    Eigen::VectorXd mu;
    Eigen::MatrixXd sigma;
};

/// Mean and standard deviation of ln(z(T)/z(t)) under deterministic coefficients.
struct DeflatorMoments {
    double m = 0.0;
    double nu = 0.0;
    double t = 0.0;
};

/**
 * Deterministic market: a bank account with rate r(t) and n risky assets with
 * drift mu(t) and volatility sigma(t), all piecewise constant on [0, T].
 *
 * Instances only come out of MarketModel::create, which enforces the
 * nondegeneracy condition sigma sigma' >= eps I on every segment. The object
 * is immutable afterwards.
 */
class MarketModel {
public:
    static constexpr double kDefaultNondegeneracy = 1e-10;

    static MarketModel create(double horizon, std::vector<MarketSegment> segments,
                              double eps_nd = kDefaultNondegeneracy);

    /// Convenience for the constant-coefficient case.
    static MarketModel constant(double horizon, double r, const Eigen::VectorXd& mu,
                                const Eigen::MatrixXd& sigma,
                                double eps_nd = kDefaultNondegeneracy);

    double horizon() const noexcept { return horizon_; }
    int n_assets() const noexcept { return static_cast<int>(segments_.front().mu.size()); }
    const std::vector<MarketSegment>& segments() const noexcept { return segments_; }
    std::vector<double> breakpoints() const;

    const MarketSegment& segment_at(double t) const;
    double rate(double t) const { return segment_at(t).r; }
    Eigen::VectorXd excess_return(double t) const;

    /// theta(t) = sigma(t)^{-1} (mu(t) - r(t) 1).
    Eigen::VectorXd market_price_of_risk(double t) const;

    /// (sigma sigma')^{-1} b: the direction every closed-form policy points along.
    Eigen::VectorXd risky_direction(double t) const;

    DeflatorMoments deflator_moments(double t) const;

    /// exp(-int_{t0}^{t1} r(s) ds).
    double expected_deflator(double t0, double t1) const;

    double integrated_rate(double t0, double t1) const;

private:
    MarketModel() = default;

    struct SegmentCache {
        Eigen::VectorXd theta;
        Eigen::VectorXd direction;
        double theta_sq = 0.0;
    };

    template <class F>
    double integrate(double t0, double t1, F&& value) const;

    std::size_t index_at(double t) const;

    double horizon_ = 0.0;
    std::vector<MarketSegment> segments_;
    std::vector<SegmentCache> cache_;
};

}  // namespace dsr
