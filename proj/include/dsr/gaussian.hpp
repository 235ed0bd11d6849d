#pragma once

namespace dsr {

double norm_cdf(double y);
double norm_pdf(double y);
/// Upper tail 1 - cdf(y), without cancellation for large y.
double norm_sf(double y);
/// Inverse of norm_cdf; throws DomainError unless 0 < p < 1.
double norm_quantile(double p);

/// E[exp(aY) 1{Y <= dcut}] for Y ~ N(mu, v^2). dcut may be +/-infinity.
double truncated_exp_moment(double a, double mu, double v, double dcut);

/**
 * Partial moments of a lognormal variable Z with ln Z ~ N(m0, nu0^2):
 *   H_p(y) = E[Z^p 1{Z <= y}],  K_p(y) = H_1(y) - H_{p+1}(y)/y^p,  J_p(y) = H_0(y) - H_p(y)/y^p.
 * y = +infinity is accepted and yields the full moment.
 */
class PartialMoments {
public:
    PartialMoments(double m0, double nu0);

    double m0() const noexcept { return m0_; }
    double nu0() const noexcept { return nu0_; }

    /// E[Z^p].
    double full_moment(double p) const;
    double mean() const { return full_moment(1.0); }

    double H(double p, double y) const;
    double K(double p, double y) const;
    double J(double p, double y) const;

    /// E[Z] - K_p(y), evaluated directly so it stays accurate when K_p(y) is close to E[Z].
    double K_complement(double p, double y) const;

    /// y with K_p(y) = target; TargetOutOfRange unless 0 < target < E[Z].
    double invert_K(double p, double target, double rel_tol = 1e-12) const;
    /// y with H_1(y) = target; TargetOutOfRange unless 0 < target < E[Z].
    double invert_H1(double target, double rel_tol = 1e-12) const;

private:
    double F(double y) const;

    double m0_;
    double nu0_;
};

}  // namespace dsr
