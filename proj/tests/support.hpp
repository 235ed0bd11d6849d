#pragma once

#include "dsr/market_model.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>
#include <limits>

namespace dsr::test {

inline MarketModel example1() {
    Eigen::VectorXd mu(1);
    mu << 0.12;
    Eigen::MatrixXd s(1, 1);
    s << 0.15;
    return MarketModel::constant(1.0, 0.06, mu, s);
}

inline MarketModel example2(double r = 0.016) {
    Eigen::VectorXd mu(3);
    mu << 0.1346, 0.0530, 0.1722;
    Eigen::MatrixXd s(3, 3);
    s << 0.1428, 0.0094, 0.1002,
         0.0094, 0.0728, 0.0031,
         0.1002, 0.0031, 0.2353;
    return MarketModel::constant(1.0, r, mu, s);
}

/// Adaptive Gauss-Kronrod over [a, b]; infinite ends allowed.
template <class F>
double quad(F f, double a, double b, double tol = 1e-13) {
    return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, a, b, 15, tol);
}

/// E[g(Y)] for Y ~ N(m, s^2) by quadrature over y, split at the given interior points.
template <class G>
double normal_expectation(G g, double m, double s, std::initializer_list<double> cuts = {}) {
    const double lo = m - 12.0 * s, hi = m + 12.0 * s;
    double acc = 0.0, a = lo;
    auto dens = [&](double y) {
        const double u = (y - m) / s;
        return g(y) * std::exp(-0.5 * u * u) / (s * std::sqrt(2.0 * M_PI));
    };
    for (double c : cuts) {
        if (c <= a || c >= hi) continue;
        acc += quad(dens, a, c);
        a = c;
    }
    return acc + quad(dens, a, hi);
}

}  // namespace dsr::test
