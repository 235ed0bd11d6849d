#include "dsr/solvers.hpp"

#include "dsr/error.hpp"

#include <boost/math/tools/toms748_solve.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>

namespace dsr {

SolveReport find_root_1d(const ScalarFn& f, double lo, double hi, const RootOptions& opts) {
    if (lo > hi) std::swap(lo, hi);
    const double flo = f(lo);
    const double fhi = f(hi);
    SolveReport rep;
    rep.x.resize(1);
    auto done = [&](double x, double fx, double width, int it) {
        rep.x(0) = x;
        rep.residual_norm = std::abs(fx);
        rep.width = width;
        rep.iterations = it;
        rep.converged = true;
        return rep;
    };
    if (std::abs(flo) <= opts.tol) return done(lo, flo, hi - lo, 0);
    if (std::abs(fhi) <= opts.tol) return done(hi, fhi, hi - lo, 0);
    if (!(flo * fhi < 0.0)) {
        fail(ErrorCode::NoSignChange, "no sign change on [" + std::to_string(lo) + ", " +
                                          std::to_string(hi) + "]");
    }

    double best_x = std::abs(flo) < std::abs(fhi) ? lo : hi;
    double best_f = std::min(std::abs(flo), std::abs(fhi));
    auto tracked = [&](double x) {
        const double v = f(x);
        if (std::abs(v) < best_f) {
            best_f = std::abs(v);
            best_x = x;
        }
        return v;
    };
    auto stop = [&](double a, double b) {
        const double mid = 0.5 * (a + b);
        return best_f <= opts.tol || std::abs(b - a) <= opts.tol * std::max(1.0, std::abs(mid));
    };

    std::uintmax_t iters = static_cast<std::uintmax_t>(opts.max_iter);
    const auto bracket = boost::math::tools::toms748_solve(tracked, lo, hi, flo, fhi, stop, iters);
    const double width = bracket.second - bracket.first;
    if (!stop(bracket.first, bracket.second)) {
        fail(ErrorCode::MaxIterations, "root finder exceeded " + std::to_string(opts.max_iter) +
                                           " iterations");
    }
    double x = best_x;
    double fx = best_f;
    if (best_f > opts.tol) {
        // width criterion: report the bracket end with the smaller residual
        const double fa = std::abs(f(bracket.first));
        const double fb = std::abs(f(bracket.second));
        x = fa <= fb ? bracket.first : bracket.second;
        fx = std::min(fa, fb);
    }
    return done(std::clamp(x, lo, hi), fx, width, static_cast<int>(iters));
}

SolveReport solve_2d(const PlaneFn& F, const Eigen::Vector2d& x0, const NewtonOptions& opts) {
    Eigen::Vector2d x = x0;
    Eigen::Vector2d fx = F(x);
    SolveReport rep;
    for (int it = 0; it <= opts.max_iter; ++it) {
        if (!fx.allFinite()) {
            fail(ErrorCode::SolverDiverged, "Newton residual became non-finite");
        }
        if (fx.lpNorm<Eigen::Infinity>() <= opts.tol) {
            rep.x = x;
            rep.residual_norm = fx.lpNorm<Eigen::Infinity>();
            rep.iterations = it;
            rep.converged = true;
            return rep;
        }
        if (it == opts.max_iter) break;

        Eigen::Matrix2d jac;
        for (int j = 0; j < 2; ++j) {
            const double h = opts.fd_step * std::max(1.0, std::abs(x(j)));
            Eigen::Vector2d xp = x, xm = x;
            xp(j) += h;
            xm(j) -= h;
            jac.col(j) = (F(xp) - F(xm)) / (2.0 * h);
        }
        const double scale = jac.cwiseAbs().maxCoeff();
        if (!(std::abs(jac.determinant()) > 1e-14 * scale * scale) || !jac.allFinite()) {
            fail(ErrorCode::SingularJacobian, "finite-difference Jacobian is singular");
        }
        const Eigen::Vector2d step = jac.partialPivLu().solve(-fx);

        const double norm0 = fx.lpNorm<Eigen::Infinity>();
        double t = 1.0;
        Eigen::Vector2d xn = x + step;
        Eigen::Vector2d fn = F(xn);
        int halvings = 0;
        while (!(fn.allFinite() && fn.lpNorm<Eigen::Infinity>() < norm0) &&
               halvings < opts.max_halvings) {
            t *= 0.5;
            xn = x + t * step;
            fn = F(xn);
            ++halvings;
        }
        x = xn;
        fx = fn;
    }
    fail(ErrorCode::MaxIterations,
         "Newton did not converge in " + std::to_string(opts.max_iter) + " iterations");
}

SolveReport minimize_scalar_convex(const ScalarFn& g, double lo, double hi,
                                   const MinimizeOptions& opts) {
    if (lo > hi) std::swap(lo, hi);
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = lo, b = hi;
    double c = b - inv_phi * (b - a);
    double d = a + inv_phi * (b - a);
    double gc = g(c), gd = g(d);
    int it = 0;
    while (b - a > opts.tol) {
        if (it++ >= opts.max_iter) {
            fail(ErrorCode::MaxIterations, "golden-section search did not reach tolerance");
        }
        if (gc <= gd) {
            b = d;
            d = c;
            gd = gc;
            c = b - inv_phi * (b - a);
            gc = g(c);
        } else {
            a = c;
            c = d;
            gc = gd;
            d = a + inv_phi * (b - a);
            gd = g(d);
        }
    }
    SolveReport rep;
    rep.x.resize(1);
    rep.x(0) = 0.5 * (a + b);
    rep.value = g(rep.x(0));
    rep.residual_norm = b - a;
    rep.width = b - a;
    rep.iterations = it;
    rep.converged = true;
    return rep;
}

}  // namespace dsr
