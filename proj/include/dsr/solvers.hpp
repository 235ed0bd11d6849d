#pragma once

#include <Eigen/Dense>

#include <functional>

namespace dsr {

struct SolveReport {
    Eigen::VectorXd x;
    double residual_norm = 0.0;
    /// Final bracket width for the 1-D methods, 0 for solve_2d.
    double width = 0.0;
    /// Objective at x (minimizer only).
    double value = 0.0;
    int iterations = 0;
    bool converged = false;
};

struct RootOptions {
    double tol = 1e-12;
    int max_iter = 200;
};

struct NewtonOptions {
    double tol = 1e-10;
    int max_iter = 100;
    int max_halvings = 30;
    double fd_step = 1e-6;
};

struct MinimizeOptions {
    double tol = 1e-8;
    int max_iter = 500;
};

using ScalarFn = std::function<double(double)>;
using PlaneFn = std::function<Eigen::Vector2d(const Eigen::Vector2d&)>;

/// Bracketed root of f on [lo, hi]. Stops when |f| <= tol or the bracket is narrower than
/// tol * max(1, |x|). Throws NoSignChange or MaxIterations.
SolveReport find_root_1d(const ScalarFn& f, double lo, double hi, const RootOptions& opts = {});

/// Damped Newton with a central-difference Jacobian. Throws MaxIterations or SingularJacobian.
SolveReport solve_2d(const PlaneFn& F, const Eigen::Vector2d& x0, const NewtonOptions& opts = {});

/// Golden-section search for a unimodal g on [lo, hi]; returns the midpoint of the last bracket.
SolveReport minimize_scalar_convex(const ScalarFn& g, double lo, double hi,
                                   const MinimizeOptions& opts = {});

}  // namespace dsr
