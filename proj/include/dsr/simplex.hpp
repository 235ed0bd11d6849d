#pragma once

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include <string_view>
#include <vector>

namespace dsr {

enum class RowSense { Geq, Eq, Leq };

/// min c'x  s.t.  A_i x (>=, =, <=) b_i,  lower <= x <= upper (infinite bounds allowed).
struct LinearProgram {
    Eigen::SparseMatrix<double> A;
    Eigen::VectorXd b;
    std::vector<RowSense> sense;
    Eigen::VectorXd c;
    Eigen::VectorXd lower;
    Eigen::VectorXd upper;

    int rows() const { return static_cast<int>(A.rows()); }
    int cols() const { return static_cast<int>(A.cols()); }
};

enum class LpStatus { Optimal, Infeasible, Unbounded };

std::string_view to_string(LpStatus s) noexcept;

struct LpResult {
    LpStatus status = LpStatus::Infeasible;
    Eigen::VectorXd x;
    double objective = 0.0;
    /// Row multipliers y with c - A'y the reduced costs.
    Eigen::VectorXd row_duals;
    int iterations = 0;
    /// Solved through the dual program.
    bool dualized = false;
    /// max violation of rows and bounds at x.
    double primal_residual = 0.0;
};

struct SimplexOptions {
    double feas_tol = 1e-9;
    double opt_tol = 1e-9;
    double pivot_tol = 1e-9;
    int max_iter = 2'000'000;
    /// Consecutive degenerate pivots before switching to Bland's rule.
    int stall_limit = 50;
    bool allow_dualize = true;
};

/// Largest row or bound violation of x.
double primal_violation(const LinearProgram& lp, const Eigen::VectorXd& x);

/// Two-phase bounded-variable revised simplex on the program as given.
LpResult revised_simplex(const LinearProgram& lp, const SimplexOptions& opts = {});

/**
 * Solves lp, switching to the dual program when it has fewer rows. Nonnegative columns with a
 * single nonzero become bounds on the dual variables, so the dual of a scenario program keeps
 * one row per free variable. Throws NumericalBreakdown if the recovered primal fails its checks.
 */
LpResult simplex_solve(const LinearProgram& lp, const SimplexOptions& opts = {});

}  // namespace dsr
