#include "dsr/simplex.hpp"

#include "dsr/error.hpp"

#include <Eigen/LU>
#include <Eigen/SparseCore>

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>

namespace dsr {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

enum class VarState { Basic, Lower, Upper, Zero };

using SpMat = Eigen::SparseMatrix<double>;

struct Work {
    SpMat A;  // rows x (structural + slack + artificial)
    Eigen::VectorXd b;
    Eigen::VectorXd lo, up, cost;
    Eigen::VectorXd x;
    std::vector<VarState> state;
    std::vector<int> basis;
    Eigen::VectorXd y;
    int iterations = 0;
};

double dot_col(const SpMat& A, int j, const Eigen::VectorXd& y) {
    double s = 0.0;
    for (SpMat::InnerIterator it(A, j); it; ++it) s += it.value() * y(it.row());
    return s;
}

// Runs simplex iterations on the current basis until optimal. Returns false if unbounded.
bool iterate(Work& w, const SimplexOptions& opts) {
    const int m = static_cast<int>(w.A.rows());
    const int ntot = static_cast<int>(w.A.cols());
    int stall = 0;
    Eigen::MatrixXd B(m, m);
    Eigen::VectorXd rhs(m), col(m), aq(m);

    for (;;) {
        if (w.iterations++ > opts.max_iter) {
            fail(ErrorCode::MaxIterations, "simplex iteration limit reached");
        }
        B.setZero();
        for (int i = 0; i < m; ++i) {
            for (SpMat::InnerIterator it(w.A, w.basis[i]); it; ++it) B(it.row(), i) = it.value();
        }
        Eigen::PartialPivLU<Eigen::MatrixXd> lu(B);
        if (!(lu.rcond() > 1e-14)) {
            fail(ErrorCode::NumericalBreakdown, "simplex basis became singular");
        }

        rhs = w.b;
        for (int j = 0; j < ntot; ++j) {
            if (w.state[j] == VarState::Basic || w.x(j) == 0.0) continue;
            for (SpMat::InnerIterator it(w.A, j); it; ++it) rhs(it.row()) -= it.value() * w.x(j);
        }
        const Eigen::VectorXd xb = lu.solve(rhs);
        Eigen::VectorXd cb(m);
        for (int i = 0; i < m; ++i) {
            w.x(w.basis[i]) = xb(i);
            cb(i) = w.cost(w.basis[i]);
        }
        w.y = lu.transpose().solve(cb);

        const bool bland = stall > opts.stall_limit;
        int q = -1;
        double best = 0.0, dq = 0.0;
        for (int j = 0; j < ntot; ++j) {
            const auto st = w.state[j];
            if (st == VarState::Basic || w.lo(j) == w.up(j)) continue;
            const double dj = w.cost(j) - dot_col(w.A, j, w.y);
            double score = 0.0;
            if (st == VarState::Lower && dj < -opts.opt_tol) score = -dj;
            else if (st == VarState::Upper && dj > opts.opt_tol) score = dj;
            else if (st == VarState::Zero && std::abs(dj) > opts.opt_tol) score = std::abs(dj);
            if (score <= 0.0) continue;
            if (bland) {
                q = j;
                dq = dj;
                break;
            }
            if (score > best) {
                best = score;
                q = j;
                dq = dj;
            }
        }
        if (q < 0) return true;

        aq.setZero();
        for (SpMat::InnerIterator it(w.A, q); it; ++it) aq(it.row()) = it.value();
        col = lu.solve(aq);
        const double s = dq < 0.0 ? 1.0 : -1.0;

        double t = w.up(q) - w.lo(q);  // bound flip of the entering variable
        int leave = -1;
        bool leave_to_upper = false;
        double leave_piv = 0.0;
        for (int i = 0; i < m; ++i) {
            const double a = s * col(i);
            const int v = w.basis[i];
            double ti;
            bool to_upper;
            if (a > opts.pivot_tol && w.lo(v) > -kInf) {
                ti = (w.x(v) - w.lo(v)) / a;
                to_upper = false;
            } else if (a < -opts.pivot_tol && w.up(v) < kInf) {
                ti = (w.up(v) - w.x(v)) / -a;
                to_upper = true;
            } else {
                continue;
            }
            ti = std::max(ti, 0.0);
            bool take = false;
            if (ti < t - 1e-12) {
                take = true;
            } else if (ti <= t + 1e-12 && leave >= 0) {
                take = bland ? v < w.basis[leave] : std::abs(a) > leave_piv;
            }
            if (take) {
                t = ti;
                leave = i;
                leave_to_upper = to_upper;
                leave_piv = std::abs(a);
            }
        }
        if (t == kInf) return false;

        stall = t < 1e-12 ? stall + 1 : 0;
        w.x(q) += s * t;
        if (leave < 0) {
            w.state[q] = s > 0.0 ? VarState::Upper : VarState::Lower;
            w.x(q) = s > 0.0 ? w.up(q) : w.lo(q);
            continue;
        }
        const int v = w.basis[leave];
        w.state[v] = leave_to_upper ? VarState::Upper : VarState::Lower;
        w.x(v) = leave_to_upper ? w.up(v) : w.lo(v);
        w.basis[leave] = q;
        w.state[q] = VarState::Basic;
    }
}

struct DualMap {
    LinearProgram dual;
    std::vector<int> row_col;                 // primal column behind each dual row
    std::vector<std::vector<int>> singletons;  // per primal row
};

std::optional<DualMap> build_dual(const LinearProgram& lp) {
    const int m = lp.rows(), n = lp.cols();
    SpMat A = lp.A;
    A.makeCompressed();
    DualMap dm;
    dm.singletons.assign(m, {});
    Eigen::VectorXd ylo(m), yup(m);
    for (int i = 0; i < m; ++i) {
        ylo(i) = lp.sense[i] == RowSense::Geq ? 0.0 : -kInf;
        yup(i) = lp.sense[i] == RowSense::Leq ? 0.0 : kInf;
    }
    std::vector<int> kept;
    std::vector<bool> nonneg(n);
    for (int j = 0; j < n; ++j) {
        const bool free = lp.lower(j) == -kInf && lp.upper(j) == kInf;
        nonneg[j] = lp.lower(j) == 0.0 && lp.upper(j) == kInf;
        if (!free && !nonneg[j]) return std::nullopt;
        const int nnz = static_cast<int>(A.outerIndexPtr()[j + 1] - A.outerIndexPtr()[j]);
        if (nonneg[j] && nnz == 1) {
            SpMat::InnerIterator it(A, j);
            const double a = it.value();
            const int i = static_cast<int>(it.row());
            if (a > 0.0) yup(i) = std::min(yup(i), lp.c(j) / a);
            else ylo(i) = std::max(ylo(i), lp.c(j) / a);
            dm.singletons[i].push_back(j);
        } else if (nnz > 0 || free) {
            kept.push_back(j);
        } else if (lp.c(j) < 0.0) {
            return std::nullopt;  // empty nonnegative column with negative cost: unbounded
        }
    }
    for (int i = 0; i < m; ++i) {
        if (ylo(i) > yup(i)) return std::nullopt;
    }
    if (static_cast<int>(kept.size()) >= m) return std::nullopt;

    std::vector<Eigen::Triplet<double>> trip;
    for (std::size_t r = 0; r < kept.size(); ++r) {
        for (SpMat::InnerIterator it(A, kept[r]); it; ++it) {
            trip.emplace_back(static_cast<int>(r), static_cast<int>(it.row()), it.value());
        }
    }
    auto& d = dm.dual;
    d.A.resize(static_cast<Eigen::Index>(kept.size()), m);
    d.A.setFromTriplets(trip.begin(), trip.end());
    d.b.resize(static_cast<Eigen::Index>(kept.size()));
    d.sense.resize(kept.size());
    for (std::size_t r = 0; r < kept.size(); ++r) {
        d.b(r) = lp.c(kept[r]);
        d.sense[r] = nonneg[kept[r]] ? RowSense::Leq : RowSense::Eq;
    }
    d.c = -lp.b;
    d.lower = ylo;
    d.upper = yup;
    dm.row_col = std::move(kept);
    return dm;
}

std::optional<LpResult> solve_via_dual(const LinearProgram& lp, const SimplexOptions& opts) {
    auto dm = build_dual(lp);
    if (!dm) return std::nullopt;
    const auto dres = revised_simplex(dm->dual, opts);
    LpResult out;
    out.dualized = true;
    out.iterations = dres.iterations;
    if (dres.status == LpStatus::Unbounded) {
        out.status = LpStatus::Infeasible;
        return out;
    }
    if (dres.status == LpStatus::Infeasible) return std::nullopt;

    const int n = lp.cols();
    out.x = Eigen::VectorXd::Zero(n);
    for (std::size_t r = 0; r < dm->row_col.size(); ++r) out.x(dm->row_col[r]) = -dres.row_duals(r);
    const Eigen::VectorXd activity = lp.A * out.x;
    for (int i = 0; i < lp.rows(); ++i) {
        if (dm->singletons[i].empty()) continue;
        // the cheapest singleton carries the row; the rest stay at zero
        int best = -1;
        double best_ratio = kInf;
        const double need = lp.b(i) - activity(i);
        for (int j : dm->singletons[i]) {
            const double a = lp.A.coeff(i, j);
            const bool helps = (lp.sense[i] == RowSense::Geq && a > 0.0) ||
                               (lp.sense[i] == RowSense::Leq && a < 0.0) ||
                               lp.sense[i] == RowSense::Eq;
            if (helps && std::abs(lp.c(j) / a) < best_ratio) {
                best_ratio = std::abs(lp.c(j) / a);
                best = j;
            }
        }
        if (best < 0) continue;
        out.x(best) = std::max(0.0, need / lp.A.coeff(i, best));
    }
    out.objective = lp.c.dot(out.x);
    out.row_duals = dres.x;
    out.primal_residual = primal_violation(lp, out.x);
    out.status = LpStatus::Optimal;

    const double dual_obj = -dres.objective;
    const double scale = 1.0 + std::abs(out.objective);
    if (!(out.primal_residual <= 1e-8 * (1.0 + lp.b.lpNorm<Eigen::Infinity>())) ||
        !(std::abs(out.objective - dual_obj) <= 1e-8 * scale)) {
        return std::nullopt;
    }
    return out;
}

}  // namespace

std::string_view to_string(LpStatus s) noexcept {
    switch (s) {
        case LpStatus::Optimal: return "Optimal";
        case LpStatus::Infeasible: return "Infeasible";
        case LpStatus::Unbounded: return "Unbounded";
    }
    return "?";
}

double primal_violation(const LinearProgram& lp, const Eigen::VectorXd& x) {
    double v = 0.0;
    const Eigen::VectorXd ax = lp.A * x;
    for (int i = 0; i < lp.rows(); ++i) {
        const double r = ax(i) - lp.b(i);
        switch (lp.sense[i]) {
            case RowSense::Geq: v = std::max(v, -r); break;
            case RowSense::Leq: v = std::max(v, r); break;
            case RowSense::Eq: v = std::max(v, std::abs(r)); break;
        }
    }
    for (int j = 0; j < lp.cols(); ++j) {
        v = std::max({v, lp.lower(j) - x(j), x(j) - lp.upper(j)});
    }
    return v;
}

LpResult revised_simplex(const LinearProgram& lp, const SimplexOptions& opts) {
    const int m = lp.rows(), n = lp.cols();
    if (lp.b.size() != m || static_cast<int>(lp.sense.size()) != m || lp.c.size() != n ||
        lp.lower.size() != n || lp.upper.size() != n) {
        fail(ErrorCode::DimensionMismatch, "linear program dimensions disagree");
    }
    if (!lp.b.allFinite() || !lp.c.allFinite()) fail(ErrorCode::InvalidProblem, "LP data must be finite");

    int n_slack = 0;
    for (auto s : lp.sense) n_slack += s != RowSense::Eq;
    const int ntot = n + n_slack + m;

    Work w;
    w.b = lp.b;
    w.lo.resize(ntot);
    w.up.resize(ntot);
    w.cost = Eigen::VectorXd::Zero(ntot);
    w.x = Eigen::VectorXd::Zero(ntot);
    w.state.assign(ntot, VarState::Lower);
    w.lo.head(n) = lp.lower;
    w.up.head(n) = lp.upper;
    w.lo.tail(n_slack + m).setZero();
    w.up.tail(n_slack + m).setConstant(kInf);

    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(static_cast<std::size_t>(lp.A.nonZeros()) + n_slack + m);
    for (int j = 0; j < lp.A.outerSize(); ++j) {
        for (SpMat::InnerIterator it(lp.A, j); it; ++it) {
            trip.emplace_back(static_cast<int>(it.row()), j, it.value());
        }
    }
    int k = n;
    for (int i = 0; i < m; ++i) {
        if (lp.sense[i] == RowSense::Geq) trip.emplace_back(i, k++, -1.0);
        else if (lp.sense[i] == RowSense::Leq) trip.emplace_back(i, k++, 1.0);
    }

    for (int j = 0; j < n; ++j) {
        if (w.lo(j) > -kInf) {
            w.state[j] = VarState::Lower;
            w.x(j) = w.lo(j);
        } else if (w.up(j) < kInf) {
            w.state[j] = VarState::Upper;
            w.x(j) = w.up(j);
        } else {
            w.state[j] = VarState::Zero;
        }
    }
    Eigen::VectorXd resid = lp.b;
    {
        SpMat partial(m, n + n_slack);
        partial.setFromTriplets(trip.begin(), trip.end());
        resid -= partial * w.x.head(n + n_slack);
    }
    w.basis.resize(m);
    for (int i = 0; i < m; ++i) {
        const int a = n + n_slack + i;
        trip.emplace_back(i, a, resid(i) >= 0.0 ? 1.0 : -1.0);
        w.x(a) = std::abs(resid(i));
        w.state[a] = VarState::Basic;
        w.basis[i] = a;
        w.cost(a) = 1.0;
    }
    w.A.resize(m, ntot);
    w.A.setFromTriplets(trip.begin(), trip.end());
    w.A.makeCompressed();

    LpResult out;
    iterate(w, opts);
    const double infeas = w.x.tail(m).sum();
    if (infeas > opts.feas_tol * (1.0 + lp.b.lpNorm<Eigen::Infinity>())) {
        out.status = LpStatus::Infeasible;
        out.iterations = w.iterations;
        return out;
    }
    for (int i = 0; i < m; ++i) {
        const int a = n + n_slack + i;
        w.up(a) = 0.0;
        w.cost(a) = 0.0;
        if (w.state[a] != VarState::Basic) {
            w.state[a] = VarState::Lower;
            w.x(a) = 0.0;
        }
    }
    w.cost.head(n) = lp.c;
    const bool bounded = iterate(w, opts);
    out.iterations = w.iterations;
    if (!bounded) {
        out.status = LpStatus::Unbounded;
        return out;
    }
    out.status = LpStatus::Optimal;
    out.x = w.x.head(n);
    out.objective = lp.c.dot(out.x);
    out.row_duals = w.y;
    out.primal_residual = primal_violation(lp, out.x);
    return out;
}

LpResult simplex_solve(const LinearProgram& lp, const SimplexOptions& opts) {
    if (opts.allow_dualize) {
        if (auto r = solve_via_dual(lp, opts)) return *r;
    }
    if (lp.rows() > 5000) {
        fail(ErrorCode::NumericalBreakdown,
             "dual route failed and the program is too large for a dense basis");
    }
    return revised_simplex(lp, opts);
}

}  // namespace dsr
