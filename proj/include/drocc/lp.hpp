#pragma once

#include <cstddef>
#include <limits>
#include <span>
#include <vector>

#include "drocc/common.hpp"

namespace drocc {

enum class LpStatus { Optimal, Infeasible, Unbounded };

// Dense LP in the form
//   maximize   objective . x
//   subject to eq_matrix x  = eq_rhs
//              ub_matrix x <= ub_rhs
//              x >= lower_bounds   (all zeros when empty)
struct LpProblem {
    std::vector<double> objective;
    Matrix eq_matrix;
    std::vector<double> eq_rhs;
    Matrix ub_matrix;
    std::vector<double> ub_rhs;
    std::vector<double> lower_bounds;
};

struct LpSolution {
    LpStatus status = LpStatus::Infeasible;
    double value = 0.0;
    std::vector<double> point;
    int iterations = 0;
};

namespace detail {

// Two-phase tableau simplex with Bland's anti-cycling rule. Entering
// variable: lowest index with positive reduced cost; leaving: among the
// minimum-ratio rows, the one whose basic variable has the lowest index.
class SimplexTableau {
  public:
    static constexpr double kTol = 1e-9;

    SimplexTableau(std::size_t rows, std::size_t cols)
        : m_(rows), n_(cols), t_((rows + 1) * (cols + 1), 0.0), basis_(rows, SIZE_MAX),
          active_(rows, true) {}

    double& at(std::size_t i, std::size_t j) { return t_[i * (n_ + 1) + j]; }
    double at(std::size_t i, std::size_t j) const { return t_[i * (n_ + 1) + j]; }
    double& rhs(std::size_t i) { return t_[i * (n_ + 1) + n_]; }
    double rhs(std::size_t i) const { return t_[i * (n_ + 1) + n_]; }
    double& cost(std::size_t j) { return t_[m_ * (n_ + 1) + j]; }
    double cost(std::size_t j) const { return t_[m_ * (n_ + 1) + j]; }
    double objective_value() const { return -t_[m_ * (n_ + 1) + n_]; }

    std::size_t rows() const { return m_; }
    std::size_t cols() const { return n_; }
    std::vector<std::size_t>& basis() { return basis_; }
    void deactivate_row(std::size_t i) { active_[i] = false; }
    bool row_active(std::size_t i) const { return active_[i]; }

    // Eliminates all basic columns from the cost row, establishing
    // cost(j) = reduced cost and objective_value() = current value.
    void canonicalize_cost_row() {
        for (std::size_t i = 0; i < m_; ++i) {
            if (!active_[i]) continue;
            const double f = cost(basis_[i]);
            if (f == 0.0) continue;
            double* crow = &t_[m_ * (n_ + 1)];
            const double* prow = &t_[i * (n_ + 1)];
            for (std::size_t j = 0; j <= n_; ++j) crow[j] -= f * prow[j];
        }
    }

    void pivot(std::size_t prow, std::size_t pcol) {
        const double piv = at(prow, pcol);
        double* pr = &t_[prow * (n_ + 1)];
        for (std::size_t j = 0; j <= n_; ++j) pr[j] /= piv;
        pr[pcol] = 1.0;
        for (std::size_t i = 0; i <= m_; ++i) {
            if (i == prow) continue;
            const double f = at(i, pcol);
            if (f == 0.0) continue;
            double* ri = &t_[i * (n_ + 1)];
            for (std::size_t j = 0; j <= n_; ++j) ri[j] -= f * pr[j];
            ri[pcol] = 0.0;
        }
        basis_[prow] = pcol;
    }

    // Runs simplex iterations until optimality or unboundedness. Columns with
    // index >= allowed_cols never enter the basis (used to pin artificials in
    // phase 2). Returns false on unboundedness.
    bool iterate(std::size_t allowed_cols, int& iterations, int max_iterations = 1000000) {
        for (;;) {
            std::size_t enter = SIZE_MAX;
            for (std::size_t j = 0; j < allowed_cols; ++j) {
                if (cost(j) > kTol) {
                    enter = j;
                    break;
                }
            }
            if (enter == SIZE_MAX) return true;

            std::size_t leave = SIZE_MAX;
            double best_ratio = std::numeric_limits<double>::infinity();
            for (std::size_t i = 0; i < m_; ++i) {
                if (!active_[i]) continue;
                const double a = at(i, enter);
                if (a <= kTol) continue;
                const double ratio = rhs(i) / a;
                if (ratio < best_ratio - kTol ||
                    (ratio < best_ratio + kTol &&
                     (leave == SIZE_MAX || basis_[i] < basis_[leave]))) {
                    if (ratio < best_ratio) best_ratio = ratio;
                    leave = i;
                }
            }
            if (leave == SIZE_MAX) return false;

            pivot(leave, enter);
            if (++iterations > max_iterations)
                throw Error("simplex: iteration limit exceeded");
        }
    }

  private:
    std::size_t m_, n_;
    std::vector<double> t_;
    std::vector<std::size_t> basis_;
    std::vector<bool> active_;
};

}  // namespace detail

// Solves the LP with a deterministic two-phase dense simplex. Feasibility
// and optimality tolerances are 1e-9. Identical problems produce identical
// solutions bit for bit.
inline LpSolution solve_lp(const LpProblem& prob) {
    const std::size_t n = prob.objective.size();
    if (n == 0) throw MalformedProblem("solve_lp: empty objective");
    const std::size_t meq = prob.eq_matrix.rows();
    const std::size_t mub = prob.ub_matrix.rows();
    if (meq > 0 && prob.eq_matrix.cols() != n)
        throw MalformedProblem("solve_lp: eq matrix width mismatch");
    if (mub > 0 && prob.ub_matrix.cols() != n)
        throw MalformedProblem("solve_lp: ub matrix width mismatch");
    if (prob.eq_rhs.size() != meq) throw MalformedProblem("solve_lp: eq rhs length mismatch");
    if (prob.ub_rhs.size() != mub) throw MalformedProblem("solve_lp: ub rhs length mismatch");
    if (!prob.lower_bounds.empty() && prob.lower_bounds.size() != n)
        throw MalformedProblem("solve_lp: lower bound length mismatch");
    if (!all_finite(prob.objective) || !all_finite(prob.eq_rhs) || !all_finite(prob.ub_rhs) ||
        !all_finite(prob.eq_matrix.data()) || !all_finite(prob.ub_matrix.data()) ||
        !all_finite(prob.lower_bounds))
        throw MalformedProblem("solve_lp: non-finite entry");

    std::vector<double> lower(n, 0.0);
    if (!prob.lower_bounds.empty()) lower = prob.lower_bounds;

    // Shift x = lower + y with y >= 0.
    const std::size_t m = meq + mub;
    std::vector<double> rhs(m, 0.0);
    for (std::size_t i = 0; i < meq; ++i)
        rhs[i] = prob.eq_rhs[i] - dot(prob.eq_matrix.row(i), lower);
    for (std::size_t i = 0; i < mub; ++i)
        rhs[meq + i] = prob.ub_rhs[i] - dot(prob.ub_matrix.row(i), lower);

    // Columns: n structural, mub slacks, then one artificial per row that
    // needs one. Rows are sign-normalized so every rhs is nonnegative.
    std::vector<int> sign(m, 1);
    for (std::size_t i = 0; i < m; ++i)
        if (rhs[i] < 0) sign[i] = -1;

    std::vector<std::size_t> artificial_of_row(m, SIZE_MAX);
    std::size_t n_art = 0;
    for (std::size_t i = 0; i < m; ++i) {
        const bool slack_basic = (i >= meq) && sign[i] == 1;
        if (!slack_basic) artificial_of_row[i] = n_art++;
    }

    const std::size_t total = n + mub + n_art;
    detail::SimplexTableau tab(m, total);

    for (std::size_t i = 0; i < m; ++i) {
        std::span<const double> arow =
            (i < meq) ? prob.eq_matrix.row(i) : prob.ub_matrix.row(i - meq);
        for (std::size_t j = 0; j < n; ++j) tab.at(i, j) = sign[i] * arow[j];
        if (i >= meq) tab.at(i, n + (i - meq)) = sign[i] * 1.0;
        tab.rhs(i) = sign[i] * rhs[i];
        if (artificial_of_row[i] != SIZE_MAX) {
            tab.at(i, n + mub + artificial_of_row[i]) = 1.0;
            tab.basis()[i] = n + mub + artificial_of_row[i];
        } else {
            tab.basis()[i] = n + (i - meq);
        }
    }

    int iterations = 0;

    if (n_art > 0) {
        for (std::size_t k = 0; k < n_art; ++k) tab.cost(n + mub + k) = -1.0;
        tab.canonicalize_cost_row();
        if (!tab.iterate(total, iterations))
            throw Error("simplex: phase 1 unbounded");  // cannot happen: objective <= 0
        if (tab.objective_value() < -detail::SimplexTableau::kTol)
            return {LpStatus::Infeasible, 0.0, {}, iterations};

        // Drive leftover artificials out of the basis; a row with no other
        // nonzero entry is redundant and is dropped.
        for (std::size_t i = 0; i < m; ++i) {
            if (tab.basis()[i] < n + mub) continue;
            std::size_t pcol = SIZE_MAX;
            for (std::size_t j = 0; j < n + mub; ++j) {
                if (std::abs(tab.at(i, j)) > 1e-7) {
                    pcol = j;
                    break;
                }
            }
            if (pcol == SIZE_MAX) {
                tab.deactivate_row(i);
            } else {
                tab.pivot(i, pcol);
                ++iterations;
            }
        }
    }

    // Phase 2: real objective over structural columns.
    for (std::size_t j = 0; j < tab.cols(); ++j) tab.cost(j) = 0.0;
    tab.cost(tab.cols()) = 0.0;  // value cell
    for (std::size_t j = 0; j < n; ++j) tab.cost(j) = prob.objective[j];
    tab.canonicalize_cost_row();
    if (!tab.iterate(n + mub, iterations))
        return {LpStatus::Unbounded, 0.0, {}, iterations};

    std::vector<double> point = lower;
    for (std::size_t i = 0; i < m; ++i) {
        if (!tab.row_active(i)) continue;
        const std::size_t b = tab.basis()[i];
        if (b < n) point[b] += tab.rhs(i);
    }
    LpSolution sol;
    sol.status = LpStatus::Optimal;
    sol.point = std::move(point);
    sol.value = dot(prob.objective, sol.point);
    sol.iterations = iterations;
    return sol;
}

}  // namespace drocc
