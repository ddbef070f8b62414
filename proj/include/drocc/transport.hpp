#pragma once

#include <cmath>
#include <cstddef>
#include <utility>
#include <vector>

#include "drocc/distribution.hpp"
#include "drocc/lp.hpp"
#include "drocc/support.hpp"

namespace drocc {

namespace detail {

// Minimum of sum_{ij} plan_{ij} cost_{ij} over the transport polytope with
// the given marginals, solved as a dense LP. Variables are the k1*k2 plan
// entries in row-major order.
inline std::pair<double, Matrix> transport_lp(const std::vector<double>& source,
                                              const std::vector<double>& target,
                                              const Matrix& cost) {
    const std::size_t k1 = source.size(), k2 = target.size();
    LpProblem lp;
    lp.objective.resize(k1 * k2);
    for (std::size_t i = 0; i < k1; ++i)
        for (std::size_t j = 0; j < k2; ++j) lp.objective[i * k2 + j] = -cost(i, j);

    lp.eq_matrix = Matrix(k1 + k2, k1 * k2);
    lp.eq_rhs.resize(k1 + k2);
    for (std::size_t i = 0; i < k1; ++i) {
        for (std::size_t j = 0; j < k2; ++j) lp.eq_matrix(i, i * k2 + j) = 1.0;
        lp.eq_rhs[i] = source[i];
    }
    for (std::size_t j = 0; j < k2; ++j) {
        for (std::size_t i = 0; i < k1; ++i) lp.eq_matrix(k1 + j, i * k2 + j) = 1.0;
        lp.eq_rhs[k1 + j] = target[j];
    }

    const LpSolution sol = solve_lp(lp);
    if (sol.status != LpStatus::Optimal)
        throw MalformedProblem("transport_lp: marginals do not balance");

    Matrix plan(k1, k2);
    for (std::size_t i = 0; i < k1; ++i)
        for (std::size_t j = 0; j < k2; ++j) plan(i, j) = sol.point[i * k2 + j];
    return {-sol.value, std::move(plan)};
}

inline Matrix pairwise_cost(const DiscreteDistribution& p, const DiscreteDistribution& q,
                            int order) {
    Matrix c(p.size(), q.size());
    for (std::size_t i = 0; i < p.size(); ++i)
        for (std::size_t j = 0; j < q.size(); ++j) {
            const double d = dist2(p.atoms[i], q.atoms[j]);
            c(i, j) = order == 1 ? d : std::pow(d, order);
        }
    return c;
}

}  // namespace detail

// Kantorovich metric between two discrete distributions (the l1-Wasserstein
// distance), together with an optimal transport plan.
inline std::pair<double, TransportPlan> kantorovich(const DiscreteDistribution& p,
                                                    const DiscreteDistribution& q) {
    p.validate();
    q.validate();
    if (p.dim() != q.dim()) throw DimensionMismatch("kantorovich: dimension mismatch");
    auto [value, plan] = detail::transport_lp(p.weights, q.weights,
                                              detail::pairwise_cost(p, q, 1));
    TransportPlan tp;
    tp.plan = std::move(plan);
    tp.cost = value;
    tp.order = 1;
    return {value, std::move(tp)};
}

// l_n-Wasserstein distance: (min sum plan * ||.||^n)^(1/n).
inline double wasserstein_n(const DiscreteDistribution& p, const DiscreteDistribution& q,
                            int order) {
    if (order < 1) throw Error("wasserstein_n: order must be >= 1");
    p.validate();
    q.validate();
    if (p.dim() != q.dim()) throw DimensionMismatch("wasserstein_n: dimension mismatch");
    const auto [value, plan] =
        detail::transport_lp(p.weights, q.weights, detail::pairwise_cost(p, q, order));
    return order == 1 ? value : std::pow(std::max(value, 0.0), 1.0 / order);
}

enum class ProjectionMode { NearestAtom, ExactLP };

// Projects a distribution onto the atoms of a sample set. NearestAtom moves
// each atom's mass to its closest sample point; ExactLP minimizes the
// Kantorovich distance over all distributions supported on the samples (a
// transport LP with a free target marginal). Either way the distance to the
// input is at most the covering radius of the samples.
inline DiscreteDistribution project_to_support(const DiscreteDistribution& p,
                                               const SampleSet& samples, ProjectionMode mode) {
    p.validate();
    if (samples.points.empty()) throw EmptySampleSet("project_to_support: empty sample set");
    if (samples.dim() != p.dim()) throw DimensionMismatch("project_to_support: dim mismatch");

    const std::size_t k = p.size(), s = samples.size();
    std::vector<double> out(s, 0.0);

    if (mode == ProjectionMode::NearestAtom) {
        for (std::size_t i = 0; i < k; ++i) {
            std::size_t nearest = 0;
            double best = std::numeric_limits<double>::infinity();
            for (std::size_t j = 0; j < s; ++j) {
                const double d = dist2(p.atoms[i], samples.points[j]);
                if (d < best) {
                    best = d;
                    nearest = j;
                }
            }
            out[nearest] += p.weights[i];
        }
    } else {
        // min sum_{ij} pi_{ij} d_{ij}  s.t.  row sums = p weights, pi >= 0;
        // the target marginal is free and read off the optimal plan.
        LpProblem lp;
        lp.objective.resize(k * s);
        for (std::size_t i = 0; i < k; ++i)
            for (std::size_t j = 0; j < s; ++j)
                lp.objective[i * s + j] = -dist2(p.atoms[i], samples.points[j]);
        lp.eq_matrix = Matrix(k, k * s);
        lp.eq_rhs = p.weights;
        for (std::size_t i = 0; i < k; ++i)
            for (std::size_t j = 0; j < s; ++j) lp.eq_matrix(i, i * s + j) = 1.0;
        const LpSolution sol = solve_lp(lp);
        if (sol.status != LpStatus::Optimal)
            throw Error("project_to_support: projection LP failed");
        for (std::size_t i = 0; i < k; ++i)
            for (std::size_t j = 0; j < s; ++j) out[j] += sol.point[i * s + j];
    }

    // Clean the tiny negatives LP arithmetic can leave and renormalize the
    // last ulps so the result validates.
    double total = 0.0;
    for (double& w : out) {
        if (w < 0.0) w = 0.0;
        total += w;
    }
    for (double& w : out) w /= total;
    return on_samples(samples, std::move(out));
}

}  // namespace drocc
