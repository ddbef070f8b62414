#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "drocc/ambiguity.hpp"
#include "drocc/lp.hpp"
#include "drocc/rng.hpp"

namespace drocc {

// d(q, set) = min over members p of the Kantorovich distance rho(q, p),
// solved as one LP over the transport plan, the free marginal p, and the
// set's auxiliary variables. Zero (within tolerance) exactly when q belongs
// to the set. Linear sets only.
inline double distance_to_set(const DiscreteDistribution& q, const DiscretizedAmbiguitySet& set) {
    if (!set.is_linear) throw NonLinearSet("distance_to_set: set is not linear in p");
    q.validate();
    if (q.dim() != set.samples.dim())
        throw DimensionMismatch("distance_to_set: dimension mismatch");

    const std::size_t kq = q.size();
    const std::size_t k = set.num_p;
    const std::size_t nplan = kq * k;
    const std::size_t nset = set.num_vars();
    const std::size_t nvars = nplan + nset;
    const auto plan_var = [&](std::size_t i, std::size_t j) { return i * k + j; };

    LpProblem lp;
    lp.objective.assign(nvars, 0.0);
    for (std::size_t i = 0; i < kq; ++i)
        for (std::size_t j = 0; j < k; ++j)
            lp.objective[plan_var(i, j)] = -dist2(q.atoms[i], set.samples.points[j]);

    const std::size_t meq = set.eq_matrix.rows();
    lp.eq_matrix = Matrix(kq + k + meq, nvars);
    lp.eq_rhs.assign(kq + k + meq, 0.0);
    for (std::size_t i = 0; i < kq; ++i) {
        for (std::size_t j = 0; j < k; ++j) lp.eq_matrix(i, plan_var(i, j)) = 1.0;
        lp.eq_rhs[i] = q.weights[i];
    }
    for (std::size_t j = 0; j < k; ++j) {
        for (std::size_t i = 0; i < kq; ++i) lp.eq_matrix(kq + j, plan_var(i, j)) = 1.0;
        lp.eq_matrix(kq + j, nplan + j) = -1.0;
    }
    for (std::size_t r = 0; r < meq; ++r) {
        for (std::size_t c = 0; c < nset; ++c) lp.eq_matrix(kq + k + r, nplan + c) = set.eq_matrix(r, c);
        lp.eq_rhs[kq + k + r] = set.eq_rhs[r];
    }

    const std::size_t mub = set.ub_matrix.rows();
    lp.ub_matrix = Matrix(mub, nvars);
    lp.ub_rhs = set.ub_rhs;
    for (std::size_t r = 0; r < mub; ++r)
        for (std::size_t c = 0; c < nset; ++c) lp.ub_matrix(r, nplan + c) = set.ub_matrix(r, c);

    const LpSolution sol = solve_lp(lp);
    if (sol.status == LpStatus::Infeasible)
        throw InfeasibleSet("distance_to_set: the discretized set is empty");
    if (sol.status != LpStatus::Optimal) throw Error("distance_to_set: LP not optimal");
    return std::max(0.0, -sol.value);
}

// All vertices of the set's feasible polytope, as probability vectors on
// the sample atoms (auxiliary coordinates are projected away). Brute-force
// basis enumeration; intended for small validation instances only.
inline std::vector<std::vector<double>> enumerate_vertices(const DiscretizedAmbiguitySet& set,
                                                           std::size_t max_systems = 2000000) {
    if (!set.is_linear) throw NonLinearSet("enumerate_vertices: set is not linear in p");
    const std::size_t nv = set.num_vars();

    const auto eq_keep = independent_rows(set.eq_matrix);
    const std::size_t meq = eq_keep.size();
    if (meq > nv) return {};
    const std::size_t need = nv - meq;

    // Candidate active rows: ub rows then the nonnegativity bounds.
    const std::size_t mub = set.ub_matrix.rows();
    const std::size_t ncand = mub + nv;

    // Count combinations, bail out if the instance is too large.
    double combos = 1.0;
    for (std::size_t i = 0; i < need; ++i)
        combos *= static_cast<double>(ncand - i) / static_cast<double>(i + 1);
    if (combos > static_cast<double>(max_systems))
        throw Error("enumerate_vertices: instance too large for exhaustive enumeration");

    std::vector<std::vector<double>> vertices;
    const auto feasible = [&](const std::vector<double>& z) {
        for (std::size_t r = 0; r < set.eq_matrix.rows(); ++r)
            if (std::abs(dot(set.eq_matrix.row(r), z) - set.eq_rhs[r]) > 1e-7) return false;
        for (std::size_t r = 0; r < mub; ++r)
            if (dot(set.ub_matrix.row(r), z) > set.ub_rhs[r] + 1e-9) return false;
        for (double v : z)
            if (v < -1e-9) return false;
        return true;
    };
    const auto push_unique = [&](std::vector<double> p) {
        for (const auto& v : vertices) {
            double diff = 0.0;
            for (std::size_t i = 0; i < p.size(); ++i) diff = std::max(diff, std::abs(v[i] - p[i]));
            if (diff < 1e-9) return;
        }
        vertices.push_back(std::move(p));
    };

    std::vector<std::size_t> comb(need);
    for (std::size_t i = 0; i < need; ++i) comb[i] = i;
    if (need == 0) {
        Matrix a(meq, nv);
        std::vector<double> b(meq);
        for (std::size_t r = 0; r < meq; ++r) {
            for (std::size_t c = 0; c < nv; ++c) a(r, c) = set.eq_matrix(eq_keep[r], c);
            b[r] = set.eq_rhs[eq_keep[r]];
        }
        std::vector<double> z;
        if (meq == nv && solve_linear(a, b, z) && feasible(z))
            push_unique({z.begin(), z.begin() + set.num_p});
        return vertices;
    }
    if (ncand < need) return vertices;

    for (;;) {
        Matrix a(nv, nv);
        std::vector<double> b(nv);
        for (std::size_t r = 0; r < meq; ++r) {
            for (std::size_t c = 0; c < nv; ++c) a(r, c) = set.eq_matrix(eq_keep[r], c);
            b[r] = set.eq_rhs[eq_keep[r]];
        }
        for (std::size_t s = 0; s < need; ++s) {
            const std::size_t idx = comb[s];
            if (idx < mub) {
                for (std::size_t c = 0; c < nv; ++c) a(meq + s, c) = set.ub_matrix(idx, c);
                b[meq + s] = set.ub_rhs[idx];
            } else {
                for (std::size_t c = 0; c < nv; ++c) a(meq + s, c) = 0.0;
                a(meq + s, idx - mub) = 1.0;
                b[meq + s] = 0.0;
            }
        }
        std::vector<double> z;
        if (solve_linear(a, b, z) && feasible(z))
            push_unique({z.begin(), z.begin() + set.num_p});

        std::size_t k = need;
        bool done = true;
        while (k-- > 0) {
            if (comb[k] + (need - k) < ncand) {
                ++comb[k];
                for (std::size_t j = k + 1; j < need; ++j) comb[j] = comb[j - 1] + 1;
                done = false;
                break;
            }
        }
        if (done) break;
    }
    return vertices;
}

namespace detail {

// Exposed points of the set's p-projection: maximizers of random linear
// objectives over the feasible polytope (directions == 0 enumerates every
// vertex instead).
inline std::vector<std::vector<double>> exposed_points(const DiscretizedAmbiguitySet& set,
                                                       std::size_t directions,
                                                       std::uint64_t seed) {
    if (directions == 0) return enumerate_vertices(set);

    LpProblem lp;
    lp.objective.assign(set.num_vars(), 0.0);
    lp.eq_matrix = set.eq_matrix;
    lp.eq_rhs = set.eq_rhs;
    lp.ub_matrix = set.ub_matrix;
    lp.ub_rhs = set.ub_rhs;

    std::vector<std::vector<double>> points;
    Rng rng(seed);
    for (std::size_t t = 0; t < directions; ++t) {
        for (std::size_t i = 0; i < set.num_p; ++i) lp.objective[i] = rng.uniform(-1.0, 1.0);
        const LpSolution sol = solve_lp(lp);
        if (sol.status == LpStatus::Infeasible)
            throw InfeasibleSet("hausdorff_estimate: a set is empty");
        if (sol.status != LpStatus::Optimal) throw Error("hausdorff_estimate: LP not optimal");
        std::vector<double> p(sol.point.begin(), sol.point.begin() + set.num_p);
        bool fresh = true;
        for (const auto& v : points) {
            double diff = 0.0;
            for (std::size_t i = 0; i < p.size(); ++i) diff = std::max(diff, std::abs(v[i] - p[i]));
            if (diff < 1e-10) {
                fresh = false;
                break;
            }
        }
        if (fresh) points.push_back(std::move(p));
    }
    return points;
}

inline double directed_sup(const DiscretizedAmbiguitySet& from, const DiscretizedAmbiguitySet& to,
                           std::size_t directions, std::uint64_t seed) {
    double sup = 0.0;
    for (const auto& p : exposed_points(from, directions, seed)) {
        std::vector<double> w = p;
        for (double& v : w) v = std::max(v, 0.0);
        double total = 0.0;
        for (double v : w) total += v;
        for (double& v : w) v /= total;
        sup = std::max(sup, distance_to_set(on_samples(from.samples, w), to));
    }
    return sup;
}

}  // namespace detail

// Estimate of the Hausdorff distance between two linear discretized sets.
// Each directed sup is evaluated at the vertices exposed by `directions`
// random objectives (one LP each), which makes the result a lower bound of
// the true Hausdorff distance; with directions == 0 the vertex enumeration
// is exhaustive and the value is exact.
inline double hausdorff_estimate(const DiscretizedAmbiguitySet& set_a,
                                 const DiscretizedAmbiguitySet& set_b,
                                 std::size_t directions = 64, std::uint64_t seed = 0) {
    const double ab = detail::directed_sup(set_a, set_b, directions, derive_seed(seed, 1));
    const double ba = detail::directed_sup(set_b, set_a, directions, derive_seed(seed, 2));
    return std::max(ab, ba);
}

}  // namespace drocc
