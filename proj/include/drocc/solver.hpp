#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

#include "drocc/ambiguity.hpp"
#include "drocc/lp.hpp"
#include "drocc/problem.hpp"

namespace drocc {

enum class InnerStatus { Optimal, Infeasible, LocalOptimal };

// Solution of the inner worst-case problem at a fixed decision x: the
// attained expectation q(x), the maximizing distribution, and the chance
// probability it assigns.
struct InnerSolution {
    double value = 0.0;
    DiscreteDistribution worst_case;
    double chance_prob = 0.0;
    InnerStatus status = InnerStatus::Infeasible;
};

namespace detail {

inline std::vector<double> objective_values(const ProblemInstance& instance,
                                            std::span<const double> x, const SampleSet& samples) {
    std::vector<double> f(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) {
        f[i] = instance.objective(x, samples.points[i]);
        if (!std::isfinite(f[i])) throw EvaluationError("inner_worst_case: non-finite F");
    }
    return f;
}

// Base LP shared by the inner solvers: the set's linear system plus the
// chance row sum_{feasible atoms} p >= 1 - theta.
inline LpProblem inner_lp_base(const DiscretizedAmbiguitySet& set, const FeasibilityMask& mask,
                               double theta) {
    LpProblem lp;
    lp.objective.assign(set.num_vars(), 0.0);
    lp.eq_matrix = set.eq_matrix;
    lp.eq_rhs = set.eq_rhs;
    lp.ub_matrix = set.ub_matrix;
    lp.ub_rhs = set.ub_rhs;
    std::vector<double> chance(set.num_vars(), 0.0);
    for (std::size_t i = 0; i < set.num_p; ++i)
        if (mask.bits[i]) chance[i] = -1.0;
    lp.ub_matrix.append_row(chance);
    lp.ub_rhs.push_back(-(1.0 - theta));
    return lp;
}

inline std::vector<double> clean_probability(std::vector<double> p) {
    double total = 0.0;
    for (double& w : p) {
        if (w < 0.0) w = 0.0;
        total += w;
    }
    for (double& w : p) w /= total;
    return p;
}

inline InnerSolution package_solution(const DiscretizedAmbiguitySet& set,
                                      const FeasibilityMask& mask,
                                      const std::vector<double>& f, std::vector<double> p,
                                      InnerStatus status) {
    InnerSolution out;
    out.status = status;
    out.worst_case = on_samples(set.samples, clean_probability(std::move(p)));
    out.value = dot(f, out.worst_case.weights);
    out.chance_prob = chance_probability(mask, out.worst_case.weights);
    return out;
}

}  // namespace detail

InnerSolution inner_worst_case_meanvar(const ProblemInstance& instance, std::span<const double> x,
                                       const DiscretizedAmbiguitySet& set, int max_iter = 50,
                                       double tol = 1e-8);

// Worst-case expectation of F(x, .) over the discretized ambiguity set
// subject to the chance constraint. Linear modes are one exact LP; the
// mean-variance mode goes through successive linearization.
inline InnerSolution inner_worst_case(const ProblemInstance& instance, std::span<const double> x,
                                      const DiscretizedAmbiguitySet& set) {
    if (!set.is_linear) return inner_worst_case_meanvar(instance, x, set);

    const auto mask = feasible_mask(instance, x, set.samples);
    if (mask.count() == 0 && instance.theta < 1.0) return {};  // Infeasible

    const auto f = detail::objective_values(instance, x, set.samples);
    LpProblem lp = detail::inner_lp_base(set, mask, instance.theta);
    for (std::size_t i = 0; i < set.num_p; ++i) lp.objective[i] = f[i];

    const LpSolution sol = solve_lp(lp);
    if (sol.status == LpStatus::Infeasible) return {};
    if (sol.status != LpStatus::Optimal) throw Error("inner_worst_case: LP not optimal");

    std::vector<double> p(sol.point.begin(), sol.point.begin() + set.num_p);
    return detail::package_solution(set, mask, f, std::move(p), InnerStatus::Optimal);
}

// Successive linearization for the mean-variance set. The covariance cap is
// enforced along a set of directions (the eigenvectors of Sigma0, augmented
// with violated directions as they appear); the concave mean term is
// replaced by its first-order expansion at the current iterate, which keeps
// every LP iterate inside the true feasible set along those directions.
inline InnerSolution inner_worst_case_meanvar(const ProblemInstance& instance,
                                              std::span<const double> x,
                                              const DiscretizedAmbiguitySet& set, int max_iter,
                                              double tol) {
    const auto* mv = std::get_if<MeanVariance>(&set.spec.payload);
    if (mv == nullptr) throw Error("inner_worst_case_meanvar: not a mean-variance set");

    const auto mask = feasible_mask(instance, x, set.samples);
    if (mask.count() == 0 && instance.theta < 1.0) return {};

    const auto f = detail::objective_values(instance, x, set.samples);
    const std::size_t k = set.num_p;
    const std::size_t d = set.samples.dim();
    const LpProblem base = [&] {
        LpProblem lp = detail::inner_lp_base(set, mask, instance.theta);
        for (std::size_t i = 0; i < k; ++i) lp.objective[i] = f[i];
        return lp;
    }();

    // Directions along which the covariance cap is linearized.
    const SymEig eig = jacobi_eigen(mv->sigma0);
    std::vector<std::vector<double>> directions;
    std::vector<double> caps;  // gamma_s u' Sigma0 u per direction
    for (std::size_t j = 0; j < d; ++j) {
        std::vector<double> u(d);
        for (std::size_t i = 0; i < d; ++i) u[i] = eig.vectors(i, j);
        directions.push_back(std::move(u));
        caps.push_back(mv->gamma_s * eig.values[j]);
    }

    const auto projected = [&](const std::vector<double>& u) {
        std::vector<double> s(k);
        for (std::size_t i = 0; i < k; ++i) s[i] = dot(u, set.samples.points[i]);
        return s;
    };

    // One DC pass from a given start; empty result when some LP turned out
    // infeasible along the way.
    const auto run_from = [&](std::vector<double> p) -> std::optional<std::vector<double>> {
        double prev = -std::numeric_limits<double>::infinity();
        for (int iter = 0; iter < max_iter; ++iter) {
            LpProblem lp = base;
            for (std::size_t dir = 0; dir < directions.size(); ++dir) {
                const auto s = projected(directions[dir]);
                const double m_t = dot(s, p);
                std::vector<double> row(set.num_vars(), 0.0);
                for (std::size_t i = 0; i < k; ++i) row[i] = s[i] * s[i] - 2.0 * m_t * s[i];
                lp.ub_matrix.append_row(row);
                lp.ub_rhs.push_back(caps[dir] - m_t * m_t);
            }
            const LpSolution sol = solve_lp(lp);
            if (sol.status != LpStatus::Optimal) return std::nullopt;
            p.assign(sol.point.begin(), sol.point.begin() + k);
            if (std::abs(sol.value - prev) < tol) break;
            prev = sol.value;
        }
        return p;
    };

    // Starts: the solution of the linear relaxation, then a repaired uniform
    // vector (any point satisfying the linear rows).
    std::vector<std::vector<double>> starts;
    {
        const LpSolution relaxed = solve_lp(base);
        if (relaxed.status == LpStatus::Infeasible) return {};
        if (relaxed.status != LpStatus::Optimal)
            throw Error("inner_worst_case_meanvar: relaxation not optimal");
        std::vector<double> p(relaxed.point.begin(), relaxed.point.begin() + k);
        // If the relaxation already satisfies the covariance cap it is the
        // exact optimum.
        if (membership(set, detail::clean_probability(p)).member)
            return detail::package_solution(set, mask, f, std::move(p),
                                            InnerStatus::LocalOptimal);
        starts.push_back(std::move(p));
    }
    {
        LpProblem repair = base;
        for (std::size_t i = 0; i < k; ++i) repair.objective[i] = 0.0;
        const LpSolution any = solve_lp(repair);
        if (any.status == LpStatus::Optimal)
            starts.emplace_back(any.point.begin(), any.point.begin() + k);
    }

    std::optional<std::vector<double>> best;
    double best_value = -std::numeric_limits<double>::infinity();
    for (auto& start : starts) {
        auto p = start;
        // Up to a handful of direction augmentations per start.
        for (int round = 0; round < 8; ++round) {
            const auto refined = run_from(p);
            if (!refined.has_value()) break;
            p = detail::clean_probability(*refined);
            const auto m = membership(set, p);
            if (m.member) {
                const double value = dot(f, p);
                if (value > best_value) {
                    best_value = value;
                    best = p;
                }
                break;
            }
            // Add the most violated covariance direction and iterate again.
            Matrix slack = detail::weighted_covariance(set.samples, p);
            for (std::size_t a = 0; a < d; ++a)
                for (std::size_t b = 0; b < d; ++b)
                    slack(a, b) = mv->gamma_s * mv->sigma0(a, b) - slack(a, b);
            const SymEig se = jacobi_eigen(slack);
            std::vector<double> u(d);
            for (std::size_t i = 0; i < d; ++i) u[i] = se.vectors(i, 0);
            double cap = 0.0;
            for (std::size_t a = 0; a < d; ++a)
                for (std::size_t b = 0; b < d; ++b)
                    cap += u[a] * mv->sigma0(a, b) * u[b];
            directions.push_back(u);
            caps.push_back(mv->gamma_s * cap);
        }
    }

    if (!best.has_value())
        throw NoFeasibleStart("inner_worst_case_meanvar: no feasible iterate found");
    return detail::package_solution(set, mask, f, std::move(*best), InnerStatus::LocalOptimal);
}

struct SolveOptions {
    // Covering radius of the sample set; computed from the instance support
    // when absent and a gap diagnostic is requested.
    std::optional<double> beta;
    // Slater margin for moment-box C^H; ignored by the other modes.
    std::optional<double> alpha;
    bool compute_gap = true;
    std::size_t grid_per_dim = 401;
};

struct SolveReport {
    double v_hat = 0.0;
    std::vector<double> x_hat;
    std::size_t x_index = 0;
    InnerSolution inner;
    std::size_t evaluated_candidates = 0;
    std::size_t infeasible_candidates = 0;
    std::optional<double> theoretical_gap;
};

// Worst-case optimal-value bound kappa_F C^H beta + kappa_theta
// sqrt(2 kappa_G C_P C^H beta).
inline double theoretical_gap_bound(const ProblemInstance& instance, const AmbiguitySpec& spec,
                                    const SupportBox& support, double beta,
                                    std::optional<double> alpha = std::nullopt) {
    const auto& l = instance.lipschitz;
    if (!l.kappa_f || !l.kappa_g || !l.kappa_theta || !l.c_p)
        throw MissingConstant("theoretical_gap_bound: lipschitz metadata incomplete");
    double ch;
    try {
        ch = theoretical_CH(spec, support, alpha);
    } catch (const NonPositiveAlpha&) {
        throw MissingConstant("theoretical_gap_bound: no usable slater margin");
    }
    return *l.kappa_f * ch * beta +
           *l.kappa_theta * std::sqrt(2.0 * *l.kappa_g * *l.c_p * ch * beta);
}

// Minimizes the inner worst-case value over the decision domain by
// exhaustive enumeration. Candidates whose inner problem is infeasible are
// excluded; ties in the outer argmin go to the first candidate in
// enumeration order.
inline SolveReport solve_sampled_model(const ProblemInstance& instance, const AmbiguitySpec& spec,
                                       const SampleSet& samples,
                                       const SolveOptions& options = {}) {
    const auto candidates = enumerate_candidates(instance.domain);
    if (candidates.empty()) throw Error("solve_sampled_model: empty decision domain");
    const auto set = build_discretized(spec, samples, &instance.support);

    SolveReport report;
    bool found = false;
    for (std::size_t idx = 0; idx < candidates.size(); ++idx) {
        const InnerSolution inner = inner_worst_case(instance, candidates[idx], set);
        ++report.evaluated_candidates;
        if (inner.status == InnerStatus::Infeasible) {
            ++report.infeasible_candidates;
            continue;
        }
        if (!found || inner.value < report.v_hat - 1e-15) {
            found = true;
            report.v_hat = inner.value;
            report.x_hat = candidates[idx];
            report.x_index = idx;
            report.inner = inner;
        }
    }
    if (!found) throw AllCandidatesInfeasible("solve_sampled_model: no feasible candidate");

    if (options.compute_gap) {
        try {
            const double beta = options.beta.has_value()
                                    ? *options.beta
                                    : covering_radius(instance.support, samples,
                                                      options.grid_per_dim);
            report.theoretical_gap =
                theoretical_gap_bound(instance, spec, instance.support, beta, options.alpha);
        } catch (const MissingConstant&) {
            report.theoretical_gap.reset();
        }
    }
    return report;
}

// Stand-in for the true optimal value: the sampled model solved on a fine
// greedy-quantizer discretization (lower covering radius than i.i.d.
// sampling at equal count).
inline double reference_value(const ProblemInstance& instance, const AmbiguitySpec& spec,
                              std::size_t fine_count, std::uint64_t seed) {
    if (fine_count < 1024) throw Error("reference_value: fine_count must be at least 1024");
    const auto fine = quantize_greedy(instance.support, fine_count, 4 * fine_count, seed);
    SolveOptions options;
    options.compute_gap = false;
    return solve_sampled_model(instance, spec, fine, options).v_hat;
}

}  // namespace drocc
