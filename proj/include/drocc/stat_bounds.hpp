#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <vector>

#include "drocc/solver.hpp"

namespace drocc {

namespace detail {

// Student-t density with nu degrees of freedom, normalized via lgamma.
inline double t_density(double x, double nu) {
    const double log_c = std::lgamma(0.5 * (nu + 1.0)) - std::lgamma(0.5 * nu) -
                         0.5 * std::log(nu * 3.14159265358979323846);
    return std::exp(log_c - 0.5 * (nu + 1.0) * std::log1p(x * x / nu));
}

inline double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                               double fa, double fm, double fb, double whole, double tol,
                               int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = f(lm), frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    if (depth <= 0 || std::abs(left + right - whole) < 15.0 * tol)
        return left + right + (left + right - whole) / 15.0;
    return adaptive_simpson(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
           adaptive_simpson(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

inline double integrate(const std::function<double(double)>& f, double a, double b, double tol) {
    const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return adaptive_simpson(f, a, b, fa, fm, fb, whole, tol, 48);
}

}  // namespace detail

// Upper-tail alpha critical value of the t distribution with nu degrees of
// freedom: bisection on the CDF, itself evaluated by adaptive Simpson
// quadrature of the density. Absolute accuracy about 1e-6.
inline double t_critical(double alpha, int nu) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw InvalidAlpha("t_critical: alpha outside (0, 1)");
    if (nu < 1) throw Error("t_critical: nu must be positive");
    if (alpha > 0.5) return -t_critical(1.0 - alpha, nu);

    const double dof = static_cast<double>(nu);
    const auto density = [dof](double x) { return detail::t_density(x, dof); };
    const double target = 0.5 - alpha;  // integral of the density over [0, t]

    double lo = 0.0, hi = 200.0;
    for (int iter = 0; iter < 80 && hi - lo > 1e-8; ++iter) {
        const double mid = 0.5 * (lo + hi);
        const double mass = detail::integrate(density, 0.0, mid, 1e-10);
        (mass < target ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

enum class BoundSide { Upper, Lower };

// One-sided confidence bound from replicated batches: bound = mean +- t
// sigma_hat with sigma_hat^2 = sum (v_m - mean)^2 / (M (M - 1)).
struct BoundEstimate {
    std::vector<double> replicate_values;
    double mean = 0.0;
    double sigma_hat = 0.0;
    double t_value = 0.0;
    double bound = 0.0;
    BoundSide side = BoundSide::Upper;
    double alpha = 0.0;
    std::size_t omega_size = 0;
    std::size_t skipped_replicates = 0;
};

namespace detail {

inline BoundEstimate finalize_bound(std::vector<double> values, BoundSide side, double alpha,
                                    std::size_t omega_size, std::size_t skipped) {
    if (values.size() < 2)
        throw TooFewFeasibleReplicates("stat_bounds: fewer than 2 feasible replicates");
    BoundEstimate est;
    est.replicate_values = std::move(values);
    est.side = side;
    est.alpha = alpha;
    est.omega_size = omega_size;
    est.skipped_replicates = skipped;

    const auto m = static_cast<double>(est.replicate_values.size());
    for (double v : est.replicate_values) est.mean += v;
    est.mean /= m;
    double ss = 0.0;
    for (double v : est.replicate_values) ss += (v - est.mean) * (v - est.mean);
    est.sigma_hat = std::sqrt(ss / (m * (m - 1.0)));
    est.t_value = t_critical(alpha, static_cast<int>(est.replicate_values.size()) - 1);
    est.bound = side == BoundSide::Upper ? est.mean + est.t_value * est.sigma_hat
                                         : est.mean - est.t_value * est.sigma_hat;
    return est;
}

}  // namespace detail

// Upper confidence bound for the expected inner value at a fixed feasible
// decision x_bar: the inner problem is solved on M independently sampled
// batches of size omega_size. Batches whose inner problem is infeasible at
// x_bar are skipped and counted.
inline BoundEstimate upper_bound(const ProblemInstance& instance, const AmbiguitySpec& spec,
                                 std::span<const double> x_bar, std::size_t omega_size,
                                 std::size_t replicates, double alpha, std::uint64_t master_seed) {
    if (replicates < 2) throw Error("upper_bound: need at least 2 replicates");
    std::vector<double> values;
    std::size_t skipped = 0;
    for (std::size_t m = 0; m < replicates; ++m) {
        const auto batch =
            sample_uniform(instance.support, omega_size, derive_seed(master_seed, m + 1));
        const auto set = build_discretized(spec, batch, &instance.support);
        const InnerSolution sol = inner_worst_case(instance, x_bar, set);
        if (sol.status == InnerStatus::Infeasible) {
            ++skipped;
            continue;
        }
        values.push_back(sol.value);
    }
    return detail::finalize_bound(std::move(values), BoundSide::Upper, alpha, omega_size,
                                  skipped);
}

// Lower confidence bound for the expected optimal value of the sampled
// model: a full solve per independently sampled batch.
inline BoundEstimate lower_bound(const ProblemInstance& instance, const AmbiguitySpec& spec,
                                 std::size_t omega_size, std::size_t replicates, double alpha,
                                 std::uint64_t master_seed) {
    if (replicates < 2) throw Error("lower_bound: need at least 2 replicates");
    SolveOptions options;
    options.compute_gap = false;
    std::vector<double> values;
    std::size_t skipped = 0;
    for (std::size_t m = 0; m < replicates; ++m) {
        const auto batch =
            sample_uniform(instance.support, omega_size, derive_seed(master_seed, m + 1));
        try {
            values.push_back(solve_sampled_model(instance, spec, batch, options).v_hat);
        } catch (const AllCandidatesInfeasible&) {
            ++skipped;
        }
    }
    return detail::finalize_bound(std::move(values), BoundSide::Lower, alpha, omega_size,
                                  skipped);
}

}  // namespace drocc
