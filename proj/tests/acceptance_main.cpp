// Acceptance suite: one check per criterion, each printing a single
// PASS/FAIL line. Run with a criterion number (1-10) or no argument for all.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <string>
#include <vector>

#include "drocc/experiments.hpp"
#include "drocc/set_distance.hpp"
#include "drocc/solver.hpp"
#include "drocc/stat_bounds.hpp"
#include "drocc/transport.hpp"
#include "oracles.hpp"

namespace {

using drocc::AmbiguitySpec;
using drocc::build_discretized;
using drocc::DiscreteDistribution;
using drocc::inner_worst_case;
using drocc::InnerStatus;
using drocc::kantorovich;
using drocc::make_synthetic_1d_instance;
using drocc::Matrix;
using drocc::MeanVariance;
using drocc::membership;
using drocc::MomentBox;
using drocc::SampleSet;
using drocc::SimplexOnly;
using drocc::unit_box;
using drocc::WassersteinBall;
using drocc::wasserstein_n;

DiscreteDistribution random_distribution(drocc::Rng& rng, std::size_t k, std::size_t d) {
    DiscreteDistribution p;
    double total = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
        std::vector<double> atom(d);
        for (auto& c : atom) c = rng.next_double();
        p.atoms.push_back(std::move(atom));
        const double w = 0.05 + rng.next_double();
        p.weights.push_back(w);
        total += w;
    }
    for (auto& w : p.weights) w /= total;
    return p;
}

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

double regression_slope(const std::vector<double>& x, const std::vector<double>& y) {
    const double n = static_cast<double>(x.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

// --------------------------------------------------------------------------
// 1. Transport LP vs grid-plus-polish brute force on 50 random 3x3 pairs.
// --------------------------------------------------------------------------
bool criterion_1(std::string& detail) {
    drocc::Rng rng(101);
    double worst = 0.0;
    for (int trial = 0; trial < 50; ++trial) {
        const auto p = random_distribution(rng, 3, 2);
        const auto q = random_distribution(rng, 3, 2);
        Matrix cost(3, 3);
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) cost(i, j) = drocc::dist2(p.atoms[i], q.atoms[j]);
        const double lp = kantorovich(p, q).first;
        const double bf = oracle::transport_bruteforce(p.weights, q.weights, cost, 0.02);
        worst = std::max(worst, std::abs(lp - bf));
    }
    detail = "max |lp - bruteforce| = " + drocc::format_number(worst);
    return worst <= 1e-6;
}

// --------------------------------------------------------------------------
// 2. Metric axioms and Wasserstein order properties on 200 random batches.
// --------------------------------------------------------------------------
bool criterion_2(std::string& detail) {
    drocc::Rng rng(202);
    double worst_sym = 0.0, worst_tri = 0.0, worst_order = 0.0, worst_convex = 0.0;
    for (int trial = 0; trial < 200; ++trial) {
        const auto p = random_distribution(rng, 4, 2);
        const auto q = random_distribution(rng, 4, 2);
        const auto r = random_distribution(rng, 4, 2);

        const double pq = kantorovich(p, q).first;
        const double qp = kantorovich(q, p).first;
        const double pr = kantorovich(p, r).first;
        const double rq = kantorovich(r, q).first;
        worst_sym = std::max(worst_sym, std::abs(pq - qp));
        worst_tri = std::max(worst_tri, pq - (pr + rq));

        const double w1 = pq;
        const double w2 = wasserstein_n(p, q, 2);
        const double w3 = wasserstein_n(p, q, 3);
        worst_order = std::max({worst_order, w1 - w2, w2 - w3});

        if (trial % 10 == 0) {
            for (const double lambda : {0.25, 0.5, 0.75}) {
                const auto mix = drocc::mixture(q, r, lambda);
                for (const int n : {1, 2}) {
                    const double lhs = std::pow(wasserstein_n(p, mix, n), n);
                    const double rhs = (1.0 - lambda) * std::pow(wasserstein_n(p, q, n), n) +
                                       lambda * std::pow(wasserstein_n(p, r, n), n);
                    worst_convex = std::max(worst_convex, lhs - rhs);
                }
            }
        }
    }
    detail = "sym " + drocc::format_number(worst_sym) + ", tri slack " +
             drocc::format_number(worst_tri) + ", order " + drocc::format_number(worst_order) +
             ", convexity " + drocc::format_number(worst_convex);
    return worst_sym <= 1e-9 && worst_tri <= 1e-7 && worst_order <= 1e-9 && worst_convex <= 1e-7;
}

// --------------------------------------------------------------------------
// 3. Projection distance never exceeds the covering radius bound.
// --------------------------------------------------------------------------
bool criterion_3(std::string& detail) {
    const auto box = unit_box(2);
    drocc::Rng rng(303);
    int violations = 0;
    double worst_excess = -1.0;
    for (int trial = 0; trial < 50; ++trial) {
        const auto p = random_distribution(rng, 4 + rng.next_index(4), 2);
        const auto samples = drocc::sample_uniform(box, 4 + rng.next_index(12), 5000 + trial);
        const double bound =
            drocc::covering_radius(box, samples, 201) + drocc::covering_radius_slack(box, 201);
        for (const auto mode :
             {drocc::ProjectionMode::NearestAtom, drocc::ProjectionMode::ExactLP}) {
            const auto proj = drocc::project_to_support(p, samples, mode);
            const double rho = kantorovich(proj, p).first;
            if (rho > bound) ++violations;
            worst_excess = std::max(worst_excess, rho - bound);
        }
    }
    detail = "violations " + std::to_string(violations) + ", worst rho - bound = " +
             drocc::format_number(worst_excess);
    return violations == 0;
}

// --------------------------------------------------------------------------
// 4. Inner problem vs simplex-grid brute force.
// --------------------------------------------------------------------------
bool criterion_4(std::string& detail) {
    double worst_linear = 0.0;

    // Atoms chosen so every LP vertex lands on the 0.01 grid.
    SampleSet s4;
    s4.points = {{0.0}, {0.25}, {0.5}, {1.0}};
    const auto inst = make_synthetic_1d_instance(0.1);
    const std::vector<AmbiguitySpec> specs{AmbiguitySpec{SimplexOnly{}},
                                           AmbiguitySpec{MomentBox::mean_box({0.45}, 0.1, 0.1)}};
    drocc::Rng rng(404);
    for (const auto& spec : specs) {
        const auto set = build_discretized(spec, s4);
        for (int trial = 0; trial < 20; ++trial) {
            const std::vector<double> x{rng.next_double()};
            const auto sol = inner_worst_case(inst, x, set);
            const auto mask = drocc::feasible_mask(inst, x, s4);
            std::vector<double> f(4);
            for (int i = 0; i < 4; ++i) f[i] = inst.objective(x, s4.points[i]);
            const double bf =
                oracle::inner_bruteforce(f, 100, [&](const std::vector<double>& p) {
                    if (drocc::chance_probability(mask, p) < 1.0 - inst.theta - 1e-12)
                        return false;
                    return membership(set, p).member;
                });
            if (sol.status == InnerStatus::Infeasible) {
                if (std::isfinite(bf)) return false;
                continue;
            }
            worst_linear = std::max(worst_linear, std::abs(sol.value - bf));
        }
    }

    // Mean-variance local solver vs a 3-atom grid at step 1e-3.
    double worst_mv = 0.0;
    SampleSet s3;
    s3.points = {{0.2}, {0.5}, {0.8}};
    MeanVariance mv;
    mv.mu0 = {0.5};
    mv.sigma0 = Matrix(1, 1);
    mv.sigma0(0, 0) = 0.03;
    mv.gamma_l = 0.2;
    mv.gamma_r = 0.2;
    mv.gamma_s = 1.5;
    const auto mv_set = build_discretized(AmbiguitySpec{mv}, s3);
    const auto inst_loose = make_synthetic_1d_instance(1.0);
    for (int trial = 0; trial < 10; ++trial) {
        const std::vector<double> x{0.35 + 0.3 * rng.next_double()};
        const auto sol = inner_worst_case(inst_loose, x, mv_set);
        if (sol.status == InnerStatus::Infeasible) return false;
        std::vector<double> f(3);
        for (int i = 0; i < 3; ++i) f[i] = inst_loose.objective(x, s3.points[i]);
        const double bf = oracle::inner_bruteforce(f, 1000, [&](const std::vector<double>& p) {
            return membership(mv_set, p).member;
        });
        worst_mv = std::max(worst_mv, std::abs(sol.value - bf));
    }

    detail = "linear max err " + drocc::format_number(worst_linear) +
             ", mean-variance max err " + drocc::format_number(worst_mv);
    return worst_linear <= 1e-3 && worst_mv <= 1e-3;
}

// --------------------------------------------------------------------------
// 5. End-to-end solve vs an exhaustive double loop with an independent
//    simplex implementation.
// --------------------------------------------------------------------------
bool criterion_5(std::string& detail) {
    const auto inst = make_synthetic_1d_instance(0.1);
    const auto samples = drocc::sample_uniform(inst.support, 64, 777);

    WassersteinBall wb;
    wb.nominal = drocc::uniform_on(samples);
    wb.radius = 0.05;
    wb.order = 1;
    const AmbiguitySpec spec{wb};

    drocc::SolveOptions options;
    options.compute_gap = false;
    const auto report = drocc::solve_sampled_model(inst, spec, samples, options);

    // Oracle: assemble the inner LP from scratch per candidate and solve it
    // with the test-side Big-M simplex.
    const std::size_t k = samples.size();
    const auto candidates = drocc::enumerate_candidates(inst.domain);
    double best = std::numeric_limits<double>::infinity();
    std::size_t best_idx = SIZE_MAX;
    for (std::size_t idx = 0; idx < candidates.size(); ++idx) {
        const auto& x = candidates[idx];
        // Variables: p (k), plan (k x k).
        const std::size_t nvars = k + k * k;
        std::vector<double> c(nvars, 0.0);
        for (std::size_t i = 0; i < k; ++i) c[i] = inst.objective(x, samples.points[i]);

        Matrix aeq(1 + k + k, nvars);
        std::vector<double> beq(1 + k + k, 0.0);
        for (std::size_t i = 0; i < k; ++i) aeq(0, i) = 1.0;
        beq[0] = 1.0;
        for (std::size_t i = 0; i < k; ++i) {
            aeq(1 + i, i) = -1.0;
            for (std::size_t j = 0; j < k; ++j) aeq(1 + i, k + i * k + j) = 1.0;
        }
        for (std::size_t j = 0; j < k; ++j) {
            for (std::size_t i = 0; i < k; ++i) aeq(1 + k + j, k + i * k + j) = 1.0;
            beq[1 + k + j] = 1.0 / static_cast<double>(k);
        }

        Matrix aub(2, nvars);
        std::vector<double> bub(2, 0.0);
        for (std::size_t i = 0; i < k; ++i)
            for (std::size_t j = 0; j < k; ++j)
                aub(0, k + i * k + j) = std::abs(samples.points[i][0] - samples.points[j][0]);
        bub[0] = wb.radius;
        for (std::size_t i = 0; i < k; ++i)
            if (samples.points[i][0] - x[0] <= 0.0) aub(1, i) = -1.0;
        bub[1] = -(1.0 - inst.theta);

        const auto value = oracle::bigm_simplex_max(c, aeq, beq, aub, bub);
        if (!value.has_value()) continue;
        if (*value < best - 1e-15) {
            best = *value;
            best_idx = idx;
        }
    }

    detail = "v_hat " + drocc::format_number(report.v_hat) + " vs oracle " +
             drocc::format_number(best) + ", index " + std::to_string(report.x_index) + " vs " +
             std::to_string(best_idx);
    return std::abs(report.v_hat - best) <= 1e-6 && report.x_index == best_idx;
}

// --------------------------------------------------------------------------
// 6. Covering radius rate for uniform samples on the unit square.
// --------------------------------------------------------------------------
bool criterion_6(std::string& detail) {
    const auto box = unit_box(2);
    const std::vector<std::size_t> sizes{128, 256, 512, 1024, 2048, 4096, 8192};
    std::vector<double> slopes;
    std::vector<double> stats_at_top;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        std::vector<double> lx, ly;
        for (const std::size_t n : sizes) {
            const auto s = drocc::sample_uniform(box, n, seed);
            const double beta = drocc::covering_radius(box, s, 401);
            lx.push_back(std::log(static_cast<double>(n)));
            ly.push_back(std::log(beta));
            if (n == sizes.back()) {
                const auto nn = static_cast<double>(n);
                stats_at_top.push_back((nn * std::pow(2.0 * beta, 2) - std::log(nn)) /
                                       std::log(std::log(nn)));
            }
        }
        slopes.push_back(regression_slope(lx, ly));
    }
    const double med_slope = median(slopes);
    const double med_stat = median(stats_at_top);
    detail = "median slope " + drocc::format_number(med_slope) + ", median scaled stat " +
             drocc::format_number(med_stat);
    return med_slope >= -0.85 && med_slope <= -0.15 && med_stat >= -5.0 && med_stat <= 15.0;
}

// --------------------------------------------------------------------------
// 7. Optimality-gap trend against the fine quantizer reference.
// --------------------------------------------------------------------------
bool criterion_7(std::string& detail) {
    nlohmann::json cfg_json{{"command", "converge"},
                            {"instance", {{"name", "synthetic1d"}, {"theta", 0.1}}},
                            {"spec", {{"mode", "simplex"}}},
                            {"omega_sizes", {32, 128, 512}},
                            {"seeds", nlohmann::json::array()},
                            {"alpha", 0.05}};
    for (int seed = 1; seed <= 20; ++seed) cfg_json["seeds"].push_back(seed);
    const auto table = drocc::run_converge(drocc::parse_config(cfg_json), 4096);

    std::vector<double> gaps32, gaps512;
    bool bounds_hold = true;
    double worst_ratio = 0.0;
    for (const auto& row : table.rows) {
        const double gap = std::stod(row[4]);
        if (row[0] == "32") gaps32.push_back(gap);
        if (row[0] == "512") gaps512.push_back(gap);
        if (row[6].empty()) {
            bounds_hold = false;
            continue;
        }
        const double bound = std::stod(row[6]);
        worst_ratio = std::max(worst_ratio, bound > 0 ? gap / bound : (gap > 0 ? 1e9 : 0.0));
        if (gap > bound) bounds_hold = false;
    }
    const double m32 = median(gaps32), m512 = median(gaps512);
    detail = "median gap 32 " + drocc::format_number(m32) + ", 512 " +
             drocc::format_number(m512) + ", worst gap/bound " + drocc::format_number(worst_ratio);
    return m512 <= 0.5 * m32 && bounds_hold;
}

// --------------------------------------------------------------------------
// 8. Student-t critical values against the frozen oracles.
// --------------------------------------------------------------------------
bool criterion_8(std::string& detail) {
    const double t9 = drocc::t_critical(0.05, 9);
    const double t_large = drocc::t_critical(0.05, 10000);
    detail = "t(0.05, 9) = " + drocc::format_number(t9) + ", t(0.05, 1e4) = " +
             drocc::format_number(t_large);
    return std::abs(t9 - 1.8331) <= 1e-3 && std::abs(t_large - 1.6449) <= 1e-3;
}

// --------------------------------------------------------------------------
// 9. Coverage of the statistical bounds at the paper's suggested M = M' = 10.
// --------------------------------------------------------------------------
bool criterion_9(std::string& detail) {
    nlohmann::json cfg_json{{"command", "coverage"},
                            {"instance", {{"name", "synthetic1d"}, {"theta", 0.1}}},
                            {"spec", {{"mode", "simplex"}}},
                            {"omega_sizes", {8192}},
                            {"seeds", nlohmann::json::array()},
                            {"alpha", 0.05},
                            {"M", 10},
                            {"M_prime", 10}};
    for (int seed = 1; seed <= 100; ++seed) cfg_json["seeds"].push_back(seed);
    const auto table = drocc::run_coverage(drocc::parse_config(cfg_json), 4096);

    const auto& summary = table.rows.back();
    const double frac_lower = std::stod(summary[4]);
    const double frac_upper = std::stod(summary[5]);
    detail = "lower coverage " + drocc::format_number(frac_lower) + ", upper coverage " +
             drocc::format_number(frac_upper) + " over 100 trials";
    return frac_lower >= 0.85 && frac_upper >= 0.85;
}

// --------------------------------------------------------------------------
// 10. Exact nesting invariants of the inner value.
// --------------------------------------------------------------------------
bool criterion_10(std::string& detail) {
    const auto inst = make_synthetic_1d_instance(0.2);
    drocc::Rng rng(1010);
    double worst = 0.0;
    for (int trial = 0; trial < 50; ++trial) {
        const std::vector<double> x{0.3 + 0.7 * rng.next_double()};

        // Support nesting via the greedy prefix property.
        const auto big = drocc::quantize_greedy(inst.support, 16, 128, 2000 + trial);
        SampleSet small;
        small.points.assign(big.points.begin(), big.points.begin() + 8);
        const AmbiguitySpec simplex{SimplexOnly{}};
        const auto sol_small = inner_worst_case(inst, x, build_discretized(simplex, small));
        const auto sol_big = inner_worst_case(inst, x, build_discretized(simplex, big));
        if (sol_small.status == InnerStatus::Optimal) {
            if (sol_big.status != InnerStatus::Optimal) return false;
            worst = std::max(worst, sol_small.value - sol_big.value);
        }

        // Radius monotonicity on a fixed sample set.
        const auto samples = drocc::sample_uniform(inst.support, 12, 3000 + trial);
        WassersteinBall wb;
        wb.nominal = drocc::uniform_on(samples);
        wb.order = 1;
        wb.radius = 0.02 + 0.1 * rng.next_double();
        auto wider = wb;
        wider.radius = wb.radius + 0.05 + 0.2 * rng.next_double();
        const auto sol_narrow =
            inner_worst_case(inst, x, build_discretized(AmbiguitySpec{wb}, samples));
        const auto sol_wide =
            inner_worst_case(inst, x, build_discretized(AmbiguitySpec{wider}, samples));
        if (sol_narrow.status == InnerStatus::Optimal) {
            if (sol_wide.status != InnerStatus::Optimal) return false;
            worst = std::max(worst, sol_narrow.value - sol_wide.value);
        }
    }
    detail = "worst monotonicity violation " + drocc::format_number(worst);
    return worst <= 1e-9;
}

struct Criterion {
    int number;
    const char* label;
    std::function<bool(std::string&)> check;
};

}  // namespace

int main(int argc, char** argv) {
    const std::vector<Criterion> criteria{
        {1, "transport LP vs plan-grid brute force", criterion_1},
        {2, "metric axioms and order properties", criterion_2},
        {3, "projection bounded by covering radius", criterion_3},
        {4, "inner problem vs simplex-grid brute force", criterion_4},
        {5, "end-to-end solve vs independent double loop", criterion_5},
        {6, "covering radius rate on the unit square", criterion_6},
        {7, "optimality gap trend and theoretical bound", criterion_7},
        {8, "t critical values", criterion_8},
        {9, "confidence bound coverage", criterion_9},
        {10, "nesting invariants of the inner value", criterion_10},
    };

    int only = 0;
    if (argc > 1) only = std::atoi(argv[1]);

    bool all_ok = true;
    for (const auto& criterion : criteria) {
        if (only != 0 && criterion.number != only) continue;
        const auto start = std::chrono::steady_clock::now();
        std::string detail;
        bool ok = false;
        try {
            ok = criterion.check(detail);
        } catch (const std::exception& e) {
            detail = std::string{"exception: "} + e.what();
        }
        const double secs =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        std::printf("[%s] criterion %d: %s (%s; %.1fs)\n", ok ? "PASS" : "FAIL",
                    criterion.number, criterion.label, detail.c_str(), secs);
        std::fflush(stdout);
        all_ok = all_ok && ok;
    }
    return all_ok ? 0 : 1;
}
