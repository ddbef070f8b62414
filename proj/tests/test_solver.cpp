#include <algorithm>
#include <catch2/catch_amalgamated.hpp>
#include <cmath>

#include "drocc/rng.hpp"
#include "drocc/solver.hpp"
#include "oracles.hpp"

using drocc::AmbiguitySpec;
using drocc::build_discretized;
using drocc::inner_worst_case;
using drocc::inner_worst_case_meanvar;
using drocc::InnerStatus;
using drocc::make_synthetic_1d_instance;
using drocc::Matrix;
using drocc::MeanVariance;
using drocc::membership;
using drocc::MomentBox;
using drocc::ProblemInstance;
using drocc::reference_value;
using drocc::SampleSet;
using drocc::SimplexOnly;
using drocc::solve_sampled_model;
using drocc::theoretical_gap_bound;
using drocc::WassersteinBall;

namespace {

SampleSet atoms(std::initializer_list<double> xs) {
    SampleSet s;
    for (double x : xs) s.points.push_back({x});
    return s;
}

// Closed-form inner optimum for the full simplex: theta mass on the worst
// atom overall, the rest on the worst feasible atom.
double simplex_inner_oracle(const std::vector<double>& f, const std::vector<bool>& mask,
                            double theta) {
    double best_all = -std::numeric_limits<double>::infinity();
    double best_feas = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < f.size(); ++i) {
        best_all = std::max(best_all, f[i]);
        if (mask[i]) best_feas = std::max(best_feas, f[i]);
    }
    if (best_feas == -std::numeric_limits<double>::infinity())
        return theta >= 1.0 ? best_all : std::numeric_limits<double>::quiet_NaN();
    return std::max(best_feas, (1.0 - theta) * best_feas + theta * best_all);
}

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

TEST_CASE("inner problem with theta 1 takes the worst atom") {
    const auto inst = make_synthetic_1d_instance(1.0);
    const auto s = atoms({0.0, 1.0});
    const auto set = build_discretized(AmbiguitySpec{SimplexOnly{}}, s);
    const auto sol = inner_worst_case(inst, std::vector<double>{0.0}, set);
    REQUIRE(sol.status == InnerStatus::Optimal);
    CHECK(sol.value == Catch::Approx(1.0).margin(1e-9));  // max((0-0)^2, (0-1)^2)
    CHECK(sol.worst_case.weights[1] == Catch::Approx(1.0).margin(1e-9));
}

TEST_CASE("theta 0 excludes infeasible atoms from the worst case") {
    // F values (1, 2, 5) at atoms (0, 1, 2); the mask kills the third atom.
    ProblemInstance inst = make_synthetic_1d_instance(0.0);
    inst.support = drocc::make_box({0.0}, {3.0});
    inst.objective = [](std::span<const double>, std::span<const double> xi) {
        return 1.0 + xi[0] * xi[0];
    };
    inst.constraint = [](std::span<const double>, std::span<const double> xi) {
        return std::vector<double>{xi[0] - 1.5};
    };
    const auto s = atoms({0.0, 1.0, 2.0});
    const auto set = build_discretized(AmbiguitySpec{SimplexOnly{}}, s);
    const auto sol = inner_worst_case(inst, std::vector<double>{0.0}, set);
    REQUIRE(sol.status == InnerStatus::Optimal);
    CHECK(sol.value == Catch::Approx(2.0).margin(1e-9));
    CHECK(sol.worst_case.weights[1] == Catch::Approx(1.0).margin(1e-9));
    CHECK(sol.chance_prob >= 1.0 - 1e-8);
}

TEST_CASE("theta 0 at the top decision keeps every atom feasible") {
    const auto inst = make_synthetic_1d_instance(0.0);
    const auto s = atoms({0.1, 0.5, 0.9});
    const auto mask = drocc::feasible_mask(inst, std::vector<double>{1.0}, s);
    CHECK(mask.count() == 3);

    const auto set = build_discretized(AmbiguitySpec{SimplexOnly{}}, s);
    const auto sol = inner_worst_case(inst, std::vector<double>{1.0}, set);
    REQUIRE(sol.status == InnerStatus::Optimal);
    CHECK(sol.value == Catch::Approx(0.81).margin(1e-9));  // worst feasible atom at 0.1
}

TEST_CASE("an all-false mask with theta below one is infeasible") {
    const auto inst = make_synthetic_1d_instance(0.5);
    const auto s = atoms({0.6, 0.9});
    const auto set = build_discretized(AmbiguitySpec{SimplexOnly{}}, s);
    const auto sol = inner_worst_case(inst, std::vector<double>{0.5}, set);
    CHECK(sol.status == InnerStatus::Infeasible);
}

TEST_CASE("moment-box inner value matches the fine grid") {
    const auto inst = make_synthetic_1d_instance(1.0);
    const auto s = atoms({0.0, 1.0});
    const auto spec = AmbiguitySpec{MomentBox::mean_box({0.5}, 0.1, 0.1)};
    const auto set = build_discretized(spec, s);
    // F at the atoms for x = 0 is (0, 1): the worst case pushes p_2 to 0.6.
    const auto sol = inner_worst_case(inst, std::vector<double>{0.0}, set);
    REQUIRE(sol.status == InnerStatus::Optimal);
    CHECK(sol.value == Catch::Approx(0.6).margin(1e-9));

    const std::vector<double> f{0.0, 1.0};
    const double oracle = oracle::inner_bruteforce(f, 10000, [&](const std::vector<double>& p) {
        return membership(set, p).member;
    });
    CHECK(sol.value == Catch::Approx(oracle).margin(1e-9));
}

TEST_CASE("mean-variance with a loose cap equals the linear solve") {
    auto inst = make_synthetic_1d_instance(1.0);
    const auto s = atoms({0.0, 0.5, 1.0});

    MeanVariance mv;
    mv.mu0 = {0.5};
    mv.sigma0 = Matrix(1, 1);
    mv.sigma0(0, 0) = 0.25;
    mv.gamma_l = 0.4;
    mv.gamma_r = 0.4;
    mv.gamma_s = 1e6;  // vacuous covariance cap
    const auto mv_set = build_discretized(AmbiguitySpec{mv}, s);
    const auto mv_sol = inner_worst_case(inst, std::vector<double>{0.2}, mv_set);

    const auto mb_set =
        build_discretized(AmbiguitySpec{MomentBox::mean_box({0.5}, 0.4, 0.4)}, s);
    const auto mb_sol = inner_worst_case(inst, std::vector<double>{0.2}, mb_set);

    REQUIRE(mv_sol.status == InnerStatus::LocalOptimal);
    REQUIRE(mb_sol.status == InnerStatus::Optimal);
    CHECK(mv_sol.value == Catch::Approx(mb_sol.value).margin(1e-7));
}

TEST_CASE("mean-variance local solve matches a fine simplex grid") {
    drocc::Rng rng(606060);
    for (int trial = 0; trial < 3; ++trial) {
        auto inst = make_synthetic_1d_instance(1.0);
        SampleSet s;
        for (int i = 0; i < 3; ++i) s.points.push_back({0.1 + 0.35 * i + 0.05 * rng.next_double()});

        MeanVariance mv;
        mv.mu0 = {0.5};
        mv.sigma0 = Matrix(1, 1);
        mv.sigma0(0, 0) = 0.05;
        mv.gamma_l = 0.3;
        mv.gamma_r = 0.3;
        mv.gamma_s = 1.5;
        const auto set = build_discretized(AmbiguitySpec{mv}, s);

        const std::vector<double> x{rng.next_double()};
        const auto sol = inner_worst_case(inst, x, set);
        if (sol.status == InnerStatus::Infeasible) continue;
        REQUIRE(sol.status == InnerStatus::LocalOptimal);
        CHECK(membership(set, sol.worst_case.weights).member);

        std::vector<double> f(3);
        for (int i = 0; i < 3; ++i) f[i] = inst.objective(x, s.points[i]);
        const auto mask = drocc::feasible_mask(inst, x, s);
        const double oracle =
            oracle::inner_bruteforce(f, 1000, [&](const std::vector<double>& p) {
                if (drocc::chance_probability(mask, p) < 1.0 - inst.theta) return false;
                return membership(set, p).member;
            });
        CHECK(sol.value == Catch::Approx(oracle).margin(1e-3));
    }
}

TEST_CASE("two-atom symmetric instance with a binding covariance cap") {
    // Atoms at 0 and 1, mean pinned near 1/2: Cov(p) = p2 - p2^2 is maximal
    // at p = (1/2, 1/2), so a cap below 1/4 must bind.
    const auto inst = make_synthetic_1d_instance(1.0);
    const auto s = atoms({0.0, 1.0});
    MeanVariance mv;
    mv.mu0 = {0.5};
    mv.sigma0 = Matrix(1, 1);
    mv.sigma0(0, 0) = 0.15;
    mv.gamma_l = 0.3;
    mv.gamma_r = 0.3;
    mv.gamma_s = 1.2;  // cap at 0.18 < 0.25
    const auto set = build_discretized(AmbiguitySpec{mv}, s);

    const std::vector<double> x{0.1};
    const auto sol = inner_worst_case(inst, x, set);
    REQUIRE(sol.status == InnerStatus::LocalOptimal);
    CHECK(membership(set, sol.worst_case.weights).member);
    CHECK(membership(set, sol.worst_case.weights).margin <= 1e-6);  // cap binds

    std::vector<double> f{inst.objective(x, s.points[0]), inst.objective(x, s.points[1])};
    const double oracle = oracle::inner_bruteforce(f, 10000, [&](const std::vector<double>& p) {
        return membership(set, p).member;
    });
    CHECK(sol.value == Catch::Approx(oracle).margin(1e-3));
}

TEST_CASE("mean-variance solver is idempotent at its own solution") {
    auto inst = make_synthetic_1d_instance(1.0);
    const auto s = atoms({0.0, 0.5, 1.0});
    MeanVariance mv;
    mv.mu0 = {0.5};
    mv.sigma0 = Matrix(1, 1);
    mv.sigma0(0, 0) = 0.1;
    mv.gamma_l = 0.25;
    mv.gamma_r = 0.25;
    mv.gamma_s = 1.2;
    const auto set = build_discretized(AmbiguitySpec{mv}, s);
    const auto first = inner_worst_case(inst, std::vector<double>{0.3}, set);
    REQUIRE(first.status == InnerStatus::LocalOptimal);
    const auto second = inner_worst_case(inst, std::vector<double>{0.3}, set);
    CHECK(first.value == second.value);  // deterministic fixed point
}

TEST_CASE("outer search picks the single or the feasible candidate") {
    auto inst = make_synthetic_1d_instance(0.2);
    const auto s = atoms({0.1, 0.4, 0.8});

    drocc::FiniteCandidates fc;
    fc.points = {{0.9}};
    inst.domain = fc;
    const auto single = solve_sampled_model(inst, AmbiguitySpec{SimplexOnly{}},
                                            drocc::sample_uniform(inst.support, 16, 3));
    const auto set = build_discretized(AmbiguitySpec{SimplexOnly{}},
                                       drocc::sample_uniform(inst.support, 16, 3));
    const auto direct = inner_worst_case(inst, std::vector<double>{0.9}, set);
    CHECK(single.v_hat == Catch::Approx(direct.value).margin(1e-12));

    // x = 0.05 leaves no feasible atom at theta = 0.2; x = 0.9 does.
    fc.points = {{0.05}, {0.9}};
    inst.domain = fc;
    const auto picked = solve_sampled_model(inst, AmbiguitySpec{SimplexOnly{}}, s);
    CHECK(picked.x_index == 1);
    CHECK(picked.infeasible_candidates == 1);
    CHECK(picked.evaluated_candidates == 2);
}

TEST_CASE("every candidate infeasible raises the dedicated error") {
    auto inst = make_synthetic_1d_instance(0.1);
    drocc::FiniteCandidates fc;
    fc.points = {{0.0}};
    inst.domain = fc;
    const auto s = atoms({0.5, 0.9});
    CHECK_THROWS_AS(solve_sampled_model(inst, AmbiguitySpec{SimplexOnly{}}, s),
                    drocc::AllCandidatesInfeasible);
}

TEST_CASE("sampled solve equals the exhaustive double loop") {
    const auto inst = make_synthetic_1d_instance(0.1);
    const auto samples = drocc::sample_uniform(inst.support, 64, 909);
    const auto report = solve_sampled_model(inst, AmbiguitySpec{SimplexOnly{}}, samples);

    const auto candidates = drocc::enumerate_candidates(inst.domain);
    double best = std::numeric_limits<double>::infinity();
    std::size_t best_idx = SIZE_MAX;
    for (std::size_t idx = 0; idx < candidates.size(); ++idx) {
        const auto mask = drocc::feasible_mask(inst, candidates[idx], samples);
        std::vector<double> f(samples.size());
        for (std::size_t i = 0; i < samples.size(); ++i)
            f[i] = inst.objective(candidates[idx], samples.points[i]);
        const double q = simplex_inner_oracle(f, mask.bits, inst.theta);
        if (std::isnan(q)) continue;
        if (q < best - 1e-15) {
            best = q;
            best_idx = idx;
        }
    }
    CHECK(report.v_hat == Catch::Approx(best).margin(1e-6));
    CHECK(report.x_index == best_idx);
}

TEST_CASE("worst case p is an exact LP optimum under perturbed objectives") {
    const auto inst = make_synthetic_1d_instance(0.3);
    const auto samples = drocc::sample_uniform(inst.support, 12, 77);
    const auto spec = AmbiguitySpec{MomentBox::mean_box({0.5}, 0.2, 0.2)};
    const auto set = build_discretized(spec, samples);

    drocc::Rng rng(123);
    const std::vector<double> x{0.7};
    const auto sol = inner_worst_case(inst, x, set);
    REQUIRE(sol.status == InnerStatus::Optimal);

    std::vector<double> f(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) f[i] = inst.objective(x, samples.points[i]);

    for (int trial = 0; trial < 10; ++trial) {
        // Re-solve with a slightly perturbed objective; the perturbed
        // optimizer cannot beat the original one on the original objective.
        auto inst2 = inst;
        std::vector<double> noise(samples.size());
        for (auto& v : noise) v = 1e-4 * rng.uniform(-1.0, 1.0);
        inst2.objective = [&f, &noise, &samples](std::span<const double>,
                                                 std::span<const double> xi) {
            for (std::size_t i = 0; i < samples.size(); ++i)
                if (samples.points[i][0] == xi[0]) return f[i] + noise[i];
            return 0.0;
        };
        const auto sol2 = inner_worst_case(inst2, x, set);
        REQUIRE(sol2.status == InnerStatus::Optimal);
        CHECK(drocc::dot(f, sol2.worst_case.weights) <= sol.value + 1e-7);
    }
}

TEST_CASE("inner value is monotone in theta") {
    const auto inst0 = make_synthetic_1d_instance(0.05);
    const auto samples = drocc::sample_uniform(inst0.support, 24, 5);
    const auto set = build_discretized(AmbiguitySpec{SimplexOnly{}}, samples);
    const std::vector<double> x{0.6};
    double prev = -std::numeric_limits<double>::infinity();
    for (double theta : {0.05, 0.2, 0.5, 0.9}) {
        const auto inst = make_synthetic_1d_instance(theta);
        const auto sol = inner_worst_case(inst, x, set);
        REQUIRE(sol.status == InnerStatus::Optimal);
        CHECK(sol.value >= prev - 1e-9);
        prev = sol.value;
    }
}

TEST_CASE("inner value is monotone in the wasserstein radius") {
    const auto inst = make_synthetic_1d_instance(0.2);
    const auto samples = drocc::sample_uniform(inst.support, 10, 31);
    WassersteinBall wb;
    wb.nominal.atoms = samples.points;
    wb.nominal.weights.assign(10, 0.1);
    wb.order = 1;
    const std::vector<double> x{0.5};
    double prev = -std::numeric_limits<double>::infinity();
    bool was_feasible = false;
    for (double radius : {0.0, 0.05, 0.15, 0.4}) {
        wb.radius = radius;
        const auto set = build_discretized(AmbiguitySpec{wb}, samples);
        const auto sol = inner_worst_case(inst, x, set);
        if (sol.status == InnerStatus::Infeasible) {
            // Growing the ball can only add feasible p.
            CHECK_FALSE(was_feasible);
            continue;
        }
        REQUIRE(sol.status == InnerStatus::Optimal);
        CHECK(sol.value >= prev - 1e-9);
        prev = sol.value;
        was_feasible = true;
    }
    CHECK(was_feasible);  // the widest ball holds the whole simplex near x
}

TEST_CASE("inner value never drops when the sample set grows") {
    const auto inst = make_synthetic_1d_instance(0.3);
    const auto big = drocc::quantize_greedy(inst.support, 32, 256, 17);
    SampleSet small;
    small.points.assign(big.points.begin(), big.points.begin() + 16);
    const std::vector<double> x{0.55};
    for (const auto spec :
         {AmbiguitySpec{SimplexOnly{}}, AmbiguitySpec{MomentBox::mean_box({0.5}, 0.3, 0.3)}}) {
        const auto sol_small = inner_worst_case(inst, x, build_discretized(spec, small));
        const auto sol_big = inner_worst_case(inst, x, build_discretized(spec, big));
        REQUIRE(sol_small.status == InnerStatus::Optimal);
        REQUIRE(sol_big.status == InnerStatus::Optimal);
        CHECK(sol_big.value >= sol_small.value - 1e-9);
    }
}

TEST_CASE("reference value at the coarse count reproduces the solve") {
    const auto inst = make_synthetic_1d_instance(0.1);
    const auto spec = AmbiguitySpec{SimplexOnly{}};
    const auto fine = drocc::quantize_greedy(inst.support, 1024, 4096, 11);
    drocc::SolveOptions options;
    options.compute_gap = false;
    const auto direct = solve_sampled_model(inst, spec, fine, options);
    CHECK(reference_value(inst, spec, 1024, 11) == Catch::Approx(direct.v_hat).margin(1e-15));
}

TEST_CASE("reference value is stable across seeds") {
    const auto inst = make_synthetic_1d_instance(0.1);
    const auto spec = AmbiguitySpec{SimplexOnly{}};
    const double a = reference_value(inst, spec, 4096, 1);
    const double b = reference_value(inst, spec, 4096, 2);
    CHECK(std::abs(a - b) <= 1e-3);
}

TEST_CASE("theoretical gap bound closed forms") {
    auto inst = make_synthetic_1d_instance(0.1);
    inst.lipschitz.kappa_f = 1.0;
    inst.lipschitz.kappa_g = 1.0;
    inst.lipschitz.kappa_theta = 1.0;
    inst.lipschitz.c_p = 1.0;
    const auto spec = AmbiguitySpec{SimplexOnly{}};  // C^H = 1
    CHECK(theoretical_gap_bound(inst, spec, inst.support, 0.0) == Catch::Approx(0.0));
    CHECK(theoretical_gap_bound(inst, spec, inst.support, 0.5) ==
          Catch::Approx(1.5).margin(1e-12));

    double prev = 0.0;
    for (double beta : {0.01, 0.02, 0.04, 0.08, 0.16}) {
        const double bound = theoretical_gap_bound(inst, spec, inst.support, beta);
        CHECK(bound >= prev);
        prev = bound;
    }

    inst.lipschitz.kappa_theta.reset();
    CHECK_THROWS_AS(theoretical_gap_bound(inst, spec, inst.support, 0.1),
                    drocc::MissingConstant);
}

TEST_CASE("median optimality gap shrinks with the sample count") {
    const auto inst = make_synthetic_1d_instance(0.1);
    const auto spec = AmbiguitySpec{SimplexOnly{}};
    const double reference = reference_value(inst, spec, 4096, 20240810);

    drocc::SolveOptions options;
    options.compute_gap = false;
    std::vector<double> medians;
    for (const std::size_t size : {32, 128, 512}) {
        std::vector<double> gaps;
        for (std::uint64_t seed = 1; seed <= 20; ++seed) {
            const auto samples = drocc::sample_uniform(inst.support, size, seed);
            const auto report = solve_sampled_model(inst, spec, samples, options);
            gaps.push_back(std::abs(report.v_hat - reference));
        }
        medians.push_back(median(gaps));
    }
    CHECK(medians[1] <= medians[0] + 1e-12);
    CHECK(medians[2] <= medians[1] + 1e-12);
}
