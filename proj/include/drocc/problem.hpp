#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "drocc/common.hpp"
#include "drocc/support.hpp"

namespace drocc {

struct LipschitzInfo {
    std::optional<double> kappa_f;
    std::optional<double> kappa_g;
    std::optional<double> kappa_theta;
    std::optional<double> c_p;
};

struct FiniteCandidates {
    std::vector<std::vector<double>> points;
};

// Lattice of decision vectors: steps[j] grid points per dimension,
// endpoints included.
struct GridBox {
    std::vector<double> lower;
    std::vector<double> upper;
    std::vector<std::size_t> steps;
};

using DecisionDomain = std::variant<FiniteCandidates, GridBox>;

inline std::vector<std::vector<double>> enumerate_candidates(const DecisionDomain& domain) {
    if (const auto* fc = std::get_if<FiniteCandidates>(&domain)) return fc->points;
    const auto& gb = std::get<GridBox>(domain);
    const std::size_t d = gb.lower.size();
    if (gb.upper.size() != d || gb.steps.size() != d)
        throw DimensionMismatch("GridBox: inconsistent dimensions");

    std::vector<std::vector<double>> out;
    std::vector<std::size_t> it(d, 0);
    for (;;) {
        std::vector<double> x(d);
        for (std::size_t j = 0; j < d; ++j) {
            x[j] = gb.steps[j] == 1 ? gb.lower[j]
                                    : gb.lower[j] + (gb.upper[j] - gb.lower[j]) * it[j] /
                                          static_cast<double>(gb.steps[j] - 1);
        }
        out.push_back(std::move(x));
        std::size_t j = 0;
        for (; j < d; ++j) {
            if (++it[j] < gb.steps[j]) break;
            it[j] = 0;
        }
        if (j == d) break;
    }
    return out;
}

// One optimization instance: objective F(x, xi), joint constraint map
// G(x, xi) (feasible when every component is <= the tolerance tau), the
// decision domain, the safety level theta, and whatever Lipschitz metadata
// is known. Evaluators must be pure.
struct ProblemInstance {
    std::string name;
    std::function<double(std::span<const double>, std::span<const double>)> objective;
    std::function<std::vector<double>(std::span<const double>, std::span<const double>)>
        constraint;
    DecisionDomain domain;
    double theta = 0.0;
    LipschitzInfo lipschitz;
    double feasibility_tolerance = 0.0;
    SupportBox support;
};

struct FeasibilityMask {
    std::vector<bool> bits;

    std::size_t size() const { return bits.size(); }
    std::size_t count() const {
        std::size_t c = 0;
        for (bool b : bits) c += b;
        return c;
    }
};

// Indicator of G(x, xi) <= tau at every sample atom (inclusive threshold,
// max over the constraint components).
inline FeasibilityMask feasible_mask(const ProblemInstance& instance, std::span<const double> x,
                                     const SampleSet& samples) {
    FeasibilityMask mask;
    mask.bits.reserve(samples.size());
    for (const auto& xi : samples.points) {
        const std::vector<double> g = instance.constraint(x, xi);
        if (g.empty()) throw EvaluationError("feasible_mask: empty constraint value");
        double worst = -std::numeric_limits<double>::infinity();
        for (double v : g) {
            if (!std::isfinite(v)) throw EvaluationError("feasible_mask: non-finite G");
            worst = std::max(worst, v);
        }
        mask.bits.push_back(worst <= instance.feasibility_tolerance);
    }
    return mask;
}

inline double chance_probability(const FeasibilityMask& mask, std::span<const double> p) {
    if (mask.bits.size() != p.size())
        throw DimensionMismatch("chance_probability: length mismatch");
    double total = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i)
        if (mask.bits[i]) total += p[i];
    return total;
}

// Reference instance with a cheap fine-grid ground truth: d = 1 on [0, 1],
// F(x, xi) = (x - xi)^2, G(x, xi) = xi - x, decisions on a 101-point grid.
// kappa_F = 2 and kappa_G = 1 follow from the closed forms; kappa_theta and
// C_P are metadata choices recorded for the gap diagnostics.
inline ProblemInstance make_synthetic_1d_instance(double theta = 0.1) {
    ProblemInstance inst;
    inst.name = "synthetic1d";
    inst.objective = [](std::span<const double> x, std::span<const double> xi) {
        const double d = x[0] - xi[0];
        return d * d;
    };
    inst.constraint = [](std::span<const double> x, std::span<const double> xi) {
        return std::vector<double>{xi[0] - x[0]};
    };
    GridBox grid;
    grid.lower = {0.0};
    grid.upper = {1.0};
    grid.steps = {101};
    inst.domain = grid;
    inst.theta = theta;
    inst.support = unit_box(1);
    inst.lipschitz.kappa_f = 2.0;  // |dF/dxi| = 2|x - xi| <= 2 on [0,1]^2
    inst.lipschitz.kappa_g = 1.0;
    inst.lipschitz.kappa_theta = 2.0;
    inst.lipschitz.c_p = 1.0;
    return inst;
}

// Portfolio selection over a simplex grid of weights. `returns` holds one
// scenario per row, one asset per column; the support box is the
// componentwise scenario range. F is the negative portfolio return and the
// chance constraint caps the loss at loss_threshold.
inline ProblemInstance make_portfolio_instance(const Matrix& returns, double loss_threshold,
                                               double theta, std::size_t weight_steps = 10) {
    if (returns.rows() == 0 || returns.cols() == 0)
        throw DimensionMismatch("make_portfolio_instance: empty returns");
    const std::size_t assets = returns.cols();

    std::vector<double> lo(assets, std::numeric_limits<double>::infinity());
    std::vector<double> hi(assets, -std::numeric_limits<double>::infinity());
    for (std::size_t s = 0; s < returns.rows(); ++s)
        for (std::size_t j = 0; j < assets; ++j) {
            lo[j] = std::min(lo[j], returns(s, j));
            hi[j] = std::max(hi[j], returns(s, j));
        }

    ProblemInstance inst;
    inst.name = "portfolio";
    inst.support = make_box(lo, hi);
    inst.theta = theta;
    inst.objective = [](std::span<const double> x, std::span<const double> xi) {
        return -dot(xi, x);
    };
    inst.constraint = [loss_threshold](std::span<const double> x, std::span<const double> xi) {
        return std::vector<double>{-dot(xi, x) - loss_threshold};
    };

    // Simplex lattice: weights in multiples of 1/weight_steps summing to 1.
    FiniteCandidates fc;
    std::vector<std::size_t> part(assets, 0);
    const std::function<void(std::size_t, std::size_t)> rec = [&](std::size_t j,
                                                                  std::size_t left) {
        if (j + 1 == assets) {
            part[j] = left;
            std::vector<double> x(assets);
            for (std::size_t a = 0; a < assets; ++a)
                x[a] = static_cast<double>(part[a]) / static_cast<double>(weight_steps);
            fc.points.push_back(std::move(x));
            return;
        }
        for (std::size_t take = 0; take <= left; ++take) {
            part[j] = take;
            rec(j + 1, left - take);
        }
    };
    rec(0, weight_steps);

    double kappa = 0.0;
    for (const auto& x : fc.points) kappa = std::max(kappa, norm2(x));
    inst.domain = std::move(fc);
    inst.lipschitz.kappa_f = kappa;  // |xi' x - xi'' x| <= ||x|| ||xi' - xi''||
    inst.lipschitz.kappa_g = kappa;
    return inst;
}

}  // namespace drocc
