#pragma once

#include <cmath>
#include <cstddef>
#include <unordered_set>
#include <vector>

#include "drocc/common.hpp"
#include "drocc/support.hpp"

namespace drocc {

// Finitely supported probability distribution: atoms in R^d with a
// probability vector. Atoms must be pairwise distinct and weights must sum
// to one within 1e-12.
struct DiscreteDistribution {
    std::vector<std::vector<double>> atoms;
    std::vector<double> weights;

    std::size_t size() const { return atoms.size(); }
    std::size_t dim() const { return atoms.empty() ? 0 : atoms.front().size(); }

    void validate() const {
        if (atoms.empty() || atoms.size() != weights.size())
            throw DimensionMismatch("DiscreteDistribution: atoms/weights mismatch");
        const std::size_t d = atoms.front().size();
        double total = 0.0;
        for (std::size_t i = 0; i < atoms.size(); ++i) {
            if (atoms[i].size() != d)
                throw DimensionMismatch("DiscreteDistribution: ragged atoms");
            if (!all_finite(atoms[i]) || !std::isfinite(weights[i]))
                throw Error("DiscreteDistribution: non-finite entry");
            if (weights[i] < -1e-12) throw Error("DiscreteDistribution: negative weight");
            total += weights[i];
        }
        if (std::abs(total - 1.0) > 1e-12)
            throw Error("DiscreteDistribution: weights do not sum to 1");
        std::unordered_set<std::vector<double>, detail::PointHash> seen;
        for (const auto& atom : atoms)
            if (!seen.insert(atom).second)
                throw Error("DiscreteDistribution: duplicate atoms");
    }

    std::vector<double> mean() const {
        std::vector<double> m(dim(), 0.0);
        for (std::size_t i = 0; i < atoms.size(); ++i)
            for (std::size_t j = 0; j < m.size(); ++j) m[j] += weights[i] * atoms[i][j];
        return m;
    }
};

inline DiscreteDistribution point_mass(std::vector<double> atom) {
    DiscreteDistribution p;
    p.atoms.push_back(std::move(atom));
    p.weights.push_back(1.0);
    return p;
}

// Distribution on the atoms of a sample set.
inline DiscreteDistribution on_samples(const SampleSet& samples, std::vector<double> weights) {
    if (weights.size() != samples.size())
        throw DimensionMismatch("on_samples: weight length mismatch");
    DiscreteDistribution p;
    p.atoms = samples.points;
    p.weights = std::move(weights);
    return p;
}

inline DiscreteDistribution uniform_on(const SampleSet& samples) {
    return on_samples(samples,
                      std::vector<double>(samples.size(), 1.0 / static_cast<double>(samples.size())));
}

// (1 - lambda) q0 + lambda q1 as a measure: atom lists concatenated with
// scaled weights, exactly-coincident atoms merged.
inline DiscreteDistribution mixture(const DiscreteDistribution& q0,
                                    const DiscreteDistribution& q1, double lambda) {
    if (lambda < 0.0 || lambda > 1.0) throw Error("mixture: lambda outside [0, 1]");
    DiscreteDistribution out;
    for (std::size_t i = 0; i < q0.size(); ++i) {
        out.atoms.push_back(q0.atoms[i]);
        out.weights.push_back((1.0 - lambda) * q0.weights[i]);
    }
    for (std::size_t i = 0; i < q1.size(); ++i) {
        bool merged = false;
        for (std::size_t j = 0; j < q0.size(); ++j) {
            if (out.atoms[j] == q1.atoms[i]) {
                out.weights[j] += lambda * q1.weights[i];
                merged = true;
                break;
            }
        }
        if (!merged) {
            out.atoms.push_back(q1.atoms[i]);
            out.weights.push_back(lambda * q1.weights[i]);
        }
    }
    return out;
}

// Transport plan between two discrete distributions: plan(i, j) is the mass
// moved from atom i of the source to atom j of the target; cost is the
// attained objective for the given order n.
struct TransportPlan {
    Matrix plan;
    double cost = 0.0;
    int order = 1;
};

}  // namespace drocc
