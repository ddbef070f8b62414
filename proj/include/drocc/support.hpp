#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <limits>
#include <unordered_set>
#include <vector>

#include "drocc/common.hpp"
#include "drocc/rng.hpp"

namespace drocc {

// Compact support: an axis-aligned box in R^d together with the norm bound
// m_xi (every point of the box has 2-norm at most m_xi).
struct SupportBox {
    std::vector<double> lower;
    std::vector<double> upper;
    double m_xi = 0.0;

    std::size_t dim() const { return lower.size(); }

    bool contains(std::span<const double> xi, double tol = 0.0) const {
        if (xi.size() != lower.size()) return false;
        for (std::size_t j = 0; j < lower.size(); ++j)
            if (xi[j] < lower[j] - tol || xi[j] > upper[j] + tol) return false;
        return true;
    }

    double diameter() const { return dist2(lower, upper); }

    void validate() const {
        if (lower.empty() || lower.size() != upper.size())
            throw DimensionMismatch("SupportBox: bad bounds");
        double corner_norm = 0.0;
        for (std::size_t j = 0; j < lower.size(); ++j) {
            if (!(lower[j] <= upper[j])) throw Error("SupportBox: lower > upper");
            const double c = std::max(std::abs(lower[j]), std::abs(upper[j]));
            corner_norm += c * c;
        }
        if (m_xi < std::sqrt(corner_norm) - 1e-12) throw Error("SupportBox: m_xi too small");
    }
};

// Box with m_xi set to the exact max corner norm.
inline SupportBox make_box(std::vector<double> lower, std::vector<double> upper) {
    SupportBox box;
    box.lower = std::move(lower);
    box.upper = std::move(upper);
    double s = 0.0;
    for (std::size_t j = 0; j < box.lower.size(); ++j) {
        const double c = std::max(std::abs(box.lower[j]), std::abs(box.upper[j]));
        s += c * c;
    }
    box.m_xi = std::sqrt(s);
    box.validate();
    return box;
}

inline SupportBox unit_box(std::size_t d) {
    return make_box(std::vector<double>(d, 0.0), std::vector<double>(d, 1.0));
}

enum class SamplingMode { UniformIID, GreedyQuantizer };

// Discretization of the support: pairwise-distinct points inside the box.
struct SampleSet {
    std::vector<std::vector<double>> points;
    std::uint64_t seed = 0;
    SamplingMode generation_mode = SamplingMode::UniformIID;

    std::size_t size() const { return points.size(); }
    std::size_t dim() const { return points.empty() ? 0 : points.front().size(); }
};

namespace detail {

struct PointHash {
    std::size_t operator()(const std::vector<double>& p) const {
        std::uint64_t h = 0x9e3779b97f4a7c15ull;
        for (double v : p) {
            std::uint64_t bits;
            static_assert(sizeof(bits) == sizeof(v));
            std::memcpy(&bits, &v, sizeof(bits));
            h = mix64(h ^ bits);
        }
        return static_cast<std::size_t>(h);
    }
};

inline std::vector<std::vector<double>> draw_distinct_uniform(const SupportBox& box,
                                                              std::size_t count, Rng& rng) {
    std::vector<std::vector<double>> pts;
    pts.reserve(count);
    std::unordered_set<std::vector<double>, PointHash> seen;
    const std::size_t d = box.dim();
    while (pts.size() < count) {
        std::vector<double> p(d);
        for (std::size_t j = 0; j < d; ++j) p[j] = rng.uniform(box.lower[j], box.upper[j]);
        if (seen.insert(p).second) pts.push_back(std::move(p));
    }
    return pts;
}

// Nearest-sample distances on a regular grid, accelerated by bucketing the
// samples into uniform cells and scanning outward ring by ring.
class CellIndex {
  public:
    CellIndex(const SupportBox& box, const std::vector<std::vector<double>>& pts)
        : box_(box), pts_(pts), d_(box.dim()) {
        const double target = std::pow(static_cast<double>(std::max<std::size_t>(pts.size(), 1)),
                                       1.0 / static_cast<double>(d_));
        cells_per_dim_ = std::max<std::size_t>(1, static_cast<std::size_t>(target));
        width_.resize(d_);
        for (std::size_t j = 0; j < d_; ++j) {
            const double span = std::max(box.upper[j] - box.lower[j], 1e-300);
            width_[j] = span / static_cast<double>(cells_per_dim_);
        }
        std::size_t ncells = 1;
        for (std::size_t j = 0; j < d_; ++j) ncells *= cells_per_dim_;
        buckets_.assign(ncells, {});
        for (std::size_t i = 0; i < pts.size(); ++i) buckets_[cell_of(pts[i])].push_back(i);
        min_width_ = *std::min_element(width_.begin(), width_.end());
    }

    double nearest_distance(std::span<const double> q) const {
        double best = std::numeric_limits<double>::infinity();
        std::vector<std::size_t> c(d_), lo(d_), hi(d_);
        for (std::size_t j = 0; j < d_; ++j) c[j] = coord(q[j], j);
        for (std::size_t ring = 0;; ++ring) {
            // Once the closest possible point of the next ring is farther
            // than the best found, stop.
            if (ring > 0 && best <= (static_cast<double>(ring) - 1.0) * min_width_) break;
            bool any_cell = false;
            for (std::size_t j = 0; j < d_; ++j) {
                lo[j] = c[j] >= ring ? c[j] - ring : 0;
                hi[j] = std::min(c[j] + ring, cells_per_dim_ - 1);
            }
            std::vector<std::size_t> it(lo);
            for (;;) {
                std::size_t cheb = 0;
                for (std::size_t j = 0; j < d_; ++j) {
                    const std::size_t delta = it[j] > c[j] ? it[j] - c[j] : c[j] - it[j];
                    cheb = std::max(cheb, delta);
                }
                if (cheb == ring) {
                    any_cell = true;
                    for (std::size_t i : buckets_[flat(it)])
                        best = std::min(best, dist2(q, pts_[i]));
                }
                std::size_t j = 0;
                for (; j < d_; ++j) {
                    if (++it[j] <= hi[j]) break;
                    it[j] = lo[j];
                }
                if (j == d_) break;
            }
            if (!any_cell && ring > cells_per_dim_) break;
        }
        return best;
    }

  private:
    std::size_t coord(double v, std::size_t j) const {
        const double rel = (v - box_.lower[j]) / width_[j];
        const auto c = static_cast<long long>(std::floor(rel));
        return static_cast<std::size_t>(
            std::clamp<long long>(c, 0, static_cast<long long>(cells_per_dim_) - 1));
    }
    std::size_t cell_of(const std::vector<double>& p) const {
        std::vector<std::size_t> c(d_);
        for (std::size_t j = 0; j < d_; ++j) c[j] = coord(p[j], j);
        return flat(c);
    }
    std::size_t flat(const std::vector<std::size_t>& c) const {
        std::size_t f = 0;
        for (std::size_t j = d_; j-- > 0;) f = f * cells_per_dim_ + c[j];
        return f;
    }

    const SupportBox& box_;
    const std::vector<std::vector<double>>& pts_;
    std::size_t d_;
    std::size_t cells_per_dim_;
    std::vector<double> width_;
    double min_width_;
    std::vector<std::vector<std::size_t>> buckets_;
};

}  // namespace detail

// Draws `count` i.i.d. uniform points on the box; exact duplicates are
// rejected and redrawn so the atoms stay pairwise distinct. Deterministic in
// (box, count, seed).
inline SampleSet sample_uniform(const SupportBox& box, std::size_t count, std::uint64_t seed) {
    box.validate();
    if (count < 1) throw Error("sample_uniform: count must be >= 1");
    Rng rng(seed);
    SampleSet out;
    out.points = detail::draw_distinct_uniform(box, count, rng);
    out.seed = seed;
    out.generation_mode = SamplingMode::UniformIID;
    return out;
}

// Greedy k-center over a seeded uniform candidate pool: the first pick is
// the pool point nearest the box center, each later pick maximizes the
// distance to the points chosen so far. Ties go to the lower pool index.
inline SampleSet quantize_greedy(const SupportBox& box, std::size_t count, std::size_t pool_size,
                                 std::uint64_t seed) {
    box.validate();
    if (count < 1) throw Error("quantize_greedy: count must be >= 1");
    if (pool_size < count) throw PoolTooSmall("quantize_greedy: pool smaller than count");
    Rng rng(seed);
    const auto pool = detail::draw_distinct_uniform(box, pool_size, rng);

    const std::size_t d = box.dim();
    std::vector<double> center(d);
    for (std::size_t j = 0; j < d; ++j) center[j] = 0.5 * (box.lower[j] + box.upper[j]);

    std::size_t first = 0;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < pool.size(); ++i) {
        const double dd = dist2(pool[i], center);
        if (dd < best) {
            best = dd;
            first = i;
        }
    }

    std::vector<std::size_t> chosen{first};
    std::vector<double> dist_to_chosen(pool.size());
    for (std::size_t i = 0; i < pool.size(); ++i) dist_to_chosen[i] = dist2(pool[i], pool[first]);

    while (chosen.size() < count) {
        std::size_t next = 0;
        double far = -1.0;
        for (std::size_t i = 0; i < pool.size(); ++i) {
            if (dist_to_chosen[i] > far) {
                far = dist_to_chosen[i];
                next = i;
            }
        }
        chosen.push_back(next);
        for (std::size_t i = 0; i < pool.size(); ++i)
            dist_to_chosen[i] = std::min(dist_to_chosen[i], dist2(pool[i], pool[next]));
    }

    SampleSet out;
    out.points.reserve(count);
    for (std::size_t i : chosen) out.points.push_back(pool[i]);
    out.seed = seed;
    out.generation_mode = SamplingMode::GreedyQuantizer;
    return out;
}

// Covering radius of the sample set: max over the support of the distance to
// the nearest atom. Exact for d = 1 (sorted half-gaps and end segments); for
// d >= 2 evaluated on a regular grid with grid_per_dim points per axis, so
// the true value lies in [returned, returned + half grid diagonal].
inline double covering_radius(const SupportBox& box, const SampleSet& samples,
                              std::size_t grid_per_dim = 401) {
    box.validate();
    if (samples.points.empty()) throw EmptySampleSet("covering_radius: empty sample set");
    if (samples.dim() != box.dim()) throw DimensionMismatch("covering_radius: dim mismatch");
    for (const auto& p : samples.points)
        if (!box.contains(p, 1e-12)) throw Error("covering_radius: sample outside support");

    const std::size_t d = box.dim();
    if (d == 1) {
        std::vector<double> xs;
        xs.reserve(samples.size());
        for (const auto& p : samples.points) xs.push_back(p[0]);
        std::sort(xs.begin(), xs.end());
        double beta = std::max(xs.front() - box.lower[0], box.upper[0] - xs.back());
        for (std::size_t i = 0; i + 1 < xs.size(); ++i)
            beta = std::max(beta, 0.5 * (xs[i + 1] - xs[i]));
        return beta;
    }

    if (grid_per_dim < 2) throw Error("covering_radius: grid_per_dim must be >= 2");
    detail::CellIndex index(box, samples.points);
    std::vector<double> step(d);
    for (std::size_t j = 0; j < d; ++j)
        step[j] = (box.upper[j] - box.lower[j]) / static_cast<double>(grid_per_dim - 1);

    std::vector<std::size_t> it(d, 0);
    std::vector<double> q(d);
    double beta = 0.0;
    for (;;) {
        for (std::size_t j = 0; j < d; ++j) q[j] = box.lower[j] + step[j] * it[j];
        beta = std::max(beta, index.nearest_distance(q));
        std::size_t j = 0;
        for (; j < d; ++j) {
            if (++it[j] < grid_per_dim) break;
            it[j] = 0;
        }
        if (j == d) break;
    }
    return beta;
}

// Half diagonal of the evaluation grid; the documented slack of the d >= 2
// covering radius approximation.
inline double covering_radius_slack(const SupportBox& box, std::size_t grid_per_dim) {
    if (box.dim() == 1) return 0.0;
    double s = 0.0;
    for (std::size_t j = 0; j < box.dim(); ++j) {
        const double h = (box.upper[j] - box.lower[j]) / static_cast<double>(grid_per_dim - 1);
        s += h * h;
    }
    return 0.5 * std::sqrt(s);
}

}  // namespace drocc
