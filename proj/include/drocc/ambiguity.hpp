#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <variant>
#include <vector>

#include "drocc/common.hpp"
#include "drocc/distribution.hpp"
#include "drocc/linalg.hpp"
#include "drocc/support.hpp"
#include "drocc/transport.hpp"

namespace drocc {

enum class AmbiguityMode { SimplexOnly, MomentBox, MeanVariance, WassersteinBall };

struct SimplexOnly {};

// E[psi(xi)] constrained to a box, where psi is an affine map
// psi(xi) = coeff xi + offset. Bounds may be +-infinity to express
// one-sided rows.
struct MomentBox {
    Matrix coeff;
    std::vector<double> offset;
    std::vector<double> lower;
    std::vector<double> upper;

    // Mean box: mu0 - gamma_r <= E[xi] <= mu0 + gamma_l componentwise.
    static MomentBox mean_box(const std::vector<double>& mu0, double gamma_l, double gamma_r) {
        MomentBox mb;
        const std::size_t d = mu0.size();
        mb.coeff = Matrix::identity(d);
        mb.offset.assign(d, 0.0);
        mb.lower.resize(d);
        mb.upper.resize(d);
        for (std::size_t j = 0; j < d; ++j) {
            mb.lower[j] = mu0[j] - gamma_r;
            mb.upper[j] = mu0[j] + gamma_l;
        }
        return mb;
    }
};

// Mean box plus a covariance cap: Cov(p) <= gamma_s Sigma0 in the Loewner
// order, with the covariance centered at the variable mean.
struct MeanVariance {
    std::vector<double> mu0;
    Matrix sigma0;
    double gamma_l = 0.0;
    double gamma_r = 0.0;
    double gamma_s = 1.0;
};

struct WassersteinBall {
    DiscreteDistribution nominal;
    double radius = 0.0;
    int order = 1;
};

struct AmbiguitySpec {
    std::variant<SimplexOnly, MomentBox, MeanVariance, WassersteinBall> payload;

    AmbiguityMode mode() const {
        return static_cast<AmbiguityMode>(payload.index());
    }

    void validate() const {
        if (const auto* mb = std::get_if<MomentBox>(&payload)) {
            const std::size_t r = mb->coeff.rows();
            if (mb->offset.size() != r || mb->lower.size() != r || mb->upper.size() != r)
                throw DimensionMismatch("MomentBox: row count mismatch");
            for (std::size_t i = 0; i < r; ++i)
                if (mb->lower[i] > mb->upper[i]) throw Error("MomentBox: lower > upper");
        } else if (const auto* mv = std::get_if<MeanVariance>(&payload)) {
            const std::size_t d = mv->mu0.size();
            if (mv->sigma0.rows() != d || mv->sigma0.cols() != d)
                throw DimensionMismatch("MeanVariance: sigma0 shape mismatch");
            for (std::size_t i = 0; i < d; ++i)
                for (std::size_t j = i + 1; j < d; ++j)
                    if (std::abs(mv->sigma0(i, j) - mv->sigma0(j, i)) > 1e-12)
                        throw Error("MeanVariance: sigma0 not symmetric");
            if (min_eigenvalue(mv->sigma0) <= 0.0)
                throw Error("MeanVariance: sigma0 not positive definite");
            if (!(mv->gamma_s > 1.0)) throw Error("MeanVariance: gamma_s must exceed 1");
            if (mv->gamma_l <= 0.0 || mv->gamma_r <= 0.0)
                throw Error("MeanVariance: gamma_l/gamma_r must be positive");
        } else if (const auto* wb = std::get_if<WassersteinBall>(&payload)) {
            wb->nominal.validate();
            if (wb->radius < 0.0) throw Error("WassersteinBall: negative radius");
            if (wb->order < 1) throw Error("WassersteinBall: order must be >= 1");
        }
    }
};

// Constraint system over the probability vector p (plus transport plan
// variables for a Wasserstein ball) describing the discretization of the
// ambiguity set on a given sample set. The simplex rows are always present.
struct DiscretizedAmbiguitySet {
    AmbiguitySpec spec;
    SampleSet samples;

    // Variables: z = (p_1..p_k, aux_1..aux_naux), all >= 0.
    std::size_t num_p = 0;
    std::size_t num_aux = 0;
    Matrix eq_matrix;
    std::vector<double> eq_rhs;
    Matrix ub_matrix;
    std::vector<double> ub_rhs;
    bool is_linear = true;

    std::size_t num_vars() const { return num_p + num_aux; }
};

namespace detail {

inline double psi_row_value(const MomentBox& mb, std::size_t r, std::span<const double> xi) {
    return dot(mb.coeff.row(r), xi) + mb.offset[r];
}

// Covariance of the sample atoms under weights p, centered at the weighted
// mean.
inline Matrix weighted_covariance(const SampleSet& samples, std::span<const double> p) {
    const std::size_t d = samples.dim();
    std::vector<double> mu(d, 0.0);
    for (std::size_t i = 0; i < samples.size(); ++i)
        for (std::size_t j = 0; j < d; ++j) mu[j] += p[i] * samples.points[i][j];
    Matrix cov(d, d);
    for (std::size_t i = 0; i < samples.size(); ++i)
        for (std::size_t a = 0; a < d; ++a)
            for (std::size_t b = 0; b < d; ++b)
                cov(a, b) += p[i] * samples.points[i][a] * samples.points[i][b];
    for (std::size_t a = 0; a < d; ++a)
        for (std::size_t b = 0; b < d; ++b) cov(a, b) -= mu[a] * mu[b];
    return cov;
}

}  // namespace detail

inline DiscretizedAmbiguitySet build_discretized(const AmbiguitySpec& spec,
                                                 const SampleSet& samples,
                                                 const SupportBox* support = nullptr) {
    spec.validate();
    if (samples.points.empty()) throw EmptySampleSet("build_discretized: empty sample set");
    const std::size_t k = samples.size();
    const std::size_t d = samples.dim();

    DiscretizedAmbiguitySet set;
    set.spec = spec;
    set.samples = samples;
    set.num_p = k;

    std::size_t naux = 0;
    if (const auto* wb = std::get_if<WassersteinBall>(&spec.payload)) {
        if (wb->nominal.dim() != d)
            throw DimensionMismatch("build_discretized: nominal dimension mismatch");
        if (support != nullptr)
            for (const auto& atom : wb->nominal.atoms)
                if (!support->contains(atom, 1e-12))
                    throw NominalOutsideSupport("build_discretized: nominal atom outside support");
        naux = k * wb->nominal.size();
    }
    set.num_aux = naux;
    const std::size_t nvars = k + naux;

    set.eq_matrix = Matrix(0, nvars);
    set.ub_matrix = Matrix(0, nvars);
    std::vector<double> row(nvars, 0.0);

    // Simplex mass row.
    std::fill(row.begin(), row.end(), 0.0);
    for (std::size_t i = 0; i < k; ++i) row[i] = 1.0;
    set.eq_matrix.append_row(row);
    set.eq_rhs.push_back(1.0);

    if (const auto* mb = std::get_if<MomentBox>(&spec.payload)) {
        if (mb->coeff.cols() != d)
            throw DimensionMismatch("build_discretized: psi dimension mismatch");
        for (std::size_t r = 0; r < mb->coeff.rows(); ++r) {
            std::vector<double> vals(k);
            for (std::size_t i = 0; i < k; ++i)
                vals[i] = detail::psi_row_value(*mb, r, samples.points[i]);
            if (std::isfinite(mb->upper[r])) {
                std::fill(row.begin(), row.end(), 0.0);
                for (std::size_t i = 0; i < k; ++i) row[i] = vals[i];
                set.ub_matrix.append_row(row);
                set.ub_rhs.push_back(mb->upper[r]);
            }
            if (std::isfinite(mb->lower[r])) {
                std::fill(row.begin(), row.end(), 0.0);
                for (std::size_t i = 0; i < k; ++i) row[i] = -vals[i];
                set.ub_matrix.append_row(row);
                set.ub_rhs.push_back(-mb->lower[r]);
            }
        }
    } else if (const auto* mv = std::get_if<MeanVariance>(&spec.payload)) {
        if (mv->mu0.size() != d)
            throw DimensionMismatch("build_discretized: mu0 dimension mismatch");
        for (std::size_t j = 0; j < d; ++j) {
            std::fill(row.begin(), row.end(), 0.0);
            for (std::size_t i = 0; i < k; ++i) row[i] = samples.points[i][j];
            set.ub_matrix.append_row(row);
            set.ub_rhs.push_back(mv->mu0[j] + mv->gamma_l);
            for (std::size_t i = 0; i < k; ++i) row[i] = -samples.points[i][j];
            set.ub_matrix.append_row(row);
            set.ub_rhs.push_back(-(mv->mu0[j] - mv->gamma_r));
        }
        set.is_linear = false;  // covariance row handled by the DC solver
    } else if (const auto* wb = std::get_if<WassersteinBall>(&spec.payload)) {
        const std::size_t k2 = wb->nominal.size();
        const auto aux = [&](std::size_t i, std::size_t j) { return k + i * k2 + j; };
        // Plan row sums equal p.
        for (std::size_t i = 0; i < k; ++i) {
            std::fill(row.begin(), row.end(), 0.0);
            row[i] = -1.0;
            for (std::size_t j = 0; j < k2; ++j) row[aux(i, j)] = 1.0;
            set.eq_matrix.append_row(row);
            set.eq_rhs.push_back(0.0);
        }
        // Plan column sums equal the nominal weights.
        for (std::size_t j = 0; j < k2; ++j) {
            std::fill(row.begin(), row.end(), 0.0);
            for (std::size_t i = 0; i < k; ++i) row[aux(i, j)] = 1.0;
            set.eq_matrix.append_row(row);
            set.eq_rhs.push_back(wb->nominal.weights[j]);
        }
        // Transport cost at order n stays within radius^n.
        std::fill(row.begin(), row.end(), 0.0);
        for (std::size_t i = 0; i < k; ++i)
            for (std::size_t j = 0; j < k2; ++j) {
                const double c = dist2(samples.points[i], wb->nominal.atoms[j]);
                row[aux(i, j)] = wb->order == 1 ? c : std::pow(c, wb->order);
            }
        set.ub_matrix.append_row(row);
        set.ub_rhs.push_back(std::pow(wb->radius, wb->order));
    }

    return set;
}

struct Membership {
    bool member = false;
    double margin = 0.0;
};

// Minimum slack of p over all constraints of the set. For a mean-variance
// set the covariance slack is the smallest eigenvalue of
// gamma_s Sigma0 - Cov(p); for a Wasserstein ball it is radius - W_n(p, P'),
// decided by one transport LP.
inline Membership membership(const DiscretizedAmbiguitySet& set, std::span<const double> p) {
    if (p.size() != set.num_p) throw DimensionMismatch("membership: wrong p length");

    double margin = std::numeric_limits<double>::infinity();
    for (double w : p) margin = std::min(margin, w);

    double mass = 0.0;
    for (double w : p) mass += w;
    const bool mass_ok = std::abs(mass - 1.0) <= 1e-9;
    if (!mass_ok) margin = std::min(margin, -std::abs(mass - 1.0));

    if (const auto* mb = std::get_if<MomentBox>(&set.spec.payload)) {
        for (std::size_t r = 0; r < mb->coeff.rows(); ++r) {
            double val = 0.0;
            for (std::size_t i = 0; i < set.num_p; ++i)
                val += p[i] * detail::psi_row_value(*mb, r, set.samples.points[i]);
            if (std::isfinite(mb->upper[r])) margin = std::min(margin, mb->upper[r] - val);
            if (std::isfinite(mb->lower[r])) margin = std::min(margin, val - mb->lower[r]);
        }
    } else if (const auto* mv = std::get_if<MeanVariance>(&set.spec.payload)) {
        const std::size_t d = set.samples.dim();
        std::vector<double> mu(d, 0.0);
        for (std::size_t i = 0; i < set.num_p; ++i)
            for (std::size_t j = 0; j < d; ++j) mu[j] += p[i] * set.samples.points[i][j];
        for (std::size_t j = 0; j < d; ++j) {
            margin = std::min(margin, mv->mu0[j] + mv->gamma_l - mu[j]);
            margin = std::min(margin, mu[j] - (mv->mu0[j] - mv->gamma_r));
        }
        Matrix slack = detail::weighted_covariance(set.samples, p);
        for (std::size_t a = 0; a < d; ++a)
            for (std::size_t b = 0; b < d; ++b)
                slack(a, b) = mv->gamma_s * mv->sigma0(a, b) - slack(a, b);
        margin = std::min(margin, min_eigenvalue(slack));
    } else if (const auto* wb = std::get_if<WassersteinBall>(&set.spec.payload)) {
        std::vector<double> q(p.begin(), p.end());
        for (double& w : q) w = std::max(w, 0.0);
        double total = 0.0;
        for (double w : q) total += w;
        if (total <= 0.0) return {false, margin};
        for (double& w : q) w /= total;
        const auto dist = on_samples(set.samples, q);
        const double w_n = wasserstein_n(dist, wb->nominal, wb->order);
        margin = std::min(margin, wb->radius - w_n);
    }

    return {mass_ok && margin >= -1e-9, margin};
}

// Slater margin of a moment-box set at a feasible anchor p0: the radius of
// the largest ball around E_{p0}[psi(xi)] inside the box cone, i.e. the
// minimum slack of the psi bounds.
inline double slater_margin(const DiscretizedAmbiguitySet& set, std::span<const double> p0) {
    const auto* mb = std::get_if<MomentBox>(&set.spec.payload);
    if (mb == nullptr) throw Error("slater_margin: moment-box sets only");
    if (p0.size() != set.num_p) throw DimensionMismatch("slater_margin: wrong p length");

    double mass = 0.0;
    double min_w = std::numeric_limits<double>::infinity();
    for (double w : p0) {
        mass += w;
        min_w = std::min(min_w, w);
    }
    if (std::abs(mass - 1.0) > 1e-9 || min_w < -1e-12)
        throw InfeasibleAnchor("slater_margin: anchor is not a probability vector");

    double alpha = std::numeric_limits<double>::infinity();
    for (std::size_t r = 0; r < mb->coeff.rows(); ++r) {
        double val = 0.0;
        for (std::size_t i = 0; i < set.num_p; ++i)
            val += p0[i] * detail::psi_row_value(*mb, r, set.samples.points[i]);
        if (std::isfinite(mb->upper[r])) alpha = std::min(alpha, mb->upper[r] - val);
        if (std::isfinite(mb->lower[r])) alpha = std::min(alpha, val - mb->lower[r]);
    }
    if (alpha < -1e-12) throw InfeasibleAnchor("slater_margin: anchor violates a moment bound");
    return std::max(alpha, 0.0);
}

// Largest slack a probability vector on the samples can leave on every
// moment bound (a Chebyshev-center LP over the discretized set). Useful as
// an automatic Slater margin when no anchor is supplied.
inline double slater_alpha_estimate(const DiscretizedAmbiguitySet& set) {
    const auto* mb = std::get_if<MomentBox>(&set.spec.payload);
    if (mb == nullptr) throw Error("slater_alpha_estimate: moment-box sets only");
    const std::size_t k = set.num_p;

    LpProblem lp;  // variables: p_1..p_k, t
    lp.objective.assign(k + 1, 0.0);
    lp.objective[k] = 1.0;
    lp.eq_matrix = Matrix(1, k + 1);
    for (std::size_t i = 0; i < k; ++i) lp.eq_matrix(0, i) = 1.0;
    lp.eq_rhs = {1.0};
    lp.ub_matrix = Matrix(0, k + 1);
    std::vector<double> row(k + 1, 0.0);
    for (std::size_t r = 0; r < mb->coeff.rows(); ++r) {
        std::vector<double> vals(k);
        for (std::size_t i = 0; i < k; ++i)
            vals[i] = detail::psi_row_value(*mb, r, set.samples.points[i]);
        if (std::isfinite(mb->upper[r])) {
            for (std::size_t i = 0; i < k; ++i) row[i] = vals[i];
            row[k] = 1.0;
            lp.ub_matrix.append_row(row);
            lp.ub_rhs.push_back(mb->upper[r]);
        }
        if (std::isfinite(mb->lower[r])) {
            for (std::size_t i = 0; i < k; ++i) row[i] = -vals[i];
            row[k] = 1.0;
            lp.ub_matrix.append_row(row);
            lp.ub_rhs.push_back(-mb->lower[r]);
        }
    }
    const LpSolution sol = solve_lp(lp);
    if (sol.status != LpStatus::Optimal)
        throw InfeasibleSet("slater_alpha_estimate: empty discretized set");
    return std::max(0.0, sol.value);
}

// Worst-case constant C^H with H(P_Omega, P) <= C^H beta. Wasserstein balls
// give 2; a moment box gives 1 + 2 kappa_psi ||1|| M_Xi / alpha with
// kappa_psi the Lipschitz constant of the stacked one-sided psi map; the
// mean-variance set gives 1 + 2 sqrt(2 + 16 M^2) M sqrt(d^2 + 2d) / alpha
// with alpha = min{gamma_l, gamma_r, (gamma_s - 1) lambda_min(Sigma0)} when
// not supplied. The full simplex gives 1: every distribution projects onto
// the samples within beta.
inline double theoretical_CH(const AmbiguitySpec& spec, const SupportBox& support,
                             std::optional<double> alpha = std::nullopt) {
    spec.validate();
    support.validate();
    switch (spec.mode()) {
        case AmbiguityMode::SimplexOnly:
            return 1.0;
        case AmbiguityMode::WassersteinBall:
            return 2.0;
        case AmbiguityMode::MomentBox: {
            if (!alpha.has_value() || !(*alpha > 0.0))
                throw NonPositiveAlpha("theoretical_CH: moment box needs alpha > 0");
            const auto& mb = std::get<MomentBox>(spec.payload);
            Matrix stacked(0, mb.coeff.cols());
            std::size_t active = 0;
            for (std::size_t r = 0; r < mb.coeff.rows(); ++r) {
                if (std::isfinite(mb.upper[r])) {
                    stacked.append_row(mb.coeff.row(r));
                    ++active;
                }
                if (std::isfinite(mb.lower[r])) {
                    stacked.append_row(mb.coeff.row(r));
                    ++active;
                }
            }
            if (active == 0) return 1.0;  // no binding rows: the full simplex
            const double kappa_psi = spectral_norm(stacked);
            const double ones_norm = std::sqrt(static_cast<double>(active));
            return 1.0 + 2.0 * kappa_psi * ones_norm * support.m_xi / *alpha;
        }
        case AmbiguityMode::MeanVariance: {
            const auto& mv = std::get<MeanVariance>(spec.payload);
            double a;
            if (alpha.has_value()) {
                a = *alpha;
            } else {
                a = std::min({mv.gamma_l, mv.gamma_r,
                              (mv.gamma_s - 1.0) * min_eigenvalue(mv.sigma0)});
            }
            if (!(a > 0.0)) throw NonPositiveAlpha("theoretical_CH: alpha must be positive");
            const double m = support.m_xi;
            const double d = static_cast<double>(support.dim());
            const double kappa_psi = std::sqrt(2.0 + 16.0 * m * m);
            const double ones_norm = std::sqrt(d * d + 2.0 * d);
            return 1.0 + 2.0 * kappa_psi * m * ones_norm / a;
        }
    }
    throw Error("theoretical_CH: unknown mode");
}

}  // namespace drocc
