#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "drocc/set_distance.hpp"
#include "drocc/solver.hpp"
#include "drocc/stat_bounds.hpp"

namespace drocc {

enum class Command { Solve, Bounds, Converge, BetaStudy, Coverage };

inline Command parse_command(const std::string& name) {
    if (name == "solve") return Command::Solve;
    if (name == "bounds") return Command::Bounds;
    if (name == "converge") return Command::Converge;
    if (name == "beta-study") return Command::BetaStudy;
    if (name == "coverage") return Command::Coverage;
    throw ConfigError("unknown command: " + name);
}

// Support descriptor for beta-study runs, which have no problem instance.
struct BoxStudyTarget {
    SupportBox box;
    std::vector<SamplingMode> modes;
    std::size_t pool_factor = 4;
};

struct ExperimentConfig {
    Command command = Command::Solve;
    nlohmann::json instance;  // retained verbatim; materialized on demand
    nlohmann::json spec;
    std::vector<std::size_t> omega_sizes;
    std::vector<std::uint64_t> seeds;
    double alpha = 0.05;
    std::size_t m_batches = 10;
    std::size_t m_prime_batches = 10;
    std::string output_path;
    std::size_t grid_per_dim = 401;
    bool verbose = false;
};

namespace detail {

inline std::vector<double> json_vector(const nlohmann::json& j, const std::string& what) {
    if (!j.is_array()) throw ConfigError(what + ": expected an array");
    std::vector<double> out;
    for (const auto& v : j) {
        if (v.is_null()) {
            out.push_back(std::numeric_limits<double>::quiet_NaN());
        } else if (v.is_number()) {
            out.push_back(v.get<double>());
        } else {
            throw ConfigError(what + ": expected numbers");
        }
    }
    return out;
}

inline Matrix json_matrix(const nlohmann::json& j, const std::string& what) {
    if (!j.is_array() || j.empty()) throw ConfigError(what + ": expected a nonempty 2-d array");
    Matrix m;
    for (const auto& row : j) {
        const auto r = json_vector(row, what);
        m.append_row(r);
    }
    return m;
}

}  // namespace detail

inline ExperimentConfig parse_config(const nlohmann::json& j) {
    if (!j.is_object()) throw ConfigError("config: expected a JSON object");
    static const std::vector<std::string> known{
        "command", "instance", "spec",        "omega_sizes", "seeds",
        "alpha",   "M",        "M_prime",     "output_path", "grid_per_dim"};
    for (const auto& [key, value] : j.items()) {
        (void)value;
        if (std::find(known.begin(), known.end(), key) == known.end())
            throw ConfigError("config: unknown key '" + key + "'");
    }
    if (!j.contains("command")) throw ConfigError("config: missing 'command'");

    ExperimentConfig cfg;
    cfg.command = parse_command(j.at("command").get<std::string>());
    cfg.instance = j.value("instance", nlohmann::json::object());
    cfg.spec = j.value("spec", nlohmann::json{{"mode", "simplex"}});

    if (j.contains("omega_sizes")) {
        for (const auto& v : j.at("omega_sizes")) {
            if (!v.is_number_integer() || v.get<long long>() <= 0)
                throw ConfigError("config: omega_sizes must be positive integers");
            cfg.omega_sizes.push_back(v.get<std::size_t>());
        }
        for (std::size_t i = 1; i < cfg.omega_sizes.size(); ++i)
            if (cfg.omega_sizes[i] <= cfg.omega_sizes[i - 1])
                throw ConfigError("config: omega_sizes must be strictly increasing");
    }
    if (cfg.omega_sizes.empty()) throw ConfigError("config: omega_sizes must be nonempty");

    if (j.contains("seeds"))
        for (const auto& v : j.at("seeds")) cfg.seeds.push_back(v.get<std::uint64_t>());
    if (cfg.seeds.empty()) throw ConfigError("config: seeds must be nonempty");

    cfg.alpha = j.value("alpha", 0.05);
    if (!(cfg.alpha > 0.0 && cfg.alpha < 1.0))
        throw ConfigError("config: alpha must lie in (0, 1)");
    cfg.m_batches = j.value("M", std::size_t{10});
    cfg.m_prime_batches = j.value("M_prime", std::size_t{10});
    cfg.output_path = j.value("output_path", std::string{});
    cfg.grid_per_dim = j.value("grid_per_dim", std::size_t{401});
    if (cfg.grid_per_dim < 2) throw ConfigError("config: grid_per_dim must be at least 2");
    return cfg;
}

inline ProblemInstance make_instance(const nlohmann::json& j) {
    const std::string name = j.value("name", std::string{});
    if (name == "synthetic1d") {
        return make_synthetic_1d_instance(j.value("theta", 0.1));
    }
    if (name == "portfolio") {
        if (!j.contains("returns")) throw ConfigError("portfolio: missing 'returns'");
        const Matrix returns = detail::json_matrix(j.at("returns"), "portfolio.returns");
        return make_portfolio_instance(returns, j.value("loss_threshold", 0.0),
                                       j.value("theta", 0.1),
                                       j.value("weight_steps", std::size_t{10}));
    }
    throw ConfigError("instance: unknown name '" + name + "'");
}

inline BoxStudyTarget make_box_target(const nlohmann::json& j) {
    const std::string name = j.value("name", std::string{"box"});
    BoxStudyTarget target;
    if (name == "box") {
        if (!j.contains("lower") || !j.contains("upper"))
            throw ConfigError("box: missing 'lower'/'upper'");
        target.box = make_box(detail::json_vector(j.at("lower"), "box.lower"),
                              detail::json_vector(j.at("upper"), "box.upper"));
    } else if (name == "synthetic1d") {
        target.box = make_synthetic_1d_instance().support;
    } else {
        throw ConfigError("beta-study: instance must be a box or synthetic1d");
    }
    if (j.contains("modes")) {
        for (const auto& m : j.at("modes")) {
            const auto s = m.get<std::string>();
            if (s == "UniformIID")
                target.modes.push_back(SamplingMode::UniformIID);
            else if (s == "GreedyQuantizer")
                target.modes.push_back(SamplingMode::GreedyQuantizer);
            else
                throw ConfigError("beta-study: unknown mode '" + s + "'");
        }
    }
    if (target.modes.empty()) target.modes.push_back(SamplingMode::UniformIID);
    target.pool_factor = j.value("pool_factor", std::size_t{4});
    if (target.pool_factor < 1) throw ConfigError("beta-study: pool_factor must be >= 1");
    return target;
}

// Ambiguity specification from its JSON form. A Wasserstein ball may name
// its nominal "uniform", which resolves to the uniform distribution on
// whichever sample set the spec is discretized over.
struct SpecTemplate {
    nlohmann::json raw;

    AmbiguitySpec materialize(const SampleSet& samples) const {
        const std::string mode = raw.value("mode", std::string{});
        if (mode == "simplex") return AmbiguitySpec{drocc::SimplexOnly{}};
        if (mode == "moment_box") {
            MomentBox mb;
            if (raw.contains("mu0")) {
                mb = MomentBox::mean_box(detail::json_vector(raw.at("mu0"), "moment_box.mu0"),
                                         raw.value("gamma_l", 0.0), raw.value("gamma_r", 0.0));
            } else {
                mb.coeff = detail::json_matrix(raw.at("coeff"), "moment_box.coeff");
                mb.offset = detail::json_vector(raw.at("offset"), "moment_box.offset");
                mb.lower = detail::json_vector(raw.at("lower"), "moment_box.lower");
                mb.upper = detail::json_vector(raw.at("upper"), "moment_box.upper");
                for (auto& v : mb.lower)
                    if (std::isnan(v)) v = -std::numeric_limits<double>::infinity();
                for (auto& v : mb.upper)
                    if (std::isnan(v)) v = std::numeric_limits<double>::infinity();
            }
            return AmbiguitySpec{std::move(mb)};
        }
        if (mode == "mean_variance") {
            MeanVariance mv;
            mv.mu0 = detail::json_vector(raw.at("mu0"), "mean_variance.mu0");
            mv.sigma0 = detail::json_matrix(raw.at("sigma0"), "mean_variance.sigma0");
            mv.gamma_l = raw.at("gamma_l").get<double>();
            mv.gamma_r = raw.at("gamma_r").get<double>();
            mv.gamma_s = raw.at("gamma_s").get<double>();
            return AmbiguitySpec{std::move(mv)};
        }
        if (mode == "wasserstein") {
            WassersteinBall wb;
            wb.radius = raw.value("radius", 0.0);
            wb.order = raw.value("order", 1);
            if (raw.value("nominal", std::string{}) == "uniform") {
                wb.nominal = uniform_on(samples);
            } else {
                wb.nominal.atoms.clear();
                for (const auto& a : raw.at("nominal_atoms"))
                    wb.nominal.atoms.push_back(detail::json_vector(a, "wasserstein.atom"));
                wb.nominal.weights =
                    detail::json_vector(raw.at("nominal_weights"), "wasserstein.weights");
            }
            return AmbiguitySpec{std::move(wb)};
        }
        throw ConfigError("spec: unknown mode '" + mode + "'");
    }
};

// ---------------------------------------------------------------------------
// CSV output
// ---------------------------------------------------------------------------

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    void write(std::ostream& os) const {
        for (std::size_t j = 0; j < header.size(); ++j)
            os << header[j] << (j + 1 < header.size() ? "," : "");
        os << '\n';
        for (const auto& row : rows) {
            for (std::size_t j = 0; j < row.size(); ++j)
                os << row[j] << (j + 1 < row.size() ? "," : "");
            os << '\n';
        }
    }

    std::string str() const {
        std::ostringstream oss;
        write(oss);
        return oss.str();
    }
};

// Locale-independent, 17 significant digits: enough to round-trip a double.
inline std::string format_number(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 17);
    return std::string(buf, res.ptr);
}

inline std::string format_index(std::size_t v) { return std::to_string(v); }

namespace detail {

inline std::string join_point(const std::vector<double>& x) {
    std::string out;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (i) out += ';';
        out += format_number(x[i]);
    }
    return out;
}

// Covering radius and gap diagnostics shared by the solve and converge
// drivers. The Slater margin for moment-box specs comes from the
// Chebyshev-center LP; other modes need none.
inline SolveOptions gap_options(const AmbiguitySpec& spec, const SampleSet& samples,
                                double beta) {
    SolveOptions options;
    options.beta = beta;
    if (spec.mode() == AmbiguityMode::MomentBox) {
        try {
            const double alpha = slater_alpha_estimate(build_discretized(spec, samples));
            if (alpha > 0.0) options.alpha = alpha;
        } catch (const Error&) {
            // leave alpha unset; the gap column stays empty
        }
    }
    return options;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Drivers
// ---------------------------------------------------------------------------

// Batch size of the pilot solve that supplies the candidate x_bar for the
// upper bound. Deliberately small: a coarse candidate keeps q(x_bar) a bit
// above the true optimum, which is what lets the upper bound stay above the
// fine reference once the evaluation batches have shrunk the
// discretization bias of the inner problem.
inline constexpr std::size_t kPilotBatch = 12;

inline CsvTable run_solve(const ExperimentConfig& cfg) {
    const ProblemInstance instance = make_instance(cfg.instance);
    const SpecTemplate spec_template{cfg.spec};

    CsvTable table;
    table.header = {"omega_size", "seed",    "v_hat",
                    "x_index",    "x_hat",   "chance_prob",
                    "evaluated_candidates",  "infeasible_candidates", "theoretical_bound"};
    for (const std::size_t size : cfg.omega_sizes) {
        for (const std::uint64_t seed : cfg.seeds) {
            const auto samples = sample_uniform(instance.support, size, seed);
            const auto spec = spec_template.materialize(samples);
            const double beta = covering_radius(instance.support, samples, cfg.grid_per_dim);
            const auto report =
                solve_sampled_model(instance, spec, samples,
                                    detail::gap_options(spec, samples, beta));
            table.rows.push_back(
                {format_index(size), std::to_string(seed), format_number(report.v_hat),
                 format_index(report.x_index), detail::join_point(report.x_hat),
                 format_number(report.inner.chance_prob),
                 format_index(report.evaluated_candidates),
                 format_index(report.infeasible_candidates),
                 report.theoretical_gap ? format_number(*report.theoretical_gap) : ""});
        }
    }
    return table;
}

inline CsvTable run_bounds(const ExperimentConfig& cfg) {
    const ProblemInstance instance = make_instance(cfg.instance);
    const SpecTemplate spec_template{cfg.spec};

    CsvTable table;
    table.header = {"side",  "omega_size", "master_seed", "replicates", "skipped",
                    "mean",  "sigma_hat",  "t_value",     "bound"};
    for (const std::size_t size : cfg.omega_sizes) {
        for (const std::uint64_t master : cfg.seeds) {
            // Pilot solve on its own batch supplies x_bar for the upper side.
            const auto pilot =
                sample_uniform(instance.support, kPilotBatch, derive_seed(master, 1000));
            const auto pilot_spec = spec_template.materialize(pilot);
            SolveOptions options;
            options.compute_gap = false;
            const auto x_bar = solve_sampled_model(instance, pilot_spec, pilot, options).x_hat;

            // The two sides consume disjoint seed streams.
            const auto eval = sample_uniform(instance.support, size, derive_seed(master, 1001));
            const auto spec = spec_template.materialize(eval);
            const auto lo =
                lower_bound(instance, spec, size, cfg.m_prime_batches, cfg.alpha,
                            derive_seed(master, 1001));
            const auto up = upper_bound(instance, spec, x_bar, size, cfg.m_batches, cfg.alpha,
                                        derive_seed(master, 1002));
            for (const auto* est : {&lo, &up}) {
                table.rows.push_back({est->side == BoundSide::Lower ? "lower" : "upper",
                                      format_index(size), std::to_string(master),
                                      format_index(est->replicate_values.size()),
                                      format_index(est->skipped_replicates),
                                      format_number(est->mean), format_number(est->sigma_hat),
                                      format_number(est->t_value), format_number(est->bound)});
            }
        }
    }
    return table;
}

inline CsvTable run_converge(const ExperimentConfig& cfg, std::size_t reference_count = 4096) {
    const ProblemInstance instance = make_instance(cfg.instance);
    const SpecTemplate spec_template{cfg.spec};

    // One reference per config: fine greedy-quantizer discretization.
    const auto fine = quantize_greedy(instance.support, reference_count, 4 * reference_count,
                                      derive_seed(cfg.seeds.front(), 404040));
    SolveOptions fine_options;
    fine_options.compute_gap = false;
    const double reference =
        solve_sampled_model(instance, spec_template.materialize(fine), fine, fine_options).v_hat;

    CsvTable table;
    table.header = {"omega_size", "seed", "v_hat", "reference", "gap", "beta",
                    "theoretical_bound"};
    for (const std::size_t size : cfg.omega_sizes) {
        for (const std::uint64_t seed : cfg.seeds) {
            const auto samples = sample_uniform(instance.support, size, seed);
            const auto spec = spec_template.materialize(samples);
            const double beta = covering_radius(instance.support, samples, cfg.grid_per_dim);
            const auto report =
                solve_sampled_model(instance, spec, samples,
                                    detail::gap_options(spec, samples, beta));
            const double gap = std::abs(report.v_hat - reference);
            table.rows.push_back(
                {format_index(size), std::to_string(seed), format_number(report.v_hat),
                 format_number(reference), format_number(gap), format_number(beta),
                 report.theoretical_gap ? format_number(*report.theoretical_gap) : ""});
        }
    }
    return table;
}

inline CsvTable run_beta_study(const ExperimentConfig& cfg) {
    const BoxStudyTarget target = make_box_target(cfg.instance);
    const auto d = static_cast<double>(target.box.dim());

    CsvTable table;
    table.header = {"omega_size", "seed", "mode", "beta", "scaled_stat"};
    for (const SamplingMode mode : target.modes) {
        for (const std::size_t size : cfg.omega_sizes) {
            for (const std::uint64_t seed : cfg.seeds) {
                const SampleSet samples =
                    mode == SamplingMode::UniformIID
                        ? sample_uniform(target.box, size, seed)
                        : quantize_greedy(target.box, size, target.pool_factor * size, seed);
                const double beta = covering_radius(target.box, samples, cfg.grid_per_dim);
                std::string scaled;
                if (size >= 3) {
                    const auto n = static_cast<double>(size);
                    scaled = format_number(
                        (n * std::pow(2.0 * beta, d) - std::log(n)) / std::log(std::log(n)));
                }
                table.rows.push_back({format_index(size), std::to_string(seed),
                                      mode == SamplingMode::UniformIID ? "UniformIID"
                                                                       : "GreedyQuantizer",
                                      format_number(beta), scaled});
            }
        }
    }
    return table;
}

inline CsvTable run_coverage(const ExperimentConfig& cfg, std::size_t reference_count = 4096) {
    const ProblemInstance instance = make_instance(cfg.instance);
    const SpecTemplate spec_template{cfg.spec};
    const std::size_t size = cfg.omega_sizes.front();

    const auto fine = quantize_greedy(instance.support, reference_count, 4 * reference_count,
                                      derive_seed(cfg.seeds.front(), 404040));
    SolveOptions options;
    options.compute_gap = false;
    const double reference =
        solve_sampled_model(instance, spec_template.materialize(fine), fine, options).v_hat;

    CsvTable table;
    table.header = {"trial", "lower", "upper", "reference", "covered_lower", "covered_upper"};
    std::size_t hits_lower = 0, hits_upper = 0;
    for (const std::uint64_t master : cfg.seeds) {
        const auto pilot =
            sample_uniform(instance.support, kPilotBatch, derive_seed(master, 1000));
        const auto pilot_spec = spec_template.materialize(pilot);
        const auto x_bar = solve_sampled_model(instance, pilot_spec, pilot, options).x_hat;

        const auto eval = sample_uniform(instance.support, size, derive_seed(master, 1001));
        const auto spec = spec_template.materialize(eval);
        const auto lo = lower_bound(instance, spec, size, cfg.m_prime_batches, cfg.alpha,
                                    derive_seed(master, 1001));
        const auto up = upper_bound(instance, spec, x_bar, size, cfg.m_batches, cfg.alpha,
                                    derive_seed(master, 1002));

        const bool covered_lower = lo.bound <= reference;
        const bool covered_upper = up.bound >= reference;
        hits_lower += covered_lower;
        hits_upper += covered_upper;
        table.rows.push_back({std::to_string(master), format_number(lo.bound),
                              format_number(up.bound), format_number(reference),
                              covered_lower ? "1" : "0", covered_upper ? "1" : "0"});
    }
    const auto trials = static_cast<double>(cfg.seeds.size());
    table.rows.push_back({"summary", "", "", "",
                          format_number(static_cast<double>(hits_lower) / trials),
                          format_number(static_cast<double>(hits_upper) / trials)});
    return table;
}

inline CsvTable run_experiment(const ExperimentConfig& cfg) {
    switch (cfg.command) {
        case Command::Solve:
            return run_solve(cfg);
        case Command::Bounds:
            return run_bounds(cfg);
        case Command::Converge:
            return run_converge(cfg);
        case Command::BetaStudy:
            return run_beta_study(cfg);
        case Command::Coverage:
            return run_coverage(cfg);
    }
    throw ConfigError("unknown command");
}

}  // namespace drocc
