#pragma once

/// @file app.hpp
/// @brief Config-driven commands behind the `ktopical` executable:
/// verify, simulate, consensus and sweep.
///
/// Exit codes: 0 success (K-topical pass / consensus reached), 2 a check or
/// condition failed, 1 usage or configuration error. On exit 1 nothing is
/// written to the output directory.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <numbers>
#include <mutex>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "ktopical/io.hpp"

namespace ktopical::app {

namespace fs = std::filesystem;

/// Configuration problem; the message names the offending key.
class ConfigError : public Error {
public:
    using Error::Error;
};

enum class Command { verify, simulate, consensus, sweep };

struct CommandOptions {
    fs::path config;
    fs::path out_dir = ".";
    int jobs = 1;
    std::optional<std::uint64_t> seed;
};

namespace detail {

inline void allow_keys(const json& obj, const std::string& path,
                       std::initializer_list<const char*> keys) {
    if (!obj.is_object()) throw ConfigError("'" + path + "' must be an object");
    for (const auto& [k, v] : obj.items()) {
        bool ok = false;
        for (const char* a : keys) ok = ok || k == a;
        if (!ok) throw ConfigError("unknown key '" + (path.empty() ? k : path + "." + k) + "'");
    }
}

inline const json& need(const json& obj, const std::string& path, const char* key) {
    if (!obj.contains(key))
        throw ConfigError("missing key '" + (path.empty() ? std::string(key) : path + "." + key) + "'");
    return obj.at(key);
}

template <class T>
T get(const json& obj, const std::string& path, const char* key) {
    const std::string full = path.empty() ? std::string(key) : path + "." + key;
    try {
        return need(obj, path, key).get<T>();
    } catch (const json::exception&) {
        throw ConfigError("key '" + full + "' has the wrong type");
    }
}

template <class T>
T get_or(const json& obj, const std::string& path, const char* key, T fallback) {
    return obj.contains(key) ? get<T>(obj, path, key) : fallback;
}

inline TimeDomain parse_time_domain(const json& obj, const std::string& path) {
    const auto s = get_or<std::string>(obj, path, "time_domain", "continuous");
    if (s == "continuous") return TimeDomain::continuous;
    if (s == "discrete") return TimeDomain::discrete;
    throw ConfigError("key '" + path + ".time_domain' must be 'continuous' or 'discrete'");
}

inline std::ifstream open_input(const fs::path& p, const std::string& key) {
    std::ifstream in(p);
    if (!in) throw ConfigError("key '" + key + "': cannot open file '" + p.string() + "'");
    return in;
}

inline double parse_entry(const json& v, const std::string& key) {
    if (v.is_number()) return v.get<double>();
    if (v.is_string() && v.get<std::string>() == "-inf") return -std::numeric_limits<double>::infinity();
    throw ConfigError("key '" + key + "': entries must be numbers or \"-inf\"");
}

inline std::vector<std::vector<double>> parse_rows(const json& v, const std::string& key) {
    if (!v.is_array() || v.empty()) throw ConfigError("key '" + key + "' must be a non-empty matrix");
    std::vector<std::vector<double>> rows;
    for (const auto& r : v) {
        if (!r.is_array()) throw ConfigError("key '" + key + "' must be an array of rows");
        rows.emplace_back();
        for (const auto& e : r) rows.back().push_back(parse_entry(e, key));
    }
    return rows;
}

inline Matrix to_matrix(const std::vector<std::vector<double>>& rows, const std::string& key) {
    Matrix m(rows.size(), rows.front().size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].size() != m.cols()) throw ConfigError("key '" + key + "': ragged matrix");
        for (std::size_t j = 0; j < m.cols(); ++j) m(i, j) = rows[i][j];
    }
    return m;
}

}  // namespace detail

/// Parsed configuration document (version 1).
struct RunConfig {
    json model;
    json sweep;
    fs::path base_dir;
    SamplePlan plan;
    ToleranceConfig tolerances;
    std::optional<StateVector> initial;
    std::optional<double> flow_horizon;
    TimeDomain time_domain = TimeDomain::continuous;
    std::size_t dim = 0;
};

/// A model built from the config, with its multi-agent structure when it has one.
struct BuiltModel {
    SystemDefinition system;
    std::optional<MasDefinition> mas;
    std::optional<MaxPlusMatrix> max_plus_matrix;
};

namespace detail {

inline DirectedGraph parse_graph(const json& m, const RunConfig& cfg) {
    if (m.contains("graph_file")) {
        const fs::path p = cfg.base_dir / get<std::string>(m, "model", "graph_file");
        auto in = open_input(p, "model.graph_file");
        try {
            return DirectedGraph::parse(in);
        } catch (const InvalidModel& e) {
            throw ConfigError(std::string("key 'model.graph_file': ") + e.what());
        }
    }
    const json& g = need(m, "model", "graph");
    allow_keys(g, "model.graph", {"n", "edges"});
    const auto n = get<long>(g, "model.graph", "n");
    if (n < 1) throw ConfigError("key 'model.graph.n' must be >= 1");
    DirectedGraph graph(static_cast<std::size_t>(n));
    const auto edges = get_or<std::vector<std::vector<long>>>(g, "model.graph", "edges", {});
    for (const auto& e : edges) {
        if (e.size() != 2 || e[0] < 1 || e[1] < 1)
            throw ConfigError("key 'model.graph.edges': expected 1-based pairs [i, j]");
        try {
            graph.add_edge(static_cast<std::size_t>(e[0] - 1), static_cast<std::size_t>(e[1] - 1));
        } catch (const InvalidModel& ex) {
            throw ConfigError(std::string("key 'model.graph.edges': ") + ex.what());
        }
    }
    return graph;
}

inline MaxPlusMatrix parse_max_plus(const json& m, const RunConfig& cfg) {
    try {
        if (m.contains("matrix_file")) {
            auto in = open_input(cfg.base_dir / get<std::string>(m, "model", "matrix_file"),
                                 "model.matrix_file");
            return MaxPlusMatrix::parse(in);
        }
        auto a = MaxPlusMatrix::from_rows(parse_rows(need(m, "model", "matrix"), "model.matrix"));
        a.validate();
        return a;
    } catch (const ConfigError&) {
        throw;
    } catch (const Error& e) {
        throw ConfigError(std::string("key 'model.matrix': ") + e.what());
    }
}

inline std::vector<double> parse_eps(const json& m, std::size_t n) {
    const json& e = need(m, "model", "epsilon");
    if (e.is_number()) return std::vector<double>(n, e.get<double>());
    auto v = get<std::vector<double>>(m, "model", "epsilon");
    if (v.size() != n) throw ConfigError("key 'model.epsilon' needs one gain per agent");
    return v;
}

}  // namespace detail

/// Builds the model described by `cfg.model`. Constructor refusals (for
/// example a gain above its bound) surface as ConfigError.
inline BuiltModel build_model(const RunConfig& cfg) {
    using namespace detail;
    const json& m = cfg.model;
    const auto type = get<std::string>(m, "model", "type");
    BuiltModel out;
    try {
        if (type == "linear_consensus") {
            allow_keys(m, "model", {"type", "graph", "graph_file", "time_domain", "epsilon", "weights"});
            const DirectedGraph g = parse_graph(m, cfg);
            const TimeDomain td = parse_time_domain(m, "model");
            std::map<DirectedGraph::Edge, double> w;
            for (const auto& e : get_or<std::vector<std::vector<double>>>(m, "model", "weights", {})) {
                if (e.size() != 3 || e[0] < 1 || e[1] < 1)
                    throw ConfigError("key 'model.weights': expected [i, j, w] with 1-based nodes");
                w[{static_cast<std::size_t>(e[0]) - 1, static_cast<std::size_t>(e[1]) - 1}] = e[2];
            }
            std::vector<double> eps;
            if (td == TimeDomain::discrete) eps = parse_eps(m, g.size());
            out.mas = linear_consensus_mas(g, w, td, eps);
        } else if (type == "saturated_consensus") {
            allow_keys(m, "model", {"type", "graph", "graph_file", "time_domain", "epsilon", "s", "m"});
            const DirectedGraph g = parse_graph(m, cfg);
            const TimeDomain td = parse_time_domain(m, "model");
            SaturatedCouplingParams p{get_or<double>(m, "model", "s", 1.0),
                                      get_or<double>(m, "model", "m", 2.0)};
            const double eps = td == TimeDomain::discrete ? get<double>(m, "model", "epsilon") : 0.0;
            out.mas = saturated_consensus_mas(g, p, td, eps);
        } else if (type == "kuramoto") {
            allow_keys(m, "model", {"type", "graph", "graph_file", "box", "alpha", "coupling"});
            const DirectedGraph g = parse_graph(m, cfg);
            const auto box = get<std::vector<double>>(m, "model", "box");
            if (box.size() != 2) throw ConfigError("key 'model.box' must be [a, b]");
            if (get_or<std::string>(m, "model", "coupling", "sin") != "sin")
                throw ConfigError("key 'model.coupling': only \"sin\" is available");
            const double alpha = get_or<double>(m, "model", "alpha", std::numbers::pi / 2);
            out.mas = kuramoto_mas(g, sine_coupling(), DomainBox::cube(g.size(), box[0], box[1]), alpha);
        } else if (type == "max_plus" || type == "smooth_max_plus") {
            if (type == "max_plus")
                allow_keys(m, "model", {"type", "matrix", "matrix_file"});
            else
                allow_keys(m, "model", {"type", "matrix", "matrix_file", "alpha"});
            out.max_plus_matrix = parse_max_plus(m, cfg);
            out.system = type == "max_plus"
                             ? max_plus(*out.max_plus_matrix)
                             : smooth_max_plus(*out.max_plus_matrix, get<double>(m, "model", "alpha"));
        } else if (type == "shapley") {
            allow_keys(m, "model", {"type", "game", "game_file"});
            if (m.contains("game_file")) {
                auto in = open_input(cfg.base_dir / get<std::string>(m, "model", "game_file"),
                                     "model.game_file");
                out.system = shapley(parse_game(in));
            } else {
                out.system = shapley(game_from_json(need(m, "model", "game")));
            }
        } else if (type == "swap") {
            allow_keys(m, "model", {"type"});
            out.system = swap_map();
        } else if (type == "rotation") {
            allow_keys(m, "model", {"type"});
            out.system = rotation_field();
        } else if (type == "square") {
            allow_keys(m, "model", {"type", "n", "time_domain"});
            out.system = square_map(get_or<std::size_t>(m, "model", "n", 2),
                                    parse_time_domain(m, "model"));
        } else if (type == "shift") {
            allow_keys(m, "model", {"type", "n", "c"});
            out.system = shift_map(get_or<std::size_t>(m, "model", "n", 1),
                                   get_or<double>(m, "model", "c", 1.0));
        } else if (type == "permutation") {
            allow_keys(m, "model", {"type", "perm"});
            auto perm = get<std::vector<std::size_t>>(m, "model", "perm");
            for (auto& p : perm) {
                if (p < 1) throw ConfigError("key 'model.perm' is 1-based");
                --p;
            }
            out.system = permutation_map(perm);
        } else if (type == "linear_map" || type == "linear_field") {
            allow_keys(m, "model", {"type", "matrix"});
            const Matrix a = to_matrix(parse_rows(need(m, "model", "matrix"), "model.matrix"),
                                       "model.matrix");
            out.system = type == "linear_map" ? linear_map(a) : linear_field(a);
        } else {
            throw ConfigError("key 'model.type': unknown model '" + type + "'");
        }
    } catch (const ConfigError&) {
        throw;
    } catch (const Error& e) {
        throw ConfigError(std::string("model: ") + e.what());
    }
    if (out.mas) out.system = assemble(*out.mas);
    return out;
}

namespace detail {

inline std::size_t model_dim_and_domain(RunConfig& cfg) {
    const BuiltModel b = build_model(cfg);
    cfg.time_domain = b.system.time_domain;
    return b.system.dim;
}

}  // namespace detail

inline RunConfig load_config(const CommandOptions& opts) {
    using namespace detail;
    std::ifstream in(opts.config);
    if (!in) throw ConfigError("cannot open config file '" + opts.config.string() + "'");
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    allow_keys(doc, "", {"version", "model", "time", "plan", "tolerances", "initial", "sweep", "verify"});
    if (get<int>(doc, "", "version") != 1) throw ConfigError("key 'version' must be 1");

    RunConfig cfg;
    cfg.base_dir = opts.config.has_parent_path() ? opts.config.parent_path() : fs::path(".");
    cfg.model = need(doc, "", "model");
    if (!cfg.model.is_object()) throw ConfigError("'model' must be an object");
    cfg.dim = model_dim_and_domain(cfg);

    cfg.tolerances = cfg.time_domain == TimeDomain::discrete ? ToleranceConfig::discrete()
                                                             : ToleranceConfig::continuous();
    if (doc.contains("time")) {
        const json& t = doc["time"];
        allow_keys(t, "time", {"dt", "stride", "horizon"});
        cfg.tolerances.dt = get_or(t, "time", "dt", cfg.tolerances.dt);
        cfg.tolerances.stride = get_or(t, "time", "stride", cfg.tolerances.stride);
        cfg.tolerances.max_horizon = get_or(t, "time", "horizon", cfg.tolerances.max_horizon);
    }
    if (doc.contains("tolerances")) {
        const json& t = doc["tolerances"];
        allow_keys(t, "tolerances", {"eq_tol", "strict_margin", "fd_step", "convergence_tol", "window",
                                     "divergence_bound", "max_period"});
        auto& c = cfg.tolerances;
        c.eq_tol = get_or(t, "tolerances", "eq_tol", c.eq_tol);
        c.strict_margin = get_or(t, "tolerances", "strict_margin", c.strict_margin);
        c.fd_step = get_or(t, "tolerances", "fd_step", c.fd_step);
        c.convergence_tol = get_or(t, "tolerances", "convergence_tol", c.convergence_tol);
        c.window = get_or(t, "tolerances", "window", c.window);
        c.divergence_bound = get_or(t, "tolerances", "divergence_bound", c.divergence_bound);
        c.max_period = get_or(t, "tolerances", "max_period", c.max_period);
    }
    try {
        cfg.tolerances.validate();
    } catch (const InvalidModel& e) {
        throw ConfigError(std::string("tolerances: ") + e.what());
    }

    cfg.plan = SamplePlan::standard(cfg.dim);
    if (doc.contains("plan")) {
        const json& p = doc["plan"];
        allow_keys(p, "plan", {"seed", "n_points", "n_pairs", "box", "alphas"});
        cfg.plan.seed = get_or<std::uint64_t>(p, "plan", "seed", cfg.plan.seed);
        cfg.plan.n_points = get_or(p, "plan", "n_points", cfg.plan.n_points);
        cfg.plan.n_pairs = get_or(p, "plan", "n_pairs", cfg.plan.n_pairs);
        cfg.plan.alphas = get_or(p, "plan", "alphas", cfg.plan.alphas);
        if (p.contains("box")) {
            const json& b = p["box"];
            try {
                if (b.is_array()) {
                    const auto ab = b.get<std::vector<double>>();
                    if (ab.size() != 2) throw ConfigError("key 'plan.box' must be [lo, hi]");
                    cfg.plan.box = DomainBox::cube(cfg.dim, ab[0], ab[1]);
                } else {
                    allow_keys(b, "plan.box", {"lower", "upper"});
                    cfg.plan.box = DomainBox(get<StateVector>(b, "plan.box", "lower"),
                                             get<StateVector>(b, "plan.box", "upper"));
                }
            } catch (const ConfigError&) {
                throw;
            } catch (const Error& e) {
                throw ConfigError(std::string("key 'plan.box': ") + e.what());
            }
        }
    }
    if (opts.seed) cfg.plan.seed = *opts.seed;
    if (cfg.plan.box.dim() != cfg.dim) throw ConfigError("key 'plan.box': dimension mismatch");
    try {
        cfg.plan.validate();
    } catch (const InvalidModel& e) {
        throw ConfigError(std::string("plan: ") + e.what());
    }

    if (doc.contains("initial")) {
        cfg.initial = get<StateVector>(doc, "", "initial");
        if (cfg.initial->size() != cfg.dim)
            throw ConfigError("key 'initial' must have " + std::to_string(cfg.dim) + " components");
    }
    if (doc.contains("verify")) {
        allow_keys(doc["verify"], "verify", {"flow_horizon"});
        if (doc["verify"].contains("flow_horizon"))
            cfg.flow_horizon = get<double>(doc["verify"], "verify", "flow_horizon");
    }
    if (doc.contains("sweep")) cfg.sweep = doc["sweep"];
    return cfg;
}

namespace detail {

/// Writes all files after every computation has succeeded.
inline void write_outputs(const fs::path& dir,
                          const std::vector<std::pair<std::string, std::string>>& files) {
    fs::create_directories(dir);
    for (const auto& [name, text] : files) {
        std::ofstream out(dir / name, std::ios::binary);
        if (!out) throw Error("cannot write '" + (dir / name).string() + "'");
        out << text;
    }
}

inline std::string dump(const json& j) { return j.dump(2) + "\n"; }

inline std::string csv(const Trajectory& t) {
    std::ostringstream os;
    write_csv(os, t);
    return os.str();
}

inline StateVector need_initial(const RunConfig& cfg) {
    if (!cfg.initial) throw ConfigError("missing key 'initial'");
    return *cfg.initial;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Commands
// ---------------------------------------------------------------------------

inline int cmd_verify(const RunConfig& cfg, const fs::path& out_dir, std::ostream& log) {
    const BuiltModel m = build_model(cfg);
    VerificationReport rep = classify(m.system, cfg.plan, cfg.tolerances);
    if (cfg.flow_horizon) rep.append(test_flow_properties(m.system, cfg.plan, *cfg.flow_horizon, cfg.tolerances));
    detail::write_outputs(out_dir, {{"verify.json", detail::dump(to_json(rep))}});
    const bool ok = rep.overall() == Verdict::pass && rep.verdict("k_topical") == Verdict::pass;
    log << m.system.label << ": k_topical " << to_string(rep.verdict("k_topical")) << ", overall "
        << to_string(rep.overall()) << '\n';
    return ok ? 0 : 2;
}

inline int cmd_simulate(const RunConfig& cfg, const fs::path& out_dir, std::ostream& log) {
    const BuiltModel m = build_model(cfg);
    const StateVector xi = detail::need_initial(cfg);
    const auto sim = simulate(m.system, xi, cfg.tolerances);
    json rep = to_json(sim.report);
    rep["model"] = m.system.label;
    rep["time_domain"] = to_string(m.system.time_domain);
    rep["initial"] = xi;
    rep["tolerances"] = to_json(cfg.tolerances);
    detail::write_outputs(out_dir, {{"trajectory.csv", detail::csv(sim.trajectory)},
                                    {"simulation.json", detail::dump(rep)}});
    log << m.system.label << ": " << to_string(sim.report.outcome) << '\n';
    return 0;
}

inline int cmd_consensus(const RunConfig& cfg, const fs::path& out_dir, std::ostream& log) {
    const BuiltModel m = build_model(cfg);
    if (!m.mas) throw ConfigError("key 'model.type': consensus needs a multi-agent model");
    const StateVector xi = detail::need_initial(cfg);
    ConsensusReport conds = check_consensus_conditions(*m.mas, cfg.plan, cfg.tolerances);
    ConsensusRun run = simulate_consensus(*m.mas, xi, cfg.tolerances);
    run.report.conditions = conds.conditions;
    run.report.structural = std::move(conds.structural);
    run.report.reach = std::move(conds.reach);
    json rep = to_json(run.report);
    rep["model"] = m.system.label;
    rep["time_domain"] = to_string(m.system.time_domain);
    rep["initial"] = xi;
    detail::write_outputs(out_dir, {{"consensus.json", detail::dump(rep)},
                                    {"trajectory.csv", detail::csv(run.trajectory)}});
    log << m.system.label << ": " << to_string(run.report.outcome) << '\n';
    const bool ok = run.report.conditions_hold() && run.report.outcome == ConsensusOutcome::consensus;
    return ok ? 0 : 2;
}

struct SweepRow {
    double value = 0.0;
    std::string outcome;
    double iterations_or_time = 0.0;
    double final_width = 0.0;
    double final_residual = 0.0;
    std::optional<double> gap;
    std::optional<double> consensus_value;
};

/// Sweeps one axis: "epsilon" (discrete consensus gains), "alpha"
/// (smoothing of a max-plus model) or "seed" (random initial conditions in
/// the plan box). Rows come out in the order of the declared values.
inline int cmd_sweep(const RunConfig& cfg, const fs::path& out_dir, int jobs, std::ostream& log) {
    using namespace detail;
    if (cfg.sweep.is_null()) throw ConfigError("missing key 'sweep'");
    allow_keys(cfg.sweep, "sweep", {"axis", "values"});
    const auto axis = get<std::string>(cfg.sweep, "sweep", "axis");
    const auto values = get<std::vector<double>>(cfg.sweep, "sweep", "values");
    if (values.empty()) throw ConfigError("key 'sweep.values' is empty");
    if (axis != "epsilon" && axis != "alpha" && axis != "seed")
        throw ConfigError("key 'sweep.axis' must be 'epsilon', 'alpha' or 'seed'");
    const auto type = get<std::string>(cfg.model, "model", "type");
    if (axis == "alpha" && type != "smooth_max_plus")
        throw ConfigError("key 'sweep.axis': alpha sweeps need a smooth_max_plus model");
    if (axis == "epsilon" && (!cfg.model.contains("time_domain") ||
                              cfg.model["time_domain"] != "discrete"))
        throw ConfigError("key 'sweep.axis': epsilon sweeps need a discrete-time consensus model");

    // Build every run up front so that refusals exit before any work or output.
    struct Job {
        BuiltModel model;
        StateVector xi;
    };
    std::vector<Job> work;
    for (double v : values) {
        RunConfig c = cfg;
        if (axis == "epsilon") c.model["epsilon"] = v;
        if (axis == "alpha") c.model["alpha"] = v;
        StateVector xi;
        if (axis == "seed") {
            if (v < 0 || v != std::floor(v)) throw ConfigError("key 'sweep.values': seeds must be integers >= 0");
            ktopical::detail::Sampler s(ktopical::detail::sub_seed(static_cast<std::uint64_t>(v), "sweep.initial"));
            xi = ktopical::detail::sample_point(s, cfg.plan.box);
        } else {
            xi = need_initial(cfg);
        }
        work.push_back({build_model(c), std::move(xi)});
    }

    std::vector<SweepRow> rows(work.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t k = next++; k < work.size(); k = next++) {
            const Job& job = work[k];
            SweepRow& row = rows[k];
            row.value = values[k];
            if (job.model.mas) {
                const auto run = simulate_consensus(*job.model.mas, job.xi, cfg.tolerances);
                row.outcome = to_string(run.report.outcome);
                row.iterations_or_time = run.report.convergence.iterations_or_time;
                row.final_width = run.report.final_width;
                row.final_residual = run.report.convergence.final_residual;
                row.consensus_value = run.report.consensus_value;
            } else {
                const auto sim = simulate(job.model.system, job.xi, cfg.tolerances);
                const StateVector& last = sim.trajectory.states.back();
                row.outcome = to_string(sim.report.outcome);
                row.iterations_or_time = sim.report.iterations_or_time;
                row.final_width = width(last);
                row.final_residual = sim.report.final_residual;
                if (job.model.max_plus_matrix && axis == "alpha")
                    row.gap = sup_metric(evaluate(job.model.system, last),
                                         evaluate(max_plus(*job.model.max_plus_matrix), last));
            }
        }
    };
    const int n_threads = std::max(1, std::min<int>(jobs, static_cast<int>(work.size())));
    std::vector<std::thread> pool;
    for (int t = 1; t < n_threads; ++t) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();

    std::ostringstream csv;
    csv << axis << ",outcome,iterations_or_time,final_width,final_residual,gap\n";
    json jrows = json::array();
    for (const auto& r : rows) {
        csv << format_real(r.value) << ',' << r.outcome << ',' << format_real(r.iterations_or_time)
            << ',' << format_real(r.final_width) << ',' << format_real(r.final_residual) << ','
            << (r.gap ? format_real(*r.gap) : "") << '\n';
        json j{{axis, r.value},
               {"outcome", r.outcome},
               {"iterations_or_time", r.iterations_or_time},
               {"final_width", r.final_width},
               {"final_residual", std::isfinite(r.final_residual) ? json(r.final_residual) : json("inf")},
               {"gap", r.gap ? json(*r.gap) : json(nullptr)},
               {"consensus_value", r.consensus_value ? json(*r.consensus_value) : json(nullptr)}};
        jrows.push_back(std::move(j));
    }
    json summary{{"axis", axis},
                 {"model", cfg.model},
                 {"plan", to_json(cfg.plan)},
                 {"tolerances", to_json(cfg.tolerances)},
                 {"rows", jrows}};
    write_outputs(out_dir, {{"sweep.csv", csv.str()}, {"sweep.json", dump(summary)}});
    log << "sweep over " << axis << ": " << rows.size() << " runs\n";
    return 0;
}

/// Loads the config and dispatches. Configuration errors return 1 with the
/// message on `err`.
inline int run_command(Command cmd, const CommandOptions& opts, std::ostream& log,
                       std::ostream& err) {
    try {
        const RunConfig cfg = load_config(opts);
        switch (cmd) {
            case Command::verify: return cmd_verify(cfg, opts.out_dir, log);
            case Command::simulate: return cmd_simulate(cfg, opts.out_dir, log);
            case Command::consensus: return cmd_consensus(cfg, opts.out_dir, log);
            case Command::sweep: return cmd_sweep(cfg, opts.out_dir, opts.jobs, log);
        }
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::filesystem::filesystem_error& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }
    return 1;
}

}  // namespace ktopical::app
