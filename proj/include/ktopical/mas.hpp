#pragma once

/// @file mas.hpp
/// @brief Directed interaction graphs, multi-agent systems assembled from
/// per-agent coupling rules, the four consensus conditions and consensus runs.
///
/// Edge (i, j) means "agent i is influenced by agent j": j is a neighbor of i
/// and information flows from j to i. Node indices are 0-based in code and
/// 1-based in the edge-list file format.

#include <algorithm>
#include <array>
#include <functional>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <queue>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "ktopical/core.hpp"
#include "ktopical/dynamics.hpp"
#include "ktopical/verify.hpp"

namespace ktopical {

class DirectedGraph {
public:
    using Edge = std::pair<std::size_t, std::size_t>;

    DirectedGraph() = default;
    explicit DirectedGraph(std::size_t n) : n_(n), neighbors_(n) {
        if (n == 0) throw InvalidModel("graph must have at least one node");
    }
    DirectedGraph(std::size_t n, const std::vector<Edge>& edges) : DirectedGraph(n) {
        for (auto [i, j] : edges) add_edge(i, j);
    }

    /// i is influenced by j.
    void add_edge(std::size_t i, std::size_t j) {
        if (i >= n_ || j >= n_)
            throw InvalidModel("edge (" + std::to_string(i + 1) + "," + std::to_string(j + 1) +
                               ") references a node outside 1.." + std::to_string(n_));
        if (i == j) throw InvalidModel("self-loop on node " + std::to_string(i + 1) + " not allowed");
        if (edges_.insert({i, j}).second) {
            auto& nb = neighbors_[i];
            nb.insert(std::lower_bound(nb.begin(), nb.end(), j), j);
        }
    }

    std::size_t size() const { return n_; }
    const std::set<Edge>& edges() const { return edges_; }
    /// N_i, sorted.
    const std::vector<std::size_t>& neighbors(std::size_t i) const { return neighbors_.at(i); }
    bool has_edge(std::size_t i, std::size_t j) const { return edges_.count({i, j}) > 0; }

    static DirectedGraph complete(std::size_t n) {
        DirectedGraph g(n);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                if (i != j) g.add_edge(i, j);
        return g;
    }

    /// Agent i influenced by agent i+1 (mod n).
    static DirectedGraph cycle(std::size_t n) {
        DirectedGraph g(n);
        if (n >= 2)
            for (std::size_t i = 0; i < n; ++i) g.add_edge(i, (i + 1) % n);
        return g;
    }

    /// Parses `n <count>` followed by one 1-based `i j` pair per line.
    /// Blank lines and lines starting with '#' are ignored.
    static DirectedGraph parse(std::istream& in) {
        std::string line;
        std::size_t lineno = 0;
        std::optional<DirectedGraph> g;
        while (std::getline(in, line)) {
            ++lineno;
            std::istringstream ls(line);
            std::string first;
            if (!(ls >> first) || first[0] == '#') continue;
            auto fail = [&](const std::string& what) {
                throw InvalidModel("graph file line " + std::to_string(lineno) + ": " + what);
            };
            if (!g) {
                long count = 0;
                if (first != "n" || !(ls >> count) || count < 1)
                    fail("expected header 'n <count>'");
                g.emplace(static_cast<std::size_t>(count));
            } else {
                long i = 0, j = 0;
                std::istringstream es(line);
                if (!(es >> i >> j)) fail("expected 'i j'");
                std::string extra;
                if (es >> extra) fail("trailing content '" + extra + "'");
                if (i < 1 || j < 1) fail("node indices are 1-based");
                g->add_edge(static_cast<std::size_t>(i - 1), static_cast<std::size_t>(j - 1));
            }
        }
        if (!g) throw InvalidModel("graph file: missing header 'n <count>'");
        return *g;
    }

    void write(std::ostream& os) const {
        os << "n " << n_ << '\n';
        for (auto [i, j] : edges_) os << i + 1 << ' ' << j + 1 << '\n';
    }

private:
    std::size_t n_ = 0;
    std::set<Edge> edges_;
    std::vector<std::vector<std::size_t>> neighbors_;
};

/// Reachability along influence edges, in both orientations.
///
/// `influenced_by[i]` lists every node whose state can propagate to i (i
/// itself included). `globally_reachable` lists nodes whose information
/// reaches every agent: the orientation the consensus conditions need.
/// `reached_from_all` uses the opposite reading, nodes that every other
/// node's information reaches.
struct Reachability {
    std::vector<std::size_t> globally_reachable;
    std::vector<std::size_t> reached_from_all;
    std::vector<std::vector<std::size_t>> influenced_by;
};

inline Reachability reachability(const DirectedGraph& g) {
    const std::size_t n = g.size();
    Reachability out;
    out.influenced_by.resize(n);
    // forward search along i -> j for each edge (i, j)
    std::vector<std::vector<bool>> reach(n, std::vector<bool>(n, false));
    for (std::size_t s = 0; s < n; ++s) {
        std::queue<std::size_t> q;
        q.push(s);
        reach[s][s] = true;
        while (!q.empty()) {
            const std::size_t u = q.front();
            q.pop();
            for (std::size_t v : g.neighbors(u))
                if (!reach[s][v]) {
                    reach[s][v] = true;
                    q.push(v);
                }
        }
        for (std::size_t v = 0; v < n; ++v)
            if (reach[s][v]) out.influenced_by[s].push_back(v);
    }
    for (std::size_t r = 0; r < n; ++r) {
        bool to_all = true, from_all = true;
        for (std::size_t i = 0; i < n; ++i) {
            to_all = to_all && reach[i][r];
            from_all = from_all && reach[r][i];
        }
        if (to_all) out.globally_reachable.push_back(r);
        if (from_all) out.reached_from_all.push_back(r);
    }
    return out;
}

inline std::vector<std::size_t> globally_reachable_nodes(const DirectedGraph& g) {
    return reachability(g).globally_reachable;
}

// ---------------------------------------------------------------------------
// Local rules and assembly
// ---------------------------------------------------------------------------

/// Scalar coupling h_ij applied to the disagreement x_j - x_i.
struct Coupling {
    std::function<double(double)> h;
    std::function<double(double)> slope;  // h', empty if unknown
    std::optional<double> slope_sup;      // sup h', when known analytically
    std::string label;
};

inline Coupling identity_coupling() {
    return {[](double d) { return d; }, [](double) { return 1.0; }, 1.0, "linear"};
}

/// f_i(x_i, x_{N_i}), neighbors in the sorted order of N_i.
using GeneralRule = std::function<double(double, std::span<const double>)>;

/// Protocol of one agent: either the coupling sum over its neighbors or a
/// general rule. `epsilon` is the step gain used in discrete time.
struct LocalRule {
    std::size_t agent = 0;
    std::map<std::size_t, Coupling> couplings;
    GeneralRule general;
    double epsilon = 0.0;

    std::size_t degree() const { return couplings.size(); }
};

/// One rule per agent, the same coupling on every edge.
inline std::vector<LocalRule> uniform_rules(const DirectedGraph& g, const Coupling& h,
                                            double epsilon = 0.0) {
    std::vector<LocalRule> rules(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) {
        rules[i].agent = i;
        rules[i].epsilon = epsilon;
        for (std::size_t j : g.neighbors(i)) rules[i].couplings[j] = h;
    }
    return rules;
}

struct MasDefinition {
    DirectedGraph graph;
    std::vector<LocalRule> rules;
    TimeDomain time_domain = TimeDomain::continuous;
    DomainBox domain;
    std::string label = "mas";
};

namespace detail {

inline void validate_mas(const MasDefinition& mas) {
    const std::size_t n = mas.graph.size();
    if (mas.rules.size() != n)
        throw InvalidModel("expected one local rule per agent (" + std::to_string(n) + "), got " +
                           std::to_string(mas.rules.size()));
    if (mas.domain.dim() != n) throw DimensionError(n, mas.domain.dim());
    for (std::size_t i = 0; i < n; ++i) {
        const auto& r = mas.rules[i];
        if (r.agent != i)
            throw InvalidModel("rule " + std::to_string(i + 1) + " is declared for agent " +
                               std::to_string(r.agent + 1));
        if (r.general) continue;
        for (std::size_t j : mas.graph.neighbors(i)) {
            auto it = r.couplings.find(j);
            if (it == r.couplings.end() || !it->second.h)
                throw InvalidModel("missing coupling for edge (" + std::to_string(i + 1) + "," +
                                   std::to_string(j + 1) + ")");
        }
        for (const auto& [j, c] : r.couplings)
            if (!mas.graph.has_edge(i, j))
                throw InvalidModel("coupling given for non-edge (" + std::to_string(i + 1) + "," +
                                   std::to_string(j + 1) + ")");
        if (mas.time_domain == TimeDomain::discrete && !(r.epsilon > 0.0))
            throw InvalidModel("agent " + std::to_string(i + 1) + ": discrete-time gain must be > 0");
    }
}

}  // namespace detail

/// Builds the global system:
///   continuous  f_i(x) = sum_{j in N_i} h_ij(x_j - x_i)
///   discrete    f_i(x) = x_i + eps_i sum_{j in N_i} h_ij(x_j - x_i)
/// General rules are used as f_i directly. An analytic Jacobian is attached
/// when every coupling supplies its slope and no general rule is present.
inline SystemDefinition assemble(const MasDefinition& mas) {
    detail::validate_mas(mas);
    const bool discrete = mas.time_domain == TimeDomain::discrete;
    const std::size_t n = mas.graph.size();

    SystemDefinition sys;
    sys.time_domain = mas.time_domain;
    sys.dim = n;
    sys.domain = mas.domain;
    sys.label = mas.label;
    sys.eval = [mas, discrete, n](std::span<const double> x) {
        StateVector f(n);
        std::vector<double> nb;
        for (std::size_t i = 0; i < n; ++i) {
            const auto& r = mas.rules[i];
            if (r.general) {
                nb.clear();
                for (std::size_t j : mas.graph.neighbors(i)) nb.push_back(x[j]);
                f[i] = r.general(x[i], nb);
                continue;
            }
            double u = 0.0;
            for (const auto& [j, c] : r.couplings) u += c.h(x[j] - x[i]);
            f[i] = discrete ? x[i] + r.epsilon * u : u;
        }
        return f;
    };

    bool analytic = true;
    for (const auto& r : mas.rules) {
        if (r.general) analytic = false;
        for (const auto& [j, c] : r.couplings) analytic = analytic && static_cast<bool>(c.slope);
    }
    if (analytic) {
        sys.jacobian = [mas, discrete, n](std::span<const double> x) {
            Matrix J(n, n);
            for (std::size_t i = 0; i < n; ++i) {
                const auto& r = mas.rules[i];
                const double gain = discrete ? r.epsilon : 1.0;
                double diag = discrete ? 1.0 : 0.0;
                for (const auto& [j, c] : r.couplings) {
                    const double s = c.slope(x[j] - x[i]);
                    J(i, j) += gain * s;
                    diag -= gain * s;
                }
                J(i, i) += diag;
            }
            return J;
        };
    }
    return sys;
}

// ---------------------------------------------------------------------------
// Consensus
// ---------------------------------------------------------------------------

/// Strict upper bound on eps_i for a nonnegative Jacobian with positive
/// diagonal: 1 / (|N_i| * slope_sup). Infinite for an agent with no neighbors.
inline double epsilon_bound(const LocalRule& rule, double slope_sup) {
    if (!(slope_sup > 0.0)) throw InvalidModel("slope supremum must be > 0");
    if (rule.degree() == 0) return std::numeric_limits<double>::infinity();
    return 1.0 / (static_cast<double>(rule.degree()) * slope_sup);
}

/// Same bound from the analytic slope suprema of the rule's couplings,
/// 1 / sum_j sup h_ij'. Reduces to the formula above for uniform couplings.
inline double epsilon_bound(const LocalRule& rule) {
    if (rule.degree() == 0) return std::numeric_limits<double>::infinity();
    double total = 0.0;
    for (const auto& [j, c] : rule.couplings) {
        if (!c.slope_sup) throw InvalidModel("coupling '" + c.label + "' has no analytic slope bound");
        if (!(*c.slope_sup > 0.0)) throw InvalidModel("slope supremum must be > 0");
        total += *c.slope_sup;
    }
    return 1.0 / total;
}

enum class ConsensusOutcome { consensus, equilibrium_non_consensus, no_convergence };

inline const char* to_string(ConsensusOutcome o) {
    switch (o) {
        case ConsensusOutcome::consensus: return "consensus";
        case ConsensusOutcome::equilibrium_non_consensus: return "equilibrium_non_consensus";
        case ConsensusOutcome::no_convergence: return "no_convergence";
    }
    return "?";
}

struct ConditionResult {
    Verdict verdict = Verdict::inconclusive;
    std::string detail;
};

struct ConsensusReport {
    /// (i) monotonicity sign structure, (ii) plus-homogeneity,
    /// (iii) f(0) = 0 (discrete) / f(0) = 0 (continuous), (iv) a globally
    /// reachable node exists.
    std::array<ConditionResult, 4> conditions;
    std::optional<VerificationReport> structural;
    std::optional<Reachability> reach;

    ConsensusOutcome outcome = ConsensusOutcome::no_convergence;
    std::optional<double> consensus_value;
    double final_width = 0.0;
    double initial_width = 0.0;
    double max_width_increase = 0.0;
    ConvergenceReport convergence;

    bool conditions_hold() const {
        for (const auto& c : conditions)
            if (c.verdict != Verdict::pass) return false;
        return true;
    }
};

inline ConsensusReport check_consensus_conditions(const MasDefinition& mas, const SamplePlan& plan,
                                                  const ToleranceConfig& cfg) {
    const SystemDefinition sys = assemble(mas);
    ConsensusReport rep;

    VerificationReport structural = sys.is_discrete() ? check_nonneg_posdiag_dt(sys, plan, cfg)
                                                      : check_metzler_ct(sys, plan, cfg);
    rep.conditions[0] = {structural.overall(),
                         sys.is_discrete()
                             ? "nonnegative Jacobian with positive diagonal (sample-based)"
                             : "Metzler Jacobian (sample-based)"};
    auto ph = check_plus_homogeneity(sys, plan, cfg);
    rep.conditions[1] = {ph.overall(), sys.is_discrete() ? "f_i(x + a) = f_i(x) + a (sample-based)"
                                                         : "f_i(x + a) = f_i(x) (sample-based)"};
    structural.append(ph);
    rep.structural = std::move(structural);

    const StateVector zero(sys.dim, 0.0);
    const double r0 = sup_norm(evaluate(sys, zero));
    rep.conditions[2] = {r0 < cfg.eq_tol ? Verdict::pass : Verdict::fail,
                         "|f(0)|_inf = " + format_real(r0)};

    rep.reach = reachability(mas.graph);
    std::string nodes;
    for (std::size_t r : rep.reach->globally_reachable)
        nodes += (nodes.empty() ? "" : ",") + std::to_string(r + 1);
    rep.conditions[3] = {rep.reach->globally_reachable.empty() ? Verdict::fail : Verdict::pass,
                         "globally reachable nodes: {" + nodes + "}"};
    return rep;
}

struct ConsensusRun {
    ConsensusReport report;
    Trajectory trajectory;
};

/// Simulates the assembled system from xi. The run settles when consecutive
/// samples differ by less than 1e-3 * convergence_tol; the limit counts as
/// consensus when its width is below convergence_tol.
inline ConsensusRun simulate_consensus(const MasDefinition& mas, std::span<const double> xi,
                                       const ToleranceConfig& cfg) {
    const SystemDefinition sys = assemble(mas);
    ToleranceConfig settle = cfg;
    settle.convergence_tol = cfg.convergence_tol * 1e-3;
    auto sim = simulate(sys, xi, settle);

    ConsensusRun run;
    auto& rep = run.report;
    rep.convergence = sim.report;
    const auto& states = sim.trajectory.states;
    rep.initial_width = width(states.front());
    rep.final_width = width(states.back());
    for (std::size_t k = 1; k < states.size(); ++k)
        rep.max_width_increase =
            std::max(rep.max_width_increase, width(states[k]) - width(states[k - 1]));

    if (sim.report.outcome == Outcome::converged) {
        const StateVector& lim = *sim.report.limit;
        if (width(lim) < cfg.convergence_tol) {
            rep.outcome = ConsensusOutcome::consensus;
            rep.consensus_value = mean(lim);
        } else {
            rep.outcome = ConsensusOutcome::equilibrium_non_consensus;
        }
    } else {
        rep.outcome = ConsensusOutcome::no_convergence;
    }
    run.trajectory = std::move(sim.trajectory);
    return run;
}

inline ConsensusReport run_consensus(const MasDefinition& mas, std::span<const double> xi,
                                     const ToleranceConfig& cfg) {
    return simulate_consensus(mas, xi, cfg).report;
}

}  // namespace ktopical
