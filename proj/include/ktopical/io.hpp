#pragma once

/// @file io.hpp
/// @brief JSON encodings of reports and the stochastic-game file format.
///
/// Objects are nlohmann::json, whose keys are kept sorted, so the dumped text
/// is stable. Node and component indices are written 1-based.

#include <istream>
#include <string>

#include <json.hpp>

#include "ktopical/dynamics.hpp"
#include "ktopical/mas.hpp"
#include "ktopical/models.hpp"
#include "ktopical/verify.hpp"

namespace ktopical {

using json = nlohmann::json;

inline json to_json(const DomainBox& b) {
    auto bound = [](double v) -> json {
        if (std::isfinite(v)) return v;
        return v > 0 ? "inf" : "-inf";
    };
    json lo = json::array(), hi = json::array();
    for (double v : b.lower()) lo.push_back(bound(v));
    for (double v : b.upper()) hi.push_back(bound(v));
    return {{"lower", lo}, {"upper", hi}};
}

inline json to_json(const ToleranceConfig& c) {
    return {{"eq_tol", c.eq_tol},
            {"strict_margin", c.strict_margin},
            {"fd_step", c.fd_step},
            {"convergence_tol", c.convergence_tol},
            {"max_horizon", c.max_horizon},
            {"dt", c.dt},
            {"stride", c.stride},
            {"window", c.window},
            {"divergence_bound", c.divergence_bound},
            {"max_period", c.max_period}};
}

inline json to_json(const SamplePlan& p) {
    return {{"seed", p.seed},
            {"n_points", p.n_points},
            {"n_pairs", p.n_pairs},
            {"box", to_json(p.box)},
            {"alphas", p.alphas}};
}

inline json to_json(const Witness& w) {
    json j{{"kind", w.kind}, {"points", w.points}, {"value", w.value}, {"margin", w.margin}};
    if (w.row) j["i"] = *w.row + 1;
    if (w.col) j["j"] = *w.col + 1;
    if (w.alpha) j["alpha"] = *w.alpha;
    if (w.time) j["time"] = *w.time;
    return j;
}

inline json to_json(const CheckResult& c) {
    json ws = json::array();
    for (const auto& w : c.witnesses) ws.push_back(to_json(w));
    json j{{"name", c.name},
           {"condition", c.condition},
           {"verdict", to_string(c.verdict)},
           {"sample_based", c.sample_based},
           {"samples", c.samples},
           {"skipped", c.skipped},
           {"violations", c.violations},
           {"witnesses", ws}};
    if (!c.note.empty()) j["note"] = c.note;
    return j;
}

inline json to_json(const VerificationReport& r) {
    json checks = json::array();
    for (const auto& c : r.checks) checks.push_back(to_json(c));
    json props = json::object();
    for (const auto& [k, v] : r.properties) props[k] = to_string(v);
    return {{"model", r.label},
            {"time_domain", to_string(r.time_domain)},
            {"verdict", to_string(r.overall())},
            {"properties", props},
            {"checks", checks},
            {"plan", to_json(r.plan)},
            {"tolerances", to_json(r.tolerances)}};
}

inline json to_json(const ConvergenceReport& r) {
    json j{{"outcome", to_string(r.outcome)},
           {"iterations_or_time", r.iterations_or_time},
           {"final_residual", std::isfinite(r.final_residual) ? json(r.final_residual) : json("inf")}};
    j["limit"] = r.limit ? json(*r.limit) : json(nullptr);
    j["period"] = r.period ? json(*r.period) : json(nullptr);
    return j;
}

inline json to_json(const Reachability& r) {
    auto one_based = [](const std::vector<std::size_t>& v) {
        json a = json::array();
        for (std::size_t x : v) a.push_back(x + 1);
        return a;
    };
    json per = json::array();
    for (const auto& s : r.influenced_by) per.push_back(one_based(s));
    return {{"globally_reachable", one_based(r.globally_reachable)},
            {"reached_from_all", one_based(r.reached_from_all)},
            {"influenced_by", per}};
}

inline json to_json(const ConsensusReport& r) {
    static constexpr const char* names[4] = {"i_monotone_sign_structure", "ii_plus_homogeneous",
                                             "iii_origin_equilibrium", "iv_globally_reachable_node"};
    json conds = json::object();
    for (std::size_t k = 0; k < 4; ++k)
        conds[names[k]] = {{"verdict", to_string(r.conditions[k].verdict)},
                           {"detail", r.conditions[k].detail}};
    json j{{"conditions", conds},
           {"outcome", to_string(r.outcome)},
           {"consensus_value", r.consensus_value ? json(*r.consensus_value) : json(nullptr)},
           {"width", {{"initial", r.initial_width},
                      {"final", r.final_width},
                      {"max_increase", r.max_width_increase}}},
           {"convergence", to_json(r.convergence)}};
    if (r.reach) j["reachability"] = to_json(*r.reach);
    if (r.structural) j["structural_checks"] = to_json(*r.structural);
    return j;
}

/// Game document:
/// {"states": [{"actions": [m1, m2], "rewards": [[r(a1,a2)...]...],
///              "transitions": [[[p_1..p_n]...]...]}, ...]}
/// rewards is m1 x m2; transitions is m1 x m2 x n.
inline StochasticGame game_from_json(const json& doc) {
    auto bad = [](const std::string& what) { throw InvalidModel("game: " + what); };
    if (!doc.is_object() || !doc.contains("states") || !doc["states"].is_array())
        bad("expected an object with a 'states' array");
    for (const auto& [k, v] : doc.items())
        if (k != "states") bad("unknown key '" + k + "'");
    StochasticGame gm;
    const std::size_t n = doc["states"].size();
    for (std::size_t i = 0; i < n; ++i) {
        const json& s = doc["states"][i];
        const std::string where = "state " + std::to_string(i + 1);
        for (const auto& [k, v] : s.items())
            if (k != "actions" && k != "rewards" && k != "transitions")
                bad(where + ": unknown key '" + k + "'");
        if (!s.contains("actions") || !s.contains("rewards") || !s.contains("transitions"))
            bad(where + ": needs 'actions', 'rewards' and 'transitions'");
        StochasticGame::State st;
        try {
            const auto acts = s["actions"].get<std::vector<std::size_t>>();
            if (acts.size() != 2) bad(where + ": 'actions' must be [m1, m2]");
            st.actions1 = acts[0];
            st.actions2 = acts[1];
            const auto rw = s["rewards"].get<std::vector<std::vector<double>>>();
            const auto tr = s["transitions"].get<std::vector<std::vector<std::vector<double>>>>();
            if (rw.size() != st.actions1 || tr.size() != st.actions1)
                bad(where + ": rewards/transitions must have m1 rows");
            for (std::size_t a1 = 0; a1 < st.actions1; ++a1) {
                if (rw[a1].size() != st.actions2 || tr[a1].size() != st.actions2)
                    bad(where + ": rewards/transitions rows must have m2 entries");
                for (std::size_t a2 = 0; a2 < st.actions2; ++a2) {
                    st.rewards.push_back(rw[a1][a2]);
                    st.transitions.push_back(tr[a1][a2]);
                }
            }
        } catch (const json::exception& e) {
            bad(where + ": " + e.what());
        }
        gm.states.push_back(std::move(st));
    }
    gm.validate();
    return gm;
}

inline StochasticGame parse_game(std::istream& in) {
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::exception& e) {
        throw InvalidModel(std::string("game: ") + e.what());
    }
    return game_from_json(doc);
}

}  // namespace ktopical
