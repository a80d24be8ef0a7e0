#pragma once

/// @file verify.hpp
/// @brief Sample-based structural checks of monotonicity, type-K
/// monotonicity and plus-homogeneity, plus flow-level property testing.
///
/// Every check samples deterministically from an explicit seed. A "pass" is
/// always sample-based; a "fail" carries witnesses that can be re-evaluated
/// with recheck().

#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "ktopical/core.hpp"
#include "ktopical/dynamics.hpp"

namespace ktopical {

enum class Verdict { pass, fail, inconclusive };

inline const char* to_string(Verdict v) {
    switch (v) {
        case Verdict::pass: return "pass";
        case Verdict::fail: return "fail";
        case Verdict::inconclusive: return "inconclusive";
    }
    return "?";
}

/// fail dominates, then inconclusive.
inline Verdict combine(Verdict a, Verdict b) {
    if (a == Verdict::fail || b == Verdict::fail) return Verdict::fail;
    if (a == Verdict::inconclusive || b == Verdict::inconclusive) return Verdict::inconclusive;
    return Verdict::pass;
}

struct SamplePlan {
    DomainBox box;
    int n_points = 200;
    int n_pairs = 200;
    std::uint64_t seed = 42;
    std::vector<double> alphas{-1.5, -0.5, 0.25, 1.0, 2.0};

    /// 200 points, seed 42, box [-2,2]^n.
    static SamplePlan standard(std::size_t n) {
        SamplePlan p;
        p.box = DomainBox::cube(n, -2.0, 2.0);
        return p;
    }

    void validate() const {
        if (!box.bounded()) throw InvalidModel("sampling box must be bounded");
        if (n_points < 1 || n_pairs < 1) throw InvalidModel("sample counts must be >= 1");
    }
};

/// Re-checkable evidence of a violated condition. `value` is the observed
/// quantity and `margin` the amount by which the condition is violated.
struct Witness {
    std::string kind;
    std::vector<StateVector> points;
    std::optional<std::size_t> row;
    std::optional<std::size_t> col;
    std::optional<double> alpha;
    std::optional<double> time;
    double value = 0.0;
    double margin = 0.0;
};

struct CheckResult {
    std::string name;
    std::string condition;
    Verdict verdict = Verdict::inconclusive;
    bool sample_based = true;
    std::size_t samples = 0;
    std::size_t skipped = 0;
    std::size_t violations = 0;
    std::vector<Witness> witnesses;
    std::string note;
};

struct VerificationReport {
    std::string label;
    TimeDomain time_domain = TimeDomain::discrete;
    std::vector<CheckResult> checks;
    std::map<std::string, Verdict> properties;
    SamplePlan plan;
    ToleranceConfig tolerances;

    Verdict overall() const {
        Verdict v = Verdict::pass;
        for (const auto& c : checks) v = combine(v, c.verdict);
        return v;
    }

    const CheckResult* find(std::string_view name) const {
        for (const auto& c : checks)
            if (c.name == name) return &c;
        return nullptr;
    }

    Verdict verdict(std::string_view name) const {
        if (auto it = properties.find(std::string(name)); it != properties.end()) return it->second;
        if (const auto* c = find(name)) return c->verdict;
        return Verdict::inconclusive;
    }

    void append(const VerificationReport& other) {
        checks.insert(checks.end(), other.checks.begin(), other.checks.end());
    }
};

namespace detail {

inline constexpr std::size_t max_witnesses = 8;

/// splitmix64 finalizer, used to derive per-check sub-seeds.
inline std::uint64_t mix(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline std::uint64_t sub_seed(std::uint64_t seed, std::string_view name) {
    std::uint64_t h = 1469598103934665603ULL;  // FNV-1a
    for (unsigned char c : name) h = (h ^ c) * 1099511628211ULL;
    return mix(seed ^ h);
}

/// Uniform doubles built from raw mt19937_64 output so that samples are
/// identical across standard library implementations.
class Sampler {
public:
    explicit Sampler(std::uint64_t seed) : engine_(seed) {}

    double unit() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * unit(); }
    std::size_t index(std::size_t n) { return static_cast<std::size_t>(engine_() % n); }

private:
    std::mt19937_64 engine_;
};

inline void record(CheckResult& r, Witness w) {
    ++r.violations;
    if (r.witnesses.size() < max_witnesses) r.witnesses.push_back(std::move(w));
}

inline void finish(CheckResult& r) {
    if (r.violations > 0)
        r.verdict = Verdict::fail;
    else if (r.samples == 0)
        r.verdict = Verdict::inconclusive;
    else
        r.verdict = Verdict::pass;
}

inline VerificationReport make_report(const SystemDefinition& sys, const SamplePlan& plan,
                                      const ToleranceConfig& cfg) {
    VerificationReport rep;
    rep.label = sys.label;
    rep.time_domain = sys.time_domain;
    rep.plan = plan;
    rep.tolerances = cfg;
    return rep;
}

/// Sampling region: plan box intersected with the system domain, shrunk by
/// the finite-difference step so that central differences stay inside.
inline DomainBox sampling_region(const SystemDefinition& sys, const SamplePlan& plan,
                                 double fd_step) {
    plan.validate();
    if (plan.box.dim() != sys.dim) throw DimensionError(sys.dim, plan.box.dim());
    DomainBox b = plan.box.intersect(sys.domain);
    StateVector lo = b.lower(), hi = b.upper();
    for (std::size_t i = 0; i < lo.size(); ++i) {
        const double h = 2.0 * fd_step * std::max({1.0, std::abs(lo[i]), std::abs(hi[i])});
        if (hi[i] - lo[i] > 4.0 * h) {
            lo[i] += h;
            hi[i] -= h;
        }
    }
    return DomainBox(std::move(lo), std::move(hi));
}

inline StateVector sample_point(Sampler& s, const DomainBox& box) {
    StateVector x(box.dim());
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = s.uniform(box.lower()[i], box.upper()[i]);
    return x;
}

/// Ordered pair a <= b inside `box`. Each component of b - a is zero with
/// probability 1/3; for n >= 2 at least one component is tied and at least
/// one is strictly ordered.
inline std::pair<StateVector, StateVector> sample_pair(Sampler& s, const DomainBox& box) {
    const std::size_t n = box.dim();
    StateVector a = sample_point(s, box);
    std::vector<bool> tied(n);
    for (std::size_t i = 0; i < n; ++i) tied[i] = s.unit() < 1.0 / 3.0;
    if (n >= 2) {
        bool any_tied = false, any_free = false;
        for (std::size_t i = 0; i < n; ++i) (tied[i] ? any_tied : any_free) = true;
        if (!any_tied) tied[s.index(n)] = true;
        if (!any_free) tied[s.index(n)] = false;
    }
    StateVector b = a;
    for (std::size_t i = 0; i < n; ++i)
        if (!tied[i]) b[i] = s.uniform(a[i], box.upper()[i]);
    return {std::move(a), std::move(b)};
}

/// Largest usable translation with the same sign as `alpha` keeping x + alpha*1
/// inside `box`.
inline double clamp_translation(std::span<const double> x, double alpha, const DomainBox& box) {
    double lo = -std::numeric_limits<double>::infinity();
    double hi = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < x.size(); ++i) {
        lo = std::max(lo, box.lower()[i] - x[i]);
        hi = std::min(hi, box.upper()[i] - x[i]);
    }
    return std::clamp(alpha, std::min(lo, 0.0), std::max(hi, 0.0));
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Jacobians
// ---------------------------------------------------------------------------

/// Central differences with h_j = fd_step * max(1, |x_j|).
inline Matrix numeric_jacobian(const SystemDefinition& sys, std::span<const double> x,
                               double fd_step) {
    if (x.size() != sys.dim) throw DimensionError(sys.dim, x.size());
    const std::size_t n = sys.dim;
    Matrix J(n, n);
    StateVector probe(x.begin(), x.end());
    for (std::size_t j = 0; j < n; ++j) {
        const double h = fd_step * std::max(1.0, std::abs(x[j]));
        probe[j] = x[j] + h;
        if (!sys.domain.contains(probe))
            throw InvalidModel("numeric_jacobian: probe leaves the domain of '" + sys.label + "'");
        const StateVector up = evaluate(sys, probe);
        probe[j] = x[j] - h;
        if (!sys.domain.contains(probe))
            throw InvalidModel("numeric_jacobian: probe leaves the domain of '" + sys.label + "'");
        const StateVector down = evaluate(sys, probe);
        probe[j] = x[j];
        for (std::size_t i = 0; i < n; ++i) J(i, j) = (up[i] - down[i]) / (2.0 * h);
    }
    return J;
}

/// Analytic Jacobian when the system carries one, finite differences otherwise.
inline Matrix jacobian_at(const SystemDefinition& sys, std::span<const double> x,
                          const ToleranceConfig& cfg) {
    if (sys.has_jacobian()) {
        Matrix J = sys.jacobian(x);
        if (J.rows() != sys.dim || J.cols() != sys.dim) throw DimensionError(sys.dim, J.rows());
        return J;
    }
    return numeric_jacobian(sys, x, cfg.fd_step);
}

// ---------------------------------------------------------------------------
// Structural checks
// ---------------------------------------------------------------------------

/// Off-diagonal Jacobian entries >= -eq_tol at every sampled point.
inline VerificationReport check_metzler_ct(const SystemDefinition& sys, const SamplePlan& plan,
                                           const ToleranceConfig& cfg) {
    if (sys.is_discrete()) throw InvalidModel("check_metzler_ct requires a continuous-time system");
    auto rep = detail::make_report(sys, plan, cfg);
    CheckResult r;
    r.name = "metzler";
    r.condition = "df_i/dx_j >= -eq_tol for i != j";
    r.note = "pass is sample-based (inconclusive-pass); failures are certain";
    const DomainBox region = detail::sampling_region(sys, plan, cfg.fd_step);
    detail::Sampler s(detail::sub_seed(plan.seed, r.name));
    for (int k = 0; k < plan.n_points; ++k) {
        const StateVector x = detail::sample_point(s, region);
        const Matrix J = jacobian_at(sys, x, cfg);
        ++r.samples;
        for (std::size_t i = 0; i < sys.dim; ++i)
            for (std::size_t j = 0; j < sys.dim; ++j)
                if (i != j && J(i, j) < -cfg.eq_tol)
                    detail::record(r, {"jacobian_offdiagonal", {x}, i, j, {}, {}, J(i, j), -J(i, j)});
    }
    detail::finish(r);
    rep.checks.push_back(std::move(r));
    return rep;
}

/// Nonnegative Jacobian everywhere, strictly positive diagonal almost
/// everywhere. The latter is approximated by: J_ii > strict_margin at >= 99%
/// of the sampled points outside the declared exception set and at every
/// declared probe point. Produces the checks "jacobian_nonnegative" and
/// "diagonal_positive".
inline VerificationReport check_nonneg_posdiag_dt(const SystemDefinition& sys,
                                                  const SamplePlan& plan,
                                                  const ToleranceConfig& cfg) {
    if (!sys.is_discrete())
        throw InvalidModel("check_nonneg_posdiag_dt requires a discrete-time system");
    auto rep = detail::make_report(sys, plan, cfg);
    CheckResult nonneg;
    nonneg.name = "jacobian_nonnegative";
    nonneg.condition = "df_i/dx_j >= -eq_tol for all i, j";
    CheckResult diag;
    diag.name = "diagonal_positive";
    diag.condition =
        "df_i/dx_i > strict_margin at >= 99% of sampled points and at all probe points";

    const DomainBox region = detail::sampling_region(sys, plan, cfg.fd_step);
    detail::Sampler s(detail::sub_seed(plan.seed, "jacobian_dt"));
    std::vector<Witness> weak;
    std::size_t counted = 0;

    auto diagonal_witnesses = [&](const StateVector& x, const Matrix& J, std::vector<Witness>& out) {
        bool bad = false;
        for (std::size_t i = 0; i < sys.dim; ++i) {
            if (!(J(i, i) > cfg.strict_margin)) {
                out.push_back({"diagonal_nonpositive", {x}, i, i, {}, {}, J(i, i),
                               cfg.strict_margin - J(i, i)});
                bad = true;
            }
        }
        return bad;
    };

    for (int k = 0; k < plan.n_points; ++k) {
        const StateVector x = detail::sample_point(s, region);
        const Matrix J = jacobian_at(sys, x, cfg);
        ++nonneg.samples;
        for (std::size_t i = 0; i < sys.dim; ++i)
            for (std::size_t j = 0; j < sys.dim; ++j)
                if (J(i, j) < -cfg.eq_tol)
                    detail::record(nonneg, {"jacobian_negative", {x}, i, j, {}, {}, J(i, j), -J(i, j)});
        if (sys.diagonal_exception && sys.diagonal_exception(x)) {
            ++diag.skipped;
            continue;
        }
        ++counted;
        std::vector<Witness> local;
        if (diagonal_witnesses(x, J, local)) {
            ++diag.violations;
            for (auto& w : local) weak.push_back(std::move(w));
        }
    }
    diag.samples = counted;

    std::size_t probe_failures = 0;
    std::vector<Witness> probe_w;
    for (const auto& p : sys.diagonal_probes) {
        const Matrix J = jacobian_at(sys, p, cfg);
        ++diag.samples;
        if (diagonal_witnesses(p, J, probe_w)) ++probe_failures;
    }

    detail::finish(nonneg);
    const double fraction =
        counted ? static_cast<double>(diag.violations) / static_cast<double>(counted) : 0.0;
    const std::size_t weak_points = diag.violations;
    diag.violations = 0;
    diag.witnesses.clear();
    if (probe_failures > 0 || fraction > 0.01) {
        diag.verdict = Verdict::fail;
        diag.violations = weak_points + probe_failures;
        for (auto& w : probe_w)
            if (diag.witnesses.size() < detail::max_witnesses) diag.witnesses.push_back(w);
        for (auto& w : weak)
            if (diag.witnesses.size() < detail::max_witnesses) diag.witnesses.push_back(w);
    } else {
        diag.verdict = diag.samples ? Verdict::pass : Verdict::inconclusive;
    }
    diag.note = std::to_string(weak_points) + " of " + std::to_string(counted) +
                " sampled points have a non-positive diagonal entry (allowed fraction 1%)";

    rep.checks.push_back(std::move(nonneg));
    rep.checks.push_back(std::move(diag));
    return rep;
}

/// Continuous time: f(xi + alpha 1) = f(xi). Discrete time:
/// f(xi + alpha 1) = f(xi) + alpha 1. Translations leaving the domain are
/// shortened to stay inside it.
inline VerificationReport check_plus_homogeneity(const SystemDefinition& sys,
                                                 const SamplePlan& plan,
                                                 const ToleranceConfig& cfg) {
    auto rep = detail::make_report(sys, plan, cfg);
    CheckResult r;
    r.name = "plus_homogeneous";
    r.condition = sys.is_discrete() ? "|f(x + a1) - f(x) - a1| < eq_tol"
                                    : "|f(x + a1) - f(x)| < eq_tol";
    const DomainBox region = detail::sampling_region(sys, plan, cfg.fd_step);
    detail::Sampler s(detail::sub_seed(plan.seed, r.name));
    const double shift_scale = sys.is_discrete() ? 1.0 : 0.0;
    for (int k = 0; k < plan.n_points; ++k) {
        const StateVector x = detail::sample_point(s, region);
        const StateVector fx = evaluate(sys, x);
        for (double alpha : plan.alphas) {
            const double a = detail::clamp_translation(x, alpha, sys.domain);
            if (a == 0.0) {
                ++r.skipped;
                continue;
            }
            const StateVector fy = evaluate(sys, translate(x, a));
            ++r.samples;
            double err = 0.0;
            for (std::size_t i = 0; i < sys.dim; ++i)
                err = std::max(err, std::abs(fy[i] - fx[i] - shift_scale * a));
            if (!(err < cfg.eq_tol))
                detail::record(r, {"plus_homogeneity", {x}, {}, {}, a, {}, err, err - cfg.eq_tol});
        }
    }
    detail::finish(r);
    rep.checks.push_back(std::move(r));
    return rep;
}

/// Kamke condition by direct probing: a <= b, a_i = b_i  =>  f_i(a) <= f_i(b).
inline VerificationReport check_kamke_direct(const SystemDefinition& sys, const SamplePlan& plan,
                                             const ToleranceConfig& cfg) {
    if (sys.is_discrete()) throw InvalidModel("check_kamke_direct requires a continuous-time system");
    auto rep = detail::make_report(sys, plan, cfg);
    CheckResult r;
    r.name = "kamke";
    r.condition = "a <= b, a_i = b_i  =>  f_i(a) <= f_i(b) + eq_tol";
    r.note = sys.dim == 1 ? "scalar system: condition holds vacuously" : "";
    const DomainBox region = detail::sampling_region(sys, plan, cfg.fd_step);
    detail::Sampler s(detail::sub_seed(plan.seed, r.name));
    for (int k = 0; k < plan.n_pairs; ++k) {
        auto [a, b] = detail::sample_pair(s, region);
        ++r.samples;
        if (sys.dim == 1) continue;
        const StateVector fa = evaluate(sys, a), fb = evaluate(sys, b);
        for (std::size_t i = 0; i < sys.dim; ++i)
            if (a[i] == b[i] && fa[i] > fb[i] + cfg.eq_tol)
                detail::record(r, {"kamke", {a, b}, i, {}, {}, {}, fa[i] - fb[i],
                                   fa[i] - fb[i] - cfg.eq_tol});
    }
    detail::finish(r);
    rep.checks.push_back(std::move(r));
    return rep;
}

/// Kamke-like conditions for discrete maps, probed directly (no Jacobian):
/// a <= b => f(a) <= f(b) ("order_preserving") and
/// a_i < b_i => f_i(a) < f_i(b) ("strict_order").
inline VerificationReport check_kamke_like_dt(const SystemDefinition& sys, const SamplePlan& plan,
                                              const ToleranceConfig& cfg) {
    if (!sys.is_discrete())
        throw InvalidModel("check_kamke_like_dt requires a discrete-time system");
    auto rep = detail::make_report(sys, plan, cfg);
    CheckResult order;
    order.name = "order_preserving";
    order.condition = "a <= b  =>  f(a) <= f(b) + eq_tol";
    CheckResult strict;
    strict.name = "strict_order";
    strict.condition = "a_i + strict_margin < b_i  =>  f_i(a) + eq_tol < f_i(b)";
    const DomainBox region = detail::sampling_region(sys, plan, cfg.fd_step);
    detail::Sampler s(detail::sub_seed(plan.seed, "kamke_like"));
    for (int k = 0; k < plan.n_pairs; ++k) {
        auto [a, b] = detail::sample_pair(s, region);
        const StateVector fa = evaluate(sys, a), fb = evaluate(sys, b);
        ++order.samples;
        for (std::size_t i = 0; i < sys.dim; ++i) {
            if (fa[i] > fb[i] + cfg.eq_tol)
                detail::record(order, {"order", {a, b}, i, {}, {}, {}, fa[i] - fb[i],
                                       fa[i] - fb[i] - cfg.eq_tol});
            if (a[i] + cfg.strict_margin < b[i]) {
                ++strict.samples;
                if (!(fa[i] + cfg.eq_tol < fb[i]))
                    detail::record(strict, {"strict_order", {a, b}, i, {}, {}, {}, fb[i] - fa[i],
                                            cfg.eq_tol - (fb[i] - fa[i])});
            }
        }
    }
    detail::finish(order);
    detail::finish(strict);
    rep.checks.push_back(std::move(order));
    rep.checks.push_back(std::move(strict));
    return rep;
}

/// |sum_j J_ij - 1| < 10 eq_tol for every row at every sampled point.
inline VerificationReport check_row_stochastic(const SystemDefinition& sys, const SamplePlan& plan,
                                               const ToleranceConfig& cfg) {
    if (!sys.is_discrete())
        throw InvalidModel("check_row_stochastic requires a discrete-time system");
    auto rep = detail::make_report(sys, plan, cfg);
    CheckResult r;
    r.name = "row_stochastic";
    r.condition = "|sum_j df_i/dx_j - 1| < 10 eq_tol";
    const DomainBox region = detail::sampling_region(sys, plan, cfg.fd_step);
    detail::Sampler s(detail::sub_seed(plan.seed, r.name));
    for (int k = 0; k < plan.n_points; ++k) {
        const StateVector x = detail::sample_point(s, region);
        const Matrix J = jacobian_at(sys, x, cfg);
        ++r.samples;
        for (std::size_t i = 0; i < sys.dim; ++i) {
            const double dev = std::abs(J.row_sum(i) - 1.0);
            if (!(dev < 10.0 * cfg.eq_tol))
                detail::record(r, {"row_sum", {x}, i, {}, {}, {}, J.row_sum(i),
                                   dev - 10.0 * cfg.eq_tol});
        }
    }
    detail::finish(r);
    rep.checks.push_back(std::move(r));
    return rep;
}

/// Analytic Jacobian against central differences, tolerance 1e-5 (1 + |J_ij|).
inline VerificationReport check_jacobian_consistency(const SystemDefinition& sys,
                                                     const SamplePlan& plan,
                                                     const ToleranceConfig& cfg) {
    auto rep = detail::make_report(sys, plan, cfg);
    CheckResult r;
    r.name = "jacobian_consistent";
    r.condition = "|J_analytic - J_fd| <= 1e-5 (1 + |J_analytic|) entrywise";
    if (!sys.has_jacobian()) {
        r.verdict = Verdict::inconclusive;
        r.note = "no analytic Jacobian attached";
        rep.checks.push_back(std::move(r));
        return rep;
    }
    const DomainBox region = detail::sampling_region(sys, plan, cfg.fd_step);
    detail::Sampler s(detail::sub_seed(plan.seed, r.name));
    for (int k = 0; k < plan.n_points; ++k) {
        const StateVector x = detail::sample_point(s, region);
        const Matrix Ja = sys.jacobian(x);
        const Matrix Jn = numeric_jacobian(sys, x, cfg.fd_step);
        ++r.samples;
        for (std::size_t i = 0; i < sys.dim; ++i)
            for (std::size_t j = 0; j < sys.dim; ++j) {
                const double tol = 1e-5 * (1.0 + std::abs(Ja(i, j)));
                const double err = std::abs(Ja(i, j) - Jn(i, j));
                if (err > tol)
                    detail::record(r, {"jacobian_mismatch", {x}, i, j, {}, {}, Ja(i, j), err - tol});
            }
    }
    detail::finish(r);
    rep.checks.push_back(std::move(r));
    return rep;
}

// ---------------------------------------------------------------------------
// Flow-level properties
// ---------------------------------------------------------------------------

/// Checks, along flows of sampled ordered pairs up to `horizon`:
///   flow_monotone          phi(t,x1) <= phi(t,x2) + eq_tol
///   flow_type_k            x1_i + strict_margin < x2_i => phi_i(t,x1) + eq_tol < phi_i(t,x2)
///   flow_plus_homogeneous  |phi(t,x+a1) - phi(t,x) - a1| < 10 eq_tol
///   flow_nonexpansive      d(phi(t,x1),phi(t,x2)) <= d(x1,x2) + eq_tol
/// Sample times are every iteration (discrete) or every cfg.stride (continuous).
inline VerificationReport test_flow_properties(const SystemDefinition& sys, const SamplePlan& plan,
                                               double horizon, const ToleranceConfig& cfg) {
    auto rep = detail::make_report(sys, plan, cfg);
    auto named = [](std::string name, std::string condition) {
        CheckResult c;
        c.name = std::move(name);
        c.condition = std::move(condition);
        return c;
    };
    CheckResult mono = named("flow_monotone", "phi(t,x1) <= phi(t,x2) + eq_tol");
    CheckResult typek = named("flow_type_k",
                              "x1_i + strict_margin < x2_i => phi_i(t,x1) + eq_tol < phi_i(t,x2)");
    CheckResult phom = named("flow_plus_homogeneous", "|phi(t,x+a1) - phi(t,x) - a1| < 10 eq_tol");
    CheckResult nonexp = named("flow_nonexpansive", "d(phi(t,x1),phi(t,x2)) <= d(x1,x2) + eq_tol");

    const DomainBox region = detail::sampling_region(sys, plan, cfg.fd_step);
    detail::Sampler s(detail::sub_seed(plan.seed, "flow_properties"));
    const double stride = sys.is_discrete() ? 1.0 : cfg.stride;
    const long n_samples = static_cast<long>(std::floor(horizon / stride + 1e-9));
    auto advance = [&](const StateVector& x) {
        return sys.is_discrete() ? evaluate(sys, x) : flow(sys, x, stride, cfg.dt);
    };

    for (int k = 0; k < plan.n_pairs; ++k) {
        auto [x1, x2] = detail::sample_pair(s, region);
        const double alpha0 = plan.alphas.empty() ? 1.0 : plan.alphas[k % plan.alphas.size()];
        const double alpha = detail::clamp_translation(x1, alpha0, sys.domain);
        const StateVector x1_0 = x1, x2_0 = x2;
        const double d0 = sup_metric(x1, x2);
        std::vector<std::size_t> strict;
        for (std::size_t i = 0; i < sys.dim; ++i)
            if (x1[i] + cfg.strict_margin < x2[i]) strict.push_back(i);
        StateVector y = translate(x1, alpha);

        for (long step = 1; step <= n_samples; ++step) {
            const double t = static_cast<double>(step) * stride;
            x1 = advance(x1);
            x2 = advance(x2);
            if (alpha != 0.0) y = advance(y);

            ++mono.samples;
            for (std::size_t i = 0; i < sys.dim; ++i)
                if (x1[i] > x2[i] + cfg.eq_tol)
                    detail::record(mono, {"flow_order", {x1_0, x2_0}, i, {}, {}, t, x1[i] - x2[i],
                                          x1[i] - x2[i] - cfg.eq_tol});
            for (std::size_t i : strict) {
                ++typek.samples;
                if (!(x1[i] + cfg.eq_tol < x2[i]))
                    detail::record(typek, {"flow_strict", {x1_0, x2_0}, i, {}, {}, t, x2[i] - x1[i],
                                           cfg.eq_tol - (x2[i] - x1[i])});
            }
            if (alpha != 0.0) {
                ++phom.samples;
                double err = 0.0;
                for (std::size_t i = 0; i < sys.dim; ++i)
                    err = std::max(err, std::abs(y[i] - x1[i] - alpha));
                if (!(err < 10.0 * cfg.eq_tol))
                    detail::record(phom, {"flow_plus_homogeneity", {x1_0}, {}, {}, alpha, t, err,
                                          err - 10.0 * cfg.eq_tol});
            } else {
                ++phom.skipped;
            }
            ++nonexp.samples;
            const double d = sup_metric(x1, x2);
            if (d > d0 + cfg.eq_tol)
                detail::record(nonexp, {"flow_nonexpansive", {x1_0, x2_0}, {}, {}, {}, t, d,
                                        d - d0 - cfg.eq_tol});
        }
    }
    for (auto* c : {&mono, &typek, &phom, &nonexp}) {
        detail::finish(*c);
        rep.checks.push_back(std::move(*c));
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Classification
// ---------------------------------------------------------------------------

/// Aggregates the structural checks for the system's time domain into the
/// properties monotone, type_k, plus_homogeneous and k_topical.
///
/// continuous, C^1:     Metzler Jacobian (monotone, hence type-K) + f(x+a1) = f(x)
/// continuous, non-C^1: direct Kamke probing (monotone only; type-K inconclusive)
/// discrete, C^1:       nonnegative Jacobian with positive diagonal a.e. + DT plus-homogeneity;
///                      a K-topical pass also runs the row-stochastic consistency check
/// discrete, non-C^1:   direct Kamke-like probing + DT plus-homogeneity
inline VerificationReport classify(const SystemDefinition& sys, const SamplePlan& plan,
                                   const ToleranceConfig& cfg) {
    auto rep = detail::make_report(sys, plan, cfg);
    Verdict monotone = Verdict::inconclusive, type_k = Verdict::inconclusive;

    if (!sys.is_discrete()) {
        if (sys.smooth) {
            auto m = check_metzler_ct(sys, plan, cfg);
            monotone = type_k = m.overall();
            rep.append(m);
        } else {
            auto k = check_kamke_direct(sys, plan, cfg);
            monotone = k.overall();
            type_k = monotone == Verdict::fail ? Verdict::fail : Verdict::inconclusive;
            rep.append(k);
        }
    } else if (sys.smooth) {
        auto j = check_nonneg_posdiag_dt(sys, plan, cfg);
        monotone = j.checks[0].verdict;
        type_k = combine(monotone, j.checks[1].verdict);
        rep.append(j);
    } else {
        auto k = check_kamke_like_dt(sys, plan, cfg);
        monotone = k.checks[0].verdict;
        type_k = combine(monotone, k.checks[1].verdict);
        rep.append(k);
    }

    auto ph = check_plus_homogeneity(sys, plan, cfg);
    const Verdict plus_homogeneous = ph.overall();
    rep.append(ph);

    if (sys.has_jacobian()) rep.append(check_jacobian_consistency(sys, plan, cfg));

    rep.properties["monotone"] = monotone;
    rep.properties["type_k"] = type_k;
    rep.properties["plus_homogeneous"] = plus_homogeneous;
    rep.properties["topical"] = combine(monotone, plus_homogeneous);
    rep.properties["k_topical"] = combine(type_k, plus_homogeneous);

    if (sys.is_discrete() && sys.smooth && rep.properties["k_topical"] == Verdict::pass) {
        auto rs = check_row_stochastic(sys, plan, cfg);
        rep.properties["row_stochastic"] = rs.overall();
        rep.append(rs);
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Witness re-evaluation
// ---------------------------------------------------------------------------

/// Re-evaluates a witness from scratch; true when the violation reproduces.
/// Flow witnesses are replayed up to their recorded time.
inline bool recheck(const SystemDefinition& sys, const Witness& w, const ToleranceConfig& cfg) {
    const auto& k = w.kind;
    if (k == "jacobian_offdiagonal" || k == "jacobian_negative")
        return jacobian_at(sys, w.points[0], cfg)(*w.row, *w.col) < -cfg.eq_tol;
    if (k == "diagonal_nonpositive")
        return !(jacobian_at(sys, w.points[0], cfg)(*w.row, *w.row) > cfg.strict_margin);
    if (k == "row_sum")
        return !(std::abs(jacobian_at(sys, w.points[0], cfg).row_sum(*w.row) - 1.0) <
                 10.0 * cfg.eq_tol);
    if (k == "jacobian_mismatch") {
        const double a = sys.jacobian(w.points[0])(*w.row, *w.col);
        const double n = numeric_jacobian(sys, w.points[0], cfg.fd_step)(*w.row, *w.col);
        return std::abs(a - n) > 1e-5 * (1.0 + std::abs(a));
    }
    if (k == "plus_homogeneity") {
        const StateVector fx = evaluate(sys, w.points[0]);
        const StateVector fy = evaluate(sys, translate(w.points[0], *w.alpha));
        const double shift = sys.is_discrete() ? *w.alpha : 0.0;
        double err = 0.0;
        for (std::size_t i = 0; i < sys.dim; ++i) err = std::max(err, std::abs(fy[i] - fx[i] - shift));
        return !(err < cfg.eq_tol);
    }
    if (k == "kamke" || k == "order") {
        const std::size_t i = *w.row;
        return evaluate(sys, w.points[0])[i] > evaluate(sys, w.points[1])[i] + cfg.eq_tol;
    }
    if (k == "strict_order") {
        const std::size_t i = *w.row;
        return !(evaluate(sys, w.points[0])[i] + cfg.eq_tol < evaluate(sys, w.points[1])[i]);
    }
    if (k.rfind("flow_", 0) == 0) {
        const double t = *w.time;
        if (k == "flow_plus_homogeneity") {
            const StateVector a = flow(sys, w.points[0], t, cfg.dt);
            const StateVector b = flow(sys, translate(w.points[0], *w.alpha), t, cfg.dt);
            double err = 0.0;
            for (std::size_t i = 0; i < sys.dim; ++i) err = std::max(err, std::abs(b[i] - a[i] - *w.alpha));
            return !(err < 10.0 * cfg.eq_tol);
        }
        const StateVector a = flow(sys, w.points[0], t, cfg.dt);
        const StateVector b = flow(sys, w.points[1], t, cfg.dt);
        if (k == "flow_order") return a[*w.row] > b[*w.row] + cfg.eq_tol;
        if (k == "flow_strict") return !(a[*w.row] + cfg.eq_tol < b[*w.row]);
        if (k == "flow_nonexpansive")
            return sup_metric(a, b) > sup_metric(w.points[0], w.points[1]) + cfg.eq_tol;
    }
    throw InvalidModel("recheck: unknown witness kind '" + k + "'");
}

}  // namespace ktopical
