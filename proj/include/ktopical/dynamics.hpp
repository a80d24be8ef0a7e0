#pragma once

/// @file dynamics.hpp
/// @brief System definitions, flows in discrete and continuous time,
/// discretization and convergence / period detection.

#include <cmath>
#include <cstdio>
#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "ktopical/core.hpp"

namespace ktopical {

enum class TimeDomain { continuous, discrete };

inline const char* to_string(TimeDomain d) {
    return d == TimeDomain::continuous ? "continuous" : "discrete";
}

using VectorField = std::function<StateVector(std::span<const double>)>;
using JacobianFn = std::function<Matrix(std::span<const double>)>;
using PointPredicate = std::function<bool(std::span<const double>)>;

/// A dynamical system x' = f(x) (continuous) or x(k+1) = f(x(k)) (discrete).
///
/// `smooth` marks f as C^1. Non-smooth maps are verified by probing the
/// order conditions directly instead of through Jacobian sign patterns.
/// `diagonal_probes` and `diagonal_exception` tune the "almost everywhere"
/// positive-diagonal check for discrete maps: probes must have a strictly
/// positive diagonal, points inside the exception set are not counted.
struct SystemDefinition {
    TimeDomain time_domain = TimeDomain::discrete;
    std::size_t dim = 0;
    VectorField eval;
    JacobianFn jacobian;  // empty when no analytic Jacobian is known
    DomainBox domain;
    std::string label;
    bool smooth = true;
    std::vector<StateVector> diagonal_probes;
    PointPredicate diagonal_exception;

    bool is_discrete() const { return time_domain == TimeDomain::discrete; }
    bool has_jacobian() const { return static_cast<bool>(jacobian); }
};

/// f(x), with dimension and finiteness checks.
inline StateVector evaluate(const SystemDefinition& sys, std::span<const double> x) {
    if (x.size() != sys.dim) throw DimensionError(sys.dim, x.size());
    StateVector y = sys.eval(x);
    if (y.size() != sys.dim)
        throw DimensionError("system '" + sys.label + "' returned " + std::to_string(y.size()) +
                             " components, expected " + std::to_string(sys.dim));
    if (!all_finite(y))
        throw NonFiniteError("system '" + sys.label + "' produced a non-finite value");
    return y;
}

/// One classical fourth-order Runge-Kutta step of size dt.
inline StateVector step_ct(const SystemDefinition& sys, std::span<const double> x, double dt) {
    if (sys.is_discrete()) throw InvalidModel("step_ct requires a continuous-time system");
    if (!(dt > 0.0)) throw InvalidModel("integration step must be > 0");
    const std::size_t n = sys.dim;
    const double half = dt / 2;

    StateVector tmp(n);
    const StateVector k1 = evaluate(sys, x);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = x[i] + half * k1[i];
    const StateVector k2 = evaluate(sys, tmp);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = x[i] + half * k2[i];
    const StateVector k3 = evaluate(sys, tmp);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = x[i] + dt * k3[i];
    const StateVector k4 = evaluate(sys, tmp);

    StateVector out(n);
    for (std::size_t i = 0; i < n; ++i)
        out[i] = x[i] + dt * ((k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]) / 6.0);
    if (!all_finite(out)) throw NonFiniteError("integration of '" + sys.label + "' blew up");
    return out;
}

/// phi(t, xi). Discrete time requires an integral t; continuous time takes
/// steps of `dt` and shortens the last one when dt does not divide t.
inline StateVector flow(const SystemDefinition& sys, std::span<const double> xi, double t,
                        double dt) {
    if (xi.size() != sys.dim) throw DimensionError(sys.dim, xi.size());
    if (!(t >= 0.0)) throw InvalidModel("flow time must be >= 0");
    StateVector x(xi.begin(), xi.end());
    if (sys.is_discrete()) {
        if (t != std::floor(t)) throw InvalidModel("discrete-time flow needs an integer time");
        for (long k = 0; k < static_cast<long>(t); ++k) x = evaluate(sys, x);
        return x;
    }
    const double ratio = t / dt;
    long full = static_cast<long>(std::floor(ratio + 1e-9));
    double rest = t - static_cast<double>(full) * dt;
    if (rest < 0.0) rest = 0.0;
    for (long k = 0; k < full; ++k) x = step_ct(sys, x, dt);
    if (rest > 1e-12 * dt) x = step_ct(sys, x, rest);
    return x;
}

inline StateVector flow(const SystemDefinition& sys, std::span<const double> xi, double t,
                        const ToleranceConfig& cfg) {
    return flow(sys, xi, t, cfg.dt);
}

/// The time-T map g = phi(T, .) of a continuous-time system, as a discrete
/// system. No analytic Jacobian is attached.
inline SystemDefinition discretize(const SystemDefinition& sys, double period, double dt) {
    if (sys.is_discrete()) throw InvalidModel("discretize requires a continuous-time system");
    if (!(period > 0.0) || !(dt > 0.0)) throw InvalidModel("discretize: T and dt must be > 0");
    const double ratio = period / dt;
    if (std::abs(ratio - std::round(ratio)) > 1e-9 * std::max(1.0, ratio))
        throw InvalidModel("discretize: dt must divide T");

    SystemDefinition out;
    out.time_domain = TimeDomain::discrete;
    out.dim = sys.dim;
    out.domain = sys.domain;
    out.smooth = sys.smooth;
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", period);
    out.label = "discretize(" + sys.label + ", T=" + buf + ")";
    out.eval = [sys, period, dt](std::span<const double> x) { return flow(sys, x, period, dt); };
    return out;
}

// ---------------------------------------------------------------------------
// Trajectories and convergence
// ---------------------------------------------------------------------------

struct Trajectory {
    std::vector<double> times;
    std::vector<StateVector> states;

    std::size_t size() const { return states.size(); }
    void push(double t, StateVector x) {
        times.push_back(t);
        states.push_back(std::move(x));
    }
};

enum class Outcome { converged, periodic, diverged, horizon_exhausted };

inline const char* to_string(Outcome o) {
    switch (o) {
        case Outcome::converged: return "converged";
        case Outcome::periodic: return "periodic";
        case Outcome::diverged: return "diverged";
        case Outcome::horizon_exhausted: return "horizon_exhausted";
    }
    return "?";
}

/// For converged runs `iterations_or_time` is the time at which the state
/// settled, i.e. the start of the confirmation window; otherwise it is the
/// last simulated time.
struct ConvergenceReport {
    Outcome outcome = Outcome::horizon_exhausted;
    std::optional<StateVector> limit;   // iff converged
    std::optional<int> period;          // iff periodic
    double iterations_or_time = 0.0;
    double final_residual = 0.0;
};

struct SimulationResult {
    Trajectory trajectory;
    ConvergenceReport report;
};

/// Smallest p in [2, max_period] such that the last max_period + p samples
/// recur with period p up to convergence_tol.
///
/// A recurrence only counts when the orbit actually moves: the largest
/// consecutive step in the window must reach convergence_tol, and the p-step
/// mismatch must be at most 1e-3 of that step. A constant tail is
/// convergence, and a slowly damped rotation is not a cycle.
inline std::optional<int> detect_period(const Trajectory& traj, const ToleranceConfig& cfg) {
    const auto& xs = traj.states;
    const std::size_t n = xs.size();
    const std::size_t pmax = static_cast<std::size_t>(cfg.max_period);
    for (std::size_t p = 2; p <= pmax; ++p) {
        if (n < pmax + p) break;
        if (sup_metric(xs[n - 1], xs[n - 1 - p]) >= cfg.convergence_tol) continue;
        double recurrence = 0.0;
        double motion = 0.0;
        bool ok = true;
        for (std::size_t k = n - pmax - p; k + p < n; ++k) {
            const double d = sup_metric(xs[k + p], xs[k]);
            if (d >= cfg.convergence_tol) {
                ok = false;
                break;
            }
            recurrence = std::max(recurrence, d);
            motion = std::max(motion, sup_metric(xs[k + 1], xs[k]));
        }
        if (!ok) continue;
        if (motion >= cfg.convergence_tol && recurrence <= 1e-3 * motion)
            return static_cast<int>(p);
    }
    return std::nullopt;
}

/// Iterates (discrete) or integrates with sampling stride cfg.stride
/// (continuous) until convergence, a periodic orbit, divergence or the
/// horizon. The full sampled trajectory is returned alongside the report.
inline SimulationResult simulate(const SystemDefinition& sys, std::span<const double> xi,
                                 const ToleranceConfig& cfg) {
    if (xi.size() != sys.dim) throw DimensionError(sys.dim, xi.size());
    SimulationResult res;
    auto& traj = res.trajectory;
    auto& rep = res.report;

    const bool discrete = sys.is_discrete();
    const double dt_sample = discrete ? 1.0 : cfg.stride;
    const long max_samples =
        static_cast<long>(std::floor(cfg.max_horizon / dt_sample + 1e-9));

    StateVector x(xi.begin(), xi.end());
    traj.push(0.0, x);
    int below = 0;
    for (long k = 1; k <= max_samples; ++k) {
        StateVector next;
        try {
            next = discrete ? evaluate(sys, x) : flow(sys, x, cfg.stride, cfg.dt);
        } catch (const NonFiniteError&) {
            rep.outcome = Outcome::diverged;
            rep.iterations_or_time = static_cast<double>(k) * dt_sample;
            rep.final_residual = std::numeric_limits<double>::infinity();
            return res;
        }
        const double residual = sup_metric(next, x);
        const double t = static_cast<double>(k) * dt_sample;
        x = std::move(next);
        traj.push(t, x);
        rep.iterations_or_time = t;
        rep.final_residual = residual;

        if (sup_norm(x) > cfg.divergence_bound) {
            rep.outcome = Outcome::diverged;
            return res;
        }
        if (residual < cfg.convergence_tol) {
            if (++below >= cfg.window) {
                rep.outcome = Outcome::converged;
                rep.limit = x;
                rep.iterations_or_time = static_cast<double>(k - cfg.window) * dt_sample;
                return res;
            }
            continue;
        }
        below = 0;
        if (auto p = detect_period(traj, cfg)) {
            rep.outcome = Outcome::periodic;
            rep.period = *p;
            return res;
        }
    }
    rep.outcome = Outcome::horizon_exhausted;
    return res;
}

inline ConvergenceReport simulate_until_convergence(const SystemDefinition& sys,
                                                    std::span<const double> xi,
                                                    const ToleranceConfig& cfg) {
    return simulate(sys, xi, cfg).report;
}

/// Runs to convergence from `guess` and accepts the limit when its
/// fixed-point residual (discrete) or field magnitude (continuous) is below
/// eq_tol.
inline std::optional<StateVector> find_equilibrium(const SystemDefinition& sys,
                                                   std::span<const double> guess,
                                                   const ToleranceConfig& cfg) {
    const auto rep = simulate_until_convergence(sys, guess, cfg);
    if (rep.outcome != Outcome::converged) return std::nullopt;
    const StateVector& x = *rep.limit;
    const StateVector fx = evaluate(sys, x);
    const double residual = sys.is_discrete() ? sup_metric(fx, x) : sup_norm(fx);
    if (residual < cfg.eq_tol) return x;
    return std::nullopt;
}

// ---------------------------------------------------------------------------
// CSV export
// ---------------------------------------------------------------------------

inline std::string format_real(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

/// Header `t,x_1,...,x_n`, one row per sample.
inline void write_csv(std::ostream& os, const Trajectory& traj) {
    const std::size_t n = traj.states.empty() ? 0 : traj.states.front().size();
    os << 't';
    for (std::size_t i = 1; i <= n; ++i) os << ",x_" << i;
    os << '\n';
    for (std::size_t k = 0; k < traj.size(); ++k) {
        os << format_real(traj.times[k]);
        for (double v : traj.states[k]) os << ',' << format_real(v);
        os << '\n';
    }
}

}  // namespace ktopical
