#pragma once

/// @file models.hpp
/// @brief Constructors for the example system families: consensus protocols,
/// saturated couplings, Kuramoto networks, max-plus maps and their smoothing,
/// Shapley operators, chemical reaction networks in reaction coordinates and
/// the exp/log conjugation to the multiplicative setting. Also a handful of
/// small reference systems used as positive and negative controls.

#include <cmath>
#include <istream>
#include <limits>
#include <map>
#include <numbers>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "ktopical/core.hpp"
#include "ktopical/dynamics.hpp"
#include "ktopical/mas.hpp"
#include "ktopical/verify.hpp"

namespace ktopical {

// ---------------------------------------------------------------------------
// Max-plus matrices
// ---------------------------------------------------------------------------

/// n x n matrix over R u {-inf}. The max-plus zero is stored as an empty
/// optional and never enters floating-point arithmetic.
class MaxPlusMatrix {
public:
    using Entry = std::optional<double>;

    MaxPlusMatrix() = default;
    explicit MaxPlusMatrix(std::size_t n) : n_(n), entries_(n * n) {
        if (n == 0) throw InvalidModel("max-plus matrix must be at least 1x1");
    }

    /// Rows of doubles; -infinity marks the max-plus zero.
    static MaxPlusMatrix from_rows(const std::vector<std::vector<double>>& rows) {
        MaxPlusMatrix a(rows.size());
        for (std::size_t i = 0; i < rows.size(); ++i) {
            if (rows[i].size() != rows.size()) throw DimensionError(rows.size(), rows[i].size());
            for (std::size_t j = 0; j < rows.size(); ++j) {
                const double v = rows[i][j];
                if (v == -std::numeric_limits<double>::infinity()) continue;
                if (!std::isfinite(v)) throw InvalidModel("max-plus entries must be finite or -inf");
                a.set(i, j, v);
            }
        }
        return a;
    }

    std::size_t size() const { return n_; }
    const Entry& operator()(std::size_t i, std::size_t j) const { return entries_[i * n_ + j]; }
    void set(std::size_t i, std::size_t j, Entry v) { entries_[i * n_ + j] = v; }

    /// Every row needs at least one finite entry.
    void validate() const {
        for (std::size_t i = 0; i < n_; ++i) {
            bool any = false;
            for (std::size_t j = 0; j < n_; ++j) any = any || (*this)(i, j).has_value();
            if (!any) throw InvalidModel("max-plus row " + std::to_string(i + 1) + " is entirely -inf");
        }
    }

    double min_finite() const {
        double m = std::numeric_limits<double>::infinity();
        for (const auto& e : entries_)
            if (e) m = std::min(m, *e);
        return m;
    }

    bool all_finite() const {
        for (const auto& e : entries_)
            if (!e) return false;
        return true;
    }

    /// Text format: `n`, then n rows of n entries, `-inf` for the sentinel.
    static MaxPlusMatrix parse(std::istream& in) {
        long n = 0;
        if (!(in >> n) || n < 1) throw InvalidModel("max-plus file: expected dimension n >= 1");
        MaxPlusMatrix a(static_cast<std::size_t>(n));
        for (long i = 0; i < n; ++i)
            for (long j = 0; j < n; ++j) {
                std::string tok;
                if (!(in >> tok))
                    throw InvalidModel("max-plus file: missing entry (" + std::to_string(i + 1) + "," +
                                       std::to_string(j + 1) + ")");
                if (tok == "-inf") continue;
                std::size_t used = 0;
                double v = 0.0;
                try {
                    v = std::stod(tok, &used);
                } catch (const std::exception&) {
                    used = 0;
                }
                if (used != tok.size() || !std::isfinite(v))
                    throw InvalidModel("max-plus file: bad entry '" + tok + "'");
                a.set(static_cast<std::size_t>(i), static_cast<std::size_t>(j), v);
            }
        std::string extra;
        if (in >> extra) throw InvalidModel("max-plus file: trailing content '" + extra + "'");
        a.validate();
        return a;
    }

    void write(std::ostream& os) const {
        os << n_ << '\n';
        for (std::size_t i = 0; i < n_; ++i) {
            for (std::size_t j = 0; j < n_; ++j) {
                if (j) os << ' ';
                const auto& e = (*this)(i, j);
                os << (e ? format_real(*e) : std::string("-inf"));
            }
            os << '\n';
        }
    }

private:
    std::size_t n_ = 0;
    std::vector<Entry> entries_;
};

/// f_i(x) = max_j { a_ij + x_j }. Exact and non-smooth: classify() probes
/// the order conditions directly.
inline SystemDefinition max_plus(const MaxPlusMatrix& a) {
    a.validate();
    const std::size_t n = a.size();
    SystemDefinition sys;
    sys.time_domain = TimeDomain::discrete;
    sys.dim = n;
    sys.domain = DomainBox::whole_space(n);
    sys.label = "max_plus";
    sys.smooth = false;
    sys.eval = [a, n](std::span<const double> x) {
        StateVector y(n);
        for (std::size_t i = 0; i < n; ++i) {
            double best = -std::numeric_limits<double>::infinity();
            for (std::size_t j = 0; j < n; ++j)
                if (const auto& e = a(i, j)) best = std::max(best, *e + x[j]);
            y[i] = best;
        }
        return y;
    };
    return sys;
}

namespace detail {

/// Dense copy of A with the sentinel replaced by (min finite entry - 50/alpha).
inline Matrix smoothing_weights(const MaxPlusMatrix& a, double alpha) {
    const double fill = a.min_finite() - 50.0 / alpha;
    Matrix w(a.size(), a.size());
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < a.size(); ++j) w(i, j) = a(i, j).value_or(fill);
    return w;
}

}  // namespace detail

/// (1/alpha) log sum_j exp(alpha y_j), evaluated with the max shifted out.
inline double log_sum_exp(std::span<const double> y, double alpha) {
    const double m = *std::max_element(y.begin(), y.end());
    double s = 0.0;
    for (double v : y) s += std::exp(alpha * (v - m));
    return m + std::log(s) / alpha;
}

/// Softmax smoothing of a max-plus map:
/// f_i(x) = (1/alpha) log sum_j exp(alpha (a_ij + x_j)).
/// Jacobian rows are the softmax weights: positive, summing to one.
inline SystemDefinition smooth_max_plus(const MaxPlusMatrix& a, double alpha) {
    a.validate();
    if (!(alpha > 0.0) || !std::isfinite(alpha)) throw InvalidModel("smoothing alpha must be > 0");
    const std::size_t n = a.size();
    const Matrix w = detail::smoothing_weights(a, alpha);
    SystemDefinition sys;
    sys.time_domain = TimeDomain::discrete;
    sys.dim = n;
    sys.domain = DomainBox::whole_space(n);
    sys.label = "smooth_max_plus(alpha=" + format_real(alpha) + ")";
    if (!a.all_finite())
        sys.label += " [-inf replaced by " + format_real(a.min_finite() - 50.0 / alpha) + "]";
    sys.eval = [w, n, alpha](std::span<const double> x) {
        StateVector y(n), row(n);
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < n; ++j) row[j] = w(i, j) + x[j];
            y[i] = log_sum_exp(row, alpha);
        }
        return y;
    };
    sys.jacobian = [w, n, alpha](std::span<const double> x) {
        Matrix J(n, n);
        StateVector row(n);
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < n; ++j) row[j] = w(i, j) + x[j];
            const double m = *std::max_element(row.begin(), row.end());
            double s = 0.0;
            for (std::size_t j = 0; j < n; ++j) s += (J(i, j) = std::exp(alpha * (row[j] - m)));
            for (std::size_t j = 0; j < n; ++j) J(i, j) /= s;
        }
        return J;
    };
    return sys;
}

/// Weighted-average "alpha-max", sum_j y_j e^{alpha y_j} / sum_j e^{alpha y_j}.
/// Reference only: it is not order preserving when the inputs are spread out
/// by more than about 1/alpha.
inline double alpha_max(std::span<const double> y, double alpha) {
    const double m = *std::max_element(y.begin(), y.end());
    double num = 0.0, den = 0.0;
    for (double v : y) {
        const double e = std::exp(alpha * (v - m));
        num += v * e;
        den += e;
    }
    return num / den;
}

/// Max-plus map smoothed with alpha_max instead of log-sum-exp. Reference
/// system for comparison; it does not pass the monotonicity checks in general.
inline SystemDefinition alpha_max_plus_reference(const MaxPlusMatrix& a, double alpha) {
    a.validate();
    if (!(alpha > 0.0)) throw InvalidModel("smoothing alpha must be > 0");
    const std::size_t n = a.size();
    const Matrix w = detail::smoothing_weights(a, alpha);
    SystemDefinition sys;
    sys.time_domain = TimeDomain::discrete;
    sys.dim = n;
    sys.domain = DomainBox::whole_space(n);
    sys.label = "alpha_max_plus_reference(alpha=" + format_real(alpha) + ")";
    sys.eval = [w, n, alpha](std::span<const double> x) {
        StateVector y(n), row(n);
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < n; ++j) row[j] = w(i, j) + x[j];
            y[i] = alpha_max(row, alpha);
        }
        return y;
    };
    return sys;
}

// ---------------------------------------------------------------------------
// Stochastic games
// ---------------------------------------------------------------------------

/// Two-player zero-sum stochastic game with finite state and action sets.
/// Per state, rewards and transition rows are indexed by a1 * actions2 + a2.
struct StochasticGame {
    struct State {
        std::size_t actions1 = 1;
        std::size_t actions2 = 1;
        std::vector<double> rewards;
        std::vector<std::vector<double>> transitions;
    };

    static constexpr std::size_t max_actions = 8;
    std::vector<State> states;

    std::size_t size() const { return states.size(); }
    double reward(std::size_t i, std::size_t a1, std::size_t a2) const {
        return states[i].rewards[a1 * states[i].actions2 + a2];
    }
    const std::vector<double>& transition(std::size_t i, std::size_t a1, std::size_t a2) const {
        return states[i].transitions[a1 * states[i].actions2 + a2];
    }

    void validate() const {
        const std::size_t n = size();
        if (n == 0) throw InvalidModel("game needs at least one state");
        for (std::size_t i = 0; i < n; ++i) {
            const auto& s = states[i];
            const std::string where = "state " + std::to_string(i + 1);
            if (s.actions1 < 1 || s.actions2 < 1 || s.actions1 > max_actions ||
                s.actions2 > max_actions)
                throw InvalidModel(where + ": action counts must lie in 1.." +
                                   std::to_string(max_actions));
            const std::size_t pairs = s.actions1 * s.actions2;
            if (s.rewards.size() != pairs || s.transitions.size() != pairs)
                throw InvalidModel(where + ": expected " + std::to_string(pairs) +
                                   " rewards and transition rows");
            for (std::size_t k = 0; k < pairs; ++k) {
                if (!std::isfinite(s.rewards[k])) throw InvalidModel(where + ": non-finite reward");
                const auto& p = s.transitions[k];
                if (p.size() != n) throw InvalidModel(where + ": transition row has wrong length");
                double total = 0.0;
                for (double q : p) {
                    if (!(q >= 0.0) || !std::isfinite(q))
                        throw InvalidModel(where + ": transition probabilities must be >= 0");
                    total += q;
                }
                if (std::abs(total - 1.0) > 1e-12)
                    throw InvalidModel(where + ": transition probabilities sum to " +
                                       format_real(total));
            }
        }
    }
};

/// p(i | i, a1, a2) > 0 for every state and action pair.
inline bool shapley_type_k(const StochasticGame& gm) {
    for (std::size_t i = 0; i < gm.size(); ++i)
        for (const auto& row : gm.states[i].transitions)
            if (!(row[i] > 0.0)) return false;
    return true;
}

/// f_i(x) = min_{a1} max_{a2} { r(i,a1,a2) + sum_j p(j|i,a1,a2) x_j },
/// evaluated by exhaustive enumeration of the action sets.
inline SystemDefinition shapley(const StochasticGame& gm) {
    gm.validate();
    const std::size_t n = gm.size();
    SystemDefinition sys;
    sys.time_domain = TimeDomain::discrete;
    sys.dim = n;
    sys.domain = DomainBox::whole_space(n);
    sys.smooth = false;
    sys.label = std::string("shapley [self-transition positive: ") +
                (shapley_type_k(gm) ? "yes" : "no") + "]";
    sys.eval = [gm, n](std::span<const double> x) {
        StateVector y(n);
        for (std::size_t i = 0; i < n; ++i) {
            const auto& s = gm.states[i];
            double lo = std::numeric_limits<double>::infinity();
            for (std::size_t a1 = 0; a1 < s.actions1; ++a1) {
                double hi = -std::numeric_limits<double>::infinity();
                for (std::size_t a2 = 0; a2 < s.actions2; ++a2) {
                    const auto& p = gm.transition(i, a1, a2);
                    double v = gm.reward(i, a1, a2);
                    for (std::size_t j = 0; j < n; ++j) v += p[j] * x[j];
                    hi = std::max(hi, v);
                }
                lo = std::min(lo, hi);
            }
            y[i] = lo;
        }
        return y;
    };
    return sys;
}

// ---------------------------------------------------------------------------
// Consensus protocols and couplings
// ---------------------------------------------------------------------------

struct SaturatedCouplingParams {
    double s = 1.0;  // saturation level
    double m = 2.0;  // slope parameter
};

/// h(x) = s (1 - e^{-m x}) / (1 + e^{-m x}) = s tanh(m x / 2).
/// Odd, |h| < s, h'(0) = sup h' = m s / 2.
inline Coupling saturated_coupling(SaturatedCouplingParams p) {
    if (!(p.s > 0.0) || !(p.m > 0.0)) throw InvalidModel("saturated coupling needs s > 0 and m > 0");
    const double s = p.s, m = p.m;
    return {[s, m](double x) { return s * std::tanh(0.5 * m * x); },
            [s, m](double x) {
                const double t = std::tanh(0.5 * m * x);
                return 0.5 * m * s * (1.0 - t * t);
            },
            0.5 * m * s, "saturated(s=" + format_real(s) + ",m=" + format_real(m) + ")"};
}

inline Coupling sine_coupling() {
    return {[](double x) { return std::sin(x); }, [](double x) { return std::cos(x); }, 1.0, "sin"};
}

/// Linear protocol u_i = sum_j w_ij (x_j - x_i) as a multi-agent system.
/// Missing weights default to 1. In discrete time every gain must satisfy
/// eps_i < 1 / sum_j w_ij; otherwise construction is refused.
inline MasDefinition linear_consensus_mas(const DirectedGraph& g,
                                          const std::map<DirectedGraph::Edge, double>& weights,
                                          TimeDomain domain,
                                          const std::vector<double>& eps = {}) {
    MasDefinition mas;
    mas.graph = g;
    mas.time_domain = domain;
    mas.domain = DomainBox::whole_space(g.size());
    mas.label = "linear_consensus";
    mas.rules.resize(g.size());
    if (domain == TimeDomain::discrete && eps.size() != g.size())
        throw InvalidModel("discrete-time linear consensus needs one gain per agent");
    for (std::size_t i = 0; i < g.size(); ++i) {
        auto& r = mas.rules[i];
        r.agent = i;
        for (std::size_t j : g.neighbors(i)) {
            const auto it = weights.find({i, j});
            const double w = it == weights.end() ? 1.0 : it->second;
            if (!(w > 0.0)) throw InvalidModel("edge weights must be > 0");
            r.couplings[j] = {[w](double d) { return w * d; }, [w](double) { return w; }, w,
                              "linear(w=" + format_real(w) + ")"};
        }
        if (domain == TimeDomain::discrete) {
            r.epsilon = eps[i];
            const double bound = epsilon_bound(r);
            if (!(r.epsilon > 0.0) || !(r.epsilon < bound))
                throw InvalidModel("agent " + std::to_string(i + 1) + ": epsilon = " +
                                   format_real(r.epsilon) + " violates the bound 0 < epsilon < " +
                                   format_real(bound));
        }
    }
    return mas;
}

/// Continuous time: f(x) = -L x. Discrete time: f(x) = (I - diag(eps) L) x.
inline SystemDefinition linear_consensus(const DirectedGraph& g,
                                         const std::map<DirectedGraph::Edge, double>& weights,
                                         TimeDomain domain, const std::vector<double>& eps = {}) {
    return assemble(linear_consensus_mas(g, weights, domain, eps));
}

/// Saturated-coupling protocol with a common gain; refused in discrete time
/// when eps does not satisfy eps < 1 / (0.5 m s |N_i|) for every agent.
inline MasDefinition saturated_consensus_mas(const DirectedGraph& g, SaturatedCouplingParams p,
                                             TimeDomain domain, double eps = 0.0) {
    MasDefinition mas;
    mas.graph = g;
    mas.time_domain = domain;
    mas.domain = DomainBox::whole_space(g.size());
    mas.label = "saturated_consensus";
    mas.rules = uniform_rules(g, saturated_coupling(p), domain == TimeDomain::discrete ? eps : 0.0);
    if (domain == TimeDomain::discrete)
        for (const auto& r : mas.rules) {
            const double bound = epsilon_bound(r, 0.5 * p.m * p.s);
            if (!(eps > 0.0) || !(eps < bound))
                throw InvalidModel("agent " + std::to_string(r.agent + 1) + ": epsilon = " +
                                   format_real(eps) + " violates the bound 0 < epsilon < " +
                                   format_real(bound));
        }
    return mas;
}

inline SystemDefinition saturated_consensus(const DirectedGraph& g, SaturatedCouplingParams p,
                                            TimeDomain domain = TimeDomain::continuous,
                                            double eps = 0.0) {
    return assemble(saturated_consensus_mas(g, p, domain, eps));
}

/// Kuramoto-type network x_i' = sum_j h_ij(x_j - x_i) on the whole space,
/// without any domain restriction.
inline SystemDefinition kuramoto_field(const DirectedGraph& g, const Coupling& h) {
    MasDefinition mas;
    mas.graph = g;
    mas.time_domain = TimeDomain::continuous;
    mas.domain = DomainBox::whole_space(g.size());
    mas.label = "kuramoto_field(" + h.label + ")";
    mas.rules = uniform_rules(g, h);
    return assemble(mas);
}

/// Kuramoto network restricted to a box [a,b]^n with b - a <= alpha, where
/// each coupling is 2*pi-periodic, vanishes at 0 and is increasing on
/// (-alpha, alpha).
inline MasDefinition kuramoto_mas(const DirectedGraph& g,
                                  const std::map<DirectedGraph::Edge, Coupling>& couplings,
                                  const DomainBox& box, double alpha) {
    if (box.dim() != g.size()) throw DimensionError(g.size(), box.dim());
    if (!(alpha >= 0.0 && alpha <= std::numbers::pi)) throw InvalidModel("kuramoto: alpha must lie in [0, pi]");
    if (!box.bounded()) throw InvalidModel("kuramoto: the box must be bounded");
    const double a = box.lower()[0], b = box.upper()[0];
    for (std::size_t i = 0; i < box.dim(); ++i)
        if (box.lower()[i] != a || box.upper()[i] != b)
            throw InvalidModel("kuramoto: the box must have the form [a,b]^n");
    if (b - a > alpha)
        throw InvalidModel("kuramoto: box width " + format_real(b - a) + " exceeds alpha = " +
                           format_real(alpha));

    MasDefinition mas;
    mas.graph = g;
    mas.time_domain = TimeDomain::continuous;
    mas.domain = box;
    mas.label = "kuramoto";
    mas.rules.resize(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) {
        mas.rules[i].agent = i;
        for (std::size_t j : g.neighbors(i)) {
            const auto it = couplings.find({i, j});
            if (it == couplings.end())
                throw InvalidModel("kuramoto: missing coupling for edge (" + std::to_string(i + 1) +
                                   "," + std::to_string(j + 1) + ")");
            const Coupling& h = it->second;
            if (std::abs(h.h(0.0)) > 1e-12) throw InvalidModel("kuramoto: coupling must vanish at 0");
            for (double th : {-2.0, -0.7, 0.3, 1.1, 2.9})
                if (std::abs(h.h(th + 2.0 * std::numbers::pi) - h.h(th)) > 1e-9)
                    throw InvalidModel("kuramoto: coupling '" + h.label + "' is not 2*pi-periodic");
            mas.rules[i].couplings[j] = h;
        }
    }
    return mas;
}

inline MasDefinition kuramoto_mas(const DirectedGraph& g, const Coupling& h, const DomainBox& box,
                                  double alpha) {
    std::map<DirectedGraph::Edge, Coupling> all;
    for (const auto& e : g.edges()) all[e] = h;
    return kuramoto_mas(g, all, box, alpha);
}

inline SystemDefinition kuramoto(const DirectedGraph& g, const Coupling& h, const DomainBox& box,
                                 double alpha) {
    return assemble(kuramoto_mas(g, h, box, alpha));
}

// ---------------------------------------------------------------------------
// Chemical reaction networks
// ---------------------------------------------------------------------------

using RateFunction = std::function<StateVector(std::span<const double>)>;
using RateJacobian = std::function<Matrix(std::span<const double>)>;

struct ChemicalModel {
    SystemDefinition system;
    VerificationReport checks;  // plus-homogeneity and Metzler, sample-based
};

/// Reduced reaction-coordinate dynamics x' = h(Gamma x), Gamma a p x n matrix
/// and h: R^p -> R^n. The class is not certified; the instance is checked for
/// translation invariance and a Metzler Jacobian by sampling the box.
inline ChemicalModel chemical(const Matrix& gamma, RateFunction h, const DomainBox& box,
                              RateJacobian dh = {}, std::optional<SamplePlan> plan = {}) {
    const std::size_t n = gamma.cols();
    if (n == 0 || gamma.rows() == 0) throw InvalidModel("chemical: empty stoichiometry matrix");
    if (box.dim() != n) throw DimensionError(n, box.dim());

    StateVector probe(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double lo = box.lower()[i], hi = box.upper()[i];
        probe[i] = std::isfinite(lo) && std::isfinite(hi) ? 0.5 * (lo + hi)
                   : std::isfinite(lo)                     ? lo + 1.0
                   : std::isfinite(hi)                     ? hi - 1.0
                                                           : 0.0;
    }
    const StateVector out = h(gamma.apply(probe));
    if (out.size() != n)
        throw DimensionError("chemical: rate function returns " + std::to_string(out.size()) +
                             " components but Gamma has " + std::to_string(n) + " columns");

    ChemicalModel model;
    auto& sys = model.system;
    sys.time_domain = TimeDomain::continuous;
    sys.dim = n;
    sys.domain = box;
    sys.label = "chemical";
    sys.eval = [gamma, h](std::span<const double> x) { return h(gamma.apply(x)); };
    if (dh) {
        sys.jacobian = [gamma, dh, n](std::span<const double> x) {
            const Matrix d = dh(gamma.apply(x));  // n x p
            if (d.rows() != n || d.cols() != gamma.rows()) throw DimensionError(n, d.rows());
            Matrix J(n, n);
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = 0; j < n; ++j) {
                    double s = 0.0;
                    for (std::size_t k = 0; k < gamma.rows(); ++k) s += d(i, k) * gamma(k, j);
                    J(i, j) = s;
                }
            return J;
        };
    }

    SamplePlan p = plan.value_or(SamplePlan::standard(n));
    if (!plan) p.box = box.bounded() ? box : DomainBox::cube(n, -2.0, 2.0).intersect(box);
    const ToleranceConfig cfg = ToleranceConfig::continuous();
    model.checks = check_plus_homogeneity(sys, p, cfg);
    model.checks.append(check_metzler_ct(sys, p, cfg));
    model.checks.properties["plus_homogeneous"] = model.checks.checks[0].verdict;
    model.checks.properties["monotone"] = model.checks.checks[1].verdict;
    return model;
}

// ---------------------------------------------------------------------------
// Multiplicative conjugation
// ---------------------------------------------------------------------------

namespace detail {

inline DomainBox exp_box(const DomainBox& b) {
    StateVector lo(b.dim()), hi(b.dim());
    for (std::size_t i = 0; i < b.dim(); ++i) {
        lo[i] = std::exp(b.lower()[i]);
        hi[i] = std::exp(b.upper()[i]);
    }
    return DomainBox(std::move(lo), std::move(hi));
}

inline DomainBox log_box(const DomainBox& b) {
    StateVector lo(b.dim()), hi(b.dim());
    for (std::size_t i = 0; i < b.dim(); ++i) {
        lo[i] = b.lower()[i] > 0.0 ? std::log(b.lower()[i]) : -DomainBox::unbounded;
        hi[i] = std::log(b.upper()[i]);
    }
    return DomainBox(std::move(lo), std::move(hi));
}

}  // namespace detail

/// g = exp o f o log on the positive orthant. Plus-homogeneity of f becomes
/// g(lambda u) = lambda g(u).
inline SystemDefinition to_multiplicative(const SystemDefinition& sys) {
    if (!sys.is_discrete()) throw InvalidModel("to_multiplicative requires a discrete-time system");
    SystemDefinition g;
    g.time_domain = TimeDomain::discrete;
    g.dim = sys.dim;
    g.domain = detail::exp_box(sys.domain);
    g.smooth = sys.smooth;
    g.label = "multiplicative(" + sys.label + ")";
    g.eval = [sys](std::span<const double> u) {
        StateVector x(u.size());
        for (std::size_t i = 0; i < u.size(); ++i) {
            if (!(u[i] > 0.0)) throw InvalidModel("multiplicative map needs positive inputs");
            x[i] = std::log(u[i]);
        }
        StateVector y = evaluate(sys, x);
        for (double& v : y) v = std::exp(v);
        return y;
    };
    if (sys.has_jacobian()) {
        g.jacobian = [sys](std::span<const double> u) {
            StateVector x(u.size());
            for (std::size_t i = 0; i < u.size(); ++i) x[i] = std::log(u[i]);
            StateVector y = evaluate(sys, x);
            Matrix J = sys.jacobian(x);
            for (std::size_t i = 0; i < u.size(); ++i)
                for (std::size_t j = 0; j < u.size(); ++j) J(i, j) *= std::exp(y[i]) / u[j];
            return J;
        };
    }
    return g;
}

/// f = log o g o exp; inverse of to_multiplicative.
inline SystemDefinition to_additive(const SystemDefinition& g) {
    if (!g.is_discrete()) throw InvalidModel("to_additive requires a discrete-time system");
    SystemDefinition f;
    f.time_domain = TimeDomain::discrete;
    f.dim = g.dim;
    f.domain = detail::log_box(g.domain);
    f.smooth = g.smooth;
    f.label = "additive(" + g.label + ")";
    f.eval = [g](std::span<const double> x) {
        StateVector u(x.size());
        for (std::size_t i = 0; i < x.size(); ++i) u[i] = std::exp(x[i]);
        StateVector y = evaluate(g, u);
        for (double& v : y) {
            if (!(v > 0.0)) throw InvalidModel("additive map needs positive outputs of g");
            v = std::log(v);
        }
        return y;
    };
    return f;
}

// ---------------------------------------------------------------------------
// Reference systems
// ---------------------------------------------------------------------------

namespace detail {

inline SystemDefinition make_system(TimeDomain td, std::size_t n, std::string label, VectorField f,
                                    JacobianFn J = {}) {
    SystemDefinition s;
    s.time_domain = td;
    s.dim = n;
    s.domain = DomainBox::whole_space(n);
    s.label = std::move(label);
    s.eval = std::move(f);
    s.jacobian = std::move(J);
    return s;
}

}  // namespace detail

/// x(k+1) = A x(k); an averaging map when A is row-stochastic.
inline SystemDefinition linear_map(const Matrix& a, std::string label = "linear_map") {
    if (a.rows() != a.cols()) throw DimensionError(a.rows(), a.cols());
    return detail::make_system(
        TimeDomain::discrete, a.rows(), std::move(label),
        [a](std::span<const double> x) { return a.apply(x); },
        [a](std::span<const double>) { return a; });
}

/// x' = M x
inline SystemDefinition linear_field(const Matrix& m, std::string label = "linear_field") {
    if (m.rows() != m.cols()) throw DimensionError(m.rows(), m.cols());
    return detail::make_system(
        TimeDomain::continuous, m.rows(), std::move(label),
        [m](std::span<const double> x) { return m.apply(x); },
        [m](std::span<const double>) { return m; });
}

inline SystemDefinition identity_map(std::size_t n) {
    return linear_map(Matrix::identity(n), "identity");
}

inline SystemDefinition zero_field(std::size_t n) {
    return linear_field(Matrix(n, n), "zero_field");
}

/// f_i(x) = x_{perm[i]}
inline SystemDefinition permutation_map(const std::vector<std::size_t>& perm) {
    const std::size_t n = perm.size();
    Matrix p(n, n);
    std::vector<bool> seen(n, false);
    for (std::size_t i = 0; i < n; ++i) {
        if (perm[i] >= n || seen[perm[i]]) throw InvalidModel("not a permutation");
        seen[perm[i]] = true;
        p(i, perm[i]) = 1.0;
    }
    return linear_map(p, "permutation");
}

/// (x1, x2) -> (x2, x1)
inline SystemDefinition swap_map() {
    auto s = permutation_map({1, 0});
    s.label = "swap";
    return s;
}

/// x' = (-x2, x1)
inline SystemDefinition rotation_field() {
    return linear_field(Matrix{{0.0, -1.0}, {1.0, 0.0}}, "rotation");
}

/// f_i(x) = x_i^2, in either time domain.
inline SystemDefinition square_map(std::size_t n, TimeDomain td = TimeDomain::discrete) {
    return detail::make_system(
        td, n, "square",
        [](std::span<const double> x) {
            StateVector y(x.begin(), x.end());
            for (double& v : y) v = v * v;
            return y;
        },
        [n](std::span<const double> x) {
            Matrix J(n, n);
            for (std::size_t i = 0; i < n; ++i) J(i, i) = 2.0 * x[i];
            return J;
        });
}

/// f(x) = x + c 1
inline SystemDefinition shift_map(std::size_t n, double c) {
    return detail::make_system(
        TimeDomain::discrete, n, "shift(" + format_real(c) + ")",
        [c](std::span<const double> x) { return translate(x, c); },
        [n](std::span<const double>) { return Matrix::identity(n); });
}

/// f(x) = c x
inline SystemDefinition scaling_map(std::size_t n, double c) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = c;
    return linear_map(m, "scaling(" + format_real(c) + ")");
}

}  // namespace ktopical
