#pragma once

/// @file core.hpp
/// @brief State vectors, the componentwise order on R^n, the sup-metric and
/// the tolerance bundle shared by the rest of the library.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace ktopical {

using StateVector = std::vector<double>;

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class DimensionError : public Error {
public:
    DimensionError(std::size_t expected, std::size_t got)
        : Error("dimension mismatch: expected " + std::to_string(expected) +
                ", got " + std::to_string(got)) {}
    using Error::Error;
};

class NonFiniteError : public Error {
public:
    using Error::Error;
};

/// Raised by constructors when parameters violate their preconditions.
class InvalidModel : public Error {
public:
    using Error::Error;
};

inline void require_same_dim(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw DimensionError(x.size(), y.size());
}

inline bool all_finite(std::span<const double> x) {
    return std::all_of(x.begin(), x.end(), [](double v) { return std::isfinite(v); });
}

// ---------------------------------------------------------------------------
// Order and metric
// ---------------------------------------------------------------------------

/// Exact componentwise order x <= y.
inline bool partial_leq(std::span<const double> x, std::span<const double> y) {
    require_same_dim(x, y);
    for (std::size_t i = 0; i < x.size(); ++i)
        if (!(x[i] <= y[i])) return false;
    return true;
}

/// Componentwise order with slack: x_i <= y_i + tol for all i.
inline bool partial_leq(std::span<const double> x, std::span<const double> y, double tol) {
    require_same_dim(x, y);
    for (std::size_t i = 0; i < x.size(); ++i)
        if (!(x[i] <= y[i] + tol)) return false;
    return true;
}

/// max_i |x_i - y_i|
inline double sup_metric(std::span<const double> x, std::span<const double> y) {
    require_same_dim(x, y);
    double d = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) d = std::max(d, std::abs(x[i] - y[i]));
    return d;
}

inline double sup_norm(std::span<const double> x) {
    double d = 0.0;
    for (double v : x) d = std::max(d, std::abs(v));
    return d;
}

/// x + alpha * 1
inline StateVector translate(std::span<const double> x, double alpha) {
    StateVector out(x.begin(), x.end());
    for (double& v : out) v += alpha;
    return out;
}

/// max_i x_i - min_i x_i; zero exactly on the consensus line.
inline double width(std::span<const double> x) {
    if (x.empty()) throw DimensionError("width of an empty vector");
    auto [lo, hi] = std::minmax_element(x.begin(), x.end());
    return *hi - *lo;
}

inline double mean(std::span<const double> x) {
    if (x.empty()) throw DimensionError("mean of an empty vector");
    double s = 0.0;
    for (double v : x) s += v;
    return s / static_cast<double>(x.size());
}

// ---------------------------------------------------------------------------
// Dense matrix
// ---------------------------------------------------------------------------

/// Row-major dense matrix, used for Jacobians and small model parameters.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
    Matrix(std::initializer_list<std::initializer_list<double>> rows) {
        rows_ = rows.size();
        cols_ = rows_ ? rows.begin()->size() : 0;
        data_.reserve(rows_ * cols_);
        for (const auto& r : rows) {
            if (r.size() != cols_) throw DimensionError(cols_, r.size());
            data_.insert(data_.end(), r.begin(), r.end());
        }
    }

    static Matrix identity(std::size_t n) {
        Matrix m(n, n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    std::span<const double> row(std::size_t i) const {
        return {data_.data() + i * cols_, cols_};
    }

    StateVector apply(std::span<const double> x) const {
        if (x.size() != cols_) throw DimensionError(cols_, x.size());
        StateVector y(rows_, 0.0);
        for (std::size_t i = 0; i < rows_; ++i) {
            double s = 0.0;
            for (std::size_t j = 0; j < cols_; ++j) s += (*this)(i, j) * x[j];
            y[i] = s;
        }
        return y;
    }

    double row_sum(std::size_t i) const {
        double s = 0.0;
        for (double v : row(i)) s += v;
        return s;
    }

    bool operator==(const Matrix&) const = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

// ---------------------------------------------------------------------------
// Domain box
// ---------------------------------------------------------------------------

/// Axis-aligned box; +/-infinity in a bound marks that side as unbounded.
class DomainBox {
public:
    static constexpr double unbounded = std::numeric_limits<double>::infinity();

    DomainBox() = default;
    DomainBox(StateVector lower, StateVector upper)
        : lower_(std::move(lower)), upper_(std::move(upper)) {
        if (lower_.size() != upper_.size()) throw DimensionError(lower_.size(), upper_.size());
        if (lower_.empty()) throw DimensionError("domain box must have dimension >= 1");
        for (std::size_t i = 0; i < lower_.size(); ++i) {
            if (std::isnan(lower_[i]) || std::isnan(upper_[i]) || !(lower_[i] < upper_[i]))
                throw InvalidModel("domain box has empty interior in coordinate " +
                                   std::to_string(i + 1));
        }
    }

    /// [lo, hi]^n
    static DomainBox cube(std::size_t n, double lo, double hi) {
        return DomainBox(StateVector(n, lo), StateVector(n, hi));
    }
    static DomainBox whole_space(std::size_t n) { return cube(n, -unbounded, unbounded); }

    std::size_t dim() const { return lower_.size(); }
    const StateVector& lower() const { return lower_; }
    const StateVector& upper() const { return upper_; }

    bool bounded() const { return all_finite(lower_) && all_finite(upper_); }

    /// Closed-box membership.
    bool contains(std::span<const double> x) const {
        if (x.size() != dim()) return false;
        for (std::size_t i = 0; i < x.size(); ++i)
            if (x[i] < lower_[i] || x[i] > upper_[i]) return false;
        return true;
    }

    /// Intersection with another box of equal dimension.
    DomainBox intersect(const DomainBox& other) const {
        if (other.dim() != dim()) throw DimensionError(dim(), other.dim());
        StateVector lo(dim()), hi(dim());
        for (std::size_t i = 0; i < dim(); ++i) {
            lo[i] = std::max(lower_[i], other.lower_[i]);
            hi[i] = std::min(upper_[i], other.upper_[i]);
        }
        return DomainBox(std::move(lo), std::move(hi));
    }

    bool operator==(const DomainBox&) const = default;

private:
    StateVector lower_;
    StateVector upper_;
};

// ---------------------------------------------------------------------------
// Tolerances
// ---------------------------------------------------------------------------

/// Numerical knobs shared by simulation and verification.
///
/// `max_horizon` is an iteration count for discrete-time runs and a time for
/// continuous-time runs. `dt` and `stride` only matter in continuous time.
struct ToleranceConfig {
    double eq_tol = 1e-9;
    double strict_margin = 1e-7;
    double fd_step = 1e-6;
    double convergence_tol = 1e-9;
    double max_horizon = 1e4;

    double dt = 1e-2;
    double stride = 1e-1;
    int window = 5;
    double divergence_bound = 1e12;
    int max_period = 64;

    static ToleranceConfig discrete() { return ToleranceConfig{}; }

    static ToleranceConfig continuous() {
        ToleranceConfig c;
        c.eq_tol = 1e-6;
        c.strict_margin = 1e-6;
        c.max_horizon = 100.0;
        return c;
    }

    void validate() const {
        auto positive = [](double v, const char* name) {
            if (!(v > 0.0) || !std::isfinite(v))
                throw InvalidModel(std::string("tolerance '") + name + "' must be finite and > 0");
        };
        positive(eq_tol, "eq_tol");
        positive(strict_margin, "strict_margin");
        positive(fd_step, "fd_step");
        positive(convergence_tol, "convergence_tol");
        positive(max_horizon, "max_horizon");
        positive(dt, "dt");
        positive(stride, "stride");
        positive(divergence_bound, "divergence_bound");
        if (strict_margin < eq_tol) throw InvalidModel("strict_margin must be >= eq_tol");
        if (window < 1) throw InvalidModel("window must be >= 1");
        if (max_period < 2) throw InvalidModel("max_period must be >= 2");
    }
};

}  // namespace ktopical
