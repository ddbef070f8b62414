#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace drocc {

// Base class for all toolkit errors. Specific conditions get their own type
// so callers can catch exactly what they expect to handle.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct MalformedProblem : Error {
    using Error::Error;
};
struct DimensionMismatch : Error {
    using Error::Error;
};
struct PoolTooSmall : Error {
    using Error::Error;
};
struct EmptySampleSet : Error {
    using Error::Error;
};
struct NonLinearSet : Error {
    using Error::Error;
};
struct InfeasibleSet : Error {
    using Error::Error;
};
struct NominalOutsideSupport : Error {
    using Error::Error;
};
struct InfeasibleAnchor : Error {
    using Error::Error;
};
struct NonPositiveAlpha : Error {
    using Error::Error;
};
struct EvaluationError : Error {
    using Error::Error;
};
struct MissingConstant : Error {
    using Error::Error;
};
struct NoFeasibleStart : Error {
    using Error::Error;
};
struct AllCandidatesInfeasible : Error {
    using Error::Error;
};
struct TooFewFeasibleReplicates : Error {
    using Error::Error;
};
struct InvalidAlpha : Error {
    using Error::Error;
};
struct ConfigError : Error {
    using Error::Error;
};

// Dense row-major matrix. Problem sizes here are desk scale, so a flat
// vector with index arithmetic is all we need.
class Matrix {
  public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    static Matrix identity(std::size_t n) {
        Matrix m(n, n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }

    double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    bool empty() const { return data_.empty(); }

    std::span<double> row(std::size_t i) { return {data_.data() + i * cols_, cols_}; }
    std::span<const double> row(std::size_t i) const { return {data_.data() + i * cols_, cols_}; }

    const std::vector<double>& data() const { return data_; }
    std::vector<double>& data() { return data_; }

    void append_row(std::span<const double> r) {
        if (cols_ == 0) cols_ = r.size();
        if (r.size() != cols_) throw DimensionMismatch("append_row: width mismatch");
        data_.insert(data_.end(), r.begin(), r.end());
        ++rows_;
    }

  private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

inline double dot(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw DimensionMismatch("dot: length mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline double norm2(std::span<const double> a) {
    double s = 0.0;
    for (double v : a) s += v * v;
    return std::sqrt(s);
}

inline double dist2(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw DimensionMismatch("dist2: length mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return std::sqrt(s);
}

inline bool all_finite(std::span<const double> a) {
    for (double v : a)
        if (!std::isfinite(v)) return false;
    return true;
}

}  // namespace drocc
