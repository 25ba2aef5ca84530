#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace sdelab {

/// Thrown when declared coefficient constants fail their randomized audit.
class AuditError : public std::runtime_error {
public:
    explicit AuditError(const std::string& what) : std::runtime_error(what) {}
};

/// Thrown when a quantity cannot be resolved on the available grid; carries
/// the bracket that was achieved before giving up.
class TruncationError : public std::runtime_error {
public:
    TruncationError(const std::string& what, double lo, double hi)
        : std::runtime_error(what), bracket_lo(lo), bracket_hi(hi) {}
    double bracket_lo;
    double bracket_hi;
};

/// Uniform time grid t_k = t0 + k*h, k = 0..n-1.
struct UniformGrid {
    double t0 = 0.0;
    double h = 1.0;
    std::size_t n = 2;

    double time(std::size_t k) const { return t0 + static_cast<double>(k) * h; }
    double t_end() const { return time(n - 1); }
    double span() const { return static_cast<double>(n - 1) * h; }

    /// Nearest grid index for time t (clamped to the grid).
    std::size_t index_of(double t) const;
    bool contains(double t) const { return t >= t0 - 0.5 * h && t <= t_end() + 0.5 * h; }

    bool operator==(const UniformGrid&) const = default;
};

UniformGrid make_grid(double t0, double h, std::size_t n);

/// Grid extended backward by at least `extra` (whole steps), same h and end point.
UniformGrid extend_backward(const UniformGrid& g, double extra);

/// A deterministic vector-valued function sampled on a uniform grid.
/// Values are stored row-major: values[k*dim + d] is component d at time t_k.
struct SampledPath {
    UniformGrid grid;
    std::size_t dim = 1;
    std::vector<double> values;

    double at(std::size_t k, std::size_t d = 0) const { return values[k * dim + d]; }
    double& at(std::size_t k, std::size_t d = 0) { return values[k * dim + d]; }
    std::span<const double> row(std::size_t k) const { return {values.data() + k * dim, dim}; }

    /// Piecewise-linear evaluation; t must lie inside the grid span.
    void value_at(double t, std::span<double> out) const;
    double scalar_at(double t) const;

    double max_abs() const;
    /// max over grid of the squared Euclidean row norm.
    double max_sq_norm() const;
};

SampledPath make_path(const UniformGrid& grid, std::size_t dim);
SampledPath sample_scalar(const UniformGrid& grid, const std::function<double(double)>& f);
SampledPath constant_path(const UniformGrid& grid, double c, std::size_t dim = 1);

void check_same_shape(const SampledPath& a, const SampledPath& b, const char* where);

/// Euclidean distance between rows k of two paths sharing a grid.
double row_distance(const SampledPath& a, const SampledPath& b, std::size_t k);

}  // namespace sdelab
