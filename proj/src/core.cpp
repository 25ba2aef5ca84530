#include "sdelab/core.hpp"

#include <algorithm>
#include <cmath>

namespace sdelab {

std::size_t UniformGrid::index_of(double t) const {
    double k = std::round((t - t0) / h);
    if (k < 0.0) return 0;
    std::size_t i = static_cast<std::size_t>(k);
    return std::min(i, n - 1);
}

UniformGrid make_grid(double t0, double h, std::size_t n) {
    if (!(h > 0.0)) throw std::invalid_argument("grid step must be positive");
    if (n < 2) throw std::invalid_argument("grid needs at least two samples");
    return UniformGrid{t0, h, n};
}

UniformGrid extend_backward(const UniformGrid& g, double extra) {
    if (extra < 0.0) throw std::invalid_argument("extend_backward: extra must be >= 0");
    std::size_t steps = static_cast<std::size_t>(std::ceil(extra / g.h - 1e-12));
    return UniformGrid{g.t0 - static_cast<double>(steps) * g.h, g.h, g.n + steps};
}

void SampledPath::value_at(double t, std::span<double> out) const {
    double s = (t - grid.t0) / grid.h;
    if (s < -1e-9 || s > static_cast<double>(grid.n - 1) + 1e-9)
        throw std::out_of_range("SampledPath::value_at: t outside grid span");
    s = std::clamp(s, 0.0, static_cast<double>(grid.n - 1));
    std::size_t k = std::min(static_cast<std::size_t>(s), grid.n - 2);
    double w = s - static_cast<double>(k);
    for (std::size_t d = 0; d < dim; ++d)
        out[d] = (1.0 - w) * at(k, d) + w * at(k + 1, d);
}

double SampledPath::scalar_at(double t) const {
    double v;
    value_at(t, {&v, 1});
    return v;
}

double SampledPath::max_abs() const {
    double m = 0.0;
    for (double v : values) m = std::max(m, std::abs(v));
    return m;
}

double SampledPath::max_sq_norm() const {
    double m = 0.0;
    for (std::size_t k = 0; k < grid.n; ++k) {
        double s = 0.0;
        for (std::size_t d = 0; d < dim; ++d) s += at(k, d) * at(k, d);
        m = std::max(m, s);
    }
    return m;
}

SampledPath make_path(const UniformGrid& grid, std::size_t dim) {
    if (dim == 0) throw std::invalid_argument("path dimension must be positive");
    SampledPath p;
    p.grid = grid;
    p.dim = dim;
    p.values.assign(grid.n * dim, 0.0);
    return p;
}

SampledPath sample_scalar(const UniformGrid& grid, const std::function<double(double)>& f) {
    SampledPath p = make_path(grid, 1);
    for (std::size_t k = 0; k < grid.n; ++k) p.at(k) = f(grid.time(k));
    return p;
}

SampledPath constant_path(const UniformGrid& grid, double c, std::size_t dim) {
    SampledPath p = make_path(grid, dim);
    std::fill(p.values.begin(), p.values.end(), c);
    return p;
}

void check_same_shape(const SampledPath& a, const SampledPath& b, const char* where) {
    if (!(a.grid == b.grid) || a.dim != b.dim)
        throw std::invalid_argument(std::string(where) + ": paths must share grid and dimension");
}

double row_distance(const SampledPath& a, const SampledPath& b, std::size_t k) {
    double s = 0.0;
    for (std::size_t d = 0; d < a.dim; ++d) {
        double diff = a.at(k, d) - b.at(k, d);
        s += diff * diff;
    }
    return std::sqrt(s);
}

}  // namespace sdelab
