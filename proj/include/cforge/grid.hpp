#pragma once

#include "cforge/errors.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <type_traits>
#include <vector>

namespace cforge {

// Uniform rectangular grid over a coordinate chart. Points are stored with
// axis 0 slowest (C order). Non-periodic axes include both end points;
// periodic axes cover [origin, origin + dims*spacing).
struct Grid {
    std::vector<int> dims;
    std::vector<double> spacing;
    std::vector<double> origin;
    std::vector<bool> periodic;

    static Grid box(const std::vector<int>& dims, const std::vector<double>& lo, const std::vector<double>& hi,
                    const std::vector<bool>& periodic = {});

    int ndim() const { return static_cast<int>(dims.size()); }
    std::size_t size() const;
    std::size_t stride(int axis) const;
    std::vector<int> multi_index(std::size_t flat) const;
    std::size_t flat_index(const std::vector<int>& idx) const;
    int index_along(std::size_t flat, int axis) const;
    double coord(std::size_t flat, int axis) const;
    Eigen::VectorXd point(std::size_t flat) const;
    double max_spacing() const;
    // Trapezoid weight on open axes, rectangle weight on periodic ones.
    double quad_weight(std::size_t flat) const;
    double volume() const;

    void validate() const;
    bool operator==(const Grid& o) const = default;
};

// Samples of one value type per grid point.
template <class T>
struct Field {
    Grid grid;
    std::vector<T> data;

    Field() = default;
    Field(const Grid& g, const T& init) : grid(g), data(g.size(), init) {}
    explicit Field(const Grid& g) : grid(g), data(g.size()) {}

    std::size_t size() const { return data.size(); }
    T& operator[](std::size_t i) { return data[i]; }
    const T& operator[](std::size_t i) const { return data[i]; }
};

using ScalarField = Field<double>;
using VectorField = Field<Eigen::VectorXd>;
using MatrixField = Field<Eigen::MatrixXd>;

template <class T, class = void>
struct plain_of {
    using type = T;
};
template <class T>
struct plain_of<T, std::void_t<typename T::PlainObject>> {
    using type = typename T::PlainObject;
};

// Second order finite difference of an arbitrary per-point quantity along one
// axis: central in the interior, one sided at open boundaries, wrapped on
// periodic axes. get(flat) may return a double or any Eigen dense type.
template <class Get>
auto fd_derivative(const Grid& grid, std::size_t p, int axis, Get&& get)
{
    using R = typename plain_of<std::decay_t<decltype(get(p))>>::type;
    const int n = grid.dims[axis];
    const int i = grid.index_along(p, axis);
    const std::size_t s = grid.stride(axis);
    const double h = grid.spacing[axis];
    if (n < 3) throw ShapeMismatch("finite differences need at least 3 points along an axis");
    if (grid.periodic[axis]) {
        const std::size_t up = (i + 1 == n) ? p - std::size_t(n - 1) * s : p + s;
        const std::size_t dn = (i == 0) ? p + std::size_t(n - 1) * s : p - s;
        R r = (get(up) - get(dn)) / (2.0 * h);
        return r;
    }
    if ((i == 0 || i == n - 1) && n >= 4) {
        // One sided and second order, with the leading error term of the
        // central stencil (h^2 f'''/6), so nested differences stay second
        // order up to the boundary.
        const std::size_t q1 = i == 0 ? p + s : p - s;
        const std::size_t q2 = i == 0 ? p + 2 * s : p - 2 * s;
        const std::size_t q3 = i == 0 ? p + 3 * s : p - 3 * s;
        const double sg = i == 0 ? 1.0 : -1.0;
        const auto f0 = get(p);
        R r = sg * (3.5 * (get(q1) - f0) - 2.0 * (get(q2) - f0) + 0.5 * (get(q3) - f0)) / h;
        return r;
    }
    if (i == 0) {
        R r = (-3.0 * get(p) + 4.0 * get(p + s) - get(p + 2 * s)) / (2.0 * h);
        return r;
    }
    if (i == n - 1) {
        R r = (3.0 * get(p) - 4.0 * get(p - s) + get(p - 2 * s)) / (2.0 * h);
        return r;
    }
    R r = (get(p + s) - get(p - s)) / (2.0 * h);
    return r;
}

// Same stencil applied to a contiguous block of `block` doubles per point.
void fd_block(const Grid& grid, const double* data, std::size_t block, std::size_t p, int axis, double* out);

// Integral of a scalar field with the grid's quadrature weights.
double integrate(const ScalarField& f);

// Helpers for building fields from closures.
template <class F>
auto sample(const Grid& grid, F&& fn)
{
    using V = typename plain_of<std::decay_t<decltype(fn(Eigen::VectorXd()))>>::type;
    Field<V> out(grid);
    for (std::size_t p = 0; p < grid.size(); ++p) out.data[p] = fn(grid.point(p));
    return out;
}

} // namespace cforge
