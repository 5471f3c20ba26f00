#include "cforge/grid.hpp"

#include "cforge/util.hpp"

#include <algorithm>
#include <string>

namespace cforge {

Grid Grid::box(const std::vector<int>& dims, const std::vector<double>& lo, const std::vector<double>& hi,
               const std::vector<bool>& periodic) {
    if (dims.size() != lo.size() || dims.size() != hi.size())
        throw ShapeMismatch("Grid::box: dims/lo/hi length mismatch");
    Grid g;
    g.dims = dims;
    g.origin = lo;
    g.periodic = periodic.empty() ? std::vector<bool>(dims.size(), false) : periodic;
    if (g.periodic.size() != dims.size()) throw ShapeMismatch("Grid::box: periodic flags length mismatch");
    for (std::size_t a = 0; a < dims.size(); ++a) {
        const int den = g.periodic[a] ? dims[a] : dims[a] - 1;
        g.spacing.push_back(den > 0 ? (hi[a] - lo[a]) / den : 1.0);
    }
    g.validate();
    return g;
}

std::size_t Grid::size() const {
    std::size_t s = 1;
    for (int d : dims) s *= std::size_t(d);
    return s;
}

std::size_t Grid::stride(int axis) const {
    std::size_t s = 1;
    for (int a = ndim() - 1; a > axis; --a) s *= std::size_t(dims[a]);
    return s;
}

std::vector<int> Grid::multi_index(std::size_t flat) const {
    std::vector<int> idx(dims.size());
    for (int a = ndim() - 1; a >= 0; --a) {
        idx[a] = int(flat % std::size_t(dims[a]));
        flat /= std::size_t(dims[a]);
    }
    return idx;
}

std::size_t Grid::flat_index(const std::vector<int>& idx) const {
    std::size_t f = 0;
    for (int a = 0; a < ndim(); ++a) f = f * std::size_t(dims[a]) + std::size_t(idx[a]);
    return f;
}

int Grid::index_along(std::size_t flat, int axis) const {
    return int((flat / stride(axis)) % std::size_t(dims[axis]));
}

double Grid::coord(std::size_t flat, int axis) const {
    return origin[axis] + spacing[axis] * index_along(flat, axis);
}

Eigen::VectorXd Grid::point(std::size_t flat) const {
    Eigen::VectorXd x(ndim());
    for (int a = 0; a < ndim(); ++a) x[a] = coord(flat, a);
    return x;
}

double Grid::max_spacing() const { return *std::max_element(spacing.begin(), spacing.end()); }

double Grid::quad_weight(std::size_t flat) const {
    double w = 1.0;
    for (int a = 0; a < ndim(); ++a) {
        double wa = spacing[a];
        if (!periodic[a]) {
            const int i = index_along(flat, a);
            if (dims[a] == 1)
                wa = 1.0;
            else if (i == 0 || i == dims[a] - 1)
                wa *= 0.5;
        }
        w *= wa;
    }
    return w;
}

double Grid::volume() const {
    double v = 1.0;
    for (int a = 0; a < ndim(); ++a) v *= periodic[a] ? spacing[a] * dims[a] : spacing[a] * (dims[a] - 1);
    return v;
}

void Grid::validate() const {
    const std::size_t n = dims.size();
    if (n == 0) throw ShapeMismatch("grid has no axes");
    if (spacing.size() != n || origin.size() != n || periodic.size() != n)
        throw ShapeMismatch("grid metadata lengths differ");
    for (std::size_t a = 0; a < n; ++a) {
        if (dims[a] < 1) throw ShapeMismatch("grid axis " + std::to_string(a) + " has no points");
        if (!(spacing[a] > 0.0)) throw ShapeMismatch("grid spacing must be positive");
    }
}

void fd_block(const Grid& grid, const double* data, std::size_t block, std::size_t p, int axis, double* out) {
    const int n = grid.dims[axis];
    const int i = grid.index_along(p, axis);
    const std::size_t s = grid.stride(axis);
    const double h = grid.spacing[axis];
    if (n < 3) throw ShapeMismatch("finite differences need at least 3 points along an axis");
    auto at = [&](std::size_t q) { return data + q * block; };
    if (grid.periodic[axis]) {
        const std::size_t up = (i + 1 == n) ? p - std::size_t(n - 1) * s : p + s;
        const std::size_t dn = (i == 0) ? p + std::size_t(n - 1) * s : p - s;
        const double* u = at(up);
        const double* d = at(dn);
        for (std::size_t c = 0; c < block; ++c) out[c] = (u[c] - d[c]) / (2.0 * h);
        return;
    }
    if ((i == 0 || i == n - 1) && n >= 4) {
        // One sided, second order, leading error matched to the central stencil.
        const long d = (i == 0) ? long(s) : -long(s);
        const double sg = (i == 0) ? 1.0 : -1.0;
        const double *a0 = at(p), *a1 = at(p + d), *a2 = at(p + 2 * d), *a3 = at(p + 3 * d);
        for (std::size_t c = 0; c < block; ++c)
            out[c] = sg * (3.5 * (a1[c] - a0[c]) - 2.0 * (a2[c] - a0[c]) + 0.5 * (a3[c] - a0[c])) / h;
    } else if (i == 0) {
        const double *a0 = at(p), *a1 = at(p + s), *a2 = at(p + 2 * s);
        for (std::size_t c = 0; c < block; ++c) out[c] = (-3.0 * a0[c] + 4.0 * a1[c] - a2[c]) / (2.0 * h);
    } else if (i == n - 1) {
        const double *a0 = at(p), *a1 = at(p - s), *a2 = at(p - 2 * s);
        for (std::size_t c = 0; c < block; ++c) out[c] = (3.0 * a0[c] - 4.0 * a1[c] + a2[c]) / (2.0 * h);
    } else {
        const double *u = at(p + s), *d = at(p - s);
        for (std::size_t c = 0; c < block; ++c) out[c] = (u[c] - d[c]) / (2.0 * h);
    }
}

double integrate(const ScalarField& f) {
    return parallel_sum(f.size(), [&](std::size_t p) { return f.grid.quad_weight(p) * f.data[p]; });
}

} // namespace cforge
