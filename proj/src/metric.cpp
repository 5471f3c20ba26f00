#include "cforge/metric.hpp"

#include "cforge/cartan.hpp"
#include "cforge/util.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace cforge {

namespace {

int eigen_index(const Eigen::MatrixXd& g) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (g + g.transpose()), Eigen::EigenvaluesOnly);
    int neg = 0;
    for (int i = 0; i < es.eigenvalues().size(); ++i)
        if (es.eigenvalues()[i] < 0.0) ++neg;
    return neg;
}

int ipow(int b, int e) {
    int r = 1;
    for (int i = 0; i < e; ++i) r *= b;
    return r;
}

// Contract index `pos` (of `rank`) of a single point's component array with M.
std::vector<double> apply_on_index(const std::vector<double>& c, int n, int rank, int pos, const Eigen::MatrixXd& M) {
    std::vector<double> out(c.size(), 0.0);
    const int stride = ipow(n, rank - 1 - pos);
    for (std::size_t idx = 0; idx < c.size(); ++idx) {
        const int digit = int(idx / stride) % n;
        const std::size_t base = idx - std::size_t(digit) * stride;
        double s = 0.0;
        for (int j = 0; j < n; ++j) s += M(digit, j) * c[base + std::size_t(j) * stride];
        out[idx] = s;
    }
    return out;
}

} // namespace

std::vector<int> sorted_signature(int n, int index) {
    std::vector<int> s(n, 1);
    for (int i = 0; i < index; ++i) s[i] = -1;
    return s;
}

MetricData MetricData::from_field(MatrixField g, double floor) {
    if (g.data.empty()) throw ShapeMismatch("empty metric field");
    MetricData m;
    m.floor = floor;
    const int n = int(g.data[0].rows());
    m.index = eigen_index(g.data[0]);
    m.signature = sorted_signature(n, m.index);
    m.g = std::move(g);
    return m;
}

MetricData MetricData::constant(const Grid& grid, const Eigen::MatrixXd& g, double floor) {
    return from_field(MatrixField(grid, g), floor);
}

MetricDiagnostics validate_metric(const MetricData& g) {
    MetricDiagnostics d;
    const std::size_t np = g.g.size();
    if (np == 0) throw ShapeMismatch("metric has no samples");
    const int n = g.dim();
    d.min_abs_det = std::numeric_limits<double>::infinity();
    d.pointwise_index.resize(np);
    for (std::size_t p = 0; p < np; ++p) {
        const Eigen::MatrixXd& m = g.g[p];
        if (m.rows() != n || m.cols() != n) throw ShapeMismatch("metric sample has wrong shape");
        d.max_symmetry_defect = std::max(d.max_symmetry_defect, (m - m.transpose()).cwiseAbs().maxCoeff());
        d.min_abs_det = std::min(d.min_abs_det, std::abs(m.determinant()));
        d.pointwise_index[p] = eigen_index(m);
    }
    if (d.min_abs_det < g.floor)
        throw DegenerateMetric("min |det g| = " + std::to_string(d.min_abs_det) + " below floor " +
                               std::to_string(g.floor));
    for (std::size_t p = 0; p < np; ++p)
        if (d.pointwise_index[p] != g.index)
            throw IndexMismatch("index " + std::to_string(d.pointwise_index[p]) + " at point " + std::to_string(p) +
                                ", declared " + std::to_string(g.index));
    return d;
}

FrameField FrameField::from_vectors(MatrixField e, std::vector<int> signature) {
    FrameField f;
    f.theta = MatrixField(e.grid);
    for (std::size_t p = 0; p < e.size(); ++p) f.theta[p] = e[p].inverse();
    f.e = std::move(e);
    f.signature = std::move(signature);
    return f;
}

FrameField identity_frame(const Grid& grid, int n) {
    return FrameField::from_vectors(MatrixField(grid, Eigen::MatrixXd::Identity(n, n)), std::vector<int>(n, 1));
}

FrameField gram_schmidt(const MetricData& g, const FrameField& seed, double null_tol) {
    const int n = g.dim();
    const std::size_t np = g.g.size();
    if (seed.e.size() != np) throw ShapeMismatch("gram_schmidt: seed lives on another grid");
    MatrixField e(g.grid());
    std::vector<std::vector<int>> sig(np);
    parallel_for(np, [&](std::size_t p) {
        const Eigen::MatrixXd& G = g.g[p];
        const Eigen::MatrixXd& V = seed.e[p];
        if (V.rows() != n || V.cols() != n) throw ShapeMismatch("gram_schmidt: seed has wrong shape");
        Eigen::MatrixXd E(n, n);
        std::vector<int> eps(n);
        for (int i = 0; i < n; ++i) {
            Eigen::VectorXd u = V.col(i);
            for (int j = 0; j < i; ++j) u -= double(eps[j]) * (u.dot(G * E.col(j))) * E.col(j);
            const double s = u.dot(G * u);
            const double scale = V.col(i).cwiseAbs().dot(G.cwiseAbs() * V.col(i).cwiseAbs());
            if (std::abs(s) <= null_tol * std::max(scale, 1e-300))
                throw NullVectorEncountered("seed column " + std::to_string(i) + " becomes null at point " +
                                            std::to_string(p));
            E.col(i) = u / std::sqrt(std::abs(s));
            eps[i] = s < 0.0 ? -1 : 1;
        }
        // timelike first, otherwise stable
        std::vector<int> order(n);
        for (int i = 0; i < n; ++i) order[i] = i;
        std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return eps[a] < eps[b]; });
        Eigen::MatrixXd S(n, n);
        std::vector<int> se(n);
        for (int i = 0; i < n; ++i) {
            S.col(i) = E.col(order[i]);
            se[i] = eps[order[i]];
        }
        e[p] = S;
        sig[p] = se;
    });
    for (std::size_t p = 1; p < np; ++p)
        if (sig[p] != sig[0]) throw IndexMismatch("frame signature changes across the grid");
    return FrameField::from_vectors(std::move(e), sig[0]);
}

double orthonormality_defect(const FrameField& f, const MetricData& g) {
    double d = 0.0;
    const int n = g.dim();
    Eigen::MatrixXd eps = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i) eps(i, i) = f.signature[i];
    for (std::size_t p = 0; p < g.g.size(); ++p)
        d = std::max(d, (f.e[p].transpose() * g.g[p] * f.e[p] - eps).cwiseAbs().maxCoeff());
    return d;
}

TensorField::TensorField(const Grid& g, int n_, int up_, int down_) : grid(g), n(n_), up(up_), down(down_) {
    comps.assign(g.size() * std::size_t(ncomp()), 0.0);
}

int TensorField::ncomp() const { return ipow(n, up + down); }

ScalarField tensor_inner(const TensorField& t, const TensorField& s, const MetricData& g) {
    if (t.up != s.up || t.down != s.down || t.n != s.n) throw ValenceMismatch("tensor_inner: valences differ");
    if (!(t.grid == s.grid)) throw ShapeMismatch("tensor_inner: grids differ");
    const int rank = t.up + t.down;
    const int nc = t.ncomp();
    ScalarField out(t.grid, 0.0);
    parallel_for(t.grid.size(), [&](std::size_t p) {
        std::vector<double> c(s.comps.begin() + p * nc, s.comps.begin() + (p + 1) * nc);
        const Eigen::MatrixXd& G = g.g[p];
        const Eigen::MatrixXd Gi = G.inverse();
        for (int a = 0; a < rank; ++a) c = apply_on_index(c, t.n, rank, a, a < t.up ? G : Gi);
        double v = 0.0;
        for (int i = 0; i < nc; ++i) v += t.comps[p * nc + i] * c[i];
        out[p] = v;
    });
    return out;
}

ScalarField tensor_norm(const TensorField& t, const MetricData& g) {
    ScalarField s = tensor_inner(t, t, g);
    for (double& v : s.data) v = std::sqrt(std::abs(v));
    return s;
}

ScalarField volume_form(const MetricData& g) {
    validate_metric(g);
    ScalarField v(g.grid(), 0.0);
    for (std::size_t p = 0; p < v.size(); ++p) v[p] = std::sqrt(std::abs(g.g[p].determinant()));
    return v;
}

TensorField covariant_derivative(const TensorField& t, const ChristoffelField& gamma) {
    const int n = t.n;
    const int rank = t.up + t.down;
    TensorField out(t.grid, n, t.up, t.down + 1);
    const int nc = t.ncomp();
    parallel_for(t.grid.size(), [&](std::size_t p) {
        for (int l = 0; l < n; ++l) {
            std::vector<double> d(nc);
            if (t.grid.dims[l] >= 3)
                fd_block(t.grid, t.comps.data(), std::size_t(nc), p, l, d.data());
            else
                std::fill(d.begin(), d.end(), 0.0);
            for (int c = 0; c < nc; ++c) {
                double v = d[c];
                for (int a = 0; a < rank; ++a) {
                    const int stride = ipow(n, rank - 1 - a);
                    const int digit = (c / stride) % n;
                    const int base = c - digit * stride;
                    for (int m = 0; m < n; ++m) {
                        const double tm = t.comps[p * nc + base + m * stride];
                        if (a < t.up)
                            v += gamma(p, digit, l, m) * tm;
                        else
                            v -= gamma(p, m, l, digit) * tm;
                    }
                }
                out.comps[p * out.ncomp() + c * n + l] = v;
            }
        }
    });
    return out;
}

double sobolev_norm(const TensorField& u, const MetricData& g, int k, double p) {
    if (k < 0) throw ShapeMismatch("sobolev_norm: negative order has no grid definition here");
    if (!(p >= 1.0)) throw ShapeMismatch("sobolev_norm: p must be at least 1");
    const ScalarField vol = volume_form(g);
    ChristoffelField gamma;
    if (k > 0) gamma = christoffel(g);
    TensorField cur = u;
    double total = 0.0;
    for (int m = 0; m <= k; ++m) {
        if (m > 0) cur = covariant_derivative(cur, gamma);
        const ScalarField mag = tensor_norm(cur, g);
        if (std::isinf(p)) {
            total += *std::max_element(mag.data.begin(), mag.data.end());
        } else {
            const double s = parallel_sum(mag.size(), [&](std::size_t q) {
                return mag.grid.quad_weight(q) * std::pow(mag[q], p) * vol[q];
            });
            total += std::pow(s, 1.0 / p);
        }
    }
    return total;
}

} // namespace cforge
