#include "cforge/cartan.hpp"

#include <cmath>
#include <string>

namespace cforge {

namespace {

Eigen::MatrixXd axis_derivative(const MatrixField& f, std::size_t p, int axis) {
    if (f.grid.dims[axis] < 3) return Eigen::MatrixXd::Zero(f[p].rows(), f[p].cols());
    return fd_derivative(f.grid, p, axis, [&](std::size_t q) -> const Eigen::MatrixXd& { return f[q]; });
}

} // namespace

ChristoffelField christoffel(const MetricData& g) {
    validate_metric(g);
    const Grid& grid = g.grid();
    const int n = g.dim();
    ChristoffelField G(grid, n);
    NormAccumulator compat;
    std::vector<NormAccumulator> parts(64);
    parallel_chunks(grid.size(), [&](std::size_t chunk, std::size_t b0, std::size_t b1) {
        for (std::size_t p = b0; p < b1; ++p) {
            std::vector<Eigen::MatrixXd> dg(n);
            for (int l = 0; l < n; ++l) dg[l] = axis_derivative(g.g, p, l);
            const Eigen::MatrixXd gi = g.g[p].inverse();
            for (int k = 0; k < n; ++k) {
                for (int i = 0; i < n; ++i) {
                    for (int j = i; j < n; ++j) {
                        double s = 0.0;
                        for (int l = 0; l < n; ++l) s += gi(k, l) * (dg[i](j, l) + dg[j](l, i) - dg[l](i, j));
                        G(p, k, i, j) = 0.5 * s;
                        G(p, k, j, i) = 0.5 * s;
                    }
                }
            }
            double sq = 0.0;
            for (int l = 0; l < n; ++l) {
                for (int i = 0; i < n; ++i) {
                    for (int j = 0; j < n; ++j) {
                        double r = dg[l](i, j);
                        for (int m = 0; m < n; ++m) r -= G(p, m, l, i) * g.g[p](m, j) + G(p, m, l, j) * g.g[p](i, m);
                        sq += r * r;
                    }
                }
            }
            parts[chunk].add(sq);
        }
    });
    for (auto& a : parts) compat.merge(a);
    G.compatibility = compat.norms();
    return G;
}

FundamentalData FundamentalData::zero(const Grid& grid, int n, const std::vector<int>& normal_signature) {
    FundamentalData f;
    f.n = n;
    f.k = int(normal_signature.size());
    f.normal_signature = normal_signature;
    for (int a = 0; a < f.k; ++a) f.h.emplace_back(grid, Eigen::MatrixXd::Zero(n, n));
    for (int l = 0; l < n; ++l) f.omega.emplace_back(grid, Eigen::MatrixXd::Zero(f.k, f.k));
    return f;
}

Eigen::MatrixXd project_semi_skew(const Eigen::MatrixXd& w, const std::vector<int>& eps) {
    const int N = int(w.rows());
    Eigen::MatrixXd y(N, N);
    for (int a = 0; a < N; ++a)
        for (int b = 0; b < N; ++b) y(a, b) = w(a, b) * eps[b];
    Eigen::MatrixXd out(N, N);
    for (int a = 0; a < N; ++a)
        for (int b = 0; b < N; ++b) out(a, b) = 0.5 * (y(a, b) - y(b, a)) * eps[b];
    return out;
}

double semi_skew_defect(const Eigen::MatrixXd& w, const std::vector<int>& eps) {
    double d = 0.0;
    const int N = int(w.rows());
    for (int a = 0; a < N; ++a)
        for (int b = 0; b < N; ++b) d = std::max(d, std::abs(eps[a] * w(b, a) + w(a, b) * eps[b]));
    return d;
}

double semi_skew_defect(const ConnectionForm& w) {
    double d = 0.0;
    for (std::size_t p = 0; p < w.W.grid.size(); ++p)
        for (int l = 0; l < w.W.n; ++l) d = std::max(d, semi_skew_defect(Eigen::MatrixXd(w.at(p, l)), w.signature));
    return d;
}

ConnectionForm connection_one_form(const FrameField& frame, const ChristoffelField& gamma, const FundamentalData& fund,
                                   double skew_tol) {
    const Grid& grid = frame.e.grid;
    const int n = int(frame.signature.size());
    const int k = fund.k;
    if (gamma.n != n || fund.n != n) throw ShapeMismatch("connection_one_form: dimensions disagree");
    if (!(gamma.grid == grid)) throw ShapeMismatch("connection_one_form: grids disagree");
    if (k > 0 && !(fund.grid() == grid)) throw ShapeMismatch("connection_one_form: fundamental data grid differs");
    const int N = n + k;
    ConnectionForm out;
    out.n = n;
    out.k = k;
    out.signature = frame.signature;
    out.signature.insert(out.signature.end(), fund.normal_signature.begin(), fund.normal_signature.end());
    out.W = FormField(grid, 1, N, N);
    std::vector<double> defect(grid.size(), 0.0);
    parallel_for(grid.size(), [&](std::size_t p) {
        const Eigen::MatrixXd& e = frame.e[p];
        const Eigen::MatrixXd& th = frame.theta[p];
        for (int l = 0; l < n; ++l) {
            Eigen::MatrixXd gl(n, n);
            for (int m = 0; m < n; ++m)
                for (int q = 0; q < n; ++q) gl(m, q) = gamma(p, m, l, q);
            const Eigen::MatrixXd M = th * (axis_derivative(frame.e, p, l) + gl * e);
            Eigen::MatrixXd W = Eigen::MatrixXd::Zero(N, N);
            W.topLeftCorner(n, n) = M.transpose();
            for (int a = 0; a < k; ++a) {
                const int ea = fund.normal_signature[a];
                const Eigen::VectorXd col = double(ea) * (e.transpose() * fund.h[a][p].col(l));
                for (int i = 0; i < n; ++i) {
                    W(i, n + a) = col[i];
                    W(n + a, i) = -double(frame.signature[i] * ea) * col[i];
                }
            }
            if (k > 0) W.bottomRightCorner(k, k) = fund.omega[l][p];
            defect[p] = std::max(defect[p], semi_skew_defect(W, out.signature));
            out.at(p, l) = project_semi_skew(W, out.signature);
        }
    });
    for (double d : defect) out.skew_defect_in = std::max(out.skew_defect_in, d);
    if (out.skew_defect_in > skew_tol)
        throw SkewViolation("connection block violates metric compatibility by " +
                            std::to_string(out.skew_defect_in));
    return out;
}

FormField christoffel_form(const ChristoffelField& gamma) {
    const int n = gamma.n;
    FormField w(gamma.grid, 1, n, n);
    for (std::size_t p = 0; p < gamma.grid.size(); ++p)
        for (int l = 0; l < n; ++l)
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j) w.dir(p, l)(i, j) = gamma(p, j, l, i);
    return w;
}

FormField curvature(const FormField& w) { return ext_d(w) - wedge(w, w); }

FormField curvature(const ChristoffelField& gamma) { return curvature(christoffel_form(gamma)); }

double riemann_lower(const FormField& omega, const Eigen::MatrixXd& g, std::size_t p, int a, int b, int c, int d) {
    const Eigen::MatrixXd O = omega.component(p, {a, b});
    double r1 = 0.0, r2 = 0.0;
    for (int m = 0; m < g.rows(); ++m) {
        r1 += g(c, m) * O(d, m);
        r2 += g(d, m) * O(c, m);
    }
    return 0.5 * (r1 - r2);
}

ScalarField sectional_curvature_2d(const ChristoffelField& gamma, const MetricData& g) {
    if (gamma.n != 2) throw ShapeMismatch("sectional_curvature_2d needs a 2D chart");
    const FormField om = curvature(gamma);
    ScalarField K(gamma.grid, 0.0);
    for (std::size_t p = 0; p < K.size(); ++p) K[p] = riemann_lower(om, g.g[p], p, 0, 1, 0, 1) / g.g[p].determinant();
    return K;
}

StructuralReport second_structural_residual(const ConnectionForm& w) {
    StructuralReport r;
    r.residual = curvature(w.W);
    r.norms = form_norms(r.residual);
    NormAccumulator tan, mix, nor;
    const int n = w.n, N = w.n + w.k;
    for (std::size_t p = 0; p < r.residual.grid.size(); ++p) {
        double st = 0, sm = 0, sn = 0;
        for (int b = 0; b < r.residual.nbasis(); ++b) {
            const auto v = r.residual.value(p, b);
            for (int i = 0; i < N; ++i) {
                for (int j = 0; j < N; ++j) {
                    const double q = v(i, j) * v(i, j);
                    if (i < n && j < n)
                        st += q;
                    else if (i >= n && j >= n)
                        sn += q;
                    else
                        sm += q;
                }
            }
        }
        tan.add(st);
        mix.add(sm);
        nor.add(sn);
    }
    r.tangential = tan.norms();
    r.mixed = mix.norms();
    r.normal = nor.norms();
    return r;
}

FormField coframe_form(const FrameField& frame, int total) {
    const int n = int(frame.signature.size());
    if (total < n) throw ShapeMismatch("coframe_form: total smaller than frame dimension");
    FormField th(frame.e.grid, 1, 1, total);
    for (std::size_t p = 0; p < frame.e.size(); ++p)
        for (int l = 0; l < n; ++l)
            for (int i = 0; i < n; ++i) th.dir(p, l)(0, i) = frame.theta[p](i, l);
    return th;
}

FirstStructuralReport first_structural_residual(const FormField& theta, const ConnectionForm& w) {
    if (theta.rows != 1 || theta.cols != w.n + w.k) throw ShapeMismatch("first_structural_residual: co-frame shape");
    const FormField r = ext_d(theta) - wedge(theta, w.W);
    NormAccumulator tan, nor;
    for (std::size_t p = 0; p < r.grid.size(); ++p) {
        double st = 0, sn = 0;
        for (int b = 0; b < r.nbasis(); ++b) {
            const auto v = r.value(p, b);
            for (int j = 0; j < r.cols; ++j) (j < w.n ? st : sn) += v(0, j) * v(0, j);
        }
        tan.add(st);
        nor.add(sn);
    }
    return {tan.norms(), nor.norms()};
}

} // namespace cforge
