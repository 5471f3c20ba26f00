#include "cforge/rigging.hpp"

#include "cforge/errors.hpp"

#include <cmath>

namespace cforge {

namespace {

constexpr double kPi = 3.14159265358979323846;

int pair_index(int n, int a, int b) { return form_basis(n, 2).find({a, b}); }

template <class T>
T d_along(const Grid& grid, std::size_t p, int a, const Field<T>& f) {
    if (grid.dims[a] < 3) return T::Zero(f[p].rows(), f[p].cols());
    return fd_derivative(grid, p, a, [&](std::size_t q) -> const T& { return f[q]; });
}

// Sup of a - b, skipping points within `collar` of an open edge.
template <class T>
double interior_sup_diff(const Field<T>& a, const Field<T>& b, int collar) {
    const Grid& g = a.grid;
    double m = 0.0;
    for (std::size_t p = 0; p < a.size(); ++p) {
        bool inside = true;
        for (int ax = 0; ax < g.ndim(); ++ax) {
            const int i = g.index_along(p, ax);
            if (!g.periodic[ax] && (i < collar || i >= g.dims[ax] - collar)) inside = false;
        }
        if (inside) m = std::max(m, (a[p] - b[p]).cwiseAbs().maxCoeff());
    }
    return m;
}
double sup_diff(const VectorField& a, const VectorField& b) {
    double m = 0.0;
    for (std::size_t p = 0; p < a.size(); ++p) m = std::max(m, (a[p] - b[p]).cwiseAbs().maxCoeff());
    return m;
}

} // namespace

RiggedHypersurface rig_decompose(const VectorField& iota, const VectorField& ell, const std::vector<int>& signature,
                                 double transverse_tol) {
    const Grid& grid = iota.grid;
    const int n = grid.ndim();
    if (!(ell.grid == grid)) throw ShapeMismatch("rig_decompose: rigging on another grid");
    if (int(signature.size()) != n + 1) throw ShapeMismatch("rig_decompose: ambient dimension must be n + 1");
    for (std::size_t p = 0; p < grid.size(); ++p)
        if (iota[p].size() != n + 1 || ell[p].size() != n + 1)
            throw ShapeMismatch("rig_decompose: points and rigging must live in R^{n+1}");

    RiggedHypersurface h;
    h.iota = iota;
    h.ell = ell;
    h.signature = signature;
    h.nform = VectorField(grid);
    h.g = MatrixField(grid);
    h.K = MatrixField(grid);
    h.Psi = MatrixField(grid);
    h.psi = VectorField(grid);
    h.gamma = ChristoffelField(grid, n);

    const MatrixField J = jacobian(iota);
    const auto H = hessian(iota);
    const Eigen::MatrixXd E = signature_matrix(signature);
    std::vector<double> sing(grid.size()), rig(grid.size()), tan(grid.size()), sym(grid.size()), det(grid.size());
    parallel_for(grid.size(), [&](std::size_t p) {
        Eigen::MatrixXd F(n + 1, n + 1);
        F.leftCols(n) = J[p];
        F.col(n) = ell[p];
        const Eigen::JacobiSVD<Eigen::MatrixXd> svd(F);
        const auto& s = svd.singularValues();
        sing[p] = s[n] / std::max(1.0, s[0]);
        if (!(sing[p] > transverse_tol)) return;
        const Eigen::MatrixXd Fi = F.inverse();
        const Eigen::RowVectorXd nf = Fi.row(n);
        h.nform[p] = nf.transpose();
        rig[p] = std::abs(nf.dot(ell[p]) - 1.0);
        tan[p] = (nf * J[p]).cwiseAbs().maxCoeff();
        h.g[p] = J[p].transpose() * E * J[p];
        det[p] = std::abs(h.g[p].determinant());
        Eigen::MatrixXd K(n, n);
        for (int a = 0; a < n; ++a)
            for (int b = 0; b < n; ++b) {
                K(a, b) = -nf.dot(H[a][b][p]);
                const Eigen::VectorXd t = Fi.topRows(n) * H[a][b][p];
                for (int c = 0; c < n; ++c) h.gamma(p, c, a, b) = t[c];
            }
        h.K[p] = K;
        sym[p] = (K - K.transpose()).cwiseAbs().maxCoeff();
        Eigen::MatrixXd Psi(n, n);
        Eigen::VectorXd psi(n);
        for (int a = 0; a < n; ++a) {
            const Eigen::VectorXd dl = d_along(grid, p, a, ell);
            Psi.col(a) = Fi.topRows(n) * dl;
            psi[a] = nf.dot(dl);
        }
        h.Psi[p] = Psi;
        h.psi[p] = psi;
    });
    for (std::size_t p = 0; p < grid.size(); ++p)
        if (!(sing[p] > transverse_tol))
            throw NotTransverse("[d iota | ell] is singular at grid point " + std::to_string(p) +
                                " (relative singular value " + std::to_string(sing[p]) + ")");
    h.min_abs_det_g = det.empty() ? 0.0 : det[0];
    for (std::size_t p = 0; p < grid.size(); ++p) {
        h.rigging_defect = std::max(h.rigging_defect, rig[p]);
        h.tangency_defect = std::max(h.tangency_defect, tan[p]);
        h.k_symmetry_defect = std::max(h.k_symmetry_defect, sym[p]);
        h.min_abs_det_g = std::min(h.min_abs_det_g, det[p]);
    }
    return h;
}

double HypersurfaceResiduals::max_l2() const {
    return std::max({gauss.l2, codazzi_k.l2, codazzi_Psi.l2, codazzi_psi.l2});
}

HypersurfaceResiduals hypersurface_residuals(const RiggedHypersurface& h, const ChristoffelField& G) {
    const Grid& grid = h.grid();
    const int n = h.n();
    if (!(G.grid == grid) || G.n != n) throw ShapeMismatch("hypersurface_residuals: connection on another chart");
    const FormField R = curvature(G);
    std::vector<double> sg(grid.size()), s1(grid.size()), s2(grid.size()), s3(grid.size());
    parallel_for(grid.size(), [&](std::size_t p) {
        const Eigen::MatrixXd& K = h.K[p];
        const Eigen::MatrixXd& P = h.Psi[p];
        const Eigen::VectorXd& w = h.psi[p];
        std::vector<Eigen::MatrixXd> dK(n), dP(n);
        std::vector<Eigen::VectorXd> dw(n);
        for (int a = 0; a < n; ++a) {
            dK[a] = d_along(grid, p, a, h.K);
            dP[a] = d_along(grid, p, a, h.Psi);
            dw[a] = d_along(grid, p, a, h.psi);
        }
        double g2 = 0, c1 = 0, c2 = 0, c3 = 0;
        for (int a = 0; a < n; ++a)
            for (int b = a + 1; b < n; ++b) {
                const auto Om = R.value(p, pair_index(n, a, b));
                for (int i = 0; i < n; ++i)
                    for (int c = 0; c < n; ++c) {
                        const double r = Om(i, c) + K(a, i) * P(c, b) - K(b, i) * P(c, a);
                        g2 += r * r;
                    }
                for (int i = 0; i < n; ++i) {
                    double r = dK[a](b, i) - dK[b](a, i) + K(b, i) * w[a] - K(a, i) * w[b];
                    for (int m = 0; m < n; ++m) r += -G(p, m, a, i) * K(b, m) + G(p, m, b, i) * K(a, m);
                    c1 += r * r;
                }
                for (int c = 0; c < n; ++c) {
                    double r = dP[a](c, b) - dP[b](c, a) - w[a] * P(c, b) + w[b] * P(c, a);
                    for (int m = 0; m < n; ++m) r += -P(m, a) * G(p, c, b, m) + P(m, b) * G(p, c, a, m);
                    c2 += r * r;
                }
                double r = dw[a][b] - dw[b][a];
                for (int m = 0; m < n; ++m) r += P(m, a) * K(b, m) - P(m, b) * K(a, m);
                c3 += r * r;
            }
        sg[p] = g2;
        s1[p] = c1;
        s2[p] = c2;
        s3[p] = c3;
    });
    NormAccumulator ag, a1, a2, a3;
    for (std::size_t p = 0; p < grid.size(); ++p) {
        ag.add(sg[p]);
        a1.add(s1[p]);
        a2.add(s2[p]);
        a3.add(s3[p]);
    }
    return {ag.norms(), a1.norms(), a2.norms(), a3.norms()};
}

FormField sigma_connection_form(const RiggedHypersurface& h, const ChristoffelField& G) {
    const Grid& grid = h.grid();
    const int n = h.n();
    if (!(G.grid == grid) || G.n != n) throw ShapeMismatch("sigma_connection_form: connection on another chart");
    FormField W(grid, 1, n + 1, n + 1);
    parallel_for(grid.size(), [&](std::size_t p) {
        for (int a = 0; a < n; ++a) {
            auto M = W.dir(p, a);
            for (int b = 0; b < n; ++b) {
                for (int c = 0; c < n; ++c) M(b, c) = G(p, c, a, b);
                M(b, n) = -h.K[p](a, b);
                M(n, b) = h.Psi[p](b, a);
            }
            M(n, n) = h.psi[p][a];
        }
    });
    return W;
}

SigmaReport sigma_structural_residual(const RiggedHypersurface& h, const ChristoffelField& G) {
    const Grid& grid = h.grid();
    const int n = h.n();
    const FormField Om = curvature(sigma_connection_form(h, G));
    NormAccumulator at, ag, a1, a2, a3;
    for (std::size_t p = 0; p < grid.size(); ++p) {
        double t = 0, g2 = 0, c1 = 0, c2 = 0, c3 = 0;
        for (int a = 0; a < n; ++a)
            for (int b = a + 1; b < n; ++b) {
                const auto M = Om.value(p, pair_index(n, a, b));
                t += M.squaredNorm();
                g2 += M.topLeftCorner(n, n).squaredNorm();
                c1 += M.topRightCorner(n, 1).squaredNorm();
                c2 += M.bottomLeftCorner(1, n).squaredNorm();
                c3 += M(n, n) * M(n, n);
            }
        at.add(t);
        ag.add(g2);
        a1.add(c1);
        a2.add(c2);
        a3.add(c3);
    }
    SigmaReport r;
    r.total = at.norms();
    r.blocks = {ag.norms(), a1.norms(), a2.norms(), a3.norms()};
    return r;
}

HypersurfaceEquivalence hypersurface_equivalence(const RiggedHypersurface& h, const ChristoffelField& G,
                                                 double tol) {
    HypersurfaceEquivalence e;
    e.tol = tol;
    e.residuals = hypersurface_residuals(h, G);
    e.sigma = sigma_structural_residual(h, G);
    e.gc_pass = e.residuals.max_l2() < tol;
    e.sigma_pass = e.sigma.total.l2 < tol;
    return e;
}

HypersurfaceRealization realize_hypersurface(const RiggedHypersurface& h, const ChristoffelField& G,
                                             const std::vector<int>& basepoint, const Eigen::VectorXd& iota0,
                                             const Eigen::MatrixXd& A0, double compat_tol) {
    const Grid& grid = h.grid();
    const int n = h.n();
    if (A0.rows() != n + 1 || A0.cols() != n + 1 || iota0.size() != n + 1)
        throw ShapeMismatch("realize_hypersurface: initial data must be (n+1)-dimensional");
    if (std::abs(A0.determinant()) < 1e-12) throw NotTransverse("initial frame is singular");
    const FormField W = sigma_connection_form(h, G);
    PfaffOptions opt;
    opt.project = false;
    opt.compat_tol = compat_tol;
    const PfaffResult pf = solve_pfaff(W, std::vector<int>(n + 1, 1), A0, basepoint, opt);

    FormField theta(grid, 1, 1, n + 1);
    for (std::size_t p = 0; p < grid.size(); ++p)
        for (int a = 0; a < n; ++a) theta.dir(p, a) = pf.A[p].row(a);
    const PoincareResult pc = solve_poincare(theta, iota0, basepoint);

    HypersurfaceRealization out;
    out.iota = pc.f;
    out.ell = VectorField(grid);
    for (std::size_t p = 0; p < grid.size(); ++p) out.ell[p] = pf.A[p].row(n).transpose();
    out.pfaff_path_defect = pf.path_defect;
    out.poincare_path_defect = pc.path_defect;
    const RiggedHypersurface back = rig_decompose(out.iota, out.ell, h.signature);
    out.K_error = interior_sup_diff(back.K, h.K, 3);
    out.Psi_error = interior_sup_diff(back.Psi, h.Psi, 3);
    out.psi_error = interior_sup_diff(back.psi, h.psi, 3);
    out.rigging_defect = back.rigging_defect;
    return out;
}

RiggedRoundtrip rigged_roundtrip(const VectorField& iota, const VectorField& ell, const std::vector<int>& signature,
                                 const std::vector<int>& basepoint) {
    const Grid& grid = iota.grid;
    const std::vector<int> base = basepoint.empty() ? center_index(grid) : basepoint;
    const std::size_t b = grid.flat_index(base);
    const int n = grid.ndim();
    RiggedRoundtrip rt;
    const RiggedHypersurface h = rig_decompose(iota, ell, signature);
    const double h2 = grid.max_spacing() * grid.max_spacing();
    rt.equivalence = hypersurface_equivalence(h, h.gamma, 10.0 * h2);
    const MatrixField J = jacobian(iota);
    Eigen::MatrixXd A0(n + 1, n + 1);
    A0.topRows(n) = J[b].transpose();
    A0.row(n) = ell[b].transpose();
    rt.realization = realize_hypersurface(h, h.gamma, base, iota[b], A0);
    rt.raw_sup = sup_diff(rt.realization.iota, iota);
    rt.ell_sup = sup_diff(rt.realization.ell, ell);
    rt.aligned_sup = procrustes(rt.realization.iota, iota, signature).sup;
    return rt;
}

RiggedFixture lightcone_fixture(int N) {
    const Grid grid = Grid::box({N, N}, {0.5, 0.0}, {1.5, kPi / 2});
    RiggedFixture f{"lightcone", VectorField(grid), VectorField(grid), {-1, 1, 1}};
    for (std::size_t p = 0; p < grid.size(); ++p) {
        const Eigen::VectorXd x = grid.point(p);
        const double c = std::cos(x[1]), s = std::sin(x[1]);
        f.iota[p] = Eigen::Vector3d(x[0], x[0] * c, x[0] * s);
        f.ell[p] = Eigen::Vector3d(0.5, -0.5 * c, -0.5 * s);
    }
    return f;
}

RiggedFixture hyperplane_fixture(int N) {
    const Grid grid = Grid::box({N, N}, {0.0, 0.0}, {1.0, 1.0});
    RiggedFixture f{"hyperplane", VectorField(grid), VectorField(grid), {-1, 1, 1}};
    for (std::size_t p = 0; p < grid.size(); ++p) {
        const Eigen::VectorXd x = grid.point(p);
        f.iota[p] = Eigen::Vector3d(0.0, x[0], x[1]);
        f.ell[p] = Eigen::Vector3d(1.0, 0.0, 0.0);
    }
    return f;
}

RiggedFixture rigged_sphere_fixture(int N) {
    const Grid grid = Grid::box({N, N}, {kPi / 4, 0.0}, {3 * kPi / 4, kPi / 2});
    RiggedFixture f{"rigged-sphere", VectorField(grid), VectorField(grid), {1, 1, 1}};
    for (std::size_t p = 0; p < grid.size(); ++p) {
        const Eigen::VectorXd x = grid.point(p);
        const Eigen::Vector3d v(std::sin(x[0]) * std::cos(x[1]), std::sin(x[0]) * std::sin(x[1]), std::cos(x[0]));
        f.iota[p] = v;
        f.ell[p] = v;
    }
    return f;
}

std::vector<std::string> rigged_fixture_names() { return {"lightcone", "hyperplane", "rigged-sphere"}; }

RiggedFixture make_rigged_fixture(const std::string& name, int N) {
    if (name == "lightcone") return lightcone_fixture(N);
    if (name == "hyperplane") return hyperplane_fixture(N);
    if (name == "rigged-sphere") return rigged_sphere_fixture(N);
    throw ConfigError("unknown rigged fixture '" + name + "'");
}

} // namespace cforge
