#include "cforge/realize.hpp"

#include "cforge/errors.hpp"
#include "cforge/gcr.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace cforge {

namespace {

// Second derivative along one axis: 3-point central, 5-point one sided at
// open ends, again with the central leading error (h^2 f''''/12).
template <class Get>
auto fd_second(const Grid& grid, std::size_t p, int axis, Get&& get) {
    using R = typename plain_of<std::decay_t<decltype(get(p))>>::type;
    const int n = grid.dims[axis];
    const int i = grid.index_along(p, axis);
    const std::size_t s = grid.stride(axis);
    const double h2 = grid.spacing[axis] * grid.spacing[axis];
    if (grid.periodic[axis]) {
        const std::size_t up = (i + 1 == n) ? p - std::size_t(n - 1) * s : p + s;
        const std::size_t dn = (i == 0) ? p + std::size_t(n - 1) * s : p - s;
        R r = (get(up) - 2.0 * get(p) + get(dn)) / h2;
        return r;
    }
    if (n < 5) throw ShapeMismatch("second differences need at least 5 points along an axis");
    if (i == 0) {
        const auto f0 = get(p);
        R r = (-9.0 * (get(p + s) - f0) + 10.0 * (get(p + 2 * s) - f0) - 5.0 * (get(p + 3 * s) - f0) +
               (get(p + 4 * s) - f0)) / h2;
        return r;
    }
    if (i == n - 1) {
        const auto f0 = get(p);
        R r = (-9.0 * (get(p - s) - f0) + 10.0 * (get(p - 2 * s) - f0) - 5.0 * (get(p - 3 * s) - f0) +
               (get(p - 4 * s) - f0)) / h2;
        return r;
    }
    R r = (get(p + s) - 2.0 * get(p) + get(p - s)) / h2;
    return r;
}


double max_abs_diff(const MatrixField& a, const MatrixField& b) {
    double d = 0.0;
    for (std::size_t p = 0; p < a.size(); ++p) d = std::max(d, (a[p] - b[p]).cwiseAbs().maxCoeff());
    return d;
}

// Starting points of the sweeps along `axis` once axes order[0..pos) are done:
// every point whose later-axis indices equal the basepoint and whose index on
// `axis` equals the basepoint.
std::vector<std::size_t> sweep_starts(const Grid& grid, const std::vector<int>& order, int pos,
                                      const std::vector<int>& base) {
    std::vector<std::size_t> out;
    for (std::size_t p = 0; p < grid.size(); ++p) {
        bool ok = true;
        for (int q = pos; q < int(order.size()) && ok; ++q) ok = grid.index_along(p, order[q]) == base[order[q]];
        if (ok) out.push_back(p);
    }
    return out;
}

// Visits the edges of every axis-ordered lattice path from the basepoint.
// step(from, to, axis, signed_h) must fill `to` from `from`.
template <class Step>
void sweep(const Grid& grid, const std::vector<int>& order, const std::vector<int>& base, Step&& step) {
    for (int pos = 0; pos < int(order.size()); ++pos) {
        const int a = order[pos];
        const auto starts = sweep_starts(grid, order, pos, base);
        const std::size_t s = grid.stride(a);
        const int n = grid.dims[a];
        const double h = grid.spacing[a];
        parallel_for(starts.size(), [&](std::size_t t) {
            const std::size_t p0 = starts[t];
            const int i0 = base[a];
            for (int i = i0; i + 1 < n; ++i) step(p0 + (i - i0) * s, p0 + (i + 1 - i0) * s, a, h);
            for (int i = i0; i > 0; --i) step(p0 - (i0 - i) * s, p0 - (i0 - i + 1) * s, a, -h);
        });
    }
}

std::vector<int> checked_base(const Grid& grid, const std::vector<int>& base) {
    if (base.empty()) return center_index(grid);
    if (int(base.size()) != grid.ndim()) throw ShapeMismatch("basepoint has the wrong number of indices");
    for (int a = 0; a < grid.ndim(); ++a)
        if (base[a] < 0 || base[a] >= grid.dims[a]) throw ShapeMismatch("basepoint outside the grid");
    return base;
}

std::vector<int> axis_order(int d, bool reversed) {
    std::vector<int> o(d);
    for (int a = 0; a < d; ++a) o[a] = reversed ? d - 1 - a : a;
    return o;
}

struct PfaffRun {
    MatrixField A;
    double drift = 0.0;
};

PfaffRun pfaff_pass(const FormField& W, const std::vector<int>& eps, const Eigen::MatrixXd& A0,
                    const std::vector<int>& base, bool project, bool reversed) {
    const Grid& grid = W.grid;
    PfaffRun r;
    r.A = MatrixField(grid, Eigen::MatrixXd::Zero(A0.rows(), A0.cols()));
    r.A[grid.flat_index(base)] = A0;
    std::vector<double> drift(grid.size(), 0.0);
    sweep(grid, axis_order(grid.ndim(), reversed), base, [&](std::size_t from, std::size_t to, int a, double h) {
        const Eigen::MatrixXd W0 = W.dir(from, a), W1 = W.dir(to, a);
        const Eigen::MatrixXd Wm = 0.5 * (W0 + W1);
        const Eigen::MatrixXd& A = r.A[from];
        const Eigen::MatrixXd k1 = W0 * A;
        const Eigen::MatrixXd k2 = Wm * (A + 0.5 * h * k1);
        const Eigen::MatrixXd k3 = Wm * (A + 0.5 * h * k2);
        const Eigen::MatrixXd k4 = W1 * (A + h * k3);
        Eigen::MatrixXd next = A + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        if (project) {
            next = project_to_group(next, eps);
            drift[to] = group_defect(next, eps);
        }
        r.A[to] = std::move(next);
    });
    for (double d : drift) r.drift = std::max(r.drift, d);
    return r;
}

VectorField poincare_pass(const FormField& theta, const Eigen::VectorXd& f0, const std::vector<int>& base,
                          bool reversed) {
    const Grid& grid = theta.grid;
    const int d = grid.ndim();
    // Derivative of each component along its own axis, for the end correction.
    std::vector<std::vector<Eigen::VectorXd>> dF(d, std::vector<Eigen::VectorXd>(grid.size()));
    for (int a = 0; a < d; ++a) {
        parallel_for(grid.size(), [&](std::size_t p) {
            if (grid.dims[a] < 3) {
                dF[a][p] = Eigen::VectorXd::Zero(theta.cols);
                return;
            }
            dF[a][p] = fd_derivative(grid, p, a, [&](std::size_t q) -> Eigen::VectorXd {
                return theta.dir(q, a).row(0).transpose();
            });
        });
    }
    VectorField f(grid, Eigen::VectorXd::Zero(theta.cols));
    f[grid.flat_index(base)] = f0;
    sweep(grid, axis_order(d, reversed), base, [&](std::size_t from, std::size_t to, int a, double h) {
        const Eigen::VectorXd F0 = theta.dir(from, a).row(0).transpose();
        const Eigen::VectorXd F1 = theta.dir(to, a).row(0).transpose();
        f[to] = f[from] + 0.5 * h * (F0 + F1) - (h * h / 12.0) * (dF[a][to] - dF[a][from]);
    });
    return f;
}

} // namespace

// Columns d_i f at every point.
MatrixField jacobian(const VectorField& f) {
    const Grid& grid = f.grid;
    const int d = grid.ndim();
    MatrixField J(grid);
    parallel_for(grid.size(), [&](std::size_t p) {
        Eigen::MatrixXd m(f[p].size(), d);
        for (int l = 0; l < d; ++l)
            m.col(l) = fd_derivative(grid, p, l, [&](std::size_t q) -> const Eigen::VectorXd& { return f[q]; });
        J[p] = m;
    });
    return J;
}

// Hessian with the symmetric mixed stencil, so H[i][j] == H[j][i] exactly.
std::vector<std::vector<VectorField>> hessian(const VectorField& f) {
    const Grid& grid = f.grid;
    const int n = grid.ndim();
    const MatrixField J = jacobian(f);
    std::vector<VectorField> Df(n, VectorField(grid));
    for (int i = 0; i < n; ++i)
        for (std::size_t p = 0; p < grid.size(); ++p) Df[i][p] = J[p].col(i);
    std::vector<std::vector<VectorField>> H(n, std::vector<VectorField>(n, VectorField(grid)));
    parallel_for(grid.size(), [&](std::size_t p) {
        for (int i = 0; i < n; ++i) {
            H[i][i][p] = fd_second(grid, p, i, [&](std::size_t q) -> const Eigen::VectorXd& { return f[q]; });
            for (int j = i + 1; j < n; ++j) {
                const Eigen::VectorXd a =
                    fd_derivative(grid, p, j, [&](std::size_t q) -> const Eigen::VectorXd& { return Df[i][q]; });
                const Eigen::VectorXd b =
                    fd_derivative(grid, p, i, [&](std::size_t q) -> const Eigen::VectorXd& { return Df[j][q]; });
                H[i][j][p] = 0.5 * (a + b);
                H[j][i][p] = H[i][j][p];
            }
        }
    });
    return H;
}

std::vector<int> center_index(const Grid& g) {
    std::vector<int> c(g.ndim());
    for (int a = 0; a < g.ndim(); ++a) c[a] = g.dims[a] / 2;
    return c;
}

Eigen::MatrixXd signature_matrix(const std::vector<int>& eps) {
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(eps.size(), eps.size());
    for (std::size_t i = 0; i < eps.size(); ++i) m(i, i) = eps[i];
    return m;
}

double group_defect(const Eigen::MatrixXd& A, const std::vector<int>& eps) {
    const Eigen::MatrixXd E = signature_matrix(eps);
    return (A.transpose() * E * A - E).cwiseAbs().maxCoeff();
}

Eigen::MatrixXd project_to_group(const Eigen::MatrixXd& A, const std::vector<int>& eps, double tol, int max_iter) {
    if (A.rows() != A.cols() || A.rows() != Eigen::Index(eps.size()))
        throw ShapeMismatch("project_to_group: matrix and signature disagree");
    const Eigen::MatrixXd E = signature_matrix(eps);
    Eigen::MatrixXd X = A;
    const double scale = std::max(1.0, A.cwiseAbs().maxCoeff());
    for (int it = 0; it < max_iter; ++it) {
        Eigen::FullPivLU<Eigen::MatrixXd> lu(X);
        if (!lu.isInvertible()) throw ProjectionFailed("singular iterate");
        const Eigen::MatrixXd Y = 0.5 * (X + E * lu.inverse().transpose() * E);
        if (!Y.allFinite()) throw ProjectionFailed("non-finite iterate");
        const double step = (Y - X).cwiseAbs().maxCoeff();
        X = Y;
        if (step <= tol * scale) {
            // one polishing step past the fixed point
            X = 0.5 * (X + E * X.inverse().transpose() * E);
            return X;
        }
    }
    if (group_defect(X, eps) > 1e-10)
        throw ProjectionFailed("no convergence, defect " + std::to_string(group_defect(X, eps)));
    return X;
}

PfaffResult solve_pfaff(const FormField& W, const std::vector<int>& eps, const Eigen::MatrixXd& A0,
                        const std::vector<int>& basepoint, const PfaffOptions& opt) {
    if (W.degree != 1 || W.rows != W.cols || W.rows != int(eps.size()))
        throw ShapeMismatch("solve_pfaff: W must be a square matrix valued 1-form matching the signature");
    if (A0.rows() != W.rows || A0.cols() != W.cols) throw ShapeMismatch("solve_pfaff: A0 has the wrong shape");
    const std::vector<int> base = checked_base(W.grid, basepoint);
    PfaffResult res;
    if (opt.check_compat) {
        res.compat_l2 = W.n >= 2 ? form_norms(curvature(W)).l2 : 0.0;
        if (!(res.compat_l2 <= opt.compat_tol))
            throw CompatibilityViolated("dW - W^W has L2 norm " + std::to_string(res.compat_l2));
    }
    if (opt.project && group_defect(A0, eps) > 1e-8)
        throw ProjectionFailed("initial frame is not in the semi-orthogonal group");
    PfaffRun fwd = pfaff_pass(W, eps, A0, base, opt.project, false);
    res.drift = fwd.drift;
    if (opt.path_defect && W.n >= 2) {
        PfaffRun rev = pfaff_pass(W, eps, A0, base, opt.project, true);
        res.path_defect = max_abs_diff(fwd.A, rev.A);
    }
    res.A = std::move(fwd.A);
    return res;
}

PfaffResult solve_pfaff(const ConnectionForm& W, const Eigen::MatrixXd& A0, const std::vector<int>& basepoint,
                        const PfaffOptions& opt) {
    return solve_pfaff(W.W, W.signature, A0, basepoint, opt);
}

PoincareResult solve_poincare(const FormField& theta, const Eigen::VectorXd& f0, const std::vector<int>& basepoint,
                              double closed_tol, bool path_defect) {
    if (theta.degree != 1 || theta.rows != 1) throw ShapeMismatch("solve_poincare: expected a row valued 1-form");
    if (f0.size() != theta.cols) throw ShapeMismatch("solve_poincare: f0 has the wrong size");
    const std::vector<int> base = checked_base(theta.grid, basepoint);
    PoincareResult res;
    res.closedness_l2 = theta.n >= 2 ? form_norms(ext_d(theta)).l2 : 0.0;
    if (!(res.closedness_l2 <= closed_tol))
        throw NotClosed("d(Theta) has L2 norm " + std::to_string(res.closedness_l2));
    res.f = poincare_pass(theta, f0, base, false);
    if (path_defect && theta.n >= 2) {
        const VectorField rev = poincare_pass(theta, f0, base, true);
        for (std::size_t p = 0; p < rev.size(); ++p)
            res.path_defect = std::max(res.path_defect, (rev[p] - res.f[p]).cwiseAbs().maxCoeff());
    }
    return res;
}

FormField pull_coframe(const FormField& coframe, const MatrixField& A) {
    if (coframe.degree != 1 || coframe.rows != 1) throw ShapeMismatch("pull_coframe: expected a row valued 1-form");
    const Grid& grid = coframe.grid;
    FormField out(grid, 1, 1, int(A[0].cols()));
    parallel_for(grid.size(), [&](std::size_t p) {
        for (int l = 0; l < coframe.n; ++l) out.dir(p, l) = coframe.dir(p, l) * A[p];
    });
    return out;
}

MatrixField induced_metric(const VectorField& f, const std::vector<int>& eps) {
    const MatrixField J = jacobian(f);
    const Eigen::MatrixXd E = signature_matrix(eps);
    MatrixField g(f.grid);
    for (std::size_t p = 0; p < f.size(); ++p) g[p] = J[p].transpose() * E * J[p];
    return g;
}

Realization realize_immersion(const MetricData& g, const FundamentalData& fund, const FrameField& frame,
                              const std::vector<int>& basepoint, const Eigen::VectorXd& f0, const Eigen::MatrixXd& A0,
                              const RealizeOptions& opt) {
    const ChristoffelField gamma = christoffel(g);
    const ConnectionForm W = connection_one_form(frame, gamma, fund);
    PfaffOptions po;
    po.compat_tol = opt.compat_tol;
    po.path_defect = opt.path_defect;
    const PfaffResult pf = solve_pfaff(W, A0, basepoint, po);
    const int N = W.n + W.k;
    const FormField theta = pull_coframe(coframe_form(frame, N), pf.A);
    const PoincareResult pr = solve_poincare(theta, f0, basepoint, opt.closed_tol, opt.path_defect);

    Realization r;
    r.immersion.f = pr.f;
    r.immersion.signature = W.signature;
    r.immersion.A = pf.A;
    r.pfaff_path_defect = pf.path_defect;
    r.poincare_path_defect = pr.path_defect;
    r.structural_l2 = pf.compat_l2;
    r.drift = pf.drift;
    const MatrixField J = jacobian(pr.f);
    const Eigen::MatrixXd E = signature_matrix(W.signature);
    r.min_singular = std::numeric_limits<double>::infinity();
    for (std::size_t p = 0; p < J.size(); ++p) {
        r.isometry_defect = std::max(r.isometry_defect, (J[p].transpose() * E * J[p] - g.g[p]).cwiseAbs().maxCoeff());
        Eigen::JacobiSVD<Eigen::MatrixXd> svd(J[p]);
        r.min_singular = std::min(r.min_singular, svd.singularValues().minCoeff());
    }
    if (r.min_singular < opt.rank_tol) throw RankDeficient("df loses rank, min singular value " +
                                                           std::to_string(r.min_singular));
    return r;
}

InducedData induced_data(const Immersion& im, double floor) {
    const Grid& grid = im.grid();
    const int n = grid.ndim();
    const int N = im.ambient_dim();
    const int k = N - n;
    if (k < 1) throw ShapeMismatch("induced_data: codimension must be positive");
    const std::vector<int>& eps = im.signature;
    const Eigen::MatrixXd E = signature_matrix(eps);
    const MatrixField J = jacobian(im.f);

    MatrixField g(grid);
    double min_det = std::numeric_limits<double>::infinity();
    for (std::size_t p = 0; p < grid.size(); ++p) {
        g[p] = J[p].transpose() * E * J[p];
        min_det = std::min(min_det, std::abs(g[p].determinant()));
    }
    if (min_det < floor)
        throw DegenerateInducedMetric("min |det f*g0| = " + std::to_string(min_det) + " below " + std::to_string(floor));

    InducedData out;
    out.g = MetricData::from_field(std::move(g), floor);
    validate_metric(out.g);

    // Fixed candidate normals: the eps-orthogonal complement at the centre.
    const std::size_t c = grid.flat_index(center_index(grid));
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(J[c].transpose() * E, Eigen::ComputeFullV);
    const Eigen::MatrixXd cand = svd.matrixV().rightCols(k);

    out.normals = MatrixField(grid);
    std::vector<std::vector<int>> sig(grid.size());
    parallel_for(grid.size(), [&](std::size_t p) {
        const Eigen::MatrixXd& D = J[p];
        const Eigen::MatrixXd P =
            Eigen::MatrixXd::Identity(N, N) - D * out.g.g[p].inverse() * D.transpose() * E;
        Eigen::MatrixXd V = P * cand;
        std::vector<Eigen::VectorXd> vs;
        std::vector<int> s;
        for (int a = 0; a < k; ++a) {
            Eigen::VectorXd v = V.col(a);
            for (std::size_t b = 0; b < vs.size(); ++b) v -= double(s[b]) * (vs[b].dot(E * v)) * vs[b];
            const double q = v.dot(E * v);
            if (std::abs(q) < 1e-12 * std::max(1.0, v.squaredNorm()))
                throw NullVectorEncountered("normal candidate is null");
            s.push_back(q < 0 ? -1 : 1);
            vs.push_back(v / std::sqrt(std::abs(q)));
        }
        Eigen::MatrixXd M(N, k);
        std::vector<int> ss;
        int col = 0;
        for (int want : {-1, 1})
            for (int a = 0; a < k; ++a)
                if (s[a] == want) {
                    M.col(col++) = vs[a];
                    ss.push_back(want);
                }
        out.normals[p] = M;
        sig[p] = ss;
    });
    for (std::size_t p = 1; p < grid.size(); ++p)
        if (sig[p] != sig[0]) throw IndexMismatch("normal bundle signature changes across the chart");

    out.fund = FundamentalData::zero(grid, n, sig[0]);
    const auto H = hessian(im.f);
    parallel_for(grid.size(), [&](std::size_t p) {
        const Eigen::MatrixXd& M = out.normals[p];
        for (int a = 0; a < k; ++a)
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j) out.fund.h[a][p](i, j) = H[i][j][p].dot(E * M.col(a));
        for (int l = 0; l < n; ++l) {
            const Eigen::MatrixXd dM =
                fd_derivative(grid, p, l, [&](std::size_t q) -> const Eigen::MatrixXd& { return out.normals[q]; });
            Eigen::MatrixXd w(k, k);
            for (int a = 0; a < k; ++a)
                for (int b = 0; b < k; ++b) w(a, b) = sig[0][b] * dM.col(a).dot(E * M.col(b));
            out.fund.omega[l][p] = project_semi_skew(w, sig[0]);
        }
    });
    return out;
}

namespace {

struct ProcrustesState {
    Eigen::MatrixXd S, C;  // sum x x^T, sum y x^T over centred clouds
    double yy = 0.0;
    double cost(const Eigen::MatrixXd& B) const {
        return (B.transpose() * B * S).trace() - 2.0 * (B.transpose() * C).trace() + yy;
    }
};

} // namespace

Motion procrustes(const VectorField& f1, const VectorField& f2, const std::vector<int>& eps) {
    if (!(f1.grid == f2.grid)) throw ShapeMismatch("procrustes: clouds live on different grids");
    const int N = int(eps.size());
    const std::size_t np = f1.size();
    Eigen::VectorXd c1 = Eigen::VectorXd::Zero(N), c2 = Eigen::VectorXd::Zero(N);
    for (std::size_t p = 0; p < np; ++p) {
        c1 += f1[p];
        c2 += f2[p];
    }
    c1 /= double(np);
    c2 /= double(np);
    ProcrustesState st;
    st.S = Eigen::MatrixXd::Zero(N, N);
    st.C = Eigen::MatrixXd::Zero(N, N);
    for (std::size_t p = 0; p < np; ++p) {
        const Eigen::VectorXd x = f1[p] - c1, y = f2[p] - c2;
        st.S += x * x.transpose();
        st.C += y * x.transpose();
        st.yy += y.squaredNorm();
    }
    const Eigen::MatrixXd E = signature_matrix(eps);
    std::vector<Eigen::MatrixXd> basis;
    for (int a = 0; a < N; ++a)
        for (int b = a + 1; b < N; ++b) {
            Eigen::MatrixXd m = Eigen::MatrixXd::Zero(N, N);
            m(a, b) = 1.0;
            m(b, a) = -1.0;
            basis.push_back(m * E);
        }
    const int m = int(basis.size());

    std::vector<Eigen::MatrixXd> starts;
    {
        const Eigen::MatrixXd affine = st.C * st.S.completeOrthogonalDecomposition().pseudoInverse();
        try {
            starts.push_back(project_to_group(affine, eps));
        } catch (const ProjectionFailed&) {
        }
    }
    for (int mask = 0; mask < (1 << N); ++mask) {
        Eigen::MatrixXd D = Eigen::MatrixXd::Identity(N, N);
        for (int a = 0; a < N; ++a)
            if (mask & (1 << a)) D(a, a) = -1.0;
        starts.push_back(D);
    }

    Motion best;
    double best_cost = std::numeric_limits<double>::infinity();
    bool any_converged = false;
    const double scale = std::max(1.0, st.S.trace() + st.yy);
    for (const auto& B0 : starts) {
        Eigen::MatrixXd B = B0;
        double cost = st.cost(B);
        double lambda = 1e-6;
        bool converged = false;
        int it = 0;
        for (; it < 200; ++it) {
            const Eigen::MatrixXd R = B * st.S - st.C;
            Eigen::VectorXd grad(m);
            std::vector<Eigen::MatrixXd> BE(m);
            for (int a = 0; a < m; ++a) {
                BE[a] = B * basis[a];
                grad[a] = (BE[a].transpose() * R).trace();
            }
            Eigen::MatrixXd H(m, m);
            for (int a = 0; a < m; ++a)
                for (int b = a; b < m; ++b) H(a, b) = H(b, a) = (BE[a].transpose() * BE[b] * st.S).trace();
            if (grad.norm() <= 1e-13 * scale) {
                converged = true;
                break;
            }
            bool accepted = false;
            for (int tries = 0; tries < 30 && !accepted; ++tries) {
                Eigen::MatrixXd Hl = H;
                Hl.diagonal().array() += lambda * std::max(1.0, H.diagonal().maxCoeff());
                const Eigen::VectorXd t = Hl.ldlt().solve(-grad);
                Eigen::MatrixXd X = Eigen::MatrixXd::Zero(N, N);
                for (int a = 0; a < m; ++a) X += t[a] * basis[a];
                const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(N, N);
                Eigen::MatrixXd Bn = B * (I - 0.5 * X).inverse() * (I + 0.5 * X);
                if (it % 10 == 9) Bn = project_to_group(Bn, eps);
                const double cn = st.cost(Bn);
                if (std::isfinite(cn) && cn <= cost) {
                    const double dec = cost - cn;
                    B = Bn;
                    cost = cn;
                    lambda = std::max(lambda * 0.3, 1e-12);
                    accepted = true;
                    if (t.norm() < 1e-14 || dec <= 1e-16 * scale) converged = true;
                } else {
                    lambda *= 10.0;
                }
            }
            if (!accepted) {
                converged = true;  // no descent direction left at working precision
                break;
            }
            if (converged) break;
        }
        if (cost < best_cost) {
            best_cost = cost;
            best.B = project_to_group(B, eps);
            best.iterations = it;
        }
        any_converged = any_converged || converged;
    }
    best.b = c2 - best.B * c1;
    double sq = 0.0;
    for (std::size_t p = 0; p < np; ++p) {
        const double e = (best.B * f1[p] + best.b - f2[p]).norm();
        sq += e * e;
        best.sup = std::max(best.sup, e);
    }
    best.rms = std::sqrt(sq / double(np));
    if (!any_converged)
        throw NoConvergence("procrustes did not converge; best rms " + std::to_string(best.rms));
    return best;
}

VectorField apply_motion(const Motion& m, const VectorField& f) {
    VectorField out(f.grid);
    for (std::size_t p = 0; p < f.size(); ++p) out[p] = m.B * f[p] + m.b;
    return out;
}

RoundtripReport roundtrip(const Immersion& f, const std::vector<int>& basepoint) {
    const Grid& grid = f.grid();
    const std::vector<int> base = checked_base(grid, basepoint);
    const InducedData ind = induced_data(f);
    const FrameField frame = gram_schmidt(ind.g, identity_frame(grid, grid.ndim()));
    const std::size_t b = grid.flat_index(base);

    // Initial frame from the sampled data at the basepoint.
    const int n = grid.ndim(), N = f.ambient_dim();
    Eigen::MatrixXd Df(N, n);
    for (int l = 0; l < n; ++l)
        Df.col(l) = fd_derivative(grid, b, l, [&](std::size_t q) -> const Eigen::VectorXd& { return f.f[q]; });
    Eigen::MatrixXd A0(N, N);
    A0.topRows(n) = (Df * frame.e[b]).transpose();
    A0.bottomRows(N - n) = ind.normals[b].transpose();
    std::vector<int> eps = frame.signature;
    eps.insert(eps.end(), ind.fund.normal_signature.begin(), ind.fund.normal_signature.end());
    if (eps != f.signature) {
        // The realized frame uses eps_{n,nu} + eps_{k,tau}; the target must agree.
        throw IndexMismatch("ambient signature is not ordered as tangent block then normal block");
    }
    A0 = project_to_group(A0, eps);

    RoundtripReport r;
    const ChristoffelField gamma = christoffel(ind.g);
    const FormField om = curvature(gamma);
    r.gauss_l2 = gauss_residual(om, ind.fund, ind.g).l2;
    r.codazzi_l2 = codazzi_residual(ind.fund, gamma).l2;
    r.ricci_l2 = ricci_residual(ind.fund, ind.g).l2;

    r.realization = realize_immersion(ind.g, ind.fund, frame, base, f.f[b], A0);
    r.structural_l2 = r.realization.structural_l2;
    r.isometry_defect = r.realization.isometry_defect;
    r.pfaff_path_defect = r.realization.pfaff_path_defect;
    r.motion = procrustes(r.realization.immersion.f, f.f, eps);
    r.aligned_sup = r.motion.sup;
    r.aligned_rms = r.motion.rms;
    return r;
}

} // namespace cforge
