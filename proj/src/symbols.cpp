#include "cforge/symbols.hpp"

#include "cforge/errors.hpp"
#include "cforge/forms.hpp"

#include <algorithm>
#include <cmath>

namespace cforge {

namespace {

constexpr double kTwoPi = 6.283185307179586476925;
const cplx kI(0.0, 1.0);

} // namespace

Eigen::MatrixXd wedge_matrix(const Eigen::VectorXd& xi, int k) {
    const int n = int(xi.size());
    const FormBasis& in = form_basis(n, k);
    const FormBasis& out = form_basis(n, k + 1);
    Eigen::MatrixXd M = Eigen::MatrixXd::Zero(out.size(), in.size());
    for (int c = 0; c < in.size(); ++c) {
        const auto& I = in.combos[c];
        for (int l = 0; l < n; ++l) {
            if (std::find(I.begin(), I.end(), l) != I.end()) continue;
            std::vector<int> idx{l};
            idx.insert(idx.end(), I.begin(), I.end());
            const int sgn = permutation_sign(idx);
            std::sort(idx.begin(), idx.end());
            M(out.find(idx), c) += sgn * xi[l];
        }
    }
    return M;
}

Eigen::MatrixXd interior_matrix(const Eigen::VectorXd& v, int k) {
    const int n = int(v.size());
    const FormBasis& in = form_basis(n, k);
    if (k == 0) return Eigen::MatrixXd::Zero(0, in.size());
    const FormBasis& out = form_basis(n, k - 1);
    Eigen::MatrixXd M = Eigen::MatrixXd::Zero(out.size(), in.size());
    for (int c = 0; c < in.size(); ++c) {
        const auto& I = in.combos[c];
        for (int r = 0; r < k; ++r) {
            std::vector<int> rest;
            for (int s = 0; s < k; ++s)
                if (s != r) rest.push_back(I[s]);
            M(out.find(rest), c) += ((r % 2) ? -1.0 : 1.0) * v[I[r]];
        }
    }
    return M;
}

Eigen::VectorXcd symbol_d(const Eigen::VectorXd& xi, const Eigen::VectorXcd& w, int degree) {
    const Eigen::MatrixXd M = wedge_matrix(xi, degree);
    if (w.size() != M.cols()) throw ShapeMismatch("symbol_d: fiber element has the wrong size");
    return (-kTwoPi * kI) * (M.cast<cplx>() * w);
}

Eigen::VectorXcd symbol_delta(const Eigen::VectorXd& xi, const Eigen::VectorXcd& l, int degree,
                              const Eigen::MatrixXd& g) {
    const Eigen::MatrixXd M = interior_matrix(g.inverse() * xi, degree);
    if (l.size() != M.cols()) throw ShapeMismatch("symbol_delta: fiber element has the wrong size");
    return (kTwoPi * kI) * (M.cast<cplx>() * l);
}

SymbolicOperator ext_d_operator(int n, int degree) {
    SymbolicOperator T;
    T.kind = OperatorKind::ExtD;
    T.n = n;
    T.dim_in = form_basis(n, degree).size();
    T.dim_out = form_basis(n, degree + 1).size();
    T.symbol = [degree](const Eigen::VectorXd&, const Eigen::VectorXd& xi) -> Eigen::MatrixXcd {
        return (-kTwoPi * kI) * wedge_matrix(xi, degree).cast<cplx>();
    };
    return T;
}

SymbolicOperator codiff_operator(int n, int degree, MetricFn g) {
    SymbolicOperator T;
    T.kind = OperatorKind::Codiff;
    T.n = n;
    T.dim_in = form_basis(n, degree).size();
    T.dim_out = degree == 0 ? 0 : form_basis(n, degree - 1).size();
    T.symbol = [degree, g](const Eigen::VectorXd& x, const Eigen::VectorXd& xi) -> Eigen::MatrixXcd {
        return (kTwoPi * kI) * interior_matrix(g(x).inverse() * xi, degree).cast<cplx>();
    };
    return T;
}

SymbolicOperator codiff_operator(int n, int degree, const Eigen::MatrixXd& g) {
    if (g.rows() != n || g.cols() != n) throw ShapeMismatch("codiff_operator: metric size");
    return codiff_operator(n, degree, [g](const Eigen::VectorXd&) { return g; });
}

SymbolicOperator first_order_operator(const std::vector<Eigen::MatrixXd>& B) {
    if (B.empty()) throw ShapeMismatch("first_order_operator: no coefficient matrices");
    SymbolicOperator T;
    T.kind = OperatorKind::CustomFirstOrder;
    T.n = int(B.size());
    T.dim_out = int(B[0].rows());
    T.dim_in = int(B[0].cols());
    for (const auto& b : B)
        if (b.rows() != T.dim_out || b.cols() != T.dim_in) throw ShapeMismatch("first_order_operator: shapes differ");
    T.symbol = [B](const Eigen::VectorXd&, const Eigen::VectorXd& xi) -> Eigen::MatrixXcd {
        Eigen::MatrixXd s = Eigen::MatrixXd::Zero(B[0].rows(), B[0].cols());
        for (std::size_t l = 0; l < B.size(); ++l) s += xi[l] * B[l];
        return (kTwoPi * kI) * s.cast<cplx>();
    };
    return T;
}

SymbolicOperator direct_sum(const SymbolicOperator& a, const SymbolicOperator& b) {
    if (a.n != b.n || a.order != b.order) throw ShapeMismatch("direct_sum: operators disagree on dimension or order");
    SymbolicOperator T;
    T.kind = OperatorKind::DirectSum;
    T.order = a.order;
    T.n = a.n;
    T.dim_in = a.dim_in + b.dim_in;
    T.dim_out = a.dim_out + b.dim_out;
    T.symbol = [a, b](const Eigen::VectorXd& x, const Eigen::VectorXd& xi) -> Eigen::MatrixXcd {
        Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(a.dim_out + b.dim_out, a.dim_in + b.dim_in);
        m.topLeftCorner(a.dim_out, a.dim_in) = a.symbol(x, xi);
        m.bottomRightCorner(b.dim_out, b.dim_in) = b.symbol(x, xi);
        return m;
    };
    return T;
}

SymbolicOperator stacked(const SymbolicOperator& a, const SymbolicOperator& b) {
    if (a.n != b.n || a.order != b.order || a.dim_in != b.dim_in)
        throw ShapeMismatch("stacked: operators need a common source");
    SymbolicOperator T;
    T.kind = OperatorKind::Stacked;
    T.order = a.order;
    T.n = a.n;
    T.dim_in = a.dim_in;
    T.dim_out = a.dim_out + b.dim_out;
    T.symbol = [a, b](const Eigen::VectorXd& x, const Eigen::VectorXd& xi) -> Eigen::MatrixXcd {
        Eigen::MatrixXcd m(a.dim_out + b.dim_out, a.dim_in);
        m.topRows(a.dim_out) = a.symbol(x, xi);
        m.bottomRows(b.dim_out) = b.symbol(x, xi);
        return m;
    };
    return T;
}

QuadraticForm::QuadraticForm(const Eigen::MatrixXcd& m) {
    if (m.rows() != m.cols()) throw ShapeMismatch("QuadraticForm needs a square matrix");
    q = 0.5 * (m + m.adjoint());
}

cplx QuadraticForm::operator()(const Eigen::VectorXcd& z) const {
    if (z.size() != q.rows()) throw ShapeMismatch("QuadraticForm: argument has the wrong size");
    // sum_jk q_jk z_j conj(z_k) = z^T q conj(z)
    return (z.transpose() * q * z.conjugate())(0, 0);
}

double QuadraticForm::real(const Eigen::VectorXd& z) const { return real(Eigen::VectorXcd(z.cast<cplx>())); }

QuadraticForm form_pairing(int n, int k, const Eigen::MatrixXd& g) {
    const Eigen::MatrixXd G = form_gram(g.inverse(), k);
    const int m = int(G.rows());
    Eigen::MatrixXd q = Eigen::MatrixXd::Zero(2 * m, 2 * m);
    q.topRightCorner(m, m) = 0.5 * G;
    q.bottomLeftCorner(m, m) = 0.5 * G;
    (void)n;
    return QuadraticForm(q);
}

int default_direction_count(int n) { return n == 2 ? 64 : (n == 3 ? 266 : 64 * n); }

std::vector<Eigen::VectorXd> sample_directions(int n, int n_dirs, std::uint64_t seed) {
    if (n < 1 || n_dirs < 1) throw ShapeMismatch("sample_directions: need n >= 1 and n_dirs >= 1");
    std::vector<Eigen::VectorXd> out;
    if (n == 1) {
        out.push_back(Eigen::VectorXd::Ones(1));
        return out;
    }
    if (n == 2) {
        for (int j = 0; j < n_dirs; ++j) {
            const double a = kTwoPi * j / n_dirs;
            out.push_back(Eigen::Vector2d(std::cos(a), std::sin(a)));
        }
    } else if (n == 3) {
        const double golden = M_PI * (3.0 - std::sqrt(5.0));
        for (int j = 0; j < n_dirs; ++j) {
            const double z = 1.0 - (2.0 * j + 1.0) / n_dirs;
            const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
            out.push_back(Eigen::Vector3d(r * std::cos(golden * j), r * std::sin(golden * j), z));
        }
    } else {
        Rng rng(seed);
        for (int j = 0; j < n_dirs; ++j) {
            Eigen::VectorXd v(n);
            for (int i = 0; i < n; ++i) v[i] = rng.normal();
            out.push_back(v / v.norm());
        }
    }
    for (int i = 0; i < n; ++i) out.push_back(Eigen::VectorXd::Unit(n, i));
    return out;
}

std::vector<ConeSample> cone_sample(const SymbolicOperator& T, const Eigen::VectorXd& x, int n_dirs, double cutoff,
                                    std::uint64_t seed) {
    std::vector<ConeSample> out;
    for (const auto& xi : sample_directions(T.n, n_dirs, seed)) {
        const Eigen::MatrixXcd S = T.at(x, xi);
        ConeSample cs;
        cs.xi = xi;
        if (S.rows() == 0) {
            cs.kernel = Eigen::MatrixXcd::Identity(T.dim_in, T.dim_in);
        } else {
            Eigen::JacobiSVD<Eigen::MatrixXcd> svd(S, Eigen::ComputeFullV);
            const auto& s = svd.singularValues();
            const double thr = cutoff * std::max(1.0, s.size() ? s.maxCoeff() : 0.0);
            int rank = 0;
            for (int i = 0; i < s.size(); ++i)
                if (s[i] > thr) ++rank;
            cs.kernel = svd.matrixV().rightCols(T.dim_in - rank);
        }
        out.push_back(std::move(cs));
    }
    return out;
}

ConeCheck quadratic_on_cone_check(const QuadraticForm& Q, const SymbolicOperator& T, int n_dirs, int n_pts,
                                  std::uint64_t seed, double tol) {
    if (Q.dim() != T.dim_in) throw ShapeMismatch("quadratic_on_cone_check: Q and T act on different fibers");
    ConeCheck r;
    r.tol = tol;
    Rng rng(seed ^ 0x9e3779b97f4a7c15ULL);
    const Eigen::VectorXd x = Eigen::VectorXd::Zero(T.n);
    for (const auto& cs : cone_sample(T, x, n_dirs, 1e-10, seed)) {
        const int kd = int(cs.kernel.cols());
        if (kd == 0) continue;
        ++r.nonempty_directions;
        const Eigen::MatrixXcd S = T.at(x, cs.xi);
        auto visit = [&](const Eigen::VectorXcd& s) {
            r.max_abs_q = std::max(r.max_abs_q, std::abs(Q(s)));
            if (S.rows() > 0) r.max_symbol_residual = std::max(r.max_symbol_residual, (S * s).norm());
            ++r.samples;
        };
        for (int c = 0; c < kd; ++c) visit(cs.kernel.col(c));
        for (int t = 0; t < n_pts; ++t) {
            Eigen::VectorXcd c(kd);
            for (int i = 0; i < kd; ++i) c[i] = cplx(rng.normal(), rng.normal());
            visit(cs.kernel * (c / c.norm()));
        }
    }
    r.pass = r.max_abs_q < tol && r.max_symbol_residual < 1e-9;
    return r;
}

} // namespace cforge
