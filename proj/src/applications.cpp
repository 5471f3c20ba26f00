#include "cforge/applications.hpp"

#include "cforge/errors.hpp"

#include <cmath>

namespace cforge {

namespace {

constexpr double kPi = 3.14159265358979323846;

} // namespace

ConstraintReport einstein_constraints(const SliceData& s) {
    const MetricData& g = s.gamma;
    const Grid& grid = g.grid();
    const int n = g.dim();
    if (!(s.h.grid == grid)) throw ShapeMismatch("einstein_constraints: h on another grid");
    validate_metric(g);
    if (g.index != 0) throw IndexMismatch("einstein_constraints: slice metric must be Riemannian");
    const ChristoffelField G = christoffel(g);
    const FormField R = curvature(G);
    ConstraintReport r;
    r.scal = ScalarField(grid);
    r.hamiltonian = ScalarField(grid);
    r.momentum = VectorField(grid);
    parallel_for(grid.size(), [&](std::size_t p) {
        const Eigen::MatrixXd gi = g.g[p].inverse();
        Eigen::MatrixXd ric = Eigen::MatrixXd::Zero(n, n);
        for (int a = 0; a < n; ++a)
            for (int b = 0; b < n; ++b) {
                if (a == b) continue;
                const Eigen::MatrixXd Om = R.component(p, {a, b});
                for (int i = 0; i < n; ++i) ric(b, i) += Om(i, a);
            }
        const double scal = (gi.cwiseProduct(ric)).sum();
        const Eigen::MatrixXd& h = s.h[p];
        const double tr = (gi.cwiseProduct(h)).sum();
        const double h2 = (gi * h * gi).cwiseProduct(h).sum();
        r.scal[p] = scal;
        r.hamiltonian[p] = scal + tr * tr - h2;

        std::vector<Eigen::MatrixXd> dh(n);
        Eigen::VectorXd dtr(n);
        for (int k = 0; k < n; ++k) {
            dh[k] = fd_derivative(grid, p, k, [&](std::size_t q) -> const Eigen::MatrixXd& { return s.h[q]; });
            dtr[k] = fd_derivative(grid, p, k, [&](std::size_t q) {
                return (g.g[q].inverse().cwiseProduct(s.h[q])).sum();
            });
        }
        Eigen::VectorXd m(n);
        for (int i = 0; i < n; ++i) {
            double v = -dtr[i];
            for (int j = 0; j < n; ++j)
                for (int k = 0; k < n; ++k) {
                    double cov = dh[k](i, j);
                    for (int l = 0; l < n; ++l) cov -= G(p, l, k, i) * h(l, j) + G(p, l, k, j) * h(i, l);
                    v += gi(j, k) * cov;
                }
            m[i] = v;
        }
        r.momentum[p] = m;
    });
    NormAccumulator ah, am;
    for (std::size_t p = 0; p < grid.size(); ++p) {
        ah.add(r.hamiltonian[p] * r.hamiltonian[p]);
        am.add(r.momentum[p].squaredNorm());
    }
    r.hamiltonian_norms = ah.norms();
    r.momentum_norms = am.norms();
    return r;
}

SliceData hyperbolic_slice(int N, double h_scale) {
    const Grid grid = Grid::box({N, N, N}, {-0.5, -0.5, -0.5}, {0.5, 0.5, 0.5});
    SliceData s;
    s.name = h_scale == 1.0 ? "h3-slice" : "h3-slice-scaled";
    MatrixField g(grid);
    s.h = MatrixField(grid);
    for (std::size_t p = 0; p < grid.size(); ++p) {
        const Eigen::Vector3d x = grid.point(p);
        g[p] = Eigen::Matrix3d::Identity() - x * x.transpose() / (1.0 + x.squaredNorm());
        s.h[p] = h_scale * g[p];
    }
    s.gamma = MetricData::from_field(std::move(g));
    return s;
}

SliceData flat_slice(int N) {
    const Grid grid = Grid::box({N, N, N}, {0.0, 0.0, 0.0}, {1.0, 1.0, 1.0});
    SliceData s;
    s.name = "flat-slice";
    s.gamma = MetricData::constant(grid, Eigen::Matrix3d::Identity());
    s.h = MatrixField(grid, Eigen::MatrixXd::Zero(3, 3));
    return s;
}

NullFormCoefficients NullFormCoefficients::zero(int N, std::string name) {
    if (N < 1) throw ConfigError("null form needs N >= 1");
    NullFormCoefficients c;
    c.name = std::move(name);
    c.N = N;
    c.A.assign(std::size_t(N) * N * N, Eigen::Matrix4d::Zero());
    return c;
}

NullFormCoefficients q0_coefficients() {
    auto c = NullFormCoefficients::zero(1, "q0");
    c(0, 0, 0) = Eigen::Vector4d(1.0, -1.0, -1.0, -1.0).asDiagonal();
    return c;
}

NullFormCoefficients dt_squared_coefficients() {
    auto c = NullFormCoefficients::zero(1, "dt-squared");
    c(0, 0, 0)(0, 0) = 1.0;
    return c;
}

std::vector<std::string> null_form_names() { return {"q0", "dt-squared", "zero"}; }

NullFormCoefficients make_null_form(const std::string& name) {
    if (name == "q0") return q0_coefficients();
    if (name == "dt-squared") return dt_squared_coefficients();
    if (name == "zero") return NullFormCoefficients::zero(1);
    throw ConfigError("unknown null form '" + name + "'");
}

std::vector<Eigen::Vector4d> null_covectors(int n_dirs, std::uint64_t seed) {
    if (n_dirs < 8) throw ConfigError("null_condition_check needs at least 8 directions");
    std::vector<Eigen::Vector4d> out;
    for (const auto& w : sample_directions(3, n_dirs, seed)) out.emplace_back(1.0, w[0], w[1], w[2]);
    return out;
}

NullConditionReport null_condition_check(const NullFormCoefficients& A, int n_dirs, std::uint64_t seed) {
    NullConditionReport r;
    r.per_triple.assign(A.A.size(), 0.0);
    for (const auto& xi : null_covectors(n_dirs, seed)) {
        for (std::size_t t = 0; t < A.A.size(); ++t) {
            if (!A.A[t].allFinite()) throw ConfigError("null form coefficients must be finite");
            const double v = std::abs(xi.dot(A.A[t] * xi));
            r.per_triple[t] = std::max(r.per_triple[t], v);
            if (v > r.max_violation) {
                r.max_violation = v;
                r.worst_xi = xi;
            }
        }
    }
    r.pass = r.max_violation < 1e-12;
    return r;
}

QuadraticForm wave_quadratic_form(const NullFormCoefficients& A, int I) {
    const int N = A.N;
    Eigen::MatrixXd q = Eigen::MatrixXd::Zero(4 * N, 4 * N);
    for (int J = 0; J < N; ++J)
        for (int K = 0; K < N; ++K)
            for (int mu = 0; mu < 4; ++mu)
                for (int nu = 0; nu < 4; ++nu) q(J * 4 + nu, K * 4 + mu) += A(I, J, K)(mu, nu);
    return QuadraticForm(q);
}

SymbolicOperator wave_operator(const NullFormCoefficients& A, int I) {
    const int N = A.N;
    std::vector<Eigen::MatrixXd> B(4, Eigen::MatrixXd::Zero(N, 4 * N));
    for (int nu = 0; nu < 4; ++nu)
        for (int J = 0; J < N; ++J)
            for (int K = 0; K < N; ++K)
                for (int mu = 0; mu < 4; ++mu) B[nu](K, J * 4 + mu) = A(I, J, K)(mu, nu);
    return first_order_operator(B);
}

SymbolicOperator gradient_constraint_operator(int N) {
    std::vector<Eigen::MatrixXd> B(4, Eigen::MatrixXd::Zero(6 * N, 4 * N));
    int row = 0;
    for (int J = 0; J < N; ++J)
        for (int mu = 0; mu < 4; ++mu)
            for (int nu = mu + 1; nu < 4; ++nu, ++row) {
                B[nu](row, J * 4 + mu) += 1.0;
                B[mu](row, J * 4 + nu) -= 1.0;
            }
    return first_order_operator(B);
}

WaveConeReport wave_cone_check(const NullFormCoefficients& A, int n_dirs, int n_pts, std::uint64_t seed) {
    WaveConeReport r;
    r.full.pass = r.gradient.pass = true;
    r.full.tol = r.gradient.tol = 1e-9;
    for (int I = 0; I < A.N; ++I) {
        const QuadraticForm Q = wave_quadratic_form(A, I);
        const SymbolicOperator T = wave_operator(A, I);
        const ConeCheck f = quadratic_on_cone_check(Q, T, n_dirs, n_pts, seed);
        const ConeCheck g = quadratic_on_cone_check(Q, stacked(T, gradient_constraint_operator(A.N)), n_dirs, n_pts, seed);
        for (auto [dst, src] : {std::pair{&r.full, &f}, std::pair{&r.gradient, &g}}) {
            dst->max_abs_q = std::max(dst->max_abs_q, src->max_abs_q);
            dst->max_symbol_residual = std::max(dst->max_symbol_residual, src->max_symbol_residual);
            dst->samples += src->samples;
            dst->nonempty_directions += src->nonempty_directions;
            dst->pass = dst->pass && src->pass;
        }
    }
    r.necessary = null_condition_check(A, n_dirs, seed);
    return r;
}

OscillatoryFamily null_wave_family(const std::vector<double>& eps) {
    OscillatoryFamily f;
    f.name = "null-travelling-wave";
    f.constraint = "phi_eps = eps a P((t - x)/eps) travels along the null direction (1, 1, 0, 0)";
    f.eps = eps;
    f.grid = [](double e) {
        const int n = int(std::lround(8.0 / e)) + 1;
        return Grid::box({n, n}, {0.0, 0.0}, {1.0, 1.0});
    };
    f.member = [](const Eigen::VectorXd& x, double e) {
        const double t = x[0], y = x[1];
        const double a = 1.0 + 0.5 * t + 0.25 * y * y, at = 0.5, ay = 0.5 * y;
        const double th = 2.0 * kPi * (t - y) / e;
        const double P = std::sin(th) / (2.0 * kPi), dP = std::cos(th);
        Eigen::VectorXd s(4);
        s << e * at * P + a * dP, e * ay * P - a * dP, 0.0, 0.0;
        return s;
    };
    f.psi = [](const Eigen::VectorXd& x) {
        return (64.0 / 9.0) * std::pow(std::sin(kPi * x[0]), 4) * std::pow(std::sin(kPi * x[1]), 4);
    };
    f.declared_limit = 0.0;
    return f;
}

WaveExperiment wave_weak_continuity_experiment(const NullFormCoefficients& A, const OscillatoryFamily& fam) {
    if (A.N != 1) throw ConfigError("the travelling-wave family is scalar (N = 1)");
    WaveExperiment w;
    w.null_condition = null_condition_check(A);
    w.report = weak_limit_experiment(fam, wave_quadratic_form(A, 0));
    w.gap = w.report.final_gap;
    return w;
}

} // namespace cforge
