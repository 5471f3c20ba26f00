#include "cforge/fixtures.hpp"

#include "cforge/errors.hpp"

#include <cmath>

namespace cforge {

namespace {

constexpr double kPi = 3.14159265358979323846;

// Exact first and second order data of an immersion at one chart point.
struct Local {
    Eigen::VectorXd f;
    Eigen::MatrixXd df;                      // columns d_i f
    std::vector<std::vector<Eigen::VectorXd>> d2f;
    Eigen::MatrixXd nu;                      // columns = normal frame
    std::vector<Eigen::MatrixXd> dnu;        // d_l of nu
};

double dot(const Eigen::VectorXd& a, const Eigen::VectorXd& b, const std::vector<int>& eps) {
    double s = 0.0;
    for (int i = 0; i < a.size(); ++i) s += eps[i] * a[i] * b[i];
    return s;
}

SubmanifoldFixture build(const std::string& name, const Grid& grid, int n, const std::vector<int>& eps,
                         const std::function<Local(const Eigen::VectorXd&)>& at) {
    const int N = int(eps.size());
    const int k = N - n;
    std::vector<Local> loc(grid.size());
    parallel_for(grid.size(), [&](std::size_t p) { loc[p] = at(grid.point(p)); });

    std::vector<int> nsig(k);
    for (int a = 0; a < k; ++a) {
        const Eigen::VectorXd v = loc[0].nu.col(a);
        nsig[a] = dot(v, v, eps) < 0 ? -1 : 1;
    }
    SubmanifoldFixture fx;
    fx.name = name;
    MatrixField g(grid);
    fx.fund = FundamentalData::zero(grid, n, nsig);
    for (std::size_t p = 0; p < grid.size(); ++p) {
        const Local& L = loc[p];
        Eigen::MatrixXd gp(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) gp(i, j) = dot(L.df.col(i), L.df.col(j), eps);
        g[p] = gp;
        for (int a = 0; a < k; ++a)
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j) fx.fund.h[a][p](i, j) = dot(L.d2f[i][j], L.nu.col(a), eps);
        for (int l = 0; l < n; ++l)
            for (int a = 0; a < k; ++a)
                for (int b = 0; b < k; ++b)
                    fx.fund.omega[l][p](a, b) = nsig[b] * dot(L.dnu[l].col(a), L.nu.col(b), eps);
    }
    fx.g = MetricData::from_field(std::move(g));
    fx.frame = gram_schmidt(fx.g, identity_frame(grid, n));
    fx.exact.signature = eps;
    fx.exact.f = VectorField(grid);
    fx.exact.A = MatrixField(grid);
    for (std::size_t p = 0; p < grid.size(); ++p) {
        fx.exact.f[p] = loc[p].f;
        Eigen::MatrixXd A(N, N);
        A.topRows(n) = (loc[p].df * fx.frame.e[p]).transpose();
        A.bottomRows(k) = loc[p].nu.transpose();
        fx.exact.A[p] = A;
    }
    fx.basepoint = center_index(grid);
    return fx;
}

Local blank(int N, int n, int k) {
    Local L;
    L.f = Eigen::VectorXd::Zero(N);
    L.df = Eigen::MatrixXd::Zero(N, n);
    L.d2f.assign(n, std::vector<Eigen::VectorXd>(n, Eigen::VectorXd::Zero(N)));
    L.nu = Eigen::MatrixXd::Zero(N, k);
    L.dnu.assign(n, Eigen::MatrixXd::Zero(N, k));
    return L;
}

} // namespace

SubmanifoldFixture plane_fixture(int N) {
    const Grid grid = Grid::box({N, N}, {0.0, 0.0}, {1.0, 1.0});
    return build("plane", grid, 2, {1, 1, 1}, [](const Eigen::VectorXd& x) {
        Local L = blank(3, 2, 1);
        L.f << x[0], x[1], 0.0;
        L.df(0, 0) = 1.0;
        L.df(1, 1) = 1.0;
        L.nu(2, 0) = 1.0;
        return L;
    });
}

SubmanifoldFixture sphere_fixture(int N, double ii_scale) {
    const Grid grid = Grid::box({N, N}, {kPi / 4, 0.0}, {3 * kPi / 4, kPi / 2});
    auto fx = build("sphere", grid, 2, {1, 1, 1}, [](const Eigen::VectorXd& x) {
        const double st = std::sin(x[0]), ct = std::cos(x[0]), sp = std::sin(x[1]), cp = std::cos(x[1]);
        Local L = blank(3, 2, 1);
        L.f << st * cp, st * sp, ct;
        L.df.col(0) << ct * cp, ct * sp, -st;
        L.df.col(1) << -st * sp, st * cp, 0.0;
        L.d2f[0][0] = -L.f;
        L.d2f[0][1] << -ct * sp, ct * cp, 0.0;
        L.d2f[1][0] = L.d2f[0][1];
        L.d2f[1][1] << -st * cp, -st * sp, 0.0;
        L.nu.col(0) = -L.f;
        L.dnu[0].col(0) = -L.df.col(0);
        L.dnu[1].col(0) = -L.df.col(1);
        return L;
    });
    if (ii_scale != 1.0) {
        for (auto& m : fx.fund.h[0].data) m *= ii_scale;
        fx.name = "sphere-scaled";
    }
    return fx;
}

SubmanifoldFixture de_sitter_fixture(int N) {
    const Grid grid = Grid::box({N, N}, {-0.5, 0.0}, {0.5, kPi / 2});
    return build("de-sitter", grid, 2, {-1, 1, 1}, [](const Eigen::VectorXd& x) {
        const double sh = std::sinh(x[0]), ch = std::cosh(x[0]), sp = std::sin(x[1]), cp = std::cos(x[1]);
        Local L = blank(3, 2, 1);
        L.f << sh, ch * cp, ch * sp;
        L.df.col(0) << ch, sh * cp, sh * sp;
        L.df.col(1) << 0.0, -ch * sp, ch * cp;
        L.d2f[0][0] = L.f;
        L.d2f[0][1] << 0.0, -sh * sp, sh * cp;
        L.d2f[1][0] = L.d2f[0][1];
        L.d2f[1][1] << 0.0, -ch * cp, -ch * sp;
        L.nu.col(0) = -L.f;
        L.dnu[0].col(0) = -L.df.col(0);
        L.dnu[1].col(0) = -L.df.col(1);
        return L;
    });
}

SubmanifoldFixture hyperbolic_fixture(int N) {
    const Grid grid = Grid::box({N, N}, {0.5, 0.0}, {1.5, kPi / 2});
    return build("hyperbolic", grid, 2, {1, 1, -1}, [](const Eigen::VectorXd& x) {
        const double sh = std::sinh(x[0]), ch = std::cosh(x[0]), sp = std::sin(x[1]), cp = std::cos(x[1]);
        Local L = blank(3, 2, 1);
        L.f << sh * cp, sh * sp, ch;
        L.df.col(0) << ch * cp, ch * sp, sh;
        L.df.col(1) << -sh * sp, sh * cp, 0.0;
        L.d2f[0][0] = L.f;
        L.d2f[0][1] << -ch * sp, ch * cp, 0.0;
        L.d2f[1][0] = L.d2f[0][1];
        L.d2f[1][1] << -sh * cp, -sh * sp, 0.0;
        L.nu.col(0) = -L.f;
        L.dnu[0].col(0) = -L.df.col(0);
        L.dnu[1].col(0) = -L.df.col(1);
        return L;
    });
}

CurveProfile default_cylinder_profile() {
    return {[](double s) { return 1.0 + 0.5 * s; }, [](double s) { return s + 0.25 * s * s; }};
}

CurveProfile oscillating_profile(double kbar, double eps) {
    return {[=](double s) { return kbar + std::cos(s / eps); },
            [=](double s) { return kbar * s + eps * std::sin(s / eps); }};
}

SubmanifoldFixture flat_cylinder_fixture(int N, const CurveProfile& curve) {
    return flat_cylinder_fixture(N, N, curve);
}

SubmanifoldFixture flat_cylinder_fixture(int Ns, int Nz, const CurveProfile& curve) {
    const int N = Ns;
    const Grid grid = Grid::box({Ns, Nz}, {0.0, 0.0}, {1.0, 1.0});
    // Curve points by composite Gauss-Legendre quadrature of (cos a, sin a).
    static const double gx[4] = {-0.8611363115940526, -0.3399810435848563, 0.3399810435848563, 0.8611363115940526};
    static const double gw[4] = {0.3478548451374538, 0.6521451548625461, 0.6521451548625461, 0.3478548451374538};
    const int sub = 16;
    std::vector<Eigen::Vector2d> c(N, Eigen::Vector2d::Zero());
    for (int i = 1; i < N; ++i) {
        const double a = grid.origin[0] + (i - 1) * grid.spacing[0], b = a + grid.spacing[0];
        Eigen::Vector2d acc = c[i - 1];
        const double w = (b - a) / sub;
        for (int q = 0; q < sub; ++q) {
            const double m = a + (q + 0.5) * w;
            for (int r = 0; r < 4; ++r) {
                const double al = curve.alpha(m + 0.5 * w * gx[r]);
                acc += 0.5 * w * gw[r] * Eigen::Vector2d(std::cos(al), std::sin(al));
            }
        }
        c[i] = acc;
    }
    auto fx = build("flat-cylinder", grid, 2, {1, 1, 1}, [&](const Eigen::VectorXd& x) {
        const int i = int(std::lround((x[0] - grid.origin[0]) / grid.spacing[0]));
        const double al = curve.alpha(x[0]), ka = curve.kappa(x[0]);
        Local L = blank(3, 2, 1);
        L.f << c[i][0], c[i][1], x[1];
        L.df.col(0) << std::cos(al), std::sin(al), 0.0;
        L.df(2, 1) = 1.0;
        L.nu.col(0) << -std::sin(al), std::cos(al), 0.0;
        L.d2f[0][0] = ka * L.nu.col(0);
        L.dnu[0].col(0) = -ka * L.df.col(0);
        return L;
    });
    return fx;
}

SubmanifoldFixture clifford_torus_fixture(int N, double twist) {
    const Grid grid = Grid::box({N, N}, {0.0, 0.0}, {kPi / 2, kPi / 2});
    return build("clifford-torus", grid, 2, {1, 1, 1, 1}, [twist](const Eigen::VectorXd& x) {
        const double u = x[0], v = x[1];
        const double phi = twist * std::sin(u) * std::cos(v);
        const double pu = twist * std::cos(u) * std::cos(v), pv = -twist * std::sin(u) * std::sin(v);
        Local L = blank(4, 2, 2);
        L.f << std::cos(u), std::sin(u), std::cos(v), std::sin(v);
        L.df.col(0) << -std::sin(u), std::cos(u), 0.0, 0.0;
        L.df.col(1) << 0.0, 0.0, -std::sin(v), std::cos(v);
        Eigen::Vector4d n1(std::cos(u), std::sin(u), 0.0, 0.0), n2(0.0, 0.0, std::cos(v), std::sin(v));
        L.d2f[0][0] = -n1;
        L.d2f[1][1] = -n2;
        const double c = std::cos(phi), s = std::sin(phi);
        L.nu.col(0) = c * n1 + s * n2;
        L.nu.col(1) = -s * n1 + c * n2;
        const Eigen::Vector4d dn1u = L.df.col(0), dn2v = L.df.col(1);
        // d_l nu = d_l(phi) * rotated frame + derivatives of n1, n2
        L.dnu[0].col(0) = pu * L.nu.col(1) + c * dn1u;
        L.dnu[0].col(1) = -pu * L.nu.col(0) - s * dn1u;
        L.dnu[1].col(0) = pv * L.nu.col(1) + s * dn2v;
        L.dnu[1].col(1) = -pv * L.nu.col(0) + c * dn2v;
        return L;
    });
}

Immersion graph_surface_r4(int N) {
    const Grid grid = Grid::box({N, N}, {-0.5, -0.5}, {0.5, 0.5});
    Immersion im;
    im.signature = {1, 1, 1, 1};
    im.f = sample(grid, [](const Eigen::VectorXd& x) {
        Eigen::VectorXd v(4);
        v << x[0], x[1], 0.3 * x[0] * x[0] + 0.5 * x[0] * x[1], 0.4 * x[1] * x[1] - 0.2 * x[0] * x[1] + 0.3 * x[0] * x[0] * x[0];
        return v;
    });
    return im;
}

std::vector<std::string> submanifold_fixture_names() {
    return {"plane", "sphere", "de-sitter", "hyperbolic", "flat-cylinder", "clifford-torus"};
}

SubmanifoldFixture make_submanifold_fixture(const std::string& name, int N) {
    if (name == "plane") return plane_fixture(N);
    if (name == "sphere") return sphere_fixture(N);
    if (name == "sphere-scaled") return sphere_fixture(N, 1.1);
    if (name == "de-sitter") return de_sitter_fixture(N);
    if (name == "hyperbolic") return hyperbolic_fixture(N);
    if (name == "flat-cylinder") return flat_cylinder_fixture(N, default_cylinder_profile());
    if (name == "clifford-torus") return clifford_torus_fixture(N);
    throw ConfigError("unknown fixture '" + name + "'");
}


} // namespace cforge
