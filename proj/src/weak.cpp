#include "cforge/weak.hpp"

#include "cforge/cartan.hpp"
#include "cforge/errors.hpp"
#include "cforge/fixtures.hpp"

#include <cmath>

namespace cforge {

namespace {

constexpr double kPi = 3.14159265358979323846;

bool on_open_boundary(const Grid& g, std::size_t p) {
    for (int a = 0; a < g.ndim(); ++a) {
        if (g.periodic[a]) continue;
        const int i = g.index_along(p, a);
        if (i == 0 || i == g.dims[a] - 1) return true;
    }
    return false;
}

void check_support(const Grid& grid, const std::function<double(std::size_t)>& psi) {
    double mx = 0.0, edge = 0.0;
    for (std::size_t p = 0; p < grid.size(); ++p) {
        const double v = std::abs(psi(p));
        mx = std::max(mx, v);
        if (on_open_boundary(grid, p)) edge = std::max(edge, v);
    }
    if (edge > 1e-12 * std::max(1.0, mx))
        throw ConfigError("test function does not vanish on the open boundary of the grid");
}

} // namespace

double weak_pairing(const VectorField& u, const QuadraticForm& Q, const ScalarField& psi, const MetricData* g) {
    const Grid& grid = u.grid;
    if (!(psi.grid == grid)) throw ShapeMismatch("weak_pairing: test function on another grid");
    if (g && !(g->grid() == grid)) throw ShapeMismatch("weak_pairing: metric on another grid");
    check_support(grid, [&](std::size_t p) { return psi[p]; });
    return parallel_sum(grid.size(), [&](std::size_t p) {
        const double vol = g ? std::sqrt(std::abs(g->g[p].determinant())) : 1.0;
        return grid.quad_weight(p) * Q.real(u[p]) * psi[p] * vol;
    });
}

std::vector<double> dyadic_schedule(int lo, int hi) {
    std::vector<double> e;
    for (int j = lo; j <= hi; ++j) e.push_back(std::ldexp(1.0, -j));
    return e;
}

WeakLimitReport weak_limit_experiment(const OscillatoryFamily& fam, const QuadraticForm& Q) {
    WeakLimitReport r;
    r.name = fam.name;
    r.declared_limit = fam.declared_limit;
    std::vector<double> es, errs;
    for (double e : fam.eps) {
        const Grid grid = fam.grid(e);
        check_support(grid, [&](std::size_t p) { return fam.psi(grid.point(p)); });
        WeakLimitRow row;
        row.eps = e;
        row.points = grid.size();
        row.pairing = parallel_sum(grid.size(), [&](std::size_t p) {
            const Eigen::VectorXd x = grid.point(p);
            return grid.quad_weight(p) * Q.real(fam.member(x, e)) * fam.psi(x);
        });
        row.error = std::abs(row.pairing - fam.declared_limit);
        es.push_back(e);
        errs.push_back(row.error);
        r.rows.push_back(row);
    }
    r.rate = fit_loglog_rate(es, errs);
    r.final_gap = r.rows.empty() ? 0.0 : r.rows.back().error;
    return r;
}

QuadraticForm div_curl_form() {
    Eigen::MatrixXd q = Eigen::MatrixXd::Zero(4, 4);
    q.topRightCorner(2, 2) = 0.5 * Eigen::Matrix2d::Identity();
    q.bottomLeftCorner(2, 2) = 0.5 * Eigen::Matrix2d::Identity();
    return QuadraticForm(q);
}

QuadraticForm product_form() {
    Eigen::Matrix2d q;
    q << 0.0, 0.5, 0.5, 0.0;
    return QuadraticForm(Eigen::MatrixXd(q));
}

OscillatoryFamily constrained_resonant_family(const std::vector<double>& eps) {
    OscillatoryFamily f;
    f.name = "constrained-resonant";
    f.constraint = "V is a gradient, Z a rotated gradient (curl V = 0, div Z = 0 exactly)";
    f.eps = eps;
    f.grid = [](double e) {
        const int nx = int(std::lround(4.0 / e)) + 16;
        return Grid::box({nx, 64}, {0.0, 0.0}, {1.0, 1.0}, {true, true});
    };
    f.member = [](const Eigen::VectorXd& x, double e) {
        const double th = 2.0 * kPi * x[0] / e;
        const double c = std::cos(th), s = std::sin(th);
        const double a = 1.0 + 0.5 * std::cos(2.0 * kPi * x[1]);
        const double ay = -kPi * std::sin(2.0 * kPi * x[1]);
        const double b = 1.0 + 0.5 * std::sin(2.0 * kPi * x[0]);
        const double bx = kPi * std::cos(2.0 * kPi * x[0]);
        const double k = e / (2.0 * kPi);
        Eigen::VectorXd u(4);
        // V = grad(k a s), Z = J grad(k b s) with J(v1, v2) = (-v2, v1)
        u << a * c, k * ay * s, 0.0, b * c + k * bx * s;
        return u;
    };
    f.psi = [](const Eigen::VectorXd& x) {
        return (1.0 + std::sin(2.0 * kPi * x[1])) * (1.0 + std::cos(2.0 * kPi * x[0]));
    };
    f.declared_limit = 0.0;
    return f;
}

double constrained_resonant_coefficient() { return -1.0 / 32.0; }

OscillatoryFamily nonresonant_family(const Eigen::Vector2d& k, const Eigen::Vector2d& l,
                                     const std::vector<double>& eps) {
    OscillatoryFamily f;
    f.name = "nonresonant";
    f.constraint = "V = grad(eps sin(2 pi k.x/eps)/(2 pi)), Z = J grad(eps sin(2 pi l.x/eps)/(2 pi))";
    f.eps = eps;
    f.grid = [](double e) {
        const int n = int(std::lround(16.0 / e)) + 1;
        return Grid::box({n, n}, {0.0, 0.0}, {1.0, 1.0});
    };
    f.member = [k, l](const Eigen::VectorXd& x, double e) {
        const Eigen::Vector2d p(x[0], x[1]);
        const double ck = std::cos(2.0 * kPi * k.dot(p) / e), cl = std::cos(2.0 * kPi * l.dot(p) / e);
        Eigen::VectorXd u(4);
        u << k[0] * ck, k[1] * ck, -l[1] * cl, l[0] * cl;
        return u;
    };
    f.psi = [](const Eigen::VectorXd& x) {
        // lopsided so the edge slopes differ and the decay is not masked by symmetry
        return 144.0 * x[0] * (1.0 - x[0]) * (1.0 - x[0]) * x[1] * x[1] * (1.0 - x[1]);
    };
    f.declared_limit = 0.0;
    return f;
}

OscillatoryFamily unconstrained_family(const std::vector<double>& eps) {
    OscillatoryFamily f;
    f.name = "unconstrained";
    f.constraint = "none";
    f.eps = eps;
    f.grid = [](double e) {
        const int n = int(std::lround(4.0 / e)) + 16;
        return Grid::box({n}, {0.0}, {2.0 * kPi}, {true});
    };
    f.member = [](const Eigen::VectorXd& x, double e) {
        const double c = std::cos(x[0] / e);
        return Eigen::Vector2d(c, c).eval();
    };
    f.psi = [](const Eigen::VectorXd&) { return 1.0 / (2.0 * kPi); };
    f.declared_limit = 0.0;
    return f;
}

CartanFamilyReport cartan_family_experiment(double kbar, const std::vector<double>& eps, int nz) {
    CartanFamilyReport rep;
    // psi = (64/9) sin^4(pi s) sin^4(pi z) has unit integral and vanishes to
    // third order at the edges.
    auto psi = [](const Eigen::VectorXd& x) {
        return (64.0 / 9.0) * std::pow(std::sin(kPi * x[0]), 4) * std::pow(std::sin(kPi * x[1]), 4);
    };
    auto pair_kappa = [&](const ConnectionForm& W) {
        const Grid& g = W.W.grid;
        return parallel_sum(g.size(), [&](std::size_t p) { return g.quad_weight(p) * psi(g.point(p)) * W.at(p, 0)(0, 2); });
    };
    auto build = [&](int ns, const CurveProfile& c) {
        const SubmanifoldFixture fx = flat_cylinder_fixture(ns, nz, c);
        return std::make_pair(connection_one_form(fx.frame, christoffel(fx.g), fx.fund),
                              10.0 * std::pow(fx.g.grid().max_spacing(), 2));
    };
    {
        const CurveProfile flat{[kbar](double) { return kbar; }, [kbar](double s) { return kbar * s; }};
        const auto [W, tol] = build(64, flat);
        rep.limit_structural_l2 = second_structural_residual(W).norms.l2;
        rep.limit_tol = tol;
        rep.limit_pairing = pair_kappa(W);
    }
    std::vector<double> es, errs;
    for (double e : eps) {
        const int ns = std::max(64, int(std::lround(16.0 / e)) + 16);
        const auto [W, tol] = build(ns, oscillating_profile(kbar, e));
        CartanFamilyRow row;
        row.eps = e;
        row.structural_l2 = second_structural_residual(W).norms.l2;
        row.tol = tol;
        row.pairing = pair_kappa(W);
        row.error = std::abs(row.pairing - rep.limit_pairing);
        es.push_back(e);
        errs.push_back(row.error);
        rep.rows.push_back(row);
    }
    rep.rate = fit_loglog_rate(es, errs);
    return rep;
}

} // namespace cforge
