// Christoffel symbols, connection forms, curvature and structural residuals.
#include "doctest.h"

#include "cforge/cartan.hpp"
#include "cforge/fixtures.hpp"

#include <cmath>

using namespace cforge;

namespace {

double sq(double x) { return x * x; }

// Polar chart r in [1, 2], theta in [0, 1].
MetricData polar_metric(int N) {
    const Grid grid = Grid::box({N, N}, {1.0, 0.0}, {2.0, 1.0});
    MatrixField g = sample(grid, [](const Eigen::VectorXd& x) {
        Eigen::MatrixXd m = Eigen::MatrixXd::Zero(2, 2);
        m(0, 0) = 1.0;
        m(1, 1) = x[0] * x[0];
        return m;
    });
    return MetricData::from_field(std::move(g));
}

double polar_error(int N) {
    const MetricData g = polar_metric(N);
    const ChristoffelField G = christoffel(g);
    double err = 0.0;
    for (std::size_t p = 0; p < g.grid().size(); ++p) {
        const double r = g.grid().coord(p, 0);
        for (int k = 0; k < 2; ++k)
            for (int i = 0; i < 2; ++i)
                for (int j = 0; j < 2; ++j) {
                    double want = 0.0;
                    if (k == 0 && i == 1 && j == 1) want = -r;
                    if (k == 1 && i + j == 1) want = 1.0 / r;
                    err = std::max(err, std::abs(G(p, k, i, j) - want));
                }
    }
    return err;
}

// Hand-computed connection of the unit sphere in the frame
// (d_theta, d_phi / sin theta, inward normal).
Eigen::MatrixXd sphere_W(double theta, int l) {
    Eigen::MatrixXd W = Eigen::MatrixXd::Zero(3, 3);
    if (l == 0) {
        W(0, 2) = 1.0;
        W(2, 0) = -1.0;
    } else {
        W(0, 1) = std::cos(theta);
        W(1, 0) = -std::cos(theta);
        W(1, 2) = std::sin(theta);
        W(2, 1) = -std::sin(theta);
    }
    return W;
}

ConnectionForm fixture_W(const SubmanifoldFixture& fx) {
    return connection_one_form(fx.frame, christoffel(fx.g), fx.fund);
}

double h2(const Grid& g) { return sq(g.max_spacing()); }

// Smooth o(2,1)-valued 1-form on [0,1]^2 for algebraic checks.
FormField wiggly_form(const Grid& grid) {
    FormField W(grid, 1, 3, 3);
    for (std::size_t p = 0; p < grid.size(); ++p) {
        const Eigen::VectorXd x = grid.point(p);
        for (int l = 0; l < 2; ++l) {
            Eigen::MatrixXd m = Eigen::MatrixXd::Zero(3, 3);
            const double a = std::sin(2.0 * x[0] + l), b = std::cos(x[1] - 0.5 * l), c = x[0] * x[1] + l;
            // eps = diag(-1, 1, 1): boosts in (0,1), (0,2), rotation in (1,2)
            m(0, 1) = m(1, 0) = a;
            m(0, 2) = m(2, 0) = b;
            m(1, 2) = c;
            m(2, 1) = -c;
            W.dir(p, l) = m;
        }
    }
    return W;
}

} // namespace

TEST_CASE("christoffel of a constant metric vanishes") {
    const Grid grid = Grid::box({8, 9}, {0.0, 0.0}, {1.0, 1.0});
    Eigen::MatrixXd m(2, 2);
    m << 2.0, 0.3, 0.3, -1.0;
    const ChristoffelField G = christoffel(MetricData::constant(grid, m));
    for (double v : G.data) CHECK(v == 0.0);
    CHECK(G.compatibility.sup == 0.0);
}

TEST_CASE("christoffel of the polar metric matches the closed form") {
    // Quadratic metric entries are differentiated exactly by the stencils.
    CHECK(polar_error(32) < 1e-10);
    const ChristoffelField G = christoffel(polar_metric(17));
    for (std::size_t p = 0; p < G.grid.size(); ++p)
        for (int k = 0; k < 2; ++k) CHECK(G(p, k, 0, 1) == G(p, k, 1, 0));
}

TEST_CASE("christoffel of the round metric converges at second order") {
    double err[2];
    int idx = 0;
    for (int N : {32, 64}) {
        const auto fx = sphere_fixture(N);
        const ChristoffelField G = christoffel(fx.g);
        double e = 0.0;
        for (std::size_t p = 0; p < G.grid.size(); ++p) {
            const double th = G.grid.coord(p, 0);
            e = std::max(e, std::abs(G(p, 0, 1, 1) + std::sin(th) * std::cos(th)));
            e = std::max(e, std::abs(G(p, 1, 0, 1) - std::cos(th) / std::sin(th)));
            e = std::max(e, std::abs(G(p, 0, 0, 0)) + std::abs(G(p, 1, 1, 1)));
        }
        err[idx++] = e;
    }
    CHECK(err[1] < 10.0 * sq((M_PI / 2) / 63));
    CHECK(std::log2(err[0] / err[1]) > 1.8);
}

TEST_CASE("de Sitter metric is compatible with its Christoffels to second order") {
    for (int N : {32, 64}) {
        const auto fx = de_sitter_fixture(N);
        const ChristoffelField G = christoffel(fx.g);
        CHECK(G.compatibility.l2 < 10.0 * h2(fx.g.grid()));
    }
}

TEST_CASE("connection form of the plane is zero") {
    const auto fx = plane_fixture(16);
    const ConnectionForm W = fixture_W(fx);
    for (double v : W.W.data) CHECK(std::abs(v) < 1e-14);
}

TEST_CASE("connection form of the unit sphere matches the hand computation") {
    const auto fx = sphere_fixture(64);
    const ConnectionForm W = fixture_W(fx);
    double err = 0.0;
    for (std::size_t p = 0; p < fx.g.grid().size(); ++p) {
        const double th = fx.g.grid().coord(p, 0);
        for (int l = 0; l < 2; ++l) err = std::max(err, (Eigen::MatrixXd(W.at(p, l)) - sphere_W(th, l)).cwiseAbs().maxCoeff());
    }
    CHECK(err < 10.0 * h2(fx.g.grid()));
}

TEST_CASE("de Sitter normal column equals the metric seen through the frame") {
    // II = g for the unit de Sitter slice, recomputed from the sampled immersion.
    const auto fx = de_sitter_fixture(64);
    const InducedData ind = induced_data(fx.exact);
    const FrameField frame = gram_schmidt(ind.g, identity_frame(ind.g.grid(), 2));
    const ConnectionForm W = connection_one_form(frame, christoffel(ind.g), ind.fund);
    double err = 0.0;
    for (std::size_t p = 0; p < ind.g.grid().size(); ++p) {
        const Eigen::MatrixXd eg = frame.e[p].transpose() * fx.g.g[p];
        for (int l = 0; l < 2; ++l)
            for (int i = 0; i < 2; ++i) err = std::max(err, std::abs(std::abs(W.at(p, l)(i, 2)) - std::abs(eg(i, l))));
    }
    CHECK(err < 10.0 * h2(fx.g.grid()));
}

TEST_CASE("every fixture connection form is semi-skew to roundoff") {
    for (const auto& name : submanifold_fixture_names()) {
        CAPTURE(name);
        const ConnectionForm W = fixture_W(make_submanifold_fixture(name, 24));
        CHECK(semi_skew_defect(W) < 1e-12);
    }
}

TEST_CASE("semi-skew projection is idempotent and exact") {
    Rng rng(7);
    const std::vector<int> eps{-1, 1, 1, -1};
    Eigen::MatrixXd m(4, 4);
    for (int i = 0; i < 16; ++i) m.data()[i] = rng.normal();
    const Eigen::MatrixXd p = project_semi_skew(m, eps);
    CHECK(semi_skew_defect(p, eps) == 0.0);
    CHECK((project_semi_skew(p, eps) - p).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("connection_one_form rejects an incompatible normal connection") {
    auto fx = clifford_torus_fixture(12);
    for (auto& m : fx.fund.omega[0].data) m(0, 0) = 0.5;  // symmetric part, not in o(2)
    CHECK_THROWS_AS(fixture_W(fx), SkewViolation);
}

TEST_CASE("curvature of a flat metric vanishes") {
    const Grid grid = Grid::box({20, 20}, {0.0, 0.0}, {1.0, 1.0});
    // Flat metric in skewed linear coordinates.
    Eigen::MatrixXd m(2, 2);
    m << 1.0, 0.4, 0.4, 2.0;
    const FormField om = curvature(christoffel(MetricData::constant(grid, m)));
    for (double v : om.data) CHECK(v == 0.0);
}

TEST_CASE("sphere sectional curvature is 1 to second order") {
    double err[2];
    int idx = 0;
    for (int N : {32, 64}) {
        const auto fx = sphere_fixture(N);
        const ScalarField K = sectional_curvature_2d(christoffel(fx.g), fx.g);
        double e = 0.0;
        for (double v : K.data) e = std::max(e, std::abs(v - 1.0));
        err[idx++] = e;
    }
    CHECK(err[1] < 10.0 * sq((M_PI / 2) / 63));
    CHECK(std::log2(err[0] / err[1]) > 1.8);
}

TEST_CASE("second structural residual: trivial cases") {
    const Grid grid = Grid::box({10, 10}, {0.0, 0.0}, {1.0, 1.0});
    ConnectionForm W;
    W.n = 2;
    W.k = 1;
    W.signature = {1, 1, 1};
    W.W = FormField(grid, 1, 3, 3);
    CHECK(second_structural_residual(W).norms.sup == 0.0);

    Eigen::MatrixXd M(3, 3);
    M << 0, 1, 2, -1, 0, 3, -2, -3, 0;
    for (std::size_t p = 0; p < grid.size(); ++p) W.at(p, 0) = M;
    CHECK(second_structural_residual(W).norms.sup == 0.0);
}

TEST_CASE("second structural residual separates compatible and scaled sphere data") {
    const auto good = sphere_fixture(64);
    const auto bad = sphere_fixture(64, 1.1);
    const StructuralReport rg = second_structural_residual(fixture_W(good));
    const StructuralReport rb = second_structural_residual(fixture_W(bad));
    CHECK(rg.norms.l2 < 10.0 * h2(good.g.grid()));
    CHECK(rb.norms.l2 > 0.05);
    // Scaling II only breaks the Gauss block, i.e. the tangential entries.
    CHECK(rb.tangential.l2 > 0.05);
    CHECK(rb.mixed.l2 < 10.0 * h2(good.g.grid()));
}

TEST_CASE("first structural residual") {
    SUBCASE("Cartesian frame of the plane") {
        const auto fx = plane_fixture(12);
        const ConnectionForm W = fixture_W(fx);
        const auto r = first_structural_residual(coframe_form(fx.frame, 3), W);
        CHECK(r.tangential.sup == 0.0);
    }
    SUBCASE("sphere co-frame") {
        const auto fx = sphere_fixture(64);
        const ConnectionForm W = fixture_W(fx);
        const auto r = first_structural_residual(coframe_form(fx.frame, 3), W);
        CHECK(r.tangential.l2 < 10.0 * h2(fx.g.grid()));
    }
    SUBCASE("torsion perturbation is detected") {
        const auto fx = plane_fixture(12);
        ChristoffelField G = christoffel(fx.g);
        for (std::size_t p = 0; p < fx.g.grid().size(); ++p) {
            G(p, 0, 0, 1) += 0.3;
            G(p, 0, 1, 0) -= 0.3;
        }
        const ConnectionForm W = connection_one_form(fx.frame, G, fx.fund, 1.0);
        const auto r = first_structural_residual(coframe_form(fx.frame, 3), W);
        CHECK(r.tangential.l2 > 0.1);
    }
}

TEST_CASE("structural residual is gauge covariant under constant group elements") {
    const Grid grid = Grid::box({16, 16}, {0.0, 0.0}, {1.0, 1.0});
    ConnectionForm W;
    W.n = 2;
    W.k = 1;
    W.signature = {-1, 1, 1};
    W.W = wiggly_form(grid);
    const StructuralReport r0 = second_structural_residual(W);

    // Boost mixing (t, x) then rotation of (x, y).
    const double b = 0.7, t = 0.4;
    Eigen::MatrixXd B(3, 3), R(3, 3);
    B << std::cosh(b), std::sinh(b), 0, std::sinh(b), std::cosh(b), 0, 0, 0, 1;
    R << 1, 0, 0, 0, std::cos(t), -std::sin(t), 0, std::sin(t), std::cos(t);
    const Eigen::MatrixXd G = R * B, Gi = G.inverse();
    ConnectionForm V = W;
    for (std::size_t p = 0; p < grid.size(); ++p)
        for (int l = 0; l < 2; ++l) V.at(p, l) = G * Eigen::MatrixXd(W.at(p, l)) * Gi;
    const StructuralReport r1 = second_structural_residual(V);
    double err = 0.0, scale = 0.0;
    for (std::size_t p = 0; p < grid.size(); ++p) {
        const Eigen::MatrixXd a = G * Eigen::MatrixXd(r0.residual.value(p, 0)) * Gi;
        err = std::max(err, (Eigen::MatrixXd(r1.residual.value(p, 0)) - a).cwiseAbs().maxCoeff());
        scale = std::max(scale, a.cwiseAbs().maxCoeff());
    }
    CHECK(err < 1e-12 * std::max(1.0, scale));

    // Orthogonal conjugation keeps the norm itself.
    ConnectionForm U = W;
    for (std::size_t p = 0; p < grid.size(); ++p)
        for (int l = 0; l < 2; ++l) U.at(p, l) = R * Eigen::MatrixXd(W.at(p, l)) * R.transpose();
    const StructuralReport r2 = second_structural_residual(U);
    CHECK(std::abs(r2.norms.l2 - r0.norms.l2) < 1e-12 * std::max(1.0, r0.norms.l2));
}

TEST_CASE("christoffel_form reproduces the coordinate connection matrix") {
    const ChristoffelField G = christoffel(polar_metric(9));
    const FormField w = christoffel_form(G);
    for (std::size_t p = 0; p < G.grid.size(); ++p)
        for (int l = 0; l < 2; ++l)
            for (int i = 0; i < 2; ++i)
                for (int j = 0; j < 2; ++j) CHECK(w.dir(p, l)(i, j) == G(p, j, l, i));
}
