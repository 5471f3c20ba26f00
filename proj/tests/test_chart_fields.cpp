/// Chart-field layer: metrics, frames, forms, Hodge star, Sobolev norms.
#include "doctest.h"

#include "cforge/forms.hpp"
#include "cforge/metric.hpp"

#include <cmath>
#include <limits>
#include <numeric>

using namespace cforge;

namespace {

Grid unit_square(int n) { return Grid::box({n, n}, {0.0, 0.0}, {1.0, 1.0}); }

FormField scalar_form(const Grid& g, int degree, const std::function<std::vector<double>(const Eigen::VectorXd&)>& f) {
    FormField w(g, degree);
    for (std::size_t p = 0; p < g.size(); ++p) {
        auto v = f(g.point(p));
        for (int b = 0; b < w.nbasis(); ++b) w.coeff(p, b) = v[b];
    }
    return w;
}

double max_abs(const FormField& w, bool interior_only = false) {
    double m = 0.0;
    for (std::size_t p = 0; p < w.grid.size(); ++p) {
        if (interior_only) {
            bool edge = false;
            for (int a = 0; a < w.grid.ndim(); ++a) {
                int i = w.grid.index_along(p, a);
                if (i == 0 || i == w.grid.dims[a] - 1) edge = true;
            }
            if (edge) continue;
        }
        for (std::size_t c = 0; c < w.block(); ++c) m = std::max(m, std::abs(w.data[p * w.block() + c]));
    }
    return m;
}

// Oracle: Hodge star from full antisymmetric components and the Levi-Civita
// symbol, summing over all index tuples (no multi-index bookkeeping shared
// with the library).
std::vector<double> brute_star(const std::vector<double>& comp_sorted, int n, int k, const Eigen::MatrixXd& g) {
    const Eigen::MatrixXd gi = g.inverse();
    const double vol = std::sqrt(std::abs(g.determinant()));
    auto ipow = [](int b, int e) { int r = 1; for (int i = 0; i < e; ++i) r *= b; return r; };
    auto digits = [&](int idx, int len) {
        std::vector<int> d(len);
        for (int i = len - 1; i >= 0; --i) { d[i] = idx % n; idx /= n; }
        return d;
    };
    auto levi = [](std::vector<int> v) {
        int s = 1;
        for (std::size_t i = 0; i < v.size(); ++i)
            for (std::size_t j = i + 1; j < v.size(); ++j) {
                if (v[i] == v[j]) return 0;
                if (v[i] > v[j]) s = -s;
            }
        return s;
    };
    // full lower components
    const auto& basis = form_basis(n, k).combos;
    std::vector<double> full(ipow(n, k), 0.0);
    for (int idx = 0; idx < ipow(n, k); ++idx) {
        auto d = digits(idx, k);
        int s = levi(d);
        if (s == 0) continue;
        auto sorted = d;
        std::sort(sorted.begin(), sorted.end());
        int b = int(std::find(basis.begin(), basis.end(), sorted) - basis.begin());
        full[idx] = s * comp_sorted[b];
    }
    // raise all indices
    std::vector<double> up(full.size(), 0.0);
    for (int idx = 0; idx < ipow(n, k); ++idx) {
        auto d = digits(idx, k);
        double s = 0.0;
        for (int jdx = 0; jdx < ipow(n, k); ++jdx) {
            auto e = digits(jdx, k);
            double f = full[jdx];
            for (int q = 0; q < k; ++q) f *= gi(d[q], e[q]);
            s += f;
        }
        up[idx] = s;
    }
    double kfact = 1.0;
    for (int i = 2; i <= k; ++i) kfact *= i;
    const auto& out_b = form_basis(n, n - k).combos;
    std::vector<double> out(out_b.size(), 0.0);
    for (std::size_t J = 0; J < out_b.size(); ++J) {
        double s = 0.0;
        for (int idx = 0; idx < ipow(n, k); ++idx) {
            auto d = digits(idx, k);
            auto cat = d;
            cat.insert(cat.end(), out_b[J].begin(), out_b[J].end());
            s += up[idx] * levi(cat);
        }
        out[J] = vol * s / kfact;
    }
    return out;
}

Eigen::MatrixXd random_metric(Rng& rng, int n, int index) {
    Eigen::MatrixXd Q = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) Q(i, j) = rng.normal();
    Q += 3.0 * Eigen::MatrixXd::Identity(n, n);
    Eigen::MatrixXd D = Eigen::MatrixXd::Identity(n, n);
    for (int i = 0; i < index; ++i) D(i, i) = -1.0;
    return Q.transpose() * D * Q;
}

} // namespace

TEST_CASE("validate_metric examples") {
    Grid g = unit_square(5);
    Eigen::MatrixXd mink = Eigen::Vector4d(-1, 1, 1, 1).asDiagonal();
    Grid g4 = Grid::box({4, 4, 4, 4}, {0, 0, 0, 0}, {1, 1, 1, 1});
    auto m = MetricData::constant(g4, mink);
    auto d = validate_metric(m);
    CHECK(m.index == 1);
    CHECK(d.min_abs_det == doctest::Approx(1.0));

    auto e = MetricData::constant(g, Eigen::MatrixXd::Identity(2, 2));
    CHECK(validate_metric(e).min_abs_det == doctest::Approx(1.0));
    CHECK(e.index == 0);

    Grid line = Grid::box({5, 5}, {-1.0, 0.0}, {1.0, 1.0});
    MatrixField gt(line);
    for (std::size_t p = 0; p < line.size(); ++p) gt[p] = Eigen::Vector2d(line.coord(p, 0), 1.0).asDiagonal();
    MetricData bad;
    bad.g = gt;
    bad.index = 0;
    bad.signature = {1, 1};
    CHECK_THROWS_AS(validate_metric(bad), DegenerateMetric);

    // index flips without a tiny determinant sample
    Grid l2 = Grid::box({4, 4}, {-1.0, 0.0}, {1.0, 1.0});
    MatrixField gf(l2);
    for (std::size_t p = 0; p < l2.size(); ++p) gf[p] = Eigen::Vector2d(l2.coord(p, 0), 1.0).asDiagonal();
    MetricData flip;
    flip.g = gf;
    flip.index = 1;
    flip.signature = {-1, 1};
    CHECK_THROWS_AS(validate_metric(flip), IndexMismatch);
}

TEST_CASE("gram_schmidt examples") {
    Grid g = unit_square(4);
    auto m = MetricData::constant(g, Eigen::Vector2d(-1, 1).asDiagonal());
    auto f = gram_schmidt(m, identity_frame(g, 2));
    CHECK(f.signature == std::vector<int>{-1, 1});
    CHECK((f.e[5] - Eigen::MatrixXd::Identity(2, 2)).norm() < 1e-15);

    // polar metric: e = diag(1, 1/r)
    Grid pg = Grid::box({5, 5}, {1.0, 0.0}, {2.0, 1.0});
    MatrixField gp(pg);
    for (std::size_t p = 0; p < pg.size(); ++p) {
        double r = pg.coord(p, 0);
        gp[p] = Eigen::Vector2d(1.0, r * r).asDiagonal();
    }
    auto fp = gram_schmidt(MetricData::from_field(gp), identity_frame(pg, 2));
    for (std::size_t p = 0; p < pg.size(); ++p) {
        double r = pg.coord(p, 0);
        CHECK(std::abs(fp.e[p](0, 0) - 1.0) < 1e-14);
        CHECK(std::abs(fp.e[p](1, 1) - 1.0 / r) < 1e-14);
        CHECK(std::abs(fp.e[p](0, 1)) < 1e-14);
    }

    // null first column against Minkowski
    auto mk = MetricData::constant(g, Eigen::Vector2d(-1, 1).asDiagonal());
    Eigen::MatrixXd seed(2, 2);
    seed << 1, 0, 1, 1;
    FrameField s = FrameField::from_vectors(MatrixField(g, seed), {1, 1});
    CHECK_THROWS_AS(gram_schmidt(mk, s), NullVectorEncountered);
}

TEST_CASE("gram_schmidt orthonormality on random constant metrics") {
    Rng rng(11);
    for (int n = 2; n <= 4; ++n) {
        for (int idx = 0; idx <= n; ++idx) {
            Grid g = Grid::box(std::vector<int>(n, 3), std::vector<double>(n, 0.0), std::vector<double>(n, 1.0));
            auto m = MetricData::constant(g, random_metric(rng, n, idx));
            auto f = gram_schmidt(m, identity_frame(g, n));
            CHECK(orthonormality_defect(f, m) < 1e-12);
            CHECK(std::count(f.signature.begin(), f.signature.end(), -1) == idx);
            CHECK(std::is_sorted(f.signature.begin(), f.signature.end()));
        }
    }
}

TEST_CASE("tensor_inner examples and algebra") {
    Grid g = unit_square(4);
    auto mk = MetricData::constant(g, Eigen::Vector2d(-1, 1).asDiagonal());
    TensorField dx0(g, 2, 0, 1);
    for (std::size_t p = 0; p < g.size(); ++p) dx0.at(p, 0) = 1.0;
    CHECK(tensor_inner(dx0, dx0, mk)[3] == doctest::Approx(-1.0));
    TensorField zero(g, 2, 0, 1);
    CHECK(tensor_inner(zero, dx0, mk)[3] == 0.0);
    auto eu = MetricData::constant(g, Eigen::MatrixXd::Identity(2, 2));
    TensorField dx1(g, 2, 0, 1);
    for (std::size_t p = 0; p < g.size(); ++p) dx1.at(p, 1) = 1.0;
    CHECK(tensor_inner(dx1, dx1, eu)[0] == doctest::Approx(1.0));
    TensorField v(g, 2, 1, 0);
    CHECK_THROWS_AS(tensor_inner(v, dx1, eu), ValenceMismatch);

    // bilinear, symmetric, homogeneous norm on a random (1,1) tensor pair
    Rng rng(3);
    auto gm = MetricData::constant(g, random_metric(rng, 2, 1));
    TensorField a(g, 2, 1, 1), b(g, 2, 1, 1), c(g, 2, 1, 1);
    for (auto* t : {&a, &b, &c})
        for (double& x : t->comps) x = rng.normal();
    auto ab = tensor_inner(a, b, gm), ba = tensor_inner(b, a, gm);
    TensorField apc = a;
    for (std::size_t i = 0; i < apc.comps.size(); ++i) apc.comps[i] = 2.0 * a.comps[i] + c.comps[i];
    auto lin = tensor_inner(apc, b, gm), cb = tensor_inner(c, b, gm);
    TensorField la = a;
    for (double& x : la.comps) x *= -3.0;
    auto na = tensor_norm(a, gm), nla = tensor_norm(la, gm);
    for (std::size_t p = 0; p < g.size(); ++p) {
        CHECK(ab[p] == doctest::Approx(ba[p]).epsilon(1e-12));
        CHECK(lin[p] == doctest::Approx(2.0 * ab[p] + cb[p]).epsilon(1e-12));
        CHECK(nla[p] == doctest::Approx(3.0 * na[p]).epsilon(1e-12));
    }
}

TEST_CASE("volume_form examples") {
    Grid g = unit_square(4);
    CHECK(volume_form(MetricData::constant(g, Eigen::Vector2d(-1, 1).asDiagonal()))[2] == doctest::Approx(1.0));
    CHECK(volume_form(MetricData::constant(g, Eigen::Vector2d(-4, 1).asDiagonal()))[2] == doctest::Approx(2.0));
    Grid pg = Grid::box({5, 5}, {1.0, 0.0}, {2.0, 1.0});
    MatrixField gp(pg);
    for (std::size_t p = 0; p < pg.size(); ++p) gp[p] = Eigen::Vector2d(1.0, std::pow(pg.coord(p, 0), 2)).asDiagonal();
    auto v = volume_form(MetricData::from_field(gp));
    for (std::size_t p = 0; p < pg.size(); ++p) CHECK(v[p] == doctest::Approx(pg.coord(p, 0)));
}

TEST_CASE("ext_d examples") {
    Grid g = unit_square(9);
    auto w = scalar_form(g, 1, [](const Eigen::VectorXd& x) { return std::vector<double>{0.0, x[0]}; });
    auto dw = ext_d(w);
    REQUIRE(dw.degree == 2);
    for (std::size_t p = 0; p < g.size(); ++p) CHECK(std::abs(dw.coeff(p, 0) - 1.0) < 1e-12);

    auto c = scalar_form(g, 1, [](const Eigen::VectorXd&) { return std::vector<double>{2.0, -1.0}; });
    CHECK(max_abs(ext_d(c)) < 1e-12);

    // d of a top form is the zero field
    auto top = scalar_form(g, 2, [](const Eigen::VectorXd& x) { return std::vector<double>{x[0] * x[1]}; });
    CHECK(ext_d(top).nbasis() == 0);

    // d(df): difference operators along different axes commute, so the
    // result is zero up to rounding, well inside the O(h^2) bound
    for (int n : {17, 33, 65}) {
        Grid gg = unit_square(n);
        auto f = scalar_form(gg, 0, [](const Eigen::VectorXd& x) {
            return std::vector<double>{std::sin(3 * x[0]) * std::cos(2 * x[1])};
        });
        double h = gg.max_spacing();
        CHECK(max_abs(ext_d(ext_d(f))) < 10 * h * h);
    }

    // d(df) against the exact derivative: O(h^2) with order near 2
    std::vector<double> errs;
    for (int n : {17, 33, 65}) {
        Grid gg = unit_square(n);
        auto f = scalar_form(gg, 0, [](const Eigen::VectorXd& x) {
            return std::vector<double>{std::sin(3 * x[0]) * std::cos(2 * x[1])};
        });
        auto df = ext_d(f);
        double e = 0.0;
        for (std::size_t p = 0; p < gg.size(); ++p) {
            auto x = gg.point(p);
            e = std::max(e, std::abs(df.coeff(p, 0) - 3 * std::cos(3 * x[0]) * std::cos(2 * x[1])));
        }
        errs.push_back(e);
    }
    CHECK(std::log2(errs[0] / errs[1]) > 1.8);
    CHECK(std::log2(errs[1] / errs[2]) > 1.8);
}

TEST_CASE("wedge examples") {
    Grid g = unit_square(4);
    auto dx = scalar_form(g, 1, [](const Eigen::VectorXd&) { return std::vector<double>{1.0, 0.0}; });
    CHECK(max_abs(wedge(dx, dx)) == 0.0);

    Rng rng(5);
    Eigen::MatrixXd M1 = Eigen::MatrixXd::Random(3, 3), M2 = Eigen::MatrixXd::Random(3, 3);
    FormField W(g, 1, 3, 3);
    for (std::size_t p = 0; p < g.size(); ++p) W.dir(p, 0) = M1;
    CHECK(max_abs(wedge(W, W)) == 0.0);
    for (std::size_t p = 0; p < g.size(); ++p) W.dir(p, 1) = M2;
    auto ww = wedge(W, W);
    CHECK((Eigen::MatrixXd(ww.value(3, 0)) - (M1 * M2 - M2 * M1)).norm() < 1e-14);

    FormField bad(g, 1, 2, 2);
    CHECK_THROWS_AS(wedge(W, bad), ShapeMismatch);

    // graded commutativity for scalar forms: a^b = (-1)^{jk} b^a
    Grid g3 = Grid::box({3, 3, 3}, {0, 0, 0}, {1, 1, 1});
    auto a = scalar_form(g3, 1, [](const Eigen::VectorXd& x) { return std::vector<double>{x[0], 2.0, -x[2]}; });
    auto b = scalar_form(g3, 2, [](const Eigen::VectorXd& x) { return std::vector<double>{1.0, x[1], 3.0}; });
    auto ab = wedge(a, b), ba = wedge(b, a);
    for (std::size_t p = 0; p < g3.size(); ++p) CHECK(ab.coeff(p, 0) == doctest::Approx(ba.coeff(p, 0)));
    auto aa = wedge(a, a);
    CHECK(max_abs(aa) == 0.0);
}

TEST_CASE("hodge_star examples") {
    Grid g = unit_square(4);
    auto eu = MetricData::constant(g, Eigen::MatrixXd::Identity(2, 2));
    auto dx = scalar_form(g, 1, [](const Eigen::VectorXd&) { return std::vector<double>{1.0, 0.0}; });
    auto sdx = hodge_star(dx, eu);
    CHECK(sdx.coeff(0, 0) == 0.0);
    CHECK(sdx.coeff(0, 1) == doctest::Approx(1.0));
    CHECK(hodge_star(sdx, eu).coeff(0, 0) == doctest::Approx(-1.0));

    auto mk = MetricData::constant(g, Eigen::Vector2d(-1, 1).asDiagonal());
    auto ss = hodge_star(hodge_star(dx, mk), mk);
    CHECK(ss.coeff(0, 0) == doctest::Approx(1.0));

    Eigen::MatrixXd gm(2, 2);
    gm << 2.0, 0.3, 0.3, 1.5;
    auto one = scalar_form(g, 0, [](const Eigen::VectorXd&) { return std::vector<double>{1.0}; });
    CHECK(hodge_star(one, MetricData::constant(g, gm)).coeff(0, 0) == doctest::Approx(std::sqrt(gm.determinant())));

    // matrix-valued forms: star acts on the form factor
    FormField W(g, 1, 2, 2);
    Eigen::MatrixXd A(2, 2);
    A << 1, 2, 3, 4;
    for (std::size_t p = 0; p < g.size(); ++p) W.dir(p, 0) = A;
    auto sW = hodge_star(W, eu);
    CHECK((Eigen::MatrixXd(sW.value(0, 1)) - A).norm() < 1e-15);
}

TEST_CASE("hodge_star matches the Levi-Civita oracle and the double-star sign") {
    Rng rng(7);
    for (int n = 2; n <= 4; ++n) {
        for (int idx = 0; idx <= n; ++idx) {
            Grid g = Grid::box(std::vector<int>(n, 3), std::vector<double>(n, 0.0), std::vector<double>(n, 1.0));
            Eigen::MatrixXd gm = random_metric(rng, n, idx);
            auto m = MetricData::constant(g, gm);
            for (int k = 0; k <= n; ++k) {
                FormField w(g, k);
                std::vector<double> c(w.nbasis());
                for (double& x : c) x = rng.normal();
                for (std::size_t p = 0; p < g.size(); ++p)
                    for (int b = 0; b < w.nbasis(); ++b) w.coeff(p, b) = c[b];
                auto s = hodge_star(w, m);
                auto oracle = brute_star(c, n, k, gm);
                for (int b = 0; b < s.nbasis(); ++b) CHECK(s.coeff(0, b) == doctest::Approx(oracle[b]).epsilon(1e-10));
                auto ss = hodge_star(s, m);
                const double sign = ((k * (n - k) + idx) % 2 == 0) ? 1.0 : -1.0;
                for (int b = 0; b < w.nbasis(); ++b)
                    CHECK(ss.coeff(0, b) == doctest::Approx(sign * c[b]).epsilon(1e-10));
                // a ^ *a = <a,a> dV
                auto wa = wedge(w, s);
                auto ip = form_inner(w, w, m);
                CHECK(wa.coeff(0, 0) == doctest::Approx(ip[0] * std::sqrt(std::abs(gm.determinant()))).epsilon(1e-10));
            }
        }
    }
}

TEST_CASE("codifferential examples") {
    Grid g = unit_square(9);
    auto eu = MetricData::constant(g, Eigen::MatrixXd::Identity(2, 2));
    auto c = scalar_form(g, 1, [](const Eigen::VectorXd&) { return std::vector<double>{1.0, 2.0}; });
    CHECK(max_abs(codifferential(c, eu)) < 1e-12);
    auto xdx = scalar_form(g, 1, [](const Eigen::VectorXd& x) { return std::vector<double>{x[0], 0.0}; });
    auto d = codifferential(xdx, eu);
    for (std::size_t p = 0; p < g.size(); ++p) CHECK(d.coeff(p, 0) == doctest::Approx(-1.0));

    // delta is the formal adjoint of d on periodic grids:
    // sum <d f, w> dV = sum f (delta w) dV
    Grid pg = Grid::box({32, 32}, {0, 0}, {1, 1}, {true, true});
    MatrixField gm(pg);
    for (std::size_t p = 0; p < pg.size(); ++p) {
        auto x = pg.point(p);
        Eigen::MatrixXd m(2, 2);
        m << 1.0 + 0.3 * std::sin(2 * M_PI * x[0]), 0.1, 0.1, -(1.2 + 0.2 * std::cos(2 * M_PI * x[1]));
        gm[p] = m;
    }
    auto met = MetricData::from_field(gm);
    auto f = scalar_form(pg, 0, [](const Eigen::VectorXd& x) {
        return std::vector<double>{std::sin(2 * M_PI * x[0]) * std::cos(2 * M_PI * x[1])};
    });
    auto w = scalar_form(pg, 1, [](const Eigen::VectorXd& x) {
        return std::vector<double>{std::cos(2 * M_PI * x[1]), std::sin(4 * M_PI * x[0])};
    });
    auto vol = volume_form(met);
    auto lhs_f = form_inner(ext_d(f), w, met);
    auto dw = codifferential(w, met);
    double lhs = 0, rhs = 0;
    for (std::size_t p = 0; p < pg.size(); ++p) {
        lhs += lhs_f[p] * vol[p];
        rhs += f.coeff(p, 0) * dw.coeff(p, 0) * vol[p];
    }
    CHECK(std::abs(lhs - rhs) < 1e-10 * pg.size());

    // delta delta vanishes up to rounding (pointwise stars cancel)
    Grid g3 = Grid::box({9, 9, 9}, {0, 0, 0}, {1, 1, 1});
    MatrixField g3m(g3);
    for (std::size_t p = 0; p < g3.size(); ++p) {
        auto x = g3.point(p);
        g3m[p] = Eigen::Vector3d(1.0 + x[0] * x[0], 1.0 + 0.5 * x[1], std::exp(x[2])).asDiagonal();
    }
    auto m3 = MetricData::from_field(g3m);
    auto w2 = scalar_form(g3, 2, [](const Eigen::VectorXd& x) {
        return std::vector<double>{std::sin(x[0] + x[1]), x[2] * x[0], std::cos(x[1] * x[2])};
    });
    CHECK(max_abs(codifferential(codifferential(w2, m3), m3)) < 1e-9);
}

TEST_CASE("sobolev_norm examples") {
    Grid g = unit_square(11);
    auto eu = MetricData::constant(g, Eigen::MatrixXd::Identity(2, 2));
    TensorField u(g, 2, 0, 0);
    for (double& v : u.comps) v = -2.5;
    CHECK(sobolev_norm(u, eu, 0, 2.0) == doctest::Approx(2.5));
    CHECK(sobolev_norm(u, eu, 0, 1.0) == doctest::Approx(2.5));
    CHECK(sobolev_norm(u, eu, 1, 2.0) == doctest::Approx(2.5));

    Grid line = Grid::box({64}, {0.0}, {1.0}, {true});
    auto e1 = MetricData::constant(line, Eigen::MatrixXd::Identity(1, 1));
    TensorField s(line, 1, 0, 0);
    for (std::size_t p = 0; p < line.size(); ++p) s.comps[p] = std::sin(2 * M_PI * line.coord(p, 0));
    CHECK(sobolev_norm(s, e1, 0, 2.0) == doctest::Approx(std::sqrt(0.5)).epsilon(1e-10));
    TensorField s2 = s;
    for (double& v : s2.comps) v *= 2.0;
    CHECK(sobolev_norm(s2, e1, 1, 3.0) == doctest::Approx(2.0 * sobolev_norm(s, e1, 1, 3.0)).epsilon(1e-12));
    CHECK(sobolev_norm(s, e1, 0, std::numeric_limits<double>::infinity()) == doctest::Approx(1.0).epsilon(1e-3));
    // first derivative of sin(2 pi x): L2 norm 2 pi sqrt(1/2) up to O(h^2)
    double w12 = sobolev_norm(s, e1, 1, 2.0);
    CHECK(w12 == doctest::Approx(std::sqrt(0.5) * (1 + 2 * M_PI)).epsilon(2e-2));
}
