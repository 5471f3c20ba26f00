// Principal symbols, operator cones, quadratic forms and oscillatory
// weak-limit experiments.
#include "doctest.h"

#include "cforge/errors.hpp"
#include "cforge/forms.hpp"
#include "cforge/weak.hpp"

#include <cmath>
#include <random>

using namespace cforge;

namespace {

constexpr double kPi = 3.14159265358979323846;
const cplx I2pi(0.0, 2.0 * kPi);

// Hand-written wedge and interior products for the cone oracle, Euclidean.
// 1-forms in 2D: xi ^ mu is the dx^dy coefficient, iota lambda a scalar.
double wedge2(const Eigen::VectorXd& xi, const Eigen::VectorXcd& mu, int c) {
    (void)c;
    return std::abs(xi[0] * mu[1] - xi[1] * mu[0]);
}
// 2-forms in 3D on the basis (01, 02, 12).
double wedge3(const Eigen::VectorXd& xi, const Eigen::VectorXcd& mu) {
    return std::abs(xi[0] * mu[2] - xi[1] * mu[1] + xi[2] * mu[0]);
}
double interior3(const Eigen::VectorXd& v, const Eigen::VectorXcd& l) {
    // (iota_v l)_j = sum_i v_i l_ij
    const cplx l01 = l[0], l02 = l[1], l12 = l[2];
    const cplx c0 = -v[1] * l01 - v[2] * l02;
    const cplx c1 = v[0] * l01 - v[2] * l12;
    const cplx c2 = v[0] * l02 + v[1] * l12;
    return std::sqrt(std::norm(c0) + std::norm(c1) + std::norm(c2));
}

SymbolicOperator d_plus_delta(int n, const Eigen::MatrixXd& g) {
    return direct_sum(ext_d_operator(n, n - 1), codiff_operator(n, n - 1, g));
}

} // namespace

TEST_CASE("symbol of d on scalars and on xi itself") {
    const Eigen::Vector2d dx(1.0, 0.0);
    Eigen::VectorXcd one(1);
    one << 1.0;
    const Eigen::VectorXcd s = symbol_d(dx, one, 0);
    REQUIRE(s.size() == 2);
    CHECK(std::abs(s[0] - (-I2pi)) < 1e-15);
    CHECK(std::abs(s[1]) < 1e-15);

    const Eigen::Vector3d xi(0.3, -1.2, 0.7);
    const Eigen::VectorXcd w = xi.cast<cplx>();
    CHECK(symbol_d(xi, w, 1).norm() < 1e-15);

    Eigen::VectorXcd mu(3);
    mu << cplx(1, 2), cplx(-0.5, 0), cplx(0, 1);
    CHECK((symbol_d(2.0 * xi, mu, 1) - 2.0 * symbol_d(xi, mu, 1)).norm() < 1e-13);
}

TEST_CASE("symbol of the codifferential raises xi with the metric") {
    Eigen::VectorXcd dx(2), dy(2);
    dx << 1.0, 0.0;
    dy << 0.0, 1.0;
    const Eigen::Vector2d xi(1.0, 0.0);
    const Eigen::Matrix2d euc = Eigen::Matrix2d::Identity();
    CHECK(std::abs(symbol_delta(xi, dx, 1, euc)[0] - I2pi) < 1e-14);
    CHECK(std::abs(symbol_delta(xi, dy, 1, euc)[0]) < 1e-15);
    const Eigen::Matrix2d mink = Eigen::Vector2d(-1.0, 1.0).asDiagonal();
    CHECK(std::abs(symbol_delta(xi, dx, 1, mink)[0] + I2pi) < 1e-14);
}

TEST_CASE("symbols are homogeneous of their order") {
    std::mt19937_64 rng(7);
    std::normal_distribution<double> nd;
    auto metric = [](const Eigen::VectorXd& x) {
        Eigen::Matrix3d g;
        g << 1.0 + x[0] * x[0], 0.2 * x[1], 0.0, 0.2 * x[1], 2.0, 0.1, 0.0, 0.1, -1.0 - 0.3 * x[2] * x[2];
        return Eigen::MatrixXd(g);
    };
    std::vector<Eigen::MatrixXd> B(3);
    for (auto& b : B) b = Eigen::MatrixXd::NullaryExpr(2, 4, [&] { return nd(rng); });
    const std::vector<SymbolicOperator> ops = {ext_d_operator(3, 1), codiff_operator(3, 2, metric),
                                               first_order_operator(B),
                                               stacked(ext_d_operator(3, 1), codiff_operator(3, 1, metric))};
    for (const auto& T : ops) {
        for (int t = 0; t < 20; ++t) {
            Eigen::VectorXd x(3), xi(3);
            for (int i = 0; i < 3; ++i) { x[i] = nd(rng); xi[i] = nd(rng); }
            const double lam = std::exp(nd(rng));
            const Eigen::MatrixXcd a = T.at(x, lam * xi), b = T.at(x, xi);
            CHECK((a - lam * b).norm() <= 1e-12 * std::max(1.0, a.norm()));
        }
    }
}

TEST_CASE("quadratic forms are Hermitian and 2-homogeneous") {
    Eigen::MatrixXcd m(2, 2);
    m << cplx(1, 0), cplx(2, 1), cplx(0, 3), cplx(-1, 0);
    const QuadraticForm Q(m);
    CHECK((Q.q - Q.q.adjoint()).norm() == 0.0);
    Eigen::VectorXcd z(2);
    z << cplx(0.3, -1.0), cplx(2.0, 0.5);
    CHECK(std::abs(Q(z).imag()) < 1e-14);
    const cplx lam(1.5, -0.7);
    CHECK(std::abs(Q(lam * z) - std::norm(lam) * Q(z)) < 1e-12);
}

TEST_CASE("cone of d on 1-forms at dx contains dx") {
    const auto samples = cone_sample(ext_d_operator(2, 1), Eigen::VectorXd::Zero(2), 64);
    bool found = false;
    for (const auto& s : samples) {
        if ((s.xi - Eigen::Vector2d(1.0, 0.0)).norm() > 1e-14) continue;
        found = true;
        Eigen::VectorXcd dx(2);
        dx << 1.0, 0.0;
        CHECK((s.kernel * (s.kernel.adjoint() * dx) - dx).norm() < 1e-12);
    }
    CHECK(found);
}

TEST_CASE("cone of d + delta on (n-1)-forms matches the hand oracle") {
    SUBCASE("n = 2") {
        const auto samples = cone_sample(d_plus_delta(2, Eigen::Matrix2d::Identity()), Eigen::VectorXd::Zero(2),
                                         default_direction_count(2));
        REQUIRE(samples.size() >= 64);
        for (const auto& s : samples) {
            REQUIRE(s.kernel.cols() == 2);
            for (int c = 0; c < s.kernel.cols(); ++c) {
                const Eigen::VectorXcd v = s.kernel.col(c);
                CHECK(wedge2(s.xi, v.head(2), c) < 1e-10);
                CHECK(std::abs(s.xi[0] * v[2] + s.xi[1] * v[3]) < 1e-10);
            }
        }
    }
    SUBCASE("n = 3") {
        const auto samples = cone_sample(d_plus_delta(3, Eigen::Matrix3d::Identity()), Eigen::VectorXd::Zero(3),
                                         default_direction_count(3));
        REQUIRE(samples.size() >= 266);
        for (const auto& s : samples) {
            // xi ^ on 2-forms has rank 1, iota on 2-forms rank 2
            REQUIRE(s.kernel.cols() == 3);
            for (int c = 0; c < s.kernel.cols(); ++c) {
                const Eigen::VectorXcd v = s.kernel.col(c);
                CHECK(wedge3(s.xi, v.head(3)) < 1e-10);
                CHECK(interior3(s.xi, v.tail(3)) < 1e-10);
            }
        }
    }
}

TEST_CASE("the form pairing vanishes on the d + delta cone") {
    for (int n : {2, 3}) {
        const Eigen::MatrixXd g = Eigen::MatrixXd::Identity(n, n);
        const auto chk = quadratic_on_cone_check(form_pairing(n, n - 1, g), d_plus_delta(n, g),
                                                 default_direction_count(n), 8);
        CHECK(chk.pass);
        CHECK(chk.max_abs_q < 1e-9);
        CHECK(chk.max_symbol_residual < 1e-9);
        CHECK(chk.nonempty_directions >= std::size_t(default_direction_count(n)));
    }
    // Lorentzian fiber metric
    const Eigen::Matrix3d g = Eigen::Vector3d(-1.0, 1.0, 1.0).asDiagonal();
    const auto chk = quadratic_on_cone_check(form_pairing(3, 2, g), d_plus_delta(3, g), 266, 8);
    CHECK(chk.pass);
}

TEST_CASE("positive forms fail and the zero form passes") {
    const auto T = d_plus_delta(2, Eigen::Matrix2d::Identity());
    const auto norm2 = quadratic_on_cone_check(QuadraticForm(Eigen::MatrixXd(Eigen::MatrixXd::Identity(4, 4))), T, 64, 8);
    CHECK_FALSE(norm2.pass);
    CHECK(norm2.max_abs_q == doctest::Approx(1.0).epsilon(1e-12));
    const auto zero = quadratic_on_cone_check(QuadraticForm(Eigen::MatrixXd(Eigen::MatrixXd::Zero(4, 4))), T, 64, 8);
    CHECK(zero.pass);
    CHECK(zero.max_abs_q == 0.0);
}

TEST_CASE("an injective symbol has an empty cone") {
    const auto T = stacked(ext_d_operator(2, 1), codiff_operator(2, 1, Eigen::MatrixXd(Eigen::MatrixXd::Identity(2, 2))));
    const auto samples = cone_sample(T, Eigen::VectorXd::Zero(2), 64);
    for (const auto& s : samples) CHECK(s.kernel.cols() == 0);
    const auto chk = quadratic_on_cone_check(QuadraticForm(Eigen::MatrixXd(Eigen::MatrixXd::Identity(2, 2))), T, 64, 4);
    CHECK(chk.nonempty_directions == 0);
    CHECK(chk.pass);
}

TEST_CASE("weak pairing examples") {
    const Grid grid = Grid::box({64}, {0.0}, {1.0}, {true});
    const auto u = sample(grid, [](const Eigen::VectorXd& x) {
        const double c = std::cos(2.0 * kPi * x[0]);
        return Eigen::VectorXd(Eigen::Vector2d(c, c));
    });
    const auto one = sample(grid, [](const Eigen::VectorXd&) { return 1.0; });
    const auto two = sample(grid, [](const Eigen::VectorXd&) { return 2.0; });
    const double h = grid.spacing[0];
    const double p1 = weak_pairing(u, product_form(), one);
    CHECK(std::abs(p1 - 0.5) < h * h);
    CHECK(weak_pairing(u, product_form(), two) == doctest::Approx(2.0 * p1).epsilon(1e-14));
    const auto zero = sample(grid, [](const Eigen::VectorXd&) { return Eigen::VectorXd(Eigen::VectorXd::Zero(2)); });
    CHECK(weak_pairing(zero, product_form(), one) == 0.0);

    const Grid open = Grid::box({16, 16}, {0.0, 0.0}, {1.0, 1.0});
    const auto v = sample(open, [](const Eigen::VectorXd&) { return Eigen::VectorXd(Eigen::Vector2d(1.0, 1.0)); });
    const auto flat = sample(open, [](const Eigen::VectorXd&) { return 1.0; });
    CHECK_THROWS_AS(weak_pairing(v, product_form(), flat), ConfigError);
    const auto bump = sample(open, [](const Eigen::VectorXd& x) { return x[0] * (1 - x[0]) * x[1] * (1 - x[1]); });
    CHECK(weak_pairing(v, product_form(), bump) == doctest::Approx(1.0 / 36.0).epsilon(1e-2));
}

TEST_CASE("div-curl family converges with the exact eps^2 pairing") {
    const auto rep = weak_limit_experiment(constrained_resonant_family(), div_curl_form());
    REQUIRE(rep.rows.size() == 7);
    for (const auto& r : rep.rows)
        CHECK(r.pairing == doctest::Approx(constrained_resonant_coefficient() * r.eps * r.eps).epsilon(1e-9));
    CHECK(constrained_resonant_coefficient() == -1.0 / 32.0);
    CHECK(rep.rate >= 0.9);
}

TEST_CASE("non-resonant family converges") {
    // int 144 x(1-x)^2 cos(w x) int y^2(1-y) cos(w y) with w = 2 pi / eps,
    // both factors -1/w^2 by two integrations by parts; <k, J l> = -1.
    const auto rep = weak_limit_experiment(nonresonant_family({1.0, 0.0}, {0.0, 1.0}, dyadic_schedule(3, 6)),
                                           div_curl_form());
    for (const auto& r : rep.rows) {
        const double w = 2.0 * kPi / r.eps;
        const double oracle = -144.0 / std::pow(w, 4);
        CHECK(std::abs(r.pairing - oracle) < 0.05 * std::abs(oracle));
    }
    CHECK(rep.rate >= 0.9);
}

TEST_CASE("unconstrained family keeps its gap") {
    const auto rep = weak_limit_experiment(unconstrained_family(), product_form());
    CHECK(std::abs(rep.final_gap - 0.5) < 0.02);
    CHECK(rep.final_gap >= 0.4);
    CHECK(rep.rate <= 0.0 + 1e-9);
}

TEST_CASE("cylinder family stays structural and its pairings approach the averaged profile") {
    const auto rep = cartan_family_experiment(1.0, dyadic_schedule(3, 7));
    CHECK(rep.limit_structural_l2 < rep.limit_tol);
    CHECK(rep.limit_pairing == doctest::Approx(1.0).epsilon(1e-12));
    for (const auto& r : rep.rows) CHECK(r.structural_l2 < r.tol);
    for (std::size_t i = 1; i < rep.rows.size(); ++i) CHECK(rep.rows[i].error < rep.rows[i - 1].error);
    CHECK(rep.rows.back().error < 1e-5);
    CHECK(rep.rate >= 0.9);
}
