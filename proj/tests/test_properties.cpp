// Randomized invariants that cut across modules. Every loop is seeded.
#include "doctest.h"

#include "cforge/applications.hpp"
#include "cforge/fixtures.hpp"
#include "cforge/io.hpp"
#include "cforge/lca.hpp"
#include "cforge/rigging.hpp"
#include "cforge/symbols.hpp"

#include <cmath>
#include <cstring>
#include <sstream>

using namespace cforge;

namespace {

GroupFunction random_function(const FiniteAbelianGroup& G, int dim, Rng& rng) {
    GroupFunction u(G.size(), Eigen::VectorXcd(dim));
    for (auto& v : u)
        for (int i = 0; i < dim; ++i) v[i] = cplx(rng.normal(), rng.normal());
    return u;
}

// Every factorization shape we care about, up to 2^16 elements.
std::vector<std::vector<int>> factorizations() {
    return {{65536}, {256, 256}, {16, 16, 16, 16}, std::vector<int>(16, 2), {4096, 16}, {3, 5, 7, 11},
            {2, 3, 4, 5, 6, 7}, {1000, 65}, {13, 17, 19}, {1}, {2}, {8, 3}, {243, 256}};
}

Eigen::MatrixXd random_matrix(Rng& rng, int r, int c) {
    Eigen::MatrixXd m(r, c);
    for (int i = 0; i < r * c; ++i) m.data()[i] = rng.normal();
    return m;
}

} // namespace

TEST_CASE("Plancherel and inversion on every factorization up to 2^16") {
    Rng rng(2024);
    for (const auto& orders : factorizations()) {
        const FiniteAbelianGroup G(orders);
        CAPTURE(G.label());
        REQUIRE(G.size() <= 65536);
        for (int dim : {1, 2}) {
            const GroupFunction u = random_function(G, dim, rng);
            const GroupFunction uh = fourier(G, u);
            const double a = norm_on_group(G, u), b = norm_on_dual(G, uh);
            CHECK(std::abs(a - b) < 1e-10 * std::max(1.0, a));
            const GroupFunction back = inverse_fourier(G, uh);
            double e = 0.0;
            for (std::size_t g = 0; g < G.size(); ++g) e = std::max(e, (back[g] - u[g]).cwiseAbs().maxCoeff());
            CHECK(e < 1e-10);
        }
    }
}

TEST_CASE("multipliers act diagonally on characters") {
    Rng rng(5);
    for (const auto& orders : std::vector<std::vector<int>>{{12}, {4, 6}, {2, 3, 5}}) {
        const FiniteAbelianGroup G(orders);
        const Multiplier m = make_multiplier(G, [&](const std::vector<int>& xi) {
            Eigen::MatrixXcd a(1, 1);
            double s = 0.0;
            for (int v : xi) s += v * v;
            a(0, 0) = cplx(std::cos(s), std::sin(0.3 * s));
            return a;
        });
        for (int trial = 0; trial < 4; ++trial) {
            const std::size_t xi = std::size_t(rng.uniform() * G.size());
            GroupFunction chi(G.size(), Eigen::VectorXcd(1));
            for (std::size_t g = 0; g < G.size(); ++g) {
                const double t = 2.0 * M_PI * G.pairing(xi, g);
                chi[g][0] = cplx(std::cos(t), std::sin(t));
            }
            const GroupFunction out = apply_multiplier(G, m, chi);
            double e = 0.0;
            for (std::size_t g = 0; g < G.size(); ++g) e = std::max(e, std::abs(out[g][0] - m[xi](0, 0) * chi[g][0]));
            CHECK(e < 1e-12);
        }
    }
}

TEST_CASE("connection forms stay semi-skew under random smooth frame rotations") {
    // Rotating the tangent frame by a smooth angle field changes W by a gauge
    // term; the result must still be in o(p, q).
    Rng rng(17);
    for (const char* name : {"sphere", "de-sitter", "hyperbolic", "flat-cylinder"}) {
        CAPTURE(name);
        auto fx = make_submanifold_fixture(name, 33);
        const double a = rng.normal(), b = rng.normal();
        const Grid& grid = fx.g.grid();
        MatrixField e(grid);
        for (std::size_t p = 0; p < grid.size(); ++p) {
            const double t = 0.3 * std::sin(a * grid.coord(p, 0) + b * grid.coord(p, 1));
            Eigen::Matrix2d R;
            if (fx.frame.signature[0] == fx.frame.signature[1]) {
                R << std::cos(t), -std::sin(t), std::sin(t), std::cos(t);
            } else {
                R << std::cosh(t), std::sinh(t), std::sinh(t), std::cosh(t);
            }
            e[p] = fx.frame.e[p] * R;
        }
        const FrameField rotated = FrameField::from_vectors(std::move(e), fx.frame.signature);
        CHECK(orthonormality_defect(rotated, fx.g) < 1e-12);
        const ConnectionForm W = connection_one_form(rotated, christoffel(fx.g), fx.fund);
        CHECK(semi_skew_defect(W) < 1e-12);
    }
}

TEST_CASE("christoffel symbols are exactly symmetric for random smooth metrics") {
    Rng rng(3);
    const Grid grid = Grid::box({9, 9, 9}, {0, 0, 0}, {1, 1, 1});
    for (int trial = 0; trial < 3; ++trial) {
        const Eigen::MatrixXd c = random_matrix(rng, 3, 3) * 0.1;
        MatrixField g(grid);
        for (std::size_t p = 0; p < grid.size(); ++p) {
            const Eigen::Vector3d x = grid.point(p);
            const Eigen::Matrix3d m = Eigen::Matrix3d::Identity() + std::sin(x.sum()) * c;
            g[p] = m * m.transpose();
        }
        const ChristoffelField G = christoffel(MetricData::from_field(std::move(g)));
        bool exact = true;
        for (std::size_t p = 0; p < grid.size(); ++p)
            for (int k = 0; k < 3; ++k)
                for (int i = 0; i < 3; ++i)
                    for (int j = 0; j < 3; ++j) exact = exact && G(p, k, i, j) == G(p, k, j, i);
        CHECK(exact);
    }
}

TEST_CASE("every emitted cone sample is in the symbol kernel") {
    Rng rng(99);
    for (int trial = 0; trial < 12; ++trial) {
        const int n = 2 + trial % 3, din = 3 + trial % 2, dout = 1 + trial % 2;
        std::vector<Eigen::MatrixXd> B(n);
        for (auto& b : B) b = random_matrix(rng, dout, din);
        const SymbolicOperator T = first_order_operator(B);
        const QuadraticForm Q(Eigen::MatrixXd(random_matrix(rng, din, din)));
        const ConeCheck c = quadratic_on_cone_check(Q, T, 64, 8, 1000 + trial);
        CHECK(c.samples > 0);
        CHECK(c.max_symbol_residual < 1e-9);
    }
}

TEST_CASE("quadratic forms: Hermitian storage and real values") {
    Rng rng(8);
    for (int trial = 0; trial < 20; ++trial) {
        const int d = 1 + trial % 5;
        Eigen::MatrixXcd m(d, d);
        for (int i = 0; i < d * d; ++i) m.data()[i] = cplx(rng.normal(), rng.normal());
        const QuadraticForm Q(m);
        CHECK(Q.q == Q.q.adjoint());
        Eigen::VectorXcd z(d);
        for (int i = 0; i < d; ++i) z[i] = cplx(rng.normal(), rng.normal());
        CHECK(std::abs(Q(z).imag()) < 1e-12 * (1.0 + std::abs(Q(z).real())));
    }
}

TEST_CASE("null condition violations scale with |c|") {
    Rng rng(31);
    for (int trial = 0; trial < 10; ++trial) {
        auto A = NullFormCoefficients::zero(2);
        for (auto& m : A.A) m = random_matrix(rng, 4, 4);
        const double c = (trial % 2 ? -1.0 : 1.0) * std::exp(3.0 * rng.normal());
        auto cA = A;
        for (auto& m : cA.A) m *= c;
        const auto a = null_condition_check(A, 32, 7), b = null_condition_check(cA, 32, 7);
        CHECK(b.max_violation == doctest::Approx(std::abs(c) * a.max_violation).epsilon(1e-13));
        for (std::size_t t = 0; t < a.per_triple.size(); ++t)
            CHECK(b.per_triple[t] == doctest::Approx(std::abs(c) * a.per_triple[t]).epsilon(1e-13));
    }
}

TEST_CASE("full cone verdict implies the necessary null condition") {
    Rng rng(12);
    std::vector<NullFormCoefficients> suite;
    for (const auto& n : null_form_names()) suite.push_back(make_null_form(n));
    for (int trial = 0; trial < 4; ++trial) {
        auto A = NullFormCoefficients::zero(1, "random");
        const Eigen::MatrixXd r = random_matrix(rng, 4, 4);
        A(0, 0, 0) = trial % 2 ? Eigen::Matrix4d(r - r.transpose()) : Eigen::Matrix4d(r);
        suite.push_back(A);
    }
    for (const auto& A : suite) {
        CAPTURE(A.name);
        const auto r = wave_cone_check(A, 64, 4, 3);
        if (r.full.pass) CHECK(r.necessary.pass);
    }
}

TEST_CASE("Hamiltonian constraint is invariant under every axis permutation") {
    Rng rng(21);
    const int N = 9;
    const Grid grid = Grid::box({N, N, N}, {0, 0, 0}, {1, 1, 1});
    // O(1) data, so the 1e-12 bound is an absolute roundoff budget.
    const Eigen::MatrixXd c = 0.1 * random_matrix(rng, 3, 3);
    const Eigen::MatrixXd d = 0.2 * random_matrix(rng, 3, 3);
    SliceData s;
    MatrixField g(grid);
    s.h = MatrixField(grid);
    for (std::size_t p = 0; p < grid.size(); ++p) {
        const Eigen::Vector3d x = grid.point(p);
        const Eigen::Matrix3d m = Eigen::Matrix3d::Identity() + (x[0] + 2.0 * x[1] * x[1] - x[2] * x[0]) * c;
        g[p] = m * m.transpose();
        const Eigen::Matrix3d hh = d * (1.0 + x[2] - x[1] * x[0]);
        s.h[p] = hh + hh.transpose();
    }
    s.gamma = MetricData::from_field(std::move(g));
    const auto base = einstein_constraints(s);
    double hmax = 0.0;
    for (double v : base.hamiltonian.data) hmax = std::max(hmax, std::abs(v));
    CHECK(hmax > 0.1);
    CHECK(hmax < 10.0);
    std::array<int, 3> perm = {0, 1, 2};
    while (std::next_permutation(perm.begin(), perm.end())) {
        Eigen::PermutationMatrix<3> P;
        P.indices() << perm[0], perm[1], perm[2];
        SliceData t;
        MatrixField gm(grid);
        t.h = MatrixField(grid);
        for (std::size_t p = 0; p < grid.size(); ++p) {
            const auto idx = grid.multi_index(p);
            std::vector<int> jdx(3);
            for (int a = 0; a < 3; ++a) jdx[perm[a]] = idx[a];
            const std::size_t q = grid.flat_index(jdx);
            gm[q] = P * s.gamma.g[p] * P.transpose();
            t.h[q] = P * s.h[p] * P.transpose();
        }
        t.gamma = MetricData::from_field(std::move(gm));
        const auto r = einstein_constraints(t);
        double e = 0.0;
        for (std::size_t p = 0; p < grid.size(); ++p) {
            const auto idx = grid.multi_index(p);
            std::vector<int> jdx(3);
            for (int a = 0; a < 3; ++a) jdx[perm[a]] = idx[a];
            e = std::max(e, std::abs(base.hamiltonian[p] - r.hamiltonian[grid.flat_index(jdx)]));
        }
        CHECK(e < 1e-12);
    }
}

TEST_CASE("random transverse riggings are normalized after decomposition and realization") {
    Rng rng(41);
    const auto fx = lightcone_fixture(33);
    const Grid& grid = fx.iota.grid;
    for (int trial = 0; trial < 3; ++trial) {
        const double a = 0.3 * rng.normal(), b = 0.3 * rng.normal(), c = 1.0 + 0.2 * rng.uniform();
        VectorField ell(grid);
        for (std::size_t p = 0; p < grid.size(); ++p) {
            const double r = grid.coord(p, 0), phi = grid.coord(p, 1);
            Eigen::Vector3d dr(1.0, std::cos(phi), std::sin(phi)), dphi(0.0, -r * std::sin(phi), r * std::cos(phi));
            ell[p] = c * fx.ell[p] + a * std::sin(phi) * dr + b * r * dphi;
        }
        const RiggedHypersurface h = rig_decompose(fx.iota, ell, fx.signature);
        CHECK(h.rigging_defect < 1e-12);
        CHECK(h.min_abs_det_g < 1e-8);
        const RiggedRoundtrip rt = rigged_roundtrip(fx.iota, ell, fx.signature);
        CHECK(rt.realization.rigging_defect < 1e-12);
        CHECK(rt.aligned_sup < 1e-2);
    }
    CHECK(rig_decompose(rigged_sphere_fixture(33).iota, rigged_sphere_fixture(33).ell, {1, 1, 1}).min_abs_det_g > 0.1);
}

TEST_CASE("field files roundtrip bit exactly on random grids") {
    Rng rng(77);
    for (int trial = 0; trial < 6; ++trial) {
        const int d = 1 + trial % 3;
        std::vector<int> dims;
        std::vector<double> lo, hi;
        std::vector<bool> per;
        for (int a = 0; a < d; ++a) {
            dims.push_back(3 + int(rng.uniform() * 4));
            lo.push_back(rng.normal());
            hi.push_back(lo.back() + 0.1 + rng.uniform());
            per.push_back(rng.uniform() < 0.3);
        }
        const Grid grid = Grid::box(dims, lo, hi, per);
        const int deg = trial % (d + 1);
        FormField w(grid, deg, 2, 2);
        for (double& v : w.data) v = rng.normal() * std::exp(10.0 * rng.normal());
        std::stringstream csv;
        const auto t = io::to_table(w);
        io::write_csv(csv, t);
        const FormField back = io::form_field(io::read_table(io::json::parse(io::header_json(t).dump()), csv));
        CHECK(back.grid == grid);
        CHECK(std::memcmp(back.data.data(), w.data.data(), w.data.size() * sizeof(double)) == 0);
    }
}
