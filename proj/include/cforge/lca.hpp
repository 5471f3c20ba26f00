#pragma once

#include "cforge/symbols.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace cforge {

// Z_{N_1} x ... x Z_{N_d}. Haar measure: counting / |G| on G, counting on the
// dual, so the transform below is unitary. Flat indices put the last factor
// fastest; the dual is indexed the same way.
struct FiniteAbelianGroup {
    std::vector<int> orders;

    FiniteAbelianGroup() = default;
    explicit FiniteAbelianGroup(std::vector<int> orders);

    int rank() const { return int(orders.size()); }
    std::size_t size() const;
    std::vector<int> multi_index(std::size_t flat) const;
    std::size_t flat(const std::vector<int>& idx) const;  // entries reduced mod N_i
    // Representative of each coordinate in (-N_i/2, N_i/2].
    std::vector<int> signed_index(std::size_t flat) const;
    // xi(g) = sum_i xi_i g_i / N_i mod 1.
    double pairing(std::size_t xi, std::size_t g) const;
    std::string label() const;  // e.g. "Z8xZ3"
};

// Fiber-valued function on G (or on the dual): one J-vector per element.
using GroupFunction = std::vector<Eigen::VectorXcd>;

// u^(xi) = (1/|G|) sum_g u(g) exp(-2 pi i xi(g)).
GroupFunction fourier(const FiniteAbelianGroup& G, const GroupFunction& u);
GroupFunction inverse_fourier(const FiniteAbelianGroup& G, const GroupFunction& uhat);

double norm_on_group(const FiniteAbelianGroup& G, const GroupFunction& u);     // L^2(mu_G)
double norm_on_dual(const FiniteAbelianGroup& G, const GroupFunction& uhat);   // l^2 counting

// m(xi) as a lookup table over the dual.
struct Multiplier {
    int dim_in = 0;
    int dim_out = 0;
    std::vector<Eigen::MatrixXcd> table;

    const Eigen::MatrixXcd& operator[](std::size_t xi) const { return table[xi]; }
};

Multiplier make_multiplier(const FiniteAbelianGroup& G,
                           const std::function<Eigen::MatrixXcd(const std::vector<int>& xi)>& m);
GroupFunction apply_multiplier(const FiniteAbelianGroup& G, const Multiplier& m, const GroupFunction& u);

// Kernel of m(xi) for every xi != 0 (SVD cutoff relative 1e-10).
struct LcaConeCheck {
    double max_abs_q = 0.0;
    std::size_t kernel_directions = 0;  // dual elements with a nontrivial kernel
    std::size_t samples = 0;
    bool pass = false;
};
LcaConeCheck lca_cone_precheck(const FiniteAbelianGroup& G, const Multiplier& m, const QuadraticForm& Q,
                               int n_pts = 8, std::uint64_t seed = 1, double tol = 1e-9);

// Xi (a finite set containing 0) and the map Phi from the rest of the dual
// onto the compact set K. The cone inequality is sampled at m(Phi(xi)).
struct Retraction {
    std::vector<std::size_t> low;     // flat indices of Xi
    std::vector<long> target;         // per dual element: Phi(xi), or -1 on Xi
};
// Xi = {xi : |signed xi_i| <= radius for all i}, Phi = identity.
Retraction box_retraction(const FiniteAbelianGroup& G, int radius);

// Smallest C with Re Q(l) >= -delta |l|^2 - C |m(eta) l|^2 over the sampled
// unit l and every eta in K. Infinite when some sample has m(eta) l = 0 and
// a positive deficit.
double sampled_cone_constant(const FiniteAbelianGroup& G, const Multiplier& m, const QuadraticForm& Q,
                             const Retraction& phi, double delta, int n_lambda = 4096, std::uint64_t seed = 1);

struct LcaFamily {
    std::string name;
    std::vector<double> labels;        // e.g. the frequency of each member
    std::vector<GroupFunction> members;
    double declared_limit = 0.0;       // int Q(u) dmu_G for the weak limit u
};

struct LcaRow {
    double label = 0.0;
    double low_mass = 0.0;  // sum over Xi of |u^|^2
    double pairing = 0.0;   // int Re Q(u) dmu_G
    double error = 0.0;
};

struct LcaReport {
    std::string group;
    LcaConeCheck precheck;
    double plancherel_defect = 0.0;  // max over members of | |u| - |u^| |
    std::vector<std::pair<double, double>> constants;  // (delta, fitted C)
    std::vector<LcaRow> rows;
    double declared_limit = 0.0;
    double final_error = 0.0;
};

// Throws ConePrecheckFailed when Q does not vanish on the kernels of m.
LcaReport lca_quadratic_experiment(const FiniteAbelianGroup& G, const Multiplier& m, const QuadraticForm& Q,
                                   const LcaFamily& fam, const Retraction& phi,
                                   const std::vector<double>& deltas = {1e-1, 1e-2}, int n_lambda = 4096,
                                   std::uint64_t seed = 1);

struct LcaFixture {
    std::string name;
    FiniteAbelianGroup group;
    Multiplier multiplier;
    QuadraticForm Q;
    LcaFamily family;
    Retraction retraction;
};

// Z_256, m(xi) = diag(e(2 xi/256) - 1, e(xi/256) - 1) with e(t) = exp(2 pi i t),
// Q(l) = Re(l_1 conj l_2), members G(g)(e(xi_j g/256), e(2 xi_j g/256)) with a
// Gaussian envelope of width 16 and xi_j = 2^j, j = 1..6. Xi = {-2..2}.
LcaFixture z256_fixture();
// Z_8 x Z_3 with m(xi) = diag(e(xi_1/8) - 1, e(xi_2/3) - 1) and pure characters.
LcaFixture z8xz3_fixture();
LcaFixture make_lca_fixture(const std::string& name);
std::vector<std::string> lca_fixture_names();

} // namespace cforge
