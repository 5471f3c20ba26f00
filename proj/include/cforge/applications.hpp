#pragma once

#include "cforge/cartan.hpp"
#include "cforge/symbols.hpp"
#include "cforge/weak.hpp"

#include <Eigen/Dense>

#include <string>
#include <vector>

namespace cforge {

// Spacelike slice of Minkowski space: Riemannian gamma and second
// fundamental form h (w.r.t. the timelike unit normal) on a chart.
struct SliceData {
    std::string name;
    MetricData gamma;
    MatrixField h;
};

struct ConstraintReport {
    ScalarField scal;
    ScalarField hamiltonian;  // scal + (tr h)^2 - |h|^2
    VectorField momentum;     // div(h - tr(h) gamma)_i
    Norms hamiltonian_norms;
    Norms momentum_norms;
};

// scal is the double contraction of the coordinate curvature of gamma
// (scal > 0 on round spheres). The divergence uses the Levi-Civita
// connection of gamma, i.e. the ambient flat derivative projected to the
// slice.
ConstraintReport einstein_constraints(const SliceData& s);

// Unit hyperboloid t = sqrt(1 + |x|^2) over [-0.5, 0.5]^3:
// gamma = I - x x^T/(1 + |x|^2), h = h_scale * gamma.
SliceData hyperbolic_slice(int N, double h_scale = 1.0);
// t = 0 over [0, 1]^3: gamma = I, h = 0.
SliceData flat_slice(int N);

// A^{mu nu}_{IJK} for I, J, K in 0..N-1, mu, nu in 0..3.
struct NullFormCoefficients {
    std::string name;
    int N = 1;
    std::vector<Eigen::Matrix4d> A;  // index (I N + J) N + K

    const Eigen::Matrix4d& operator()(int I, int J, int K) const { return A[(I * N + J) * N + K]; }
    Eigen::Matrix4d& operator()(int I, int J, int K) { return A[(I * N + J) * N + K]; }
    static NullFormCoefficients zero(int N, std::string name = "zero");
};

// Q_0 = -(d_t phi)^2 + |grad phi|^2 up to sign: A = diag(1, -1, -1, -1).
NullFormCoefficients q0_coefficients();
// (d_t phi)^2: A = e_0 e_0^T.
NullFormCoefficients dt_squared_coefficients();
NullFormCoefficients make_null_form(const std::string& name);
std::vector<std::string> null_form_names();

// Null covectors (1, omega) with omega on the unit sphere; the condition is
// even in xi so the past branch adds nothing.
std::vector<Eigen::Vector4d> null_covectors(int n_dirs, std::uint64_t seed = 1);

struct NullConditionReport {
    double max_violation = 0.0;
    std::vector<double> per_triple;  // same layout as A
    Eigen::Vector4d worst_xi = Eigen::Vector4d::Zero();
    bool pass = false;  // max_violation < 1e-12
};
NullConditionReport null_condition_check(const NullFormCoefficients& A, int n_dirs = 64, std::uint64_t seed = 1);

// Q_{F^I}(s) = sum A^{mu nu}_{IJK} s^J_nu s^K_mu on s in R^{4N}, index J*4 + mu.
QuadraticForm wave_quadratic_form(const NullFormCoefficients& A, int I);
// Symbol of T_I s = sum A^{mu nu}_{IJK} d_nu s^J_mu theta^K.
SymbolicOperator wave_operator(const NullFormCoefficients& A, int I);
// d_nu s^J_mu - d_mu s^J_nu for mu < nu: the gradient (curl-free) constraint.
SymbolicOperator gradient_constraint_operator(int N);

struct WaveConeReport {
    ConeCheck full;        // Q_{F^I} on the cone of T_I alone
    ConeCheck gradient;    // cone of T_I together with curl s = 0
    NullConditionReport necessary;  // Q_{F^I}(xi (x) id) = 0 for null xi
};
WaveConeReport wave_cone_check(const NullFormCoefficients& A, int n_dirs = 256, int n_pts = 8,
                               std::uint64_t seed = 1);

// phi_eps = eps a(t, x) P((t - x)/eps) with P(s) = sin(2 pi s)/(2 pi), a
// smooth amplitude, on (t, x) in [0, 1]^2. The fields do not depend on the
// two remaining space variables, so the spacetime test function is taken as
// psi(t, x) chi(y) chi(z) with int chi = 1 and only the (t, x) factor is
// integrated. Members are s = d phi in R^4 (N = 1); the weak limit is 0.
OscillatoryFamily null_wave_family(const std::vector<double>& eps = dyadic_schedule(3, 8));

struct WaveExperiment {
    WeakLimitReport report;
    NullConditionReport null_condition;
    double gap = 0.0;  // |pairing - declared limit| at the smallest eps
};
WaveExperiment wave_weak_continuity_experiment(const NullFormCoefficients& A, const OscillatoryFamily& fam);

} // namespace cforge
