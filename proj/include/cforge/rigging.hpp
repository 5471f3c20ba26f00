#pragma once

#include "cforge/realize.hpp"

#include <Eigen/Dense>

#include <string>
#include <vector>

namespace cforge {

// Hypersurface iota: U in R^n -> R^{n+1} with a transverse rigging ell. The
// splitting R^{n+1} = d iota(TU) + span(ell) gives the dual coframe theta^c
// and the normal 1-form nform (nform(ell) = 1, nform o d iota = 0). With flat
// ambient derivatives
//   d_a d_b iota = Gamma^c_ab d_c iota - K_ab ell
//   d_a ell      = Psi^c_a d_c iota + psi_a ell
// so K = grad nform, Psi = grad ell restricted to the tangent part, psi the
// ell part. None of this needs the ambient metric; signature only feeds the
// induced g, which may degenerate.
struct RiggedHypersurface {
    VectorField iota;
    VectorField ell;
    VectorField nform;
    std::vector<int> signature;
    MatrixField g;
    MatrixField K;        // K(d_a, d_b)
    MatrixField Psi;      // Psi[p](c, a) = theta^c(d_a ell)
    VectorField psi;      // psi_a = nform(d_a ell)
    ChristoffelField gamma;  // rigged connection theta^c(d_a d_b iota)
    double rigging_defect = 0.0;   // max |nform(ell) - 1|
    double tangency_defect = 0.0;  // max |nform(d_a iota)|
    double k_symmetry_defect = 0.0;
    double min_abs_det_g = 0.0;

    int n() const { return iota.grid.ndim(); }
    const Grid& grid() const { return iota.grid; }
};

// Throws NotTransverse where [d iota | ell] is (numerically) singular.
RiggedHypersurface rig_decompose(const VectorField& iota, const VectorField& ell, const std::vector<int>& signature,
                                 double transverse_tol = 1e-10);

// Gauss and the three Codazzi equations in coordinate frames, tested against
// the coframe theta^c (which annihilates ell).
struct HypersurfaceResiduals {
    Norms gauss;
    Norms codazzi_k;    // involves d K
    Norms codazzi_Psi;  // involves d Psi
    Norms codazzi_psi;  // involves d psi
    double max_l2() const;
};

HypersurfaceResiduals hypersurface_residuals(const RiggedHypersurface& h, const ChristoffelField& gamma);

// W_Sigma in the row convention dA = W A with A rows (d_1 iota, .., d_n iota, ell):
// W_a(b, c) = Gamma^c_ab, W_a(b, n) = -K_ab, W_a(n, c) = Psi^c_a, W_a(n, n) = psi_a.
FormField sigma_connection_form(const RiggedHypersurface& h, const ChristoffelField& gamma);

// dW - W^W split into the blocks matching the four equations above.
struct SigmaReport {
    Norms total;
    HypersurfaceResiduals blocks;
};
SigmaReport sigma_structural_residual(const RiggedHypersurface& h, const ChristoffelField& gamma);

struct HypersurfaceEquivalence {
    HypersurfaceResiduals residuals;
    SigmaReport sigma;
    double tol = 0.0;
    bool gc_pass = false;
    bool sigma_pass = false;
    bool consistent() const { return gc_pass == sigma_pass; }
};
HypersurfaceEquivalence hypersurface_equivalence(const RiggedHypersurface& h, const ChristoffelField& gamma,
                                                 double tol);

struct HypersurfaceRealization {
    VectorField iota;
    VectorField ell;
    double pfaff_path_defect = 0.0;
    double poincare_path_defect = 0.0;
    // sup differences after decomposing the output again, three points away
    // from open edges (nested one sided stencils at corners are first order)
    double K_error = 0.0;
    double Psi_error = 0.0;
    double psi_error = 0.0;
    double rigging_defect = 0.0;
};

// Integrates dA = W_Sigma A from A0 (rows d_a iota, ell at the basepoint),
// then d iota = sum_a dx^a A_a. K, Psi, psi are read from h.
HypersurfaceRealization realize_hypersurface(const RiggedHypersurface& h, const ChristoffelField& gamma,
                                             const std::vector<int>& basepoint, const Eigen::VectorXd& iota0,
                                             const Eigen::MatrixXd& A0, double compat_tol = 1e-2);

struct RiggedRoundtrip {
    double raw_sup = 0.0;      // max |iota_out - iota_in|, same initial data
    double aligned_sup = 0.0;  // after the best motion of the ambient group
    double ell_sup = 0.0;
    HypersurfaceEquivalence equivalence;
    HypersurfaceRealization realization;
};

// decompose -> realize from the basepoint data of the input -> compare.
RiggedRoundtrip rigged_roundtrip(const VectorField& iota, const VectorField& ell, const std::vector<int>& signature,
                                 const std::vector<int>& basepoint = {});

struct RiggedFixture {
    std::string name;
    VectorField iota;
    VectorField ell;
    std::vector<int> signature;
};

// t = |x| in R^{2,1}: iota = (r, r cos phi, r sin phi), r in [0.5, 1.5],
// phi in [0, pi/2], ell = (1, -cos phi, -sin phi)/2 (null, nform(ell) = 1).
RiggedFixture lightcone_fixture(int N);
// t = 0 in R^{2,1} with ell = d_t.
RiggedFixture hyperplane_fixture(int N);
// Unit sphere in R^3 on the sphere-fixture chart, ell = outward normal.
RiggedFixture rigged_sphere_fixture(int N);
RiggedFixture make_rigged_fixture(const std::string& name, int N);
std::vector<std::string> rigged_fixture_names();

} // namespace cforge
