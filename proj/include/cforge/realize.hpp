#pragma once

#include "cforge/cartan.hpp"

#include <Eigen/Dense>

#include <vector>

namespace cforge {

// Sampled map into semi-Euclidean space. signature is the diagonal of the
// target metric; A (optional) holds the ambient frame, rows = frame vectors.
struct Immersion {
    VectorField f;
    std::vector<int> signature;
    MatrixField A;

    const Grid& grid() const { return f.grid; }
    int ambient_dim() const { return int(signature.size()); }
};

Eigen::MatrixXd signature_matrix(const std::vector<int>& eps);

// ||A^T eps A - eps||_inf.
double group_defect(const Eigen::MatrixXd& A, const std::vector<int>& eps);

// Nearest element of O(p,q) via the Newton iteration X <- (X + eps X^{-T} eps)/2
// followed by polishing steps. Throws ProjectionFailed on stagnation.
Eigen::MatrixXd project_to_group(const Eigen::MatrixXd& A, const std::vector<int>& eps, double tol = 1e-14,
                                 int max_iter = 60);

struct PfaffOptions {
    bool project = true;         // re-project onto O(p,q) after every step; off means GL(n)
    bool check_compat = true;
    double compat_tol = 1e-2;    // L2 bound on dW - W^W
    bool path_defect = true;     // integrate again with reversed axis order
};

struct PfaffResult {
    MatrixField A;
    double path_defect = 0.0;  // max |A - A_reversed-order|
    double drift = 0.0;        // max ||A^T eps A - eps|| after projection
    double compat_l2 = 0.0;
};

// dA = W A along axis-ordered lattice paths from the basepoint, RK4 per edge
// with W linear along the edge.
PfaffResult solve_pfaff(const FormField& W, const std::vector<int>& eps, const Eigen::MatrixXd& A0,
                        const std::vector<int>& basepoint, const PfaffOptions& opt = {});
PfaffResult solve_pfaff(const ConnectionForm& W, const Eigen::MatrixXd& A0, const std::vector<int>& basepoint,
                        const PfaffOptions& opt = {});

struct PoincareResult {
    VectorField f;
    double path_defect = 0.0;
    double closedness_l2 = 0.0;
};

// df = Theta with Theta a row-vector valued 1-form; trapezoid per edge with
// the endpoint-derivative (Euler-Maclaurin) correction.
PoincareResult solve_poincare(const FormField& theta, const Eigen::VectorXd& f0, const std::vector<int>& basepoint,
                              double closed_tol = 1e-2, bool path_defect = true);

// Columns d_i f, and the Hessian with a symmetric mixed stencil.
MatrixField jacobian(const VectorField& f);
std::vector<std::vector<VectorField>> hessian(const VectorField& f);

// (Theta A)_l = sum_i coframe[l][i] A_i (row-vector valued 1-form).
FormField pull_coframe(const FormField& coframe, const MatrixField& A);

// f^* eps as a metric field (finite differences).
MatrixField induced_metric(const VectorField& f, const std::vector<int>& eps);

struct Realization {
    Immersion immersion;
    double isometry_defect = 0.0;    // sup |f^* eps - g|
    double min_singular = 0.0;       // smallest singular value of df
    double pfaff_path_defect = 0.0;
    double poincare_path_defect = 0.0;
    double structural_l2 = 0.0;
    double drift = 0.0;
};

struct RealizeOptions {
    double compat_tol = 1e-2;
    double closed_tol = 1e-2;
    double rank_tol = 1e-8;
    bool path_defect = true;
};

Realization realize_immersion(const MetricData& g, const FundamentalData& fund, const FrameField& frame,
                              const std::vector<int>& basepoint, const Eigen::VectorXd& f0, const Eigen::MatrixXd& A0,
                              const RealizeOptions& opt = {});

struct InducedData {
    MetricData g;
    FundamentalData fund;
    MatrixField normals;  // columns = normal frame vectors in ambient coords
};

// Extracts (g, II, normal connection) from a sampled immersion whose target
// signature is ordered eps_{n,nu} + eps_{k,tau}.
InducedData induced_data(const Immersion& f, double floor = 1e-8);

struct Motion {
    Eigen::MatrixXd B;
    Eigen::VectorXd b;
    double rms = 0.0;  // discrete L2 of |B f1 + b - f2|
    double sup = 0.0;
    int iterations = 0;
};

// Best semi-orthogonal motion mapping f1 onto f2 in the Euclidean norm.
Motion procrustes(const VectorField& f1, const VectorField& f2, const std::vector<int>& eps);

VectorField apply_motion(const Motion& m, const VectorField& f);

struct RoundtripReport {
    double aligned_sup = 0.0;
    double aligned_rms = 0.0;
    double isometry_defect = 0.0;
    double structural_l2 = 0.0;
    double gauss_l2 = 0.0;
    double codazzi_l2 = 0.0;
    double ricci_l2 = 0.0;
    double pfaff_path_defect = 0.0;
    Motion motion;
    Realization realization;
};

// induced_data -> realize_immersion -> procrustes against the input.
RoundtripReport roundtrip(const Immersion& f, const std::vector<int>& basepoint = {});

std::vector<int> center_index(const Grid& g);

} // namespace cforge
