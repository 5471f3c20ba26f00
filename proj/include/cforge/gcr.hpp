#pragma once

#include "cforge/cartan.hpp"

#include <vector>

namespace cforge {

// S_a = g^{-1} h_a, one (1,1) field per normal direction.
std::vector<MatrixField> shape_operator(const FundamentalData& fund, const MetricData& g);

// max over points of |g(S_a X, Y) - g(X, S_a Y)| over coordinate vectors.
double shape_self_adjoint_defect(const std::vector<MatrixField>& S, const MetricData& g);

// R_{abcd} - sum_a eps_a (h(a,c)h(b,d) - h(a,d)h(b,c)); omega is the
// curvature of the Levi-Civita connection from module cartan.
Norms gauss_residual(const FormField& omega, const FundamentalData& fund, const MetricData& g);

// Antisymmetrized normal covariant derivative of II in coordinates.
Norms codazzi_residual(const FundamentalData& fund, const ChristoffelField& gamma);

// eps_b Omega_perp(a,b) - <[S_a,S_b] ., .>; identically zero for k = 1.
Norms ricci_residual(const FundamentalData& fund, const MetricData& g);

// Pointwise Gauss residual tensor at one point (exposed for symmetry tests).
double gauss_residual_component(const FormField& omega, const FundamentalData& fund, const MetricData& g,
                                std::size_t p, int a, int b, int c, int d);

struct EquivalenceReport {
    Norms gauss, codazzi, ricci;
    Norms structural;
    double gcr_l2 = 0.0;         // max of the three L2 norms
    double structural_l2 = 0.0;
    double tol = 0.0;
    bool gcr_pass = false;
    bool structural_pass = false;
    bool consistent = false;     // both pass or both fail
    double skew_defect = 0.0;    // of the assembled W
};

EquivalenceReport gcr_cartan_equivalence(const FundamentalData& fund, const MetricData& g, const FrameField& frame,
                                         double tol);

} // namespace cforge
