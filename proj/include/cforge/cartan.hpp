#pragma once

#include "cforge/forms.hpp"
#include "cforge/metric.hpp"
#include "cforge/util.hpp"

#include <Eigen/Dense>

#include <vector>

namespace cforge {

// Gamma^k_{ij} in coordinates, stored as data[(p*n + k)*n*n + i*n + j].
struct ChristoffelField {
    Grid grid;
    int n = 0;
    std::vector<double> data;
    // Residual of d_l g_ij - Gamma^m_{li} g_mj - Gamma^m_{lj} g_im.
    Norms compatibility;

    ChristoffelField() = default;
    ChristoffelField(const Grid& g, int n) : grid(g), n(n), data(g.size() * n * n * n, 0.0) {}
    double& operator()(std::size_t p, int k, int i, int j) { return data[((p * n + k) * n + i) * n + j]; }
    double operator()(std::size_t p, int k, int i, int j) const { return data[((p * n + k) * n + i) * n + j]; }
};

ChristoffelField christoffel(const MetricData& g);

// Second fundamental form and normal connection of a codimension-k
// submanifold, in coordinates on the chart.
//   h[a]     : covariant normal component h_a(X,Y) = <II(X,Y), nu_a>
//   omega[l] : bundle connection, omega[l](a,b) = omega^a_b(d_l)
// II = sum_a eps_a h_a nu_a.
struct FundamentalData {
    int n = 0;
    int k = 0;
    std::vector<MatrixField> h;
    std::vector<MatrixField> omega;
    std::vector<int> normal_signature;

    const Grid& grid() const { return h.at(0).grid; }
    static FundamentalData zero(const Grid& grid, int n, const std::vector<int>& normal_signature);
};

// Connection 1-form: value on d_l is an (n+k) square matrix with rows
// indexed by the frame (tangent block first, then normals) so that
// d_l A = W_l A when the rows of A are the frame vectors in ambient space.
struct ConnectionForm {
    FormField W;
    int n = 0;
    int k = 0;
    std::vector<int> signature;  // eps_{n,nu} + eps_{k,tau}
    double skew_defect_in = 0.0; // before projection onto o(p,q)

    Eigen::Map<const Eigen::MatrixXd> at(std::size_t p, int l) const { return W.dir(p, l); }
    Eigen::Map<Eigen::MatrixXd> at(std::size_t p, int l) { return W.dir(p, l); }
};

// Projects onto {X : eps X^T + X eps = 0}; exact in floating point.
Eigen::MatrixXd project_semi_skew(const Eigen::MatrixXd& w, const std::vector<int>& eps);
double semi_skew_defect(const Eigen::MatrixXd& w, const std::vector<int>& eps);
double semi_skew_defect(const ConnectionForm& w);

ConnectionForm connection_one_form(const FrameField& frame, const ChristoffelField& gamma, const FundamentalData& fund,
                                   double skew_tol = 0.1);

// Coordinate connection matrix of Gamma: W_l(i,j) = Gamma^j_{li}.
FormField christoffel_form(const ChristoffelField& gamma);

// dW - W^W. Value (a,b)(i,m) is the m-th component of R(d_a,d_b) e_i.
FormField curvature(const FormField& w);
FormField curvature(const ChristoffelField& gamma);

// R_{abcd} = <R(d_a,d_b) d_d, d_c>, antisymmetrized in (c,d).
double riemann_lower(const FormField& omega, const Eigen::MatrixXd& g, std::size_t p, int a, int b, int c, int d);

// Gaussian curvature of a 2D chart, R_{0101}/det g.
ScalarField sectional_curvature_2d(const ChristoffelField& gamma, const MetricData& g);

struct StructuralReport {
    FormField residual;
    Norms norms;
    Norms tangential;
    Norms mixed;
    Norms normal;
};

StructuralReport second_structural_residual(const ConnectionForm& w);

// Row-vector valued 1-form (theta^1..theta^n, 0..0) on coordinate directions.
FormField coframe_form(const FrameField& frame, int total);

struct FirstStructuralReport {
    Norms tangential;
    Norms normal;
};

// dtheta - theta ^ W.
FirstStructuralReport first_structural_residual(const FormField& theta, const ConnectionForm& w);

} // namespace cforge
