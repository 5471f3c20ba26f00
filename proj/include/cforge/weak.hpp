#pragma once

#include "cforge/metric.hpp"
#include "cforge/symbols.hpp"

#include <functional>
#include <string>
#include <vector>

namespace cforge {

// int Q(u) psi dV_g with the grid quadrature. psi must vanish on open
// boundaries (checked) unless every axis is periodic. g may be null (flat).
double weak_pairing(const VectorField& u, const QuadraticForm& Q, const ScalarField& psi,
                    const MetricData* g = nullptr);

// Sequence u_eps evaluated pointwise, so large grids never materialize.
struct OscillatoryFamily {
    std::string name;
    std::string constraint;  // how the differential constraint is met
    std::vector<double> eps;
    std::function<Grid(double eps)> grid;
    std::function<Eigen::VectorXd(const Eigen::VectorXd& x, double eps)> member;
    std::function<double(const Eigen::VectorXd& x)> psi;
    double declared_limit = 0.0;  // int Q(u) psi for the weak limit u
};

struct WeakLimitRow {
    double eps = 0.0;
    double pairing = 0.0;
    double error = 0.0;
    std::size_t points = 0;
};

struct WeakLimitReport {
    std::string name;
    std::vector<WeakLimitRow> rows;
    double rate = 0.0;        // fitted log-log slope of error against eps
    double declared_limit = 0.0;
    double final_gap = 0.0;   // error at the smallest eps
};

// 2^{-lo} ... 2^{-hi}.
std::vector<double> dyadic_schedule(int lo = 3, int hi = 9);

WeakLimitReport weak_limit_experiment(const OscillatoryFamily& fam, const QuadraticForm& Q);

// V = grad(eps a sin(2 pi x/eps)/(2 pi)), Z = J grad(eps b sin(2 pi x/eps)/(2 pi))
// on the periodic unit square; u = (V, Z), limit 0, pairing exactly
// eps^2/(8 pi^2) int psi <grad a, J grad b>.
OscillatoryFamily constrained_resonant_family(const std::vector<double>& eps = dyadic_schedule());
double constrained_resonant_coefficient();  // pairing / eps^2

// V = k cos(2 pi k.x/eps) (a gradient), Z = l_perp cos(2 pi l.x/eps)
// (divergence free), k != l, polynomial test function vanishing on the
// edges of [0,1]^2.
OscillatoryFamily nonresonant_family(const Eigen::Vector2d& k, const Eigen::Vector2d& l,
                                     const std::vector<double>& eps = dyadic_schedule());

// u = v = cos(x/eps) on the periodic [0, 2 pi) with psi = 1/(2 pi): the
// pairing stays at 1/2 while the product of weak limits is 0.
OscillatoryFamily unconstrained_family(const std::vector<double>& eps = dyadic_schedule());

// <V, Z> for u = (V, Z) in R^2 + R^2, the div-curl pairing.
QuadraticForm div_curl_form();
// u -> u1 u2 on 2-vectors.
QuadraticForm product_form();

// Flat cylinders over kappa_eps = kbar + cos(s/eps).
struct CartanFamilyRow {
    double eps = 0.0;
    double structural_l2 = 0.0;
    double tol = 0.0;
    double pairing = 0.0;  // int psi kappa_eps
    double error = 0.0;    // against int psi kbar
};

struct CartanFamilyReport {
    std::vector<CartanFamilyRow> rows;
    double limit_structural_l2 = 0.0;
    double limit_tol = 0.0;
    double limit_pairing = 0.0;
    double rate = 0.0;
};

CartanFamilyReport cartan_family_experiment(double kbar, const std::vector<double>& eps, int nz = 16);

} // namespace cforge
