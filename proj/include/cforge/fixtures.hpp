#pragma once

#include "cforge/realize.hpp"

#include <functional>
#include <string>
#include <vector>

namespace cforge {

// Analytic submanifold data sampled on a rectangular chart together with the
// immersion it came from (frame rows in exact.A: pushed tangent frame, then
// normals).
struct SubmanifoldFixture {
    std::string name;
    MetricData g;
    FundamentalData fund;
    FrameField frame;
    Immersion exact;
    std::vector<int> basepoint;
};

// z = 0 plane in R^3 over [0,1]^2.
SubmanifoldFixture plane_fixture(int N);

// Unit sphere, (theta, phi) in [pi/4, 3pi/4] x [0, pi/2], inward normal so
// h = g. ii_scale multiplies h (1.1 gives incompatible data).
SubmanifoldFixture sphere_fixture(int N, double ii_scale = 1.0);

// Unit de Sitter slice in R^{2,1} (coordinates t, x, y), (tau, phi) in
// [-0.5, 0.5] x [0, pi/2].
SubmanifoldFixture de_sitter_fixture(int N);

// Upper hyperboloid sheet in R^{2,1} (coordinates x, y, t), (r, phi) in
// [0.5, 1.5] x [0, pi/2]; timelike normal.
SubmanifoldFixture hyperbolic_fixture(int N);

// Curvature profile of a plane curve; alpha is its antiderivative with
// alpha(0) = 0 (the tangent angle).
struct CurveProfile {
    std::function<double(double)> kappa;
    std::function<double(double)> alpha;
};

// Cylinder over a unit speed plane curve, (s, z) in [0,1]^2: g = I,
// h = diag(kappa, 0).
SubmanifoldFixture flat_cylinder_fixture(int N, const CurveProfile& curve);
SubmanifoldFixture flat_cylinder_fixture(int Ns, int Nz, const CurveProfile& curve);
CurveProfile default_cylinder_profile();
// kappa = kbar + cos(s / eps).
CurveProfile oscillating_profile(double kbar, double eps);

// Clifford torus (cos u, sin u, cos v, sin v) in R^4 with the normal frame
// rotated by phi(u, v) = twist * sin(u) cos(v), so omega = d(phi) J.
SubmanifoldFixture clifford_torus_fixture(int N, double twist = 0.4);

// Graph (x, y, u(x,y), v(x,y)) in R^4 with a curved normal bundle; only the
// immersion is analytic, the rest comes from induced_data.
Immersion graph_surface_r4(int N);

// Names accepted by make_submanifold_fixture.
std::vector<std::string> submanifold_fixture_names();
SubmanifoldFixture make_submanifold_fixture(const std::string& name, int N);


} // namespace cforge
