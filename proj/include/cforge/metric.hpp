#pragma once

#include "cforge/grid.hpp"

#include <Eigen/Dense>

#include <vector>

namespace cforge {

// Metric components on a chart plus the declared signature. signature holds
// the -1 entries first, index is their count.
struct MetricData {
    MatrixField g;
    std::vector<int> signature;
    int index = 0;
    double floor = 1e-8;

    int dim() const { return g.data.empty() ? 0 : static_cast<int>(g.data[0].rows()); }
    const Grid& grid() const { return g.grid; }

    // Declares the signature from the eigenvalues at the first grid point.
    static MetricData from_field(MatrixField g, double floor = 1e-8);
    static MetricData constant(const Grid& grid, const Eigen::MatrixXd& g, double floor = 1e-8);
};

struct MetricDiagnostics {
    double min_abs_det = 0.0;
    double max_symmetry_defect = 0.0;
    std::vector<int> pointwise_index;
};

// Throws DegenerateMetric or IndexMismatch.
MetricDiagnostics validate_metric(const MetricData& g);

std::vector<int> sorted_signature(int n, int index);

// Orthonormal frame: columns of e are the frame vectors in coordinates,
// theta = e^{-1} holds the co-frame as rows. signature[i] = <e_i, e_i>.
struct FrameField {
    MatrixField e;
    MatrixField theta;
    std::vector<int> signature;

    static FrameField from_vectors(MatrixField e, std::vector<int> signature);
};

FrameField identity_frame(const Grid& grid, int n);

// Signature-aware Gram-Schmidt of the seed columns, timelike vectors emitted
// first. Throws NullVectorEncountered when an intermediate vector is null.
FrameField gram_schmidt(const MetricData& g, const FrameField& seed, double null_tol = 1e-10);

// Max over points of |<e_i,e_j>_g - eps_i delta_ij|.
double orthonormality_defect(const FrameField& f, const MetricData& g);

// Tensor field of valence (up, down) in dimension n. Components are stored
// with the upper indices first, each index running slowest-to-fastest.
struct TensorField {
    Grid grid;
    int n = 0;
    int up = 0;
    int down = 0;
    std::vector<double> comps;

    TensorField() = default;
    TensorField(const Grid& g, int n, int up, int down);
    int ncomp() const;
    double& at(std::size_t p, int c) { return comps[p * ncomp() + c]; }
    double at(std::size_t p, int c) const { return comps[p * ncomp() + c]; }
};

ScalarField tensor_inner(const TensorField& t, const TensorField& s, const MetricData& g);
// |T|_g = sqrt(|<T,T>_g|).
ScalarField tensor_norm(const TensorField& t, const MetricData& g);

ScalarField volume_form(const MetricData& g);

struct ChristoffelField;

// Covariant derivative; the new lower index is appended last.
TensorField covariant_derivative(const TensorField& t, const ChristoffelField& gamma);

// W^{k,p} norm: sum over m <= k of (int |nabla^m u|_g^p dV_g)^{1/p}; p = inf
// (pass std::numeric_limits<double>::infinity()) uses the max.
double sobolev_norm(const TensorField& u, const MetricData& g, int k, double p);

} // namespace cforge
