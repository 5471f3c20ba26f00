#pragma once

#include "cforge/grid.hpp"
#include "cforge/util.hpp"

#include <Eigen/Dense>

#include <vector>

namespace cforge {

struct MetricData;

// Increasing multi-indices of length k from {0..n-1}, in lexicographic order.
struct FormBasis {
    int n = 0;
    int k = 0;
    std::vector<std::vector<int>> combos;
    int size() const { return static_cast<int>(combos.size()); }
    // Position of a strictly increasing index list, or -1.
    int find(const std::vector<int>& sorted) const;
};

const FormBasis& form_basis(int n, int k);

// Sign of the permutation sorting `idx` (0 if an index repeats).
int permutation_sign(std::vector<int> idx);

// Differential k-form on a grid with scalar or matrix values. Only coefficients
// over increasing multi-indices are stored, so antisymmetry is exact by
// construction. Each coefficient is a rows x cols block (column major).
struct FormField {
    Grid grid;
    int n = 0;
    int degree = 0;
    int rows = 1;
    int cols = 1;
    std::vector<double> data;

    FormField() = default;
    FormField(const Grid& g, int degree, int rows = 1, int cols = 1);

    int nbasis() const { return form_basis(n, degree).size(); }
    std::size_t block() const { return std::size_t(nbasis()) * rows * cols; }
    bool scalar() const { return rows == 1 && cols == 1; }

    Eigen::Map<Eigen::MatrixXd> value(std::size_t p, int b) {
        return {data.data() + (p * nbasis() + b) * rows * cols, rows, cols};
    }
    Eigen::Map<const Eigen::MatrixXd> value(std::size_t p, int b) const {
        return {data.data() + (p * nbasis() + b) * rows * cols, rows, cols};
    }
    double& coeff(std::size_t p, int b) { return data[p * nbasis() + b]; }
    double coeff(std::size_t p, int b) const { return data[p * nbasis() + b]; }

    // Coefficient for an arbitrary ordered index tuple, with the
    // antisymmetry sign applied (zero for repeated indices).
    Eigen::MatrixXd component(std::size_t p, const std::vector<int>& idx) const;

    // 1-form helper: value on the coordinate direction l.
    Eigen::Map<Eigen::MatrixXd> dir(std::size_t p, int l) { return value(p, l); }
    Eigen::Map<const Eigen::MatrixXd> dir(std::size_t p, int l) const { return value(p, l); }
};

FormField ext_d(const FormField& w);
FormField wedge(const FormField& a, const FormField& b);
FormField operator+(const FormField& a, const FormField& b);
FormField operator-(const FormField& a, const FormField& b);
FormField operator*(double s, const FormField& a);

// Signature-aware Hodge star, defined by a ^ *b = <a,b> dV_g with the
// coordinate orientation. Acts on the form factor only.
FormField hodge_star(const FormField& w, const MetricData& g);
// Inverse of hodge_star on degree-j forms: (-1)^{j(n-j)+nu} *.
FormField hodge_star_inverse(const FormField& w, const MetricData& g);
// Formal adjoint of d: (-1)^j *^{-1} d * on j-forms.
FormField codifferential(const FormField& w, const MetricData& g);

// Pointwise <a,b>_g for scalar forms of equal degree (Gram determinant of g^{-1}).
ScalarField form_inner(const FormField& a, const FormField& b, const MetricData& g);

// Gram matrix <dx^I, dx^J> for degree-k basis forms at one point.
Eigen::MatrixXd form_gram(const Eigen::MatrixXd& ginv, int k);

// Pointwise norms over all coefficients of a form (used for residuals).
Norms form_norms(const FormField& w);

} // namespace cforge
