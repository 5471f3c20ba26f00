#pragma once

#include "cforge/util.hpp"

#include <Eigen/Dense>

#include <complex>
#include <functional>
#include <string>
#include <vector>

namespace cforge {

using cplx = std::complex<double>;

enum class OperatorKind { ExtD, Codiff, CustomFirstOrder, DirectSum, Stacked };

// Principal symbol of a constant-order differential operator between trivial
// bundles. symbol(x, xi) is the dim_out x dim_in complex matrix sigma_m(T)(x, xi).
struct SymbolicOperator {
    OperatorKind kind = OperatorKind::CustomFirstOrder;
    int order = 1;
    int n = 0;  // cotangent dimension
    int dim_in = 0;
    int dim_out = 0;
    std::function<Eigen::MatrixXcd(const Eigen::VectorXd& x, const Eigen::VectorXd& xi)> symbol;

    Eigen::MatrixXcd operator()(const Eigen::VectorXd& xi) const { return symbol(Eigen::VectorXd::Zero(n), xi); }
    Eigen::MatrixXcd at(const Eigen::VectorXd& x, const Eigen::VectorXd& xi) const { return symbol(x, xi); }
};

using MetricFn = std::function<Eigen::MatrixXd(const Eigen::VectorXd& x)>;

// xi ^ on degree-k forms, in the form_basis(n, k) -> form_basis(n, k+1) bases.
Eigen::MatrixXd wedge_matrix(const Eigen::VectorXd& xi, int k);
// Interior product with a vector on degree-k forms.
Eigen::MatrixXd interior_matrix(const Eigen::VectorXd& v, int k);

// [sigma_1(d)(xi)](w) = -2 pi i xi ^ w.
Eigen::VectorXcd symbol_d(const Eigen::VectorXd& xi, const Eigen::VectorXcd& w, int degree);
// [sigma_1(delta)(xi)](l) = 2 pi i iota_{xi#} l, xi raised with g.
Eigen::VectorXcd symbol_delta(const Eigen::VectorXd& xi, const Eigen::VectorXcd& l, int degree,
                              const Eigen::MatrixXd& g);

SymbolicOperator ext_d_operator(int n, int degree);
SymbolicOperator codiff_operator(int n, int degree, const Eigen::MatrixXd& g);
SymbolicOperator codiff_operator(int n, int degree, MetricFn g);
// sigma = 2 pi i sum_l xi_l B_l.
SymbolicOperator first_order_operator(const std::vector<Eigen::MatrixXd>& B);
// Block diagonal: (u, v) -> (T u, S v).
SymbolicOperator direct_sum(const SymbolicOperator& a, const SymbolicOperator& b);
// Same input, outputs concatenated: u -> (T u, S u).
SymbolicOperator stacked(const SymbolicOperator& a, const SymbolicOperator& b);

// Q(z) = sum_jk q_jk z_j conj(z_k) with q Hermitian.
struct QuadraticForm {
    Eigen::MatrixXcd q;

    QuadraticForm() = default;
    // Stores the Hermitian part (q + q^H)/2.
    explicit QuadraticForm(const Eigen::MatrixXcd& m);
    explicit QuadraticForm(const Eigen::MatrixXd& m) : QuadraticForm(Eigen::MatrixXcd(m.cast<cplx>())) {}

    int dim() const { return int(q.rows()); }
    cplx operator()(const Eigen::VectorXcd& z) const;
    double real(const Eigen::VectorXcd& z) const { return operator()(z).real(); }
    double real(const Eigen::VectorXd& z) const;
};

// <mu, lambda>_g on Lambda^k + Lambda^k, symmetrized.
QuadraticForm form_pairing(int n, int k, const Eigen::MatrixXd& g);

struct ConeSample {
    Eigen::VectorXd xi;
    Eigen::MatrixXcd kernel;  // orthonormal columns spanning ker sigma(xi)
};

// Unit covectors: circle in 2D, Fibonacci sphere in 3D, Gaussian draws
// otherwise (axes always included in 2D/3D and above).
std::vector<Eigen::VectorXd> sample_directions(int n, int n_dirs, std::uint64_t seed = 1);
int default_direction_count(int n);

std::vector<ConeSample> cone_sample(const SymbolicOperator& T, const Eigen::VectorXd& x, int n_dirs,
                                    double cutoff = 1e-10, std::uint64_t seed = 1);

struct ConeCheck {
    double max_abs_q = 0.0;
    double max_symbol_residual = 0.0;  // max |sigma(xi) s| over emitted samples
    std::size_t samples = 0;
    std::size_t nonempty_directions = 0;
    double tol = 1e-9;
    bool pass = false;
};

// Evaluates Q on every kernel basis vector and on n_pts random unit
// combinations inside each kernel.
ConeCheck quadratic_on_cone_check(const QuadraticForm& Q, const SymbolicOperator& T, int n_dirs, int n_pts,
                                  std::uint64_t seed = 1, double tol = 1e-9);

} // namespace cforge
