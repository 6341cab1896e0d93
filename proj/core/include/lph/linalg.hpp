#ifndef LPH_LINALG_HPP
#define LPH_LINALG_HPP

#include <Eigen/Dense>

#include "lph/errors.hpp"

namespace lph {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Numerical tolerances used throughout the library.  They are fixed here by
// name so that tests and run manifests can refer to them.
namespace tol {
inline constexpr double mat_exp_rel = 1e-12;      // componentwise target for mat_exp
inline constexpr double solve_residual = 1e-10;   // ||AX-B|| <= solve_residual*||B||
inline constexpr double condition_limit = 1e12;   // pivot-ratio bound before a solve is declared singular
inline constexpr double symmetry_abs = 1e-10;     // max |A - A^T| accepted by sym_eigen
inline constexpr double eigen_gram = 1e-10;       // orthonormality residual of eigenvectors
inline constexpr double eigen_residual = 1e-9;    // ||A v - lambda v|| residual
inline constexpr double stochastic_slack = 1e-12; // sum(alpha) <= 1 + stochastic_slack
inline constexpr double row_sum_slack = 1e-12;    // subgenerator row sums <= row_sum_slack
inline constexpr double entry_slack = 1e-12;      // negative entries above -entry_slack are clamped to zero
inline constexpr double slope_match = 1e-12;      // slopes equal within slope_match when summing
inline constexpr double zero_weight = 1e-14;      // |f_j(t)| below this drops the component
inline constexpr double density_floor = 1e-300;   // densities floored before taking logs
} // namespace tol

/// e^{A*scale} by scaling-and-squaring with a Pade approximant of degree
/// up to 13.  A must be square with finite entries.
Matrix mat_exp(const Matrix& a, double scale = 1.0);

/// Kronecker product: block (i,j) of the result is a(i,j)*b.
Matrix kron(const Matrix& a, const Matrix& b);

/// Solves A X = B by LU with partial pivoting.  Throws singular_error when
/// the pivot ratio exceeds tol::condition_limit.
Matrix solve(const Matrix& a, const Matrix& b);
Vector solve(const Matrix& a, const Vector& b);

/// A^{-1} through the same pivot-checked factorization as solve().
Matrix inverse(const Matrix& a);

struct SymEigen {
    Vector values;   // descending
    Matrix vectors;  // orthonormal columns, matching order
};

/// Eigendecomposition of a symmetric matrix.  Asymmetric input (beyond
/// tol::symmetry_abs, relative to the largest entry) throws symmetry_error.
/// Each eigenvector's largest-magnitude entry is made positive so the
/// decomposition is deterministic.
SymEigen sym_eigen(const Matrix& a);

} // namespace lph

#endif
