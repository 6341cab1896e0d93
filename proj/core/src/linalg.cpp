#include "lph/linalg.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>

namespace lph {

namespace {

void require_square(const Matrix& a, const char* who) {
    if (a.rows() != a.cols())
        throw dimension_error(std::string(who) + ": matrix must be square, got " +
                              std::to_string(a.rows()) + "x" + std::to_string(a.cols()));
}

void require_finite(const Matrix& a, const char* who) {
    if (!a.allFinite())
        throw numeric_error(std::string(who) + ": input has non-finite entries");
}

// Shared pivot-checked LU.  Throws when the factorization is singular to
// tolerance (pivot ratio beyond tol::condition_limit).
Eigen::PartialPivLU<Matrix> checked_lu(const Matrix& a, const char* who) {
    require_square(a, who);
    require_finite(a, who);
    Eigen::PartialPivLU<Matrix> lu(a);
    const Vector piv = lu.matrixLU().diagonal().cwiseAbs();
    const double pmin = piv.minCoeff();
    const double pmax = piv.maxCoeff();
    if (pmin == 0.0 || pmax / pmin > tol::condition_limit)
        throw singular_error(std::string(who) + ": matrix is singular to tolerance", pmin);
    return lu;
}

} // namespace

Matrix mat_exp(const Matrix& a, double scale) {
    require_square(a, "mat_exp");
    require_finite(a, "mat_exp");
    if (!std::isfinite(scale))
        throw numeric_error("mat_exp: scale is not finite");
    Matrix result = (a * scale).exp();
    if (!result.allFinite())
        throw numeric_error("mat_exp: result overflowed (matrix norm too large)");
    return result;
}

Matrix kron(const Matrix& a, const Matrix& b) {
    Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j)
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

Matrix solve(const Matrix& a, const Matrix& b) {
    if (a.rows() != b.rows())
        throw dimension_error("solve: row counts of A and B differ");
    return checked_lu(a, "solve").solve(b);
}

Vector solve(const Matrix& a, const Vector& b) {
    if (a.rows() != b.size())
        throw dimension_error("solve: row counts of A and b differ");
    return checked_lu(a, "solve").solve(b);
}

Matrix inverse(const Matrix& a) {
    return checked_lu(a, "inverse").inverse();
}

SymEigen sym_eigen(const Matrix& a) {
    require_square(a, "sym_eigen");
    require_finite(a, "sym_eigen");
    const double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
    const double asym = (a - a.transpose()).cwiseAbs().maxCoeff();
    if (asym > tol::symmetry_abs * scale)
        throw symmetry_error("sym_eigen: matrix is not symmetric (max |A - A^T| = " +
                             std::to_string(asym) + ")");

    Eigen::SelfAdjointEigenSolver<Matrix> es(a);
    if (es.info() != Eigen::Success)
        throw numeric_error("sym_eigen: eigensolver did not converge");

    const Eigen::Index n = a.rows();
    SymEigen out;
    out.values = es.eigenvalues().reverse();
    out.vectors = es.eigenvectors().rowwise().reverse();
    for (Eigen::Index j = 0; j < n; ++j) {
        Eigen::Index imax = 0;
        out.vectors.col(j).cwiseAbs().maxCoeff(&imax);
        if (out.vectors(imax, j) < 0.0)
            out.vectors.col(j) = -out.vectors.col(j);
    }
    return out;
}

} // namespace lph
