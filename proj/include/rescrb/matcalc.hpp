#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

namespace rescrb::matcalc {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Length of the half-vectorization of an N x N symmetric matrix.
constexpr std::size_t vecs_size(std::size_t n) noexcept { return n * (n + 1) / 2; }

/// Zero-based position of entry (row, col), row >= col, inside vecs().
/// Columns of the lower triangle are stacked left to right.
constexpr std::size_t vecs_index(std::size_t n, std::size_t row, std::size_t col) noexcept {
    return col * n - col * (col - 1) / 2 + (row - col);
}

/// Relative asymmetry ||A - A^T||_F / ||A||_F (0 for the zero matrix).
double asymmetry(const Matrix& a);

/// Throws InvalidInput when `a` is not square or its relative asymmetry
/// exceeds `tol`.
void require_symmetric(const Matrix& a, double tol = 1e-10);

/// Throws NotPositiveDefinite unless the smallest eigenvalue of the
/// symmetric matrix `a` is strictly positive.
void require_spd(const Matrix& a);

Vector vecs(const Matrix& a);
Matrix unvecs(const Vector& v, std::size_t n);

/// Column-major full vectorization.
Vector vec(const Matrix& a);

/// N^2 x N(N+1)/2 matrix D with D * vecs(A) == vec(A) for symmetric A.
Matrix duplication_matrix(std::size_t n);

/// Symmetric positive-definite square root through the eigendecomposition.
Matrix sym_sqrt(const Matrix& s);

/// Inverse of sym_sqrt(s).
Matrix sym_inv_sqrt(const Matrix& s);

/// Inverse of a symmetric positive-definite matrix via its eigendecomposition.
/// Throws NumericalRankError when the condition number exceeds `max_condition`
/// and NotPositiveDefinite when an eigenvalue is not positive.
Matrix spd_inverse(const Matrix& s, double max_condition = 1e12);

/// Indicator of the diagonal entries inside vecs(); its transpose is the
/// gradient of tr(Sigma) with respect to vecs(Sigma).
Vector diag_indicator(std::size_t n);

/// One-based positions of the ones in diag_indicator(n).
std::vector<std::size_t> diag_positions(std::size_t n);

/// Orthonormal basis (len(J) x null_dim) of the null space of the row vector
/// J, taken from the right singular vectors of J.
Matrix nullspace_basis(const Eigen::RowVectorXd& j, std::size_t null_dim);

Matrix kron(const Matrix& a, const Matrix& b);

double frobenius_norm(const Matrix& a);

/// [T]_{ij} = rho^{|i-j|}.
Matrix toeplitz(double rho, std::size_t n);

}  // namespace rescrb::matcalc
