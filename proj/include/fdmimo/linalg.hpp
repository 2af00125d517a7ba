#pragma once

#include <complex>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace fdmimo {

using cd = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RVector = Eigen::VectorXd;

/// Truncated eigen-decomposition of a Hermitian PSD matrix. Columns of
/// `vectors` are orthonormal; `values` are sorted in descending order and
/// `values.size() == vectors.cols()`.
struct EigenBasis {
  CMatrix vectors;
  RVector values;

  Eigen::Index rank() const { return vectors.cols(); }
  Eigen::Index dim() const { return vectors.rows(); }
};

/// Orthogonal split of C^n into the dominant (signal) subspace of a Hermitian
/// matrix and its orthogonal complement.
struct NullSplit {
  CMatrix signal_basis;
  CMatrix null_basis;

  Eigen::Index signal_rank() const { return signal_basis.cols(); }
  Eigen::Index null_rank() const { return null_basis.cols(); }
};

inline constexpr double kDefaultEpsRel = 1e-3;
inline constexpr double kZfConditionLimit = 1e12;

/// Full eigen-decomposition, eigenvalues descending. Ties keep the order in
/// which the underlying solver returned them.
///
/// Throws NonHermitian if ||M - M^H|| > 1e-9 ||M||, NonFinite on NaN/Inf.
EigenBasis hermitian_eig(const CMatrix& m);

/// Truncated eigen-decomposition of M = B B^H without forming M: B is
/// compressed by pivoted Gram-Schmidt to its numerical rank r, then an
/// r x r problem is solved. Keeps eigenpairs with lambda_i >= eps_rel *
/// lambda_1. Cost O(n q r) for an n x q factor.
EigenBasis lowrank_eig(const CMatrix& factor, double eps_rel);

/// Keep eigenpairs with lambda_i >= eps_rel * lambda_1.
EigenBasis truncate(const EigenBasis& eig, double eps_rel);

/// Splits C^full_dim into span of the eigenvectors above the relative
/// threshold and its orthogonal complement. A zero input yields an empty
/// signal basis and the identity as the null basis.
NullSplit split_by_threshold(const EigenBasis& eig, Eigen::Index full_dim, double eps_rel);

/// Orthonormal basis of the orthogonal complement of span(q) in C^n, where q
/// has orthonormal columns.
CMatrix orthogonal_complement(const CMatrix& q, Eigen::Index n);

/// Standard Kronecker product. For vectors, kron(a, b) stacks copies of b
/// scaled by the entries of a (first factor is the slow index).
CMatrix kron(const CMatrix& a, const CMatrix& b);

/// Block-diagonal (K r) x K matrix with vector k in diagonal block k.
/// Throws LengthMismatch when the vectors differ in length.
CMatrix khatri_rao_block(std::span<const CVector> vectors);

/// D = H (H^H H)^{-1}, the zero-forcing direction with H^H D = I.
/// Throws DimensionMismatch if K > r, RankDeficient when the column-equilibrated
/// Gram condition number exceeds kZfConditionLimit.
CMatrix zf_direction(const CMatrix& h_eff);

/// Spectral condition number of a Hermitian PSD matrix (inf if singular).
double hermitian_condition(const CMatrix& gram);

/// ||M - M^H||_F / ||M||_F (0 for the zero matrix).
double hermitian_defect(const CMatrix& m);

}  // namespace fdmimo
