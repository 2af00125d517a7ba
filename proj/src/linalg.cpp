#include "fdmimo/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "fdmimo/error.hpp"

namespace fdmimo {
namespace {

bool all_finite(const CMatrix& m) {
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      if (!std::isfinite(m(i, j).real()) || !std::isfinite(m(i, j).imag())) return false;
    }
  }
  return true;
}

// Reorders an ascending solver output into descending order; equal values
// keep their relative solver order.
EigenBasis descending(const CMatrix& vectors, const RVector& values) {
  const Eigen::Index n = values.size();
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index a, Eigen::Index b) { return values(a) > values(b); });
  EigenBasis out;
  out.vectors.resize(vectors.rows(), n);
  out.values.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    out.vectors.col(i) = vectors.col(order[static_cast<std::size_t>(i)]);
    out.values(i) = values(order[static_cast<std::size_t>(i)]);
  }
  return out;
}

Eigen::Index count_above(const RVector& values, double eps_rel) {
  if (values.size() == 0 || !(values(0) > 0.0)) return 0;
  const double cut = eps_rel * values(0);
  Eigen::Index r = 0;
  while (r < values.size() && values(r) >= cut) ++r;
  return r;
}

}  // namespace

double hermitian_defect(const CMatrix& m) {
  const double norm = m.norm();
  if (norm == 0.0) return 0.0;
  return (m - m.adjoint()).norm() / norm;
}

EigenBasis hermitian_eig(const CMatrix& m) {
  if (m.rows() != m.cols()) {
    throw Error(ErrorCode::DimensionMismatch, "hermitian_eig needs a square matrix, got " +
                                                  std::to_string(m.rows()) + "x" +
                                                  std::to_string(m.cols()));
  }
  if (!all_finite(m)) throw Error(ErrorCode::NonFinite, "hermitian_eig input has NaN/Inf");
  if (hermitian_defect(m) > 1e-9) {
    throw Error(ErrorCode::NonHermitian,
                "symmetry defect " + std::to_string(hermitian_defect(m)) + " exceeds 1e-9");
  }
  if (m.rows() == 0) return {};
  const CMatrix sym = 0.5 * (m + m.adjoint());
  Eigen::SelfAdjointEigenSolver<CMatrix> solver(sym);
  return descending(solver.eigenvectors(), solver.eigenvalues());
}

EigenBasis truncate(const EigenBasis& eig, double eps_rel) {
  const Eigen::Index r = count_above(eig.values, eps_rel);
  return {eig.vectors.leftCols(r), eig.values.head(r)};
}

EigenBasis lowrank_eig(const CMatrix& factor, double eps_rel) {
  const Eigen::Index n = factor.rows();
  const Eigen::Index q = factor.cols();
  if (q == 0 || factor.squaredNorm() == 0.0) return {CMatrix(n, 0), RVector(0)};
  if (!all_finite(factor)) throw Error(ErrorCode::NonFinite, "lowrank_eig factor has NaN/Inf");
  // Truncated column-pivoted Gram-Schmidt: F P ~ Q R with the residual
  // below 1e-12 of the leading column. Cost is O(n q rank) rather than a
  // full QR, which matters since these factors have low numerical rank.
  CMatrix resid = factor;
  RVector norms = resid.colwise().squaredNorm().transpose();
  const double stop = 1e-24 * norms.maxCoeff();
  CMatrix q_basis(n, std::min(n, q));
  CMatrix r_rows(std::min(n, q), q);
  Eigen::Index rk = 0;
  while (rk < std::min(n, q)) {
    Eigen::Index piv = 0;
    if (!(norms.maxCoeff(&piv) > stop)) break;
    CVector v = resid.col(piv);
    // Second pass keeps the basis orthogonal to working precision.
    for (int pass = 0; pass < 2; ++pass) {
      v -= q_basis.leftCols(rk) * (q_basis.leftCols(rk).adjoint() * v);
    }
    const double len = v.norm();
    if (!(len > 0.0)) break;
    q_basis.col(rk) = v / len;
    r_rows.row(rk) = q_basis.col(rk).adjoint() * resid;
    resid.noalias() -= q_basis.col(rk) * r_rows.row(rk);
    norms = resid.colwise().squaredNorm().transpose();
    ++rk;
  }
  if (rk == 0) return {CMatrix(n, 0), RVector(0)};
  const CMatrix r_top = r_rows.topRows(rk);
  const CMatrix small_m = r_top * r_top.adjoint();
  Eigen::SelfAdjointEigenSolver<CMatrix> solver(small_m);
  const EigenBasis small = descending(solver.eigenvectors(), solver.eigenvalues());
  const Eigen::Index r = count_above(small.values, eps_rel);
  EigenBasis out;
  out.values = small.values.head(r);
  out.vectors = q_basis.leftCols(rk) * small.vectors.leftCols(r);
  return out;
}

CMatrix orthogonal_complement(const CMatrix& q, Eigen::Index n) {
  if (q.rows() != n && q.cols() != 0) {
    throw Error(ErrorCode::DimensionMismatch, "orthogonal_complement: basis has " +
                                                  std::to_string(q.rows()) + " rows, expected " +
                                                  std::to_string(n));
  }
  const Eigen::Index r = q.cols();
  if (r == 0) return CMatrix::Identity(n, n);
  if (r >= n) return CMatrix(n, 0);
  Eigen::HouseholderQR<CMatrix> qr(q);
  const CMatrix full = qr.householderQ() * CMatrix::Identity(n, n);
  return full.rightCols(n - r);
}

NullSplit split_by_threshold(const EigenBasis& eig, Eigen::Index full_dim, double eps_rel) {
  if (!(eps_rel > 0.0 && eps_rel < 1.0)) {
    throw Error(ErrorCode::InvalidParameter, "eps_rel must lie in (0, 1)");
  }
  if (eig.rank() > 0 && eig.dim() != full_dim) {
    throw Error(ErrorCode::DimensionMismatch, "eigenbasis dimension differs from full_dim");
  }
  const Eigen::Index r = count_above(eig.values, eps_rel);
  NullSplit split;
  split.signal_basis = eig.vectors.leftCols(r);
  if (eig.rank() == full_dim) {
    split.null_basis = eig.vectors.rightCols(full_dim - r);
  } else {
    split.null_basis = orthogonal_complement(split.signal_basis, full_dim);
  }
  if (r == 0) split.signal_basis = CMatrix(full_dim, 0);
  return split;
}

CMatrix kron(const CMatrix& a, const CMatrix& b) {
  CMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index j = 0; j < a.cols(); ++j) {
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

CMatrix khatri_rao_block(std::span<const CVector> vectors) {
  const auto k = static_cast<Eigen::Index>(vectors.size());
  if (k == 0) return {};
  const Eigen::Index r = vectors.front().size();
  for (const auto& v : vectors) {
    if (v.size() != r) {
      throw Error(ErrorCode::LengthMismatch, "khatri_rao_block: vectors of length " +
                                                 std::to_string(r) + " and " +
                                                 std::to_string(v.size()));
    }
  }
  CMatrix out = CMatrix::Zero(k * r, k);
  for (Eigen::Index i = 0; i < k; ++i) {
    out.block(i * r, i, r, 1) = vectors[static_cast<std::size_t>(i)];
  }
  return out;
}

double hermitian_condition(const CMatrix& gram) {
  if (gram.rows() == 0) return 1.0;
  Eigen::SelfAdjointEigenSolver<CMatrix> solver(gram, Eigen::EigenvaluesOnly);
  const double lo = solver.eigenvalues().minCoeff();
  const double hi = solver.eigenvalues().maxCoeff();
  if (!(lo > 0.0)) return std::numeric_limits<double>::infinity();
  return hi / lo;
}

CMatrix zf_direction(const CMatrix& h_eff) {
  const Eigen::Index r = h_eff.rows();
  const Eigen::Index k = h_eff.cols();
  if (k > r) {
    throw Error(ErrorCode::DimensionMismatch,
                "zf_direction needs K <= r, got K=" + std::to_string(k) + " r=" + std::to_string(r));
  }
  // Equilibrate columns first so path-loss spread does not count as
  // ill-conditioning: H (H^H H)^{-1} = Hn (Hn^H Hn)^{-1} S^{-1}.
  const RVector scale = h_eff.colwise().norm().transpose();
  if (k > 0 && !(scale.minCoeff() > 0.0)) {
    throw Error(ErrorCode::RankDeficient, "zf_direction: zero channel column");
  }
  const CMatrix hn = h_eff * scale.cwiseInverse().asDiagonal();
  const CMatrix gram = hn.adjoint() * hn;
  const double cond = hermitian_condition(gram);
  if (!(cond <= kZfConditionLimit)) {
    throw Error(ErrorCode::RankDeficient, "Gram condition number " + std::to_string(cond));
  }
  return hn * gram.ldlt().solve(CMatrix::Identity(k, k)) * scale.cwiseInverse().asDiagonal();
}

}  // namespace fdmimo
