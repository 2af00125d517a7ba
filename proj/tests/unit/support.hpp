#pragma once

#include <doctest.h>

#include <cmath>
#include <complex>
#include <functional>
#include <optional>

#include "fdmimo/error.hpp"
#include "fdmimo/linalg.hpp"
#include "fdmimo/random.hpp"

namespace testing {

using fdmimo::CMatrix;
using fdmimo::CVector;

inline CMatrix random_matrix(Eigen::Index rows, Eigen::Index cols, fdmimo::Rng& rng) {
  CMatrix m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j) {
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = fdmimo::complex_normal(rng);
  }
  return m;
}

inline CVector random_vector(Eigen::Index n, fdmimo::Rng& rng) { return random_matrix(n, 1, rng).col(0); }

inline CMatrix random_hermitian(Eigen::Index n, fdmimo::Rng& rng) {
  const CMatrix a = random_matrix(n, n, rng);
  return 0.5 * (a + a.adjoint());
}

/// Orthonormal columns from the QR of a Gaussian matrix.
inline CMatrix random_isometry(Eigen::Index rows, Eigen::Index cols, fdmimo::Rng& rng) {
  Eigen::HouseholderQR<CMatrix> qr(random_matrix(rows, cols, rng));
  return qr.householderQ() * CMatrix::Identity(rows, cols);
}

/// Error code raised by `f`, or nullopt when it returns normally.
inline std::optional<fdmimo::ErrorCode> error_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const fdmimo::Error& e) {
    return e.code();
  }
  return std::nullopt;
}

inline double max_abs(const CMatrix& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }

}  // namespace testing
