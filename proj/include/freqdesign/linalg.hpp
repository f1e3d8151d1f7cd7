#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <unsupported/Eigen/MatrixFunctions>

#include "freqdesign/error.hpp"

namespace freqdesign {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using ComplexVector = Eigen::VectorXcd;
using ComplexMatrix = Eigen::MatrixXcd;

namespace linalg {

inline bool all_finite(const Matrix& m) { return m.allFinite(); }

/// Largest singular value.
inline double spectral_norm(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  Eigen::JacobiSVD<Matrix> svd(m);
  return svd.singularValues()(0);
}

/// 2-norm condition number; +inf when the smallest singular value is zero.
template <typename Derived>
double condition_number(const Eigen::MatrixBase<Derived>& m) {
  using Scalar = typename Derived::Scalar;
  Eigen::JacobiSVD<Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>> svd(m);
  const auto& s = svd.singularValues();
  const double smin = s(s.size() - 1);
  if (smin == 0.0) return std::numeric_limits<double>::infinity();
  return s(0) / smin;
}

struct EigenDecomposition {
  ComplexVector values;
  ComplexMatrix vectors;  // columns normalized to unit 2-norm
};

inline EigenDecomposition eigen_decompose(const Matrix& a) {
  if (a.rows() != a.cols()) throw Error(ErrorKind::InvalidArgument, "eigen_decompose: matrix is not square");
  if (!a.allFinite()) throw Error(ErrorKind::EigensolveFailure, "matrix has non-finite entries");
  Eigen::EigenSolver<Matrix> es(a, true);
  if (es.info() != Eigen::Success) throw Error(ErrorKind::EigensolveFailure, "dense eigensolver did not converge");
  return {es.eigenvalues(), es.eigenvectors()};
}

inline ComplexVector eigenvalues(const Matrix& a) {
  if (a.rows() != a.cols()) throw Error(ErrorKind::InvalidArgument, "eigenvalues: matrix is not square");
  if (!a.allFinite()) throw Error(ErrorKind::EigensolveFailure, "matrix has non-finite entries");
  Eigen::EigenSolver<Matrix> es(a, false);
  if (es.info() != Eigen::Success) throw Error(ErrorKind::EigensolveFailure, "dense eigensolver did not converge");
  return es.eigenvalues();
}

/// Max real part over the spectrum.
inline double spectral_abscissa(const ComplexVector& values) {
  double best = -std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < values.size(); ++i) best = std::max(best, values(i).real());
  return best;
}

/// Sorted by (real, imag) so that output ordering is deterministic.
inline std::vector<std::complex<double>> sorted(const ComplexVector& values) {
  std::vector<std::complex<double>> out(values.data(), values.data() + values.size());
  std::sort(out.begin(), out.end(), [](const auto& x, const auto& y) {
    if (x.real() != y.real()) return x.real() < y.real();
    return x.imag() < y.imag();
  });
  return out;
}

/// Matrix exponential (scaling and squaring with Pade approximants).
inline Matrix expm(const Matrix& a) { return a.exp(); }

}  // namespace linalg
}  // namespace freqdesign
