#include "ruelle_bf/linalg.hpp"

#include <cmath>

#include <unsupported/Eigen/MatrixFunctions>

#include "ruelle_bf/error.hpp"

namespace rbf {

double max_norm(const CMatrix& a) {
  if (a.size() == 0) return 0.0;
  return a.cwiseAbs().maxCoeff();
}

Determinant lu_determinant(const CMatrix& a) {
  require(a.rows() == a.cols(), "determinant of a non-square matrix");
  const auto n = a.rows();
  if (n == 0) return {Complex(1.0, 0.0), false};
  Eigen::PartialPivLU<CMatrix> lu(a);
  const Complex det = lu.determinant();
  const double scale = std::pow(max_norm(a), static_cast<double>(n));
  const bool singular = !(std::abs(det) >= kSingularTolerance * scale) || scale == 0.0;
  return {det, singular};
}

CMatrix matrix_exp(const CMatrix& a) {
  require(a.rows() == a.cols(), "exponential of a non-square matrix");
  if (a.rows() == 0) return a;
  return a.exp();
}

CVector eigenvalues(const CMatrix& a) {
  require(a.rows() == a.cols(), "eigenvalues of a non-square matrix");
  if (a.rows() == 0) return CVector();
  Eigen::ComplexEigenSolver<CMatrix> es(a, false);
  if (es.info() != Eigen::Success) fail(ErrorCode::internal, "eigenvalue iteration did not converge");
  return es.eigenvalues();
}

double spectral_radius(const CMatrix& a) {
  if (a.rows() == 0) return 0.0;
  return eigenvalues(a).cwiseAbs().maxCoeff();
}

CMatrix solve(const CMatrix& a, const CMatrix& b, const std::string& what) {
  require(a.rows() == a.cols() && a.rows() == b.rows(), "solve: dimension mismatch");
  if (a.rows() == 0) return b;
  if (lu_determinant(a).singular) fail(ErrorCode::singular, what);
  return Eigen::PartialPivLU<CMatrix>(a).solve(b);
}

CMatrix inverse(const CMatrix& a, const std::string& what) {
  return solve(a, CMatrix::Identity(a.rows(), a.cols()), what);
}

Complex log1p(Complex z) {
  const Complex u = Complex(1.0, 0.0) + z;
  if (u == Complex(1.0, 0.0)) return z;
  return std::log(u) * z / (u - Complex(1.0, 0.0));
}

CMatrix column_space_basis(const CMatrix& a, double tol) {
  if (a.size() == 0) return CMatrix(a.rows(), 0);
  Eigen::JacobiSVD<CMatrix> svd(a, Eigen::ComputeThinU);
  const auto& s = svd.singularValues();
  const double cutoff = tol * std::max(1.0, s(0));
  Eigen::Index rank = 0;
  while (rank < s.size() && s(rank) > cutoff) ++rank;
  return svd.matrixU().leftCols(rank);
}

bool is_finite(const CMatrix& a) {
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    if (!std::isfinite(a.data()[i].real()) || !std::isfinite(a.data()[i].imag())) return false;
  }
  return true;
}

}  // namespace rbf
