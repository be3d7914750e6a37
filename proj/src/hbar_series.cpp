#include "ruelle_bf/hbar_series.hpp"

#include <algorithm>

#include "ruelle_bf/error.hpp"

namespace rbf {

HbarPolynomial::HbarPolynomial(int max_order) {
  require(max_order >= 0, "hbar polynomial order must be non-negative");
  coeffs_.assign(static_cast<std::size_t>(max_order) + 1, Complex(0.0, 0.0));
}

HbarPolynomial::HbarPolynomial(int max_order, std::vector<Complex> coeffs) : HbarPolynomial(max_order) {
  for (std::size_t p = 0; p < coeffs.size() && p < coeffs_.size(); ++p) coeffs_[p] = coeffs[p];
}

Complex HbarPolynomial::coefficient(int p) const {
  if (p < 0 || p > max_order()) return Complex(0.0, 0.0);
  return coeffs_[static_cast<std::size_t>(p)];
}

void HbarPolynomial::set_coefficient(int p, Complex c) {
  require(p >= 0 && p <= max_order(), "hbar exponent outside truncation");
  coeffs_[static_cast<std::size_t>(p)] = c;
}

void HbarPolynomial::add_to_coefficient(int p, Complex c) {
  if (p < 0 || p > max_order()) return;
  coeffs_[static_cast<std::size_t>(p)] += c;
}

bool HbarPolynomial::is_zero(double tol) const {
  return std::all_of(coeffs_.begin(), coeffs_.end(), [tol](Complex c) { return std::abs(c) <= tol; });
}

Complex HbarPolynomial::evaluate(Complex hbar) const {
  Complex acc(0.0, 0.0);
  for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) acc = acc * hbar + *it;
  return acc;
}

HbarPolynomial HbarPolynomial::divide_by_hbar() const {
  require(coefficient(0) == Complex(0.0, 0.0), "series has a constant term");
  HbarPolynomial out(std::max(0, max_order() - 1));
  for (int p = 1; p <= max_order(); ++p) out.coeffs_[static_cast<std::size_t>(p - 1)] = coefficient(p);
  return out;
}

HbarPolynomial HbarPolynomial::truncated(int max_order) const {
  HbarPolynomial out(max_order);
  for (int p = 0; p <= max_order; ++p) out.coeffs_[static_cast<std::size_t>(p)] = coefficient(p);
  return out;
}

HbarPolynomial& HbarPolynomial::operator+=(const HbarPolynomial& rhs) {
  if (rhs.max_order() > max_order()) coeffs_.resize(rhs.coeffs_.size(), Complex(0.0, 0.0));
  for (int p = 0; p <= rhs.max_order(); ++p) coeffs_[static_cast<std::size_t>(p)] += rhs.coefficient(p);
  return *this;
}

HbarPolynomial& HbarPolynomial::operator-=(const HbarPolynomial& rhs) {
  if (rhs.max_order() > max_order()) coeffs_.resize(rhs.coeffs_.size(), Complex(0.0, 0.0));
  for (int p = 0; p <= rhs.max_order(); ++p) coeffs_[static_cast<std::size_t>(p)] -= rhs.coefficient(p);
  return *this;
}

HbarPolynomial& HbarPolynomial::operator*=(Complex s) {
  for (auto& c : coeffs_) c *= s;
  return *this;
}

HbarPolynomial operator*(const HbarPolynomial& a, const HbarPolynomial& b) {
  const int order = std::min(a.max_order(), b.max_order());
  HbarPolynomial out(order);
  for (int i = 0; i <= order; ++i) {
    for (int j = 0; i + j <= order; ++j) out.add_to_coefficient(i + j, a.coefficient(i) * b.coefficient(j));
  }
  return out;
}

MatrixSeries::MatrixSeries(Eigen::Index dim, int max_order) : dim_(dim) {
  require(max_order >= 0, "matrix series order must be non-negative");
  terms_.assign(static_cast<std::size_t>(max_order) + 1, CMatrix::Zero(dim, dim));
}

bool MatrixSeries::is_zero() const {
  return std::all_of(terms_.begin(), terms_.end(), [](const CMatrix& m) { return m.isZero(0.0); });
}

CMatrix MatrixSeries::evaluate(Complex hbar) const {
  CMatrix acc = CMatrix::Zero(dim_, dim_);
  for (auto it = terms_.rbegin(); it != terms_.rend(); ++it) acc = acc * hbar + *it;
  return acc;
}

MatrixSeries operator*(const MatrixSeries& a, const MatrixSeries& b) {
  require(a.dim() == b.dim(), "matrix series dimension mismatch");
  const int order = std::min(a.max_order(), b.max_order());
  MatrixSeries out(a.dim(), order);
  for (int i = 0; i <= order; ++i) {
    if (a.coefficient(i).isZero(0.0)) continue;
    for (int j = 0; i + j <= order; ++j) out.coefficient(i + j) += a.coefficient(i) * b.coefficient(j);
  }
  return out;
}

MatrixSeries operator*(const CMatrix& a, const MatrixSeries& b) {
  MatrixSeries out(b.dim(), b.max_order());
  for (int p = 0; p <= b.max_order(); ++p) out.coefficient(p) = a * b.coefficient(p);
  return out;
}

MatrixSeries operator*(const MatrixSeries& a, const CMatrix& b) {
  MatrixSeries out(a.dim(), a.max_order());
  for (int p = 0; p <= a.max_order(); ++p) out.coefficient(p) = a.coefficient(p) * b;
  return out;
}

MatrixSeries operator+(const MatrixSeries& a, const MatrixSeries& b) {
  require(a.dim() == b.dim(), "matrix series dimension mismatch");
  const int order = std::min(a.max_order(), b.max_order());
  MatrixSeries out(a.dim(), order);
  for (int p = 0; p <= order; ++p) out.coefficient(p) = a.coefficient(p) + b.coefficient(p);
  return out;
}

HbarPolynomial trace(const MatrixSeries& s) {
  HbarPolynomial out(s.max_order());
  for (int p = 0; p <= s.max_order(); ++p) out.set_coefficient(p, s.coefficient(p).trace());
  return out;
}

}  // namespace rbf
