#pragma once

#include <cstddef>
#include <vector>

#include "ruelle_bf/linalg.hpp"

namespace rbf {

// Truncated formal power series in hbar with complex coefficients.
// coefficient(p) multiplies hbar^p; everything above max_order() is dropped.
class HbarPolynomial {
 public:
  HbarPolynomial() = default;
  explicit HbarPolynomial(int max_order);
  HbarPolynomial(int max_order, std::vector<Complex> coeffs);

  int max_order() const { return static_cast<int>(coeffs_.size()) - 1; }
  Complex coefficient(int p) const;
  void set_coefficient(int p, Complex c);
  void add_to_coefficient(int p, Complex c);
  const std::vector<Complex>& coefficients() const { return coeffs_; }

  bool is_zero(double tol = 0.0) const;
  Complex evaluate(Complex hbar) const;

  // Drops the constant term and lowers every exponent by one. Requires coefficient(0) == 0.
  HbarPolynomial divide_by_hbar() const;
  HbarPolynomial truncated(int max_order) const;

  HbarPolynomial& operator+=(const HbarPolynomial& rhs);
  HbarPolynomial& operator-=(const HbarPolynomial& rhs);
  HbarPolynomial& operator*=(Complex s);

  friend HbarPolynomial operator+(HbarPolynomial a, const HbarPolynomial& b) { return a += b; }
  friend HbarPolynomial operator-(HbarPolynomial a, const HbarPolynomial& b) { return a -= b; }
  friend HbarPolynomial operator*(HbarPolynomial a, Complex s) { return a *= s; }
  friend HbarPolynomial operator*(Complex s, HbarPolynomial a) { return a *= s; }
  friend HbarPolynomial operator*(const HbarPolynomial& a, const HbarPolynomial& b);

 private:
  std::vector<Complex> coeffs_;
};

// Formal series in hbar with square-matrix coefficients, truncated at max_order.
class MatrixSeries {
 public:
  MatrixSeries() = default;
  MatrixSeries(Eigen::Index dim, int max_order);

  Eigen::Index dim() const { return dim_; }
  int max_order() const { return static_cast<int>(terms_.size()) - 1; }
  const CMatrix& coefficient(int p) const { return terms_.at(static_cast<std::size_t>(p)); }
  CMatrix& coefficient(int p) { return terms_.at(static_cast<std::size_t>(p)); }

  bool is_zero() const;
  CMatrix evaluate(Complex hbar) const;

  friend MatrixSeries operator*(const MatrixSeries& a, const MatrixSeries& b);
  friend MatrixSeries operator*(const CMatrix& a, const MatrixSeries& b);
  friend MatrixSeries operator*(const MatrixSeries& a, const CMatrix& b);
  friend MatrixSeries operator+(const MatrixSeries& a, const MatrixSeries& b);

 private:
  Eigen::Index dim_ = 0;
  std::vector<CMatrix> terms_;
};

// Series trace: coefficient-wise tr.
HbarPolynomial trace(const MatrixSeries& s);

}  // namespace rbf
