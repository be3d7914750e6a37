#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <random>
#include <vector>

#include "ruelle_bf/linalg.hpp"

namespace testing {

using rbf::CMatrix;
using rbf::Complex;
using rbf::CVector;
using rbf::RMatrix;

inline std::mt19937_64& rng() {
  static std::mt19937_64 gen(20240611);
  return gen;
}

inline double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng()); }
inline int uniform_int(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng()); }

inline CMatrix random_matrix(Eigen::Index n, double scale = 1.0) {
  CMatrix m(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) m(i, j) = Complex(uniform(-scale, scale), uniform(-scale, scale));
  return m;
}

inline RMatrix random_real_matrix(Eigen::Index n, double scale = 1.0) {
  RMatrix m(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) m(i, j) = uniform(-scale, scale);
  return m;
}

inline CVector random_vector(Eigen::Index n) {
  CVector v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = Complex(uniform(-1, 1), uniform(-1, 1));
  return v;
}

// S diag(mu) S^{-1} with Re mu in [re_lo, re_hi], Im mu in [-im, im] and a well-conditioned S.
inline CMatrix random_with_spectrum(Eigen::Index n, double re_lo, double re_hi, double im, CVector* spectrum = nullptr) {
  CVector mu(n);
  for (Eigen::Index i = 0; i < n; ++i) mu(i) = Complex(uniform(re_lo, re_hi), uniform(-im, im));
  const CMatrix s = CMatrix::Identity(n, n) + 0.3 * random_matrix(n);
  if (spectrum != nullptr) *spectrum = mu;
  return s * mu.asDiagonal() * s.inverse();
}

inline double rel_err(Complex a, Complex b) {
  const double scale = std::max(std::abs(b), 1e-300);
  return std::abs(a - b) / scale;
}

// Composite trapezoid on [a, b] with n panels.
inline Complex trapezoid(const std::function<Complex(double)>& f, double a, double b, int n) {
  const double h = (b - a) / n;
  Complex acc = 0.5 * (f(a) + f(b));
  for (int i = 1; i < n; ++i) acc += f(a + i * h);
  return acc * h;
}

// Taylor coefficients c_0..c_K of f at 0 from samples on the circle |z| = r.
inline std::vector<Complex> cauchy_coefficients(const std::function<Complex(Complex)>& f, double r, int K,
                                                int samples = 64) {
  std::vector<Complex> c(static_cast<std::size_t>(K + 1), Complex(0.0, 0.0));
  const double pi = std::acos(-1.0);
  for (int j = 0; j < samples; ++j) {
    const double theta = 2.0 * pi * j / samples;
    const Complex z = std::polar(r, theta);
    const Complex fz = f(z);
    for (int k = 0; k <= K; ++k) c[static_cast<std::size_t>(k)] += fz * std::polar(std::pow(r, -k), -k * theta);
  }
  for (auto& v : c) v /= static_cast<double>(samples);
  return c;
}

}  // namespace testing
