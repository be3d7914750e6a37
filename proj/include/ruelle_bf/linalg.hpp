#pragma once

#include <complex>
#include <string>

#include <Eigen/Dense>

namespace rbf {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RMatrix = Eigen::MatrixXd;

inline constexpr double kSingularTolerance = 1e-12;

struct Determinant {
  Complex value;
  bool singular = false;
};

// LU with partial pivoting. Flags |det| < 1e-12 * max|a_ij|^n as singular.
Determinant lu_determinant(const CMatrix& a);

double max_norm(const CMatrix& a);

CMatrix matrix_exp(const CMatrix& a);
CVector eigenvalues(const CMatrix& a);
double spectral_radius(const CMatrix& a);

// Solves a x = b, throwing Error(singular) with `what` when a is singular.
CMatrix solve(const CMatrix& a, const CMatrix& b, const std::string& what);
CMatrix inverse(const CMatrix& a, const std::string& what);

// log(1 + z) accurate for small |z|.
Complex log1p(Complex z);

// Orthonormal basis of the column space (numerical rank at tolerance tol).
CMatrix column_space_basis(const CMatrix& a, double tol = 1e-10);

bool is_finite(const CMatrix& a);

}  // namespace rbf
