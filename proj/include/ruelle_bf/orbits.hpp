#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "ruelle_bf/linalg.hpp"

namespace rbf {

using BigInt = boost::multiprecision::cpp_int;

// Rank-1 unitary representation. A character sends an orbit of winding n to e^{i theta n}.
struct Representation {
  enum class Kind { trivial, character };
  Kind kind = Kind::trivial;
  double angle = 0.0;

  static Representation trivial() { return {}; }
  static Representation character(double theta) { return {Kind::character, theta}; }
  int dimension() const { return 1; }
  Complex value(std::int64_t winding) const;
  CMatrix matrix(std::int64_t winding) const;
};

// Suspension of x -> A x on the 2-torus with constant roof.
struct HyperbolicToralModel {
  std::array<std::int64_t, 4> A{2, 1, 1, 1};  // row-major
  double roof = 1.0;
  Representation rep;

  // Rank of the stable bundle.
  int rank() const { return 1; }
  std::int64_t det() const { return A[0] * A[3] - A[1] * A[2]; }
  std::int64_t trace() const { return A[0] + A[3]; }
  RMatrix matrix() const;
  // Throws model_invalid unless det A = +-1 and roof > 0.
  void validate() const;
};

struct AnosovReport {
  bool anosov = false;
  double gap = 0.0;
};

AnosovReport anosov_check(const HyperbolicToralModel& model);

struct PrimeOrbit {
  double length = 0.0;
  int period = 0;  // 0 when not known (length-spectrum input)
  RMatrix poincare;
  CMatrix rho;
  std::uint64_t multiplicity = 1;
  int m = 1;
};

// |det(A^n - I)|, exact.
BigInt fixed_point_count(const HyperbolicToralModel& model, int n);

// Entry n-1 is the number of prime orbits of period n.
std::vector<BigInt> prime_orbit_counts(const HyperbolicToralModel& model, int n_max);

std::vector<PrimeOrbit> enumerate_prime_orbits(const HyperbolicToralModel& model, int n_max);

// Integer powers of A.
std::array<BigInt, 4> matrix_power(const HyperbolicToralModel& model, int n);

// sign det(I - P^j) for a prime orbit.
int transversality_sign(const PrimeOrbit& orbit, int j);

// CSV with header length,multiplicity,m,P_entries,rho_re,rho_im.
std::vector<PrimeOrbit> parse_length_spectrum(std::istream& in);
std::vector<PrimeOrbit> load_length_spectrum(const std::string& path);

}  // namespace rbf
