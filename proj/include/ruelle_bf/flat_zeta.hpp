#pragma once

#include <cstddef>
#include <vector>

#include "ruelle_bf/linalg.hpp"
#include "ruelle_bf/orbits.hpp"

namespace rbf {

// Sum of the k x k principal minors.
Complex exterior_power_trace(const CMatrix& p, int k);
double exterior_power_trace(const RMatrix& p, int k);

struct Atom {
  double t = 0.0;
  Complex weight;
};

// Dirac atoms on (0, inf), sorted by time; atoms closer than 1e-12 relative are merged.
class AtomicDistribution {
 public:
  AtomicDistribution() = default;
  AtomicDistribution(std::vector<Atom> atoms, double t_min);

  const std::vector<Atom>& atoms() const { return atoms_; }
  double t_min() const { return t_min_; }
  bool empty() const { return atoms_.empty(); }
  std::size_t size() const { return atoms_.size(); }

 private:
  std::vector<Atom> atoms_;
  double t_min_ = 0.0;
};

// Atoms j l(gamma) <= t_max with weight l tr(rho^j) tr(wedge^k P^j) / |det(I - P^j)|.
AtomicDistribution flat_trace_evolution(const std::vector<PrimeOrbit>& orbits, int k, double t_max);

// (1 / Gamma(s)) sum w t^{s-1} e^{-lambda t}
Complex mellin_transform(const AtomicDistribution& dist, double s, Complex lambda);
// -d/ds of the above at s = 0: -sum w t^{-1} e^{-lambda t}
Complex mellin_log_det(const AtomicDistribution& dist, Complex lambda);

struct ZetaSeries {
  Complex lambda;
  int k = 0;  // form degree; -1 Euler product, -2 alternating assembly
  Complex value;
  double L_max = 0.0;
  double tail_bound = 0.0;
  bool converged = true;
  std::size_t terms = 0;
  double abscissa = 0.0;
};

inline constexpr int kEulerSeries = -1;
inline constexpr int kAssemblySeries = -2;

// Per (orbit, repetition) data shared by every series, ascending in t then orbit then j.
struct OrbitTerm {
  double t = 0.0;
  std::size_t orbit = 0;
  int j = 0;
  double multiplicity = 1.0;
  int m = 1;
  Complex rho_trace;
  std::vector<double> wedge_traces;  // k = 0..2m
  double det_i_minus_p = 0.0;        // signed
};

// Precomputed orbit terms and growth envelopes; evaluates any series at any lambda.
class ZetaEvaluator {
 public:
  ZetaEvaluator(const std::vector<PrimeOrbit>& orbits, double L_max);

  double L_max() const { return L_max_; }
  const std::vector<OrbitTerm>& terms() const { return terms_; }
  int max_degree() const { return max_degree_; }

  ZetaSeries log_zeta_k(int k, Complex lambda) const;
  ZetaSeries euler(Complex lambda) const;
  ZetaSeries assembly(int m, Complex lambda) const;
  // (-1)^m sum_k (-1)^k log_zeta_k, summed degree by degree.
  ZetaSeries assembly_by_degree(int m, Complex lambda) const;

  // Coefficient of e^{-lambda t} for a term in the given series.
  Complex coefficient(const OrbitTerm& term, int series, int m) const;

 private:
  struct Envelope {
    double growth = 0.0;
    double scale = 0.0;
    double spacing = 1.0;
    bool empty = true;
  };
  Envelope envelope(int series, int m) const;
  ZetaSeries sum(int series, int m, Complex lambda) const;

  double L_max_;
  double horizon_ = 0.0;
  int max_degree_ = 0;
  std::vector<OrbitTerm> terms_;  // all terms with t <= max(L_max, horizon)
};

ZetaSeries log_zeta_k(const std::vector<PrimeOrbit>& orbits, int k, Complex lambda, double L_max);
ZetaSeries euler_product_log_zeta(const std::vector<PrimeOrbit>& orbits, Complex lambda, double L_max);
ZetaSeries alternating_assembly(const std::vector<PrimeOrbit>& orbits, int m, Complex lambda, double L_max);

// exp(log_zeta_k): determinant of the restricted degree-k generator shifted by lambda.
Complex flat_determinant_orbit(const std::vector<PrimeOrbit>& orbits, int k, Complex lambda, double L_max);

// sum_i (mu_i + lambda)^{-s}, mu_i the eigenvalues of B.
Complex spectral_zeta(const CMatrix& b, Complex s, Complex lambda);
// prod_i (mu_i + lambda) = exp(-d/ds spectral_zeta at 0); requires Re(mu + lambda) > 0.
Complex flat_det_via_F(const CMatrix& b, Complex lambda);

bool flat_trace_cyclicity_check(const CMatrix& a, const CMatrix& b);

}  // namespace rbf
