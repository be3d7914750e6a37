#pragma once

#include <limits>
#include <vector>

#include "ruelle_bf/feynman.hpp"
#include "ruelle_bf/graded.hpp"
#include "ruelle_bf/hbar_series.hpp"
#include "ruelle_bf/linalg.hpp"
#include "ruelle_bf/orbits.hpp"

namespace rbf {

struct GradedBlock {
  int degree = 0;
  ToyBFComplex complex;
};

// Direct sum of toy complexes, one per form degree k. In the full basis each block
// contributes V0 (form degree k) followed by V1 (form degree k + 1).
class MatrixBFModel {
 public:
  explicit MatrixBFModel(std::vector<GradedBlock> blocks);
  static MatrixBFModel single(const ToyBFComplex& complex, int degree = 0);
  // d = L, iota = identity per block.
  static MatrixBFModel from_generators(const std::vector<std::pair<int, CMatrix>>& generators);

  const std::vector<GradedBlock>& blocks() const { return blocks_; }
  Eigen::Index full_dim() const { return d_.rows(); }
  const CMatrix& differential() const { return d_; }
  const CMatrix& contraction() const { return iota_; }
  const CMatrix& lie_derivative() const { return lie_; }
  const std::vector<int>& form_degrees() const { return form_degree_; }
  CMatrix form_degree_projector(int k) const;
  // Offset of the V0 part of block b in the full basis.
  Eigen::Index block_offset(std::size_t b) const { return offsets_.at(b); }
  // min |mu| over the spectrum of L.
  double min_abs_spectrum() const { return min_abs_spectrum_; }
  // W = L^{-1} d
  const CMatrix& w() const { return w_; }

 private:
  std::vector<GradedBlock> blocks_;
  std::vector<Eigen::Index> offsets_;
  std::vector<int> form_degree_;
  CMatrix d_, iota_, lie_, w_;
  double min_abs_spectrum_ = 0.0;
};

// <B, L^{-1} d A>, bilinear.
Complex perturbing_functional(const MatrixBFModel& model, const CVector& a, const CVector& b);

struct RegularizedPropagator {
  double L1 = 0.0;
  double L2 = std::numeric_limits<double>::infinity();
  Complex lambda{0.0, 0.0};
  CMatrix matrix;
};

// iota (L + lambda)^{-1} (e^{-L1 (L+lambda)} - e^{-L2 (L+lambda)})
RegularizedPropagator regularized_propagator(const MatrixBFModel& model, double L1, double L2,
                                             Complex lambda = {0.0, 0.0});

// Chain diagrams: hbar^N -> (-1)^{N-1} i <B, W M^{N-1} A>, M = P W. Degree <= K.
HbarPolynomial gamma_int(const MatrixBFModel& model, const RegularizedPropagator& propagator, const CVector& a,
                         const CVector& b, int K);

// Loop diagrams over the window (0, inf): hbar^{N+1} -> (-1)^N / N sum_k (-1)^{k+1} tr(E_k M^N).
// Degree <= K, so K = 1 is the zero polynomial.
HbarPolynomial gamma_tr(const MatrixBFModel& model, Complex lambda, int K);

// Same coefficients from the restricted blocks: tr((L_k + lambda)^{-N}).
HbarPolynomial gamma_tr_closed_form(const MatrixBFModel& model, Complex lambda, int K);

double simplex_volume(int n, double t);

struct ProjectionCheck {
  Complex lhs;  // tr(B L^{-1} iota d)
  Complex rhs;  // tr(B restricted to im iota)
  double invariance_defect = 0.0;
  bool holds = false;
};

ProjectionCheck projection_lemma_check(const MatrixBFModel& model, const CMatrix& b_op);

struct ExpectationResult {
  Complex series_value;
  Complex closed_form;
  Complex log_defect;  // log series - log closed form, from eigenvalues
  double defect = 0.0;
};

// prod_k (det(L_k + hbar) / det L_k)^{(-1)^k}
Complex expectation_closed_form(const MatrixBFModel& model, Complex hbar);

// exp((1/hbar) gamma_tr(hbar)) with the exponent exact through hbar^K, against the closed form.
ExpectationResult expectation_value(const MatrixBFModel& model, Complex hbar, int K);

// Graded product of toy partition functions: prod_k Z_k(hbar)^{(-1)^k}.
PartitionResult bf_partition(const MatrixBFModel& model, Complex hbar);

// Doubled field space phi = (A, B) for the generic graph engine: the interaction is
// I(phi) = <B, W A> (vertex tensor [[0, W^T], [W, 0]]) and the propagator carries both
// copies [[0, P], [P^T, 0]]. With form_degree >= 0 the vertex only accepts A of that degree.
struct DoubledTheory {
  Interaction interaction;
  PropagatorKernel propagator;
};

DoubledTheory doubled_theory(const MatrixBFModel& model, const RegularizedPropagator& propagator, int form_degree = -1);

// weight(chain(N)) / |Aut| with tails (A, B).
Complex chain_diagram_value(const MatrixBFModel& model, const RegularizedPropagator& propagator, const CVector& a,
                            const CVector& b, int vertices);
// sum_k (-1)^{k+1} weight(cycle(N)) / |Aut| with the vertex restricted to degree k.
Complex cycle_diagram_value(const MatrixBFModel& model, const RegularizedPropagator& propagator, int vertices);

struct BridgeResult {
  Complex euler_ratio;
  Complex determinant_ratio;
  double defect = 0.0;
  double tail_bound = 0.0;
  bool converged = true;
};

// (zeta(lambda0 + hbar) / zeta(lambda0))^{(-1)^m} from the Euler product and from the
// alternating per-degree flat determinants.
BridgeResult zeta_expectation_bridge(const std::vector<PrimeOrbit>& orbits, int m, Complex hbar, double L_max,
                                     Complex lambda0);

}  // namespace rbf
