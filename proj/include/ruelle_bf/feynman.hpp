#pragma once

#include <cstdint>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include "ruelle_bf/hbar_series.hpp"
#include "ruelle_bf/linalg.hpp"

namespace rbf {

// Half-edges are 0..H-1. incidence[h] is the vertex of h, involution[h] its partner
// (h itself for a tail).
struct FeynmanGraph {
  int vertex_count = 0;
  std::vector<int> incidence;
  std::vector<int> involution;

  int half_edge_count() const { return static_cast<int>(incidence.size()); }
  int valence(int v) const;
  std::vector<int> half_edges_at(int v) const;
  std::vector<int> tails() const;
  std::vector<std::pair<int, int>> edges() const;
  int edge_count() const { return static_cast<int>(edges().size()); }
  int component_count() const;
  bool is_connected() const { return vertex_count > 0 && component_count() == 1; }
  int loop_count() const { return edge_count() - vertex_count + component_count(); }

  void validate() const;
};

// Bivalent graphs. chain(n): n vertices, n-1 edges, 2 tails. cycle(n): n vertices, n edges;
// cycle(1) is the self-loop.
FeynmanGraph make_chain(int vertices);
FeynmanGraph make_cycle(int vertices);

enum class DiagramKind { chain, cycle, other };
DiagramKind classify(const FeynmanGraph& g);
std::string describe(const FeynmanGraph& g);

// hbar exponent: one per vertex plus one per loop.
int hbar_exponent(const FeynmanGraph& g);

// Connected bivalent graphs with the given number of vertices: {chain, cycle}.
std::vector<FeynmanGraph> enumerate_bivalent_connected(int vertices);

// Connected diagrams of a quadratic interaction contributing at hbar^order:
// order 1 -> chain(1); order N >= 2 -> chain(N), cycle(N-1).
std::vector<FeynmanGraph> enumerate_connected_quadratic(int order);

enum class TailConvention { unlabeled, labeled };

// Vertex bijection plus compatible half-edge bijection commuting with the involution.
// With labeled tails every tail is fixed.
std::uint64_t automorphism_order(const FeynmanGraph& g, TailConvention tails = TailConvention::unlabeled);

// Lexicographically least encoding over all relabelings; equal iff isomorphic.
std::vector<int> canonical_form(const FeynmanGraph& g);
bool isomorphic(const FeynmanGraph& a, const FeynmanGraph& b);

// Fully symmetric d-linear form on C^dim, stored densely (dim^d entries, first index fastest).
class SymmetricTensor {
 public:
  SymmetricTensor(int dim, int order);
  static SymmetricTensor from_matrix(const CMatrix& c);
  static SymmetricTensor from_scalar(Complex c, int order);

  int dim() const { return dim_; }
  int order() const { return order_; }
  Complex at(const std::vector<int>& idx) const;
  void set(const std::vector<int>& idx, Complex value);
  const std::vector<Complex>& data() const { return data_; }
  std::size_t flat_index(const std::vector<int>& idx) const;

  // Averages over index permutations.
  SymmetricTensor symmetrized() const;
  bool is_symmetric(double tol = 1e-12) const;
  SymmetricTensor scaled(Complex s) const;

 private:
  int dim_;
  int order_;
  std::vector<Complex> data_;
};

// I(x) = sum_d C_d(x, ..., x); the Taylor vertex tensor is d! C_d.
class Interaction {
 public:
  Interaction() = default;
  explicit Interaction(int dim) : dim_(dim) {}
  // I(x) = x^T c x with c symmetric.
  static Interaction quadratic(const CMatrix& c);

  int dim() const { return dim_; }
  void set_term(SymmetricTensor c);
  bool has_degree(int d) const { return terms_.count(d) != 0; }
  const SymmetricTensor& term(int d) const;
  const std::map<int, SymmetricTensor>& terms() const { return terms_; }
  Complex evaluate(const CVector& x) const;
  bool is_zero() const;

 private:
  int dim_ = 0;
  std::map<int, SymmetricTensor> terms_;
};

struct PropagatorKernel {
  CMatrix matrix;
  double L1 = 0.0;
  double L2 = std::numeric_limits<double>::infinity();
  Complex lambda{0.0, 0.0};
};

// Qgf (D + lambda)^{-1} (e^{-L1 (D+lambda)} - e^{-L2 (D+lambda)}), i.e. the integral
// of e^{-lambda t} Qgf e^{-tD} over [L1, L2]. L2 may be infinite.
PropagatorKernel heat_kernel_propagator(const CMatrix& generator, const CMatrix& gauge_fixing, double L1, double L2,
                                        Complex lambda = {0.0, 0.0});

// oscillatory: vertices i T_d, edges i K (stationary phase with i/hbar).
// damped: vertices -T_d, edges K (real Gaussian e^{-x.Qx/2 - I(x)}).
enum class WeightConvention { oscillatory, damped };

// Full contraction: tails -> external, edges -> symmetric part of the propagator,
// vertices -> d! C_d.
Complex graph_weight(const FeynmanGraph& g, const PropagatorKernel& propagator, const Interaction& interaction,
                     const CVector& external, WeightConvention convention = WeightConvention::oscillatory);

enum class Grading { vertices_plus_loops, vertices };

// Sum over connected graphs with at most max_vertices vertices of weight / |Aut|, graded by
// hbar^{V + loops} (or by the vertex count). Computed as a sum over labeled Wick structures
// divided by V! prod d_i!. Degrees 1..4 only.
HbarPolynomial gamma_sum(const PropagatorKernel& propagator, const Interaction& interaction, const CVector& external,
                         int max_vertices, WeightConvention convention = WeightConvention::oscillatory,
                         Grading grading = Grading::vertices_plus_loops);

// I(phi) = 1/2 phi^T G phi + c with G and c formal series in hbar.
struct EffectiveQuadratic {
  MatrixSeries kernel;
  HbarPolynomial constant;

  // hbar I_0 with I_0 quadratic: G = 2 hbar C_2.
  static EffectiveQuadratic from_interaction(const Interaction& interaction, int max_order);
  int max_order() const { return kernel.max_order(); }
  Complex evaluate(const CVector& phi, Complex hbar) const;
};

// Scale-L2 interaction from scale-L1 through the window propagator P:
// G' = G (1 + P G)^{-1}, c' = c + (i hbar / 2) log det(1 + P G), as series in hbar.
EffectiveQuadratic rge_evolve(const EffectiveQuadratic& at_L1, const PropagatorKernel& window);

}  // namespace rbf
