#pragma once

#include <map>
#include <vector>

#include "ruelle_bf/linalg.hpp"

namespace rbf {

class GradedVectorSpace {
 public:
  GradedVectorSpace() = default;
  explicit GradedVectorSpace(std::map<int, int> dims);

  const std::map<int, int>& dims() const { return dims_; }
  int dim(int degree) const;
  int total_dim() const;
  std::vector<int> degrees() const;
  bool contains(int degree) const { return dims_.count(degree) != 0; }

  bool operator==(const GradedVectorSpace& o) const { return dims_ == o.dims_; }

 private:
  std::map<int, int> dims_;
};

// Endomorphism of a graded space that raises degree by degree_shift.
// block(k) maps V_k -> V_{k+shift}; it has shape dim(k+shift) x dim(k).
class GradedOperator {
 public:
  GradedOperator(GradedVectorSpace space, std::map<int, CMatrix> blocks, int degree_shift = 0);

  static GradedOperator identity(const GradedVectorSpace& space);
  static GradedOperator zero(const GradedVectorSpace& space, int degree_shift = 0);
  static GradedOperator diagonal(const std::map<int, std::vector<Complex>>& entries);

  const GradedVectorSpace& space() const { return space_; }
  int degree_shift() const { return shift_; }
  bool is_degree_preserving() const { return shift_ == 0; }
  const CMatrix& block(int degree) const;
  const std::map<int, CMatrix>& blocks() const { return blocks_; }

  // (this o rhs)
  GradedOperator compose(const GradedOperator& rhs) const;

  GradedOperator operator+(const GradedOperator& rhs) const;
  GradedOperator operator-(const GradedOperator& rhs) const;
  GradedOperator operator*(Complex s) const;
  GradedOperator operator*(const GradedOperator& rhs) const { return compose(rhs); }

  // Full block matrix on the direct sum, degrees in increasing order.
  CMatrix to_dense() const;

 private:
  GradedVectorSpace space_;
  std::map<int, CMatrix> blocks_;
  int shift_ = 0;
};

// [a, b] = ab - (-1)^{|a||b|} ba
GradedOperator graded_commutator(const GradedOperator& a, const GradedOperator& b);

Complex supertrace(const GradedOperator& op);
Complex superdeterminant(const GradedOperator& op);
double gaussian_partition(const GradedOperator& op);

// Two-term complex V0 --d--> V1 with contraction iota : V1 -> V0.
// L = iota d on V0, d iota on V1.
class ToyBFComplex {
 public:
  ToyBFComplex(CMatrix d, CMatrix iota);
  // d = L, iota = identity.
  static ToyBFComplex from_generator(const CMatrix& generator);

  Eigen::Index dim() const { return d_.rows(); }
  const CMatrix& d() const { return d_; }
  const CMatrix& iota() const { return iota_; }
  const CMatrix& generator() const { return even_; }
  const CMatrix& odd_generator() const { return odd_; }

  GradedVectorSpace space() const;
  GradedOperator differential() const;
  GradedOperator contraction() const;
  // [iota, d] = iota d + d iota
  GradedOperator lie_derivative() const;

 private:
  CMatrix d_, iota_, even_, odd_;
};

struct PartitionResult {
  double value = 0.0;
  double direct = 0.0;
  double gauge_fixed = 0.0;
  double relative_defect = 0.0;
  bool resonance = false;
};

// |det(L + hbar)| evaluated directly and via the gauge-fixed form iota (d + hbar L1^{-1} d).
PartitionResult toy_bf_partition(const ToyBFComplex& complex, Complex hbar);

// Zeros in hbar of hbar -> det(iota (d + hbar L1^{-1} d)).
CVector partition_zeros(const ToyBFComplex& complex);

}  // namespace rbf
