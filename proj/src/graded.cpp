#include "ruelle_bf/graded.hpp"

#include <cmath>
#include <numeric>

#include "ruelle_bf/error.hpp"
#include "ruelle_bf/signs.hpp"

namespace rbf {

GradedVectorSpace::GradedVectorSpace(std::map<int, int> dims) : dims_(std::move(dims)) {
  for (const auto& [k, n] : dims_) require(n >= 0, "negative dimension at degree " + std::to_string(k));
}

int GradedVectorSpace::dim(int degree) const {
  auto it = dims_.find(degree);
  return it == dims_.end() ? 0 : it->second;
}

int GradedVectorSpace::total_dim() const {
  return std::accumulate(dims_.begin(), dims_.end(), 0, [](int acc, const auto& kv) { return acc + kv.second; });
}

std::vector<int> GradedVectorSpace::degrees() const {
  std::vector<int> out;
  for (const auto& kv : dims_) out.push_back(kv.first);
  return out;
}

GradedOperator::GradedOperator(GradedVectorSpace space, std::map<int, CMatrix> blocks, int degree_shift)
    : space_(std::move(space)), shift_(degree_shift) {
  for (const auto& [k, m] : blocks) {
    require(space_.contains(k), "block at degree " + std::to_string(k) + " outside the graded space");
    (void)m;
  }
  for (const auto& [k, n] : space_.dims()) {
    const int rows = space_.dim(k + shift_);
    auto it = blocks.find(k);
    if (it == blocks.end()) {
      blocks_.emplace(k, CMatrix::Zero(rows, n));
      continue;
    }
    require(it->second.rows() == rows && it->second.cols() == n,
            "block at degree " + std::to_string(k) + " has shape " + std::to_string(it->second.rows()) + "x" +
                std::to_string(it->second.cols()) + ", expected " + std::to_string(rows) + "x" + std::to_string(n));
    blocks_.emplace(k, it->second);
  }
}

GradedOperator GradedOperator::identity(const GradedVectorSpace& space) {
  std::map<int, CMatrix> blocks;
  for (const auto& [k, n] : space.dims()) blocks.emplace(k, CMatrix::Identity(n, n));
  return GradedOperator(space, std::move(blocks), 0);
}

GradedOperator GradedOperator::zero(const GradedVectorSpace& space, int degree_shift) {
  return GradedOperator(space, {}, degree_shift);
}

GradedOperator GradedOperator::diagonal(const std::map<int, std::vector<Complex>>& entries) {
  std::map<int, int> dims;
  std::map<int, CMatrix> blocks;
  for (const auto& [k, diag] : entries) {
    const auto n = static_cast<Eigen::Index>(diag.size());
    dims.emplace(k, static_cast<int>(n));
    CMatrix m = CMatrix::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i) m(i, i) = diag[static_cast<std::size_t>(i)];
    blocks.emplace(k, std::move(m));
  }
  return GradedOperator(GradedVectorSpace(std::move(dims)), std::move(blocks), 0);
}

const CMatrix& GradedOperator::block(int degree) const {
  auto it = blocks_.find(degree);
  require(it != blocks_.end(), "no block at degree " + std::to_string(degree));
  return it->second;
}

GradedOperator GradedOperator::compose(const GradedOperator& rhs) const {
  require(space_ == rhs.space_, "composition of operators on different graded spaces");
  std::map<int, CMatrix> blocks;
  for (const auto& [k, n] : space_.dims()) {
    (void)n;
    const int mid = k + rhs.shift_;
    const CMatrix& inner = rhs.block(k);
    if (!space_.contains(mid)) {
      blocks.emplace(k, CMatrix::Zero(space_.dim(k + rhs.shift_ + shift_), inner.cols()));
      continue;
    }
    blocks.emplace(k, block(mid) * inner);
  }
  return GradedOperator(space_, std::move(blocks), shift_ + rhs.shift_);
}

GradedOperator GradedOperator::operator+(const GradedOperator& rhs) const {
  require(space_ == rhs.space_ && shift_ == rhs.shift_, "sum of incompatible graded operators");
  std::map<int, CMatrix> blocks;
  for (const auto& [k, m] : blocks_) blocks.emplace(k, m + rhs.block(k));
  return GradedOperator(space_, std::move(blocks), shift_);
}

GradedOperator GradedOperator::operator-(const GradedOperator& rhs) const { return *this + rhs * Complex(-1.0, 0.0); }

GradedOperator GradedOperator::operator*(Complex s) const {
  std::map<int, CMatrix> blocks;
  for (const auto& [k, m] : blocks_) blocks.emplace(k, m * s);
  return GradedOperator(space_, std::move(blocks), shift_);
}

CMatrix GradedOperator::to_dense() const {
  std::map<int, Eigen::Index> offset;
  Eigen::Index total = 0;
  for (const auto& [k, n] : space_.dims()) {
    offset[k] = total;
    total += n;
  }
  CMatrix out = CMatrix::Zero(total, total);
  for (const auto& [k, m] : blocks_) {
    if (m.size() == 0) continue;
    out.block(offset.at(k + shift_), offset.at(k), m.rows(), m.cols()) = m;
  }
  return out;
}

GradedOperator graded_commutator(const GradedOperator& a, const GradedOperator& b) {
  const int sign = signs::parity(a.degree_shift() * b.degree_shift());
  return a.compose(b) - b.compose(a) * Complex(sign, 0.0);
}

Complex supertrace(const GradedOperator& op) {
  if (!op.is_degree_preserving()) fail(ErrorCode::invalid_argument, "supertrace: not degree-preserving");
  Complex acc(0.0, 0.0);
  for (const auto& [k, m] : op.blocks()) acc += static_cast<double>(signs::form_degree(k)) * m.trace();
  return acc;
}

Complex superdeterminant(const GradedOperator& op) {
  if (!op.is_degree_preserving()) fail(ErrorCode::invalid_argument, "superdeterminant: not degree-preserving");
  Complex acc(1.0, 0.0);
  for (const auto& [k, m] : op.blocks()) {
    const Determinant det = lu_determinant(m);
    if (det.singular) throw SingularBlockError(k, "superdeterminant: singular block at degree " + std::to_string(k));
    acc *= signs::form_degree(k) > 0 ? det.value : Complex(1.0, 0.0) / det.value;
  }
  return acc;
}

double gaussian_partition(const GradedOperator& op) { return 1.0 / std::sqrt(std::abs(superdeterminant(op))); }

ToyBFComplex::ToyBFComplex(CMatrix d, CMatrix iota) : d_(std::move(d)), iota_(std::move(iota)) {
  require(d_.rows() == d_.cols(), "toy complex: d must be square");
  require(iota_.rows() == d_.rows() && iota_.cols() == d_.cols(), "toy complex: iota and d have different shapes");
  even_ = iota_ * d_;
  odd_ = d_ * iota_;
  if (lu_determinant(even_).singular) {
    fail(ErrorCode::resonance, "zero is a Pollicott-Ruelle resonance of the toy model");
  }
}

ToyBFComplex ToyBFComplex::from_generator(const CMatrix& generator) {
  return ToyBFComplex(generator, CMatrix::Identity(generator.rows(), generator.cols()));
}

GradedVectorSpace ToyBFComplex::space() const {
  const int n = static_cast<int>(dim());
  return GradedVectorSpace({{0, n}, {1, n}});
}

GradedOperator ToyBFComplex::differential() const {
  return GradedOperator(space(), {{0, d_}, {1, CMatrix::Zero(0, dim())}}, 1);
}

GradedOperator ToyBFComplex::contraction() const {
  return GradedOperator(space(), {{0, CMatrix::Zero(0, dim())}, {1, iota_}}, -1);
}

GradedOperator ToyBFComplex::lie_derivative() const { return graded_commutator(contraction(), differential()); }

PartitionResult toy_bf_partition(const ToyBFComplex& complex, Complex hbar) {
  const auto n = complex.dim();
  const CMatrix shifted = complex.generator() + hbar * CMatrix::Identity(n, n);
  const CMatrix w = solve(complex.odd_generator(), complex.d(), "toy complex: odd generator is singular");
  const CMatrix gauge_fixed = complex.iota() * (complex.d() + hbar * w);

  const Determinant direct = lu_determinant(shifted);
  const Determinant gauge = lu_determinant(gauge_fixed);

  PartitionResult out;
  out.direct = std::abs(direct.value);
  out.gauge_fixed = std::abs(gauge.value);
  out.resonance = direct.singular || gauge.singular;
  out.value = out.resonance ? 0.0 : out.gauge_fixed;
  const double scale = std::max(out.direct, out.gauge_fixed);
  out.relative_defect = scale > 0.0 ? std::abs(out.direct - out.gauge_fixed) / scale : 0.0;
  return out;
}

CVector partition_zeros(const ToyBFComplex& complex) {
  const CMatrix w = solve(complex.odd_generator(), complex.d(), "toy complex: odd generator is singular");
  const CMatrix b = complex.iota() * w;
  const CMatrix a = complex.generator();
  return eigenvalues(-solve(b, a, "toy complex: gauge-fixed hbar coefficient is singular"));
}

}  // namespace rbf
