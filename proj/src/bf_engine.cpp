#include "ruelle_bf/bf_engine.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "ruelle_bf/error.hpp"
#include "ruelle_bf/flat_zeta.hpp"
#include "ruelle_bf/signs.hpp"

namespace rbf {

namespace {

constexpr Complex kI{0.0, 1.0};
constexpr double kInvarianceTol = 1e-8;

}  // namespace

MatrixBFModel::MatrixBFModel(std::vector<GradedBlock> blocks) : blocks_(std::move(blocks)) {
  require(!blocks_.empty(), "matrix BF model needs at least one block");
  std::stable_sort(blocks_.begin(), blocks_.end(), [](const GradedBlock& a, const GradedBlock& b) { return a.degree < b.degree; });
  std::set<int> seen;
  Eigen::Index total = 0;
  for (const auto& b : blocks_) {
    require(b.degree >= 0, "block degree must be non-negative");
    require(seen.insert(b.degree).second, "duplicate block degree " + std::to_string(b.degree));
    offsets_.push_back(total);
    total += 2 * b.complex.dim();
  }
  d_ = CMatrix::Zero(total, total);
  iota_ = CMatrix::Zero(total, total);
  form_degree_.assign(static_cast<std::size_t>(total), 0);
  min_abs_spectrum_ = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < blocks_.size(); ++i) {
    const auto& c = blocks_[i].complex;
    const Eigen::Index n = c.dim();
    const Eigen::Index off = offsets_[i];
    d_.block(off + n, off, n, n) = c.d();
    iota_.block(off, off + n, n, n) = c.iota();
    for (Eigen::Index q = 0; q < n; ++q) {
      form_degree_[static_cast<std::size_t>(off + q)] = blocks_[i].degree;
      form_degree_[static_cast<std::size_t>(off + n + q)] = blocks_[i].degree + 1;
    }
    if (n > 0) min_abs_spectrum_ = std::min(min_abs_spectrum_, eigenvalues(c.generator()).cwiseAbs().minCoeff());
  }
  lie_ = d_ * iota_ + iota_ * d_;
  w_ = solve(lie_, d_, "zero is a Pollicott-Ruelle resonance of the matrix model");
}

MatrixBFModel MatrixBFModel::single(const ToyBFComplex& complex, int degree) {
  return MatrixBFModel({GradedBlock{degree, complex}});
}

MatrixBFModel MatrixBFModel::from_generators(const std::vector<std::pair<int, CMatrix>>& generators) {
  std::vector<GradedBlock> blocks;
  for (const auto& [k, l] : generators) blocks.push_back({k, ToyBFComplex::from_generator(l)});
  return MatrixBFModel(std::move(blocks));
}

CMatrix MatrixBFModel::form_degree_projector(int k) const {
  CMatrix e = CMatrix::Zero(full_dim(), full_dim());
  for (Eigen::Index i = 0; i < full_dim(); ++i) {
    if (form_degree_[static_cast<std::size_t>(i)] == k) e(i, i) = 1.0;
  }
  return e;
}

Complex perturbing_functional(const MatrixBFModel& model, const CVector& a, const CVector& b) {
  require(a.size() == model.full_dim() && b.size() == model.full_dim(), "perturbing functional: vector dimension mismatch");
  return (b.transpose() * model.w() * a)(0, 0);
}

RegularizedPropagator regularized_propagator(const MatrixBFModel& model, double L1, double L2, Complex lambda) {
  RegularizedPropagator out;
  out.L1 = L1;
  out.L2 = L2;
  out.lambda = lambda;
  require(L1 >= 0.0 && L1 <= L2, "propagator window must satisfy 0 <= L1 <= L2");
  if (std::isinf(L2)) {
    const CVector spec = eigenvalues(model.lie_derivative());
    for (Eigen::Index i = 0; i < spec.size(); ++i) {
      if (!((spec(i) + lambda).real() > 0.0)) fail(ErrorCode::non_convergence, "IR divergence: lambda-regularization required");
    }
  }
  out.matrix = heat_kernel_propagator(model.lie_derivative(), model.contraction(), L1, L2, lambda).matrix;
  return out;
}

HbarPolynomial gamma_int(const MatrixBFModel& model, const RegularizedPropagator& propagator, const CVector& a,
                         const CVector& b, int K) {
  require(K >= 1, "gamma_int: K must be at least 1");
  require(a.size() == model.full_dim() && b.size() == model.full_dim(), "gamma_int: vector dimension mismatch");
  require(propagator.matrix.rows() == model.full_dim() && propagator.matrix.cols() == model.full_dim(),
          "gamma_int: propagator dimension mismatch");
  const CMatrix m = propagator.matrix * model.w();
  const Eigen::RowVectorXcd left = b.transpose() * model.w();
  HbarPolynomial out(K);
  CVector chain = a;
  for (int n = 1; n <= K; ++n) {
    const double sign = (n % 2 == 1) ? 1.0 : -1.0;
    out.set_coefficient(n, sign * kI * (left * chain)(0, 0));
    chain = m * chain;
  }
  return out;
}

HbarPolynomial gamma_tr(const MatrixBFModel& model, Complex lambda, int K) {
  require(K >= 1, "gamma_tr: K must be at least 1");
  const RegularizedPropagator p = regularized_propagator(model, 0.0, std::numeric_limits<double>::infinity(), lambda);
  const CMatrix m = p.matrix * model.w();
  std::set<int> degrees(model.form_degrees().begin(), model.form_degrees().end());
  HbarPolynomial out(K);
  CMatrix power = CMatrix::Identity(m.rows(), m.cols());
  for (int n = 1; n + 1 <= K; ++n) {
    power = power * m;
    Complex acc(0.0, 0.0);
    for (int k : degrees) {
      Complex tr(0.0, 0.0);
      for (Eigen::Index i = 0; i < m.rows(); ++i) {
        if (model.form_degrees()[static_cast<std::size_t>(i)] == k) tr += power(i, i);
      }
      acc += static_cast<double>(signs::loop(k)) * tr;
    }
    const double sign = (n % 2 == 0) ? 1.0 : -1.0;
    out.set_coefficient(n + 1, sign / n * acc);
  }
  return out;
}

HbarPolynomial gamma_tr_closed_form(const MatrixBFModel& model, Complex lambda, int K) {
  require(K >= 1, "gamma_tr: K must be at least 1");
  HbarPolynomial out(K);
  for (const auto& blk : model.blocks()) {
    const auto n = blk.complex.dim();
    const CMatrix resolvent =
        inverse(blk.complex.generator() + lambda * CMatrix::Identity(n, n), "IR divergence: lambda-regularization required");
    CMatrix power = CMatrix::Identity(n, n);
    for (int q = 1; q + 1 <= K; ++q) {
      power = power * resolvent;
      const double sign = (q % 2 == 0) ? 1.0 : -1.0;
      out.add_to_coefficient(q + 1, sign / q * static_cast<double>(signs::loop(blk.degree)) * power.trace());
    }
  }
  return out;
}

double simplex_volume(int n, double t) {
  require(n >= 1, "simplex dimension must be at least 1");
  require(t > 0.0, "simplex size must be positive");
  return std::pow(t, n - 1) / std::tgamma(static_cast<double>(n));
}

ProjectionCheck projection_lemma_check(const MatrixBFModel& model, const CMatrix& b_op) {
  const auto n = model.full_dim();
  require(b_op.rows() == n && b_op.cols() == n, "projection check: operator dimension mismatch");
  const CMatrix q = column_space_basis(model.contraction());
  const CMatrix leak = (CMatrix::Identity(n, n) - q * q.adjoint()) * b_op * q;
  ProjectionCheck out;
  out.invariance_defect = leak.norm();
  if (out.invariance_defect > kInvarianceTol * std::max(1.0, b_op.norm())) {
    fail(ErrorCode::invalid_argument,
         "projection check: operator does not leave im(iota) invariant (defect " + std::to_string(out.invariance_defect) + ")");
  }
  const CMatrix projector = solve(model.lie_derivative(), model.contraction() * model.differential(),
                                  "zero is a Pollicott-Ruelle resonance of the matrix model");
  out.lhs = (b_op * projector).trace();
  out.rhs = (q.adjoint() * b_op * q).trace();
  out.holds = std::abs(out.lhs - out.rhs) < 1e-10 * std::max(1.0, std::abs(out.rhs));
  return out;
}

Complex expectation_closed_form(const MatrixBFModel& model, Complex hbar) {
  Complex out(1.0, 0.0);
  for (const auto& blk : model.blocks()) {
    const auto n = blk.complex.dim();
    const CMatrix& l = blk.complex.generator();
    const Complex ratio = lu_determinant(l + hbar * CMatrix::Identity(n, n)).value / lu_determinant(l).value;
    out *= signs::form_degree(blk.degree) > 0 ? ratio : Complex(1.0, 0.0) / ratio;
  }
  return out;
}

ExpectationResult expectation_value(const MatrixBFModel& model, Complex hbar, int K) {
  require(K >= 1, "expectation: K must be at least 1");
  if (!(std::abs(hbar) < model.min_abs_spectrum())) {
    fail(ErrorCode::out_of_range,
         "hbar outside the convergence radius min|spec L| = " + std::to_string(model.min_abs_spectrum()) +
             "; evaluate the closed form directly");
  }
  const HbarPolynomial exponent = gamma_tr(model, {0.0, 0.0}, K + 1).divide_by_hbar();
  ExpectationResult out;
  const Complex s = exponent.evaluate(hbar);
  out.series_value = std::exp(s);
  out.closed_form = expectation_closed_form(model, hbar);
  Complex log_closed(0.0, 0.0);
  for (const auto& blk : model.blocks()) {
    const CVector mu = eigenvalues(blk.complex.generator());
    Complex acc(0.0, 0.0);
    for (Eigen::Index i = 0; i < mu.size(); ++i) acc += log1p(hbar / mu(i));
    log_closed += static_cast<double>(signs::form_degree(blk.degree)) * acc;
  }
  out.log_defect = s - log_closed;
  out.defect = std::abs(out.series_value - out.closed_form);
  return out;
}

PartitionResult bf_partition(const MatrixBFModel& model, Complex hbar) {
  PartitionResult out;
  out.value = out.direct = out.gauge_fixed = 1.0;
  for (const auto& blk : model.blocks()) {
    const PartitionResult z = toy_bf_partition(blk.complex, hbar);
    out.resonance = out.resonance || z.resonance;
    const bool even = signs::form_degree(blk.degree) > 0;
    out.direct = even ? out.direct * z.direct : out.direct / z.direct;
    out.gauge_fixed = even ? out.gauge_fixed * z.gauge_fixed : out.gauge_fixed / z.gauge_fixed;
    out.value = even ? out.value * z.value : out.value / z.value;
  }
  const double scale = std::max(std::abs(out.direct), std::abs(out.gauge_fixed));
  out.relative_defect =
      (scale > 0.0 && std::isfinite(scale)) ? std::abs(out.direct - out.gauge_fixed) / scale : 0.0;
  return out;
}

DoubledTheory doubled_theory(const MatrixBFModel& model, const RegularizedPropagator& propagator, int form_degree) {
  const auto n = model.full_dim();
  require(propagator.matrix.rows() == n && propagator.matrix.cols() == n, "doubled theory: propagator dimension mismatch");
  CMatrix w = model.w();
  if (form_degree >= 0) w = model.form_degree_projector(form_degree + 1) * w * model.form_degree_projector(form_degree);
  CMatrix c2 = CMatrix::Zero(2 * n, 2 * n);
  c2.block(0, n, n, n) = 0.5 * w.transpose();
  c2.block(n, 0, n, n) = 0.5 * w;
  DoubledTheory out;
  out.interaction = Interaction::quadratic(c2);
  out.propagator.matrix = CMatrix::Zero(2 * n, 2 * n);
  out.propagator.matrix.block(0, n, n, n) = propagator.matrix;
  out.propagator.matrix.block(n, 0, n, n) = propagator.matrix.transpose();
  out.propagator.L1 = propagator.L1;
  out.propagator.L2 = propagator.L2;
  out.propagator.lambda = propagator.lambda;
  return out;
}

Complex chain_diagram_value(const MatrixBFModel& model, const RegularizedPropagator& propagator, const CVector& a,
                            const CVector& b, int vertices) {
  const auto n = model.full_dim();
  require(a.size() == n && b.size() == n, "chain diagram: vector dimension mismatch");
  const DoubledTheory theory = doubled_theory(model, propagator);
  CVector phi(2 * n);
  phi << a, b;
  const FeynmanGraph g = make_chain(vertices);
  return graph_weight(g, theory.propagator, theory.interaction, phi) / static_cast<double>(automorphism_order(g));
}

Complex cycle_diagram_value(const MatrixBFModel& model, const RegularizedPropagator& propagator, int vertices) {
  const FeynmanGraph g = make_cycle(vertices);
  const double aut = static_cast<double>(automorphism_order(g));
  const CVector none = CVector::Zero(2 * model.full_dim());
  std::set<int> degrees(model.form_degrees().begin(), model.form_degrees().end());
  Complex acc(0.0, 0.0);
  for (int k : degrees) {
    const DoubledTheory theory = doubled_theory(model, propagator, k);
    acc += static_cast<double>(signs::loop(k)) * graph_weight(g, theory.propagator, theory.interaction, none) / aut;
  }
  return acc;
}

BridgeResult zeta_expectation_bridge(const std::vector<PrimeOrbit>& orbits, int m, Complex hbar, double L_max,
                                     Complex lambda0) {
  require(m >= 0, "rank m must be non-negative");
  const ZetaEvaluator eval(orbits, L_max);
  BridgeResult out;
  const ZetaSeries e1 = eval.euler(lambda0 + hbar);
  const ZetaSeries e0 = eval.euler(lambda0);
  out.euler_ratio = std::exp(static_cast<double>(signs::rank(m)) * (e1.value - e0.value));
  double tail_euler = e1.tail_bound + e0.tail_bound;
  out.converged = e1.converged && e0.converged;

  Complex log_det(0.0, 0.0);
  double tail_det = 0.0;
  for (int k = 0; k <= 2 * m; ++k) {
    if (!eval.terms().empty() && k > eval.max_degree()) break;
    const ZetaSeries z1 = eval.log_zeta_k(k, lambda0 + hbar);
    const ZetaSeries z0 = eval.log_zeta_k(k, lambda0);
    log_det += static_cast<double>(signs::form_degree(k)) * (z1.value - z0.value);
    tail_det += z1.tail_bound + z0.tail_bound;
    out.converged = out.converged && z1.converged && z0.converged;
  }
  out.determinant_ratio = std::exp(log_det);
  out.defect = std::abs(out.euler_ratio - out.determinant_ratio);
  const double scale = std::max(std::abs(out.euler_ratio), std::abs(out.determinant_ratio));
  out.tail_bound = scale * (std::expm1(tail_euler) + std::expm1(tail_det));
  if (!out.converged) out.tail_bound = std::numeric_limits<double>::infinity();
  return out;
}

}  // namespace rbf
