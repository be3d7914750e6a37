#include <doctest.h>

#include "ruelle_bf/bf_engine.hpp"
#include "ruelle_bf/error.hpp"
#include "ruelle_bf/signs.hpp"
#include "support.hpp"

using namespace rbf;
using testing::random_matrix;
using testing::random_vector;
using testing::rel_err;

namespace {

const Complex kI(0.0, 1.0);
const double kInf = std::numeric_limits<double>::infinity();

CMatrix diag(std::initializer_list<Complex> v) {
  CVector d(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (Complex x : v) d(i++) = x;
  return d.asDiagonal();
}

MatrixBFModel diag23() { return MatrixBFModel::from_generators({{0, diag({2.0, 3.0})}}); }

MatrixBFModel random_model(int blocks, Eigen::Index n) {
  std::vector<std::pair<int, CMatrix>> g;
  for (int k = 0; k < blocks; ++k) g.push_back({k, testing::random_with_spectrum(n, 1.0, 2.0, 0.5)});
  return MatrixBFModel::from_generators(g);
}

// prod_k prod_i (1 + hbar / mu_ki)^{(-1)^k}
Complex sdet_ratio(const MatrixBFModel& model, Complex hbar) {
  Complex out(1.0, 0.0);
  for (const auto& blk : model.blocks()) {
    const CVector mu = eigenvalues(blk.complex.generator());
    for (Eigen::Index i = 0; i < mu.size(); ++i) {
      const Complex f = 1.0 + hbar / mu(i);
      out = blk.degree % 2 == 0 ? out * f : out / f;
    }
  }
  return out;
}

std::vector<PrimeOrbit> cat_orbits(int n_max) { return enumerate_prime_orbits(HyperbolicToralModel{}, n_max); }

}  // namespace

TEST_CASE("matrix model layout") {
  const auto m = diag23();
  CHECK(m.full_dim() == 4);
  CHECK(m.form_degrees() == std::vector<int>{0, 0, 1, 1});
  CHECK(m.min_abs_spectrum() == doctest::Approx(2.0));
  CHECK_THROWS_AS(MatrixBFModel::from_generators({{0, diag({1.0})}, {0, diag({2.0})}}), Error);
  try {
    MatrixBFModel::from_generators({{0, diag({0.0, 1.0})}});
    FAIL("expected resonance");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::resonance);
  }
}

TEST_CASE("perturbing functional examples") {
  const auto m = diag23();
  CVector a(4), b(4);
  a << 1.0, 1.0, 0.0, 0.0;
  b << 0.0, 0.0, 1.0, 1.0;
  // W maps V0 onto V1 as the identity
  CHECK(std::abs(perturbing_functional(m, a, b) - 2.0) < 1e-14);
  CHECK(std::abs(perturbing_functional(m, b, a)) < 1e-14);
  a << 2.0, -1.0, 5.0, 7.0;
  b << 9.0, 9.0, 3.0, 4.0;
  CHECK(std::abs(perturbing_functional(m, a, b) - 2.0) < 1e-13);
  CHECK_THROWS_AS(perturbing_functional(m, CVector::Ones(3), b), Error);
}

TEST_CASE("regularized propagator") {
  const auto m = diag23();
  const auto p = regularized_propagator(m, 0.0, kInf);
  CHECK((p.matrix.block(0, 2, 2, 2) - diag({0.5, 1.0 / 3.0})).norm() < 1e-14);
  CHECK(p.matrix.block(0, 0, 2, 2).norm() == 0.0);
  CHECK(p.matrix.block(2, 0, 2, 4).norm() == 0.0);

  const auto r = random_model(2, 3);
  const auto lo = regularized_propagator(r, 0.0, 1.3, 0.2);
  const auto hi = regularized_propagator(r, 1.3, kInf, 0.2);
  const auto all = regularized_propagator(r, 0.0, kInf, 0.2);
  CHECK((lo.matrix + hi.matrix - all.matrix).norm() < 1e-12 * all.matrix.norm());
  CHECK(regularized_propagator(r, 0.7, 0.7).matrix.norm() == 0.0);
  CHECK_THROWS_AS(regularized_propagator(r, 2.0, 1.0), Error);

  const auto unstable = MatrixBFModel::from_generators({{0, diag({-1.0, 2.0})}});
  try {
    regularized_propagator(unstable, 0.0, kInf);
    FAIL("expected IR divergence");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::non_convergence);
  }
  CHECK_NOTHROW(regularized_propagator(unstable, 0.0, kInf, 2.0));
  CHECK_NOTHROW(regularized_propagator(unstable, 0.0, 5.0));
}

TEST_CASE("gamma_int") {
  const auto r = random_model(2, 3);
  const auto p = regularized_propagator(r, 0.0, kInf);
  const CVector a = random_vector(r.full_dim());
  const CVector b = random_vector(r.full_dim());
  const auto g = gamma_int(r, p, a, b, 40);
  CHECK(g.coefficient(0) == Complex(0.0, 0.0));
  CHECK(rel_err(g.coefficient(1), kI * perturbing_functional(r, a, b)) < 1e-14);
  CHECK(gamma_int(r, p, a, CVector::Zero(r.full_dim()), 5).is_zero());

  // i hbar <B, W (1 + hbar M)^{-1} A>
  const CMatrix mm = p.matrix * r.w();
  for (Complex hbar : {Complex(0.1, 0.0), Complex(0.05, -0.1)}) {
    const auto n = r.full_dim();
    const CVector x = (CMatrix::Identity(n, n) + hbar * mm).lu().solve(a);
    const Complex expect = kI * hbar * (b.transpose() * r.w() * x)(0, 0);
    CHECK(rel_err(g.evaluate(hbar), expect) < 1e-12);
  }

  // L = I resums to i F hbar / (1 + hbar)
  const auto id = MatrixBFModel::from_generators({{0, CMatrix::Identity(3, 3)}});
  const auto pid = regularized_propagator(id, 0.0, kInf);
  const CVector a6 = random_vector(6), b6 = random_vector(6);
  const Complex f = perturbing_functional(id, a6, b6);
  const auto gid = gamma_int(id, pid, a6, b6, 60);
  for (double hbar : {0.1, 0.3, -0.4}) CHECK(rel_err(gid.evaluate(hbar), kI * f * hbar / (1.0 + hbar)) < 1e-12);
}

TEST_CASE("gamma_tr") {
  const auto m = diag23();
  CHECK(gamma_tr(m, 0.0, 1).is_zero());
  // log det(1 + hbar / L) Taylor coefficients, shifted by one power of hbar
  const auto g = gamma_tr(m, 0.0, 12);
  CHECK(g.coefficient(1) == Complex(0.0, 0.0));
  for (int q = 1; q + 1 <= 12; ++q) {
    const double expect = ((q % 2) ? 1.0 : -1.0) / q * (std::pow(2.0, -q) + std::pow(3.0, -q));
    CHECK(std::abs(g.coefficient(q + 1) - expect) < 1e-14);
  }

  const auto r = random_model(3, 3);
  for (Complex lambda : {Complex(0.0, 0.0), Complex(0.3, 0.1)}) {
    const auto a = gamma_tr(r, lambda, 10);
    const auto b = gamma_tr_closed_form(r, lambda, 10);
    for (int p = 0; p <= 10; ++p) CHECK(std::abs(a.coefficient(p) - b.coefficient(p)) < 1e-10);
  }

  // lambda shift: the regularized coefficients are those of L + lambda
  std::vector<std::pair<int, CMatrix>> gens, shifted;
  const Complex lambda(0.4, -0.2);
  for (const auto& blk : r.blocks()) {
    gens.push_back({blk.degree, blk.complex.generator()});
    shifted.push_back({blk.degree, blk.complex.generator() + lambda * CMatrix::Identity(3, 3)});
  }
  const auto reg = gamma_tr(r, lambda, 8);
  const auto plain = gamma_tr(MatrixBFModel::from_generators(shifted), 0.0, 8);
  for (int p = 0; p <= 8; ++p) CHECK(std::abs(reg.coefficient(p) - plain.coefficient(p)) < 1e-10);

  // lambda -> 0 is continuous with a linear rate
  const auto at0 = gamma_tr(r, 0.0, 6);
  double prev = kInf;
  for (double eps : {1e-2, 1e-3, 1e-4, 1e-5}) {
    const auto at = gamma_tr(r, eps, 6);
    double diff = 0.0;
    for (int p = 0; p <= 6; ++p) diff = std::max(diff, std::abs(at.coefficient(p) - at0.coefficient(p)));
    CHECK(diff < prev);
    CHECK(diff < 50.0 * eps);
    prev = diff;
  }
}

TEST_CASE("graph values match the closed forms") {
  const auto r = random_model(2, 2);
  const auto p = regularized_propagator(r, 0.0, kInf);
  const CVector a = random_vector(r.full_dim());
  const CVector b = random_vector(r.full_dim());
  const auto gi = gamma_int(r, p, a, b, 5);
  const auto gt = gamma_tr(r, 0.0, 6);
  for (int n = 1; n <= 5; ++n) {
    CHECK(rel_err(chain_diagram_value(r, p, a, b, n), gi.coefficient(n)) < 1e-12);
    CHECK(std::abs(cycle_diagram_value(r, p, n) - gt.coefficient(n + 1)) < 1e-12 * std::max(1.0, std::abs(gt.coefficient(n + 1))));
  }
}

TEST_CASE("generic Wick sum on the doubled theory reproduces the loop series") {
  const auto m = MatrixBFModel::from_generators({{0, testing::random_with_spectrum(2, 1.0, 2.0, 0.3)}});
  const auto p = regularized_propagator(m, 0.0, kInf);
  const auto theory = doubled_theory(m, p, 0);
  const auto sum = gamma_sum(theory.propagator, theory.interaction, CVector::Zero(2 * m.full_dim()), 3);
  const auto gt = gamma_tr(m, 0.0, 4);
  for (int q = 2; q <= 4; ++q) {
    const Complex v = static_cast<double>(signs::loop(0)) * sum.coefficient(q);
    CHECK(std::abs(v - gt.coefficient(q)) < 1e-12 * std::max(1.0, std::abs(gt.coefficient(q))));
  }
}

TEST_CASE("simplex volume") {
  CHECK(simplex_volume(1, 3.0) == 1.0);
  CHECK(simplex_volume(2, 3.0) == doctest::Approx(3.0));
  CHECK(simplex_volume(3, 2.0) == doctest::Approx(2.0));
  CHECK_THROWS_AS(simplex_volume(0, 1.0), Error);

  // vol_n(t) = int_0^t vol_{n-1}(s) ds by cumulative trapezoid
  const int steps = 4000;
  const double t = 1.7, h = t / steps;
  std::vector<double> vol(steps + 1, 1.0);
  for (int n = 2; n <= 6; ++n) {
    std::vector<double> next(steps + 1, 0.0);
    for (int i = 1; i <= steps; ++i) next[static_cast<std::size_t>(i)] = next[static_cast<std::size_t>(i - 1)] + 0.5 * h * (vol[static_cast<std::size_t>(i - 1)] + vol[static_cast<std::size_t>(i)]);
    vol = next;
    CHECK(std::abs(vol.back() - simplex_volume(n, t)) < 1e-6);
  }

  // Monte Carlo in the unit cube
  int hits = 0;
  const int samples = 200000;
  for (int s = 0; s < samples; ++s) {
    double acc = 0.0;
    for (int d = 0; d < 3; ++d) acc += testing::uniform(0.0, 1.0);
    if (acc <= 1.0) ++hits;
  }
  CHECK(std::abs(static_cast<double>(hits) / samples - simplex_volume(4, 1.0)) < 5e-3);
}

TEST_CASE("projection lemma") {
  const auto r = random_model(2, 3);
  const auto n = r.full_dim();
  const auto id = projection_lemma_check(r, CMatrix::Identity(n, n));
  CHECK(id.holds);
  CHECK(std::abs(id.rhs - 6.0) < 1e-10);
  const auto flow = projection_lemma_check(r, matrix_exp(-r.lie_derivative()));
  CHECK(flow.holds);
  CHECK(flow.invariance_defect < 1e-10);
  CHECK_THROWS_WITH_AS(projection_lemma_check(r, random_matrix(n)), doctest::Contains("invariant"), Error);
}

TEST_CASE("expectation value") {
  const auto m = diag23();
  const auto zero = expectation_value(m, 0.0, 10);
  CHECK(std::abs(zero.series_value - 1.0) < 1e-15);
  CHECK(std::abs(zero.closed_form - 1.0) < 1e-15);

  const auto e = expectation_value(m, 0.1, 40);
  CHECK(std::abs(e.closed_form - 1.085) < 1e-14);
  CHECK(std::abs(e.series_value - 1.085) < 1e-12);
  CHECK(std::abs(std::log(e.series_value) - std::log(1.085)) < 1e-12);
  CHECK(std::abs(e.log_defect) < 1e-12);

  const auto two = MatrixBFModel::from_generators(
      {{0, testing::random_with_spectrum(2, 2.0, 3.0, 0.5)}, {1, testing::random_with_spectrum(3, 2.0, 3.0, 0.5)}});
  for (Complex hbar : {Complex(0.3, 0.0), Complex(-0.2, 0.4), Complex(0.0, 1.0)}) {
    const auto x = expectation_value(two, hbar, 60);
    const Complex oracle = sdet_ratio(two, hbar);
    CHECK(rel_err(x.closed_form, oracle) < 1e-12);
    CHECK(rel_err(x.series_value, oracle) < 1e-8);
  }

  try {
    expectation_value(m, 2.5, 10);
    FAIL("expected out of range");
  } catch (const Error& err) {
    CHECK(err.code() == ErrorCode::out_of_range);
  }
}

TEST_CASE("expectation times the free partition function") {
  const CMatrix l = testing::random_with_spectrum(3, 1.0, 2.0, 0.5);
  const auto m = MatrixBFModel::from_generators({{0, l}});
  const double z0 = bf_partition(m, 0.0).value;
  CHECK(std::abs(z0 - std::abs(lu_determinant(l).value)) < 1e-12 * z0);
  for (Complex hbar : {Complex(0.5, 0.0), Complex(-0.3, 0.2)}) {
    const double direct = std::abs(lu_determinant(l + hbar * CMatrix::Identity(3, 3)).value);
    CHECK(std::abs(std::abs(expectation_closed_form(m, hbar)) * z0 - direct) < 1e-12 * direct);
    CHECK(std::abs(bf_partition(m, hbar).value - direct) < 1e-10 * direct);
  }
}

TEST_CASE("zeta expectation bridge") {
  const auto orbits = cat_orbits(12);
  const auto at0 = zeta_expectation_bridge(orbits, 1, 0.0, 12.0, 3.0);
  CHECK(at0.euler_ratio == Complex(1.0, 0.0));
  CHECK(at0.defect == 0.0);

  const auto b = zeta_expectation_bridge(orbits, 1, 0.5, 8.0, 3.0);
  CHECK(b.converged);
  CHECK(b.defect <= b.tail_bound);
  const auto far = zeta_expectation_bridge(orbits, 1, 0.5, 12.0, 3.0);
  CHECK(std::abs(far.euler_ratio - b.euler_ratio) <= b.tail_bound);

  const Complex hbar(0.3, 0.7);
  const auto up = zeta_expectation_bridge(orbits, 1, hbar, 10.0, 3.0);
  const auto down = zeta_expectation_bridge(orbits, 1, std::conj(hbar), 10.0, 3.0);
  CHECK(std::abs(up.euler_ratio - std::conj(down.euler_ratio)) < 1e-14);
  CHECK(std::abs(up.determinant_ratio - std::conj(down.determinant_ratio)) < 1e-14);

  const auto slow = zeta_expectation_bridge(orbits, 1, 0.0, 12.0, 0.5);
  CHECK_FALSE(slow.converged);
  CHECK(std::isinf(slow.tail_bound));
}
