#include <chrono>
#include <cstdio>
#include <functional>
#include <set>
#include <string>

#include "ruelle_bf/bf_engine.hpp"
#include "ruelle_bf/error.hpp"
#include "ruelle_bf/feynman.hpp"
#include "ruelle_bf/flat_zeta.hpp"
#include "ruelle_bf/graded.hpp"
#include "ruelle_bf/orbits.hpp"
#include "support.hpp"

using namespace rbf;
using testing::random_matrix;
using testing::random_vector;
using testing::rel_err;

namespace {

const double kInf = std::numeric_limits<double>::infinity();

struct Outcome {
  bool pass = true;
  std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(const char* f, double a) {
  char buf[96];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

// --- criterion 1 -----------------------------------------------------------

Outcome alternating_minors() {
  const auto t0 = std::chrono::steady_clock::now();
  double worst = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    const int d = 1 + trial % 6;
    const RMatrix p = testing::random_real_matrix(d, 2.0);
    double alt = 0.0;
    for (int k = 0; k <= d; ++k) alt += ((k % 2) ? -1.0 : 1.0) * exterior_power_trace(p, k);
    const double det = (RMatrix::Identity(d, d) - p).determinant();
    worst = std::max(worst, std::abs(alt - det) / std::max(std::abs(det), 1e-300));
  }
  const double dt = seconds_since(t0);
  return {worst <= 1e-9 && dt < 1.0, "max rel err " + fmt("%.2e", worst) + ", " + fmt("%.3f s", dt)};
}

// --- criterion 2 -----------------------------------------------------------

using Mat = std::array<std::int64_t, 4>;

Mat mat_mul(const Mat& a, const Mat& b) {
  return {a[0] * b[0] + a[1] * b[2], a[0] * b[1] + a[1] * b[3], a[2] * b[0] + a[3] * b[2], a[2] * b[1] + a[3] * b[3]};
}

std::int64_t mod(std::int64_t a, std::int64_t m) { return ((a % m) + m) % m; }

// Periodic points of A^n as lattice points x / den with (A^n - I) x in den Z^2, plus
// the minimal period of each under A.
std::vector<int> lattice_periods(const Mat& a, int n) {
  Mat p{1, 0, 0, 1};
  for (int i = 0; i < n; ++i) p = mat_mul(p, a);
  const Mat b{p[0] - 1, p[1], p[2], p[3] - 1};
  const std::int64_t den = std::llabs(b[0] * b[3] - b[1] * b[2]);
  std::vector<int> periods;
  for (std::int64_t x = 0; x < den; ++x) {
    for (std::int64_t y = 0; y < den; ++y) {
      if (mod(b[0] * x + b[1] * y, den) != 0 || mod(b[2] * x + b[3] * y, den) != 0) continue;
      std::int64_t u = x, v = y;
      int period = 0;
      do {
        const std::int64_t nu = mod(a[0] * u + a[1] * v, den), nv = mod(a[2] * u + a[3] * v, den);
        u = nu;
        v = nv;
        ++period;
      } while (u != x || v != y);
      periods.push_back(period);
    }
  }
  return periods;
}

Outcome cat_census() {
  const Mat a{2, 1, 1, 1};
  HyperbolicToralModel model;
  const std::array<int, 3> fixed{1, 5, 16}, prime{1, 2, 5};
  const auto counts = prime_orbit_counts(model, 20);
  bool ok = true;
  for (int n = 1; n <= 3; ++n) {
    const auto periods = lattice_periods(a, n);
    const auto minimal = std::count(periods.begin(), periods.end(), n);
    const auto idx = static_cast<std::size_t>(n - 1);
    ok = ok && fixed_point_count(model, n) == fixed[idx] && static_cast<int>(periods.size()) == fixed[idx];
    ok = ok && counts[idx] == prime[idx] && minimal / n == prime[idx];
  }
  for (int n = 1; n <= 20; ++n) {
    BigInt sum = 0;
    for (int d = 1; d <= n; ++d) {
      if (n % d == 0) sum += d * counts[static_cast<std::size_t>(d - 1)];
    }
    ok = ok && sum == fixed_point_count(model, n);
  }
  return {ok, "fixed (1, 5, 16), prime (1, 2, 5), sieve exact for n <= 20"};
}

// --- criterion 3 -----------------------------------------------------------

Outcome zeta_factorization() {
  const auto t0 = std::chrono::steady_clock::now();
  const double L = 12.0;
  const auto orbits = enumerate_prime_orbits(HyperbolicToralModel{}, 12);
  bool exact = true, within = true;
  double worst_ratio = 0.0;
  for (double lambda : {2.5, 3.0, 4.0}) {
    const auto e = euler_product_log_zeta(orbits, lambda, L);
    const auto a = alternating_assembly(orbits, 1, lambda, L);
    exact = exact && e.value == a.value && e.converged && a.converged;
    // independent truncations of the two sides
    for (double La : {6.0, 9.0}) {
      const auto e_short = euler_product_log_zeta(orbits, lambda, La);
      const ZetaEvaluator eval(orbits, L);
      const auto by_degree = eval.assembly_by_degree(1, lambda);
      const double gap = std::abs(e_short.value - by_degree.value);
      const double bound = e_short.tail_bound + by_degree.tail_bound;
      within = within && gap <= bound;
      worst_ratio = std::max(worst_ratio, gap / bound);
    }
  }
  const double dt = seconds_since(t0);
  return {exact && within && dt < 5.0, std::string(exact ? "shared truncation defect 0" : "shared truncation defect nonzero") +
                                           ", max gap/tail " + fmt("%.3f", worst_ratio) + ", " + fmt("%.3f s", dt)};
}

// --- criterion 4 -----------------------------------------------------------

MatrixBFModel random_graded_model() {
  std::vector<std::pair<int, CMatrix>> gens;
  const int blocks = testing::uniform_int(1, 3);
  for (int k = 0; k < blocks; ++k) gens.push_back({k, testing::random_with_spectrum(testing::uniform_int(1, 3), 0.25, 0.75, 0.0)});
  return MatrixBFModel::from_generators(gens);
}

Outcome diagram_resummation() {
  const auto t0 = std::chrono::steady_clock::now();
  const int K = 8;
  const double pi = std::acos(-1.0);
  bool ok = true;
  double worst_c = 0.0, min_order = kInf;
  for (int trial = 0; trial < 50; ++trial) {
    const auto model = random_graded_model();
    const double phi = testing::uniform(0.0, 2.0 * pi);
    const double r = model.min_abs_spectrum();
    // remainder of sum_k sum_i log(1 + hbar / mu) past hbar^K, times the value
    double dims = 0.0;
    for (const auto& b : model.blocks()) dims += static_cast<double>(b.complex.dim());
    std::vector<double> defects;
    for (double h : {0.1, 0.05, 0.025}) {
      const auto e = expectation_value(model, std::polar(h, phi), K);
      defects.push_back(e.defect);
      if (h == 0.1) {
        const double c = 2.0 * std::abs(e.closed_form) * dims / ((K + 1) * std::pow(r, K + 1) * (1.0 - h / r));
        const double observed = e.defect / std::pow(h, K + 1);
        worst_c = std::max(worst_c, observed / c);
        ok = ok && observed <= c;
      }
    }
    // Richardson on the observed order log2(d(h) / d(h/2))
    const double p1 = std::log2(defects[0] / defects[1]);
    const double p2 = std::log2(defects[1] / defects[2]);
    const double order = 2.0 * p2 - p1;
    min_order = std::min(min_order, order);
    ok = ok && order >= K + 1 - 0.05;
  }
  const double dt = seconds_since(t0);
  ok = ok && dt < 10.0;
  return {ok, "max defect / (C |hbar|^9) " + fmt("%.3f", worst_c) + ", min Richardson order " + fmt("%.3f", min_order) +
                  ", " + fmt("%.3f s", dt)};
}

// --- criterion 5 -----------------------------------------------------------

Outcome partition_identity() {
  double worst = 0.0, worst_zero = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const Eigen::Index n = 1 + trial % 5;
    CVector mu;
    const CMatrix l = testing::random_with_spectrum(n, 0.5, 2.0, 1.0, &mu);
    const CMatrix iota = CMatrix::Identity(n, n) + 0.2 * random_matrix(n);
    const ToyBFComplex c(solve(iota, l, "iota"), iota);
    const Complex hbar(testing::uniform(-1.0, 1.0), testing::uniform(-1.0, 1.0));
    const auto r = toy_bf_partition(c, hbar);
    Complex oracle(1.0, 0.0);
    for (Eigen::Index i = 0; i < n; ++i) oracle *= mu(i) + hbar;
    worst = std::max({worst, std::abs(r.gauge_fixed - r.direct) / r.direct, std::abs(r.direct - std::abs(oracle)) / std::abs(oracle)});
    const CVector z = partition_zeros(c);
    if (z.size() != n) worst_zero = kInf;
    for (Eigen::Index i = 0; i < n; ++i) {
      double best = kInf;
      for (Eigen::Index j = 0; j < z.size(); ++j) best = std::min(best, std::abs(z(j) + mu(i)));
      worst_zero = std::max(worst_zero, best);
    }
  }
  return {worst <= 1e-9 && worst_zero <= 1e-6,
          "max rel err " + fmt("%.2e", worst) + ", max zero distance " + fmt("%.2e", worst_zero)};
}

// --- criterion 6 -----------------------------------------------------------

Outcome feynman_consistency() {
  double worst = 0.0;
  bool factors = true;
  for (int n = 1; n <= 6; ++n) {
    factors = factors && automorphism_order(make_chain(n)) == 2 &&
              automorphism_order(make_chain(n), TailConvention::labeled) == 1 &&
              automorphism_order(make_cycle(n)) == static_cast<std::uint64_t>(2 * n);
  }
  for (int trial = 0; trial < 4; ++trial) {
    const auto model = MatrixBFModel::from_generators(
        {{0, testing::random_with_spectrum(4, 1.0, 2.0, 0.5)}, {1, testing::random_with_spectrum(4, 1.0, 2.0, 0.5)}});
    const Complex lambda = trial % 2 ? Complex(0.3, 0.0) : Complex(0.0, 0.0);
    const auto p = regularized_propagator(model, 0.0, kInf, lambda);
    const CVector a = random_vector(model.full_dim()), b = random_vector(model.full_dim());
    const auto gi = gamma_int(model, p, a, b, 6);
    const auto gt = gamma_tr(model, lambda, 7);
    for (int n = 1; n <= 6; ++n) {
      worst = std::max(worst, rel_err(chain_diagram_value(model, p, a, b, n), gi.coefficient(n)));
      worst = std::max(worst, rel_err(cycle_diagram_value(model, p, n), gt.coefficient(n + 1)));
    }
  }
  return {worst <= 1e-10 && factors, "max rel err " + fmt("%.2e", worst) +
                                          (factors ? ", |Aut| chain 2 / cycle 2N exact" : ", symmetry factors wrong")};
}

// --- criterion 7 -----------------------------------------------------------

Outcome rge_semigroup() {
  double worst = 0.0;
  const int order = 6;
  for (int trial = 0; trial < 50; ++trial) {
    const Eigen::Index n = 2 + trial % 3;
    const CMatrix d = testing::random_with_spectrum(n, 0.5, 2.0, 0.5);
    const CMatrix q = CMatrix::Identity(n, n) + 0.3 * random_matrix(n);
    CMatrix c = random_matrix(n);
    c = 0.5 * (c + c.transpose()).eval();
    const auto i0 = EffectiveQuadratic::from_interaction(Interaction::quadratic(c), order);
    const double a = testing::uniform(0.1, 1.0), b = a + testing::uniform(0.1, 1.0);
    const auto stepwise = rge_evolve(rge_evolve(i0, heat_kernel_propagator(d, q, 0.0, a)), heat_kernel_propagator(d, q, a, b));
    const auto direct = rge_evolve(i0, heat_kernel_propagator(d, q, 0.0, b));
    for (int p = 0; p <= order; ++p) {
      const double scale = std::max(1.0, direct.kernel.coefficient(p).norm());
      worst = std::max(worst, (stepwise.kernel.coefficient(p) - direct.kernel.coefficient(p)).norm() / scale);
      const double cs = std::max(1.0, std::abs(direct.constant.coefficient(p)));
      worst = std::max(worst, std::abs(stepwise.constant.coefficient(p) - direct.constant.coefficient(p)) / cs);
    }
  }
  return {worst <= 1e-10, "max coefficient defect " + fmt("%.2e", worst)};
}

// --- criterion 8 -----------------------------------------------------------

Outcome flat_determinants() {
  double worst = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const CMatrix b = testing::random_with_spectrum(5, 0.2, 3.0, 1.0);
    const Complex lambda(testing::uniform(0.0, 1.0), testing::uniform(-1.0, 1.0));
    const Complex direct = (b + lambda * CMatrix::Identity(5, 5)).determinant();
    worst = std::max(worst, rel_err(flat_det_via_F(b, lambda), direct));
  }
  HyperbolicToralModel model;
  model.rep = Representation::character(0.3);
  const auto orbits = enumerate_prime_orbits(model, 10);
  bool wiring = true;
  for (int k = 0; k <= 2; ++k) {
    for (Complex lambda : {Complex(2.5, 0.0), Complex(3.0, 1.0)}) {
      wiring = wiring && flat_determinant_orbit(orbits, k, lambda, 10.0) == std::exp(log_zeta_k(orbits, k, lambda, 10.0).value);
    }
  }
  return {worst <= 1e-9 && wiring,
          "max rel err " + fmt("%.2e", worst) + (wiring ? ", orbit wiring exact" : ", orbit wiring mismatch")};
}

// --- criterion 9 -----------------------------------------------------------

Outcome simplex_factor() {
  double worst = 0.0;
  for (double t : {0.5, 1.0, 2.0}) {
    // iterated integral of the constant 1 over 0 <= s_1 <= ... <= s_{N-1} <= t
    const int steps = 2000;
    const double h = t / steps;
    std::vector<double> vol(steps + 1, 1.0);
    worst = std::max(worst, std::abs(vol.back() - simplex_volume(1, t)));
    for (int n = 2; n <= 5; ++n) {
      std::vector<double> next(steps + 1, 0.0);
      for (int i = 1; i <= steps; ++i) {
        const auto u = static_cast<std::size_t>(i);
        next[u] = next[u - 1] + 0.5 * h * (vol[u - 1] + vol[u]);
      }
      vol = next;
      worst = std::max(worst, std::abs(vol.back() - simplex_volume(n, t)) / simplex_volume(n, t));
    }
  }
  return {worst <= 1e-3, "max rel err " + fmt("%.2e", worst)};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"alternating minors equal det(I - P)", alternating_minors},
      {"cat map orbit census", cat_census},
      {"zeta factorization", zeta_factorization},
      {"diagram resummation", diagram_resummation},
      {"partition function identity", partition_identity},
      {"Feynman rules consistency", feynman_consistency},
      {"RGE semigroup law", rge_semigroup},
      {"flat determinant vs zeta-regularized determinant", flat_determinants},
      {"simplex factor", simplex_factor},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failures;
    std::printf("%s criterion %zu: %s (%s)\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(), o.detail.c_str());
  }
  return failures == 0 ? 0 : 1;
}
