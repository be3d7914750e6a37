#include "ruelle_bf/flat_zeta.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ruelle_bf/error.hpp"
#include "ruelle_bf/signs.hpp"

namespace rbf {

namespace {

constexpr double kMergeTol = 1e-12;
constexpr double kExactEntryLimit = 6.7e7;  // products of two entries stay below 2^53

template <typename Matrix, typename Scalar>
Scalar principal_minor_sum(const Matrix& p, int k) {
  require(p.rows() == p.cols(), "exterior power trace needs a square matrix");
  const int n = static_cast<int>(p.rows());
  require(k >= 0 && k <= n, "exterior power degree " + std::to_string(k) + " outside 0.." + std::to_string(n));
  if (k == 0) return Scalar(1.0);
  std::vector<int> idx(static_cast<std::size_t>(k));
  for (int i = 0; i < k; ++i) idx[static_cast<std::size_t>(i)] = i;
  Scalar total(0.0);
  while (true) {
    Scalar minor(0.0);
    if (k == 1) {
      minor = p(idx[0], idx[0]);
    } else if (k == 2) {
      minor = p(idx[0], idx[0]) * p(idx[1], idx[1]) - p(idx[0], idx[1]) * p(idx[1], idx[0]);
    } else {
      Matrix sub(k, k);
      for (int r = 0; r < k; ++r) {
        for (int c = 0; c < k; ++c) sub(r, c) = p(idx[static_cast<std::size_t>(r)], idx[static_cast<std::size_t>(c)]);
      }
      minor = sub.partialPivLu().determinant();
    }
    total += minor;
    int pos = k - 1;
    while (pos >= 0 && idx[static_cast<std::size_t>(pos)] == n - k + pos) --pos;
    if (pos < 0) break;
    ++idx[static_cast<std::size_t>(pos)];
    for (int q = pos + 1; q < k; ++q) idx[static_cast<std::size_t>(q)] = idx[static_cast<std::size_t>(q - 1)] + 1;
  }
  return total;
}

// Elementary symmetric polynomials e_0..e_n of the given values.
std::vector<Complex> elementary_symmetric(const CVector& values) {
  std::vector<Complex> e(static_cast<std::size_t>(values.size()) + 1, Complex(0.0, 0.0));
  e[0] = 1.0;
  for (Eigen::Index i = 0; i < values.size(); ++i) {
    for (Eigen::Index k = i + 1; k >= 1; --k) e[static_cast<std::size_t>(k)] += values(i) * e[static_cast<std::size_t>(k - 1)];
  }
  return e;
}

}  // namespace

Complex exterior_power_trace(const CMatrix& p, int k) { return principal_minor_sum<CMatrix, Complex>(p, k); }

double exterior_power_trace(const RMatrix& p, int k) { return principal_minor_sum<RMatrix, double>(p, k); }

AtomicDistribution::AtomicDistribution(std::vector<Atom> atoms, double t_min) : t_min_(t_min) {
  require(t_min > 0.0, "atomic distribution needs a positive lower time bound");
  std::stable_sort(atoms.begin(), atoms.end(), [](const Atom& a, const Atom& b) { return a.t < b.t; });
  for (const Atom& a : atoms) {
    require(a.t >= t_min * (1.0 - kMergeTol), "atom below the lower time bound");
    require(std::isfinite(a.weight.real()) && std::isfinite(a.weight.imag()), "atom weight is not finite");
    if (!atoms_.empty() && std::abs(a.t - atoms_.back().t) <= kMergeTol * std::max(a.t, atoms_.back().t)) {
      atoms_.back().weight += a.weight;
    } else {
      atoms_.push_back(a);
    }
  }
}

ZetaEvaluator::ZetaEvaluator(const std::vector<PrimeOrbit>& orbits, double L_max) : L_max_(L_max) {
  require(L_max >= 0.0 && std::isfinite(L_max), "L_max must be a finite non-negative number");
  for (const auto& o : orbits) {
    require(o.length > 0.0, "orbit length must be positive");
    require(o.multiplicity >= 1, "orbit multiplicity must be positive");
    require(o.m >= 1, "orbit rank m must be positive");
    require(o.poincare.rows() == 2 * o.m && o.poincare.cols() == 2 * o.m,
            "Poincare matrix must act on the transverse bundle (dimension 2m)");
    require(o.rho.rows() == o.rho.cols() && o.rho.rows() >= 1, "representation matrix must be square");
    horizon_ = std::max(horizon_, o.length);
    max_degree_ = std::max(max_degree_, 2 * o.m);
  }
  const double t_end = std::max(L_max, horizon_) * (1.0 + kMergeTol);

  for (std::size_t i = 0; i < orbits.size(); ++i) {
    const PrimeOrbit& o = orbits[i];
    const auto dim = o.poincare.rows();
    RMatrix pj = RMatrix::Identity(dim, dim);
    CMatrix rj = CMatrix::Identity(o.rho.rows(), o.rho.cols());
    CVector ev;
    for (int j = 1; j * o.length <= t_end; ++j) {
      pj = pj * o.poincare;
      rj = rj * o.rho;
      OrbitTerm term;
      term.t = j * o.length;
      term.orbit = i;
      term.j = j;
      term.multiplicity = static_cast<double>(o.multiplicity);
      term.m = o.m;
      term.rho_trace = rj.trace();
      term.wedge_traces.resize(static_cast<std::size_t>(dim) + 1);
      if (pj.cwiseAbs().maxCoeff() <= kExactEntryLimit) {
        for (int k = 0; k <= dim; ++k) term.wedge_traces[static_cast<std::size_t>(k)] = exterior_power_trace(pj, k);
      } else {
        if (ev.size() == 0) ev = eigenvalues(o.poincare.cast<Complex>());
        CVector evj = ev;
        for (Eigen::Index q = 0; q < ev.size(); ++q) evj(q) = std::pow(ev(q), j);
        const auto e = elementary_symmetric(evj);
        for (int k = 0; k <= dim; ++k) term.wedge_traces[static_cast<std::size_t>(k)] = e[static_cast<std::size_t>(k)].real();
      }
      double det = 0.0;
      double scale = 0.0;
      for (int k = 0; k <= dim; ++k) {
        det += signs::form_degree(k) * term.wedge_traces[static_cast<std::size_t>(k)];
        scale += std::abs(term.wedge_traces[static_cast<std::size_t>(k)]);
      }
      if (!(std::abs(det) >= kSingularTolerance * scale)) {
        fail(ErrorCode::model_invalid, "non-transverse orbit: |det(I - P^j)| below threshold at length " +
                                           std::to_string(term.t));
      }
      term.det_i_minus_p = det;
      terms_.push_back(std::move(term));
    }
  }
  std::stable_sort(terms_.begin(), terms_.end(), [](const OrbitTerm& a, const OrbitTerm& b) {
    if (a.t != b.t) return a.t < b.t;
    if (a.orbit != b.orbit) return a.orbit < b.orbit;
    return a.j < b.j;
  });
}

Complex ZetaEvaluator::coefficient(const OrbitTerm& term, int series, int m) const {
  const Complex base = -term.multiplicity * term.rho_trace / static_cast<double>(term.j);
  if (series == kEulerSeries) return base;
  const double abs_det = std::abs(term.det_i_minus_p);
  if (series == kAssemblySeries) {
    double factor = 0.0;
    const int top = std::min(2 * m, static_cast<int>(term.wedge_traces.size()) - 1);
    for (int k = 0; k <= top; ++k) factor += signs::form_degree(k) * term.wedge_traces[static_cast<std::size_t>(k)];
    factor = signs::rank(m) * (factor / abs_det);
    return base * factor;
  }
  if (series < 0 || series >= static_cast<int>(term.wedge_traces.size())) return Complex(0.0, 0.0);
  return base * (term.wedge_traces[static_cast<std::size_t>(series)] / abs_det);
}

ZetaEvaluator::Envelope ZetaEvaluator::envelope(int series, int m) const {
  std::vector<std::pair<double, double>> slots;
  for (const auto& term : terms_) {
    const double mag = std::abs(coefficient(term, series, m));
    if (!slots.empty() && std::abs(term.t - slots.back().first) <= kMergeTol * term.t) {
      slots.back().second += mag;
    } else {
      slots.emplace_back(term.t, mag);
    }
  }
  slots.erase(std::remove_if(slots.begin(), slots.end(), [](const auto& s) { return s.second == 0.0; }), slots.end());
  Envelope env;
  if (slots.empty()) return env;
  env.empty = false;
  if (slots.size() == 1) {
    env.growth = 1.0 / slots[0].first;
    env.spacing = slots[0].first;
  } else {
    double growth = -std::numeric_limits<double>::infinity();
    double spacing = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i + 1 < slots.size(); ++i) {
      const double dt = slots[i + 1].first - slots[i].first;
      growth = std::max(growth, (std::log(slots[i + 1].second) - std::log(slots[i].second)) / dt);
      spacing = std::min(spacing, dt);
    }
    env.growth = growth + 1.0 / slots.back().first;
    env.spacing = spacing;
  }
  for (const auto& [t, mag] : slots) env.scale = std::max(env.scale, mag * std::exp(-env.growth * t));
  return env;
}

ZetaSeries ZetaEvaluator::sum(int series, int m, Complex lambda) const {
  ZetaSeries out;
  out.lambda = lambda;
  out.k = series;
  out.L_max = L_max_;
  out.value = Complex(0.0, 0.0);
  const double t_end = L_max_ * (1.0 + kMergeTol);
  for (const auto& term : terms_) {
    if (term.t > t_end) break;
    out.value += coefficient(term, series, m) * std::exp(-lambda * term.t);
    ++out.terms;
  }
  const Envelope env = envelope(series, m);
  if (env.empty) {
    out.abscissa = -std::numeric_limits<double>::infinity();
    return out;
  }
  out.abscissa = env.growth;
  const double a = lambda.real();
  if (!(a > env.growth)) {
    out.tail_bound = std::numeric_limits<double>::infinity();
    out.converged = false;
    return out;
  }
  const double start = std::min(L_max_, horizon_);
  const double r = std::exp((env.growth - a) * env.spacing);
  out.tail_bound = env.scale * std::exp((env.growth - a) * start) * r / (1.0 - r);
  return out;
}

ZetaSeries ZetaEvaluator::log_zeta_k(int k, Complex lambda) const {
  require(k >= 0, "form degree must be non-negative");
  require(terms_.empty() || k <= max_degree_, "form degree " + std::to_string(k) + " exceeds 2m");
  return sum(k, 0, lambda);
}

ZetaSeries ZetaEvaluator::euler(Complex lambda) const { return sum(kEulerSeries, 0, lambda); }

ZetaSeries ZetaEvaluator::assembly(int m, Complex lambda) const {
  require(m >= 0, "rank m must be non-negative");
  return sum(kAssemblySeries, m, lambda);
}

ZetaSeries ZetaEvaluator::assembly_by_degree(int m, Complex lambda) const {
  require(m >= 0, "rank m must be non-negative");
  ZetaSeries out;
  out.lambda = lambda;
  out.k = kAssemblySeries;
  out.L_max = L_max_;
  out.value = Complex(0.0, 0.0);
  out.abscissa = -std::numeric_limits<double>::infinity();
  for (int k = 0; k <= 2 * m; ++k) {
    if (!terms_.empty() && k > max_degree_) break;
    const ZetaSeries s = sum(k, 0, lambda);
    out.value += static_cast<double>(signs::form_degree(k)) * s.value;
    out.tail_bound += s.tail_bound;
    out.converged = out.converged && s.converged;
    out.terms = std::max(out.terms, s.terms);
    out.abscissa = std::max(out.abscissa, s.abscissa);
  }
  out.value *= static_cast<double>(signs::rank(m));
  return out;
}

ZetaSeries log_zeta_k(const std::vector<PrimeOrbit>& orbits, int k, Complex lambda, double L_max) {
  return ZetaEvaluator(orbits, L_max).log_zeta_k(k, lambda);
}

ZetaSeries euler_product_log_zeta(const std::vector<PrimeOrbit>& orbits, Complex lambda, double L_max) {
  return ZetaEvaluator(orbits, L_max).euler(lambda);
}

ZetaSeries alternating_assembly(const std::vector<PrimeOrbit>& orbits, int m, Complex lambda, double L_max) {
  return ZetaEvaluator(orbits, L_max).assembly(m, lambda);
}

Complex flat_determinant_orbit(const std::vector<PrimeOrbit>& orbits, int k, Complex lambda, double L_max) {
  return std::exp(log_zeta_k(orbits, k, lambda, L_max).value);
}

AtomicDistribution flat_trace_evolution(const std::vector<PrimeOrbit>& orbits, int k, double t_max) {
  if (orbits.empty()) return {};
  const ZetaEvaluator eval(orbits, t_max);
  require(k >= 0 && k <= eval.max_degree(), "form degree outside 0..2m");
  double t_min = std::numeric_limits<double>::infinity();
  for (const auto& o : orbits) t_min = std::min(t_min, o.length);
  std::vector<Atom> atoms;
  for (const auto& term : eval.terms()) {
    if (term.t > t_max * (1.0 + kMergeTol)) break;
    const double length = orbits[term.orbit].length;
    const double wedge = k < static_cast<int>(term.wedge_traces.size()) ? term.wedge_traces[static_cast<std::size_t>(k)] : 0.0;
    atoms.push_back({term.t, length * term.multiplicity * term.rho_trace * (wedge / std::abs(term.det_i_minus_p))});
  }
  return AtomicDistribution(std::move(atoms), t_min);
}

Complex mellin_transform(const AtomicDistribution& dist, double s, Complex lambda) {
  if (s <= 0.0 && s == std::floor(s)) return Complex(0.0, 0.0);
  const double inv_gamma = 1.0 / std::tgamma(s);
  Complex acc(0.0, 0.0);
  for (const auto& a : dist.atoms()) acc += a.weight * std::pow(a.t, s - 1.0) * std::exp(-lambda * a.t);
  return inv_gamma * acc;
}

Complex mellin_log_det(const AtomicDistribution& dist, Complex lambda) {
  Complex acc(0.0, 0.0);
  for (const auto& a : dist.atoms()) acc -= a.weight / a.t * std::exp(-lambda * a.t);
  return acc;
}

namespace {

CVector shifted_spectrum(const CMatrix& b, Complex lambda) {
  require(b.rows() == b.cols(), "generator must be square");
  CVector mu = eigenvalues(b);
  for (Eigen::Index i = 0; i < mu.size(); ++i) {
    mu(i) += lambda;
    if (!(mu(i).real() > 0.0)) fail(ErrorCode::invalid_argument, "branch cut: eigenvalue with Re(mu + lambda) <= 0");
  }
  return mu;
}

}  // namespace

Complex spectral_zeta(const CMatrix& b, Complex s, Complex lambda) {
  const CVector mu = shifted_spectrum(b, lambda);
  Complex acc(0.0, 0.0);
  for (Eigen::Index i = 0; i < mu.size(); ++i) acc += std::exp(-s * std::log(mu(i)));
  return acc;
}

Complex flat_det_via_F(const CMatrix& b, Complex lambda) {
  const CVector mu = shifted_spectrum(b, lambda);
  Complex log_det(0.0, 0.0);
  for (Eigen::Index i = 0; i < mu.size(); ++i) log_det += std::log(mu(i));
  return std::exp(log_det);
}

bool flat_trace_cyclicity_check(const CMatrix& a, const CMatrix& b) {
  require(a.rows() == a.cols() && b.rows() == b.cols() && a.rows() == b.rows(),
          "cyclicity check needs square matrices of equal size");
  return std::abs((a * b).trace() - (b * a).trace()) < 1e-10;
}

}  // namespace rbf
