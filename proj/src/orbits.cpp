#include "ruelle_bf/orbits.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <map>
#include <sstream>
#include <tuple>

#include "ruelle_bf/error.hpp"

namespace rbf {

namespace {

constexpr double kUnitCircleTol = 1e-9;

std::array<BigInt, 4> multiply(const std::array<BigInt, 4>& x, const std::array<BigInt, 4>& y) {
  return {x[0] * y[0] + x[1] * y[2], x[0] * y[1] + x[1] * y[3], x[2] * y[0] + x[3] * y[2],
          x[2] * y[1] + x[3] * y[3]};
}

bool on_unit_circle(const CVector& ev) {
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    if (std::abs(std::abs(ev(i)) - 1.0) < kUnitCircleTol) return true;
  }
  return false;
}

std::string trim(std::string s) {
  const auto not_space = [](unsigned char c) { return !std::isspace(c); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  return s;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream ss(s);
  while (std::getline(ss, cur, sep)) out.push_back(trim(cur));
  if (!s.empty() && s.back() == sep) out.emplace_back();
  return out;
}

double parse_double(const std::string& s, std::size_t line, const std::string& field) {
  double v = 0.0;
  const auto* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (s.empty() || ec != std::errc() || ptr != end || !std::isfinite(v)) {
    throw ParseError(line, "field '" + field + "' is not a finite number: '" + s + "'");
  }
  return v;
}

std::uint64_t parse_count(const std::string& s, std::size_t line, const std::string& field) {
  std::uint64_t v = 0;
  const auto* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (s.empty() || ec != std::errc() || ptr != end || v == 0) {
    // integral values written as floats ("2.0") are accepted
    double d = parse_double(s, line, field);
    if (d < 1.0 || d != std::floor(d) || d > 9.0e15) throw ParseError(line, "field '" + field + "' must be a positive integer");
    return static_cast<std::uint64_t>(d);
  }
  return v;
}

}  // namespace

Complex Representation::value(std::int64_t winding) const {
  if (kind == Kind::trivial) return {1.0, 0.0};
  return std::polar(1.0, angle * static_cast<double>(winding));
}

CMatrix Representation::matrix(std::int64_t winding) const {
  CMatrix m(1, 1);
  m(0, 0) = value(winding);
  return m;
}

RMatrix HyperbolicToralModel::matrix() const {
  RMatrix m(2, 2);
  m << static_cast<double>(A[0]), static_cast<double>(A[1]), static_cast<double>(A[2]), static_cast<double>(A[3]);
  return m;
}

void HyperbolicToralModel::validate() const {
  if (det() != 1 && det() != -1) fail(ErrorCode::model_invalid, "toral matrix must have determinant +1 or -1");
  if (!(roof > 0.0) || !std::isfinite(roof)) fail(ErrorCode::model_invalid, "roof must be a positive finite number");
}

AnosovReport anosov_check(const HyperbolicToralModel& model) {
  if (model.det() != 1 && model.det() != -1) return {};
  if (!(model.roof > 0.0)) return {};
  const double t = static_cast<double>(model.trace());
  const double d = static_cast<double>(model.det());
  const double disc = t * t - 4.0 * d;
  if (disc <= 0.0) return {};  // complex pair of modulus sqrt|det| = 1, or a double root +-1
  const double root = std::sqrt(disc);
  const double l1 = std::abs((t + root) / 2.0);
  const double l2 = std::abs((t - root) / 2.0);
  if (std::abs(l1 - 1.0) < kUnitCircleTol || std::abs(l2 - 1.0) < kUnitCircleTol) return {};
  const double expanding = std::max(l1, l2);
  return {true, std::log(expanding) / model.roof};
}

std::array<BigInt, 4> matrix_power(const HyperbolicToralModel& model, int n) {
  require(n >= 0, "matrix power exponent must be non-negative");
  std::array<BigInt, 4> result{1, 0, 0, 1};
  std::array<BigInt, 4> base{model.A[0], model.A[1], model.A[2], model.A[3]};
  for (int e = n; e > 0; e >>= 1) {
    if (e & 1) result = multiply(result, base);
    base = multiply(base, base);
  }
  return result;
}

BigInt fixed_point_count(const HyperbolicToralModel& model, int n) {
  require(n >= 1, "fixed point count needs n >= 1");
  model.validate();
  if (!anosov_check(model).anosov) fail(ErrorCode::model_invalid, "not Anosov: eigenvalue on the unit circle");
  const auto p = matrix_power(model, n);
  BigInt det = (p[0] - 1) * (p[3] - 1) - p[1] * p[2];
  return boost::multiprecision::abs(det);
}

std::vector<BigInt> prime_orbit_counts(const HyperbolicToralModel& model, int n_max) {
  require(n_max >= 1, "n_max must be at least 1");
  std::vector<BigInt> counts(static_cast<std::size_t>(n_max));
  for (int n = 1; n <= n_max; ++n) {
    BigInt rest = fixed_point_count(model, n);
    for (int d = 1; d < n; ++d) {
      if (n % d == 0) rest -= BigInt(d) * counts[static_cast<std::size_t>(d - 1)];
    }
    if (rest < 0 || rest % n != 0) {
      fail(ErrorCode::internal, "prime orbit sieve is not integral at period " + std::to_string(n));
    }
    counts[static_cast<std::size_t>(n - 1)] = rest / n;
  }
  return counts;
}

std::vector<PrimeOrbit> enumerate_prime_orbits(const HyperbolicToralModel& model, int n_max) {
  const auto counts = prime_orbit_counts(model, n_max);
  std::vector<PrimeOrbit> out;
  for (int n = 1; n <= n_max; ++n) {
    const BigInt& c = counts[static_cast<std::size_t>(n - 1)];
    if (c == 0) continue;
    if (c > BigInt(std::numeric_limits<std::uint64_t>::max())) {
      fail(ErrorCode::out_of_range, "prime orbit count at period " + std::to_string(n) + " exceeds 64 bits");
    }
    const auto p = matrix_power(model, n);
    PrimeOrbit orbit;
    orbit.length = n * model.roof;
    orbit.period = n;
    orbit.poincare.resize(2, 2);
    orbit.poincare << p[0].convert_to<double>(), p[1].convert_to<double>(), p[2].convert_to<double>(),
        p[3].convert_to<double>();
    orbit.rho = model.rep.matrix(n);
    orbit.multiplicity = c.convert_to<std::uint64_t>();
    orbit.m = model.rank();
    out.push_back(std::move(orbit));
  }
  return out;
}

int transversality_sign(const PrimeOrbit& orbit, int j) {
  require(j >= 1, "repetition count must be positive");
  RMatrix pj = RMatrix::Identity(orbit.poincare.rows(), orbit.poincare.cols());
  for (int k = 0; k < j; ++k) pj = pj * orbit.poincare;
  const double det = (RMatrix::Identity(pj.rows(), pj.cols()) - pj).determinant();
  if (det == 0.0) fail(ErrorCode::model_invalid, "non-transverse orbit: det(I - P^j) = 0");
  return det > 0.0 ? 1 : -1;
}

std::vector<PrimeOrbit> parse_length_spectrum(std::istream& in) {
  static const std::vector<std::string> kHeader{"length", "multiplicity", "m", "P_entries", "rho_re", "rho_im"};
  std::string raw;
  std::size_t line_no = 0;
  bool have_header = false;

  struct Key {
    double length;
    int m;
    std::vector<double> p;
    double re, im;
    bool operator<(const Key& o) const { return std::tie(length, m, p, re, im) < std::tie(o.length, o.m, o.p, o.re, o.im); }
  };
  std::map<Key, std::uint64_t> rows;
  std::vector<Key> first_seen;

  while (std::getline(in, raw)) {
    ++line_no;
    if (line_no == 1 && raw.size() >= 3 && raw.compare(0, 3, "\xEF\xBB\xBF") == 0) raw.erase(0, 3);
    const std::string line = trim(raw);
    if (line.empty() || line[0] == '#') continue;
    const auto fields = split(line, ',');
    if (!have_header) {
      if (fields != kHeader) throw ParseError(line_no, "expected header 'length,multiplicity,m,P_entries,rho_re,rho_im'");
      have_header = true;
      continue;
    }
    if (fields.size() != kHeader.size()) {
      throw ParseError(line_no, "expected 6 fields, found " + std::to_string(fields.size()));
    }
    Key key{};
    key.length = parse_double(fields[0], line_no, "length");
    if (!(key.length > 0.0)) throw ParseError(line_no, "length must be positive");
    const std::uint64_t mult = parse_count(fields[1], line_no, "multiplicity");
    const std::uint64_t m = parse_count(fields[2], line_no, "m");
    if (m > 8) throw ParseError(line_no, "m must be at most 8");
    key.m = static_cast<int>(m);
    const auto entries = split(fields[3], ';');
    const std::size_t dim = 2 * m;
    if (entries.size() != dim * dim) {
      throw ParseError(line_no, "P_entries must hold " + std::to_string(dim * dim) + " values, found " +
                                    std::to_string(entries.size()));
    }
    for (const auto& e : entries) key.p.push_back(parse_double(e, line_no, "P_entries"));
    key.re = parse_double(fields[4], line_no, "rho_re");
    key.im = parse_double(fields[5], line_no, "rho_im");
    if (std::abs(std::hypot(key.re, key.im) - 1.0) > kUnitCircleTol) throw ParseError(line_no, "rho is not unitary");

    RMatrix p(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
    for (std::size_t i = 0; i < dim * dim; ++i) p(static_cast<Eigen::Index>(i / dim), static_cast<Eigen::Index>(i % dim)) = key.p[i];
    if (on_unit_circle(eigenvalues(p.cast<Complex>()))) {
      throw ParseError(line_no, "row rejected: Poincare matrix has an eigenvalue on the unit circle");
    }
    auto [it, inserted] = rows.emplace(key, 0);
    if (inserted) first_seen.push_back(key);
    it->second += mult;
  }

  std::vector<PrimeOrbit> out;
  for (const Key& key : first_seen) {
    PrimeOrbit orbit;
    orbit.length = key.length;
    orbit.period = 0;
    orbit.m = key.m;
    const auto dim = static_cast<Eigen::Index>(2 * key.m);
    orbit.poincare.resize(dim, dim);
    for (Eigen::Index i = 0; i < dim * dim; ++i) orbit.poincare(i / dim, i % dim) = key.p[static_cast<std::size_t>(i)];
    orbit.rho = CMatrix::Constant(1, 1, Complex(key.re, key.im));
    orbit.multiplicity = rows.at(key);
    out.push_back(std::move(orbit));
  }
  std::stable_sort(out.begin(), out.end(), [](const PrimeOrbit& a, const PrimeOrbit& b) { return a.length < b.length; });
  return out;
}

std::vector<PrimeOrbit> load_length_spectrum(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::io, "cannot open length spectrum '" + path + "'");
  return parse_length_spectrum(in);
}

}  // namespace rbf
