#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "ruelle_bf/ruelle_bf.h"

namespace {

const int64_t kCat[4] = {2, 1, 1, 1};

struct OrbitSet {
  rbf_orbit_set* p = nullptr;
  ~OrbitSet() { rbf_orbit_set_free(p); }
};

struct Model {
  rbf_bf_model* p = nullptr;
  ~Model() { rbf_bf_model_free(p); }
};

rbf_complex c(double re, double im = 0.0) { return rbf_complex{re, im}; }

}  // namespace

TEST_CASE("version and status strings") {
  CHECK(std::strlen(rbf_version()) > 0);
  CHECK(std::string(rbf_status_string(RBF_OK)) != std::string(rbf_status_string(RBF_ERR_PARSE)));
  CHECK(std::strlen(rbf_status_string(static_cast<rbf_status>(999))) > 0);
}

TEST_CASE("anosov check and fixed point count") {
  int anosov = 0;
  double gap = 0.0;
  REQUIRE(rbf_catmap_anosov_check(kCat, 1.0, &anosov, &gap) == RBF_OK);
  CHECK(anosov == 1);
  CHECK(gap == doctest::Approx(0.9624).epsilon(1e-4));
  CHECK(std::strlen(rbf_last_error()) == 0);

  char buf[64];
  REQUIRE(rbf_catmap_fixed_point_count(kCat, 3, buf, sizeof buf) == RBF_OK);
  CHECK(std::string(buf) == "16");
  REQUIRE(rbf_catmap_fixed_point_count(kCat, 40, buf, sizeof buf) == RBF_OK);
  CHECK(std::strlen(buf) > 15);
  char tiny[2];
  CHECK(rbf_catmap_fixed_point_count(kCat, 3, tiny, sizeof tiny) == RBF_ERR_BUFFER_TOO_SMALL);
  CHECK(std::string(rbf_last_error()).find("buffer too small") != std::string::npos);

  const int64_t rot[4] = {0, -1, 1, 0};
  CHECK(rbf_catmap_fixed_point_count(rot, 1, buf, sizeof buf) == RBF_ERR_MODEL_INVALID);
  CHECK(std::string(rbf_last_error()).find("not Anosov") != std::string::npos);
}

TEST_CASE("null arguments") {
  CHECK(rbf_catmap_anosov_check(nullptr, 1.0, nullptr, nullptr) == RBF_ERR_INVALID_ARGUMENT);
  CHECK(rbf_orbit_set_from_catmap(kCat, 1.0, RBF_REP_TRIVIAL, 0.0, 3, nullptr) == RBF_ERR_INVALID_ARGUMENT);
  size_t n = 0;
  CHECK(rbf_orbit_set_size(nullptr, &n) == RBF_ERR_INVALID_ARGUMENT);
  rbf_zeta_series z{};
  CHECK(rbf_log_zeta_euler(nullptr, c(3.0), 5.0, &z) == RBF_ERR_INVALID_ARGUMENT);
  rbf_orbit_set_free(nullptr);
  rbf_bf_model_free(nullptr);
}

TEST_CASE("orbit sets and zeta series") {
  OrbitSet set;
  REQUIRE(rbf_orbit_set_from_catmap(kCat, 1.0, RBF_REP_TRIVIAL, 0.0, 6, &set.p) == RBF_OK);
  size_t n = 0;
  REQUIRE(rbf_orbit_set_size(set.p, &n) == RBF_OK);
  CHECK(n == 6);
  int32_t m = 0;
  REQUIRE(rbf_orbit_set_rank(set.p, &m) == RBF_OK);
  CHECK(m == 1);
  rbf_orbit_info info{};
  REQUIRE(rbf_orbit_set_get(set.p, 2, &info) == RBF_OK);
  CHECK(info.period == 3);
  CHECK(info.multiplicity == 5);
  CHECK(info.trace_poincare == doctest::Approx(18.0));
  CHECK(rbf_orbit_set_get(set.p, 6, &info) == RBF_ERR_OUT_OF_RANGE);

  double p[4];
  size_t dim = 0;
  REQUIRE(rbf_orbit_set_poincare(set.p, 0, p, 4, &dim) == RBF_OK);
  CHECK(dim == 2);
  CHECK(p[0] == 2.0);
  CHECK(rbf_orbit_set_poincare(set.p, 0, p, 3, &dim) == RBF_ERR_BUFFER_TOO_SMALL);

  rbf_zeta_series e{}, a{};
  REQUIRE(rbf_log_zeta_euler(set.p, c(3.0), 6.0, &e) == RBF_OK);
  REQUIRE(rbf_log_zeta_assembly(set.p, 1, c(3.0), 6.0, &a) == RBF_OK);
  CHECK(e.k == RBF_SERIES_EULER);
  CHECK(a.k == RBF_SERIES_ASSEMBLY);
  CHECK(e.value.re == a.value.re);
  CHECK(e.value.im == a.value.im);
  CHECK(e.converged == 1);

  rbf_zeta_series low{};
  REQUIRE(rbf_log_zeta_euler(set.p, c(0.5), 6.0, &low) == RBF_OK);
  CHECK(low.converged == 0);
  CHECK(std::isinf(low.tail_bound));

  rbf_complex det{};
  REQUIRE(rbf_flat_determinant(set.p, 0, c(3.0), 6.0, &det) == RBF_OK);
  rbf_zeta_series z0{};
  REQUIRE(rbf_log_zeta_k(set.p, 0, c(3.0), 6.0, &z0) == RBF_OK);
  CHECK(det.re == doctest::Approx(std::exp(z0.value.re)));

  rbf_bridge_result b{};
  REQUIRE(rbf_orbit_bridge(set.p, 1, c(3.0), c(0.5), 6.0, &b) == RBF_OK);
  CHECK(b.defect <= b.tail_bound);
  CHECK(rbf_log_zeta_euler(set.p, c(3.0), -1.0, &e) == RBF_ERR_INVALID_ARGUMENT);
}

TEST_CASE("zeta grid is deterministic across thread counts") {
  OrbitSet set;
  REQUIRE(rbf_orbit_set_from_catmap(kCat, 1.0, RBF_REP_CHARACTER, 0.4, 10, &set.p) == RBF_OK);
  std::vector<rbf_complex> lambdas;
  for (int i = 0; i < 17; ++i) lambdas.push_back(c(1.5 + 0.25 * i, 0.1 * i));
  const size_t per = 2 * 1 + 3;
  std::vector<rbf_zeta_series> one(lambdas.size() * per), four(lambdas.size() * per);
  REQUIRE(rbf_zeta_grid(set.p, 1, lambdas.data(), lambdas.size(), 10.0, 1, one.data(), one.size()) == RBF_OK);
  REQUIRE(rbf_zeta_grid(set.p, 1, lambdas.data(), lambdas.size(), 10.0, 4, four.data(), four.size()) == RBF_OK);
  CHECK(std::memcmp(one.data(), four.data(), one.size() * sizeof(rbf_zeta_series)) == 0);
  CHECK(one[3].k == RBF_SERIES_EULER);
  CHECK(one[4].k == RBF_SERIES_ASSEMBLY);
  CHECK(rbf_zeta_grid(set.p, 1, lambdas.data(), lambdas.size(), 10.0, 1, one.data(), one.size() - 1) ==
        RBF_ERR_BUFFER_TOO_SMALL);
}

TEST_CASE("orbit set from file") {
  OrbitSet set;
  CHECK(rbf_orbit_set_from_file("/nonexistent/spectrum.csv", &set.p) == RBF_ERR_IO);
  CHECK(set.p == nullptr);

  const std::string path = "capi_spectrum_test.csv";
  {
    std::ofstream out(path);
    out << "length,multiplicity,m,P_entries,rho_re,rho_im\n1.0,1,1,2;1;1;1,1,0\n2.0,2,1,3;0;0;0.5,1,0\n";
  }
  REQUIRE(rbf_orbit_set_from_file(path.c_str(), &set.p) == RBF_OK);
  size_t n = 0;
  rbf_orbit_set_size(set.p, &n);
  CHECK(n == 2);
  {
    std::ofstream out(path);
    out << "length,multiplicity,m,P_entries,rho_re,rho_im\n1.0,x,1,2;1;1;1,1,0\n";
  }
  OrbitSet bad;
  CHECK(rbf_orbit_set_from_file(path.c_str(), &bad.p) == RBF_ERR_PARSE);
  CHECK(std::string(rbf_last_error()).find("line 2") != std::string::npos);
  std::remove(path.c_str());
}

TEST_CASE("matrix model through the C interface") {
  const int32_t degrees[1] = {0};
  const size_t dims[1] = {2};
  const rbf_complex gen[4] = {c(2.0), c(0.0), c(0.0), c(3.0)};
  Model model;
  REQUIRE(rbf_bf_model_create(1, degrees, dims, gen, nullptr, &model.p) == RBF_OK);
  size_t full = 0;
  REQUIRE(rbf_bf_model_full_dim(model.p, &full) == RBF_OK);
  CHECK(full == 4);
  double radius = 0.0;
  REQUIRE(rbf_bf_model_min_abs_spectrum(model.p, &radius) == RBF_OK);
  CHECK(radius == doctest::Approx(2.0));

  rbf_expectation_result e{};
  REQUIRE(rbf_bf_expectation(model.p, c(0.1), 40, &e) == RBF_OK);
  CHECK(e.closed_form.re == doctest::Approx(1.085).epsilon(1e-12));
  CHECK(e.series_value.re == doctest::Approx(1.085).epsilon(1e-12));
  CHECK(rbf_bf_expectation(model.p, c(2.5), 10, &e) == RBF_ERR_OUT_OF_RANGE);

  std::vector<rbf_complex> coeffs(6);
  REQUIRE(rbf_bf_gamma_tr(model.p, c(0.0), 5, coeffs.data(), coeffs.size()) == RBF_OK);
  CHECK(coeffs[2].re == doctest::Approx(0.5 + 1.0 / 3.0));
  CHECK(rbf_bf_gamma_tr(model.p, c(0.0), 5, coeffs.data(), 5) == RBF_ERR_BUFFER_TOO_SMALL);

  const rbf_complex a[4] = {c(1.0), c(1.0), c(0.0), c(0.0)};
  const rbf_complex b[4] = {c(0.0), c(0.0), c(1.0), c(1.0)};
  REQUIRE(rbf_bf_gamma_int(model.p, 0.0, INFINITY, c(0.0), a, b, 5, coeffs.data(), coeffs.size()) == RBF_OK);
  CHECK(coeffs[1].im == doctest::Approx(2.0));
  rbf_complex v{};
  REQUIRE(rbf_bf_diagram_value(model.p, RBF_DIAGRAM_CHAIN, 1, c(0.0), a, b, &v) == RBF_OK);
  CHECK(v.im == doctest::Approx(2.0));

  rbf_partition_result z{};
  REQUIRE(rbf_bf_partition(model.p, c(-2.0), &z) == RBF_OK);
  CHECK(z.resonance == 1);
  CHECK(z.value == 0.0);

  const rbf_complex singular[4] = {c(0.0), c(0.0), c(0.0), c(1.0)};
  Model bad;
  CHECK(rbf_bf_model_create(1, degrees, dims, singular, nullptr, &bad.p) == RBF_ERR_RESONANCE);
  CHECK(bad.p == nullptr);
}

TEST_CASE("diagram enumeration") {
  size_t count = 0;
  CHECK(rbf_diagrams_enumerate(3, nullptr, 0, &count) == RBF_ERR_BUFFER_TOO_SMALL);
  CHECK(count == 2);
  rbf_diagram_info info[2];
  REQUIRE(rbf_diagrams_enumerate(3, info, 2, &count) == RBF_OK);
  CHECK(info[0].kind == RBF_DIAGRAM_CHAIN);
  CHECK(info[0].vertices == 3);
  CHECK(info[1].kind == RBF_DIAGRAM_CYCLE);
  CHECK(info[1].hbar_exponent == 3);
  CHECK(rbf_diagrams_enumerate(0, info, 2, &count) == RBF_ERR_INVALID_ARGUMENT);
}
