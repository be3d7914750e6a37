#include "ruelle_bf/ruelle_bf.h"

#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <memory>
#include <new>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "ruelle_bf/bf_engine.hpp"
#include "ruelle_bf/error.hpp"
#include "ruelle_bf/feynman.hpp"
#include "ruelle_bf/flat_zeta.hpp"
#include "ruelle_bf/orbits.hpp"

struct rbf_orbit_set {
  std::vector<rbf::PrimeOrbit> orbits;
  int m = 1;
};

struct rbf_bf_model {
  rbf::MatrixBFModel model;
};

namespace {

thread_local std::string g_last_error;

struct BufferTooSmall : std::runtime_error {
  using std::runtime_error::runtime_error;
};

rbf_status to_status(rbf::ErrorCode code) {
  switch (code) {
    case rbf::ErrorCode::invalid_argument: return RBF_ERR_INVALID_ARGUMENT;
    case rbf::ErrorCode::parse: return RBF_ERR_PARSE;
    case rbf::ErrorCode::io: return RBF_ERR_IO;
    case rbf::ErrorCode::model_invalid: return RBF_ERR_MODEL_INVALID;
    case rbf::ErrorCode::singular: return RBF_ERR_SINGULAR;
    case rbf::ErrorCode::resonance: return RBF_ERR_RESONANCE;
    case rbf::ErrorCode::non_convergence: return RBF_ERR_NON_CONVERGENCE;
    case rbf::ErrorCode::out_of_range: return RBF_ERR_OUT_OF_RANGE;
    case rbf::ErrorCode::internal: return RBF_ERR_INTERNAL;
  }
  return RBF_ERR_INTERNAL;
}

template <typename F>
rbf_status guarded(F&& body) {
  try {
    body();
    g_last_error.clear();
    return RBF_OK;
  } catch (const BufferTooSmall& e) {
    g_last_error = e.what();
    return RBF_ERR_BUFFER_TOO_SMALL;
  } catch (const rbf::Error& e) {
    g_last_error = e.what();
    return to_status(e.code());
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return RBF_ERR_INTERNAL;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return RBF_ERR_INTERNAL;
  } catch (...) {
    g_last_error = "unknown error";
    return RBF_ERR_INTERNAL;
  }
}

void need(const void* p, const char* name) {
  if (p == nullptr) rbf::fail(rbf::ErrorCode::invalid_argument, std::string(name) + " is NULL");
}

void need_capacity(size_t cap, size_t required) {
  if (cap < required) {
    throw BufferTooSmall("buffer too small: need " + std::to_string(required) + ", have " + std::to_string(cap));
  }
}

rbf::Complex from_c(rbf_complex z) { return {z.re, z.im}; }
rbf_complex to_c(rbf::Complex z) { return {z.real(), z.imag()}; }

rbf::HyperbolicToralModel catmap(const int64_t a[4], double roof) {
  need(a, "a");
  rbf::HyperbolicToralModel model;
  for (int i = 0; i < 4; ++i) model.A[static_cast<std::size_t>(i)] = a[i];
  model.roof = roof;
  return model;
}

rbf_zeta_series to_c(const rbf::ZetaSeries& s) {
  rbf_zeta_series out{};
  out.lambda = to_c(s.lambda);
  out.k = s.k;
  out.value = to_c(s.value);
  out.l_max = s.L_max;
  out.tail_bound = s.tail_bound;
  out.converged = s.converged ? 1 : 0;
  out.terms = s.terms;
  return out;
}

rbf::CVector vector_from_c(const rbf_complex* v, Eigen::Index n, const char* name) {
  need(v, name);
  rbf::CVector out(n);
  for (Eigen::Index i = 0; i < n; ++i) out(i) = from_c(v[i]);
  return out;
}

void write_poly(const rbf::HbarPolynomial& p, uint32_t K, rbf_complex* coeffs, size_t cap) {
  need(coeffs, "coeffs");
  need_capacity(cap, static_cast<size_t>(K) + 1);
  for (uint32_t q = 0; q <= K; ++q) coeffs[q] = to_c(p.coefficient(static_cast<int>(q)));
}

}  // namespace

extern "C" {

const char* rbf_version(void) { return "0.1.0"; }

const char* rbf_status_string(rbf_status status) {
  switch (status) {
    case RBF_OK: return "ok";
    case RBF_ERR_INVALID_ARGUMENT: return "invalid argument";
    case RBF_ERR_PARSE: return "parse error";
    case RBF_ERR_IO: return "i/o error";
    case RBF_ERR_MODEL_INVALID: return "model invalid";
    case RBF_ERR_SINGULAR: return "singular operator";
    case RBF_ERR_RESONANCE: return "resonance at zero";
    case RBF_ERR_NON_CONVERGENCE: return "non-convergence";
    case RBF_ERR_OUT_OF_RANGE: return "out of range";
    case RBF_ERR_BUFFER_TOO_SMALL: return "buffer too small";
    case RBF_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

const char* rbf_last_error(void) { return g_last_error.c_str(); }

rbf_status rbf_catmap_anosov_check(const int64_t a[4], double roof, int* is_anosov, double* gap) {
  return guarded([&] {
    need(is_anosov, "is_anosov");
    const auto report = rbf::anosov_check(catmap(a, roof));
    *is_anosov = report.anosov ? 1 : 0;
    if (gap != nullptr) *gap = report.gap;
  });
}

rbf_status rbf_catmap_fixed_point_count(const int64_t a[4], uint32_t n, char* buf, size_t cap) {
  return guarded([&] {
    need(buf, "buf");
    const std::string text = rbf::fixed_point_count(catmap(a, 1.0), static_cast<int>(n)).str();
    need_capacity(cap, text.size() + 1);
    std::copy(text.begin(), text.end(), buf);
    buf[text.size()] = '\0';
  });
}

rbf_status rbf_orbit_set_from_catmap(const int64_t a[4], double roof, rbf_rep_kind rep, double angle, uint32_t n_max,
                                     rbf_orbit_set** out) {
  return guarded([&] {
    need(out, "out");
    *out = nullptr;
    auto model = catmap(a, roof);
    if (rep == RBF_REP_CHARACTER) {
      model.rep = rbf::Representation::character(angle);
    } else if (rep != RBF_REP_TRIVIAL) {
      rbf::fail(rbf::ErrorCode::invalid_argument, "unknown representation kind");
    }
    model.validate();
    if (!rbf::anosov_check(model).anosov) rbf::fail(rbf::ErrorCode::model_invalid, "not Anosov: eigenvalue on the unit circle");
    auto set = std::make_unique<rbf_orbit_set>();
    set->orbits = rbf::enumerate_prime_orbits(model, static_cast<int>(n_max));
    set->m = model.rank();
    *out = set.release();
  });
}

rbf_status rbf_orbit_set_from_file(const char* path, rbf_orbit_set** out) {
  return guarded([&] {
    need(path, "path");
    need(out, "out");
    *out = nullptr;
    auto set = std::make_unique<rbf_orbit_set>();
    set->orbits = rbf::load_length_spectrum(path);
    set->m = 1;
    if (!set->orbits.empty()) {
      set->m = 0;
      for (const auto& o : set->orbits) set->m = std::max(set->m, o.m);
    }
    *out = set.release();
  });
}

void rbf_orbit_set_free(rbf_orbit_set* set) { delete set; }

rbf_status rbf_orbit_set_size(const rbf_orbit_set* set, size_t* count) {
  return guarded([&] {
    need(set, "set");
    need(count, "count");
    *count = set->orbits.size();
  });
}

rbf_status rbf_orbit_set_rank(const rbf_orbit_set* set, int32_t* m) {
  return guarded([&] {
    need(set, "set");
    need(m, "m");
    *m = set->m;
  });
}

rbf_status rbf_orbit_set_get(const rbf_orbit_set* set, size_t index, rbf_orbit_info* info) {
  return guarded([&] {
    need(set, "set");
    need(info, "info");
    if (index >= set->orbits.size()) rbf::fail(rbf::ErrorCode::out_of_range, "orbit index out of range");
    const auto& o = set->orbits[index];
    info->length = o.length;
    info->period = static_cast<uint32_t>(o.period);
    info->multiplicity = o.multiplicity;
    info->m = o.m;
    info->rho = to_c(o.rho.trace());
    info->trace_poincare = o.poincare.trace();
    double det = 0.0;
    for (int k = 0; k <= o.poincare.rows(); ++k) det += ((k % 2) ? -1.0 : 1.0) * rbf::exterior_power_trace(o.poincare, k);
    info->det_i_minus_p = det;
  });
}

rbf_status rbf_orbit_set_poincare(const rbf_orbit_set* set, size_t index, double* out, size_t cap, size_t* dim) {
  return guarded([&] {
    need(set, "set");
    need(dim, "dim");
    if (index >= set->orbits.size()) rbf::fail(rbf::ErrorCode::out_of_range, "orbit index out of range");
    const auto& p = set->orbits[index].poincare;
    *dim = static_cast<size_t>(p.rows());
    need(out, "out");
    need_capacity(cap, static_cast<size_t>(p.size()));
    for (Eigen::Index r = 0; r < p.rows(); ++r) {
      for (Eigen::Index c = 0; c < p.cols(); ++c) out[r * p.cols() + c] = p(r, c);
    }
  });
}

rbf_status rbf_log_zeta_k(const rbf_orbit_set* set, int32_t k, rbf_complex lambda, double l_max, rbf_zeta_series* out) {
  return guarded([&] {
    need(set, "set");
    need(out, "out");
    *out = to_c(rbf::log_zeta_k(set->orbits, k, from_c(lambda), l_max));
  });
}

rbf_status rbf_log_zeta_euler(const rbf_orbit_set* set, rbf_complex lambda, double l_max, rbf_zeta_series* out) {
  return guarded([&] {
    need(set, "set");
    need(out, "out");
    *out = to_c(rbf::euler_product_log_zeta(set->orbits, from_c(lambda), l_max));
  });
}

rbf_status rbf_log_zeta_assembly(const rbf_orbit_set* set, int32_t m, rbf_complex lambda, double l_max,
                                 rbf_zeta_series* out) {
  return guarded([&] {
    need(set, "set");
    need(out, "out");
    *out = to_c(rbf::alternating_assembly(set->orbits, m, from_c(lambda), l_max));
  });
}

rbf_status rbf_zeta_grid(const rbf_orbit_set* set, int32_t m, const rbf_complex* lambdas, size_t n_lambda, double l_max,
                         uint32_t threads, rbf_zeta_series* out, size_t cap) {
  return guarded([&] {
    need(set, "set");
    if (n_lambda > 0) {
      need(lambdas, "lambdas");
      need(out, "out");
    }
    if (m < 0) rbf::fail(rbf::ErrorCode::invalid_argument, "rank m must be non-negative");
    const size_t per = static_cast<size_t>(2 * m + 3);
    need_capacity(cap, n_lambda * per);
    const rbf::ZetaEvaluator eval(set->orbits, l_max);
    const int top = set->orbits.empty() ? 2 * m : std::min(2 * m, eval.max_degree());

    std::atomic<size_t> next{0};
    std::exception_ptr error;
    std::atomic<bool> failed{false};
    auto work = [&] {
      try {
        for (size_t i = next++; i < n_lambda && !failed; i = next++) {
          const rbf::Complex lambda = from_c(lambdas[i]);
          rbf_zeta_series* row = out + i * per;
          for (int k = 0; k <= 2 * m; ++k) {
            if (k <= top) {
              row[k] = to_c(eval.log_zeta_k(k, lambda));
            } else {
              rbf::ZetaSeries zero;
              zero.lambda = lambda;
              zero.k = k;
              zero.value = 0.0;
              zero.L_max = l_max;
              row[k] = to_c(zero);
            }
          }
          row[2 * m + 1] = to_c(eval.euler(lambda));
          row[2 * m + 2] = to_c(eval.assembly(m, lambda));
        }
      } catch (...) {
        if (!failed.exchange(true)) error = std::current_exception();
      }
    };
    const size_t n_threads = std::max<size_t>(1, std::min<size_t>(threads == 0 ? 1 : threads, n_lambda));
    std::vector<std::thread> pool;
    for (size_t t = 1; t < n_threads; ++t) pool.emplace_back(work);
    work();
    for (auto& th : pool) th.join();
    if (error) std::rethrow_exception(error);
  });
}

rbf_status rbf_flat_determinant(const rbf_orbit_set* set, int32_t k, rbf_complex lambda, double l_max, rbf_complex* out) {
  return guarded([&] {
    need(set, "set");
    need(out, "out");
    *out = to_c(rbf::flat_determinant_orbit(set->orbits, k, from_c(lambda), l_max));
  });
}

rbf_status rbf_orbit_bridge(const rbf_orbit_set* set, int32_t m, rbf_complex lambda0, rbf_complex hbar, double l_max,
                            rbf_bridge_result* out) {
  return guarded([&] {
    need(set, "set");
    need(out, "out");
    const auto r = rbf::zeta_expectation_bridge(set->orbits, m, from_c(hbar), l_max, from_c(lambda0));
    out->euler_ratio = to_c(r.euler_ratio);
    out->determinant_ratio = to_c(r.determinant_ratio);
    out->defect = r.defect;
    out->tail_bound = r.tail_bound;
    out->converged = r.converged ? 1 : 0;
  });
}

rbf_status rbf_bf_model_create(size_t block_count, const int32_t* degrees, const size_t* dims,
                               const rbf_complex* generators, const rbf_complex* contractions, rbf_bf_model** out) {
  return guarded([&] {
    need(out, "out");
    *out = nullptr;
    if (block_count == 0) rbf::fail(rbf::ErrorCode::invalid_argument, "block_count must be positive");
    need(degrees, "degrees");
    need(dims, "dims");
    need(generators, "generators");
    std::vector<rbf::GradedBlock> blocks;
    size_t offset = 0;
    for (size_t b = 0; b < block_count; ++b) {
      const auto n = static_cast<Eigen::Index>(dims[b]);
      if (n == 0) rbf::fail(rbf::ErrorCode::invalid_argument, "block " + std::to_string(b) + " has dimension 0");
      rbf::CMatrix l(n, n);
      rbf::CMatrix iota = rbf::CMatrix::Identity(n, n);
      for (Eigen::Index r = 0; r < n; ++r) {
        for (Eigen::Index c = 0; c < n; ++c) {
          l(r, c) = from_c(generators[offset + static_cast<size_t>(r * n + c)]);
          if (contractions != nullptr) iota(r, c) = from_c(contractions[offset + static_cast<size_t>(r * n + c)]);
        }
      }
      offset += static_cast<size_t>(n * n);
      const rbf::CMatrix d =
          contractions == nullptr ? l : rbf::solve(iota, l, "block " + std::to_string(b) + ": contraction is singular");
      blocks.push_back({degrees[b], rbf::ToyBFComplex(d, iota)});
    }
    *out = new rbf_bf_model{rbf::MatrixBFModel(std::move(blocks))};
  });
}

void rbf_bf_model_free(rbf_bf_model* model) { delete model; }

rbf_status rbf_bf_model_full_dim(const rbf_bf_model* model, size_t* dim) {
  return guarded([&] {
    need(model, "model");
    need(dim, "dim");
    *dim = static_cast<size_t>(model->model.full_dim());
  });
}

rbf_status rbf_bf_model_min_abs_spectrum(const rbf_bf_model* model, double* value) {
  return guarded([&] {
    need(model, "model");
    need(value, "value");
    *value = model->model.min_abs_spectrum();
  });
}

rbf_status rbf_bf_gamma_tr(const rbf_bf_model* model, rbf_complex lambda, uint32_t K, rbf_complex* coeffs, size_t cap) {
  return guarded([&] {
    need(model, "model");
    write_poly(rbf::gamma_tr(model->model, from_c(lambda), static_cast<int>(K)), K, coeffs, cap);
  });
}

rbf_status rbf_bf_gamma_int(const rbf_bf_model* model, double l1, double l2, rbf_complex lambda, const rbf_complex* a,
                            const rbf_complex* b, uint32_t K, rbf_complex* coeffs, size_t cap) {
  return guarded([&] {
    need(model, "model");
    const auto n = model->model.full_dim();
    const auto p = rbf::regularized_propagator(model->model, l1, l2, from_c(lambda));
    write_poly(rbf::gamma_int(model->model, p, vector_from_c(a, n, "a"), vector_from_c(b, n, "b"), static_cast<int>(K)),
               K, coeffs, cap);
  });
}

rbf_status rbf_bf_expectation(const rbf_bf_model* model, rbf_complex hbar, uint32_t K, rbf_expectation_result* out) {
  return guarded([&] {
    need(model, "model");
    need(out, "out");
    const auto r = rbf::expectation_value(model->model, from_c(hbar), static_cast<int>(K));
    out->series_value = to_c(r.series_value);
    out->closed_form = to_c(r.closed_form);
    out->defect = r.defect;
  });
}

rbf_status rbf_bf_expectation_closed_form(const rbf_bf_model* model, rbf_complex hbar, rbf_complex* out) {
  return guarded([&] {
    need(model, "model");
    need(out, "out");
    *out = to_c(rbf::expectation_closed_form(model->model, from_c(hbar)));
  });
}

rbf_status rbf_bf_partition(const rbf_bf_model* model, rbf_complex hbar, rbf_partition_result* out) {
  return guarded([&] {
    need(model, "model");
    need(out, "out");
    const auto r = rbf::bf_partition(model->model, from_c(hbar));
    out->value = r.value;
    out->direct = r.direct;
    out->gauge_fixed = r.gauge_fixed;
    out->relative_defect = r.relative_defect;
    out->resonance = r.resonance ? 1 : 0;
  });
}

rbf_status rbf_diagrams_enumerate(uint32_t order, rbf_diagram_info* out, size_t cap, size_t* count) {
  return guarded([&] {
    need(count, "count");
    const auto graphs = rbf::enumerate_connected_quadratic(static_cast<int>(order));
    *count = graphs.size();
    need_capacity(cap, graphs.size());
    need(out, "out");
    for (size_t i = 0; i < graphs.size(); ++i) {
      const auto& g = graphs[i];
      rbf_diagram_info& d = out[i];
      d.kind = rbf::classify(g) == rbf::DiagramKind::cycle ? RBF_DIAGRAM_CYCLE : RBF_DIAGRAM_CHAIN;
      d.vertices = static_cast<uint32_t>(g.vertex_count);
      d.edges = static_cast<uint32_t>(g.edge_count());
      d.tails = static_cast<uint32_t>(g.tails().size());
      d.loops = static_cast<uint32_t>(g.loop_count());
      d.hbar_exponent = static_cast<uint32_t>(rbf::hbar_exponent(g));
      d.aut_unlabeled = rbf::automorphism_order(g, rbf::TailConvention::unlabeled);
      d.aut_labeled = rbf::automorphism_order(g, rbf::TailConvention::labeled);
    }
  });
}

rbf_status rbf_bf_diagram_value(const rbf_bf_model* model, rbf_diagram_kind kind, uint32_t vertices, rbf_complex lambda,
                                const rbf_complex* a, const rbf_complex* b, rbf_complex* out) {
  return guarded([&] {
    need(model, "model");
    need(out, "out");
    const auto& m = model->model;
    const auto p = rbf::regularized_propagator(m, 0.0, std::numeric_limits<double>::infinity(), from_c(lambda));
    if (kind == RBF_DIAGRAM_CHAIN) {
      *out = to_c(rbf::chain_diagram_value(m, p, vector_from_c(a, m.full_dim(), "a"), vector_from_c(b, m.full_dim(), "b"),
                                           static_cast<int>(vertices)));
    } else if (kind == RBF_DIAGRAM_CYCLE) {
      *out = to_c(rbf::cycle_diagram_value(m, p, static_cast<int>(vertices)));
    } else {
      rbf::fail(rbf::ErrorCode::invalid_argument, "unknown diagram kind");
    }
  });
}

}  // extern "C"
