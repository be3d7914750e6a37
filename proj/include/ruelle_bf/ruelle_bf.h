#ifndef RUELLE_BF_H
#define RUELLE_BF_H

#include <stddef.h>
#include <stdint.h>

#if defined(RBF_BUILDING_LIBRARY)
#define RBF_API __attribute__((visibility("default")))
#else
#define RBF_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum rbf_status {
  RBF_OK = 0,
  RBF_ERR_INVALID_ARGUMENT = 1,
  RBF_ERR_PARSE = 2,
  RBF_ERR_IO = 3,
  RBF_ERR_MODEL_INVALID = 4,
  RBF_ERR_SINGULAR = 5,
  RBF_ERR_RESONANCE = 6,
  RBF_ERR_NON_CONVERGENCE = 7,
  RBF_ERR_OUT_OF_RANGE = 8,
  RBF_ERR_BUFFER_TOO_SMALL = 9,
  RBF_ERR_INTERNAL = 10
} rbf_status;

typedef struct rbf_complex {
  double re;
  double im;
} rbf_complex;

typedef struct rbf_orbit_set rbf_orbit_set;
typedef struct rbf_bf_model rbf_bf_model;

RBF_API const char* rbf_version(void);
RBF_API const char* rbf_status_string(rbf_status status);
/* Message of the last failing call on this thread; empty after success. */
RBF_API const char* rbf_last_error(void);

/* ---- hyperbolic toral models ---- */

/* a is row-major [a00, a01, a10, a11]. */
RBF_API rbf_status rbf_catmap_anosov_check(const int64_t a[4], double roof, int* is_anosov, double* gap);
/* Decimal |det(A^n - I)|; buf receives a NUL-terminated string. */
RBF_API rbf_status rbf_catmap_fixed_point_count(const int64_t a[4], uint32_t n, char* buf, size_t cap);

typedef enum rbf_rep_kind { RBF_REP_TRIVIAL = 0, RBF_REP_CHARACTER = 1 } rbf_rep_kind;

RBF_API rbf_status rbf_orbit_set_from_catmap(const int64_t a[4], double roof, rbf_rep_kind rep, double angle,
                                             uint32_t n_max, rbf_orbit_set** out);
RBF_API rbf_status rbf_orbit_set_from_file(const char* path, rbf_orbit_set** out);
RBF_API void rbf_orbit_set_free(rbf_orbit_set* set);

typedef struct rbf_orbit_info {
  double length;
  uint32_t period; /* 0 for length-spectrum input */
  uint64_t multiplicity;
  int32_t m;
  rbf_complex rho; /* rank-1 value; trace for higher rank */
  double trace_poincare;
  double det_i_minus_p;
} rbf_orbit_info;

RBF_API rbf_status rbf_orbit_set_size(const rbf_orbit_set* set, size_t* count);
/* Rank m of the stable bundle (max over the orbits; 1 for toral models). */
RBF_API rbf_status rbf_orbit_set_rank(const rbf_orbit_set* set, int32_t* m);
RBF_API rbf_status rbf_orbit_set_get(const rbf_orbit_set* set, size_t index, rbf_orbit_info* info);
/* Row-major Poincare matrix; *dim receives 2m. */
RBF_API rbf_status rbf_orbit_set_poincare(const rbf_orbit_set* set, size_t index, double* out, size_t cap, size_t* dim);

/* ---- zeta series ---- */

#define RBF_SERIES_EULER (-1)
#define RBF_SERIES_ASSEMBLY (-2)

typedef struct rbf_zeta_series {
  rbf_complex lambda;
  int32_t k; /* form degree, or RBF_SERIES_EULER / RBF_SERIES_ASSEMBLY */
  rbf_complex value;
  double l_max;
  double tail_bound; /* +inf when not converged */
  int32_t converged;
  uint64_t terms;
} rbf_zeta_series;

RBF_API rbf_status rbf_log_zeta_k(const rbf_orbit_set* set, int32_t k, rbf_complex lambda, double l_max,
                                  rbf_zeta_series* out);
RBF_API rbf_status rbf_log_zeta_euler(const rbf_orbit_set* set, rbf_complex lambda, double l_max, rbf_zeta_series* out);
RBF_API rbf_status rbf_log_zeta_assembly(const rbf_orbit_set* set, int32_t m, rbf_complex lambda, double l_max,
                                         rbf_zeta_series* out);
/* Evaluates degrees 0..2m, the Euler series and the assembly at every lambda.
   out must hold n_lambda * (2m + 3) records, ordered by lambda then k = 0..2m, Euler, assembly. */
RBF_API rbf_status rbf_zeta_grid(const rbf_orbit_set* set, int32_t m, const rbf_complex* lambdas, size_t n_lambda,
                                 double l_max, uint32_t threads, rbf_zeta_series* out, size_t cap);
RBF_API rbf_status rbf_flat_determinant(const rbf_orbit_set* set, int32_t k, rbf_complex lambda, double l_max,
                                        rbf_complex* out);

typedef struct rbf_bridge_result {
  rbf_complex euler_ratio;
  rbf_complex determinant_ratio;
  double defect;
  double tail_bound;
  int32_t converged;
} rbf_bridge_result;

RBF_API rbf_status rbf_orbit_bridge(const rbf_orbit_set* set, int32_t m, rbf_complex lambda0, rbf_complex hbar,
                                    double l_max, rbf_bridge_result* out);

/* ---- matrix BF model ---- */

/* Block b has degree degrees[b] and size dims[b]; generators holds the L_b row-major,
   concatenated. contractions (same layout) may be NULL for iota = identity; otherwise
   d_b = iota_b^{-1} L_b. */
RBF_API rbf_status rbf_bf_model_create(size_t block_count, const int32_t* degrees, const size_t* dims,
                                       const rbf_complex* generators, const rbf_complex* contractions,
                                       rbf_bf_model** out);
RBF_API void rbf_bf_model_free(rbf_bf_model* model);
RBF_API rbf_status rbf_bf_model_full_dim(const rbf_bf_model* model, size_t* dim);
RBF_API rbf_status rbf_bf_model_min_abs_spectrum(const rbf_bf_model* model, double* value);

/* coeffs receives K + 1 values (hbar^0 .. hbar^K). */
RBF_API rbf_status rbf_bf_gamma_tr(const rbf_bf_model* model, rbf_complex lambda, uint32_t K, rbf_complex* coeffs,
                                   size_t cap);
/* a, b have full_dim entries; l2 may be +inf. */
RBF_API rbf_status rbf_bf_gamma_int(const rbf_bf_model* model, double l1, double l2, rbf_complex lambda,
                                    const rbf_complex* a, const rbf_complex* b, uint32_t K, rbf_complex* coeffs,
                                    size_t cap);

typedef struct rbf_expectation_result {
  rbf_complex series_value;
  rbf_complex closed_form;
  double defect;
} rbf_expectation_result;

/* Fails with RBF_ERR_OUT_OF_RANGE when |hbar| >= min |spec L|. */
RBF_API rbf_status rbf_bf_expectation(const rbf_bf_model* model, rbf_complex hbar, uint32_t K,
                                      rbf_expectation_result* out);
RBF_API rbf_status rbf_bf_expectation_closed_form(const rbf_bf_model* model, rbf_complex hbar, rbf_complex* out);

typedef struct rbf_partition_result {
  double value;
  double direct;
  double gauge_fixed;
  double relative_defect;
  int32_t resonance;
} rbf_partition_result;

RBF_API rbf_status rbf_bf_partition(const rbf_bf_model* model, rbf_complex hbar, rbf_partition_result* out);

/* ---- Feynman diagrams ---- */

typedef enum rbf_diagram_kind { RBF_DIAGRAM_CHAIN = 0, RBF_DIAGRAM_CYCLE = 1 } rbf_diagram_kind;

typedef struct rbf_diagram_info {
  rbf_diagram_kind kind;
  uint32_t vertices;
  uint32_t edges;
  uint32_t tails;
  uint32_t loops;
  uint32_t hbar_exponent;
  uint64_t aut_unlabeled;
  uint64_t aut_labeled;
} rbf_diagram_info;

/* Diagrams of the quadratic interaction at hbar^order. */
RBF_API rbf_status rbf_diagrams_enumerate(uint32_t order, rbf_diagram_info* out, size_t cap, size_t* count);

/* weight / |Aut| of chain(N) or cycle(N) from the generic graph engine on the doubled
   field space, over the window (0, inf) with regularization lambda. Cycles carry the
   per-degree loop sign. a, b are ignored for cycles. */
RBF_API rbf_status rbf_bf_diagram_value(const rbf_bf_model* model, rbf_diagram_kind kind, uint32_t vertices,
                                        rbf_complex lambda, const rbf_complex* a, const rbf_complex* b,
                                        rbf_complex* out);

#ifdef __cplusplus
}
#endif

#endif
