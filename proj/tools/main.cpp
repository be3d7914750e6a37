#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "config.hpp"
#include "emit.hpp"
#include "ruelle_bf/ruelle_bf.h"

namespace {

using cli::Cell;
using cli::Complex;
using cli::Report;
using cli::RunConfig;
using cli::Table;

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitModel = 2;
constexpr int kExitNumerical = 3;
constexpr int kExitInternal = 4;

class ApiError : public std::runtime_error {
 public:
  ApiError(rbf_status status, const std::string& what) : std::runtime_error(what), status_(status) {}
  rbf_status status() const { return status_; }

 private:
  rbf_status status_;
};

int exit_code(rbf_status s) {
  switch (s) {
    case RBF_OK: return kExitOk;
    case RBF_ERR_INVALID_ARGUMENT:
    case RBF_ERR_IO: return kExitConfig;
    case RBF_ERR_PARSE:
    case RBF_ERR_MODEL_INVALID:
    case RBF_ERR_SINGULAR:
    case RBF_ERR_RESONANCE: return kExitModel;
    case RBF_ERR_NON_CONVERGENCE:
    case RBF_ERR_OUT_OF_RANGE: return kExitNumerical;
    case RBF_ERR_BUFFER_TOO_SMALL:
    case RBF_ERR_INTERNAL: return kExitInternal;
  }
  return kExitInternal;
}

void check(rbf_status s, const char* what) {
  if (s != RBF_OK) throw ApiError(s, std::string(what) + ": " + rbf_last_error());
}

rbf_complex to_c(Complex z) { return {z.real(), z.imag()}; }
Complex from_c(rbf_complex z) { return {z.re, z.im}; }

struct OrbitSetDeleter {
  void operator()(rbf_orbit_set* s) const { rbf_orbit_set_free(s); }
};
struct ModelDeleter {
  void operator()(rbf_bf_model* m) const { rbf_bf_model_free(m); }
};
using OrbitSet = std::unique_ptr<rbf_orbit_set, OrbitSetDeleter>;
using Model = std::unique_ptr<rbf_bf_model, ModelDeleter>;

struct OrbitSource {
  OrbitSet set;
  std::string id;
  int32_t m = 1;
  double L_max = 0.0;
};

OrbitSource load_orbits(const RunConfig& cfg) {
  OrbitSource out;
  rbf_orbit_set* raw = nullptr;
  if (cfg.catmap) {
    check(rbf_orbit_set_from_catmap(cfg.catmap->A.data(), cfg.catmap->roof,
                                    cfg.character ? RBF_REP_CHARACTER : RBF_REP_TRIVIAL, cfg.angle,
                                    static_cast<uint32_t>(cfg.n_max), &raw),
          "model.catmap");
    out.set.reset(raw);
    out.id = "catmap";
    out.L_max = cfg.L_max > 0.0 ? cfg.L_max : cfg.n_max * cfg.catmap->roof;
  } else if (cfg.spectrum_file) {
    check(rbf_orbit_set_from_file(cfg.spectrum_file->c_str(), &raw), "model.spectrum_file");
    out.set.reset(raw);
    out.id = std::filesystem::path(*cfg.spectrum_file).stem().string();
    out.L_max = cfg.L_max;
    if (out.L_max <= 0.0) {
      size_t n = 0;
      check(rbf_orbit_set_size(out.set.get(), &n), "orbit set");
      out.L_max = 1.0;
      for (size_t i = 0; i < n; ++i) {
        rbf_orbit_info info{};
        check(rbf_orbit_set_get(out.set.get(), i, &info), "orbit set");
        out.L_max = std::max(out.L_max, info.length);
      }
    }
  } else {
    throw cli::ConfigError("model", "missing (catmap or spectrum_file required)");
  }
  check(rbf_orbit_set_rank(out.set.get(), &out.m), "orbit set");
  return out;
}

Model load_matrix_model(const cli::MatrixModel& mm) {
  std::vector<int32_t> degrees;
  std::vector<size_t> dims;
  std::vector<rbf_complex> gens, iotas;
  bool any_iota = false;
  for (const auto& b : mm.blocks) any_iota = any_iota || !b.iota.empty();
  for (const auto& b : mm.blocks) {
    degrees.push_back(b.degree);
    dims.push_back(static_cast<size_t>(b.dim));
    for (const auto& z : b.L) gens.push_back(to_c(z));
    for (int i = 0; i < b.dim * b.dim && any_iota; ++i) {
      const Complex z = b.iota.empty() ? Complex(i % (b.dim + 1) == 0 ? 1.0 : 0.0, 0.0) : b.iota[static_cast<size_t>(i)];
      iotas.push_back(to_c(z));
    }
  }
  rbf_bf_model* raw = nullptr;
  check(rbf_bf_model_create(degrees.size(), degrees.data(), dims.data(), gens.data(), any_iota ? iotas.data() : nullptr,
                            &raw),
        "matrix_model");
  return Model(raw);
}

const cli::MatrixModel& require_matrix_model(const RunConfig& cfg) {
  if (!cfg.matrix_model) throw cli::ConfigError("matrix_model", "missing");
  return *cfg.matrix_model;
}

const std::vector<Complex>& require_grid(const RunConfig& cfg) {
  if (cfg.grid.empty()) throw cli::ConfigError("grid", "must not be empty");
  return cfg.grid;
}

std::vector<rbf_complex> external(const std::vector<Complex>& v, size_t n, const char* path) {
  if (v.empty()) return std::vector<rbf_complex>(n, rbf_complex{1.0, 0.0});
  if (v.size() != n) throw cli::ConfigError(path, "expected " + std::to_string(n) + " entries");
  std::vector<rbf_complex> out;
  for (const auto& z : v) out.push_back(to_c(z));
  return out;
}

double rel_defect(Complex a, Complex b) {
  const double scale = std::max({std::abs(a), std::abs(b), 1e-300});
  return std::abs(a - b) / scale;
}

std::string u128(unsigned __int128 v) {
  if (v == 0) return "0";
  std::string s;
  while (v > 0) {
    s.insert(s.begin(), static_cast<char>('0' + static_cast<int>(v % 10)));
    v /= 10;
  }
  return s;
}

Report cmd_orbits(const RunConfig& cfg) {
  const OrbitSource src = load_orbits(cfg);
  Report report{"orbits", {}};
  Table orbits{"orbits",
               {"length", "period", "multiplicity", "m", "rho_re", "rho_im", "trace_poincare", "det_i_minus_p"},
               {}};
  size_t n = 0;
  check(rbf_orbit_set_size(src.set.get(), &n), "orbit set");
  std::map<uint32_t, uint64_t> prime_counts;
  for (size_t i = 0; i < n; ++i) {
    rbf_orbit_info o{};
    check(rbf_orbit_set_get(src.set.get(), i, &o), "orbit set");
    orbits.add({o.length, static_cast<int64_t>(o.period), o.multiplicity, static_cast<int64_t>(o.m), o.rho.re,
                o.rho.im, o.trace_poincare, o.det_i_minus_p});
    prime_counts[o.period] += o.multiplicity;
  }
  report.tables.push_back(std::move(orbits));

  if (cfg.catmap) {
    Table sieve{"sieve", {"period", "prime_count", "fixed_point_count", "sieve_sum", "consistent"}, {}};
    for (int p = 1; p <= cfg.n_max; ++p) {
      char buf[64];
      check(rbf_catmap_fixed_point_count(cfg.catmap->A.data(), static_cast<uint32_t>(p), buf, sizeof buf),
            "fixed point count");
      unsigned __int128 sum = 0;
      for (int d = 1; d <= p; ++d) {
        if (p % d == 0) sum += static_cast<unsigned __int128>(d) * prime_counts[static_cast<uint32_t>(d)];
      }
      const std::string s = u128(sum);
      sieve.add({static_cast<int64_t>(p), prime_counts[static_cast<uint32_t>(p)], std::string(buf), s, s == buf});
    }
    report.tables.push_back(std::move(sieve));
  }
  return report;
}

Report cmd_zeta(const RunConfig& cfg, unsigned threads, bool& all_divergent) {
  const OrbitSource src = load_orbits(cfg);
  const auto& grid = require_grid(cfg);
  std::vector<rbf_complex> lambdas;
  for (const auto& z : grid) lambdas.push_back(to_c(z));
  const size_t per = static_cast<size_t>(2 * src.m + 3);
  std::vector<rbf_zeta_series> rows(grid.size() * per);
  check(rbf_zeta_grid(src.set.get(), src.m, lambdas.data(), lambdas.size(), src.L_max, threads, rows.data(),
                      rows.size()),
        "zeta grid");

  Table table{"zeta",
              {"re_lambda", "im_lambda", "k", "re_logzeta", "im_logzeta", "tail_bound", "L_max",
               "defect_euler_assembly", "converged"},
              {}};
  all_divergent = true;
  for (size_t i = 0; i < grid.size(); ++i) {
    const rbf_zeta_series* r = rows.data() + i * per;
    const rbf_zeta_series& euler = r[per - 2];
    const rbf_zeta_series& assembly = r[per - 1];
    const double defect = std::abs(from_c(euler.value) - from_c(assembly.value));
    if (euler.converged) all_divergent = false;
    for (size_t k = 0; k < per; ++k) {
      const std::string label = k + 2 == per ? "euler" : k + 1 == per ? "assembly" : std::to_string(k);
      table.add({r[k].lambda.re, r[k].lambda.im, label, r[k].value.re, r[k].value.im, r[k].tail_bound, r[k].l_max,
                 defect, r[k].converged != 0});
    }
  }
  Report report{"zeta", {}};
  report.tables.push_back(std::move(table));
  return report;
}

struct BridgeTables {
  Table records{"records",
                {"model_id", "hbar_re", "hbar_im", "K", "route", "series_value_re", "series_value_im",
                 "closed_form_re", "closed_form_im", "defect", "tail_bound", "flag"},
                {}};
  Table pairwise{"pairwise", {"model_id", "hbar_re", "hbar_im", "pair", "defect", "flag"}, {}};

  void record(const std::string& id, Complex h, int K, const std::string& route, Complex value, Complex closed,
              double defect, double tail, const std::string& flag) {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    const bool have = flag != "outside_radius";
    records.add({id, h.real(), h.imag(), static_cast<int64_t>(K), route, have ? value.real() : nan,
                 have ? value.imag() : nan, closed.real(), closed.imag(), have ? defect : nan, tail, flag});
  }
};

Report cmd_bridge(const RunConfig& cfg) {
  const auto& grid = require_grid(cfg);
  if (!cfg.matrix_model && !cfg.catmap && !cfg.spectrum_file) {
    throw cli::ConfigError("matrix_model", "bridge needs matrix_model or model");
  }
  BridgeTables t;
  if (cfg.matrix_model) {
    const Model model = load_matrix_model(*cfg.matrix_model);
    const std::string& id = cfg.matrix_model->id;
    for (const Complex& h : grid) {
      rbf_complex closed{};
      check(rbf_bf_expectation_closed_form(model.get(), to_c(h), &closed), "closed form");
      rbf_expectation_result r{};
      const rbf_status s = rbf_bf_expectation(model.get(), to_c(h), static_cast<uint32_t>(cfg.K), &r);
      std::string flag = "ok";
      if (s == RBF_ERR_OUT_OF_RANGE) {
        flag = "outside_radius";
      } else {
        check(s, "expectation");
      }
      const Complex series = from_c(r.series_value);
      const Complex det = from_c(closed);
      t.record(id, h, cfg.K, "series", series, det, r.defect, 0.0, flag);
      t.record(id, h, cfg.K, "det", det, det, 0.0, 0.0, "ok");
      t.pairwise.add({id, h.real(), h.imag(), std::string("series-det"),
                      flag == "ok" ? rel_defect(series, det) : std::numeric_limits<double>::quiet_NaN(), flag});
    }
  }
  if (cfg.catmap || cfg.spectrum_file) {
    const OrbitSource src = load_orbits(cfg);
    for (const Complex& h : grid) {
      rbf_bridge_result r{};
      check(rbf_orbit_bridge(src.set.get(), src.m, to_c(cfg.lambda0), to_c(h), src.L_max, &r), "orbit bridge");
      const std::string flag = r.converged ? "ok" : "not_converged";
      const Complex euler = from_c(r.euler_ratio);
      const Complex det = from_c(r.determinant_ratio);
      t.record(src.id, h, cfg.K, "orbit", euler, det, r.defect, r.tail_bound, flag);
      t.record(src.id, h, cfg.K, "det", det, det, 0.0, r.tail_bound, flag);
      t.pairwise.add({src.id, h.real(), h.imag(), std::string("orbit-det"), rel_defect(euler, det), flag});
    }
  }
  Report report{"bridge", {}};
  report.tables.push_back(std::move(t.records));
  report.tables.push_back(std::move(t.pairwise));
  return report;
}

Report cmd_diagrams(const RunConfig& cfg) {
  Report report{"diagrams", {}};
  Table enumeration{"diagrams",
                    {"order", "kind", "vertices", "edges", "tails", "loops", "hbar_exponent", "aut_unlabeled",
                     "aut_labeled"},
                    {}};
  for (int order = 1; order <= cfg.K; ++order) {
    size_t count = 0;
    std::vector<rbf_diagram_info> info(4);
    check(rbf_diagrams_enumerate(static_cast<uint32_t>(order), info.data(), info.size(), &count), "diagrams");
    for (size_t i = 0; i < count; ++i) {
      const auto& d = info[i];
      enumeration.add({static_cast<int64_t>(order), std::string(d.kind == RBF_DIAGRAM_CHAIN ? "chain" : "cycle"),
                       static_cast<int64_t>(d.vertices), static_cast<int64_t>(d.edges), static_cast<int64_t>(d.tails),
                       static_cast<int64_t>(d.loops), static_cast<int64_t>(d.hbar_exponent), d.aut_unlabeled,
                       d.aut_labeled});
    }
  }
  report.tables.push_back(std::move(enumeration));
  if (!cfg.matrix_model) return report;

  const Model model = load_matrix_model(*cfg.matrix_model);
  size_t n = 0;
  check(rbf_bf_model_full_dim(model.get(), &n), "matrix_model");
  const auto a = external(cfg.external_a, n, "external.A");
  const auto b = external(cfg.external_b, n, "external.B");
  const std::vector<Complex> lambdas = cfg.grid.empty() ? std::vector<Complex>{Complex(0.0, 0.0)} : cfg.grid;
  const double inf = std::numeric_limits<double>::infinity();

  Table values{"values",
               {"model_id", "lambda_re", "lambda_im", "kind", "vertices", "graph_re", "graph_im", "closed_form_re",
                "closed_form_im", "defect"},
               {}};
  const auto K = static_cast<uint32_t>(cfg.K);
  for (const Complex& lambda : lambdas) {
    std::vector<rbf_complex> chain(K + 1), loop(K + 2);
    check(rbf_bf_gamma_int(model.get(), 0.0, inf, to_c(lambda), a.data(), b.data(), K, chain.data(), chain.size()),
          "gamma_int");
    check(rbf_bf_gamma_tr(model.get(), to_c(lambda), K + 1, loop.data(), loop.size()), "gamma_tr");
    for (uint32_t v = 1; v <= K; ++v) {
      for (const auto kind : {RBF_DIAGRAM_CHAIN, RBF_DIAGRAM_CYCLE}) {
        rbf_complex g{};
        check(rbf_bf_diagram_value(model.get(), kind, v, to_c(lambda), a.data(), b.data(), &g), "diagram value");
        const Complex closed = from_c(kind == RBF_DIAGRAM_CHAIN ? chain[v] : loop[v + 1]);
        values.add({cfg.matrix_model->id, lambda.real(), lambda.imag(),
                    std::string(kind == RBF_DIAGRAM_CHAIN ? "chain" : "cycle"), static_cast<int64_t>(v), g.re, g.im,
                    closed.real(), closed.imag(), std::abs(from_c(g) - closed)});
      }
    }
  }
  report.tables.push_back(std::move(values));
  return report;
}

Report cmd_partition(const RunConfig& cfg) {
  const auto& mm = require_matrix_model(cfg);
  const auto& grid = require_grid(cfg);
  const Model model = load_matrix_model(mm);
  Table table{"partition",
              {"model_id", "hbar_re", "hbar_im", "value", "direct", "gauge_fixed", "relative_defect", "resonance"},
              {}};
  for (const Complex& h : grid) {
    rbf_partition_result r{};
    check(rbf_bf_partition(model.get(), to_c(h), &r), "partition");
    table.add({mm.id, h.real(), h.imag(), r.value, r.direct, r.gauge_fixed, r.relative_defect, r.resonance != 0});
  }
  Report report{"partition", {}};
  report.tables.push_back(std::move(table));
  return report;
}

void emit(const Report& report, const std::string& path, const std::string& format) {
  std::ostringstream text;
  if (format == "json") {
    cli::write_json(text, report);
  } else {
    cli::write_csv(text, report);
  }
  if (path.empty() || path == "-") {
    std::cout << text.str();
    std::cout.flush();
    return;
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw cli::ConfigError("--out", "cannot write " + path);
  out << text.str();
  if (!out) throw cli::ConfigError("--out", "write failed for " + path);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Ruelle zeta functions from periodic orbits and from a finite-dimensional BF theory", "ruelle-bf"};
  std::string command, config_path, out_path, format;
  unsigned threads = 1;
  app.add_option("command", command, "orbits | zeta | bridge | diagrams | partition")
      ->required()
      ->check(CLI::IsMember({"orbits", "zeta", "bridge", "diagrams", "partition"}));
  app.add_option("--config", config_path, "JSON run configuration")->required();
  app.add_option("--out", out_path, "Output file (default: output.path or stdout)");
  app.add_option("--format", format, "csv | json")->check(CLI::IsMember({"csv", "json"}));
  app.add_option("--threads", threads, "Worker threads for grid evaluation")->check(CLI::Range(1u, 256u));
  app.set_version_flag("--version", rbf_version());

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitConfig;
  }

  try {
    const RunConfig cfg = cli::load_config(config_path);
    const std::string path = out_path.empty() ? cfg.output_path : out_path;
    const std::string fmt = !format.empty() ? format : !cfg.output_format.empty() ? cfg.output_format : "csv";

    int rc = kExitOk;
    Report report;
    if (command == "orbits") {
      report = cmd_orbits(cfg);
    } else if (command == "zeta") {
      bool all_divergent = false;
      report = cmd_zeta(cfg, threads, all_divergent);
      if (all_divergent) {
        std::cerr << "ruelle-bf: zeta series diverges at every grid point\n";
        rc = kExitNumerical;
      }
    } else if (command == "bridge") {
      report = cmd_bridge(cfg);
    } else if (command == "diagrams") {
      report = cmd_diagrams(cfg);
    } else {
      report = cmd_partition(cfg);
    }
    emit(report, path, fmt);
    return rc;
  } catch (const cli::ConfigError& e) {
    std::cerr << "ruelle-bf: config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const ApiError& e) {
    std::cerr << "ruelle-bf: " << rbf_status_string(e.status()) << ": " << e.what() << '\n';
    return exit_code(e.status());
  } catch (const std::exception& e) {
    std::cerr << "ruelle-bf: internal error: " << e.what() << '\n';
    return kExitInternal;
  }
}
