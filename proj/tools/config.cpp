#include "config.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include <json.hpp>

namespace cli {
namespace {

using nlohmann::json;

std::string join(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }
std::string join(const std::string& path, std::size_t i) { return path + "[" + std::to_string(i) + "]"; }

void only_keys(const json& j, const std::string& path, const std::set<std::string>& allowed) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (allowed.count(it.key()) == 0) throw ConfigError(join(path, it.key()), "unknown field");
  }
}

const json& object(const json& j, const std::string& path) {
  if (!j.is_object()) throw ConfigError(path, "expected an object");
  return j;
}

double real(const json& j, const std::string& path) {
  if (!j.is_number()) throw ConfigError(path, "expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) throw ConfigError(path, "expected a finite number");
  return v;
}

double positive(const json& j, const std::string& path) {
  const double v = real(j, path);
  if (!(v > 0.0)) throw ConfigError(path, "must be positive");
  return v;
}

int positive_int(const json& j, const std::string& path) {
  if (!j.is_number_integer()) throw ConfigError(path, "expected an integer");
  const auto v = j.get<int64_t>();
  if (v <= 0 || v > std::numeric_limits<int>::max()) throw ConfigError(path, "must be a positive integer");
  return static_cast<int>(v);
}

// A number or a [re, im] pair.
Complex complex_value(const json& j, const std::string& path) {
  if (j.is_number()) return {real(j, path), 0.0};
  if (j.is_array() && j.size() == 2) return {real(j[0], join(path, 0)), real(j[1], join(path, 1))};
  throw ConfigError(path, "expected a number or [re, im]");
}

std::vector<Complex> complex_list(const json& j, const std::string& path) {
  if (!j.is_array()) throw ConfigError(path, "expected an array");
  std::vector<Complex> out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(complex_value(j[i], join(path, i)));
  return out;
}

// Square matrix as nested rows; returns the row-major entries and sets dim.
std::vector<Complex> square_matrix(const json& j, const std::string& path, int& dim) {
  if (!j.is_array() || j.empty()) throw ConfigError(path, "expected a non-empty array of rows");
  const std::size_t n = j.size();
  std::vector<Complex> out;
  for (std::size_t r = 0; r < n; ++r) {
    const std::string rp = join(path, r);
    if (!j[r].is_array() || j[r].size() != n) throw ConfigError(rp, "expected a row of length " + std::to_string(n));
    for (std::size_t c = 0; c < n; ++c) out.push_back(complex_value(j[r][c], join(rp, c)));
  }
  dim = static_cast<int>(n);
  return out;
}

CatmapSource parse_catmap(const json& j, const std::string& path) {
  object(j, path);
  only_keys(j, path, {"A", "roof"});
  CatmapSource out;
  if (!j.contains("A")) throw ConfigError(join(path, "A"), "missing");
  const json& a = j["A"];
  const std::string ap = join(path, "A");
  std::vector<int64_t> flat;
  if (a.is_array() && a.size() == 4) {
    for (std::size_t i = 0; i < 4; ++i) {
      if (!a[i].is_number_integer()) throw ConfigError(join(ap, i), "expected an integer");
      flat.push_back(a[i].get<int64_t>());
    }
  } else if (a.is_array() && a.size() == 2) {
    for (std::size_t r = 0; r < 2; ++r) {
      if (!a[r].is_array() || a[r].size() != 2) throw ConfigError(join(ap, r), "expected a row of 2 integers");
      for (std::size_t c = 0; c < 2; ++c) {
        if (!a[r][c].is_number_integer()) throw ConfigError(join(join(ap, r), c), "expected an integer");
        flat.push_back(a[r][c].get<int64_t>());
      }
    }
  } else {
    throw ConfigError(ap, "expected 4 integers or a 2x2 array");
  }
  for (std::size_t i = 0; i < 4; ++i) out.A[i] = flat[i];
  if (j.contains("roof")) out.roof = positive(j["roof"], join(path, "roof"));
  return out;
}

MatrixModel parse_matrix_model(const json& j, const std::string& path) {
  object(j, path);
  only_keys(j, path, {"id", "blocks"});
  MatrixModel out;
  if (j.contains("id")) {
    if (!j["id"].is_string()) throw ConfigError(join(path, "id"), "expected a string");
    out.id = j["id"].get<std::string>();
  }
  const std::string bp = join(path, "blocks");
  if (!j.contains("blocks")) throw ConfigError(bp, "missing");
  if (!j["blocks"].is_array() || j["blocks"].empty()) throw ConfigError(bp, "expected a non-empty array");
  std::set<int> seen;
  for (std::size_t b = 0; b < j["blocks"].size(); ++b) {
    const json& block = j["blocks"][b];
    const std::string p = join(bp, b);
    object(block, p);
    only_keys(block, p, {"degree", "L", "iota"});
    MatrixBlock mb;
    if (block.contains("degree")) {
      if (!block["degree"].is_number_integer() || block["degree"].get<int64_t>() < 0 ||
          block["degree"].get<int64_t>() > 64) {
        throw ConfigError(join(p, "degree"), "expected an integer in [0, 64]");
      }
      mb.degree = block["degree"].get<int>();
    }
    if (!seen.insert(mb.degree).second) throw ConfigError(join(p, "degree"), "duplicate degree");
    if (!block.contains("L")) throw ConfigError(join(p, "L"), "missing");
    mb.L = square_matrix(block["L"], join(p, "L"), mb.dim);
    if (block.contains("iota")) {
      int dim = 0;
      mb.iota = square_matrix(block["iota"], join(p, "iota"), dim);
      if (dim != mb.dim) throw ConfigError(join(p, "iota"), "must have the same size as L");
    }
    out.blocks.push_back(std::move(mb));
  }
  return out;
}

}  // namespace

RunConfig parse_config(const std::string& text, const std::string& base_dir) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError("$", std::string("invalid JSON: ") + e.what());
  }
  object(root, "$");
  only_keys(root, "", {"model", "rep", "truncation", "grid", "lambda0", "matrix_model", "external", "output"});

  RunConfig cfg;
  if (root.contains("model")) {
    const json& model = object(root["model"], "model");
    only_keys(model, "model", {"catmap", "spectrum_file"});
    if (model.contains("catmap") == model.contains("spectrum_file")) {
      throw ConfigError("model", "exactly one of catmap, spectrum_file is required");
    }
    if (model.contains("catmap")) cfg.catmap = parse_catmap(model["catmap"], "model.catmap");
    if (model.contains("spectrum_file")) {
      if (!model["spectrum_file"].is_string()) throw ConfigError("model.spectrum_file", "expected a string");
      std::filesystem::path p(model["spectrum_file"].get<std::string>());
      if (p.is_relative() && !base_dir.empty()) p = std::filesystem::path(base_dir) / p;
      cfg.spectrum_file = p.string();
    }
  }

  if (root.contains("rep")) {
    const json& rep = root["rep"];
    if (rep.is_string()) {
      if (rep.get<std::string>() != "trivial") throw ConfigError("rep", "expected \"trivial\" or {\"character\": theta}");
    } else if (rep.is_object()) {
      only_keys(rep, "rep", {"character"});
      if (!rep.contains("character")) throw ConfigError("rep.character", "missing");
      cfg.character = true;
      cfg.angle = real(rep["character"], "rep.character");
    } else {
      throw ConfigError("rep", "expected \"trivial\" or {\"character\": theta}");
    }
  }

  if (root.contains("truncation")) {
    const json& t = object(root["truncation"], "truncation");
    only_keys(t, "truncation", {"n_max", "L_max", "K"});
    if (t.contains("n_max")) cfg.n_max = positive_int(t["n_max"], "truncation.n_max");
    if (t.contains("L_max")) cfg.L_max = positive(t["L_max"], "truncation.L_max");
    if (t.contains("K")) cfg.K = positive_int(t["K"], "truncation.K");
    if (cfg.n_max > 64) throw ConfigError("truncation.n_max", "must be at most 64");
    if (cfg.K > 64) throw ConfigError("truncation.K", "must be at most 64");
  }

  if (root.contains("grid")) cfg.grid = complex_list(root["grid"], "grid");
  if (root.contains("lambda0")) cfg.lambda0 = complex_value(root["lambda0"], "lambda0");
  if (root.contains("matrix_model")) cfg.matrix_model = parse_matrix_model(root["matrix_model"], "matrix_model");

  if (root.contains("external")) {
    const json& e = object(root["external"], "external");
    only_keys(e, "external", {"A", "B"});
    if (e.contains("A")) cfg.external_a = complex_list(e["A"], "external.A");
    if (e.contains("B")) cfg.external_b = complex_list(e["B"], "external.B");
  }

  if (root.contains("output")) {
    const json& o = object(root["output"], "output");
    only_keys(o, "output", {"path", "format"});
    if (o.contains("path")) {
      if (!o["path"].is_string()) throw ConfigError("output.path", "expected a string");
      std::filesystem::path p(o["path"].get<std::string>());
      if (p.is_relative() && !base_dir.empty()) p = std::filesystem::path(base_dir) / p;
      cfg.output_path = p.string();
    }
    if (o.contains("format")) {
      if (!o["format"].is_string()) throw ConfigError("output.format", "expected a string");
      cfg.output_format = o["format"].get<std::string>();
      if (cfg.output_format != "csv" && cfg.output_format != "json") {
        throw ConfigError("output.format", "expected \"csv\" or \"json\"");
      }
    }
  }
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("--config", "cannot open " + path);
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config(text.str(), std::filesystem::path(path).parent_path().string());
}

}  // namespace cli
