#pragma once

#include <array>
#include <complex>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace cli {

using Complex = std::complex<double>;

// Carries the JSON path of the offending field, e.g. "truncation.L_max".
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& path, const std::string& message)
      : std::runtime_error(path + ": " + message), path_(path) {}
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

struct CatmapSource {
  std::array<int64_t, 4> A{2, 1, 1, 1};
  double roof = 1.0;
};

struct MatrixBlock {
  int degree = 0;
  int dim = 0;
  std::vector<Complex> L;     // row-major
  std::vector<Complex> iota;  // empty for identity
};

struct MatrixModel {
  std::string id = "matrix";
  std::vector<MatrixBlock> blocks;
};

struct RunConfig {
  std::optional<CatmapSource> catmap;
  std::optional<std::string> spectrum_file;  // resolved against the config directory
  bool character = false;
  double angle = 0.0;
  int n_max = 12;
  double L_max = 0.0;  // 0: derived from the model
  int K = 8;
  std::vector<Complex> grid;
  Complex lambda0{3.0, 0.0};
  std::optional<MatrixModel> matrix_model;
  std::vector<Complex> external_a, external_b;
  std::string output_path;
  std::string output_format;
};

RunConfig load_config(const std::string& path);
RunConfig parse_config(const std::string& text, const std::string& base_dir);

}  // namespace cli
