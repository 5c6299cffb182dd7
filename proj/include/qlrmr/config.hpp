#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "qlrmr/solver_config.hpp"
#include "qlrmr/synthdata.hpp"

namespace qlrmr {

inline constexpr int kConfigSchemaVersion = 1;

enum class ModelKind { lrmr_constrained, lrmr_regularized, l2rm, ols };
enum class ThetaSource { lowrank, demo, image, csv };

std::string to_string(ModelKind m);
std::string to_string(ThetaSource t);

struct GenConfig {
  std::size_t d1 = 50;
  std::size_t d2 = 60;
  std::size_t r = 5;  // rank of Theta0, or of each block for matrix responses
  std::size_t s = 4;
  std::size_t p = 30;
  std::size_t q = 30;
  std::size_t image_size = 32;
  double noise_level = 0.1;
  bool noise_level_is_std = false;
  // Noise std = noise_level * e and quantization levels are multiples of e,
  // where e is the mean absolute entry of the noiseless responses.
  bool signal_relative = false;
  ThetaSource theta = ThetaSource::lowrank;
  std::string theta_csv;
  CovariateKind covariates = CovariateKind::gaussian;
  bool fixed_truth = false;

  double noise_std() const { return noise_std_from_level(noise_level, noise_level_is_std); }
};

struct RealDataConfig {
  std::string x_csv;
  std::string y_csv;
  bool samples_are_rows = false;
  std::size_t n_test = 0;  // 0: fit and predict on all samples
};

struct ExperimentConfig {
  int schema_version = kConfigSchemaVersion;
  ModelKind model = ModelKind::lrmr_regularized;
  GenConfig gen;
  RealDataConfig data;
  std::vector<std::size_t> n_grid{1000};
  std::vector<double> delta1_grid{0.0};
  std::vector<double> delta2_grid{0.0};
  bool dither_enabled = true;
  std::size_t trials = 50;
  std::uint64_t base_seed = 0;
  SolverConfig solver;
  double lambda_scale = 1.0;
  // lambda = (lambda_scale + lambda_delta_gain * (delta1 + delta2)) * sqrt((d1 + d2) / n)
  double lambda_delta_gain = 0.0;
  std::optional<double> radius;  // constrained model; unset means ||Theta0||_nu
  bool record_runtime = false;
  std::vector<double> calibration_scales;

  bool matrix_response() const { return model == ModelKind::l2rm; }
  void validate() const;
};

/// Strict parse: unknown keys and type mismatches raise ErrorKind::config
/// with the dotted path of the offending entry.
ExperimentConfig experiment_config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ExperimentConfig& cfg);

struct DitherDemoConfig {
  int schema_version = kConfigSchemaVersion;
  std::size_t n = 1000000;
  std::vector<double> deltas{1.0};
  std::vector<DitherKind> kinds{DitherKind::uniform, DitherKind::triangular};
  std::string input = "gaussian";  // gaussian | uniform | constant
  std::uint64_t base_seed = 0;

  void validate() const;
};

DitherDemoConfig dither_demo_config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const DitherDemoConfig& cfg);

std::string to_string(DitherKind k);

}  // namespace qlrmr
