#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "qlrmr/config.hpp"

namespace qlrmr {

/// One estimate in one grid cell. Failed trials carry NaN errors and
/// converged = false.
struct TrialRecord {
  std::string model;
  std::size_t n = 0;
  std::size_t d1 = 0;
  std::size_t d2 = 0;
  std::size_t r = 0;
  double delta1 = 0.0;
  double delta2 = 0.0;
  std::size_t trial = 0;
  std::uint64_t seed = 0;
  double frob_error = 0.0;
  double rel_error = 0.0;
  double pred_error = 0.0;
  int iterations = 0;
  double runtime_ms = 0.0;
  bool converged = false;

  bool operator==(const TrialRecord&) const = default;
};

struct ExperimentResult {
  std::vector<TrialRecord> records;  // sorted by (model, n, delta1, delta2, trial)
};

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;
};

struct CellSummary {
  std::string model;
  std::size_t n = 0;
  double delta1 = 0.0;
  double delta2 = 0.0;
  std::size_t trials = 0;
  std::size_t failed = 0;  // non-finite errors; excluded from the statistics
  MeanStd frob_error;
  MeanStd rel_error;
  MeanStd pred_error;
  MeanStd iterations;
};

std::vector<CellSummary> summarize(const ExperimentResult& result);

/// Multi-trial sweep over n_grid x delta1_grid x delta2_grid.
///
/// Streams: truth from (base_seed, trial), data from (base_seed, n, trial),
/// dither from (base_seed, n, delta1, delta2, trial). Quantization levels
/// therefore compare estimates on identical data. threads == 0 uses all cores.
ExperimentResult run_error_curve(const ExperimentConfig& cfg, unsigned threads = 0);

/// The same sweep twice on identical data: dithered (model name) and plain
/// Q_delta without dither (model name + "/nodither").
ExperimentResult run_dither_comparison(const ExperimentConfig& cfg, unsigned threads = 0);

/// Regularized Lasso and OLS on the same quantized data.
ExperimentResult run_lasso_vs_ols(const ExperimentConfig& cfg, unsigned threads = 0);

/// CSV data study. The reference is the regularized estimate on unquantized
/// training data; rel_error is relative to it and pred_error is measured on
/// the test split (or all samples when data.n_test == 0).
ExperimentResult run_real_data_study(const ExperimentConfig& cfg, unsigned threads = 0);

struct CalibrationPoint {
  double scale = 0.0;
  double mean_rel_error = 0.0;
};

/// Grid search over lambda_scale values. Empty `scales` falls back to
/// cfg.calibration_scales, then to {0.5, 1, 2, 4} * cfg.lambda_scale.
std::vector<CalibrationPoint> calibrate_lambda_scale(const ExperimentConfig& cfg,
                                                     std::vector<double> scales,
                                                     unsigned threads = 0);

/// Least-squares slope of log(error) against log(n). Needs >= 3 positive points.
double fit_loglog_slope(std::span<const std::pair<double, double>> points);

/// Spearman rank correlation (average ranks for ties).
double spearman_correlation(std::span<const double> a, std::span<const double> b);

// Dither statistics demo.
struct DitherDemoRow {
  DitherKind kind = DitherKind::uniform;
  double delta = 0.0;
  std::size_t n = 0;
  NoiseMoments moments;
};

std::vector<DitherDemoRow> run_dither_demo(const DitherDemoConfig& cfg);
void write_dither_demo_csv(std::span<const DitherDemoRow> rows, const std::filesystem::path& path);

/// Writes the truth and the first trial's dataset at n_grid[0] as CSV:
/// theta0.csv (or theta_block_<i>.csv), X.csv, Y.csv (vectorized responses
/// for matrix-response models).
void write_generated_data(const ExperimentConfig& cfg, const std::filesystem::path& out_dir);

// Persistence.
inline constexpr const char* kResultsHeader =
    "model,n,d1,d2,r,delta1,delta2,trial,seed,frob_error,rel_error,pred_error,iterations,"
    "runtime_ms,converged";

void write_results_csv(const ExperimentResult& result, const std::filesystem::path& path);
ExperimentResult read_results_csv(const std::filesystem::path& path);
nlohmann::json summary_json(const ExperimentResult& result);
/// results.csv, summary.json and plot_results.py under `dir`.
void write_results(const ExperimentResult& result, const std::filesystem::path& dir);
/// Python/matplotlib script that reads the sibling results.csv and draws
/// log-log mean-error curves per (model, delta1, delta2).
void emit_plot_script(const ExperimentResult& result, const std::filesystem::path& path);

}  // namespace qlrmr
