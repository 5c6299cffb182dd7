#include "qlrmr/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <numeric>
#include <optional>
#include <thread>

#include "qlrmr/csv.hpp"
#include "qlrmr/error.hpp"

namespace qlrmr {

namespace {

// Stream tags for derive_seed.
enum : std::uint64_t { kTruth = 1, kData = 2, kDither = 3, kSplit = 4, kInput = 5 };

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

unsigned resolve_threads(unsigned threads) {
  if (threads != 0) return threads;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : hw;
}

// Runs body(i) for i in [0, count) on up to `threads` workers; rethrows the
// first exception after all workers stop.
template <class Body>
void parallel_for(std::size_t count, unsigned threads, Body body) {
  const unsigned workers = static_cast<unsigned>(
      std::min<std::size_t>(resolve_threads(threads), std::max<std::size_t>(count, 1)));
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto work = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= count) return;
      try {
        body(i);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next.store(count);
        return;
      }
    }
  };
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);
}

void sort_records(std::vector<TrialRecord>& records) {
  std::sort(records.begin(), records.end(), [](const TrialRecord& a, const TrialRecord& b) {
    return std::tie(a.model, a.n, a.delta1, a.delta2, a.trial) <
           std::tie(b.model, b.n, b.delta1, b.delta2, b.trial);
  });
}

struct Truth {
  Matrix theta;  // d1 x d2, or rearranged s x pq for matrix responses
  std::size_t p = 0;
  std::size_t q = 0;
  std::size_t rank = 0;  // 0 when not known exactly
};

// Inputs loaded once per sweep.
struct SweepContext {
  const ExperimentConfig& cfg;
  std::optional<Matrix> csv_theta;

  explicit SweepContext(const ExperimentConfig& c) : cfg(c) {
    if (!cfg.matrix_response() && cfg.gen.theta == ThetaSource::csv)
      csv_theta = read_csv_matrix(cfg.gen.theta_csv);
  }
};

Truth make_truth(const SweepContext& ctx, std::size_t trial) {
  const ExperimentConfig& cfg = ctx.cfg;
  Rng rng(derive_seed(cfg.base_seed, {kTruth, cfg.gen.fixed_truth ? 0 : trial}));
  Truth t;
  if (cfg.matrix_response()) {
    BlockCoefficients blocks;
    switch (cfg.gen.theta) {
      case ThetaSource::demo:
        blocks = make_demo_blocks_l2rm();
        t.rank = 20;
        break;
      case ThetaSource::image:
        blocks = make_image_blocks_l2rm(cfg.gen.image_size);
        break;
      default:
        blocks = gen_lowrank_blocks(cfg.gen.s, cfg.gen.p, cfg.gen.q, cfg.gen.r, rng);
        t.rank = cfg.gen.s * cfg.gen.r;
        break;
    }
    t.p = blocks.p();
    t.q = blocks.q();
    t.theta = rearrange(blocks);
  } else {
    switch (cfg.gen.theta) {
      case ThetaSource::demo:
        t.theta = make_demo_theta_lrmr();
        t.rank = 10;
        break;
      case ThetaSource::csv:
        t.theta = *ctx.csv_theta;
        break;
      default:
        t.theta = gen_lowrank_theta(cfg.gen.d1, cfg.gen.d2, cfg.gen.r, rng);
        t.rank = cfg.gen.r;
        break;
    }
  }
  return t;
}

struct Instance {
  Dataset data;
  double delta_unit = 1.0;  // e for signal-relative recipes
};

Instance make_instance(const ExperimentConfig& cfg, const Truth& truth, std::size_t n,
                       std::size_t trial) {
  Rng rng(derive_seed(cfg.base_seed, {kData, n, trial}));
  if (cfg.matrix_response()) {
    MatrixResponseDataset mr = gen_l2rm_dataset(inverse_rearrange(truth.theta, truth.p, truth.q),
                                                n, cfg.gen.noise_std(), rng, cfg.gen.covariates);
    return {Dataset(mr.x(), mr.responses()), 1.0};
  }
  if (cfg.gen.signal_relative) {
    auto [data, e] = gen_lrmr_dataset_signal_relative(truth.theta, n, cfg.gen.noise_level, rng);
    return {std::move(data), e};
  }
  return {gen_lrmr_dataset(truth.theta, n, cfg.gen.noise_std(), rng, cfg.gen.covariates), 1.0};
}

double lambda_for(const ExperimentConfig& cfg, const Truth& truth, const Dataset& data,
                  double delta1, double delta2) {
  const double scale = cfg.lambda_scale + cfg.lambda_delta_gain * (delta1 + delta2);
  if (cfg.matrix_response()) return l2rm_lambda_schedule(truth.p, truth.q, data.n(), scale);
  return lambda_schedule(data.d1(), data.d2(), data.n(), scale);
}

struct Fit {
  Matrix theta;
  int iterations = 0;
  bool converged = false;
};

Fit estimate(const ExperimentConfig& cfg, ModelKind estimator, const SurrogateCovs& covs,
             const Truth& truth, double lambda, double radius) {
  Fit f;
  switch (estimator) {
    case ModelKind::lrmr_regularized: {
      EstimateReport r = regularized_lasso(covs, lambda, cfg.solver);
      f = {std::move(r.theta_hat), r.iterations, r.converged};
      break;
    }
    case ModelKind::lrmr_constrained: {
      EstimateReport r = constrained_lasso(covs, radius, cfg.solver);
      f = {std::move(r.theta_hat), r.iterations, r.converged};
      break;
    }
    case ModelKind::l2rm: {
      L2rmEstimate r = l2rm_regularized(covs, truth.p, truth.q, lambda, cfg.solver);
      f = {std::move(r.report.theta_hat), r.report.iterations, r.report.converged};
      break;
    }
    case ModelKind::ols: {
      EstimateReport r = ols_baseline(covs);
      f = {std::move(r.theta_hat), r.iterations, r.converged};
      break;
    }
  }
  return f;
}

struct Variant {
  std::string label;
  ModelKind estimator;
  DitherMode mode;
};

TrialRecord blank_record(const Variant& v, const Dataset& data, const Truth& truth, double delta1,
                         double delta2, std::size_t trial, std::uint64_t seed) {
  TrialRecord rec;
  rec.model = v.label;
  rec.n = data.n();
  rec.d1 = data.d1();
  rec.d2 = data.d2();
  rec.r = truth.rank;
  rec.delta1 = delta1;
  rec.delta2 = delta2;
  rec.trial = trial;
  rec.seed = seed;
  rec.frob_error = rec.rel_error = rec.pred_error = kNaN;
  return rec;
}

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

// Quantizes `data` once per dither mode and fits every variant on it.
void run_cell(const ExperimentConfig& cfg, std::span<const Variant> variants, const Truth& truth,
              const Dataset& data, const Dataset& eval_data, double delta_unit, double delta1,
              double delta2, std::size_t trial, std::uint64_t seed, double radius,
              std::vector<TrialRecord>& out) {
  std::optional<SurrogateCovs> covs[2];
  const double truth_norm = truth.theta.norm();
  for (const Variant& v : variants) {
    TrialRecord rec = blank_record(v, data, truth, delta1, delta2, trial, seed);
    const auto start = Clock::now();
    try {
      auto& slot = covs[v.mode == DitherMode::dithered ? 0 : 1];
      if (!slot) {
        Rng rng(seed);
        const QuantConfig qc{delta1 * delta_unit, delta2 * delta_unit};
        slot = surrogate_covariances(quantize_dataset(data, qc, rng, v.mode));
      }
      const double lambda = lambda_for(cfg, truth, data, delta1, delta2);
      Fit fit = estimate(cfg, v.estimator, *slot, truth, lambda, radius);
      rec.frob_error = (fit.theta - truth.theta).norm();
      rec.rel_error = truth_norm > 0.0 ? rec.frob_error / truth_norm : kNaN;
      rec.pred_error = prediction_error(fit.theta, eval_data);
      rec.iterations = fit.iterations;
      rec.converged = fit.converged;
    } catch (const Error&) {
      rec.converged = false;
    }
    if (cfg.record_runtime) rec.runtime_ms = elapsed_ms(start);
    out.push_back(std::move(rec));
  }
}

ExperimentResult run_sweep(const ExperimentConfig& cfg, const std::vector<Variant>& variants,
                           unsigned threads) {
  cfg.validate();
  const SweepContext ctx(cfg);
  const std::size_t tasks = cfg.n_grid.size() * cfg.trials;
  std::vector<std::vector<TrialRecord>> per_task(tasks);
  parallel_for(tasks, threads, [&](std::size_t task) {
    const std::size_t n = cfg.n_grid[task / cfg.trials];
    const std::size_t trial = task % cfg.trials;
    const Truth truth = make_truth(ctx, trial);
    const Instance inst = make_instance(cfg, truth, n, trial);
    const double radius =
        cfg.radius ? *cfg.radius
                   : (cfg.model == ModelKind::lrmr_constrained ? nuclear_norm(truth.theta) : 1.0);
    auto& out = per_task[task];
    for (double d1 : cfg.delta1_grid) {
      for (double d2 : cfg.delta2_grid) {
        const std::uint64_t seed =
            derive_seed(cfg.base_seed, {kDither, n, seed_bits(d1), seed_bits(d2), trial});
        run_cell(cfg, variants, truth, inst.data, inst.data, inst.delta_unit, d1, d2, trial,
                 seed, radius, out);
      }
    }
  });
  ExperimentResult result;
  for (auto& v : per_task)
    result.records.insert(result.records.end(), std::make_move_iterator(v.begin()),
                          std::make_move_iterator(v.end()));
  sort_records(result.records);
  return result;
}

std::string label(ModelKind m) { return to_string(m); }

}  // namespace

ExperimentResult run_error_curve(const ExperimentConfig& cfg, unsigned threads) {
  const DitherMode mode = cfg.dither_enabled ? DitherMode::dithered : DitherMode::undithered;
  std::string name = label(cfg.model);
  if (!cfg.dither_enabled) name += "/nodither";
  return run_sweep(cfg, {{name, cfg.model, mode}}, threads);
}

ExperimentResult run_dither_comparison(const ExperimentConfig& cfg, unsigned threads) {
  return run_sweep(cfg,
                   {{label(cfg.model), cfg.model, DitherMode::dithered},
                    {label(cfg.model) + "/nodither", cfg.model, DitherMode::undithered}},
                   threads);
}

ExperimentResult run_lasso_vs_ols(const ExperimentConfig& cfg, unsigned threads) {
  const ModelKind lasso = cfg.model == ModelKind::ols ? ModelKind::lrmr_regularized : cfg.model;
  const DitherMode mode = cfg.dither_enabled ? DitherMode::dithered : DitherMode::undithered;
  return run_sweep(cfg, {{label(lasso), lasso, mode}, {label(ModelKind::ols), ModelKind::ols, mode}},
                   threads);
}

ExperimentResult run_real_data_study(const ExperimentConfig& cfg, unsigned threads) {
  cfg.validate();
  if (cfg.matrix_response())
    throw Error(ErrorKind::config, "config.model: the CSV study supports vector responses only");
  if (cfg.data.x_csv.empty() || cfg.data.y_csv.empty())
    throw Error(ErrorKind::config, "config.data: x_csv and y_csv are required");
  const Dataset all = load_csv_dataset(cfg.data.x_csv, cfg.data.y_csv, cfg.data.samples_are_rows);
  if (cfg.data.n_test >= all.n())
    throw Error(ErrorKind::config, "config.data.n_test: must be smaller than the sample count");

  const DitherMode mode = cfg.dither_enabled ? DitherMode::dithered : DitherMode::undithered;
  std::string name = label(cfg.model);
  if (!cfg.dither_enabled) name += "/nodither";
  const std::vector<Variant> variants{{name, cfg.model, mode}};

  std::vector<std::vector<TrialRecord>> per_trial(cfg.trials);
  parallel_for(cfg.trials, threads, [&](std::size_t trial) {
    std::optional<Dataset> train, test;
    if (cfg.data.n_test > 0) {
      Rng rng(derive_seed(cfg.base_seed, {kSplit, trial}));
      auto parts = train_test_split(all, cfg.data.n_test, rng);
      train = std::move(parts.first);
      test = std::move(parts.second);
    } else {
      train = all;
      test = all;
    }
    const SurrogateCovs ref_covs = surrogate_covariances(train->x(), train->y(), 0.0);
    Truth reference;
    reference.theta =
        regularized_lasso(ref_covs, lambda_schedule(train->d1(), train->d2(), train->n(),
                                                    cfg.lambda_scale),
                          cfg.solver)
            .theta_hat;
    const double radius = cfg.radius ? *cfg.radius : nuclear_norm(reference.theta);
    for (double d1 : cfg.delta1_grid) {
      for (double d2 : cfg.delta2_grid) {
        const std::uint64_t seed = derive_seed(
            cfg.base_seed, {kDither, train->n(), seed_bits(d1), seed_bits(d2), trial});
        run_cell(cfg, variants, reference, *train, *test, 1.0, d1, d2, trial, seed, radius,
                 per_trial[trial]);
      }
    }
  });
  ExperimentResult result;
  for (auto& v : per_trial)
    result.records.insert(result.records.end(), std::make_move_iterator(v.begin()),
                          std::make_move_iterator(v.end()));
  sort_records(result.records);
  return result;
}

std::vector<CalibrationPoint> calibrate_lambda_scale(const ExperimentConfig& cfg,
                                                     std::vector<double> scales,
                                                     unsigned threads) {
  if (scales.empty()) scales = cfg.calibration_scales;
  if (scales.empty()) {
    for (double m : {0.5, 1.0, 2.0, 4.0}) scales.push_back(m * cfg.lambda_scale);
  }
  std::vector<CalibrationPoint> out;
  for (double scale : scales) {
    ExperimentConfig c = cfg;
    c.lambda_scale = scale;
    const ExperimentResult r = run_error_curve(c, threads);
    double sum = 0.0;
    std::size_t count = 0;
    for (const TrialRecord& rec : r.records) {
      if (std::isfinite(rec.rel_error)) {
        sum += rec.rel_error;
        ++count;
      }
    }
    out.push_back({scale, count ? sum / static_cast<double>(count) : kNaN});
  }
  return out;
}

std::vector<CellSummary> summarize(const ExperimentResult& result) {
  std::vector<CellSummary> cells;
  auto stats = [](const std::vector<double>& v) {
    MeanStd ms;
    if (v.empty()) return MeanStd{kNaN, kNaN};
    ms.mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
    if (v.size() > 1) {
      double ss = 0.0;
      for (double x : v) ss += (x - ms.mean) * (x - ms.mean);
      ms.std = std::sqrt(ss / static_cast<double>(v.size() - 1));
    }
    return ms;
  };
  std::size_t i = 0;
  const auto& recs = result.records;
  while (i < recs.size()) {
    std::size_t j = i;
    CellSummary c;
    c.model = recs[i].model;
    c.n = recs[i].n;
    c.delta1 = recs[i].delta1;
    c.delta2 = recs[i].delta2;
    std::vector<double> frob, rel, pred, iters;
    while (j < recs.size() && recs[j].model == c.model && recs[j].n == c.n &&
           recs[j].delta1 == c.delta1 && recs[j].delta2 == c.delta2) {
      const TrialRecord& r = recs[j];
      ++c.trials;
      if (std::isfinite(r.frob_error)) {
        frob.push_back(r.frob_error);
        if (std::isfinite(r.rel_error)) rel.push_back(r.rel_error);
        if (std::isfinite(r.pred_error)) pred.push_back(r.pred_error);
        iters.push_back(r.iterations);
      } else {
        ++c.failed;
      }
      ++j;
    }
    c.frob_error = stats(frob);
    c.rel_error = stats(rel);
    c.pred_error = stats(pred);
    c.iterations = stats(iters);
    cells.push_back(std::move(c));
    i = j;
  }
  return cells;
}

double fit_loglog_slope(std::span<const std::pair<double, double>> points) {
  require(points.size() >= 3, ErrorKind::invalid_argument,
          "fit_loglog_slope: need at least 3 points");
  double mx = 0.0, my = 0.0;
  for (const auto& [n, e] : points) {
    require(n > 0.0 && e > 0.0 && std::isfinite(n) && std::isfinite(e),
            ErrorKind::invalid_argument, "fit_loglog_slope: values must be positive");
    mx += std::log(n);
    my += std::log(e);
  }
  const double k = static_cast<double>(points.size());
  mx /= k;
  my /= k;
  double sxx = 0.0, sxy = 0.0;
  for (const auto& [n, e] : points) {
    sxx += (std::log(n) - mx) * (std::log(n) - mx);
    sxy += (std::log(n) - mx) * (std::log(e) - my);
  }
  require(sxx > 0.0, ErrorKind::invalid_argument, "fit_loglog_slope: sample sizes must differ");
  return sxy / sxx;
}

namespace {

std::vector<double> average_ranks(std::span<const double> v) {
  std::vector<std::size_t> idx(v.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> ranks(v.size());
  std::size_t i = 0;
  while (i < idx.size()) {
    std::size_t j = i;
    while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
    const double r = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[idx[k]] = r;
    i = j + 1;
  }
  return ranks;
}

}  // namespace

double spearman_correlation(std::span<const double> a, std::span<const double> b) {
  require(a.size() == b.size() && a.size() >= 2, ErrorKind::invalid_argument,
          "spearman_correlation: need two equal-length samples");
  const std::vector<double> ra = average_ranks(a), rb = average_ranks(b);
  return sample_correlation(ra, rb);
}

std::vector<DitherDemoRow> run_dither_demo(const DitherDemoConfig& cfg) {
  cfg.validate();
  Rng input_rng(derive_seed(cfg.base_seed, {kInput}));
  std::vector<double> input(cfg.n);
  for (double& x : input) {
    if (cfg.input == "gaussian") {
      x = input_rng.normal();
    } else if (cfg.input == "uniform") {
      x = input_rng.uniform(0.0, 10.0);
    } else {
      x = 0.3;
    }
  }
  std::vector<DitherDemoRow> rows;
  for (DitherKind kind : cfg.kinds) {
    for (double delta : cfg.deltas) {
      Rng rng(derive_seed(cfg.base_seed, {kDither, static_cast<std::uint64_t>(kind),
                                          seed_bits(delta)}));
      const QuantRecord rec = quantize_with_dither(input, delta, kind, rng);
      rows.push_back({kind, delta, cfg.n, noise_moment_report(rec)});
    }
  }
  return rows;
}

void write_generated_data(const ExperimentConfig& cfg, const std::filesystem::path& out_dir) {
  cfg.validate();
  std::filesystem::create_directories(out_dir);
  const SweepContext ctx(cfg);
  const Truth truth = make_truth(ctx, 0);
  const Instance inst = make_instance(cfg, truth, cfg.n_grid.front(), 0);
  if (cfg.matrix_response()) {
    const BlockCoefficients blocks = inverse_rearrange(truth.theta, truth.p, truth.q);
    for (std::size_t i = 0; i < blocks.s(); ++i)
      write_csv_matrix(blocks.blocks[i], out_dir / ("theta_block_" + std::to_string(i + 1) + ".csv"));
  } else {
    write_csv_matrix(truth.theta, out_dir / "theta0.csv");
  }
  write_csv_matrix(inst.data.x(), out_dir / "X.csv");
  write_csv_matrix(inst.data.y(), out_dir / "Y.csv");
}

}  // namespace qlrmr
