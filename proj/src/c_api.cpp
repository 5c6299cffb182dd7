#include "qlrmr/qlrmr.h"

#include <cstring>
#include <exception>
#include <new>
#include <string>

#include "qlrmr/config.hpp"
#include "qlrmr/csv.hpp"
#include "qlrmr/error.hpp"
#include "qlrmr/harness.hpp"
#include "qlrmr/l2rm.hpp"
#include "qlrmr/lrmr.hpp"

struct qlrmr_matrix {
  qlrmr::Matrix m;
};
struct qlrmr_rng {
  qlrmr::Rng rng;
};
struct qlrmr_result {
  qlrmr::ExperimentResult result;
};

namespace {

thread_local std::string g_last_error;

qlrmr_status status_of(qlrmr::ErrorKind kind) {
  using qlrmr::ErrorKind;
  switch (kind) {
    case ErrorKind::invalid_argument: return QLRMR_INVALID_ARGUMENT;
    case ErrorKind::dimension: return QLRMR_DIMENSION;
    case ErrorKind::numeric: return QLRMR_NUMERIC;
    case ErrorKind::config: return QLRMR_CONFIG;
    case ErrorKind::io: return QLRMR_IO;
    case ErrorKind::parse: return QLRMR_PARSE;
  }
  return QLRMR_INTERNAL;
}

template <class F>
qlrmr_status guarded(F&& f) {
  try {
    f();
    g_last_error.clear();
    return QLRMR_OK;
  } catch (const qlrmr::Error& e) {
    g_last_error = e.what();
    return status_of(e.kind());
  } catch (const nlohmann::json::exception& e) {
    g_last_error = std::string("config: ") + e.what();
    return QLRMR_CONFIG;
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return QLRMR_INTERNAL;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return QLRMR_INTERNAL;
  } catch (...) {
    g_last_error = "unknown error";
    return QLRMR_INTERNAL;
  }
}

void need(const void* p, const char* name) {
  if (p == nullptr)
    throw qlrmr::Error(qlrmr::ErrorKind::invalid_argument, std::string(name) + " is NULL");
}

char* dup_string(const std::string& s) {
  char* out = new char[s.size() + 1];
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

qlrmr_matrix* wrap(qlrmr::Matrix m) { return new qlrmr_matrix{std::move(m)}; }

qlrmr::DitherKind dither_of(qlrmr_dither_kind k) {
  switch (k) {
    case QLRMR_DITHER_NONE: return qlrmr::DitherKind::none;
    case QLRMR_DITHER_UNIFORM: return qlrmr::DitherKind::uniform;
    case QLRMR_DITHER_TRIANGULAR: return qlrmr::DitherKind::triangular;
  }
  throw qlrmr::Error(qlrmr::ErrorKind::invalid_argument, "unknown dither kind");
}

qlrmr::SolverConfig solver_of(const qlrmr_solver_options* o) {
  qlrmr::SolverConfig cfg;
  if (o != nullptr) {
    cfg.max_iters = o->max_iters;
    cfg.rel_tol = o->rel_tol;
    cfg.step = o->backtracking ? qlrmr::StepPolicy::backtracking(o->beta, o->eta)
                               : qlrmr::StepPolicy::fixed(o->eta);
    cfg.acceleration = o->acceleration != 0;
  }
  cfg.validate();
  return cfg;
}

qlrmr::SurrogateCovs covs_of(const qlrmr_matrix* sxx, const qlrmr_matrix* sxy) {
  need(sxx, "sxx");
  need(sxy, "sxy");
  qlrmr::SurrogateCovs c;
  c.sxx = sxx->m;
  c.sxy = sxy->m;
  return c;
}

void fill_info(const qlrmr::EstimateReport& r, qlrmr_fit_info* info) {
  if (info == nullptr) return;
  info->iterations = r.iterations;
  info->converged = r.converged ? 1 : 0;
  info->final_objective = r.final_objective;
  info->stationarity_residual = r.stationarity_residual;
  info->min_eig_sxx = r.min_eig_sxx;
  info->step = r.step;
}

nlohmann::json parse_json(const char* text) {
  need(text, "config_json");
  return nlohmann::json::parse(text);
}

qlrmr::ExperimentConfig experiment_of(const char* text) {
  qlrmr::ExperimentConfig cfg = qlrmr::experiment_config_from_json(parse_json(text));
  cfg.validate();
  return cfg;
}

}  // namespace

extern "C" {

const char* qlrmr_version(void) { return QLRMR_VERSION_STRING; }
const char* qlrmr_last_error(void) { return g_last_error.c_str(); }
void qlrmr_string_free(char* s) { delete[] s; }

qlrmr_status qlrmr_matrix_create(size_t rows, size_t cols, const double* data, qlrmr_matrix** out) {
  return guarded([&] {
    need(out, "out");
    qlrmr::Matrix m = qlrmr::Matrix::Zero(static_cast<Eigen::Index>(rows),
                                          static_cast<Eigen::Index>(cols));
    if (data != nullptr) std::memcpy(m.data(), data, rows * cols * sizeof(double));
    *out = wrap(std::move(m));
  });
}

void qlrmr_matrix_destroy(qlrmr_matrix* m) { delete m; }
size_t qlrmr_matrix_rows(const qlrmr_matrix* m) { return m ? static_cast<size_t>(m->m.rows()) : 0; }
size_t qlrmr_matrix_cols(const qlrmr_matrix* m) { return m ? static_cast<size_t>(m->m.cols()) : 0; }

qlrmr_status qlrmr_matrix_copy_out(const qlrmr_matrix* m, double* out, size_t capacity) {
  return guarded([&] {
    need(m, "m");
    need(out, "out");
    const size_t count = static_cast<size_t>(m->m.size());
    if (capacity < count)
      throw qlrmr::Error(qlrmr::ErrorKind::dimension,
                         "output buffer holds " + std::to_string(capacity) + " values, need " +
                             std::to_string(count));
    std::memcpy(out, m->m.data(), count * sizeof(double));
  });
}

qlrmr_status qlrmr_matrix_read_csv(const char* path, qlrmr_matrix** out) {
  return guarded([&] {
    need(path, "path");
    need(out, "out");
    *out = wrap(qlrmr::read_csv_matrix(path));
  });
}

qlrmr_status qlrmr_matrix_write_csv(const qlrmr_matrix* m, const char* path) {
  return guarded([&] {
    need(m, "m");
    need(path, "path");
    qlrmr::write_csv_matrix(m->m, path);
  });
}

qlrmr_status qlrmr_rng_create(uint64_t seed, qlrmr_rng** out) {
  return guarded([&] {
    need(out, "out");
    *out = new qlrmr_rng{qlrmr::Rng(seed)};
  });
}

void qlrmr_rng_destroy(qlrmr_rng* rng) { delete rng; }

qlrmr_status qlrmr_uniform_quantize(double a, double delta, double* out) {
  return guarded([&] {
    need(out, "out");
    *out = qlrmr::uniform_quantize(a, delta);
  });
}

qlrmr_status qlrmr_quantize(const double* input, size_t count, double delta,
                            qlrmr_dither_kind kind, qlrmr_rng* rng, double* quantized,
                            double* dither) {
  return guarded([&] {
    need(input, "input");
    need(rng, "rng");
    need(quantized, "quantized");
    const qlrmr::QuantRecord rec =
        qlrmr::quantize_with_dither({input, count}, delta, dither_of(kind), rng->rng);
    std::memcpy(quantized, rec.quantized().data(), count * sizeof(double));
    if (dither != nullptr) std::memcpy(dither, rec.dither().data(), count * sizeof(double));
  });
}

qlrmr_status qlrmr_noise_moments_of(const double* input, size_t count, double delta,
                                    qlrmr_dither_kind kind, qlrmr_rng* rng,
                                    qlrmr_noise_moments* out) {
  return guarded([&] {
    need(input, "input");
    need(rng, "rng");
    need(out, "out");
    const qlrmr::NoiseMoments m = qlrmr::noise_moment_report(
        qlrmr::quantize_with_dither({input, count}, delta, dither_of(kind), rng->rng));
    *out = {m.mean_noise, m.var_noise, m.second_moment_noise, m.mean_error, m.ks_stat};
  });
}

qlrmr_status qlrmr_svt(const qlrmr_matrix* m, double tau, qlrmr_matrix** out) {
  return guarded([&] {
    need(m, "m");
    need(out, "out");
    *out = wrap(qlrmr::svt(m->m, tau));
  });
}

qlrmr_status qlrmr_project_nuclear_ball(const qlrmr_matrix* m, double radius, qlrmr_matrix** out) {
  return guarded([&] {
    need(m, "m");
    need(out, "out");
    *out = wrap(qlrmr::project_nuclear_ball(m->m, radius));
  });
}

qlrmr_status qlrmr_nuclear_norm(const qlrmr_matrix* m, double* out) {
  return guarded([&] {
    need(m, "m");
    need(out, "out");
    *out = qlrmr::nuclear_norm(m->m);
  });
}

qlrmr_status qlrmr_operator_norm(const qlrmr_matrix* m, double* out) {
  return guarded([&] {
    need(m, "m");
    need(out, "out");
    *out = qlrmr::operator_norm(m->m);
  });
}

qlrmr_status qlrmr_quantize_dataset(const qlrmr_matrix* x, const qlrmr_matrix* y, double delta1,
                                    double delta2, int dithered, qlrmr_rng* rng,
                                    qlrmr_matrix** xdot, qlrmr_matrix** ydot) {
  return guarded([&] {
    need(x, "x");
    need(y, "y");
    need(rng, "rng");
    need(xdot, "xdot");
    need(ydot, "ydot");
    const qlrmr::Dataset data(x->m, y->m);
    qlrmr::QuantizedDataset q = qlrmr::quantize_dataset(
        data, {delta1, delta2}, rng->rng,
        dithered ? qlrmr::DitherMode::dithered : qlrmr::DitherMode::undithered);
    *xdot = wrap(std::move(q.xdot));
    *ydot = wrap(std::move(q.ydot));
  });
}

qlrmr_status qlrmr_surrogate_covariances(const qlrmr_matrix* xdot, const qlrmr_matrix* ydot,
                                         double delta1, qlrmr_matrix** sxx, qlrmr_matrix** sxy) {
  return guarded([&] {
    need(xdot, "xdot");
    need(ydot, "ydot");
    need(sxx, "sxx");
    need(sxy, "sxy");
    qlrmr::SurrogateCovs c = qlrmr::surrogate_covariances(xdot->m, ydot->m, delta1);
    *sxx = wrap(std::move(c.sxx));
    *sxy = wrap(std::move(c.sxy));
  });
}

void qlrmr_solver_options_default(qlrmr_solver_options* opts) {
  if (opts == nullptr) return;
  const qlrmr::SolverConfig d;
  opts->max_iters = d.max_iters;
  opts->rel_tol = d.rel_tol;
  opts->backtracking = d.step.kind == qlrmr::StepPolicy::Kind::backtracking ? 1 : 0;
  opts->eta = d.step.eta;
  opts->beta = d.step.beta;
  opts->acceleration = d.acceleration ? 1 : 0;
}

qlrmr_status qlrmr_regularized_lasso(const qlrmr_matrix* sxx, const qlrmr_matrix* sxy,
                                     double lambda, const qlrmr_solver_options* opts,
                                     qlrmr_matrix** theta, qlrmr_fit_info* info) {
  return guarded([&] {
    need(theta, "theta");
    qlrmr::EstimateReport r = qlrmr::regularized_lasso(covs_of(sxx, sxy), lambda, solver_of(opts));
    fill_info(r, info);
    *theta = wrap(std::move(r.theta_hat));
  });
}

qlrmr_status qlrmr_constrained_lasso(const qlrmr_matrix* sxx, const qlrmr_matrix* sxy,
                                     double radius, const qlrmr_solver_options* opts,
                                     qlrmr_matrix** theta, qlrmr_fit_info* info) {
  return guarded([&] {
    need(theta, "theta");
    qlrmr::EstimateReport r = qlrmr::constrained_lasso(covs_of(sxx, sxy), radius, solver_of(opts));
    fill_info(r, info);
    *theta = wrap(std::move(r.theta_hat));
  });
}

qlrmr_status qlrmr_ols(const qlrmr_matrix* sxx, const qlrmr_matrix* sxy, qlrmr_matrix** theta,
                       qlrmr_fit_info* info) {
  return guarded([&] {
    need(theta, "theta");
    qlrmr::EstimateReport r = qlrmr::ols_baseline(covs_of(sxx, sxy));
    fill_info(r, info);
    *theta = wrap(std::move(r.theta_hat));
  });
}

qlrmr_status qlrmr_l2rm_regularized(const qlrmr_matrix* sxx, const qlrmr_matrix* sxy, size_t p,
                                    size_t q, double lambda, const qlrmr_solver_options* opts,
                                    qlrmr_matrix** theta, qlrmr_fit_info* info) {
  return guarded([&] {
    need(theta, "theta");
    qlrmr::L2rmEstimate e =
        qlrmr::l2rm_regularized(covs_of(sxx, sxy), p, q, lambda, solver_of(opts));
    fill_info(e.report, info);
    *theta = wrap(std::move(e.report.theta_hat));
  });
}

qlrmr_status qlrmr_lambda_schedule(size_t d1, size_t d2, size_t n, double scale, double* out) {
  return guarded([&] {
    need(out, "out");
    *out = qlrmr::lambda_schedule(d1, d2, n, scale);
  });
}

qlrmr_status qlrmr_resolve_experiment_config(const char* config_json, char** resolved_json) {
  return guarded([&] {
    need(resolved_json, "resolved_json");
    *resolved_json = dup_string(qlrmr::to_json(experiment_of(config_json)).dump(2));
  });
}

qlrmr_status qlrmr_resolve_dither_demo_config(const char* config_json, char** resolved_json) {
  return guarded([&] {
    need(resolved_json, "resolved_json");
    qlrmr::DitherDemoConfig cfg = qlrmr::dither_demo_config_from_json(parse_json(config_json));
    cfg.validate();
    *resolved_json = dup_string(qlrmr::to_json(cfg).dump(2));
  });
}

qlrmr_status qlrmr_dither_demo(const char* config_json, const char* out_csv, char** rows_json) {
  return guarded([&] {
    need(out_csv, "out_csv");
    const qlrmr::DitherDemoConfig cfg =
        qlrmr::dither_demo_config_from_json(parse_json(config_json));
    const auto rows = qlrmr::run_dither_demo(cfg);
    qlrmr::write_dither_demo_csv(rows, out_csv);
    if (rows_json != nullptr) {
      nlohmann::json arr = nlohmann::json::array();
      for (const auto& r : rows) {
        arr.push_back({{"kind", qlrmr::to_string(r.kind)},
                       {"delta", r.delta},
                       {"n", r.n},
                       {"mean_noise", r.moments.mean_noise},
                       {"var_noise", r.moments.var_noise},
                       {"mean_error", r.moments.mean_error},
                       {"ks_stat", r.moments.ks_stat}});
      }
      *rows_json = dup_string(arr.dump(2));
    }
  });
}

qlrmr_status qlrmr_generate(const char* config_json, const char* out_dir) {
  return guarded([&] {
    need(out_dir, "out_dir");
    qlrmr::write_generated_data(experiment_of(config_json), out_dir);
  });
}

qlrmr_status qlrmr_run_experiment(qlrmr_experiment_kind kind, const char* config_json,
                                  unsigned threads, qlrmr_result** out) {
  return guarded([&] {
    need(out, "out");
    const qlrmr::ExperimentConfig cfg = experiment_of(config_json);
    qlrmr::ExperimentResult r;
    switch (kind) {
      case QLRMR_EXPERIMENT_ERROR_CURVE: r = qlrmr::run_error_curve(cfg, threads); break;
      case QLRMR_EXPERIMENT_DITHER_COMPARE: r = qlrmr::run_dither_comparison(cfg, threads); break;
      case QLRMR_EXPERIMENT_LASSO_VS_OLS: r = qlrmr::run_lasso_vs_ols(cfg, threads); break;
      case QLRMR_EXPERIMENT_REAL_DATA: r = qlrmr::run_real_data_study(cfg, threads); break;
      default:
        throw qlrmr::Error(qlrmr::ErrorKind::invalid_argument, "unknown experiment kind");
    }
    *out = new qlrmr_result{std::move(r)};
  });
}

qlrmr_status qlrmr_calibrate(const char* config_json, const double* scales, size_t count,
                             unsigned threads, char** report_json) {
  return guarded([&] {
    need(report_json, "report_json");
    if (count > 0) need(scales, "scales");
    const qlrmr::ExperimentConfig cfg = experiment_of(config_json);
    std::vector<double> grid(scales, scales + count);
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& p : qlrmr::calibrate_lambda_scale(cfg, grid, threads))
      arr.push_back({{"scale", p.scale}, {"mean_rel_error", p.mean_rel_error}});
    *report_json = dup_string(arr.dump(2));
  });
}

qlrmr_status qlrmr_result_read_csv(const char* path, qlrmr_result** out) {
  return guarded([&] {
    need(path, "path");
    need(out, "out");
    *out = new qlrmr_result{qlrmr::read_results_csv(path)};
  });
}

void qlrmr_result_destroy(qlrmr_result* r) { delete r; }

size_t qlrmr_result_record_count(const qlrmr_result* r) { return r ? r->result.records.size() : 0; }

qlrmr_status qlrmr_result_write(const qlrmr_result* r, const char* out_dir) {
  return guarded([&] {
    need(r, "result");
    need(out_dir, "out_dir");
    qlrmr::write_results(r->result, out_dir);
  });
}

qlrmr_status qlrmr_result_summary_json(const qlrmr_result* r, char** out) {
  return guarded([&] {
    need(r, "result");
    need(out, "out");
    *out = dup_string(qlrmr::summary_json(r->result).dump(2));
  });
}

}  // extern "C"
