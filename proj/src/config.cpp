#include "qlrmr/config.hpp"

#include <cmath>
#include <set>

#include "qlrmr/error.hpp"

namespace qlrmr {

using nlohmann::json;

std::string to_string(ModelKind m) {
  switch (m) {
    case ModelKind::lrmr_constrained: return "lrmr_constrained";
    case ModelKind::lrmr_regularized: return "lrmr_regularized";
    case ModelKind::l2rm: return "l2rm";
    case ModelKind::ols: return "ols";
  }
  return "?";
}

std::string to_string(ThetaSource t) {
  switch (t) {
    case ThetaSource::lowrank: return "lowrank";
    case ThetaSource::demo: return "demo";
    case ThetaSource::image: return "image";
    case ThetaSource::csv: return "csv";
  }
  return "?";
}

std::string to_string(DitherKind k) {
  switch (k) {
    case DitherKind::none: return "none";
    case DitherKind::uniform: return "uniform";
    case DitherKind::triangular: return "triangular";
  }
  return "?";
}

namespace {

[[noreturn]] void bad(const std::string& path, const std::string& what) {
  throw Error(ErrorKind::config, "config." + path + ": " + what);
}

// Reads keys from one JSON object, remembering which were consumed.
class ObjectReader {
 public:
  ObjectReader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) bad(path_.empty() ? "<root>" : path_, "expected an object");
  }

  std::string key_path(const std::string& key) const {
    return path_.empty() ? key : path_ + "." + key;
  }

  const json* find(const std::string& key) {
    seen_.insert(key);
    auto it = j_.find(key);
    if (it == j_.end() || it->is_null()) return nullptr;
    return &*it;
  }

  void read(const std::string& key, std::size_t& out) {
    if (const json* v = find(key)) {
      if (!v->is_number_unsigned() && !(v->is_number_integer() && v->get<long long>() >= 0))
        bad(key_path(key), "expected a nonnegative integer");
      out = v->get<std::size_t>();
    }
  }
  void read(const std::string& key, int& out) {
    if (const json* v = find(key)) {
      if (!v->is_number_integer()) bad(key_path(key), "expected an integer");
      out = v->get<int>();
    }
  }
  void read(const std::string& key, double& out) {
    if (const json* v = find(key)) {
      if (!v->is_number()) bad(key_path(key), "expected a number");
      out = v->get<double>();
      if (!std::isfinite(out)) bad(key_path(key), "expected a finite number");
    }
  }
  void read(const std::string& key, bool& out) {
    if (const json* v = find(key)) {
      if (!v->is_boolean()) bad(key_path(key), "expected true or false");
      out = v->get<bool>();
    }
  }
  void read(const std::string& key, std::string& out) {
    if (const json* v = find(key)) {
      if (!v->is_string()) bad(key_path(key), "expected a string");
      out = v->get<std::string>();
    }
  }
  template <class T>
  void read(const std::string& key, std::vector<T>& out) {
    if (const json* v = find(key)) {
      if (!v->is_array()) bad(key_path(key), "expected an array");
      std::vector<T> values;
      for (std::size_t i = 0; i < v->size(); ++i) {
        const json& e = (*v)[i];
        const std::string p = key_path(key) + "[" + std::to_string(i) + "]";
        if constexpr (std::is_same_v<T, double>) {
          if (!e.is_number()) bad(p, "expected a number");
          values.push_back(e.get<double>());
        } else {
          if (!e.is_number_integer() || e.get<long long>() < 0)
            bad(p, "expected a nonnegative integer");
          values.push_back(e.get<T>());
        }
      }
      out = std::move(values);
    }
  }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!seen_.count(it.key()) && it.key() != "description")
        bad(key_path(it.key()), "unknown key");
    }
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

template <class Enum, std::size_t N>
Enum parse_enum(const std::string& path, const std::string& value,
                const std::pair<const char*, Enum> (&table)[N]) {
  std::string options;
  for (const auto& [name, e] : table) {
    if (value == name) return e;
    options += options.empty() ? name : std::string(", ") + name;
  }
  bad(path, "unknown value '" + value + "' (expected one of " + options + ")");
}

constexpr std::pair<const char*, ModelKind> kModels[] = {
    {"lrmr_constrained", ModelKind::lrmr_constrained},
    {"lrmr_regularized", ModelKind::lrmr_regularized},
    {"l2rm", ModelKind::l2rm},
    {"ols", ModelKind::ols}};
constexpr std::pair<const char*, ThetaSource> kThetas[] = {{"lowrank", ThetaSource::lowrank},
                                                           {"demo", ThetaSource::demo},
                                                           {"image", ThetaSource::image},
                                                           {"csv", ThetaSource::csv}};
constexpr std::pair<const char*, CovariateKind> kCovariates[] = {
    {"gaussian", CovariateKind::gaussian}, {"bernoulli", CovariateKind::bernoulli}};
constexpr std::pair<const char*, DitherKind> kDithers[] = {{"none", DitherKind::none},
                                                           {"uniform", DitherKind::uniform},
                                                           {"triangular", DitherKind::triangular}};
constexpr std::pair<const char*, StepPolicy::Kind> kSteps[] = {
    {"fixed", StepPolicy::Kind::fixed}, {"backtracking", StepPolicy::Kind::backtracking}};

void check_schema(int version) {
  if (version != kConfigSchemaVersion)
    bad("schema_version", "unsupported version " + std::to_string(version) + " (expected " +
                              std::to_string(kConfigSchemaVersion) + ")");
}

}  // namespace

void ExperimentConfig::validate() const {
  check_schema(schema_version);
  if (n_grid.empty()) bad("n_grid", "must not be empty");
  for (std::size_t n : n_grid)
    if (n == 0) bad("n_grid", "sample sizes must be positive");
  if (delta1_grid.empty()) bad("delta1_grid", "must not be empty");
  if (delta2_grid.empty()) bad("delta2_grid", "must not be empty");
  for (double d : delta1_grid)
    if (!(d >= 0.0) || !std::isfinite(d)) bad("delta1_grid", "levels must be nonnegative");
  for (double d : delta2_grid)
    if (!(d >= 0.0) || !std::isfinite(d)) bad("delta2_grid", "levels must be nonnegative");
  if (trials == 0) bad("trials", "must be at least 1");
  if (!(lambda_scale > 0.0)) bad("lambda_scale", "must be positive");
  if (lambda_delta_gain < 0.0) bad("lambda_delta_gain", "must be nonnegative");
  if (radius && !(*radius > 0.0)) bad("radius", "must be positive");
  if (!(gen.noise_level >= 0.0)) bad("gen.noise_level", "must be nonnegative");
  if (gen.theta == ThetaSource::csv && gen.theta_csv.empty())
    bad("gen.theta_csv", "required when gen.theta is \"csv\"");
  if (matrix_response()) {
    if (gen.theta == ThetaSource::lowrank &&
        (gen.s == 0 || gen.p == 0 || gen.q == 0 || gen.r == 0 || gen.r > std::min(gen.p, gen.q)))
      bad("gen", "need positive s, p, q and 0 < r <= min(p, q)");
    if (gen.theta == ThetaSource::csv) bad("gen.theta", "csv truth is only supported for lrmr");
  } else {
    if (gen.theta == ThetaSource::lowrank &&
        (gen.d1 == 0 || gen.d2 == 0 || gen.r == 0 || gen.r > std::min(gen.d1, gen.d2)))
      bad("gen", "need positive d1, d2 and 0 < r <= min(d1, d2)");
    if (gen.theta == ThetaSource::image) bad("gen.theta", "image truth is only supported for l2rm");
  }
  try {
    solver.validate();
  } catch (const Error& e) {
    throw Error(ErrorKind::config, std::string("config.") + e.what());
  }
  for (double c : calibration_scales)
    if (!(c > 0.0)) bad("calibration_scales", "scales must be positive");
}

ExperimentConfig experiment_config_from_json(const json& j) {
  ExperimentConfig cfg;
  ObjectReader root(j, "");
  root.read("schema_version", cfg.schema_version);
  check_schema(cfg.schema_version);
  std::string model = to_string(cfg.model);
  root.read("model", model);
  cfg.model = parse_enum(root.key_path("model"), model, kModels);

  if (const json* g = root.find("gen")) {
    ObjectReader r(*g, "gen");
    r.read("d1", cfg.gen.d1);
    r.read("d2", cfg.gen.d2);
    r.read("r", cfg.gen.r);
    r.read("s", cfg.gen.s);
    r.read("p", cfg.gen.p);
    r.read("q", cfg.gen.q);
    r.read("image_size", cfg.gen.image_size);
    r.read("noise_level", cfg.gen.noise_level);
    r.read("noise_level_is_std", cfg.gen.noise_level_is_std);
    r.read("signal_relative", cfg.gen.signal_relative);
    std::string theta = to_string(cfg.gen.theta);
    r.read("theta", theta);
    cfg.gen.theta = parse_enum("gen.theta", theta, kThetas);
    r.read("theta_csv", cfg.gen.theta_csv);
    std::string cov = "gaussian";
    r.read("covariates", cov);
    cfg.gen.covariates = parse_enum("gen.covariates", cov, kCovariates);
    r.read("fixed_truth", cfg.gen.fixed_truth);
    r.finish();
  }
  if (const json* d = root.find("data")) {
    ObjectReader r(*d, "data");
    r.read("x_csv", cfg.data.x_csv);
    r.read("y_csv", cfg.data.y_csv);
    r.read("samples_are_rows", cfg.data.samples_are_rows);
    r.read("n_test", cfg.data.n_test);
    r.finish();
  }
  root.read("n_grid", cfg.n_grid);
  root.read("delta1_grid", cfg.delta1_grid);
  root.read("delta2_grid", cfg.delta2_grid);
  root.read("dither_enabled", cfg.dither_enabled);
  root.read("trials", cfg.trials);
  root.read("base_seed", cfg.base_seed);
  if (const json* s = root.find("solver")) {
    ObjectReader r(*s, "solver");
    r.read("max_iters", cfg.solver.max_iters);
    r.read("rel_tol", cfg.solver.rel_tol);
    std::string step = "backtracking";
    r.read("step", step);
    cfg.solver.step.kind = parse_enum("solver.step", step, kSteps);
    r.read("eta", cfg.solver.step.eta);
    r.read("beta", cfg.solver.step.beta);
    r.read("acceleration", cfg.solver.acceleration);
    r.finish();
  }
  root.read("lambda_scale", cfg.lambda_scale);
  root.read("lambda_delta_gain", cfg.lambda_delta_gain);
  if (const json* rad = root.find("radius")) {
    if (!rad->is_null()) {
      if (!rad->is_number()) bad("radius", "expected a number or null");
      cfg.radius = rad->get<double>();
    }
  }
  root.read("record_runtime", cfg.record_runtime);
  root.read("calibration_scales", cfg.calibration_scales);
  root.finish();
  cfg.validate();
  return cfg;
}

json to_json(const ExperimentConfig& cfg) {
  json j;
  j["schema_version"] = cfg.schema_version;
  j["model"] = to_string(cfg.model);
  j["gen"] = {{"d1", cfg.gen.d1},
              {"d2", cfg.gen.d2},
              {"r", cfg.gen.r},
              {"s", cfg.gen.s},
              {"p", cfg.gen.p},
              {"q", cfg.gen.q},
              {"image_size", cfg.gen.image_size},
              {"noise_level", cfg.gen.noise_level},
              {"noise_level_is_std", cfg.gen.noise_level_is_std},
              {"signal_relative", cfg.gen.signal_relative},
              {"theta", to_string(cfg.gen.theta)},
              {"theta_csv", cfg.gen.theta_csv},
              {"covariates",
               cfg.gen.covariates == CovariateKind::bernoulli ? "bernoulli" : "gaussian"},
              {"fixed_truth", cfg.gen.fixed_truth}};
  j["data"] = {{"x_csv", cfg.data.x_csv},
               {"y_csv", cfg.data.y_csv},
               {"samples_are_rows", cfg.data.samples_are_rows},
               {"n_test", cfg.data.n_test}};
  j["n_grid"] = cfg.n_grid;
  j["delta1_grid"] = cfg.delta1_grid;
  j["delta2_grid"] = cfg.delta2_grid;
  j["dither_enabled"] = cfg.dither_enabled;
  j["trials"] = cfg.trials;
  j["base_seed"] = cfg.base_seed;
  j["solver"] = {{"max_iters", cfg.solver.max_iters},
                 {"rel_tol", cfg.solver.rel_tol},
                 {"step", cfg.solver.step.kind == StepPolicy::Kind::fixed ? "fixed" : "backtracking"},
                 {"eta", cfg.solver.step.eta},
                 {"beta", cfg.solver.step.beta},
                 {"acceleration", cfg.solver.acceleration}};
  j["lambda_scale"] = cfg.lambda_scale;
  j["lambda_delta_gain"] = cfg.lambda_delta_gain;
  j["radius"] = cfg.radius ? json(*cfg.radius) : json(nullptr);
  j["record_runtime"] = cfg.record_runtime;
  j["calibration_scales"] = cfg.calibration_scales;
  return j;
}

void DitherDemoConfig::validate() const {
  check_schema(schema_version);
  if (n < 2) bad("n", "need at least 2 samples");
  if (deltas.empty()) bad("deltas", "must not be empty");
  for (double d : deltas)
    if (!(d >= 0.0) || !std::isfinite(d)) bad("deltas", "levels must be nonnegative");
  if (kinds.empty()) bad("kinds", "must not be empty");
  if (input != "gaussian" && input != "uniform" && input != "constant")
    bad("input", "expected gaussian, uniform or constant");
}

DitherDemoConfig dither_demo_config_from_json(const json& j) {
  DitherDemoConfig cfg;
  ObjectReader root(j, "");
  root.read("schema_version", cfg.schema_version);
  check_schema(cfg.schema_version);
  root.read("n", cfg.n);
  root.read("deltas", cfg.deltas);
  if (const json* k = root.find("kinds")) {
    if (!k->is_array()) bad("kinds", "expected an array");
    cfg.kinds.clear();
    for (std::size_t i = 0; i < k->size(); ++i) {
      const std::string p = "kinds[" + std::to_string(i) + "]";
      if (!(*k)[i].is_string()) bad(p, "expected a string");
      cfg.kinds.push_back(parse_enum(p, (*k)[i].get<std::string>(), kDithers));
    }
  }
  root.read("input", cfg.input);
  root.read("base_seed", cfg.base_seed);
  root.finish();
  cfg.validate();
  return cfg;
}

json to_json(const DitherDemoConfig& cfg) {
  json kinds = json::array();
  for (DitherKind k : cfg.kinds) kinds.push_back(to_string(k));
  return {{"schema_version", cfg.schema_version},
          {"n", cfg.n},
          {"deltas", cfg.deltas},
          {"kinds", kinds},
          {"input", cfg.input},
          {"base_seed", cfg.base_seed}};
}

}  // namespace qlrmr
