// Command-line front end over the qlrmr C API.
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "qlrmr/qlrmr.h"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitConfig = 1;
constexpr int kExitRuntime = 2;

// Thrown for anything the user must fix in flags or config (exit 1).
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Failure reported by the library.
struct LibraryError : std::runtime_error {
  LibraryError(qlrmr_status s, const std::string& what) : std::runtime_error(what), status(s) {}
  qlrmr_status status;
};

void check(qlrmr_status s) {
  if (s != QLRMR_OK) throw LibraryError(s, qlrmr_last_error());
}

struct StringDeleter {
  void operator()(char* s) const { qlrmr_string_free(s); }
};
using OwnedString = std::unique_ptr<char, StringDeleter>;

struct ResultDeleter {
  void operator()(qlrmr_result* r) const { qlrmr_result_destroy(r); }
};

struct Options {
  std::string config_path;
  std::string out_dir = "out";
  std::optional<std::uint64_t> seed;
  std::vector<std::string> overrides;
  unsigned threads = 0;
  std::optional<std::size_t> trials;
  std::vector<double> scales;  // calibrate only
};

json load_config(const Options& opt, bool required) {
  if (opt.config_path.empty()) {
    if (required) throw ConfigError("--config is required for this subcommand");
    return json::object();
  }
  std::ifstream in(opt.config_path);
  if (!in) throw ConfigError("config file not found: " + opt.config_path);
  try {
    json j = json::parse(in);
    if (!j.is_object()) throw ConfigError(opt.config_path + ": top level must be an object");
    return j;
  } catch (const json::parse_error& e) {
    throw ConfigError(opt.config_path + ": " + e.what());
  }
}

// Applies key=value with a dotted key path; the value is JSON when it parses
// as JSON and a plain string otherwise.
void apply_override(json& cfg, const std::string& kv) {
  const auto eq = kv.find('=');
  if (eq == std::string::npos || eq == 0)
    throw ConfigError("--set expects key=value, got '" + kv + "'");
  const std::string key = kv.substr(0, eq);
  const std::string raw = kv.substr(eq + 1);
  json value = json::parse(raw, nullptr, false);
  if (value.is_discarded()) value = raw;

  json* node = &cfg;
  std::stringstream path(key);
  std::string part;
  std::vector<std::string> parts;
  while (std::getline(path, part, '.')) {
    if (part.empty()) throw ConfigError("--set: empty segment in '" + key + "'");
    parts.push_back(part);
  }
  for (std::size_t i = 0; i + 1 < parts.size(); ++i) {
    json& child = (*node)[parts[i]];
    if (child.is_null()) child = json::object();
    if (!child.is_object())
      throw ConfigError("--set: '" + parts[i] + "' in '" + key + "' is not an object");
    node = &child;
  }
  (*node)[parts.back()] = std::move(value);
}

void apply_common(json& cfg, const Options& opt, bool experiment) {
  for (const auto& kv : opt.overrides) apply_override(cfg, kv);
  if (opt.seed) cfg["base_seed"] = *opt.seed;
  if (opt.trials) {
    if (!experiment) throw ConfigError("--trials does not apply to this subcommand");
    cfg["trials"] = *opt.trials;
  }
}

void set_model(json& cfg, const std::string& sub) {
  const bool matrix = sub == "run-l2rm";
  if (!cfg.contains("model")) {
    cfg["model"] = matrix ? "l2rm" : "lrmr_regularized";
    return;
  }
  const bool is_l2rm = cfg["model"] == "l2rm";
  if (matrix && !is_l2rm) throw ConfigError("config.model: run-l2rm needs model \"l2rm\"");
  if (!matrix && is_l2rm)
    throw ConfigError("config.model: \"l2rm\" runs through run-l2rm, not " + sub);
}

void write_manifest(const fs::path& out, const std::string& sub, const Options& opt,
                    const json& resolved) {
  const json manifest = {{"artifact", "qlrmr"},
                         {"version", qlrmr_version()},
                         {"subcommand", sub},
                         {"config_path", opt.config_path},
                         {"overrides", opt.overrides},
                         {"config", resolved}};
  std::ofstream f(out / "manifest.json");
  f << manifest.dump(2) << '\n';
  if (!f) throw LibraryError(QLRMR_IO, "cannot write " + (out / "manifest.json").string());
}

json resolve_experiment(const json& cfg) {
  char* raw = nullptr;
  check(qlrmr_resolve_experiment_config(cfg.dump().c_str(), &raw));
  OwnedString s(raw);
  return json::parse(s.get());
}

int run_dither_demo(const Options& opt) {
  json cfg = load_config(opt, false);
  apply_common(cfg, opt, false);
  const std::string text = cfg.dump();
  char* raw = nullptr;
  check(qlrmr_resolve_dither_demo_config(text.c_str(), &raw));
  const json resolved = json::parse(OwnedString(raw).get());
  const fs::path out(opt.out_dir);
  fs::create_directories(out);
  check(qlrmr_dither_demo(text.c_str(), (out / "dither_demo.csv").c_str(), nullptr));
  write_manifest(out, "dither-demo", opt, resolved);
  std::cout << "wrote " << (out / "dither_demo.csv").string() << '\n';
  return 0;
}

int run_gen(const Options& opt) {
  json cfg = load_config(opt, false);
  apply_common(cfg, opt, true);
  const json resolved = resolve_experiment(cfg);
  const fs::path out(opt.out_dir);
  fs::create_directories(out);
  check(qlrmr_generate(cfg.dump().c_str(), out.c_str()));
  write_manifest(out, "gen", opt, resolved);
  std::cout << "wrote generated data to " << out.string() << '\n';
  return 0;
}

int run_experiment(const std::string& sub, qlrmr_experiment_kind kind, const Options& opt) {
  json cfg = load_config(opt, true);
  apply_common(cfg, opt, true);
  if (sub == "run-lrmr" || sub == "run-l2rm") set_model(cfg, sub);
  const json resolved = resolve_experiment(cfg);
  const fs::path out(opt.out_dir);
  fs::create_directories(out);
  qlrmr_result* raw = nullptr;
  check(qlrmr_run_experiment(kind, cfg.dump().c_str(), opt.threads, &raw));
  std::unique_ptr<qlrmr_result, ResultDeleter> result(raw);
  check(qlrmr_result_write(result.get(), out.c_str()));
  write_manifest(out, sub, opt, resolved);
  std::cout << "wrote " << qlrmr_result_record_count(result.get()) << " records to "
            << out.string() << '\n';
  return 0;
}

int run_calibrate(const Options& opt) {
  json cfg = load_config(opt, true);
  apply_common(cfg, opt, true);
  const json resolved = resolve_experiment(cfg);
  const fs::path out(opt.out_dir);
  fs::create_directories(out);
  char* raw = nullptr;
  check(qlrmr_calibrate(cfg.dump().c_str(), opt.scales.data(), opt.scales.size(), opt.threads,
                        &raw));
  const json report = json::parse(OwnedString(raw).get());
  std::ofstream f(out / "calibration.json");
  f << report.dump(2) << '\n';
  write_manifest(out, "calibrate", opt, resolved);
  for (const auto& p : report)
    std::cout << "C=" << p["scale"].dump() << "  mean rel error=" << p["mean_rel_error"].dump()
              << '\n';
  return 0;
}

int exit_code_for(qlrmr_status s) {
  return s == QLRMR_CONFIG ? kExitConfig : kExitRuntime;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Quantized low-rank multivariate regression experiments"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(qlrmr_version()));

  Options opt;
  auto add_common = [&](CLI::App* sub, bool experiment) {
    sub->add_option("--config", opt.config_path, "JSON config file");
    sub->add_option("--out", opt.out_dir, "Output directory")->capture_default_str();
    sub->add_option("--seed", opt.seed, "Base seed (overrides base_seed)");
    sub->add_option("--set", opt.overrides, "Override key=value (dotted path, repeatable)")
        ->allow_extra_args(false);
    if (experiment) {
      sub->add_option("--threads", opt.threads, "Worker threads (0 = all cores)")
          ->capture_default_str();
      sub->add_option("--trials", opt.trials, "Trials per grid cell");
    }
  };

  struct Entry {
    const char* name;
    const char* help;
  };
  const std::vector<Entry> entries = {
      {"dither-demo", "Noise statistics of dithered quantization"},
      {"gen", "Write a synthetic truth and dataset as CSV"},
      {"run-lrmr", "Error curve for vector-response Lasso"},
      {"run-l2rm", "Error curve for matrix-response Lasso"},
      {"run-dither-compare", "Dithered versus undithered quantization"},
      {"run-lasso-vs-ols", "Regularized Lasso versus OLS"},
      {"run-real", "Study on CSV data with a train/test split"},
      {"calibrate", "Grid search over the lambda constant C"},
  };
  std::vector<CLI::App*> subs;
  for (const auto& e : entries) {
    CLI::App* sub = app.add_subcommand(e.name, e.help);
    add_common(sub, std::string(e.name) != "dither-demo");
    subs.push_back(sub);
  }
  subs.back()->add_option("--scales", opt.scales, "Candidate C values")->delimiter(',');

  if (argc > 1 && argv[1][0] != '-') {
    bool known = false;
    for (const auto& e : entries) known = known || std::string(e.name) == argv[1];
    if (!known) {
      std::cerr << "error: unknown subcommand '" << argv[1] << "'\n\n" << app.help();
      return kExitConfig;
    }
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n\n" << app.help();
    return kExitConfig;
  }

  const std::string sub = app.get_subcommands().front()->get_name();
  try {
    if (sub == "dither-demo") return run_dither_demo(opt);
    if (sub == "gen") return run_gen(opt);
    if (sub == "run-lrmr" || sub == "run-l2rm")
      return run_experiment(sub, QLRMR_EXPERIMENT_ERROR_CURVE, opt);
    if (sub == "run-dither-compare")
      return run_experiment(sub, QLRMR_EXPERIMENT_DITHER_COMPARE, opt);
    if (sub == "run-lasso-vs-ols") return run_experiment(sub, QLRMR_EXPERIMENT_LASSO_VS_OLS, opt);
    if (sub == "run-real") return run_experiment(sub, QLRMR_EXPERIMENT_REAL_DATA, opt);
    return run_calibrate(opt);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const LibraryError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code_for(e.status);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
}
