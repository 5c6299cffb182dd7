#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string_view>

#include "qlrmr/csv.hpp"
#include "qlrmr/error.hpp"
#include "qlrmr/harness.hpp"

namespace qlrmr {

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::io, "cannot write " + path.string());
  return out;
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t comma = line.find(',', start);
    out.push_back(line.substr(start, comma == std::string_view::npos ? comma : comma - start));
    if (comma == std::string_view::npos) return out;
    start = comma + 1;
  }
}

template <class T>
T parse_field(std::string_view s, const std::string& where) {
  T v{};
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size())
    throw Error(ErrorKind::parse, where + ": bad value '" + std::string(s) + "'");
  return v;
}

nlohmann::json number_or_null(double v) {
  return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr);
}

nlohmann::json mean_std_json(const MeanStd& m) {
  return {{"mean", number_or_null(m.mean)}, {"std", number_or_null(m.std)}};
}

}  // namespace

void write_results_csv(const ExperimentResult& result, const std::filesystem::path& path) {
  std::ofstream out = open_out(path);
  out << kResultsHeader << '\n';
  for (const TrialRecord& r : result.records) {
    out << r.model << ',' << r.n << ',' << r.d1 << ',' << r.d2 << ',' << r.r << ','
        << format_double(r.delta1) << ',' << format_double(r.delta2) << ',' << r.trial << ','
        << r.seed << ',' << format_double(r.frob_error) << ',' << format_double(r.rel_error)
        << ',' << format_double(r.pred_error) << ',' << r.iterations << ','
        << format_double(r.runtime_ms) << ',' << (r.converged ? 1 : 0) << '\n';
  }
  if (!out) throw Error(ErrorKind::io, "write failed: " + path.string());
}

ExperimentResult read_results_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::io, "cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line) || line != kResultsHeader)
    throw Error(ErrorKind::parse, path.string() + ":1: unexpected header");
  ExperimentResult result;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const std::string where = path.string() + ":" + std::to_string(line_no);
    const auto f = split_fields(line);
    if (f.size() != 15) throw Error(ErrorKind::parse, where + ": expected 15 fields");
    TrialRecord r;
    r.model = std::string(f[0]);
    r.n = parse_field<std::size_t>(f[1], where);
    r.d1 = parse_field<std::size_t>(f[2], where);
    r.d2 = parse_field<std::size_t>(f[3], where);
    r.r = parse_field<std::size_t>(f[4], where);
    r.delta1 = parse_field<double>(f[5], where);
    r.delta2 = parse_field<double>(f[6], where);
    r.trial = parse_field<std::size_t>(f[7], where);
    r.seed = parse_field<std::uint64_t>(f[8], where);
    r.frob_error = parse_field<double>(f[9], where);
    r.rel_error = parse_field<double>(f[10], where);
    r.pred_error = parse_field<double>(f[11], where);
    r.iterations = parse_field<int>(f[12], where);
    r.runtime_ms = parse_field<double>(f[13], where);
    r.converged = parse_field<int>(f[14], where) != 0;
    result.records.push_back(std::move(r));
  }
  return result;
}

nlohmann::json summary_json(const ExperimentResult& result) {
  nlohmann::json cells = nlohmann::json::array();
  for (const CellSummary& c : summarize(result)) {
    cells.push_back({{"model", c.model},
                     {"n", c.n},
                     {"delta1", c.delta1},
                     {"delta2", c.delta2},
                     {"trials", c.trials},
                     {"failed", c.failed},
                     {"frob_error", mean_std_json(c.frob_error)},
                     {"rel_error", mean_std_json(c.rel_error)},
                     {"pred_error", mean_std_json(c.pred_error)},
                     {"iterations", mean_std_json(c.iterations)}});
  }
  return {{"records", result.records.size()}, {"cells", std::move(cells)}};
}

void write_results(const ExperimentResult& result, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  write_results_csv(result, dir / "results.csv");
  std::ofstream out = open_out(dir / "summary.json");
  out << summary_json(result).dump(2) << '\n';
  emit_plot_script(result, dir / "plot_results.py");
}

void emit_plot_script(const ExperimentResult& result, const std::filesystem::path& path) {
  std::ostringstream models;
  std::vector<std::string> seen;
  for (const TrialRecord& r : result.records) {
    if (std::find(seen.begin(), seen.end(), r.model) == seen.end()) seen.push_back(r.model);
  }
  for (std::size_t i = 0; i < seen.size(); ++i) models << (i ? ", " : "") << seen[i];

  std::ofstream out = open_out(path);
  out << R"PY(#!/usr/bin/env python3
# Mean estimation error against n on log-log axes, one line per
# (model, delta1, delta2) cell. Models: )PY"
      << models.str() << R"PY(
import csv
import math
import os
import sys
from collections import defaultdict

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt

here = os.path.dirname(os.path.abspath(__file__))
metric = sys.argv[1] if len(sys.argv) > 1 else "frob_error"
groups = defaultdict(lambda: defaultdict(list))
with open(os.path.join(here, "results.csv")) as fh:
    for row in csv.DictReader(fh):
        v = float(row[metric])
        if math.isfinite(v):
            key = (row["model"], float(row["delta1"]), float(row["delta2"]))
            groups[key][int(row["n"])].append(v)

fig, ax = plt.subplots(figsize=(6, 4.5))
for (model, d1, d2), by_n in sorted(groups.items()):
    ns = sorted(by_n)
    means = [sum(by_n[n]) / len(by_n[n]) for n in ns]
    ax.plot(ns, means, marker="o", label=f"{model} d1={d1:g} d2={d2:g}")
ax.set_xscale("log")
ax.set_yscale("log")
ax.set_xlabel("n")
ax.set_ylabel(metric)
ax.legend(fontsize=7)
fig.tight_layout()
fig.savefig(os.path.join(here, f"plot_{metric}.png"), dpi=150)
)PY";
  if (!out) throw Error(ErrorKind::io, "write failed: " + path.string());
}

void write_dither_demo_csv(std::span<const DitherDemoRow> rows, const std::filesystem::path& path) {
  std::ofstream out = open_out(path);
  out << "kind,delta,n,mean_noise,var_noise,mean_error,ks_stat\n";
  for (const DitherDemoRow& r : rows) {
    out << to_string(r.kind) << ',' << format_double(r.delta) << ',' << r.n << ','
        << format_double(r.moments.mean_noise) << ',' << format_double(r.moments.var_noise)
        << ',' << format_double(r.moments.mean_error) << ',' << format_double(r.moments.ks_stat)
        << '\n';
  }
  if (!out) throw Error(ErrorKind::io, "write failed: " + path.string());
}

}  // namespace qlrmr
