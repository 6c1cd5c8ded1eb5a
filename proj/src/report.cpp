// Copyright 2026 The drkit Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "drkit/report.hpp"

#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "drkit/error.hpp"

namespace drkit {
namespace {

using nlohmann::json;

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

std::string format_value(double v) {
  if (std::isnan(v)) return "nan";
  std::array<char, 32> buf{};
  std::snprintf(buf.data(), buf.size(), "%.17g", v);
  return buf.data();
}

json reduction_points(const ReductionCurve& c) {
  json arr = json::array();
  for (const auto& p : c.points) {
    json raw = json::array();
    for (double v : p.raw) raw.push_back(number_or_null(v));
    arr.push_back({{"fraction", p.fraction},
                   {"k", p.k},
                   {"mean", number_or_null(p.mean_accuracy)},
                   {"std", number_or_null(p.std_accuracy)},
                   {"raw", raw}});
  }
  return arr;
}

RatioCurve curve_from_accuracies(const std::vector<std::pair<GridPoint, std::vector<double>>>& rows,
                                 double full, std::size_t dim, std::size_t num_seeds,
                                 const FractionGrid& grid) {
  RatioCurve curve;
  curve.task = Task::probe_accuracy;
  curve.dim = dim;
  curve.full_layer_value = full;
  curve.num_seeds = num_seeds;
  curve.grid = grid;
  for (const auto& [gp, accs] : rows) {
    CurvePoint cp;
    cp.fraction = gp.fraction;
    cp.neuron_count = gp.count;
    cp.raw_absolute = accs;
    double sum = 0.0;
    for (double a : accs) {
      const double r = gp.count == dim ? 1.0 : a / full;
      cp.raw_ratios.push_back(r);
      sum += r;
    }
    cp.failures.assign(accs.size(), "");
    cp.mean_ratio = sum / static_cast<double>(accs.size());
    double var = 0.0;
    for (double r : cp.raw_ratios) var += (r - cp.mean_ratio) * (r - cp.mean_ratio);
    cp.std_ratio = std::sqrt(var / static_cast<double>(accs.size()));
    curve.points.push_back(std::move(cp));
  }
  return curve;
}

struct Checker {
  std::vector<std::string> problems;

  bool require(const json& obj, const std::string& where, const std::string& key,
               bool (json::*is)() const noexcept) {
    if (!obj.is_object() || !obj.contains(key)) {
      problems.push_back(where + ": missing '" + key + "'");
      return false;
    }
    if (!(obj[key].*is)()) {
      problems.push_back(where + "." + key + ": wrong type");
      return false;
    }
    return true;
  }

  void number_or_null(const json& obj, const std::string& where, const std::string& key) {
    if (!obj.contains(key)) {
      problems.push_back(where + ": missing '" + key + "'");
    } else if (!obj[key].is_number() && !obj[key].is_null()) {
      problems.push_back(where + "." + key + ": expected number or null");
    }
  }
};

}  // namespace

std::uint64_t file_digest(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::uint64_t h = 0xCBF29CE484222325ULL;
  std::array<char, 1 << 16> buf{};
  while (in) {
    in.read(buf.data(), buf.size());
    const auto got = in.gcount();
    for (std::streamsize i = 0; i < got; ++i) {
      h ^= static_cast<unsigned char>(buf[static_cast<std::size_t>(i)]);
      h *= 0x100000001B3ULL;
    }
  }
  return h;
}

std::string hex_digest(std::uint64_t digest) {
  std::array<char, 17> buf{};
  std::snprintf(buf.data(), buf.size(), "%016llx", static_cast<unsigned long long>(digest));
  return buf.data();
}

void RunManifest::add_input(const std::filesystem::path& path) {
  inputs.push_back(InputDigest{path.string(), hex_digest(file_digest(path))});
}

json to_json(const RunManifest& m) {
  json inputs = json::array();
  for (const auto& in : m.inputs) inputs.push_back({{"path", in.path}, {"digest", in.digest}});
  return {{"command", m.command},
          {"parameters", m.parameters},
          {"inputs", inputs},
          {"toolkit_version", m.toolkit_version},
          {"duration_seconds", m.duration_seconds}};
}

json to_json(const ProbeConfig& cfg) {
  return {{"lr", cfg.lr},
          {"momentum", cfg.momentum},
          {"batch_size", cfg.batch_size},
          {"weight_decay", cfg.weight_decay},
          {"epochs", cfg.epochs},
          {"lr_decay_factor", cfg.lr_decay_factor},
          {"lr_decay_every", cfg.lr_decay_every},
          {"seed", cfg.seed},
          {"standardize", cfg.standardize}};
}

json to_json(const EvalResult& r) {
  json per_class = json::array();
  for (double v : r.per_class_accuracy) per_class.push_back(number_or_null(v));
  return {{"overall_accuracy", r.overall_accuracy},
          {"per_class_accuracy", per_class},
          {"confusion", r.confusion},
          {"class_counts", r.class_counts},
          {"samples", r.samples}};
}

json grid_json(const FractionGrid& grid) { return grid.fractions(); }

json curve_json(const RatioCurve& curve) {
  json arr = json::array();
  for (const auto& p : curve.points) {
    json raw = json::array();
    for (std::size_t s = 0; s < p.raw_ratios.size(); ++s) {
      json cell = {{"seed", s},
                   {"ratio", number_or_null(p.raw_ratios[s])},
                   {"absolute", number_or_null(p.raw_absolute[s])}};
      if (s < p.failures.size() && !p.failures[s].empty()) cell["error"] = p.failures[s];
      raw.push_back(std::move(cell));
    }
    arr.push_back({{"fraction", p.fraction},
                   {"neuron_count", p.neuron_count},
                   {"mean_ratio", number_or_null(p.mean_ratio)},
                   {"std_ratio", number_or_null(p.std_ratio)},
                   {"raw", raw}});
  }
  return arr;
}

json to_json(const DrEstimate& est) {
  return {{"delta", est.delta},
          {"dr_value", est.dr_value},
          {"achieving_fraction", est.achieving_fraction},
          {"achieving_count", est.achieving_count}};
}

json to_json(const ComparisonReport& report) {
  json out = json::object();
  for (const auto& c : report.curves) out[c.kind] = reduction_points(c);
  return out;
}

json to_json(const FairnessReport& report) {
  json arr = json::array();
  for (const auto& p : report.points) {
    json per_class = json::array();
    for (const auto& row : p.per_class_accuracy) {
      json r = json::array();
      for (double v : row) r.push_back(number_or_null(v));
      per_class.push_back(std::move(r));
    }
    json cells = json::array();
    for (std::size_t s = 0; s < p.accuracy.size(); ++s) {
      cells.push_back({{"seed", s},
                       {"overall_accuracy", number_or_null(p.accuracy[s])},
                       {"gini", number_or_null(p.gini[s])},
                       {"cov", number_or_null(p.cov[s])}});
    }
    arr.push_back({{"fraction", p.fraction},
                   {"neuron_count", p.neuron_count},
                   {"overall_accuracy", {{"mean", number_or_null(p.accuracy_mean)},
                                         {"std", number_or_null(p.accuracy_std)}}},
                   {"gini", {{"mean", number_or_null(p.gini_mean)},
                             {"std", number_or_null(p.gini_std)}}},
                   {"cov", {{"mean", number_or_null(p.cov_mean)},
                            {"std", number_or_null(p.cov_std)}}},
                   {"cells", cells},
                   {"per_class_accuracy", per_class}});
  }
  return arr;
}

RatioCurve mask_ratio_curve(const ComparisonReport& report) {
  std::vector<std::pair<GridPoint, std::vector<double>>> rows;
  for (const auto& p : report.curve("mask").points) {
    rows.push_back({GridPoint{rows.size(), p.fraction, p.k}, p.raw});
  }
  return curve_from_accuracies(rows, report.full_layer_accuracy, report.dim, report.num_seeds,
                               report.grid);
}

RatioCurve accuracy_ratio_curve(const FairnessReport& report) {
  double full = 0.0;
  for (const auto& p : report.points) {
    if (p.neuron_count == report.dim) full = p.accuracy.front();
  }
  std::vector<std::pair<GridPoint, std::vector<double>>> rows;
  for (const auto& p : report.points) {
    rows.push_back({GridPoint{rows.size(), p.fraction, p.neuron_count}, p.accuracy});
  }
  return curve_from_accuracies(rows, full, report.dim, report.num_seeds, report.grid);
}

std::vector<std::string> validate_report(const json& report) {
  Checker ck;
  if (!report.is_object()) return {"report: expected an object"};

  if (ck.require(report, "report", "manifest", &json::is_object)) {
    const auto& m = report["manifest"];
    ck.require(m, "manifest", "command", &json::is_string);
    ck.require(m, "manifest", "parameters", &json::is_object);
    ck.require(m, "manifest", "toolkit_version", &json::is_string);
    ck.require(m, "manifest", "duration_seconds", &json::is_number);
    if (ck.require(m, "manifest", "inputs", &json::is_array)) {
      for (const auto& in : m["inputs"]) {
        ck.require(in, "manifest.inputs[]", "path", &json::is_string);
        if (ck.require(in, "manifest.inputs[]", "digest", &json::is_string) &&
            in["digest"].get<std::string>().size() != 16) {
          ck.problems.push_back("manifest.inputs[].digest: expected 16 hex digits");
        }
      }
    }
  }
  if (ck.require(report, "report", "task", &json::is_string)) {
    const auto task = report["task"].get<std::string>();
    if (task != "probe" && task != "cka" && task != "cka_pair") {
      ck.problems.push_back("task: unknown task '" + task + "'");
    }
  }

  if (report.contains("grid")) {
    if (!report["grid"].is_array() || report["grid"].empty()) {
      ck.problems.push_back("grid: expected a nonempty array");
    } else {
      double prev = 0.0;
      for (const auto& f : report["grid"]) {
        if (!f.is_number()) {
          ck.problems.push_back("grid[]: expected numbers");
          continue;
        }
        const double v = f.get<double>();
        if (!(v > prev && v <= 1.0)) {
          ck.problems.push_back("grid: fractions must increase strictly within (0, 1]");
        }
        prev = v;
      }
      if (report["grid"].back() != 1.0) ck.problems.push_back("grid: must end at 1.0");
    }
  }
  if (report.contains("full_layer_value")) ck.number_or_null(report, "report", "full_layer_value");

  if (report.contains("curve")) {
    if (!report["curve"].is_array()) {
      ck.problems.push_back("curve: expected an array");
    } else {
      for (const auto& p : report["curve"]) {
        ck.require(p, "curve[]", "fraction", &json::is_number);
        ck.require(p, "curve[]", "neuron_count", &json::is_number_unsigned);
        ck.number_or_null(p, "curve[]", "mean_ratio");
        ck.number_or_null(p, "curve[]", "std_ratio");
        if (p.contains("fraction") && p["fraction"] == 1.0 && p.contains("mean_ratio") &&
            p["mean_ratio"] != 1.0) {
          ck.problems.push_back("curve: mean ratio at fraction 1.0 must be exactly 1.0");
        }
        if (!ck.require(p, "curve[]", "raw", &json::is_array)) continue;
        for (const auto& cell : p["raw"]) {
          ck.require(cell, "curve[].raw[]", "seed", &json::is_number_unsigned);
          ck.number_or_null(cell, "curve[].raw[]", "ratio");
          ck.number_or_null(cell, "curve[].raw[]", "absolute");
          if (p.contains("fraction") && p["fraction"] == 1.0 &&
              !(cell.contains("ratio") && cell["ratio"] == 1.0)) {
            ck.problems.push_back("curve: ratio at fraction 1.0 must be exactly 1.0");
          }
        }
      }
    }
  }

  if (report.contains("dr")) {
    const auto& dr = report["dr"];
    if (ck.require(dr, "dr", "delta", &json::is_number)) {
      const double delta = dr["delta"].get<double>();
      if (!(delta > 0.0 && delta <= 1.0)) ck.problems.push_back("dr.delta: outside (0, 1]");
    }
    if (ck.require(dr, "dr", "dr_value", &json::is_number)) {
      const double v = dr["dr_value"].get<double>();
      if (!(v >= 0.0 && v < 1.0)) ck.problems.push_back("dr.dr_value: outside [0, 1)");
    }
    ck.require(dr, "dr", "achieving_fraction", &json::is_number);
  }

  if (report.contains("comparison")) {
    const auto& cmp = report["comparison"];
    for (const char* kind : {"mask", "pca_top", "pca_bottom", "random_gaussian"}) {
      if (!ck.require(cmp, "comparison", kind, &json::is_array)) continue;
      for (const auto& p : cmp[kind]) {
        const std::string where = std::string("comparison.") + kind + "[]";
        ck.require(p, where, "fraction", &json::is_number);
        ck.require(p, where, "k", &json::is_number_unsigned);
        ck.number_or_null(p, where, "mean");
        ck.number_or_null(p, where, "std");
        ck.require(p, where, "raw", &json::is_array);
      }
    }
  }

  if (report.contains("fairness")) {
    if (!report["fairness"].is_array()) {
      ck.problems.push_back("fairness: expected an array");
    } else {
      for (const auto& p : report["fairness"]) {
        ck.require(p, "fairness[]", "fraction", &json::is_number);
        ck.require(p, "fairness[]", "neuron_count", &json::is_number_unsigned);
        for (const char* stat : {"overall_accuracy", "gini", "cov"}) {
          if (ck.require(p, "fairness[]", stat, &json::is_object)) {
            ck.number_or_null(p[stat], std::string("fairness[].") + stat, "mean");
            ck.number_or_null(p[stat], std::string("fairness[].") + stat, "std");
          }
        }
        ck.require(p, "fairness[]", "cells", &json::is_array);
        ck.require(p, "fairness[]", "per_class_accuracy", &json::is_array);
      }
    }
  }
  return ck.problems;
}

std::vector<CsvRow> csv_rows(const RatioCurve& curve) {
  const std::string absolute = curve.task == Task::cka ? "cka" : "accuracy";
  std::vector<CsvRow> rows;
  for (const auto& p : curve.points) {
    for (std::size_t s = 0; s < p.raw_ratios.size(); ++s) {
      rows.push_back({p.fraction, s, "mask", "ratio", p.raw_ratios[s]});
      rows.push_back({p.fraction, s, "mask", absolute, p.raw_absolute[s]});
    }
  }
  return rows;
}

std::vector<CsvRow> csv_rows(const ComparisonReport& report) {
  std::vector<CsvRow> rows;
  for (const auto& c : report.curves) {
    for (const auto& p : c.points) {
      for (std::size_t s = 0; s < p.raw.size(); ++s) {
        rows.push_back({p.fraction, s, c.kind, "accuracy", p.raw[s]});
      }
    }
  }
  return rows;
}

std::vector<CsvRow> csv_rows(const FairnessReport& report) {
  std::vector<CsvRow> rows;
  for (const auto& p : report.points) {
    for (std::size_t s = 0; s < p.accuracy.size(); ++s) {
      rows.push_back({p.fraction, s, "mask", "accuracy", p.accuracy[s]});
      rows.push_back({p.fraction, s, "mask", "gini", p.gini[s]});
      rows.push_back({p.fraction, s, "mask", "cov", p.cov[s]});
      for (std::size_t c = 0; c < p.per_class_accuracy[s].size(); ++c) {
        rows.push_back({p.fraction, s, "mask", "class_accuracy_" + std::to_string(c),
                        p.per_class_accuracy[s][c]});
      }
    }
  }
  return rows;
}

void write_csv(const std::filesystem::path& path, const std::vector<CsvRow>& rows) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << "fraction,seed,kind,metric,value\n";
  for (const auto& r : rows) {
    out << format_value(r.fraction) << ',' << r.seed << ',' << r.kind << ',' << r.metric << ','
        << format_value(r.value) << '\n';
  }
  if (!out) throw IoError("write failed for " + path.string());
}

}  // namespace drkit
