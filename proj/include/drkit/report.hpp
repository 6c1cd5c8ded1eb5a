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

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "drkit/fairness.hpp"
#include "drkit/probe.hpp"
#include "drkit/redundancy.hpp"
#include "drkit/similarity.hpp"

namespace drkit {

inline constexpr const char* kToolkitVersion = "0.1.0";

/// 64-bit FNV-1a over the bytes of a file.
std::uint64_t file_digest(const std::filesystem::path& path);
std::string hex_digest(std::uint64_t digest);

struct InputDigest {
  std::string path;
  std::string digest;
};

/// Reproducibility envelope embedded in every report.
struct RunManifest {
  std::string command;
  nlohmann::json parameters = nlohmann::json::object();
  std::vector<InputDigest> inputs;
  std::string toolkit_version = kToolkitVersion;
  double duration_seconds = 0.0;

  void add_input(const std::filesystem::path& path);
};

nlohmann::json to_json(const RunManifest& m);
nlohmann::json to_json(const ProbeConfig& cfg);
nlohmann::json to_json(const EvalResult& r);
nlohmann::json grid_json(const FractionGrid& grid);
nlohmann::json curve_json(const RatioCurve& curve);
nlohmann::json to_json(const DrEstimate& est);
nlohmann::json to_json(const ComparisonReport& report);
nlohmann::json to_json(const FairnessReport& report);

/// Ratio curve of the random-mask accuracies inside a comparison.
RatioCurve mask_ratio_curve(const ComparisonReport& report);
/// Ratio curve of the overall accuracies inside a fairness report.
RatioCurve accuracy_ratio_curve(const FairnessReport& report);

/// Structural check against the published report schema. Returns one
/// message per violation; empty means valid.
std::vector<std::string> validate_report(const nlohmann::json& report);

struct CsvRow {
  double fraction = 0.0;
  std::size_t seed = 0;
  std::string kind;
  std::string metric;
  double value = 0.0;
};

std::vector<CsvRow> csv_rows(const RatioCurve& curve);
std::vector<CsvRow> csv_rows(const ComparisonReport& report);
std::vector<CsvRow> csv_rows(const FairnessReport& report);

/// Writes `fraction,seed,kind,metric,value` plus one line per row.
void write_csv(const std::filesystem::path& path, const std::vector<CsvRow>& rows);

}  // namespace drkit
