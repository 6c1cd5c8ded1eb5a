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

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "drkit/featurestore.hpp"
#include "drkit/probe.hpp"
#include "drkit/reduce.hpp"

namespace drkit {

enum class Task { probe_accuracy, cka };

std::string to_string(Task task);
Task task_from_string(const std::string& text);

struct GridPoint {
  std::size_t index = 0;  // position after deduplication
  double fraction = 0.0;
  std::size_t count = 0;
};

/// Strictly increasing fractions in (0, 1] that always end at 1.0.
class FractionGrid {
 public:
  explicit FractionGrid(std::vector<double> fractions);

  /// {0.01, 0.02, 0.05, 0.1, 0.2, 0.3, 0.5, 0.7, 0.8, 0.9, 0.95, 1.0}
  static FractionGrid defaults();

  const std::vector<double>& fractions() const noexcept { return fractions_; }

  /// Neuron count for one fraction: max(1, round(f * d)).
  static std::size_t count_for(double fraction, std::size_t d);

  /// Grid points for width d. When several fractions round to the same
  /// count only the first is kept.
  std::vector<GridPoint> points(std::size_t d) const;

 private:
  std::vector<double> fractions_;
};

/// Shared settings of every grid x seed experiment.
struct CurveOptions {
  FractionGrid grid = FractionGrid::defaults();
  std::size_t num_seeds = 5;
  /// probe.seed doubles as the base seed from which all cell seeds derive.
  ProbeConfig probe;
  std::size_t jobs = 1;

  void validate() const;
};

struct CurvePoint {
  double fraction = 0.0;
  std::size_t neuron_count = 0;
  /// Mean and population std over the successful cells; NaN if none succeeded.
  double mean_ratio = 0.0;
  double std_ratio = 0.0;
  /// One entry per seed; NaN marks a failed cell.
  std::vector<double> raw_ratios;
  std::vector<double> raw_absolute;
  std::vector<std::string> failures;  // empty string for successful cells
  std::size_t failed_cells() const;
};

struct RatioCurve {
  Task task = Task::probe_accuracy;
  std::size_t dim = 0;
  double full_layer_value = 1.0;
  std::size_t num_seeds = 0;
  FractionGrid grid = FractionGrid::defaults();
  std::vector<CurvePoint> points;
};

struct DrEstimate {
  Task task = Task::probe_accuracy;
  double delta = 0.0;
  double dr_value = 0.0;
  double achieving_fraction = 1.0;
  std::size_t achieving_count = 0;
  FractionGrid grid = FractionGrid::defaults();
};

/// T(m * g) / T(g) over the grid, num_seeds random masks per fraction.
/// The probe task trains on `train` and scores on `test`; the CKA task
/// compares masked and full test features and ignores `train`.
RatioCurve ratio_curve(const FeatureDataset& train, const FeatureDataset& test, Task task,
                       const CurveOptions& opts);

/// Smallest grid count whose mean ratio reaches delta, reported as
/// 1 - count / d. Requires 0 < delta <= 1.
DrEstimate dr_from_curve(const RatioCurve& curve, double delta);

struct ReductionPoint {
  double fraction = 0.0;
  std::size_t k = 0;
  double mean_accuracy = 0.0;
  double std_accuracy = 0.0;
  std::vector<double> raw;
};

struct ReductionCurve {
  std::string kind;  // mask, pca_top, pca_bottom, random_gaussian
  std::vector<ReductionPoint> points;
};

struct ComparisonReport {
  double full_layer_accuracy = 0.0;
  std::size_t dim = 0;
  std::size_t num_seeds = 0;
  FractionGrid grid = FractionGrid::defaults();
  std::vector<ReductionCurve> curves;

  const ReductionCurve& curve(const std::string& kind) const;
};

/// Probe accuracy at every grid count for random masks, top and bottom PCA
/// (fitted on train) and column-normalised Gaussian projections.
ComparisonReport compare_reductions(const FeatureDataset& train, const FeatureDataset& test,
                                    const CurveOptions& opts);

}  // namespace drkit
