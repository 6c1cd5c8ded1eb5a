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

#include "drkit/fairness.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "cells.hpp"
#include "drkit/error.hpp"

namespace drkit {
namespace {

double checked_mean(std::span<const double> values, const char* what) {
  if (values.empty()) throw ValidationError(std::string(what) + " of an empty list");
  double sum = 0.0;
  for (double v : values) {
    if (!std::isfinite(v)) throw ValidationError(std::string(what) + " needs finite values");
    sum += v;
  }
  const double mean = sum / static_cast<double>(values.size());
  if (!(mean > 0.0)) throw DegenerateError(std::string(what) + " is undefined for zero mean");
  return mean;
}

}  // namespace

double gini(std::span<const double> values) {
  const double mean = checked_mean(values, "gini");
  std::vector<double> sorted(values.begin(), values.end());
  if (*std::min_element(sorted.begin(), sorted.end()) < 0.0) {
    throw ValidationError("gini needs nonnegative values");
  }
  std::sort(sorted.begin(), sorted.end());
  // sum_ij |v_i - v_j| = 2 sum_i (2i - m - 1) v_(i) with 1-based ranks.
  const auto m = static_cast<double>(sorted.size());
  double weighted = 0.0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    weighted += (2.0 * static_cast<double>(i + 1) - m - 1.0) * sorted[i];
  }
  return weighted / (m * m * mean);
}

double coeff_variation(std::span<const double> values) {
  const double mean = checked_mean(values, "coefficient of variation");
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  if (*lo == *hi) return 0.0;  // the rounded mean would leave ~1e-16
  double var = 0.0;
  for (double v : values) var += (v - mean) * (v - mean);
  return std::sqrt(var / static_cast<double>(values.size())) / mean;
}

FairnessReport fairness_curve(const FeatureDataset& train, const FeatureDataset& test,
                              const CurveOptions& opts) {
  opts.validate();
  detail::check_split_pair(train, test);
  const auto counts = test.class_counts();
  for (std::size_t c = 0; c < counts.size(); ++c) {
    if (counts[c] == 0) {
      throw ConfigError("class " + std::to_string(c) +
                        " is absent from the test split; per-class accuracy is undefined");
    }
  }

  const auto points = opts.grid.points(train.dim());
  const auto full = detail::full_layer_eval(train, test, opts.probe);
  const auto cells = detail::mask_probe_cells(train, test, points, opts, full);

  FairnessReport report;
  report.dim = train.dim();
  report.num_classes = test.num_classes();
  report.num_seeds = opts.num_seeds;
  report.test_class_counts = counts;
  report.grid = opts.grid;
  for (const auto& p : points) {
    FairnessPoint fp;
    fp.fraction = p.fraction;
    fp.neuron_count = p.count;
    for (const auto& r : cells[p.index]) {
      fp.accuracy.push_back(r.overall_accuracy);
      fp.per_class_accuracy.push_back(r.per_class_accuracy);
      fp.gini.push_back(gini(r.per_class_accuracy));
      fp.cov.push_back(coeff_variation(r.per_class_accuracy));
    }
    const auto acc = detail::finite_mean_std(fp.accuracy);
    const auto g = detail::finite_mean_std(fp.gini);
    const auto cv = detail::finite_mean_std(fp.cov);
    fp.accuracy_mean = acc.mean;
    fp.accuracy_std = acc.std;
    fp.gini_mean = g.mean;
    fp.gini_std = g.std;
    fp.cov_mean = cv.mean;
    fp.cov_std = cv.std;
    report.points.push_back(std::move(fp));
  }
  return report;
}

}  // namespace drkit
