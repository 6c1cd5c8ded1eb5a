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
#include <span>
#include <vector>

#include "drkit/featurestore.hpp"
#include "drkit/redundancy.hpp"

namespace drkit {

/// Mean-absolute-difference Gini index, sum |v_i - v_j| / (2 m^2 mean),
/// evaluated in O(m log m) from sorted ranks. Values must be >= 0 with a
/// positive mean.
double gini(std::span<const double> values);

/// Population standard deviation over mean.
double coeff_variation(std::span<const double> values);

struct FairnessPoint {
  double fraction = 0.0;
  std::size_t neuron_count = 0;
  double accuracy_mean = 0.0;
  double accuracy_std = 0.0;
  double gini_mean = 0.0;
  double gini_std = 0.0;
  double cov_mean = 0.0;
  double cov_std = 0.0;
  // Per seed, so each (accuracy, gini) pair stays attached to its cell.
  std::vector<double> accuracy;
  std::vector<double> gini;
  std::vector<double> cov;
  /// seeds x C
  std::vector<std::vector<double>> per_class_accuracy;
};

struct FairnessReport {
  std::size_t dim = 0;
  std::size_t num_classes = 0;
  std::size_t num_seeds = 0;
  std::vector<std::size_t> test_class_counts;
  FractionGrid grid = FractionGrid::defaults();
  std::vector<FairnessPoint> points;
};

/// Spread of class-wise test accuracy as neurons are dropped. Every class
/// must occur in the test split (ConfigError otherwise).
FairnessReport fairness_curve(const FeatureDataset& train, const FeatureDataset& test,
                              const CurveOptions& opts);

}  // namespace drkit
