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
#include <string_view>
#include <vector>

#include "drkit/featurestore.hpp"
#include "drkit/probe.hpp"
#include "drkit/reduce.hpp"
#include "drkit/redundancy.hpp"

namespace drkit::detail {

/// Seed for one (grid point, seed index) cell, keyed by role.
std::uint64_t cell_seed(std::uint64_t base, std::string_view role, std::size_t point,
                        std::size_t seed_index);

NeuronMask cell_mask(std::size_t d, const GridPoint& point, std::uint64_t base,
                     std::size_t seed_index);

/// Train and test a probe on the full layer with the base config.
EvalResult full_layer_eval(const FeatureDataset& train, const FeatureDataset& test,
                           const ProbeConfig& cfg);

/// Masked-probe evaluations indexed [point][seed]. Cells at count d reuse
/// `full` so their ratio is exactly one.
std::vector<std::vector<EvalResult>> mask_probe_cells(const FeatureDataset& train,
                                                      const FeatureDataset& test,
                                                      const std::vector<GridPoint>& points,
                                                      const CurveOptions& opts,
                                                      const EvalResult& full);

void check_split_pair(const FeatureDataset& train, const FeatureDataset& test);

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;
};

/// Mean and population std over the finite entries; NaN when none are finite.
MeanStd finite_mean_std(const std::vector<double>& values);

}  // namespace drkit::detail
