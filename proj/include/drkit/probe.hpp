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
#include <vector>

#include <Eigen/Core>

#include "drkit/featurestore.hpp"
#include "drkit/reduce.hpp"

namespace drkit {

/// SGD recipe for linear probes. Defaults follow the standard transfer
/// protocol: lr 0.1, momentum 0.9, batch 256, weight decay 1e-4, 50 epochs,
/// lr x0.1 every 10 epochs.
struct ProbeConfig {
  double lr = 0.1;
  double momentum = 0.9;
  std::size_t batch_size = 256;
  double weight_decay = 1e-4;
  std::size_t epochs = 50;
  double lr_decay_factor = 0.1;
  std::size_t lr_decay_every = 10;
  std::uint64_t seed = 0;
  /// Standardise each kept neuron with train-split statistics. Off by default.
  bool standardize = false;

  void validate() const;
  /// Learning rate in effect during `epoch` (0-based).
  double lr_at(std::size_t epoch) const;
};

struct TrainedProbe {
  Eigen::MatrixXd weights;  // C x f
  Eigen::VectorXd bias;     // C
  NeuronMask mask;
  double final_train_loss = 0.0;
  ProbeConfig config;
  // Empty unless config.standardize.
  Eigen::RowVectorXd feature_mean;
  Eigen::RowVectorXd feature_scale;

  std::size_t num_classes() const noexcept { return static_cast<std::size_t>(weights.rows()); }
};

struct EvalResult {
  double overall_accuracy = 0.0;
  /// NaN for classes absent from the evaluation split.
  std::vector<double> per_class_accuracy;
  /// confusion[true][predicted].
  std::vector<std::vector<std::size_t>> confusion;
  std::vector<std::size_t> class_counts;
  std::size_t samples = 0;
};

/// Fits softmax regression on the masked columns of `train`. Deterministic in
/// (train, mask, cfg). Throws DivergenceError on a non-finite loss.
TrainedProbe train_probe(const FeatureDataset& train, const NeuronMask& mask,
                         const ProbeConfig& cfg);

/// Argmax predictions with ties going to the lowest class index.
EvalResult eval_probe(const TrainedProbe& probe, const FeatureDataset& test);

/// Mean cross-entropy of the probe on `ds` (no weight penalty).
double probe_loss(const TrainedProbe& probe, const FeatureDataset& ds);

}  // namespace drkit
