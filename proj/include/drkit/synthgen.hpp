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
#include <string>

#include "drkit/featurestore.hpp"

namespace drkit {

enum class SynthMode {
  /// Every neuron is a random mixture of the latent code plus noise.
  diffused,
  /// Only the first `informative_prefix` neurons carry signal.
  structured_prefix,
  /// Half the layer carries signal, the rest is wide pure noise.
  noise_augmented,
  /// Diffused signal in which the last `prefix_classes` classes share latent
  /// means with the first ones and differ only on the prefix neurons.
  class_prefix,
};

std::string to_string(SynthMode mode);
SynthMode synth_mode_from_string(const std::string& text);

struct SynthConfig {
  SynthMode mode = SynthMode::diffused;
  std::size_t latent_dim = 4;
  std::uint32_t num_classes = 10;
  std::size_t width = 256;
  std::size_t n_train = 5000;
  std::size_t n_test = 1000;
  double class_sep = 6.0;
  double noise_std = 0.1;
  double extra_noise_std = 10.0;
  std::size_t informative_prefix = 8;
  std::uint32_t prefix_classes = 2;

  /// Neurons that carry the mixed latent in noise_augmented mode.
  std::size_t signal_width() const;

  /// Throws ValidationError when a bound is violated.
  void validate() const;
};

struct SynthSplits {
  FeatureDataset train;
  FeatureDataset test;
};

/// Deterministic in (cfg, seed); train and test share the generative
/// parameters and use disjoint sample streams.
SynthSplits gen_synthetic(const SynthConfig& cfg, std::uint64_t seed);

}  // namespace drkit
