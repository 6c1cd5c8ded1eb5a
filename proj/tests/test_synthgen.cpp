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

#include <cmath>

#include <doctest.h>

#include "drkit/error.hpp"
#include "drkit/probe.hpp"
#include "drkit/reduce.hpp"
#include "drkit/synthgen.hpp"

using namespace drkit;

namespace {

double test_accuracy(const SynthSplits& s, const NeuronMask& mask, std::uint64_t seed = 0) {
  ProbeConfig cfg;
  cfg.seed = seed;
  return eval_probe(train_probe(s.train, mask, cfg), s.test).overall_accuracy;
}

}  // namespace

TEST_CASE("generation is a pure function of config and seed") {
  for (auto mode : {SynthMode::diffused, SynthMode::structured_prefix, SynthMode::noise_augmented,
                    SynthMode::class_prefix}) {
    SynthConfig cfg;
    cfg.mode = mode;
    cfg.width = 40;
    cfg.n_train = 200;
    cfg.n_test = 100;
    const auto a = gen_synthetic(cfg, 17);
    const auto b = gen_synthetic(cfg, 17);
    CHECK(a.train == b.train);
    CHECK(a.test == b.test);
    CHECK_FALSE(gen_synthetic(cfg, 18).train == a.train);
    CHECK(a.train.meta().split == Split::train);
    CHECK(a.test.meta().split == Split::test);
    CHECK(a.train.meta().layer_name == to_string(mode));
  }
}

TEST_CASE("train and test come from disjoint streams") {
  SynthConfig cfg;
  cfg.n_train = 50;
  cfg.n_test = 50;
  const auto s = gen_synthetic(cfg, 1);
  CHECK_FALSE(s.train.features() == s.test.features());
}

TEST_CASE("config validation") {
  auto rejects = [](auto edit) {
    SynthConfig cfg;
    edit(cfg);
    CHECK_THROWS_AS(gen_synthetic(cfg, 0), ValidationError);
  };
  rejects([](SynthConfig& c) { c.latent_dim = 0; });
  rejects([](SynthConfig& c) { c.num_classes = 1; });
  rejects([](SynthConfig& c) { c.width = 3; });
  rejects([](SynthConfig& c) { c.n_train = 0; });
  rejects([](SynthConfig& c) { c.class_sep = 0.0; });
  rejects([](SynthConfig& c) { c.noise_std = -1.0; });
  rejects([](SynthConfig& c) {
    c.mode = SynthMode::structured_prefix;
    c.informative_prefix = 257;
  });
  rejects([](SynthConfig& c) {
    c.mode = SynthMode::noise_augmented;
    c.width = 4;
  });
  rejects([](SynthConfig& c) {
    c.mode = SynthMode::noise_augmented;
    c.width = 7;  // floor(7 / 8) = 0 signal neurons
  });
  rejects([](SynthConfig& c) {
    c.mode = SynthMode::noise_augmented;
    c.extra_noise_std = -0.5;
  });
  rejects([](SynthConfig& c) {
    c.mode = SynthMode::class_prefix;
    c.prefix_classes = 6;
  });
  CHECK_THROWS_AS(synth_mode_from_string("spiky"), ValidationError);
}

TEST_CASE("class counts are binomially balanced") {
  SynthConfig cfg;
  cfg.n_train = 5000;
  cfg.n_test = 10;
  const auto s = gen_synthetic(cfg, 2);
  const double p = 1.0 / cfg.num_classes;
  const double mean = cfg.n_train * p;
  const double sigma = std::sqrt(cfg.n_train * p * (1 - p));
  for (auto c : s.train.class_counts()) {
    CHECK(std::abs(static_cast<double>(c) - mean) <= 3.0 * sigma);
  }
}

TEST_CASE("diffused signal has rank equal to the latent dimension") {
  SynthConfig cfg;
  cfg.width = 64;
  cfg.n_train = 2000;
  cfg.n_test = 10;
  const auto s = gen_synthetic(cfg, 3);
  const PcaBasis pca(s.train.features());
  // Latent directions carry O(class_sep^2) variance; the rest is noise_std^2.
  CHECK(pca.eigenvalues()(3) > 1.0);
  CHECK(pca.eigenvalues()(4) < 2.0 * cfg.noise_std * cfg.noise_std);
}

TEST_CASE("easy diffused config is almost perfectly separable") {
  SynthConfig cfg;
  cfg.latent_dim = 4;
  cfg.num_classes = 4;
  cfg.width = 64;
  cfg.class_sep = 6.0;
  cfg.noise_std = 0.1;
  cfg.n_train = 2000;
  cfg.n_test = 1000;
  const auto s = gen_synthetic(cfg, 4);
  CHECK(test_accuracy(s, NeuronMask::full(64)) >= 0.99);
}

TEST_CASE("a random mask of 4s neurons sees the whole latent") {
  SynthConfig cfg;
  cfg.n_train = 3000;
  cfg.n_test = 1000;
  const auto s = gen_synthetic(cfg, 5);
  const double full = test_accuracy(s, NeuronMask::full(256));
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    CHECK(std::abs(test_accuracy(s, sample_mask(256, 16, seed), seed) - full) <= 0.02);
  }
}

TEST_CASE("structured prefix beats random masks of the same size") {
  SynthConfig cfg;
  cfg.mode = SynthMode::structured_prefix;
  cfg.informative_prefix = 8;
  cfg.n_train = 3000;
  cfg.n_test = 1000;
  const auto s = gen_synthetic(cfg, 6);
  const double prefix = test_accuracy(s, NeuronMask::prefix(256, 8));
  double random = 0.0;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    random += test_accuracy(s, sample_mask(256, 8, seed), seed) / 5.0;
  }
  CHECK(prefix - random > 0.10);
  // Non-prefix neurons are pure noise at noise_std.
  const Eigen::ArrayXf tail = s.train.features().col(200).array();
  const double sd = std::sqrt((tail - tail.mean()).square().mean());
  CHECK(sd == doctest::Approx(cfg.noise_std).epsilon(0.1));
}

TEST_CASE("noise-augmented layout") {
  SynthConfig cfg;
  cfg.mode = SynthMode::noise_augmented;
  cfg.width = 100;
  cfg.n_train = 3000;
  cfg.n_test = 10;
  CHECK(cfg.signal_width() == 48);  // 4 * floor(100 / 8)
  const auto s = gen_synthetic(cfg, 7);
  for (Eigen::Index col : {48, 75, 99}) {
    const Eigen::ArrayXf v = s.train.features().col(col).array();
    const double sd = std::sqrt((v - v.mean()).square().mean());
    CHECK(sd == doctest::Approx(cfg.extra_noise_std).epsilon(0.1));
  }
}

TEST_CASE("class-prefix layout hides paired classes outside the prefix") {
  SynthConfig cfg;
  cfg.mode = SynthMode::class_prefix;
  cfg.n_train = 3000;
  cfg.n_test = 10;
  const auto s = gen_synthetic(cfg, 8);
  const auto& x = s.train.features();
  // Prefix neurons shift by class_sep for the hidden classes only.
  double hidden = 0.0, shown = 0.0;
  std::size_t nh = 0, ns = 0;
  for (std::size_t i = 0; i < s.train.rows(); ++i) {
    const double v = x(static_cast<Eigen::Index>(i), 0);
    if (s.train.labels()[i] >= 8) {
      hidden += v;
      ++nh;
    } else {
      shown += v;
      ++ns;
    }
  }
  CHECK(hidden / nh - shown / ns == doctest::Approx(cfg.class_sep).epsilon(0.02));
}
