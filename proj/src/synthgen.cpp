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

#include "drkit/synthgen.hpp"

#include <cmath>
#include <random>
#include <vector>

#include <Eigen/Core>

#include "drkit/error.hpp"
#include "drkit/seed.hpp"

namespace drkit {
namespace {

struct Generator {
  Eigen::MatrixXd class_means;  // C x s
  Eigen::MatrixXd mixing;       // rows = neurons driven by the latent
  std::size_t mixed_offset = 0;  // first neuron driven by `mixing`
};

Eigen::MatrixXd gaussian_matrix(std::size_t rows, std::size_t cols, double scale, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = normal(rng) * scale;
  }
  return m;
}

Generator make_generator(const SynthConfig& cfg, std::uint64_t seed) {
  const auto s = static_cast<Eigen::Index>(cfg.latent_dim);
  const auto classes = static_cast<Eigen::Index>(cfg.num_classes);
  Generator g;

  Rng mean_rng(derive_seed(seed, "class_means"));
  std::normal_distribution<double> normal(0.0, 1.0);
  g.class_means.resize(classes, s);
  for (Eigen::Index c = 0; c < classes; ++c) {
    Eigen::VectorXd dir(s);
    do {
      for (Eigen::Index k = 0; k < s; ++k) dir(k) = normal(mean_rng);
      // With room for it, keep directions mutually orthogonal so no two
      // means land arbitrarily close.
      if (classes <= s) {
        for (Eigen::Index j = 0; j < c; ++j) {
          const Eigen::VectorXd u = g.class_means.row(j).transpose() / cfg.class_sep;
          dir -= u.dot(dir) * u;
        }
      }
    } while (dir.norm() < 1e-9);
    g.class_means.row(c) = (cfg.class_sep / dir.norm()) * dir.transpose();
  }
  if (cfg.mode == SynthMode::class_prefix) {
    const auto hidden = static_cast<Eigen::Index>(cfg.prefix_classes);
    for (Eigen::Index i = 0; i < hidden; ++i) {
      g.class_means.row(classes - hidden + i) = g.class_means.row(i);
    }
  }

  Rng mix_rng(derive_seed(seed, "mixing"));
  const double scale = 1.0 / std::sqrt(static_cast<double>(cfg.latent_dim));
  switch (cfg.mode) {
    case SynthMode::diffused:
      g.mixing = gaussian_matrix(cfg.width, cfg.latent_dim, scale, mix_rng);
      break;
    case SynthMode::structured_prefix:
      g.mixing = gaussian_matrix(cfg.informative_prefix, cfg.latent_dim, scale, mix_rng);
      break;
    case SynthMode::noise_augmented:
      g.mixing = gaussian_matrix(cfg.signal_width(), cfg.latent_dim, scale, mix_rng);
      break;
    case SynthMode::class_prefix:
      g.mixing = gaussian_matrix(cfg.width - cfg.informative_prefix, cfg.latent_dim, scale,
                                 mix_rng);
      g.mixed_offset = cfg.informative_prefix;
      break;
  }
  return g;
}

FeatureDataset sample_split(const SynthConfig& cfg, const Generator& g, std::uint64_t seed,
                            std::size_t n, Split split, std::uint64_t base_seed) {
  Rng rng(seed);
  std::uniform_int_distribution<std::uint32_t> pick_class(0, cfg.num_classes - 1);
  std::normal_distribution<double> normal(0.0, 1.0);

  const auto s = static_cast<Eigen::Index>(cfg.latent_dim);
  const auto d = static_cast<Eigen::Index>(cfg.width);
  const auto mixed = g.mixing.rows();
  const auto offset = static_cast<Eigen::Index>(g.mixed_offset);
  const double pure_noise_std =
      cfg.mode == SynthMode::noise_augmented ? cfg.extra_noise_std : cfg.noise_std;
  const std::uint32_t first_hidden = cfg.num_classes - cfg.prefix_classes;

  FeatureMatrix x(static_cast<Eigen::Index>(n), d);
  Labels labels(n);
  Eigen::VectorXd z(s);
  Eigen::VectorXd row(d);
  for (std::size_t i = 0; i < n; ++i) {
    const std::uint32_t c = pick_class(rng);
    labels[i] = c;
    for (Eigen::Index k = 0; k < s; ++k) z(k) = g.class_means(c, k) + normal(rng);
    row.setZero();
    row.segment(offset, mixed) = g.mixing * z;
    for (Eigen::Index j = 0; j < d; ++j) {
      const bool signal = j >= offset && j < offset + mixed;
      row(j) += normal(rng) * (signal || cfg.mode == SynthMode::class_prefix ? cfg.noise_std
                                                                              : pure_noise_std);
    }
    if (cfg.mode == SynthMode::class_prefix && c >= first_hidden) {
      row.head(offset).array() += cfg.class_sep;
    }
    x.row(static_cast<Eigen::Index>(i)) = row.cast<float>().transpose();
  }

  Manifest meta;
  meta.model_name = "synthetic";
  meta.layer_name = to_string(cfg.mode);
  meta.dataset_name = "synthetic";
  meta.split = split;
  meta.extraction_seed = static_cast<std::int64_t>(base_seed);
  return FeatureDataset(std::move(x), std::move(labels), cfg.num_classes, std::move(meta));
}

}  // namespace

std::string to_string(SynthMode mode) {
  switch (mode) {
    case SynthMode::diffused:
      return "diffused";
    case SynthMode::structured_prefix:
      return "structured_prefix";
    case SynthMode::noise_augmented:
      return "noise_augmented";
    case SynthMode::class_prefix:
      return "class_prefix";
  }
  return "unknown";
}

SynthMode synth_mode_from_string(const std::string& text) {
  if (text == "diffused") return SynthMode::diffused;
  if (text == "structured_prefix") return SynthMode::structured_prefix;
  if (text == "noise_augmented") return SynthMode::noise_augmented;
  if (text == "class_prefix") return SynthMode::class_prefix;
  throw ValidationError("unknown synthetic mode '" + text + "'");
}

std::size_t SynthConfig::signal_width() const {
  return latent_dim == 0 ? 0 : latent_dim * (width / (2 * latent_dim));
}

void SynthConfig::validate() const {
  auto fail = [](const std::string& what) { throw ValidationError("synthetic config: " + what); };
  if (latent_dim < 1) fail("latent_dim must be >= 1");
  if (num_classes < 2) fail("num_classes must be >= 2");
  if (width < latent_dim) fail("width must be >= latent_dim");
  if (n_train < 1 || n_test < 1) fail("n_train and n_test must be >= 1");
  if (!(class_sep > 0.0) || !std::isfinite(class_sep)) fail("class_sep must be positive");
  if (!(noise_std > 0.0) || !std::isfinite(noise_std)) fail("noise_std must be positive");
  if (!(extra_noise_std >= 0.0) || !std::isfinite(extra_noise_std)) {
    fail("extra_noise_std must be nonnegative");
  }
  switch (mode) {
    case SynthMode::diffused:
      break;
    case SynthMode::structured_prefix:
      if (informative_prefix < 1 || informative_prefix > width) {
        fail("informative_prefix must lie in [1, width]");
      }
      break;
    case SynthMode::noise_augmented:
      if (width <= latent_dim || signal_width() < latent_dim) {
        fail("noise_augmented needs width >= 2 * latent_dim");
      }
      break;
    case SynthMode::class_prefix:
      if (informative_prefix < 1 || informative_prefix >= width) {
        fail("informative_prefix must lie in [1, width)");
      }
      if (prefix_classes < 1 || 2 * prefix_classes > num_classes) {
        fail("prefix_classes must lie in [1, num_classes / 2]");
      }
      break;
  }
}

SynthSplits gen_synthetic(const SynthConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  const Generator g = make_generator(cfg, seed);
  return SynthSplits{
      sample_split(cfg, g, derive_seed(seed, "train"), cfg.n_train, Split::train, seed),
      sample_split(cfg, g, derive_seed(seed, "test"), cfg.n_test, Split::test, seed),
  };
}

}  // namespace drkit
