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
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "drkit/featurestore.hpp"

namespace drkit {

/// A subset of the neurons of a d-wide layer. Holds 1 <= count <= d.
class NeuronMask {
 public:
  explicit NeuronMask(std::vector<bool> bits);

  static NeuronMask full(std::size_t d);
  /// The first f neurons.
  static NeuronMask prefix(std::size_t d, std::size_t f);
  static NeuronMask from_indices(std::size_t d, std::span<const std::size_t> indices);

  std::size_t size() const noexcept { return bits_.size(); }
  std::size_t count() const noexcept { return indices_.size(); }
  bool all() const noexcept { return count() == size(); }
  bool operator[](std::size_t i) const { return bits_.at(i); }
  const std::vector<bool>& bits() const noexcept { return bits_; }
  /// Selected neuron indices in increasing order.
  const std::vector<std::size_t>& indices() const noexcept { return indices_; }

  bool operator==(const NeuronMask& other) const { return bits_ == other.bits_; }

 private:
  std::vector<bool> bits_;
  std::vector<std::size_t> indices_;
};

/// Uniform draw from the size-f subsets of d neurons (partial Fisher-Yates).
NeuronMask sample_mask(std::size_t d, std::size_t f, std::uint64_t seed);

/// Copies the masked columns of `x` into a dense n x f matrix.
Eigen::MatrixXd select_columns(const FeatureMatrix& x, const NeuronMask& mask);

enum class ProjectionKind { pca_top, pca_bottom, random_gaussian };

std::string to_string(ProjectionKind kind);

struct Projection {
  Eigen::MatrixXd matrix;  // d x k
  ProjectionKind kind = ProjectionKind::random_gaussian;
  Eigen::VectorXd center;  // length d; zero for random projections
  std::optional<std::uint64_t> seed;
  Eigen::VectorXd variances;  // eigenvalues of the kept components (PCA only)

  std::size_t input_dim() const noexcept { return static_cast<std::size_t>(matrix.rows()); }
  std::size_t output_dim() const noexcept { return static_cast<std::size_t>(matrix.cols()); }
};

enum class PcaMode { top, bottom };

/// Full eigendecomposition of the training covariance, from which top-k and
/// bottom-k projections can be sliced without refitting.
class PcaBasis {
 public:
  /// Fits on `x` (n >= 2). Covariance uses divisor n - 1.
  explicit PcaBasis(const FeatureMatrix& x);

  std::size_t dim() const noexcept { return static_cast<std::size_t>(mean_.size()); }
  /// Eigenvalues in decreasing order.
  const Eigen::VectorXd& eigenvalues() const noexcept { return eigenvalues_; }
  /// Columns are unit eigenvectors matching eigenvalues().
  const Eigen::MatrixXd& components() const noexcept { return components_; }
  const Eigen::VectorXd& mean() const noexcept { return mean_; }

  /// k leading components (top) or k trailing components in increasing
  /// variance order (bottom).
  Projection take(std::size_t k, PcaMode mode) const;

 private:
  Eigen::VectorXd mean_;
  Eigen::VectorXd eigenvalues_;
  Eigen::MatrixXd components_;
};

Projection pca_fit(const FeatureMatrix& train_features, std::size_t k, PcaMode mode);

/// d x k standard normal matrix with unit-norm columns.
Projection random_projection(std::size_t d, std::size_t k, std::uint64_t seed);

/// Returns (X - center) * matrix with labels and provenance carried over.
FeatureDataset apply_projection(const Projection& p, const FeatureDataset& ds);

}  // namespace drkit
