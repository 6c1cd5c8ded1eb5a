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

struct CkaScore {
  double value = 0.0;
  std::size_t n_samples = 0;
};

inline constexpr std::size_t kDefaultChunkRows = 1024;

/// Linear-kernel HSIC, (1/(n-1)^2) <HYY'H, HZZ'H>, evaluated as
/// ||Yc' Zc||_F^2 / (n-1)^2 in two passes over row chunks.
double hsic_linear(const FeatureMatrix& y, const FeatureMatrix& z,
                   std::size_t chunk_rows = kDefaultChunkRows);

/// Linear CKA. Throws DegenerateError when either input is constant across rows.
CkaScore cka_linear(const FeatureMatrix& y, const FeatureMatrix& z,
                    std::size_t chunk_rows = kDefaultChunkRows);

/// Centered cross-product matrix Xc' Xc of one representation. CKA between
/// any two column subsets reduces to sums of squared entries of this matrix,
/// so every part-vs-whole or part-vs-part score reuses one accumulation.
class CenteredGram {
 public:
  explicit CenteredGram(const FeatureMatrix& x, std::size_t chunk_rows = kDefaultChunkRows);

  std::size_t dim() const noexcept { return static_cast<std::size_t>(cross_.rows()); }
  std::size_t samples() const noexcept { return n_; }
  const Eigen::MatrixXd& cross() const noexcept { return cross_; }

  /// CKA(X[:, a], X[:, b]).
  CkaScore cka(const NeuronMask& a, const NeuronMask& b) const;
  /// CKA(X[:, mask], X).
  CkaScore cka_with_whole(const NeuronMask& mask) const;

 private:
  Eigen::MatrixXd cross_;
  std::size_t n_ = 0;
};

/// CKA between the masked neurons and the full layer.
CkaScore cka_part_whole(const FeatureDataset& ds, const NeuronMask& mask);

struct PairStats {
  double mean = 0.0;
  double std = 0.0;  // population
  std::size_t pairs = 0;
  std::vector<double> values;
};

/// Mean and std of CKA between independently drawn size-f masks.
PairStats cka_subset_pair(const FeatureDataset& ds, std::size_t f, std::size_t num_pairs,
                          std::uint64_t seed);
PairStats cka_subset_pair(const CenteredGram& gram, std::size_t f, std::size_t num_pairs,
                          std::uint64_t seed);

}  // namespace drkit
