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
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace drkit {

/// Row-major n x d activations, one row per sample.
using FeatureMatrix = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Labels = std::vector<std::uint32_t>;

enum class Split { train, test };

std::string to_string(Split split);
Split split_from_string(const std::string& text);

/// Provenance of a feature dump. Every field may be empty when no sidecar exists.
struct Manifest {
  std::string model_name;
  std::string layer_name;
  std::string dataset_name;
  std::optional<Split> split;
  std::optional<std::int64_t> extraction_seed;

  bool empty() const;
  bool operator==(const Manifest&) const = default;
};

/// Immutable feature matrix with class labels. The constructor enforces
/// n >= 1, d >= 1, labels < num_classes and finite features.
class FeatureDataset {
 public:
  FeatureDataset(FeatureMatrix features, Labels labels, std::uint32_t num_classes,
                 Manifest meta = {});

  const FeatureMatrix& features() const noexcept { return features_; }
  const Labels& labels() const noexcept { return labels_; }
  std::uint32_t num_classes() const noexcept { return num_classes_; }
  const Manifest& meta() const noexcept { return meta_; }

  std::size_t rows() const noexcept { return static_cast<std::size_t>(features_.rows()); }
  std::size_t dim() const noexcept { return static_cast<std::size_t>(features_.cols()); }

  /// Number of samples of each class, length num_classes.
  std::vector<std::size_t> class_counts() const;

  /// First `n` rows (all rows if n >= rows()).
  FeatureDataset head(std::size_t n) const;

  bool operator==(const FeatureDataset& other) const;

 private:
  FeatureMatrix features_;
  Labels labels_;
  std::uint32_t num_classes_;
  Manifest meta_;
};

inline constexpr std::size_t kFvecHeaderBytes = 24;

/// Path of the JSON provenance sidecar that accompanies `path`.
std::filesystem::path manifest_path(const std::filesystem::path& path);

/// Writes the FVEC binary and, when the manifest is non-empty, its sidecar.
void write_fvec(const FeatureDataset& ds, const std::filesystem::path& path);

/// Reads an FVEC file plus its optional sidecar.
/// Throws FormatError, LengthError, DataError or ValidationError on bad input.
FeatureDataset read_fvec(const std::filesystem::path& path);

/// Builds a dataset from a comma-separated feature file and a one-label-per-line file.
FeatureDataset ingest_csv(const std::filesystem::path& features_path,
                          const std::filesystem::path& labels_path, std::uint32_t num_classes,
                          Manifest meta = {});

}  // namespace drkit
