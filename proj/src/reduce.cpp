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

#include "drkit/reduce.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <Eigen/Eigenvalues>

#include "drkit/error.hpp"
#include "drkit/seed.hpp"

namespace drkit {
namespace {

// Flips each column so its largest-magnitude entry is positive.
void canonicalize_signs(Eigen::MatrixXd& m) {
  for (Eigen::Index c = 0; c < m.cols(); ++c) {
    Eigen::Index arg = 0;
    m.col(c).cwiseAbs().maxCoeff(&arg);
    if (m(arg, c) < 0.0) m.col(c) *= -1.0;
  }
}

}  // namespace

NeuronMask::NeuronMask(std::vector<bool> bits) : bits_(std::move(bits)) {
  for (std::size_t i = 0; i < bits_.size(); ++i) {
    if (bits_[i]) indices_.push_back(i);
  }
  if (indices_.empty()) throw RangeError("mask selects no neurons");
}

NeuronMask NeuronMask::full(std::size_t d) { return NeuronMask(std::vector<bool>(d, true)); }

NeuronMask NeuronMask::prefix(std::size_t d, std::size_t f) {
  if (f == 0 || f > d) throw RangeError("prefix size must lie in [1, d]");
  std::vector<bool> bits(d, false);
  std::fill_n(bits.begin(), f, true);
  return NeuronMask(std::move(bits));
}

NeuronMask NeuronMask::from_indices(std::size_t d, std::span<const std::size_t> indices) {
  std::vector<bool> bits(d, false);
  for (auto i : indices) {
    if (i >= d) throw RangeError("mask index " + std::to_string(i) + " out of range");
    bits[i] = true;
  }
  return NeuronMask(std::move(bits));
}

NeuronMask sample_mask(std::size_t d, std::size_t f, std::uint64_t seed) {
  if (f == 0 || f > d) {
    throw RangeError("mask size " + std::to_string(f) + " outside [1, " + std::to_string(d) + "]");
  }
  std::vector<std::size_t> perm(d);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  Rng rng(seed);
  for (std::size_t i = 0; i < f && i + 1 < d; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, d - 1);
    std::swap(perm[i], perm[pick(rng)]);
  }
  return NeuronMask::from_indices(d, std::span<const std::size_t>(perm.data(), f));
}

Eigen::MatrixXd select_columns(const FeatureMatrix& x, const NeuronMask& mask) {
  if (mask.size() != static_cast<std::size_t>(x.cols())) {
    throw ShapeError("mask length " + std::to_string(mask.size()) + " does not match d = " +
                     std::to_string(x.cols()));
  }
  const auto& idx = mask.indices();
  Eigen::MatrixXd out(x.rows(), static_cast<Eigen::Index>(idx.size()));
  for (std::size_t j = 0; j < idx.size(); ++j) {
    out.col(static_cast<Eigen::Index>(j)) =
        x.col(static_cast<Eigen::Index>(idx[j])).cast<double>();
  }
  return out;
}

std::string to_string(ProjectionKind kind) {
  switch (kind) {
    case ProjectionKind::pca_top:
      return "pca_top";
    case ProjectionKind::pca_bottom:
      return "pca_bottom";
    case ProjectionKind::random_gaussian:
      return "random_gaussian";
  }
  return "unknown";
}

PcaBasis::PcaBasis(const FeatureMatrix& x) {
  if (x.rows() < 2) throw DegenerateError("PCA needs at least 2 samples");
  const Eigen::MatrixXd xd = x.cast<double>();
  mean_ = xd.colwise().mean().transpose();
  const Eigen::MatrixXd centered = xd.rowwise() - mean_.transpose();
  Eigen::MatrixXd cov = (centered.transpose() * centered) / static_cast<double>(x.rows() - 1);

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
  if (solver.info() != Eigen::Success) throw DegenerateError("covariance eigendecomposition failed");
  // The solver returns ascending eigenvalues; store them descending.
  eigenvalues_ = solver.eigenvalues().reverse();
  components_ = solver.eigenvectors().rowwise().reverse();
  canonicalize_signs(components_);
}

Projection PcaBasis::take(std::size_t k, PcaMode mode) const {
  const auto d = dim();
  if (k == 0 || k > d) {
    throw RangeError("PCA rank " + std::to_string(k) + " outside [1, " + std::to_string(d) + "]");
  }
  const auto kk = static_cast<Eigen::Index>(k);
  Projection p;
  p.center = mean_;
  if (mode == PcaMode::top) {
    p.kind = ProjectionKind::pca_top;
    p.matrix = components_.leftCols(kk);
    p.variances = eigenvalues_.head(kk);
  } else {
    p.kind = ProjectionKind::pca_bottom;
    p.matrix = components_.rightCols(kk).rowwise().reverse();
    p.variances = eigenvalues_.tail(kk).reverse();
  }
  return p;
}

Projection pca_fit(const FeatureMatrix& train_features, std::size_t k, PcaMode mode) {
  if (k == 0 || k > static_cast<std::size_t>(train_features.cols())) {
    throw RangeError("PCA rank " + std::to_string(k) + " outside [1, d]");
  }
  return PcaBasis(train_features).take(k, mode);
}

Projection random_projection(std::size_t d, std::size_t k, std::uint64_t seed) {
  if (k == 0 || k > d) {
    throw RangeError("projection rank " + std::to_string(k) + " outside [1, " +
                     std::to_string(d) + "]");
  }
  Rng rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Projection p;
  p.kind = ProjectionKind::random_gaussian;
  p.seed = seed;
  p.center = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(d));
  p.matrix.resize(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(k));
  for (Eigen::Index c = 0; c < p.matrix.cols(); ++c) {
    double norm = 0.0;
    do {
      for (Eigen::Index r = 0; r < p.matrix.rows(); ++r) p.matrix(r, c) = normal(rng);
      norm = p.matrix.col(c).norm();
    } while (norm == 0.0);
    p.matrix.col(c) /= norm;
  }
  return p;
}

FeatureDataset apply_projection(const Projection& p, const FeatureDataset& ds) {
  if (p.input_dim() != ds.dim()) {
    throw ShapeError("projection expects d = " + std::to_string(p.input_dim()) + ", dataset has " +
                     std::to_string(ds.dim()));
  }
  if (static_cast<std::size_t>(p.center.size()) != ds.dim()) {
    throw ShapeError("projection center length does not match d");
  }
  const Eigen::MatrixXd centered = ds.features().cast<double>().rowwise() - p.center.transpose();
  FeatureMatrix projected = (centered * p.matrix).cast<float>();
  return FeatureDataset(std::move(projected), ds.labels(), ds.num_classes(), ds.meta());
}

}  // namespace drkit
