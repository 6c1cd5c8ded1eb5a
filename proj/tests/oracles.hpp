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

// Independent reference computations used only by the test suites. Nothing
// here calls into the code paths it is used to check.

#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include <Eigen/Core>
#include <Eigen/QR>

#include "drkit/featurestore.hpp"

namespace drkit::testing {

/// HSIC by literally forming K = YY', L = ZZ', H = I - 11'/n and taking
/// <HKH, HLH> / (n-1)^2.
inline double gram_hsic(const Eigen::MatrixXd& y, const Eigen::MatrixXd& z) {
  const auto n = y.rows();
  const Eigen::MatrixXd h =
      Eigen::MatrixXd::Identity(n, n) - Eigen::MatrixXd::Constant(n, n, 1.0 / static_cast<double>(n));
  const Eigen::MatrixXd k = h * (y * y.transpose()) * h;
  const Eigen::MatrixXd l = h * (z * z.transpose()) * h;
  double dot = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) dot += k(i, j) * l(i, j);
  }
  const double denom = static_cast<double>(n - 1);
  return dot / (denom * denom);
}

inline double gram_cka(const Eigen::MatrixXd& y, const Eigen::MatrixXd& z) {
  return gram_hsic(y, z) / std::sqrt(gram_hsic(y, y) * gram_hsic(z, z));
}

/// Double-sum Gini: sum_ij |v_i - v_j| / (2 m^2 mean).
inline double pairwise_gini(const std::vector<double>& v) {
  const double m = static_cast<double>(v.size());
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= m;
  double total = 0.0;
  for (double a : v) {
    for (double b : v) total += std::abs(a - b);
  }
  return total / (2.0 * m * m * mean);
}

inline FeatureMatrix random_matrix(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng,
                                   double scale = 1.0) {
  std::normal_distribution<float> normal(0.0f, static_cast<float>(scale));
  FeatureMatrix m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = normal(rng);
  return m;
}

/// Haar-ish random orthogonal matrix from the QR factor of a Gaussian matrix.
inline Eigen::MatrixXd random_orthogonal(Eigen::Index d, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::MatrixXd g(d, d);
  for (Eigen::Index i = 0; i < g.size(); ++i) g.data()[i] = normal(rng);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
  return qr.householderQ();
}

/// Two Gaussian blobs centred at (-5, 0) and (+5, 0) with std 0.5.
inline FeatureDataset two_blobs(std::size_t per_class, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<float> noise(0.0f, 0.5f);
  FeatureMatrix x(static_cast<Eigen::Index>(2 * per_class), 2);
  Labels y(2 * per_class);
  for (std::size_t i = 0; i < 2 * per_class; ++i) {
    const std::uint32_t c = i < per_class ? 0 : 1;
    const auto r = static_cast<Eigen::Index>(i);
    x(r, 0) = (c == 0 ? -5.0f : 5.0f) + noise(rng);
    x(r, 1) = noise(rng);
    y[i] = c;
  }
  return FeatureDataset(std::move(x), std::move(y), 2);
}

/// XOR layout: blobs at (+-1, +-1), label 1 on the anti-diagonal.
inline FeatureDataset xor_blobs(std::size_t per_blob, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<float> noise(0.0f, 0.3f);
  const float cx[4] = {1.0f, -1.0f, 1.0f, -1.0f};
  const float cy[4] = {1.0f, -1.0f, -1.0f, 1.0f};
  FeatureMatrix x(static_cast<Eigen::Index>(4 * per_blob), 2);
  Labels y(4 * per_blob);
  for (std::size_t i = 0; i < 4 * per_blob; ++i) {
    const std::size_t blob = i % 4;
    const auto r = static_cast<Eigen::Index>(i);
    x(r, 0) = cx[blob] + noise(rng);
    x(r, 1) = cy[blob] + noise(rng);
    y[i] = blob < 2 ? 0 : 1;
  }
  return FeatureDataset(std::move(x), std::move(y), 2);
}

}  // namespace drkit::testing
