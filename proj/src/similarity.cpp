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

#include "drkit/similarity.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "drkit/error.hpp"
#include "drkit/seed.hpp"

namespace drkit {
namespace {

struct ColumnMoments {
  Eigen::RowVectorXd mean;
  std::vector<bool> constant;
};

// First pass: column means, and which columns never change value.
ColumnMoments column_moments(const FeatureMatrix& x, std::size_t chunk_rows) {
  const Eigen::Index n = x.rows();
  ColumnMoments m;
  m.mean = Eigen::RowVectorXd::Zero(x.cols());
  m.constant.assign(static_cast<std::size_t>(x.cols()), true);
  const auto step = static_cast<Eigen::Index>(std::max<std::size_t>(chunk_rows, 1));
  for (Eigen::Index start = 0; start < n; start += step) {
    const Eigen::Index rows = std::min(step, n - start);
    const auto block = x.middleRows(start, rows);
    m.mean += block.cast<double>().colwise().sum();
    for (Eigen::Index c = 0; c < x.cols(); ++c) {
      if (!m.constant[static_cast<std::size_t>(c)]) continue;
      const float first = x(0, c);
      for (Eigen::Index r = 0; r < rows; ++r) {
        if (block(r, c) != first) {
          m.constant[static_cast<std::size_t>(c)] = false;
          break;
        }
      }
    }
  }
  m.mean /= static_cast<double>(n);
  return m;
}

Eigen::MatrixXd centered_chunk(const FeatureMatrix& x, Eigen::Index start, Eigen::Index rows,
                               const ColumnMoments& m) {
  Eigen::MatrixXd c = x.middleRows(start, rows).cast<double>();
  c.rowwise() -= m.mean;
  for (Eigen::Index j = 0; j < c.cols(); ++j) {
    if (m.constant[static_cast<std::size_t>(j)]) c.col(j).setZero();
  }
  return c;
}

// Second pass: Yc' Zc accumulated chunk by chunk in a fixed order.
Eigen::MatrixXd centered_cross(const FeatureMatrix& y, const ColumnMoments& my,
                               const FeatureMatrix& z, const ColumnMoments& mz,
                               std::size_t chunk_rows) {
  const Eigen::Index n = y.rows();
  Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(y.cols(), z.cols());
  const auto step = static_cast<Eigen::Index>(std::max<std::size_t>(chunk_rows, 1));
  for (Eigen::Index start = 0; start < n; start += step) {
    const Eigen::Index rows = std::min(step, n - start);
    const Eigen::MatrixXd yc = centered_chunk(y, start, rows, my);
    const Eigen::MatrixXd zc = centered_chunk(z, start, rows, mz);
    acc.noalias() += yc.transpose() * zc;
  }
  return acc;
}

void check_pair(const FeatureMatrix& y, const FeatureMatrix& z) {
  if (y.rows() != z.rows()) {
    throw ShapeError("row counts differ: " + std::to_string(y.rows()) + " vs " +
                     std::to_string(z.rows()));
  }
  if (y.rows() < 2) throw DegenerateError("HSIC needs at least 2 samples");
  if (y.cols() < 1 || z.cols() < 1) throw ShapeError("representations need >= 1 column");
}

double normalized(double cross, double self_y, double self_z) {
  if (!(self_y > 0.0) || !(self_z > 0.0)) {
    throw DegenerateError("CKA undefined for a representation that is constant across samples");
  }
  return cross / (std::sqrt(self_y) * std::sqrt(self_z));
}

double sum_squares(const Eigen::MatrixXd& m, const std::vector<std::size_t>& rows,
                   const std::vector<std::size_t>& cols) {
  double total = 0.0;
  for (auto r : rows) {
    for (auto c : cols) {
      const double v = m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
      total += v * v;
    }
  }
  return total;
}

}  // namespace

double hsic_linear(const FeatureMatrix& y, const FeatureMatrix& z, std::size_t chunk_rows) {
  check_pair(y, z);
  const auto my = column_moments(y, chunk_rows);
  const auto mz = column_moments(z, chunk_rows);
  const double denom = static_cast<double>(y.rows() - 1);
  return centered_cross(y, my, z, mz, chunk_rows).squaredNorm() / (denom * denom);
}

CkaScore cka_linear(const FeatureMatrix& y, const FeatureMatrix& z, std::size_t chunk_rows) {
  check_pair(y, z);
  const auto my = column_moments(y, chunk_rows);
  const auto mz = column_moments(z, chunk_rows);
  // The (n-1)^2 factors cancel in the ratio.
  const double yz = centered_cross(y, my, z, mz, chunk_rows).squaredNorm();
  const double yy = centered_cross(y, my, y, my, chunk_rows).squaredNorm();
  const double zz = centered_cross(z, mz, z, mz, chunk_rows).squaredNorm();
  const auto n = static_cast<std::size_t>(y.rows());
  return CkaScore{normalized(yz, yy, zz), n};
}

CenteredGram::CenteredGram(const FeatureMatrix& x, std::size_t chunk_rows)
    : n_(static_cast<std::size_t>(x.rows())) {
  if (x.rows() < 2) throw DegenerateError("CKA needs at least 2 samples");
  const auto m = column_moments(x, chunk_rows);
  cross_ = centered_cross(x, m, x, m, chunk_rows);
}

CkaScore CenteredGram::cka(const NeuronMask& a, const NeuronMask& b) const {
  if (a.size() != dim() || b.size() != dim()) {
    throw ShapeError("mask length does not match representation width " + std::to_string(dim()));
  }
  const double ab = sum_squares(cross_, a.indices(), b.indices());
  const double aa = sum_squares(cross_, a.indices(), a.indices());
  const double bb = a == b ? aa : sum_squares(cross_, b.indices(), b.indices());
  if (a == b && aa > 0.0) return CkaScore{1.0, n_};
  return CkaScore{normalized(ab, aa, bb), n_};
}

CkaScore CenteredGram::cka_with_whole(const NeuronMask& mask) const {
  if (mask.size() != dim()) {
    throw ShapeError("mask length does not match representation width " + std::to_string(dim()));
  }
  const double whole = cross_.squaredNorm();
  if (mask.all()) {
    if (!(whole > 0.0)) return CkaScore{normalized(0.0, 0.0, 0.0), n_};
    return CkaScore{1.0, n_};
  }
  double part_whole = 0.0;
  for (auto r : mask.indices()) part_whole += cross_.row(static_cast<Eigen::Index>(r)).squaredNorm();
  const double part = sum_squares(cross_, mask.indices(), mask.indices());
  return CkaScore{normalized(part_whole, part, whole), n_};
}

CkaScore cka_part_whole(const FeatureDataset& ds, const NeuronMask& mask) {
  if (mask.size() != ds.dim()) {
    throw ShapeError("mask length " + std::to_string(mask.size()) + " does not match d = " +
                     std::to_string(ds.dim()));
  }
  return CenteredGram(ds.features()).cka_with_whole(mask);
}

PairStats cka_subset_pair(const CenteredGram& gram, std::size_t f, std::size_t num_pairs,
                          std::uint64_t seed) {
  if (num_pairs < 1) throw RangeError("num_pairs must be >= 1");
  std::vector<double> values;
  values.reserve(num_pairs);
  for (std::size_t i = 0; i < num_pairs; ++i) {
    const auto a = sample_mask(gram.dim(), f, derive_seed(seed, "pair", {i, 0}));
    const auto b = sample_mask(gram.dim(), f, derive_seed(seed, "pair", {i, 1}));
    values.push_back(gram.cka(a, b).value);
  }
  PairStats stats;
  stats.pairs = num_pairs;
  for (double v : values) stats.mean += v;
  stats.mean /= static_cast<double>(num_pairs);
  double var = 0.0;
  for (double v : values) var += (v - stats.mean) * (v - stats.mean);
  stats.std = std::sqrt(var / static_cast<double>(num_pairs));
  stats.values = std::move(values);
  return stats;
}

PairStats cka_subset_pair(const FeatureDataset& ds, std::size_t f, std::size_t num_pairs,
                          std::uint64_t seed) {
  if (f < 1 || f > ds.dim()) {
    throw RangeError("subset size " + std::to_string(f) + " outside [1, " +
                     std::to_string(ds.dim()) + "]");
  }
  return cka_subset_pair(CenteredGram(ds.features()), f, num_pairs, seed);
}

}  // namespace drkit
