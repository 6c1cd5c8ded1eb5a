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

#include "drkit/probe.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>
#include <string>

#include "drkit/error.hpp"
#include "drkit/seed.hpp"

namespace drkit {
namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

RowMatrix prepared_inputs(const TrainedProbe& probe, const FeatureDataset& ds) {
  RowMatrix x = select_columns(ds.features(), probe.mask);
  if (probe.feature_mean.size() > 0) {
    x.rowwise() -= probe.feature_mean;
    x.array().rowwise() /= probe.feature_scale.array();
  }
  return x;
}

// Row-wise softmax in place; returns the summed cross-entropy of `labels`.
double softmax_xent(RowMatrix& logits, const Labels& labels, std::span<const std::size_t> rows) {
  double loss = 0.0;
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    auto row = logits.row(i);
    const double peak = row.maxCoeff();
    row.array() = (row.array() - peak).exp();
    const double total = row.sum();
    const auto y = static_cast<Eigen::Index>(labels[rows[static_cast<std::size_t>(i)]]);
    loss += std::log(total) - std::log(row(y));
    row /= total;
  }
  return loss;
}

}  // namespace

void ProbeConfig::validate() const {
  if (!(lr > 0.0) || !std::isfinite(lr)) throw ValidationError("probe lr must be > 0");
  if (!(momentum >= 0.0 && momentum < 1.0)) {
    throw ValidationError("probe momentum must lie in [0, 1)");
  }
  if (batch_size < 1) throw ValidationError("probe batch_size must be >= 1");
  if (epochs < 1) throw ValidationError("probe epochs must be >= 1");
  if (!(weight_decay >= 0.0) || !std::isfinite(weight_decay)) {
    throw ValidationError("probe weight_decay must be >= 0");
  }
  if (!(lr_decay_factor > 0.0) || !std::isfinite(lr_decay_factor)) {
    throw ValidationError("probe lr_decay_factor must be > 0");
  }
  if (lr_decay_every < 1) throw ValidationError("probe lr_decay_every must be >= 1");
}

double ProbeConfig::lr_at(std::size_t epoch) const {
  return lr * std::pow(lr_decay_factor, static_cast<double>(epoch / lr_decay_every));
}

TrainedProbe train_probe(const FeatureDataset& train, const NeuronMask& mask,
                         const ProbeConfig& cfg) {
  cfg.validate();
  if (mask.size() != train.dim()) {
    throw ShapeError("mask length " + std::to_string(mask.size()) + " does not match d = " +
                     std::to_string(train.dim()));
  }

  TrainedProbe probe{Eigen::MatrixXd::Zero(train.num_classes(),
                                           static_cast<Eigen::Index>(mask.count())),
                     Eigen::VectorXd::Zero(train.num_classes()),
                     mask,
                     0.0,
                     cfg,
                     {},
                     {}};

  RowMatrix x = select_columns(train.features(), mask);
  if (cfg.standardize) {
    probe.feature_mean = x.colwise().mean();
    x.rowwise() -= probe.feature_mean;
    probe.feature_scale =
        (x.array().square().colwise().sum() / static_cast<double>(x.rows())).sqrt().matrix();
    for (Eigen::Index j = 0; j < probe.feature_scale.size(); ++j) {
      if (!(probe.feature_scale(j) > 0.0)) probe.feature_scale(j) = 1.0;
    }
    x.array().rowwise() /= probe.feature_scale.array();
  }

  const std::size_t n = train.rows();
  const auto f = x.cols();
  const auto classes = static_cast<Eigen::Index>(train.num_classes());
  Eigen::MatrixXd& w = probe.weights;
  Eigen::VectorXd& b = probe.bias;
  Eigen::MatrixXd w_velocity = Eigen::MatrixXd::Zero(classes, f);
  Eigen::VectorXd b_velocity = Eigen::VectorXd::Zero(classes);

  std::vector<std::size_t> order(n);
  RowMatrix batch(static_cast<Eigen::Index>(std::min(cfg.batch_size, n)), f);
  RowMatrix logits;
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng rng(derive_seed(cfg.seed, "shuffle", {epoch}));
    std::shuffle(order.begin(), order.end(), rng);
    const double lr = cfg.lr_at(epoch);

    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < n; start += cfg.batch_size) {
      const std::size_t rows = std::min(cfg.batch_size, n - start);
      const std::span<const std::size_t> ids(order.data() + start, rows);
      const auto m = static_cast<Eigen::Index>(rows);
      if (batch.rows() != m) batch.resize(m, f);
      for (Eigen::Index i = 0; i < m; ++i) {
        batch.row(i) = x.row(static_cast<Eigen::Index>(ids[static_cast<std::size_t>(i)]));
      }
      logits.noalias() = batch * w.transpose();
      logits.rowwise() += b.transpose();
      epoch_loss += softmax_xent(logits, train.labels(), ids);

      // logits now holds softmax probabilities; turn them into dLoss/dlogits.
      for (Eigen::Index i = 0; i < m; ++i) {
        logits(i, static_cast<Eigen::Index>(train.labels()[ids[static_cast<std::size_t>(i)]])) -=
            1.0;
      }
      logits /= static_cast<double>(rows);

      w_velocity *= cfg.momentum;
      w_velocity.noalias() += logits.transpose() * batch;
      w_velocity += cfg.weight_decay * w;
      b_velocity = cfg.momentum * b_velocity + logits.colwise().sum().transpose();
      w -= lr * w_velocity;
      b -= lr * b_velocity;
    }
    if (!std::isfinite(epoch_loss) || !w.allFinite() || !b.allFinite()) {
      throw DivergenceError("probe training diverged in epoch " + std::to_string(epoch));
    }
  }

  // Final loss over the (possibly standardised) training inputs.
  logits.noalias() = x * w.transpose();
  logits.rowwise() += b.transpose();
  std::vector<std::size_t> all(n);
  std::iota(all.begin(), all.end(), std::size_t{0});
  probe.final_train_loss = softmax_xent(logits, train.labels(), all) / static_cast<double>(n);
  if (!std::isfinite(probe.final_train_loss)) {
    throw DivergenceError("probe training produced a non-finite final loss");
  }
  return probe;
}

EvalResult eval_probe(const TrainedProbe& probe, const FeatureDataset& test) {
  if (probe.mask.size() != test.dim()) {
    throw ShapeError("probe expects d = " + std::to_string(probe.mask.size()) +
                     ", test set has d = " + std::to_string(test.dim()));
  }
  if (probe.num_classes() != test.num_classes()) {
    throw ShapeError("probe has " + std::to_string(probe.num_classes()) +
                     " classes, test set has " + std::to_string(test.num_classes()));
  }
  const RowMatrix x = prepared_inputs(probe, test);
  RowMatrix logits = x * probe.weights.transpose();
  logits.rowwise() += probe.bias.transpose();

  const std::size_t classes = probe.num_classes();
  EvalResult r;
  r.samples = test.rows();
  r.confusion.assign(classes, std::vector<std::size_t>(classes, 0));
  r.class_counts.assign(classes, 0);
  std::size_t correct = 0;
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    std::size_t best = 0;
    for (std::size_t c = 1; c < classes; ++c) {
      if (logits(i, static_cast<Eigen::Index>(c)) > logits(i, static_cast<Eigen::Index>(best))) {
        best = c;
      }
    }
    const auto y = test.labels()[static_cast<std::size_t>(i)];
    ++r.confusion[y][best];
    ++r.class_counts[y];
    if (best == y) ++correct;
  }
  r.overall_accuracy = static_cast<double>(correct) / static_cast<double>(r.samples);
  r.per_class_accuracy.resize(classes);
  for (std::size_t c = 0; c < classes; ++c) {
    r.per_class_accuracy[c] =
        r.class_counts[c] == 0
            ? std::nan("")
            : static_cast<double>(r.confusion[c][c]) / static_cast<double>(r.class_counts[c]);
  }
  return r;
}

double probe_loss(const TrainedProbe& probe, const FeatureDataset& ds) {
  if (probe.mask.size() != ds.dim() || probe.num_classes() != ds.num_classes()) {
    throw ShapeError("probe does not match dataset shape");
  }
  const RowMatrix x = prepared_inputs(probe, ds);
  RowMatrix logits = x * probe.weights.transpose();
  logits.rowwise() += probe.bias.transpose();
  std::vector<std::size_t> all(ds.rows());
  std::iota(all.begin(), all.end(), std::size_t{0});
  return softmax_xent(logits, ds.labels(), all) / static_cast<double>(ds.rows());
}

}  // namespace drkit
