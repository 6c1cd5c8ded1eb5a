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

#include "drkit/redundancy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "cells.hpp"
#include "drkit/error.hpp"
#include "drkit/seed.hpp"
#include "drkit/similarity.hpp"
#include "parallel.hpp"

namespace drkit {
namespace detail {

std::uint64_t cell_seed(std::uint64_t base, std::string_view role, std::size_t point,
                        std::size_t seed_index) {
  return derive_seed(base, role, {point, seed_index});
}

NeuronMask cell_mask(std::size_t d, const GridPoint& point, std::uint64_t base,
                     std::size_t seed_index) {
  return sample_mask(d, point.count, cell_seed(base, "mask", point.index, seed_index));
}

EvalResult full_layer_eval(const FeatureDataset& train, const FeatureDataset& test,
                           const ProbeConfig& cfg) {
  return eval_probe(train_probe(train, NeuronMask::full(train.dim()), cfg), test);
}

std::vector<std::vector<EvalResult>> mask_probe_cells(const FeatureDataset& train,
                                                      const FeatureDataset& test,
                                                      const std::vector<GridPoint>& points,
                                                      const CurveOptions& opts,
                                                      const EvalResult& full) {
  const std::size_t d = train.dim();
  const std::uint64_t base = opts.probe.seed;
  std::vector<std::vector<EvalResult>> out(points.size(),
                                           std::vector<EvalResult>(opts.num_seeds));
  parallel_for(points.size() * opts.num_seeds, opts.jobs, [&](std::size_t cell) {
    const auto& point = points[cell / opts.num_seeds];
    const std::size_t s = cell % opts.num_seeds;
    if (point.count == d) {
      out[point.index][s] = full;
      return;
    }
    ProbeConfig cfg = opts.probe;
    cfg.seed = cell_seed(base, "probe", point.index, s);
    const auto mask = cell_mask(d, point, base, s);
    out[point.index][s] = eval_probe(train_probe(train, mask, cfg), test);
  });
  return out;
}

void check_split_pair(const FeatureDataset& train, const FeatureDataset& test) {
  if (train.dim() != test.dim()) {
    throw ShapeError("train has d = " + std::to_string(train.dim()) + ", test has d = " +
                     std::to_string(test.dim()));
  }
  if (train.num_classes() != test.num_classes()) {
    throw ShapeError("train and test disagree on num_classes");
  }
}

MeanStd finite_mean_std(const std::vector<double>& values) {
  double sum = 0.0;
  std::size_t n = 0;
  for (double v : values) {
    if (std::isfinite(v)) {
      sum += v;
      ++n;
    }
  }
  if (n == 0) return {std::nan(""), std::nan("")};
  const double mean = sum / static_cast<double>(n);
  double var = 0.0;
  for (double v : values) {
    if (std::isfinite(v)) var += (v - mean) * (v - mean);
  }
  return {mean, std::sqrt(var / static_cast<double>(n))};
}

}  // namespace detail

std::string to_string(Task task) { return task == Task::cka ? "cka" : "probe"; }

Task task_from_string(const std::string& text) {
  if (text == "probe" || text == "probe_accuracy") return Task::probe_accuracy;
  if (text == "cka") return Task::cka;
  throw ValidationError("unknown task '" + text + "'");
}

FractionGrid::FractionGrid(std::vector<double> fractions) : fractions_(std::move(fractions)) {
  if (fractions_.empty()) throw ValidationError("fraction grid is empty");
  for (std::size_t i = 0; i < fractions_.size(); ++i) {
    const double f = fractions_[i];
    if (!(f > 0.0 && f <= 1.0)) {
      throw ValidationError("grid fraction " + std::to_string(f) + " outside (0, 1]");
    }
    if (i > 0 && !(f > fractions_[i - 1])) {
      throw ValidationError("grid fractions must be strictly increasing");
    }
  }
  if (fractions_.back() != 1.0) throw ValidationError("fraction grid must include 1.0");
}

FractionGrid FractionGrid::defaults() {
  return FractionGrid({0.01, 0.02, 0.05, 0.1, 0.2, 0.3, 0.5, 0.7, 0.8, 0.9, 0.95, 1.0});
}

std::size_t FractionGrid::count_for(double fraction, std::size_t d) {
  const auto rounded = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(d)));
  return std::clamp<std::size_t>(rounded, 1, d);
}

std::vector<GridPoint> FractionGrid::points(std::size_t d) const {
  if (d < 1) throw ValidationError("grid needs d >= 1");
  std::vector<GridPoint> out;
  for (double f : fractions_) {
    const std::size_t count = count_for(f, d);
    if (!out.empty() && out.back().count == count) continue;
    out.push_back(GridPoint{out.size(), f, count});
  }
  return out;
}

void CurveOptions::validate() const {
  if (num_seeds < 1) throw ValidationError("num_seeds must be >= 1");
  probe.validate();
}

std::size_t CurvePoint::failed_cells() const {
  return static_cast<std::size_t>(
      std::count_if(failures.begin(), failures.end(), [](const auto& s) { return !s.empty(); }));
}

RatioCurve ratio_curve(const FeatureDataset& train, const FeatureDataset& test, Task task,
                       const CurveOptions& opts) {
  opts.validate();
  detail::check_split_pair(train, test);
  const std::size_t d = test.dim();
  const auto points = opts.grid.points(d);

  RatioCurve curve;
  curve.task = task;
  curve.dim = d;
  curve.num_seeds = opts.num_seeds;
  curve.grid = opts.grid;
  curve.points.resize(points.size());
  for (const auto& p : points) {
    auto& cp = curve.points[p.index];
    cp.fraction = p.fraction;
    cp.neuron_count = p.count;
    cp.raw_ratios.assign(opts.num_seeds, std::nan(""));
    cp.raw_absolute.assign(opts.num_seeds, std::nan(""));
    cp.failures.assign(opts.num_seeds, "");
  }

  if (task == Task::probe_accuracy) {
    const auto full = detail::full_layer_eval(train, test, opts.probe);
    curve.full_layer_value = full.overall_accuracy;
    if (!(curve.full_layer_value > 0.0)) {
      throw DegenerateError("full-layer probe accuracy is zero; ratios are undefined");
    }
    const auto cells = detail::mask_probe_cells(train, test, points, opts, full);
    for (const auto& p : points) {
      auto& cp = curve.points[p.index];
      for (std::size_t s = 0; s < opts.num_seeds; ++s) {
        const double acc = cells[p.index][s].overall_accuracy;
        cp.raw_absolute[s] = acc;
        cp.raw_ratios[s] = p.count == d ? 1.0 : acc / curve.full_layer_value;
      }
    }
  } else {
    curve.full_layer_value = 1.0;
    const CenteredGram gram(test.features());
    detail::parallel_for(points.size() * opts.num_seeds, opts.jobs, [&](std::size_t cell) {
      const auto& p = points[cell / opts.num_seeds];
      const std::size_t s = cell % opts.num_seeds;
      auto& cp = curve.points[p.index];
      try {
        const double v = gram.cka_with_whole(detail::cell_mask(d, p, opts.probe.seed, s)).value;
        cp.raw_absolute[s] = v;
        cp.raw_ratios[s] = v;
      } catch (const DegenerateError& e) {
        cp.failures[s] = e.what();
      }
    });
  }

  for (auto& cp : curve.points) {
    const auto stats = detail::finite_mean_std(cp.raw_ratios);
    cp.mean_ratio = stats.mean;
    cp.std_ratio = stats.std;
  }
  return curve;
}

DrEstimate dr_from_curve(const RatioCurve& curve, double delta) {
  if (!(delta > 0.0 && delta <= 1.0)) {
    throw RangeError("delta must lie in (0, 1], got " + std::to_string(delta));
  }
  if (curve.points.empty() || curve.dim == 0) throw ValidationError("empty ratio curve");
  DrEstimate est;
  est.task = curve.task;
  est.delta = delta;
  est.grid = curve.grid;
  const CurvePoint* hit = nullptr;
  for (const auto& p : curve.points) {
    if (std::isfinite(p.mean_ratio) && p.mean_ratio >= delta) {
      hit = &p;
      break;
    }
  }
  if (hit == nullptr) hit = &curve.points.back();
  est.achieving_fraction = hit->fraction;
  est.achieving_count = hit->neuron_count;
  est.dr_value =
      1.0 - static_cast<double>(hit->neuron_count) / static_cast<double>(curve.dim);
  return est;
}

const ReductionCurve& ComparisonReport::curve(const std::string& kind) const {
  for (const auto& c : curves) {
    if (c.kind == kind) return c;
  }
  throw ValidationError("no reduction curve named '" + kind + "'");
}

ComparisonReport compare_reductions(const FeatureDataset& train, const FeatureDataset& test,
                                    const CurveOptions& opts) {
  opts.validate();
  detail::check_split_pair(train, test);
  const std::size_t d = train.dim();
  const auto points = opts.grid.points(d);
  const std::uint64_t base = opts.probe.seed;

  ComparisonReport report;
  report.dim = d;
  report.num_seeds = opts.num_seeds;
  report.grid = opts.grid;

  const auto full = detail::full_layer_eval(train, test, opts.probe);
  report.full_layer_accuracy = full.overall_accuracy;
  const auto mask_cells = detail::mask_probe_cells(train, test, points, opts, full);

  const PcaBasis pca(train.features());
  std::vector<double> pca_top(points.size());
  std::vector<double> pca_bottom(points.size());
  std::vector<std::vector<double>> gaussian(points.size(), std::vector<double>(opts.num_seeds));

  auto probe_on = [&](const Projection& proj, const ProbeConfig& cfg) {
    const auto ptrain = apply_projection(proj, train);
    const auto ptest = apply_projection(proj, test);
    return eval_probe(train_probe(ptrain, NeuronMask::full(proj.output_dim()), cfg), ptest)
        .overall_accuracy;
  };

  // Per grid point: one top-PCA cell, one bottom-PCA cell, num_seeds Gaussian cells.
  const std::size_t per_point = 2 + opts.num_seeds;
  detail::parallel_for(points.size() * per_point, opts.jobs, [&](std::size_t cell) {
    const auto& p = points[cell / per_point];
    const std::size_t slot = cell % per_point;
    if (slot == 0) {
      pca_top[p.index] = probe_on(pca.take(p.count, PcaMode::top), opts.probe);
    } else if (slot == 1) {
      pca_bottom[p.index] = probe_on(pca.take(p.count, PcaMode::bottom), opts.probe);
    } else {
      const std::size_t s = slot - 2;
      ProbeConfig cfg = opts.probe;
      cfg.seed = detail::cell_seed(base, "projection_probe", p.index, s);
      const auto proj =
          random_projection(d, p.count, detail::cell_seed(base, "projection", p.index, s));
      gaussian[p.index][s] = probe_on(proj, cfg);
    }
  });

  auto make_point = [](const GridPoint& p, std::vector<double> raw) {
    const auto stats = detail::finite_mean_std(raw);
    return ReductionPoint{p.fraction, p.count, stats.mean, stats.std, std::move(raw)};
  };
  ReductionCurve masks{"mask", {}};
  ReductionCurve top{"pca_top", {}};
  ReductionCurve bottom{"pca_bottom", {}};
  ReductionCurve rand{"random_gaussian", {}};
  for (const auto& p : points) {
    std::vector<double> accs;
    for (const auto& r : mask_cells[p.index]) accs.push_back(r.overall_accuracy);
    masks.points.push_back(make_point(p, std::move(accs)));
    top.points.push_back(make_point(p, {pca_top[p.index]}));
    bottom.points.push_back(make_point(p, {pca_bottom[p.index]}));
    rand.points.push_back(make_point(p, gaussian[p.index]));
  }
  report.curves = {std::move(masks), std::move(top), std::move(bottom), std::move(rand)};
  return report;
}

}  // namespace drkit
