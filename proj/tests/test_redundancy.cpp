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
#include <random>

#include <doctest.h>

#include "drkit/error.hpp"
#include "drkit/redundancy.hpp"
#include "drkit/synthgen.hpp"

using namespace drkit;

namespace {

SynthSplits small_synth(SynthMode mode, std::size_t width = 32, std::uint64_t seed = 11) {
  SynthConfig cfg;
  cfg.mode = mode;
  cfg.width = width;
  cfg.n_train = 600;
  cfg.n_test = 300;
  cfg.informative_prefix = 4;
  return gen_synthetic(cfg, seed);
}

CurveOptions fast_options(std::vector<double> grid, std::size_t seeds = 3) {
  CurveOptions opts;
  opts.grid = FractionGrid(std::move(grid));
  opts.num_seeds = seeds;
  opts.probe.epochs = 10;
  opts.probe.seed = 5;
  return opts;
}

bool same_bits(double a, double b) {
  return (std::isnan(a) && std::isnan(b)) || a == b;
}

void check_identical(const RatioCurve& a, const RatioCurve& b) {
  REQUIRE(a.points.size() == b.points.size());
  CHECK(a.full_layer_value == b.full_layer_value);
  for (std::size_t i = 0; i < a.points.size(); ++i) {
    const auto& p = a.points[i];
    const auto& q = b.points[i];
    CHECK(p.neuron_count == q.neuron_count);
    CHECK(same_bits(p.mean_ratio, q.mean_ratio));
    CHECK(same_bits(p.std_ratio, q.std_ratio));
    for (std::size_t s = 0; s < p.raw_ratios.size(); ++s) {
      CHECK(same_bits(p.raw_ratios[s], q.raw_ratios[s]));
      CHECK(same_bits(p.raw_absolute[s], q.raw_absolute[s]));
    }
  }
}

RatioCurve random_curve(std::mt19937_64& rng, std::size_t d) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const auto defaults = FractionGrid::defaults();
  std::vector<double> fr;
  for (double f : defaults.fractions()) {
    if (f == 1.0 || u(rng) < 0.7) fr.push_back(f);
  }
  RatioCurve c;
  c.dim = d;
  c.grid = FractionGrid(fr);
  for (const auto& gp : c.grid.points(d)) {
    CurvePoint p;
    p.fraction = gp.fraction;
    p.neuron_count = gp.count;
    p.mean_ratio = gp.fraction == 1.0 ? 1.0 : u(rng);
    c.points.push_back(p);
  }
  return c;
}

}  // namespace

TEST_CASE("fraction grid validation") {
  CHECK_THROWS_AS(FractionGrid({}), ValidationError);
  CHECK_THROWS_AS(FractionGrid({0.5}), ValidationError);
  CHECK_THROWS_AS(FractionGrid({0.0, 1.0}), ValidationError);
  CHECK_THROWS_AS(FractionGrid({0.5, 1.2}), ValidationError);
  CHECK_THROWS_AS(FractionGrid({0.5, 0.3, 1.0}), ValidationError);
  CHECK_THROWS_AS(FractionGrid({0.5, 0.5, 1.0}), ValidationError);
  CHECK_NOTHROW(FractionGrid({1.0}));
  CHECK(FractionGrid::defaults().fractions().size() == 12);
}

TEST_CASE("grid counts round to nearest with floor one and deduplicate") {
  CHECK(FractionGrid::count_for(0.01, 256) == 3);
  CHECK(FractionGrid::count_for(0.01, 10) == 1);
  CHECK(FractionGrid::count_for(0.2, 256) == 51);
  CHECK(FractionGrid::count_for(1.0, 7) == 7);
  const auto pts = FractionGrid::defaults().points(10);
  // 0.01, 0.02, 0.05 and 0.1 all map to one neuron; 0.9 and 0.95 both to 9.
  std::vector<std::size_t> counts;
  for (const auto& p : pts) counts.push_back(p.count);
  CHECK(counts == std::vector<std::size_t>{1, 2, 3, 5, 7, 8, 9, 10});
  CHECK(pts.front().fraction == 0.01);
  CHECK(pts[6].fraction == 0.9);
  for (std::size_t i = 0; i < pts.size(); ++i) CHECK(pts[i].index == i);
}

TEST_CASE("ratio at fraction one is exactly one for both tasks") {
  const auto s = small_synth(SynthMode::diffused);
  for (Task task : {Task::probe_accuracy, Task::cka}) {
    const auto curve = ratio_curve(s.train, s.test, task, fast_options({0.25, 1.0}));
    REQUIRE(curve.points.size() == 2);
    const auto& last = curve.points.back();
    CHECK(last.neuron_count == 32);
    CHECK(last.mean_ratio == 1.0);
    CHECK(last.std_ratio == 0.0);
    for (double r : last.raw_ratios) CHECK(r == 1.0);
    for (std::size_t i = 0; i < 3; ++i) {
      const auto& p = curve.points.front();
      CHECK(p.raw_ratios[i] == p.raw_absolute[i] / curve.full_layer_value);
    }
  }
}

TEST_CASE("cka task uses unit full-layer value") {
  const auto s = small_synth(SynthMode::diffused);
  const auto curve = ratio_curve(s.train, s.test, Task::cka, fast_options({0.5, 1.0}));
  CHECK(curve.full_layer_value == 1.0);
  CHECK(curve.task == Task::cka);
  for (double r : curve.points.front().raw_ratios) {
    CHECK(r > 0.0);
    CHECK(r <= 1.0 + 1e-12);
  }
}

TEST_CASE("curves do not depend on the number of workers") {
  const auto s = small_synth(SynthMode::structured_prefix);
  for (Task task : {Task::probe_accuracy, Task::cka}) {
    auto opts = fast_options({0.1, 0.3, 1.0});
    const auto serial = ratio_curve(s.train, s.test, task, opts);
    opts.jobs = 3;
    check_identical(serial, ratio_curve(s.train, s.test, task, opts));
  }
}

TEST_CASE("cka curves reproduce bit for bit and change with the seed") {
  const auto s = small_synth(SynthMode::diffused);
  auto opts = fast_options({0.1, 0.5, 1.0}, 4);
  const auto a = ratio_curve(s.train, s.test, Task::cka, opts);
  check_identical(a, ratio_curve(s.train, s.test, Task::cka, opts));
  opts.probe.seed = 6;
  const auto b = ratio_curve(s.train, s.test, Task::cka, opts);
  CHECK(a.points[0].raw_ratios != b.points[0].raw_ratios);
}

TEST_CASE("degenerate cka cells are reported as failures") {
  // Seven constant columns and one informative one: single-neuron masks
  // usually land on a constant column.
  const std::size_t n = 50;
  FeatureMatrix x(n, 8);
  Labels y(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < 8; ++j) x(static_cast<Eigen::Index>(i), j) = 3.0f;
    x(static_cast<Eigen::Index>(i), 0) = static_cast<float>(i % 7);
    y[i] = static_cast<std::uint32_t>(i % 2);
  }
  const FeatureDataset ds(x, y, 2);
  const auto curve = ratio_curve(ds, ds, Task::cka, fast_options({0.125, 1.0}, 16));
  const auto& p = curve.points.front();
  CHECK(p.neuron_count == 1);
  CHECK(p.failed_cells() > 0);
  CHECK(p.failed_cells() < 16);  // P(all 16 miss column 0) = (7/8)^16 ~ 0.12, fixed seed
  std::size_t nan = 0;
  for (std::size_t i = 0; i < 16; ++i) {
    if (std::isnan(p.raw_ratios[i])) {
      ++nan;
      CHECK_FALSE(p.failures[i].empty());
    } else {
      CHECK(p.failures[i].empty());
      CHECK(p.raw_ratios[i] == doctest::Approx(1.0));  // only column 0 varies
    }
  }
  CHECK(nan == p.failed_cells());
  CHECK(p.mean_ratio == doctest::Approx(1.0));
  CHECK(curve.points.back().failed_cells() == 0);
}

TEST_CASE("probe task rejects a zero-accuracy full layer and mismatched splits") {
  const auto s = small_synth(SynthMode::diffused);
  const auto other = small_synth(SynthMode::diffused, 40);
  CHECK_THROWS_AS(ratio_curve(s.train, other.test, Task::probe_accuracy, fast_options({1.0})),
                  ShapeError);
  auto opts = fast_options({1.0});
  opts.num_seeds = 0;
  CHECK_THROWS_AS(ratio_curve(s.train, s.test, Task::cka, opts), ValidationError);

  // Train has only class 0, test only class 1: the probe is always wrong.
  FeatureMatrix x = FeatureMatrix::Random(20, 3);
  const FeatureDataset tr(x, Labels(20, 0), 2);
  const FeatureDataset te(x, Labels(20, 1), 2);
  CHECK_THROWS_AS(ratio_curve(tr, te, Task::probe_accuracy, fast_options({1.0})),
                  DegenerateError);
}

TEST_CASE("dr at the grid boundary") {
  RatioCurve c;
  c.dim = 256;
  c.grid = FractionGrid::defaults();
  for (const auto& gp : c.grid.points(256)) {
    CurvePoint p;
    p.fraction = gp.fraction;
    p.neuron_count = gp.count;
    p.mean_ratio = 0.99;
    c.points.push_back(p);
  }
  c.points.back().mean_ratio = 1.0;
  const auto est = dr_from_curve(c, 0.9);
  CHECK(est.achieving_count == 3);
  CHECK(est.achieving_fraction == 0.01);
  CHECK(est.dr_value == 1.0 - 3.0 / 256.0);
  CHECK(dr_from_curve(c, 1.0).dr_value == 0.0);
  CHECK_THROWS_AS(dr_from_curve(c, 0.0), RangeError);
  CHECK_THROWS_AS(dr_from_curve(c, 1.01), RangeError);
  CHECK_THROWS_AS(dr_from_curve(c, std::nan("")), RangeError);
}

TEST_CASE("nan means never satisfy delta") {
  RatioCurve c;
  c.dim = 10;
  c.grid = FractionGrid({0.5, 1.0});
  CurvePoint a;
  a.fraction = 0.5;
  a.neuron_count = 5;
  a.mean_ratio = std::nan("");
  CurvePoint b;
  b.fraction = 1.0;
  b.neuron_count = 10;
  b.mean_ratio = 1.0;
  c.points = {a, b};
  CHECK(dr_from_curve(c, 0.1).dr_value == 0.0);
}

TEST_CASE("dr matches a brute-force scan and is monotone in delta") {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t d = 1 + rng() % 500;
    const auto c = random_curve(rng, d);
    const double delta = 0.01 + 0.99 * u(rng);
    std::size_t best = d;
    for (const auto& p : c.points) {
      if (p.mean_ratio >= delta && p.neuron_count < best) best = p.neuron_count;
    }
    const auto est = dr_from_curve(c, delta);
    CHECK(est.achieving_count == best);
    CHECK(est.dr_value == 1.0 - static_cast<double>(best) / static_cast<double>(d));
    CHECK(est.dr_value >= 0.0);
    CHECK(est.dr_value < 1.0);
    CHECK(dr_from_curve(c, 0.8).dr_value >= dr_from_curve(c, 0.95).dr_value);
  }
}

TEST_CASE("all reductions agree at full width") {
  const auto s = small_synth(SynthMode::diffused);
  auto opts = fast_options({0.25, 1.0}, 2);
  opts.probe = ProbeConfig{};
  const auto rep = compare_reductions(s.train, s.test, opts);
  CHECK(rep.dim == 32);
  REQUIRE(rep.curves.size() == 4);
  const double mask = rep.curve("mask").points.back().mean_accuracy;
  CHECK(mask == rep.full_layer_accuracy);
  for (const char* kind : {"pca_top", "pca_bottom", "random_gaussian"}) {
    const auto& pt = rep.curve(kind).points.back();
    CHECK(pt.k == 32);
    CHECK(std::abs(pt.mean_accuracy - mask) <= 0.005);
  }
  CHECK(rep.curve("pca_top").points.front().raw.size() == 1);
  CHECK(rep.curve("random_gaussian").points.front().raw.size() == 2);
  CHECK_THROWS_AS(rep.curve("ica"), ValidationError);
}

TEST_CASE("structured layers vary more across picks than diffused ones") {
  const auto diffused = small_synth(SynthMode::diffused, 64);
  const auto structured = small_synth(SynthMode::structured_prefix, 64);
  auto opts = fast_options({4.0 / 64.0, 1.0}, 12);
  opts.probe.epochs = 20;
  const auto a = ratio_curve(diffused.train, diffused.test, Task::probe_accuracy, opts);
  const auto b = ratio_curve(structured.train, structured.test, Task::probe_accuracy, opts);
  MESSAGE("diffused std " << a.points[0].std_ratio << ", structured std " << b.points[0].std_ratio);
  CHECK(b.points[0].std_ratio > a.points[0].std_ratio);
}
