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

#include "drkit/cli.hpp"

#include <chrono>
#include <fstream>
#include <iostream>
#include <optional>
#include <vector>

#include <CLI11.hpp>

#include "drkit/error.hpp"
#include "drkit/fairness.hpp"
#include "drkit/featurestore.hpp"
#include "drkit/probe.hpp"
#include "drkit/redundancy.hpp"
#include "drkit/report.hpp"
#include "drkit/seed.hpp"
#include "drkit/similarity.hpp"
#include "drkit/synthgen.hpp"

namespace drkit::cli {
namespace {

using nlohmann::json;
using Clock = std::chrono::steady_clock;

// Thrown for semantic problems with otherwise well-formed flags.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

const CLI::Validator kDeltaRange(
    [](std::string& value) -> std::string {
      try {
        const double d = std::stod(value);
        if (d > 0.0 && d <= 1.0) return {};
      } catch (const std::exception&) {
      }
      return "value " + value + " not in (0, 1]";
    },
    "in (0, 1]", "DELTA");

struct ProbeFlags {
  ProbeConfig cfg;

  void attach(CLI::App* app) {
    app->add_option("--lr", cfg.lr, "Probe learning rate")->capture_default_str();
    app->add_option("--momentum", cfg.momentum, "SGD momentum")->capture_default_str();
    app->add_option("--batch-size", cfg.batch_size, "Minibatch size")->capture_default_str();
    app->add_option("--weight-decay", cfg.weight_decay, "L2 penalty on probe weights")
        ->capture_default_str();
    app->add_option("--epochs", cfg.epochs, "Training epochs")->capture_default_str();
    app->add_option("--lr-decay-factor", cfg.lr_decay_factor, "Step schedule factor")
        ->capture_default_str();
    app->add_option("--lr-decay-every", cfg.lr_decay_every, "Epochs between LR decays")
        ->capture_default_str();
    app->add_flag("--standardize", cfg.standardize,
                  "Standardise kept neurons with train statistics");
  }
};

struct ExperimentFlags {
  std::string train_path;
  std::string test_path;
  std::vector<double> grid;
  std::size_t seeds = 5;
  std::uint64_t seed = 0;
  std::size_t jobs = 1;
  std::string out_path;
  std::string csv_path;
  ProbeFlags probe;

  void attach(CLI::App* app, bool needs_train = true) {
    auto* train = app->add_option("--train", train_path, "Training split (FVEC)")
                      ;
    if (needs_train) train->required();
    app->add_option("--test", test_path, "Test split (FVEC)")->required();
    app->add_option("--grid", grid, "Comma-separated fractions ending at 1.0")->delimiter(',');
    app->add_option("--seeds", seeds, "Random picks per fraction")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
    app->add_option("--seed", seed, "Base seed for every random choice")->required();
    app->add_option("--jobs", jobs, "Concurrent cells")->capture_default_str()->check(
        CLI::PositiveNumber);
    app->add_option("--out", out_path, "Report path (stdout when omitted)");
    app->add_option("--csv", csv_path, "Also write per-cell rows as CSV");
    probe.attach(app);
  }

  CurveOptions options() const {
    CurveOptions opts;
    try {
      if (!grid.empty()) opts.grid = FractionGrid(grid);
      opts.num_seeds = seeds;
      opts.jobs = jobs;
      opts.probe = probe.cfg;
      opts.probe.seed = seed;
      opts.validate();
    } catch (const ValidationError& e) {
      throw UsageError(e.what());
    }
    return opts;
  }

  json parameters(const CurveOptions& opts) const {
    json p = {{"train", train_path},
              {"test", test_path},
              {"grid", grid_json(opts.grid)},
              {"seeds", opts.num_seeds},
              {"seed", seed},
              {"jobs", opts.jobs},
              {"probe", to_json(opts.probe)}};
    return p;
  }
};

void emit(const json& report, const std::string& path, std::ostream& out) {
  const std::string text = report.dump(2) + "\n";
  if (path.empty()) {
    out << text;
    return;
  }
  std::ofstream f(path, std::ios::trunc);
  if (!f) throw IoError("cannot open " + path + " for writing");
  f << text;
  if (!f) throw IoError("write failed for " + path);
}

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

json base_report(RunManifest& manifest, const std::string& task, Clock::time_point start) {
  manifest.duration_seconds = seconds_since(start);
  return json{{"manifest", to_json(manifest)}, {"task", task}};
}

int run_synth(const SynthConfig& cfg, const std::string& mode, std::uint64_t seed,
              const std::string& prefix, std::ostream& out) {
  SynthConfig resolved = cfg;
  try {
    resolved.mode = synth_mode_from_string(mode);
    resolved.validate();
  } catch (const ValidationError& e) {
    throw UsageError(e.what());
  }
  const auto splits = gen_synthetic(resolved, seed);
  const std::string train_path = prefix + ".train.fvec";
  const std::string test_path = prefix + ".test.fvec";
  write_fvec(splits.train, train_path);
  write_fvec(splits.test, test_path);
  out << train_path << '\n' << test_path << '\n';
  return kExitOk;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"drkit: diffused-redundancy analysis of layer representations", "drkit"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kToolkitVersion);

  // synth
  SynthConfig synth_cfg;
  std::string synth_mode = "diffused";
  std::uint64_t synth_seed = 0;
  std::string synth_prefix;
  auto* synth = app.add_subcommand("synth", "Generate synthetic train/test feature files");
  synth->add_option("--mode", synth_mode, "diffused|structured_prefix|noise_augmented|class_prefix")
      ->capture_default_str();
  synth->add_option("--latent", synth_cfg.latent_dim, "Latent dimension s")->capture_default_str();
  synth->add_option("--classes", synth_cfg.num_classes, "Number of classes")
      ->capture_default_str();
  synth->add_option("--width", synth_cfg.width, "Layer width d")->capture_default_str();
  synth->add_option("--n-train", synth_cfg.n_train, "Training samples")->capture_default_str();
  synth->add_option("--n-test", synth_cfg.n_test, "Test samples")->capture_default_str();
  synth->add_option("--class-sep", synth_cfg.class_sep, "Class-mean radius in latent space")
      ->capture_default_str();
  synth->add_option("--noise-std", synth_cfg.noise_std, "Per-neuron noise")
      ->capture_default_str();
  synth->add_option("--extra-noise-std", synth_cfg.extra_noise_std,
                    "Noise of pure-noise neurons (noise_augmented)")
      ->capture_default_str();
  synth->add_option("--prefix", synth_cfg.informative_prefix, "Informative prefix size p")
      ->capture_default_str();
  synth->add_option("--prefix-classes", synth_cfg.prefix_classes,
                    "Classes told apart only by the prefix (class_prefix)")
      ->capture_default_str();
  synth->add_option("--seed", synth_seed, "Generator seed")->required();
  synth->add_option("--out-prefix", synth_prefix, "Writes <prefix>.train.fvec and .test.fvec")
      ->required();

  // ingest
  std::string ingest_features;
  std::string ingest_labels;
  std::uint32_t ingest_classes = 0;
  std::string ingest_out;
  Manifest ingest_meta;
  std::string ingest_split;
  std::optional<std::int64_t> ingest_extraction_seed;
  auto* ingest = app.add_subcommand("ingest", "Convert CSV features and labels to FVEC");
  ingest->add_option("--features", ingest_features, "Comma-separated feature rows")
      ->required()
      ;
  ingest->add_option("--labels", ingest_labels, "One integer label per line")
      ->required()
      ;
  ingest->add_option("--classes", ingest_classes, "Number of classes")
      ->required()
      ->check(CLI::PositiveNumber);
  ingest->add_option("--out", ingest_out, "Output FVEC path")->required();
  ingest->add_option("--model", ingest_meta.model_name, "Model name for the manifest");
  ingest->add_option("--layer", ingest_meta.layer_name, "Layer name for the manifest");
  ingest->add_option("--dataset", ingest_meta.dataset_name, "Dataset name for the manifest");
  ingest->add_option("--split", ingest_split, "train|test")
      ->check(CLI::IsMember({"train", "test"}));
  ingest->add_option("--extraction-seed", ingest_extraction_seed, "Seed used at extraction");

  // cka
  ExperimentFlags cka_flags;
  std::string cka_mode = "part-whole";
  std::size_t cka_pairs = 10;
  std::size_t cka_max_samples = 0;
  std::optional<double> cka_delta;
  auto* cka = app.add_subcommand("cka", "CKA of random neuron subsets (part-whole or pairwise)");
  cka->add_option("--input", cka_flags.test_path, "Feature file (FVEC)")
      ->required()
      ;
  cka->add_option("--mode", cka_mode, "part-whole|pairwise")
      ->capture_default_str()
      ->check(CLI::IsMember({"part-whole", "pairwise"}));
  cka->add_option("--pairs", cka_pairs, "Mask pairs per fraction (pairwise mode)")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  cka->add_option("--max-samples", cka_max_samples, "Use only the first N rows (0 = all)")
      ->capture_default_str();
  cka->add_option("--delta", cka_delta, "Tolerance for the DR estimate")->check(kDeltaRange);
  cka->add_option("--grid", cka_flags.grid, "Comma-separated fractions ending at 1.0")
      ->delimiter(',');
  cka->add_option("--seeds", cka_flags.seeds, "Random picks per fraction (part-whole mode)")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  cka->add_option("--seed", cka_flags.seed, "Base seed")->required();
  cka->add_option("--jobs", cka_flags.jobs, "Concurrent cells")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  cka->add_option("--out", cka_flags.out_path, "Report path (stdout when omitted)");
  cka->add_option("--csv", cka_flags.csv_path, "Also write per-cell rows as CSV");

  // probe
  std::string probe_train;
  std::string probe_test;
  std::optional<double> probe_fraction;
  std::optional<std::size_t> probe_prefix;
  std::uint64_t probe_seed = 0;
  std::string probe_out;
  ProbeFlags probe_flags;
  auto* probe = app.add_subcommand("probe", "Train and evaluate one linear probe");
  probe->add_option("--train", probe_train, "Training split (FVEC)")
      ->required()
      ;
  probe->add_option("--test", probe_test, "Test split (FVEC)")
      ->required()
      ;
  auto* fraction_opt = probe->add_option("--fraction", probe_fraction,
                                         "Random subset of this fraction of neurons")
                           ->check(CLI::Range(0.0, 1.0));
  probe->add_option("--prefix", probe_prefix, "Use the first N neurons")
      ->check(CLI::PositiveNumber)
      ->excludes(fraction_opt);
  probe->add_option("--seed", probe_seed, "Seed for the mask and shuffling")->required();
  probe->add_option("--out", probe_out, "Report path (stdout when omitted)");
  probe_flags.attach(probe);

  // dr
  ExperimentFlags dr_flags;
  std::string dr_task = "probe";
  std::optional<double> dr_delta;
  auto* dr = app.add_subcommand("dr", "Ratio curve and diffused-redundancy estimate");
  dr_flags.attach(dr, /*needs_train=*/false);
  dr->add_option("--task", dr_task, "probe|cka")
      ->capture_default_str()
      ->check(CLI::IsMember({"probe", "cka"}));
  dr->add_option("--delta", dr_delta, "Tolerance for the DR estimate")->check(kDeltaRange);

  // compare
  ExperimentFlags cmp_flags;
  auto* compare = app.add_subcommand("compare", "Random masks vs PCA vs random projections");
  cmp_flags.attach(compare);

  // fairness
  ExperimentFlags fair_flags;
  auto* fairness = app.add_subcommand("fairness", "Class-wise accuracy spread as neurons drop");
  fair_flags.attach(fairness);

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    // --help and --version.
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kExitUsage;
  }

  const auto start = Clock::now();
  try {
    if (*synth) {
      return run_synth(synth_cfg, synth_mode, synth_seed, synth_prefix, out);
    }

    if (*ingest) {
      if (!ingest_split.empty()) ingest_meta.split = split_from_string(ingest_split);
      ingest_meta.extraction_seed = ingest_extraction_seed;
      const auto ds = ingest_csv(ingest_features, ingest_labels, ingest_classes, ingest_meta);
      write_fvec(ds, ingest_out);
      out << ingest_out << ": n=" << ds.rows() << " d=" << ds.dim()
          << " classes=" << ds.num_classes() << '\n';
      return kExitOk;
    }

    if (*cka) {
      CurveOptions opts = cka_flags.options();
      auto data = read_fvec(cka_flags.test_path);
      if (cka_max_samples > 0) data = data.head(cka_max_samples);
      RunManifest manifest;
      manifest.command = "cka";
      manifest.add_input(cka_flags.test_path);
      manifest.parameters = {{"input", cka_flags.test_path},
                             {"mode", cka_mode},
                             {"grid", grid_json(opts.grid)},
                             {"seed", cka_flags.seed},
                             {"jobs", opts.jobs},
                             {"max_samples", cka_max_samples},
                             {"samples_used", data.rows()}};

      RatioCurve curve;
      if (cka_mode == "part-whole") {
        manifest.parameters["seeds"] = opts.num_seeds;
        curve = ratio_curve(data, data, Task::cka, opts);
      } else {
        manifest.parameters["pairs"] = cka_pairs;
        const CenteredGram gram(data.features());
        curve.task = Task::cka;
        curve.dim = data.dim();
        curve.full_layer_value = 1.0;
        curve.num_seeds = cka_pairs;
        curve.grid = opts.grid;
        for (const auto& p : opts.grid.points(data.dim())) {
          const auto stats =
              cka_subset_pair(gram, p.count, cka_pairs, derive_seed(cka_flags.seed, "pairs",
                                                                    {p.index}));
          CurvePoint cp;
          cp.fraction = p.fraction;
          cp.neuron_count = p.count;
          cp.mean_ratio = stats.mean;
          cp.std_ratio = stats.std;
          cp.raw_ratios = stats.values;
          cp.raw_absolute = stats.values;
          cp.failures.assign(stats.values.size(), "");
          curve.points.push_back(std::move(cp));
        }
      }
      if (cka_delta) manifest.parameters["delta"] = *cka_delta;
      json report = base_report(manifest, cka_mode == "part-whole" ? "cka" : "cka_pair", start);
      report["full_layer_value"] = curve.full_layer_value;
      report["grid"] = grid_json(opts.grid);
      report["curve"] = curve_json(curve);
      if (cka_delta) report["dr"] = to_json(dr_from_curve(curve, *cka_delta));
      if (!cka_flags.csv_path.empty()) write_csv(cka_flags.csv_path, csv_rows(curve));
      emit(report, cka_flags.out_path, out);
      return kExitOk;
    }

    if (*probe) {
      ProbeConfig cfg = probe_flags.cfg;
      cfg.seed = probe_seed;
      try {
        cfg.validate();
      } catch (const ValidationError& e) {
        throw UsageError(e.what());
      }
      const auto train = read_fvec(probe_train);
      const auto test = read_fvec(probe_test);
      const std::size_t d = train.dim();
      NeuronMask mask = NeuronMask::full(d);
      if (probe_fraction) {
        if (!(*probe_fraction > 0.0)) throw UsageError("--fraction must be > 0");
        mask = sample_mask(d, FractionGrid::count_for(*probe_fraction, d),
                           derive_seed(probe_seed, "mask"));
      } else if (probe_prefix) {
        if (*probe_prefix > d) throw UsageError("--prefix exceeds the layer width");
        mask = NeuronMask::prefix(d, *probe_prefix);
      }
      const auto trained = train_probe(train, mask, cfg);
      const auto eval = eval_probe(trained, test);

      RunManifest manifest;
      manifest.command = "probe";
      manifest.add_input(probe_train);
      manifest.add_input(probe_test);
      manifest.parameters = {{"train", probe_train}, {"test", probe_test},
                             {"seed", probe_seed},   {"probe", to_json(cfg)}};
      if (probe_fraction) manifest.parameters["fraction"] = *probe_fraction;
      if (probe_prefix) manifest.parameters["prefix"] = *probe_prefix;
      json report = base_report(manifest, "probe", start);
      report["probe"] = {{"neuron_count", mask.count()},
                         {"mask_indices", mask.indices()},
                         {"final_train_loss", trained.final_train_loss},
                         {"evaluation", to_json(eval)}};
      emit(report, probe_out, out);
      return kExitOk;
    }

    if (*dr) {
      const Task task = task_from_string(dr_task);
      if (task == Task::probe_accuracy && dr_flags.train_path.empty()) {
        throw UsageError("--train is required for --task probe");
      }
      const CurveOptions opts = dr_flags.options();
      const auto test = read_fvec(dr_flags.test_path);
      const auto train = dr_flags.train_path.empty() ? test : read_fvec(dr_flags.train_path);
      RunManifest manifest;
      manifest.command = "dr";
      if (!dr_flags.train_path.empty()) manifest.add_input(dr_flags.train_path);
      manifest.add_input(dr_flags.test_path);
      manifest.parameters = dr_flags.parameters(opts);
      manifest.parameters["task"] = to_string(task);
      if (dr_delta) manifest.parameters["delta"] = *dr_delta;

      const auto curve = ratio_curve(train, test, task, opts);
      json report = base_report(manifest, to_string(task), start);
      report["full_layer_value"] = curve.full_layer_value;
      report["grid"] = grid_json(opts.grid);
      report["curve"] = curve_json(curve);
      if (dr_delta) report["dr"] = to_json(dr_from_curve(curve, *dr_delta));
      if (!dr_flags.csv_path.empty()) write_csv(dr_flags.csv_path, csv_rows(curve));
      emit(report, dr_flags.out_path, out);
      return kExitOk;
    }

    if (*compare) {
      const CurveOptions opts = cmp_flags.options();
      const auto train = read_fvec(cmp_flags.train_path);
      const auto test = read_fvec(cmp_flags.test_path);
      RunManifest manifest;
      manifest.command = "compare";
      manifest.add_input(cmp_flags.train_path);
      manifest.add_input(cmp_flags.test_path);
      manifest.parameters = cmp_flags.parameters(opts);
      const auto result = compare_reductions(train, test, opts);
      json report = base_report(manifest, "probe", start);
      report["full_layer_value"] = result.full_layer_accuracy;
      report["grid"] = grid_json(opts.grid);
      report["curve"] = curve_json(mask_ratio_curve(result));
      report["comparison"] = to_json(result);
      if (!cmp_flags.csv_path.empty()) write_csv(cmp_flags.csv_path, csv_rows(result));
      emit(report, cmp_flags.out_path, out);
      return kExitOk;
    }

    if (*fairness) {
      const CurveOptions opts = fair_flags.options();
      const auto train = read_fvec(fair_flags.train_path);
      const auto test = read_fvec(fair_flags.test_path);
      RunManifest manifest;
      manifest.command = "fairness";
      manifest.add_input(fair_flags.train_path);
      manifest.add_input(fair_flags.test_path);
      manifest.parameters = fair_flags.parameters(opts);
      const auto result = fairness_curve(train, test, opts);
      const auto curve = accuracy_ratio_curve(result);
      json report = base_report(manifest, "probe", start);
      report["full_layer_value"] = curve.full_layer_value;
      report["grid"] = grid_json(opts.grid);
      report["curve"] = curve_json(curve);
      report["fairness"] = to_json(result);
      if (!fair_flags.csv_path.empty()) write_csv(fair_flags.csv_path, csv_rows(result));
      emit(report, fair_flags.out_path, out);
      return kExitOk;
    }
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\nRun with --help for more information.\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitUsage;
}

int run(std::span<const std::string> args, std::ostream& out, std::ostream& err) {
  std::vector<const char*> argv;
  argv.push_back("drkit");
  for (const auto& a : args) argv.push_back(a.c_str());
  return run(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace drkit::cli
