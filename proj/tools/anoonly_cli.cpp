// Experiment CLI: run, sweep, compare, gen-data.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "anoonly/anoonly.hpp"

namespace {

using namespace anoonly;

void make_parent(const std::string& path) {
  const auto parent = std::filesystem::path(path).parent_path();
  if (!parent.empty()) std::filesystem::create_directories(parent);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != ' ') {
      cur += c;
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

void print_summary(const ExperimentConfig& cfg, const std::vector<RunRecord>& runs) {
  std::printf("%-14s %8s %8s %10s %10s %6s\n", to_string(cfg.axis).c_str(), "aucroc", "std", "aucpr_a", "aucpr_n",
              "ok");
  for (const auto& s : summarize(cfg, runs)) {
    std::printf("%-14s %8.4f %8.4f %10.4f %10.4f %3zu/%zu\n", s.value.empty() ? "-" : s.value.c_str(), s.mean_aucroc,
                s.std_aucroc, s.mean_aucpr_anomaly, s.mean_aucpr_normal, s.n_ok, s.n_runs);
    if (std::isfinite(s.mean_aucroc_seen) || std::isfinite(s.mean_aucroc_unseen)) {
      std::printf("%-14s seen %.4f unseen %.4f\n", "", s.mean_aucroc_seen, s.mean_aucroc_unseen);
    }
  }
  for (const auto& r : runs)
    if (r.status != RunStatus::Ok)
      std::fprintf(stderr, "run %s (value %s, seed %llu): %s: %s\n", r.config_hash.c_str(), r.value.c_str(),
                   static_cast<unsigned long long>(r.seed), to_string(r.status).c_str(), r.message.c_str());
}

ExperimentOptions options(const ExperimentConfig& cfg, bool checkpoints) {
  ExperimentOptions o;
  if (checkpoints) {
    if (cfg.output_path.empty()) throw ConfigError("--checkpoints needs an output directory");
    o.checkpoint_dir = (std::filesystem::path(cfg.output_path) / "checkpoints").string();
  }
  return o;
}

void apply_overrides(ExperimentConfig& cfg, const std::string& out, int repeats, int epochs) {
  if (!out.empty()) cfg.output_path = out;
  if (repeats > 0) cfg.repeats = static_cast<std::size_t>(repeats);
  if (epochs >= 0) cfg.train.epochs = static_cast<std::size_t>(epochs);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"AnoOnly semi-supervised anomaly detection experiments"};
  app.require_subcommand(1);

  std::string out;
  int repeats = 0;
  int epochs = -1;
  bool checkpoints = false;

  auto* run = app.add_subcommand("run", "Run one experiment config (its own sweep, if any)");
  std::string run_cfg;
  run->add_option("--config", run_cfg, "Experiment JSON")->required()->check(CLI::ExistingFile);
  run->add_option("--out", out, "Output directory (overrides output_path)");
  run->add_option("--repeats", repeats, "Override repeat count");
  run->add_option("--epochs", epochs, "Override epochs");
  run->add_flag("--checkpoints", checkpoints, "Save each trained model to <out>/checkpoints/<hash>.json");

  auto* sweep = app.add_subcommand("sweep", "Sweep one axis over a list of values");
  std::string sweep_cfg, axis, values;
  sweep->add_option("--config", sweep_cfg, "Base experiment JSON")->required()->check(CLI::ExistingFile);
  sweep->add_option("--axis", axis, "gamma_la|gamma_n|lambda_n|batch_size|normalizer|noise|seen_types")->required();
  sweep->add_option("--values", values, "Comma-separated values (default: the axis' standard grid)");
  sweep->add_option("--out", out, "Output directory (overrides output_path)");
  sweep->add_option("--repeats", repeats, "Override repeat count");
  sweep->add_option("--epochs", epochs, "Override epochs");
  sweep->add_flag("--checkpoints", checkpoints, "Save each trained model to <out>/checkpoints/<hash>.json");

  auto* cmp = app.add_subcommand("compare", "Paired per-seed comparison of two configs (b - a)");
  std::string cfg_a, cfg_b, cmp_out;
  cmp->add_option("--a", cfg_a, "Baseline experiment JSON")->required()->check(CLI::ExistingFile);
  cmp->add_option("--b", cfg_b, "Variant experiment JSON")->required()->check(CLI::ExistingFile);
  cmp->add_option("--out", cmp_out, "Write the comparison table to this CSV");
  cmp->add_option("--repeats", repeats, "Override repeat count");
  cmp->add_option("--epochs", epochs, "Override epochs");

  auto* gen = app.add_subcommand("gen-data", "Generate a synthetic train/test pair as CSV + JSON sidecars");
  std::string recipe_path, stem = "data";
  gen->add_option("--recipe", recipe_path, "Data recipe JSON")->required()->check(CLI::ExistingFile);
  gen->add_option("--out", stem, "Output stem; writes <stem>_train.{csv,json} and <stem>_test.{csv,json}");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      auto cfg = load_experiment_config(run_cfg);
      apply_overrides(cfg, out, repeats, epochs);
      print_summary(cfg, run_experiment(cfg, options(cfg, checkpoints)));
    } else if (*sweep) {
      auto cfg = load_experiment_config(sweep_cfg);
      apply_overrides(cfg, out, repeats, epochs);
      cfg.axis = parse_sweep_axis(axis);
      cfg.values = values.empty() ? default_sweep_values(cfg.axis) : split_list(values);
      cfg.name += "_" + axis;
      print_summary(cfg, run_experiment(cfg, options(cfg, checkpoints)));
    } else if (*cmp) {
      auto a = load_experiment_config(cfg_a);
      auto b = load_experiment_config(cfg_b);
      apply_overrides(a, "", repeats, epochs);
      apply_overrides(b, "", repeats, epochs);
      const auto c = compare(a, b);
      write_comparison_csv(std::cout, c);
      std::printf("# pairs %zu  mean delta aucroc %.4f  (+%zu / -%zu / =%zu)  sign-test p %.4g\n", c.summary.n_pairs,
                  c.summary.mean_delta_aucroc, c.summary.n_positive, c.summary.n_negative, c.summary.n_zero,
                  c.summary.sign_test_p);
      if (!cmp_out.empty()) {
        make_parent(cmp_out);
        std::ofstream os(cmp_out);
        if (!os) throw ConfigError("cannot write " + cmp_out);
        write_comparison_csv(os, c);
      }
    } else if (*gen) {
      std::ifstream is(recipe_path);
      const auto j = nlohmann::json::parse(is);
      const DataRecipe recipe = (j.contains("data") ? j.at("data") : j).get<DataRecipe>();
      const auto data = generate(recipe);
      make_parent(stem);
      save_dataset(stem + "_train", data.train);
      save_dataset(stem + "_test", data.test);
      std::printf("train: %zu rows (%zu labeled anomalies, %zu anomalies total)\n", data.train.size(),
                  data.train.count_label(TrainLabel::LabeledAnomaly), data.train.count_anomalies());
      std::printf("test:  %zu rows (%zu anomalies)\n", data.test.size(), data.test.count_anomalies());
    }
  } catch (const anoonly::Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
