/*
 * Copyright 2026 The kgwalk Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// kgwalk command-line tool.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "kgwalk/pipeline.hpp"

namespace {

namespace fs = std::filesystem;

struct Flags {
  std::string config;
  std::string triples;
  std::string types;
  std::string metapaths;
  std::string out;
  std::string model;
  std::string predictions;
  std::optional<std::uint64_t> seed;
  std::optional<int> folds;
  std::optional<int> fold;
  std::string format = "text";
};

void add_common(CLI::App* cmd, Flags& f) {
  cmd->add_option("--config", f.config, "Run config (JSON)");
  cmd->add_option("--triples", f.triples, "Triples TSV: head, relation, tail");
  cmd->add_option("--types", f.types, "Entity types TSV");
  cmd->add_option("--metapaths", f.metapaths, "Metapath file, one pattern per line");
  cmd->add_option("--seed", f.seed, "Run seed");
  cmd->add_option("--folds", f.folds, "Number of cross-validation folds");
  cmd->add_option("--out", f.out, "Output directory");
  cmd->add_option("--format", f.format, "Console output format")
      ->check(CLI::IsMember({"text", "json"}));
}

kgwalk::RunConfig resolve(const Flags& f) {
  kgwalk::RunConfig cfg;
  if (!f.config.empty()) cfg = kgwalk::load_run_config(f.config);
  if (!f.triples.empty()) cfg.triples = f.triples;
  if (!f.types.empty()) cfg.types = f.types;
  if (!f.metapaths.empty()) cfg.metapaths = f.metapaths;
  if (!f.out.empty()) cfg.out = f.out;
  if (!f.model.empty()) cfg.model = kgwalk::model_kind_from_string(f.model);
  if (!f.predictions.empty()) cfg.predictions = f.predictions;
  if (f.seed) cfg.seed = *f.seed;
  if (f.folds) cfg.folds = *f.folds;
  if (f.fold) cfg.fold = *f.fold;
  return cfg;
}

void print_summary(const kgwalk::RunSummary& s, const kgwalk::RunConfig& cfg,
                   const std::string& format) {
  if (format == "json") {
    std::cout << kgwalk::metrics_report_to_json(s.report);
    return;
  }
  if (!s.pre_table.empty()) {
    std::cout << s.pre_table << '\n' << s.post_table;
  } else {
    std::cout << "per-fold metrics written under " << (cfg.out / "folds").string()
              << '\n';
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"kgwalk: reinforcement-learning walkers and embedding baselines "
               "for knowledge graph link prediction"};
  app.require_subcommand(1);
  Flags f;

  auto* stats = app.add_subcommand("stats", "Graph statistics and fold sizes");
  add_common(stats, f);
  auto* train = app.add_subcommand("train", "Train one model per fold");
  add_common(train, f);
  auto* eval = app.add_subcommand("eval", "Evaluate checkpoints or a prediction dump");
  add_common(eval, f);
  auto* run = app.add_subcommand("run", "Search (optional), train and evaluate all folds");
  add_common(run, f);
  auto* search = app.add_subcommand("search", "Hyperparameter grid search on fold 0");
  add_common(search, f);
  for (auto* cmd : {train, eval, run, search}) {
    cmd->add_option("--model", f.model,
                    "minerva, polo, transe, distmult or embedding_guided");
    cmd->add_option("--fold", f.fold, "Only this fold");
  }
  eval->add_option("--predictions", f.predictions, "Prediction dump (JSONL) to score");

  kgwalk::PlantedGraphSpec spec;
  std::string synth_out;
  auto* synth = app.add_subcommand("synth", "Write a planted-rule dataset and config");
  synth->add_option("--out", synth_out, "Output directory")->required();
  synth->add_option("--seed", spec.seed, "Generator seed");
  synth->add_option("--noise", spec.noise_rate, "Fraction of treats edges replaced");
  synth->add_option("--compounds", spec.n_compounds);
  synth->add_option("--genes", spec.n_genes);
  synth->add_option("--diseases", spec.n_diseases);
  synth->add_option("--distractor-prob", spec.distractor_prob);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*synth) {
      kgwalk::write_planted_dataset(spec, synth_out);
      std::cout << "wrote " << (fs::path(synth_out) / "config.json").string() << '\n';
      return 0;
    }
    const kgwalk::RunConfig cfg = resolve(f);
    if (*stats) {
      const auto report = kgwalk::cmd_stats(cfg);
      std::cout << (f.format == "json" ? kgwalk::stats_report_json(report)
                                       : kgwalk::stats_report_text(report));
    } else if (*train) {
      kgwalk::cmd_train(cfg);
      std::cout << "checkpoints written under " << (cfg.out / "folds").string() << '\n';
    } else if (*eval) {
      print_summary(kgwalk::cmd_eval(cfg), cfg, f.format);
    } else if (*run) {
      print_summary(kgwalk::cmd_run(cfg), cfg, f.format);
    } else if (*search) {
      const auto best = kgwalk::cmd_search(cfg);
      std::cout << kgwalk::run_config_to_json(best);
    }
  } catch (const kgwalk::Error& e) {
    std::cerr << "kgwalk: error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "kgwalk: unexpected error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
