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

// Batch pipeline behind the command-line tool.
//
// Output layout of a run directory:
//   manifest.json
//   metrics.json, metrics_pre_pruning.txt, metrics_post_pruning.txt
//   metapaths.txt, metapaths.json          (path-based models)
//   search.json                            (when grid search ran)
//   folds/<i>/checkpoint.bin, train_log.jsonl, predictions.jsonl,
//             metrics.json, explanations.jsonl

#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "kgwalk/beam_infer.hpp"
#include "kgwalk/eval_harness.hpp"
#include "kgwalk/kge.hpp"
#include "kgwalk/synth_data.hpp"
#include "kgwalk/trainer.hpp"

namespace kgwalk {

inline constexpr const char* kVersion = "0.1.0";

enum class ModelKind { kMinerva, kPolo, kTransE, kDistMult, kEmbeddingGuided };

std::string to_string(ModelKind kind);
ModelKind model_kind_from_string(const std::string& name);

struct RunConfig {
  std::filesystem::path triples;
  std::filesystem::path types;
  std::filesystem::path metapaths;
  // "treats-repurposing" or "binds-target".
  std::string task = "treats-repurposing";
  // Empty: resolved from the task against the graph's names.
  std::string target_relation;
  std::string target_type;
  ModelKind model = ModelKind::kMinerva;
  std::uint64_t seed = 0;
  int folds = 5;
  double valid_fraction = 0.2;
  std::filesystem::path out = "kgwalk_out";
  TrainConfig train;
  KgeTrainConfig kge;
  std::size_t beam_width = kDefaultBeamWidth;
  bool grid_search = false;
  int kge_grid_draws = 8;
  // Predictions per query kept for explanations and metapath tables.
  std::size_t explain_top_k = 10;
  std::size_t metapath_top_k = 10;
  // Filter known tails of train, valid and test (false: train and valid).
  bool filter_test = true;
  // Optional prediction dump evaluated by `eval` instead of a checkpoint.
  std::filesystem::path predictions;
  // Restricts train/eval to one fold; -1 means all.
  int fold = -1;

  // Checks that do not need the graph.
  void validate() const;
};

// Relative paths inside the file are resolved against `base_dir`.
RunConfig run_config_from_json(const std::string& json,
                               const std::filesystem::path& base_dir = {});
RunConfig load_run_config(const std::filesystem::path& path);
std::string run_config_to_json(const RunConfig& cfg);

// Target relation and type after task defaults are applied; throws when the
// graph lacks them.
struct ResolvedTask {
  RelationId relation = 0;
  TypeId type = 0;
};
ResolvedTask resolve_task(const RunConfig& cfg, const KnowledgeGraph& kg);

// Per-fold training seed derived from the run seed.
std::uint64_t fold_seed(const RunConfig& cfg, int fold);

// Number of evaluation threads from KGWALK_THREADS (default 1).
int eval_threads();

struct StatsReport {
  GraphStats stats;
  // Per-fold (train, valid, test) sizes of the task relation, when it exists.
  std::vector<std::array<std::size_t, 3>> fold_sizes;
};
StatsReport cmd_stats(const RunConfig& cfg);
std::string stats_report_text(const StatsReport& report);
std::string stats_report_json(const StatsReport& report);

struct RunSummary {
  MetricsReport report;
  std::string pre_table;
  std::string post_table;
};

// Grid search on fold 0 (policy models: the MINERVA or PoLo grid; embedding
// models: sampled learning rates). Writes search.json; returns the winner
// as a RunConfig with its train/kge block replaced.
RunConfig cmd_search(const RunConfig& cfg);
void cmd_train(const RunConfig& cfg);
RunSummary cmd_eval(const RunConfig& cfg);
// search (optional) + train + eval + manifest.
RunSummary cmd_run(const RunConfig& cfg);

// Writes triples.tsv, types.tsv, metapaths.tsv (the planted rule) and a
// MINERVA run config config.json into `dir`; returns that config.
RunConfig write_planted_dataset(const PlantedGraphSpec& spec,
                                const std::filesystem::path& dir);

}  // namespace kgwalk
