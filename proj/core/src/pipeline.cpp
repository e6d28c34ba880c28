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

#include "kgwalk/pipeline.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "json.hpp"
#include "kgwalk/explain.hpp"

namespace kgwalk {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

namespace {

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

bool is_policy(ModelKind m) {
  return m == ModelKind::kMinerva || m == ModelKind::kPolo;
}

KgeKind embedding_kind(ModelKind m) {
  return m == ModelKind::kDistMult ? KgeKind::kDistMult : KgeKind::kTransE;
}

// Everything a command needs from the inputs, loaded once.
struct Workspace {
  RunConfig cfg;
  KnowledgeGraph kg;
  KnowledgeGraph augmented;
  ResolvedTask task;
  std::vector<DatasetSplit> splits;
  std::vector<Metapath> metapaths;
};

Workspace open_workspace(const RunConfig& cfg) {
  cfg.validate();
  KnowledgeGraph kg = load_graph(cfg.triples, cfg.types);
  KnowledgeGraph augmented = augment_inverses(kg);
  const ResolvedTask task = resolve_task(cfg, kg);
  auto splits = split_folds(kg, task.relation, cfg.folds, cfg.seed,
                            cfg.valid_fraction);
  std::vector<Metapath> metapaths;
  if (!cfg.metapaths.empty()) metapaths = load_metapaths(cfg.metapaths, augmented);
  if (cfg.model == ModelKind::kPolo && metapaths.empty()) {
    throw ValidationError("model polo needs at least one metapath in '" +
                          cfg.metapaths.string() + "'");
  }
  return Workspace{cfg, std::move(kg), std::move(augmented), task,
                   std::move(splits), std::move(metapaths)};
}

fs::path fold_dir(const RunConfig& cfg, int fold) {
  return cfg.out / "folds" / std::to_string(fold);
}

std::vector<int> selected_folds(const RunConfig& cfg) {
  std::vector<int> folds;
  if (cfg.fold >= 0) {
    folds.push_back(cfg.fold);
  } else {
    for (int i = 0; i < cfg.folds; ++i) folds.push_back(i);
  }
  return folds;
}

FilterSet fold_filter(const Workspace& w, const DatasetSplit& split) {
  FilterSet filter;
  if (w.cfg.filter_test) {
    filter.add(w.kg.triples());
    return filter;
  }
  std::vector<Triple> test = split.test;
  std::sort(test.begin(), test.end());
  std::vector<Triple> known;
  for (const Triple& t : w.kg.triples()) {
    if (!std::binary_search(test.begin(), test.end(), t)) known.push_back(t);
  }
  filter.add(known);
  return filter;
}

TrainConfig fold_train_config(const Workspace& w, int fold) {
  TrainConfig tc = w.cfg.train;
  tc.seed = fold_seed(w.cfg, fold);
  return tc;
}

KgeTrainConfig fold_kge_config(const Workspace& w, int fold) {
  KgeTrainConfig kc = w.cfg.kge;
  kc.seed = fold_seed(w.cfg, fold);
  return kc;
}

// A trained model ready to answer queries on one fold.
struct FoldModel {
  KnowledgeGraph augmented_train;
  std::optional<PolicyParams> policy;
  std::optional<KgeParams> kge;
  EnvConfig env;
};

Predictor make_predictor(const Workspace& w, const FoldModel& model,
                         const WalkEnv* env) {
  const std::size_t width = w.cfg.beam_width;
  switch (w.cfg.model) {
    case ModelKind::kMinerva:
    case ModelKind::kPolo:
      return [&model, env, width](const Query& q) {
        return beam_search(*model.policy, *env, q, width);
      };
    case ModelKind::kEmbeddingGuided:
      return [&model, env, width](const Query& q) {
        return embedding_guided_walk(*model.kge, *env, q, width);
      };
    case ModelKind::kTransE:
    case ModelKind::kDistMult:
      break;
  }
  return [&model](const Query& q) {
    return rank_tails(*model.kge, q.head, q.relation);
  };
}

FoldModel train_model(const Workspace& w, int fold, const TrainConfig& tc,
                      const KgeTrainConfig& kc, std::ostream* log) {
  const DatasetSplit& split = w.splits.at(static_cast<std::size_t>(fold));
  KnowledgeGraph raw = training_graph(w.kg, split);
  FoldModel model{augment_inverses(raw), std::nullopt, std::nullopt, {}};
  if (is_policy(w.cfg.model)) {
    BatchCallback on_batch;
    if (log != nullptr) {
      on_batch = [log](const BatchRecord& r) { *log << batch_record_to_json(r) << '\n'; };
    }
    TrainResult result =
        train_policy(model.augmented_train, split.train, w.metapaths, tc, on_batch);
    model.policy = std::move(result.params);
    model.env = EnvConfig{tc.max_steps, tc.max_out, tc.seed};
  } else {
    KgeTrainResult result = train_kge(raw, embedding_kind(w.cfg.model), kc);
    if (log != nullptr) {
      for (const KgeLossPoint& p : result.loss_log) {
        ojson j;
        j["step"] = p.step;
        j["loss"] = p.loss;
        *log << j.dump() << '\n';
      }
    }
    model.kge = std::move(result.params);
    model.env = EnvConfig{w.cfg.train.max_steps, w.cfg.train.max_out, kc.seed};
  }
  return model;
}

FoldModel load_model(const Workspace& w, int fold) {
  const DatasetSplit& split = w.splits.at(static_cast<std::size_t>(fold));
  const fs::path ckpt = fold_dir(w.cfg, fold) / "checkpoint.bin";
  if (!fs::exists(ckpt)) {
    throw IoError("missing checkpoint '" + ckpt.string() +
                  "'; run `train` first or give a prediction dump");
  }
  FoldModel model{augment_inverses(training_graph(w.kg, split)), std::nullopt,
                  std::nullopt, {}};
  if (is_policy(w.cfg.model)) {
    std::string meta;
    model.policy = load_policy(ckpt, &meta);
    const TrainConfig tc = train_config_from_json(meta, w.cfg.train);
    model.env = EnvConfig{tc.max_steps, tc.max_out, tc.seed};
    if (model.policy->dims.entity_count != w.kg.entity_count() ||
        model.policy->dims.relation_count != w.augmented.relation_count()) {
      throw ValidationError("checkpoint '" + ckpt.string() +
                            "' was trained on a different graph");
    }
  } else {
    model.kge = load_kge(ckpt);
    const auto meta = nlohmann::json::parse(read_checkpoint_header(ckpt).metadata_json);
    const std::uint64_t seed = meta.at("config").value("seed", std::uint64_t{0});
    model.env = EnvConfig{w.cfg.train.max_steps, w.cfg.train.max_out, seed};
    if (static_cast<std::size_t>(model.kge->entity_emb.rows()) != w.kg.entity_count()) {
      throw ValidationError("checkpoint '" + ckpt.string() +
                            "' was trained on a different graph");
    }
  }
  return model;
}

double pruned_mrr(const Workspace& w, const FoldModel& model,
                  std::span<const Triple> triples, const FilterSet& filter) {
  const WalkEnv env(model.augmented_train, model.env);
  const QueryRanks ranks = rank_test_triples(make_predictor(w, model, &env), triples,
                                             w.kg, filter, nullptr, eval_threads());
  return compute_metrics(ranks.post_pruning).mrr;
}

ojson fold_json(const FoldMetrics& m) {
  return ojson::parse(fold_metrics_to_json(m));
}

// Top-k type-pruned predictions of each list.
std::vector<PredictionList> retained(const std::vector<PredictionList>& lists,
                                     TypeId type, const KnowledgeGraph& kg,
                                     std::size_t top_k) {
  std::vector<PredictionList> out;
  out.reserve(lists.size());
  for (const PredictionList& list : lists) {
    PredictionList pruned = prune_by_type(list, type, kg);
    sort_predictions(pruned);
    if (pruned.entries.size() > top_k) pruned.entries.resize(top_k);
    out.push_back(std::move(pruned));
  }
  return out;
}

RunConfig search(const Workspace& w) {
  const DatasetSplit& split = w.splits.at(0);
  if (split.valid.empty()) {
    throw ValidationError("grid search needs validation triples (valid_fraction > 0)");
  }
  const FilterSet filter = fold_filter(w, split);
  RunConfig best = w.cfg;
  ojson table = ojson::array();
  if (is_policy(w.cfg.model)) {
    const auto grid = w.cfg.model == ModelKind::kPolo ? polo_grid(w.cfg.train)
                                                      : minerva_grid(w.cfg.train);
    FoldModel current{augment_inverses(training_graph(w.kg, split)), std::nullopt,
                      std::nullopt, {}};
    auto train = [&](const TrainConfig& cfg) {
      TrainConfig tc = cfg;
      tc.seed = fold_seed(w.cfg, 0);
      return train_policy(current.augmented_train, split.train, w.metapaths, tc);
    };
    auto score = [&](const PolicyParams& params, const TrainConfig& cfg) {
      current.policy = params;
      current.env = EnvConfig{cfg.max_steps, cfg.max_out, fold_seed(w.cfg, 0)};
      return pruned_mrr(w, current, split.valid, filter);
    };
    const GridResult result = grid_search(grid, train, score);
    for (const GridEntry& e : result.table) {
      table.push_back({{"config", ojson::parse(train_config_to_json(e.config))},
                       {"valid_pruned_mrr", e.score}});
    }
    best.train = result.best;
  } else {
    const auto grid =
        sample_kge_grid(w.cfg.kge, w.cfg.kge_grid_draws, derive_seed(w.cfg.seed, 7));
    if (grid.empty()) throw ValidationError("kge_grid_draws must be >= 1");
    double best_score = 0.0;
    bool have_best = false;
    for (const KgeTrainConfig& kc : grid) {
      KgeTrainConfig seeded = kc;
      seeded.seed = fold_seed(w.cfg, 0);
      const FoldModel model = train_model(w, 0, w.cfg.train, seeded, nullptr);
      const double s = pruned_mrr(w, model, split.valid, filter);
      table.push_back({{"config", ojson::parse(kge_config_to_json(kc))},
                       {"valid_pruned_mrr", s}});
      if (!have_best || s > best_score ||
          (s == best_score && kc.learning_rate < best.kge.learning_rate)) {
        best.kge = kc;
        best_score = s;
        have_best = true;
      }
    }
  }
  ojson j;
  j["model"] = to_string(w.cfg.model);
  j["fold"] = 0;
  j["table"] = std::move(table);
  j["best"] = is_policy(w.cfg.model) ? ojson::parse(train_config_to_json(best.train))
                                     : ojson::parse(kge_config_to_json(best.kge));
  fs::create_directories(w.cfg.out);
  write_file(w.cfg.out / "search.json", j.dump(2) + "\n");
  return best;
}

void train_all(const Workspace& w) {
  for (int fold : selected_folds(w.cfg)) {
    const fs::path dir = fold_dir(w.cfg, fold);
    fs::create_directories(dir);
    std::ofstream log(dir / "train_log.jsonl", std::ios::binary);
    if (!log) throw IoError("cannot write '" + (dir / "train_log.jsonl").string() + "'");
    const TrainConfig tc = fold_train_config(w, fold);
    const KgeTrainConfig kc = fold_kge_config(w, fold);
    const FoldModel model = [&] {
      try {
        return train_model(w, fold, tc, kc, &log);
      } catch (const Error& e) {
        throw TrainingError("fold " + std::to_string(fold) + ": " + e.what());
      }
    }();
    if (model.policy) {
      save_policy(dir / "checkpoint.bin", *model.policy, train_config_to_json(tc));
    } else {
      save_kge(dir / "checkpoint.bin", *model.kge, kge_config_to_json(kc));
    }
  }
}

RunSummary evaluate_all(const Workspace& w) {
  const RunConfig& cfg = w.cfg;
  std::map<std::pair<EntityId, RelationId>, PredictionList> dump;
  if (!cfg.predictions.empty()) {
    std::ifstream in(cfg.predictions);
    if (!in) throw IoError("cannot open prediction dump '" + cfg.predictions.string() + "'");
    for (PredictionList& list : read_prediction_dump(in, w.augmented)) {
      dump[{list.head, list.relation}] = std::move(list);
    }
  }

  RunSummary summary;
  std::vector<Rollout> witnesses;
  for (int fold : selected_folds(cfg)) {
    const DatasetSplit& split = w.splits.at(static_cast<std::size_t>(fold));
    const fs::path dir = fold_dir(cfg, fold);
    fs::create_directories(dir);
    const FilterSet filter = fold_filter(w, split);

    std::vector<PredictionList> lists;
    QueryRanks ranks;
    if (!cfg.predictions.empty()) {
      Predictor from_dump = [&dump](const Query& q) {
        auto it = dump.find({q.head, q.relation});
        if (it != dump.end()) return it->second;
        return PredictionList{q.head, q.relation, {}};
      };
      ranks = rank_test_triples(from_dump, split.test, w.kg, filter, &lists,
                                eval_threads());
    } else {
      const FoldModel model = load_model(w, fold);
      const WalkEnv env(model.augmented_train, model.env);
      ranks = rank_test_triples(make_predictor(w, model, &env), split.test, w.kg,
                                filter, &lists, eval_threads());
    }

    const FoldMetrics pre = compute_metrics(ranks.pre_pruning);
    const FoldMetrics post = compute_metrics(ranks.post_pruning);
    summary.report.pre_pruning.push_back(pre);
    summary.report.post_pruning.push_back(post);
    ojson fj;
    fj["fold"] = fold;
    fj["test_triples"] = split.test.size();
    fj["pre_pruning"] = fold_json(pre);
    fj["post_pruning"] = fold_json(post);
    write_file(dir / "metrics.json", fj.dump(2) + "\n");

    {
      std::ofstream out(dir / "predictions.jsonl", std::ios::binary);
      if (!out) throw IoError("cannot write '" + (dir / "predictions.jsonl").string() + "'");
      write_prediction_dump(out, lists, w.augmented);
    }
    const auto kept = retained(lists, w.task.type, w.kg, cfg.explain_top_k);
    {
      std::ofstream out(dir / "explanations.jsonl", std::ios::binary);
      if (!out) throw IoError("cannot write '" + (dir / "explanations.jsonl").string() + "'");
      export_explanations(out, kept, w.augmented);
    }
    for (const PredictionList& list : kept) {
      for (const Prediction& p : list.entries) {
        if (p.witness) witnesses.push_back(*p.witness);
      }
    }
  }

  if (summary.report.pre_pruning.size() >= 2) {
    summary.report.pre_aggregate = aggregate_folds(summary.report.pre_pruning);
    summary.report.post_aggregate = aggregate_folds(summary.report.post_pruning);
    const std::string name = to_string(cfg.model);
    const std::pair<std::string, AggregateMetrics> pre_row{name, *summary.report.pre_aggregate};
    const std::pair<std::string, AggregateMetrics> post_row{name, *summary.report.post_aggregate};
    summary.pre_table = format_metrics_table(
        "Filtered tail ranking, before type pruning", std::span(&pre_row, 1));
    summary.post_table = format_metrics_table(
        "Filtered tail ranking, after type pruning", std::span(&post_row, 1));
    write_file(cfg.out / "metrics_pre_pruning.txt", summary.pre_table);
    write_file(cfg.out / "metrics_post_pruning.txt", summary.post_table);
  }
  write_file(cfg.out / "metrics.json", metrics_report_to_json(summary.report));

  if (!witnesses.empty()) {
    const auto stats = metapath_frequencies(witnesses, w.augmented, cfg.metapath_top_k);
    write_file(cfg.out / "metapaths.txt", metapath_table_text(stats));
    write_file(cfg.out / "metapaths.json", metapath_table_json(stats));
  }
  return summary;
}

std::string config_hash_input(const RunConfig& cfg) {
  auto j = ojson::parse(run_config_to_json(cfg));
  j.erase("out");
  return j.dump();
}

void write_manifest(const Workspace& w, bool searched) {
  const RunConfig& cfg = w.cfg;
  ojson j;
  j["kgwalk_version"] = kVersion;
  j["checkpoint_format_version"] = 1;
  j["config_hash"] = hex64(fnv1a64(config_hash_input(cfg)));
  j["config"] = ojson::parse(run_config_to_json(cfg));
  j["grid_search_ran"] = searched;
  j["seed"] = cfg.seed;
  ojson seeds = ojson::array();
  for (int fold : selected_folds(cfg)) seeds.push_back(fold_seed(cfg, fold));
  j["fold_seeds"] = std::move(seeds);
  j["target_relation"] = w.kg.relation_name(w.task.relation);
  j["target_type"] = w.kg.type_name(w.task.type);
  j["inputs"]["triples_fnv1a64"] = hex64(fnv1a64(read_file(cfg.triples)));
  j["inputs"]["types_fnv1a64"] = hex64(fnv1a64(read_file(cfg.types)));
  if (!cfg.metapaths.empty()) {
    j["inputs"]["metapaths_fnv1a64"] = hex64(fnv1a64(read_file(cfg.metapaths)));
  }
  j["graph"]["entities"] = w.kg.entity_count();
  j["graph"]["triples"] = w.kg.triple_count();
  j["graph"]["relations"] = w.kg.relation_count() - 1;
  ojson folds = ojson::array();
  for (const DatasetSplit& s : w.splits) {
    folds.push_back({s.train.size(), s.valid.size(), s.test.size()});
  }
  j["fold_sizes"] = std::move(folds);
  write_file(cfg.out / "manifest.json", j.dump(2) + "\n");
}

}  // namespace

std::string to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::kMinerva: return "minerva";
    case ModelKind::kPolo: return "polo";
    case ModelKind::kTransE: return "transe";
    case ModelKind::kDistMult: return "distmult";
    case ModelKind::kEmbeddingGuided: return "embedding_guided";
  }
  return "unknown";
}

ModelKind model_kind_from_string(const std::string& name) {
  for (ModelKind k : {ModelKind::kMinerva, ModelKind::kPolo, ModelKind::kTransE,
                      ModelKind::kDistMult, ModelKind::kEmbeddingGuided}) {
    if (to_string(k) == name) return k;
  }
  throw ValidationError("unknown model '" + name +
                        "' (expected minerva, polo, transe, distmult or "
                        "embedding_guided)");
}

void RunConfig::validate() const {
  auto fail = [](const std::string& what) {
    throw ValidationError("invalid run config: " + what);
  };
  if (triples.empty()) fail("no triples file (--triples)");
  if (types.empty()) fail("no types file (--types)");
  if (task != "treats-repurposing" && task != "binds-target") {
    fail("task must be treats-repurposing or binds-target, got '" + task + "'");
  }
  if (model == ModelKind::kPolo && metapaths.empty()) {
    fail("model polo requires a metapath file (--metapaths)");
  }
  if (model == ModelKind::kPolo && !(train.lambda > 0.0) && !grid_search) {
    fail("model polo needs train.lambda > 0");
  }
  if (model == ModelKind::kMinerva && train.lambda != 0.0) {
    fail("model minerva uses train.lambda = 0");
  }
  if (folds < 2) fail("folds must be >= 2");
  if (!(valid_fraction >= 0.0 && valid_fraction < 1.0)) {
    fail("valid_fraction must be in [0, 1)");
  }
  if (beam_width < 1) fail("beam_width must be >= 1");
  if (fold >= folds) fail("fold index out of range");
  if (out.empty()) fail("no output directory (--out)");
  train.validate();
  kge.validate();
}

RunConfig run_config_from_json(const std::string& text, const fs::path& base_dir) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("run config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ValidationError("run config must be a JSON object");
  static const std::set<std::string> known{
      "triples", "types", "metapaths", "task", "target_relation", "target_type",
      "model", "seed", "folds", "valid_fraction", "out", "train", "kge",
      "beam_width", "grid_search", "kge_grid_draws", "explain_top_k",
      "metapath_top_k", "filter_test", "predictions", "fold"};
  for (const auto& [key, _] : j.items()) {
    if (!known.contains(key)) throw ValidationError("unknown run config key '" + key + "'");
  }
  RunConfig c;
  try {
    auto path = [&](const char* key, fs::path& field) {
      if (!j.contains(key)) return;
      fs::path p = j.at(key).get<std::string>();
      if (p.is_relative() && !base_dir.empty() && !p.empty()) p = base_dir / p;
      field = p;
    };
    auto read = [&j](const char* key, auto& field) {
      if (j.contains(key)) field = j.at(key).get<std::decay_t<decltype(field)>>();
    };
    path("triples", c.triples);
    path("types", c.types);
    path("metapaths", c.metapaths);
    path("out", c.out);
    path("predictions", c.predictions);
    read("task", c.task);
    read("target_relation", c.target_relation);
    read("target_type", c.target_type);
    if (j.contains("model")) c.model = model_kind_from_string(j.at("model").get<std::string>());
    read("seed", c.seed);
    read("folds", c.folds);
    read("valid_fraction", c.valid_fraction);
    read("beam_width", c.beam_width);
    read("grid_search", c.grid_search);
    read("kge_grid_draws", c.kge_grid_draws);
    read("explain_top_k", c.explain_top_k);
    read("metapath_top_k", c.metapath_top_k);
    read("filter_test", c.filter_test);
    read("fold", c.fold);
    if (j.contains("train")) c.train = train_config_from_json(j.at("train").dump());
    if (j.contains("kge")) c.kge = kge_config_from_json(j.at("kge").dump());
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("run config has a field of the wrong type: ") +
                          e.what());
  }
  return c;
}

RunConfig load_run_config(const fs::path& path) {
  return run_config_from_json(read_file(path), path.parent_path());
}

std::string run_config_to_json(const RunConfig& c) {
  ojson j;
  j["triples"] = c.triples.string();
  j["types"] = c.types.string();
  j["metapaths"] = c.metapaths.string();
  j["task"] = c.task;
  j["target_relation"] = c.target_relation;
  j["target_type"] = c.target_type;
  j["model"] = to_string(c.model);
  j["seed"] = c.seed;
  j["folds"] = c.folds;
  j["valid_fraction"] = c.valid_fraction;
  j["out"] = c.out.string();
  j["train"] = ojson::parse(train_config_to_json(c.train));
  j["kge"] = ojson::parse(kge_config_to_json(c.kge));
  j["beam_width"] = c.beam_width;
  j["grid_search"] = c.grid_search;
  j["kge_grid_draws"] = c.kge_grid_draws;
  j["explain_top_k"] = c.explain_top_k;
  j["metapath_top_k"] = c.metapath_top_k;
  j["filter_test"] = c.filter_test;
  j["predictions"] = c.predictions.string();
  j["fold"] = c.fold;
  return j.dump(2) + "\n";
}

ResolvedTask resolve_task(const RunConfig& cfg, const KnowledgeGraph& kg) {
  const bool treats = cfg.task == "treats-repurposing";
  std::vector<std::string> relations;
  if (!cfg.target_relation.empty()) {
    relations = {cfg.target_relation};
  } else if (treats) {
    relations = {"treats", "CtD"};
  } else {
    relations = {"binds", "CbG"};
  }
  const std::string type_name =
      !cfg.target_type.empty() ? cfg.target_type : (treats ? "Disease" : "Gene");
  ResolvedTask task;
  bool found = false;
  for (const std::string& name : relations) {
    if (auto r = kg.find_relation(name)) {
      task.relation = *r;
      found = true;
      break;
    }
  }
  if (!found) {
    std::string tried;
    for (const auto& r : relations) tried += (tried.empty() ? "'" : ", '") + r + "'";
    throw ValidationError("target relation " + tried + " of task " + cfg.task +
                          " not found in the graph; set target_relation");
  }
  auto type = kg.find_type(type_name);
  if (!type) {
    throw ValidationError("target type '" + type_name +
                          "' not found in the graph; set target_type");
  }
  task.type = *type;
  return task;
}

std::uint64_t fold_seed(const RunConfig& cfg, int fold) {
  return derive_seed(cfg.seed, static_cast<std::uint64_t>(fold) + 1);
}

int eval_threads() {
  const char* env = std::getenv("KGWALK_THREADS");
  if (env == nullptr) return 1;
  const int n = std::atoi(env);
  return n >= 1 ? n : 1;
}

StatsReport cmd_stats(const RunConfig& cfg) {
  if (cfg.triples.empty()) throw ValidationError("stats needs a triples file (--triples)");
  if (cfg.types.empty()) throw ValidationError("stats needs a types file (--types)");
  const KnowledgeGraph kg = load_graph(cfg.triples, cfg.types);
  StatsReport report;
  report.stats = graph_stats(kg);
  std::optional<ResolvedTask> task;
  try {
    task = resolve_task(cfg, kg);
  } catch (const ValidationError&) {
    task.reset();
  }
  if (task && cfg.folds >= 2) {
    for (const DatasetSplit& s :
         split_folds(kg, task->relation, cfg.folds, cfg.seed, cfg.valid_fraction)) {
      report.fold_sizes.push_back({s.train.size(), s.valid.size(), s.test.size()});
    }
  }
  if (!cfg.out.empty()) {
    fs::create_directories(cfg.out);
    write_file(cfg.out / "stats.txt", stats_report_text(report));
    write_file(cfg.out / "stats.json", stats_report_json(report));
  }
  return report;
}

std::string stats_report_text(const StatsReport& report) {
  std::string out = stats_to_text(report.stats);
  for (std::size_t i = 0; i < report.fold_sizes.size(); ++i) {
    const auto& s = report.fold_sizes[i];
    out += "fold_" + std::to_string(i) + "_train_valid_test\t" + std::to_string(s[0]) +
           "/" + std::to_string(s[1]) + "/" + std::to_string(s[2]) + "\n";
  }
  return out;
}

std::string stats_report_json(const StatsReport& report) {
  auto j = ojson::parse(stats_to_json(report.stats));
  if (!report.fold_sizes.empty()) {
    ojson folds = ojson::array();
    for (const auto& s : report.fold_sizes) {
      folds.push_back({{"train", s[0]}, {"valid", s[1]}, {"test", s[2]}});
    }
    j["fold_sizes"] = std::move(folds);
  }
  return j.dump(2) + "\n";
}

RunConfig cmd_search(const RunConfig& cfg) {
  return search(open_workspace(cfg));
}

void cmd_train(const RunConfig& cfg) {
  train_all(open_workspace(cfg));
}

RunSummary cmd_eval(const RunConfig& cfg) {
  return evaluate_all(open_workspace(cfg));
}

RunSummary cmd_run(const RunConfig& cfg) {
  cfg.validate();
  fs::create_directories(cfg.out);
  const fs::path marker = cfg.out / "INCOMPLETE";
  write_file(marker, "run in progress\n");
  try {
    Workspace w = open_workspace(cfg);
    const bool searched = cfg.grid_search;
    if (searched) w.cfg = search(w);
    train_all(w);
    RunSummary summary = evaluate_all(w);
    write_manifest(w, searched);
    fs::remove(marker);
    return summary;
  } catch (const std::exception& e) {
    // Leave the marker so partial outputs are not mistaken for a finished run.
    write_file(marker, std::string("run failed: ") + e.what() + "\n");
    throw;
  }
}

RunConfig write_planted_dataset(const PlantedGraphSpec& spec, const fs::path& dir) {
  const PlantedGraph planted = generate_planted(spec);
  fs::create_directories(dir);
  write_graph_tsv(planted.graph, dir / "triples.tsv", dir / "types.tsv");
  const Metapath rule = planted_rule(planted.graph);
  std::string line;
  for (std::size_t i = 0; i < rule.relations.size(); ++i) {
    line += planted.graph.type_name(rule.types[i]) + "\t" +
            planted.graph.relation_name(rule.relations[i]) + "\t";
  }
  line += planted.graph.type_name(rule.types.back()) + "\n";
  write_file(dir / "metapaths.tsv", line);

  RunConfig cfg;
  cfg.triples = dir / "triples.tsv";
  cfg.types = dir / "types.tsv";
  cfg.metapaths = dir / "metapaths.tsv";
  cfg.task = "treats-repurposing";
  cfg.model = ModelKind::kMinerva;
  cfg.seed = spec.seed;
  cfg.folds = 5;
  cfg.out = dir / "run";
  cfg.train.embed_dim = 32;
  cfg.train.hidden_dim = 32;
  cfg.train.batch_size = 16;
  cfg.train.rollouts_per_query = 8;
  cfg.train.total_batches = 2000;
  cfg.kge.dim = 32;
  cfg.kge.max_steps = 20000;
  // Written with paths relative to `dir` so the dataset can be moved.
  auto j = ojson::parse(run_config_to_json(cfg));
  j["triples"] = "triples.tsv";
  j["types"] = "types.tsv";
  j["metapaths"] = "metapaths.tsv";
  j["out"] = "run";
  j.erase("predictions");
  write_file(dir / "config.json", j.dump(2) + "\n");
  return cfg;
}

}  // namespace kgwalk
