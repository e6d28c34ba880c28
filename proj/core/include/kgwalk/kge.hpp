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

// TransE and DistMult baselines.

#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "kgwalk/kg_store.hpp"
#include "kgwalk/predictions.hpp"
#include "kgwalk/tensor.hpp"

namespace kgwalk {

enum class KgeKind { kTransE, kDistMult };

std::string to_string(KgeKind kind);
KgeKind kge_kind_from_string(const std::string& name);

struct KgeParams {
  KgeKind kind = KgeKind::kTransE;
  Matrix entity_emb;
  Matrix relation_emb;

  int dim() const { return static_cast<int>(entity_emb.cols()); }
  std::vector<TensorRef> tensors();
  std::vector<TensorRef> tensors() const {
    return const_cast<KgeParams*>(this)->tensors();
  }
};

struct KgeTrainConfig {
  int dim = 128;
  double learning_rate = 0.01;
  int negatives_per_positive = 16;
  int max_steps = 12000;
  double margin = 1.0;
  // Reject corrupted triples that are present in the training graph.
  bool filtered_negatives = false;
  std::uint64_t seed = 0;

  void validate() const;
};

std::string kge_config_to_json(const KgeTrainConfig& cfg);
KgeTrainConfig kge_config_from_json(const std::string& json,
                                    const KgeTrainConfig& base = {});

// Higher is more plausible for both models.
//   TransE:   -|| e_h + e_r - e_t ||_2
//   DistMult: sum_i e_r[i] * e_h[i] * e_t[i]
double score(const KgeParams& params, EntityId head, RelationId relation,
             EntityId tail);

KgeParams init_kge(KgeKind kind, std::size_t entity_count,
                   std::size_t relation_count, int dim, std::uint64_t seed);

struct KgeLossPoint {
  int step = 0;
  double loss = 0.0;
};

struct KgeTrainResult {
  KgeParams params;
  // Mean loss of the window ending at `step` (every 1,000 steps and at the
  // end), plus the loss of the very first step at step 0.
  std::vector<KgeLossPoint> loss_log;
};

// One positive triple per step, paired with `negatives_per_positive`
// corruptions (head or tail with equal probability). TransE minimizes the
// margin ranking loss, DistMult the logistic loss; plain SGD.
KgeTrainResult train_kge(const KnowledgeGraph& train_graph, KgeKind kind,
                         const KgeTrainConfig& cfg);

// Corrupted triple for `positive`; with `filtered`, redraws until the triple
// is absent from `kg` (gives up after a bounded number of attempts and
// returns the last draw with ok = false).
struct Corruption {
  Triple triple;
  bool ok = true;
};
Corruption corrupt_triple(const KnowledgeGraph& kg, const Triple& positive,
                          bool filtered, Rng& rng);

// Every entity as a candidate tail of (head, relation, ?), best first; ties
// by entity id. Entries carry no witness path.
PredictionList rank_tails(const KgeParams& params, EntityId head,
                          RelationId relation);

// Learning rates drawn log-uniformly from [0.001, 0.2].
std::vector<KgeTrainConfig> sample_kge_grid(const KgeTrainConfig& base,
                                            int draws, std::uint64_t seed);

void save_kge(const std::filesystem::path& path, const KgeParams& params,
              const std::string& metadata_json);
KgeParams load_kge(const std::filesystem::path& path);

}  // namespace kgwalk
