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

// Filtered, tail-sided ranking evaluation.
//
// Ranks are pessimistic: an answer tied with k other candidates is placed
// after all of them. Entities a model did not list ("failed walks") rank
// behind every listed candidate, again pessimistically among themselves, so
// an unlisted answer gets the last rank of the candidate universe.
//
// Pruning restricts both the list and the universe to the query's target
// entity type.

#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "kgwalk/kg_store.hpp"
#include "kgwalk/predictions.hpp"
#include "kgwalk/walk_env.hpp"

namespace kgwalk {

// Known-true tails per (head, relation).
class FilterSet {
 public:
  FilterSet() = default;
  void add(std::span<const Triple> triples);
  // Sorted; empty when none.
  std::span<const EntityId> known_tails(EntityId head, RelationId relation) const;
  bool contains(EntityId head, RelationId relation, EntityId tail) const;

 private:
  static std::uint64_t key(EntityId h, RelationId r) {
    return (static_cast<std::uint64_t>(h) << 32) | r;
  }
  std::unordered_map<std::uint64_t, std::vector<EntityId>> tails_;
};

// Candidate universe: every entity of `kg`, or only those of `type`.
struct CandidateUniverse {
  const KnowledgeGraph* kg = nullptr;
  std::optional<TypeId> type;

  std::size_t size() const;
  bool contains(EntityId e) const;
};

// Throws ValidationError when the answer is not an entity of the universe's
// graph or when `predictions` lists an entity twice.
std::size_t filtered_rank(const PredictionList& predictions, EntityId answer,
                          const FilterSet& filter,
                          const CandidateUniverse& universe);

PredictionList prune_by_type(const PredictionList& predictions,
                             TypeId target_type, const KnowledgeGraph& kg);

struct FoldMetrics {
  double hits1 = 0.0;
  double hits3 = 0.0;
  double hits10 = 0.0;
  double mrr = 0.0;
  std::size_t count = 0;
};

FoldMetrics compute_metrics(std::span<const std::size_t> ranks);

struct MetricSummary {
  double mean = 0.0;
  // Sample standard deviation over folds / sqrt(folds).
  double standard_error = 0.0;
};

struct AggregateMetrics {
  MetricSummary hits1, hits3, hits10, mrr;
  std::size_t folds = 0;
};

AggregateMetrics aggregate_folds(std::span<const FoldMetrics> per_fold);

struct MetricsReport {
  std::vector<FoldMetrics> pre_pruning;
  std::vector<FoldMetrics> post_pruning;
  std::optional<AggregateMetrics> pre_aggregate;
  std::optional<AggregateMetrics> post_aggregate;
};

struct QueryRanks {
  std::vector<std::size_t> pre_pruning;
  std::vector<std::size_t> post_pruning;
};

using Predictor = std::function<PredictionList(const Query&)>;

// Groups `test` by (head, relation), asks `predict` once per group (in
// parallel over `threads` workers), and ranks every test triple's tail
// before and after type pruning. Output order follows `test`.
QueryRanks rank_test_triples(const Predictor& predict,
                             std::span<const Triple> test,
                             const KnowledgeGraph& kg, const FilterSet& filter,
                             std::vector<PredictionList>* predictions = nullptr,
                             int threads = 1);

// "Model | HITS@1 | HITS@3 | HITS@10 | MRR" with `.463±.041` cells.
std::string format_metrics_table(
    const std::string& title,
    std::span<const std::pair<std::string, AggregateMetrics>> rows);
std::string fold_metrics_to_json(const FoldMetrics& m);
std::string metrics_report_to_json(const MetricsReport& report);

}  // namespace kgwalk
