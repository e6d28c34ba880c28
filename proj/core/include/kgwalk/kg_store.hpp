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

// Typed multi-relational triple store.
//
// A KnowledgeGraph is immutable once built. Entity ids are dense in
// [0, entity_count()), relation ids in [0, relation_count()). Relation 0 is
// always the reserved NO_OP relation; it never appears in the triple set and
// is only used as the self-loop action of the walk environment.
//
// Inverse edges are added explicitly by augment_inverses(); the raw graph
// (as loaded) is what graph_stats() profiles.

#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "kgwalk/common.hpp"

namespace kgwalk {

inline constexpr RelationId kNoOpRelation = 0;
inline constexpr std::string_view kNoOpName = "__no_op__";
inline constexpr std::string_view kInverseSuffix = "__inv";
inline constexpr std::size_t kDefaultMaxOutDegree = 200;

struct Triple {
  EntityId head = 0;
  RelationId relation = 0;
  EntityId tail = 0;

  friend auto operator<=>(const Triple&, const Triple&) = default;
};

// One outgoing move of a walker: follow `relation` to `entity`.
struct Action {
  RelationId relation = 0;
  EntityId entity = 0;

  friend auto operator<=>(const Action&, const Action&) = default;
};

struct LoadReport {
  std::size_t triple_lines = 0;
  std::size_t duplicates_dropped = 0;
  std::size_t comment_lines = 0;
};

// Entity vocabulary shared (read-only) between a graph and the graphs
// derived from it.
struct EntityTable {
  std::vector<std::string> keys;
  std::vector<std::string> display_names;
  std::vector<TypeId> types;
  std::vector<std::string> type_names;
  std::unordered_map<std::string, EntityId> by_key;
};

class KnowledgeGraph {
 public:
  // `relation_names[0]` must be kNoOpName. `inverse_of` is either empty
  // (raw graph) or has one entry per relation.
  KnowledgeGraph(std::shared_ptr<const EntityTable> entities,
                 std::vector<std::string> relation_names,
                 std::vector<RelationId> inverse_of,
                 std::vector<Triple> triples);

  std::size_t entity_count() const { return entities_->keys.size(); }
  std::size_t relation_count() const { return relation_names_.size(); }
  std::size_t type_count() const { return entities_->type_names.size(); }
  std::size_t triple_count() const { return triples_.size(); }

  const std::string& entity_key(EntityId e) const { return entities_->keys[e]; }
  const std::string& entity_name(EntityId e) const {
    return entities_->display_names[e];
  }
  TypeId entity_type(EntityId e) const { return entities_->types[e]; }
  const std::string& type_name(TypeId t) const {
    return entities_->type_names[t];
  }
  const std::string& relation_name(RelationId r) const {
    return relation_names_[r];
  }

  std::optional<EntityId> find_entity(std::string_view key) const;
  std::optional<RelationId> find_relation(std::string_view name) const;
  std::optional<TypeId> find_type(std::string_view name) const;
  // Throwing lookups (ValidationError on unknown names).
  EntityId entity_id(std::string_view key) const;
  RelationId relation_id(std::string_view name) const;
  TypeId type_id(std::string_view name) const;

  bool augmented() const { return !inverse_of_.empty(); }
  // Inverse relation id; kInvalidId on a raw graph. NO_OP is its own inverse.
  RelationId inverse(RelationId r) const;

  // Sorted, duplicate-free.
  std::span<const Triple> triples() const { return triples_; }
  // Outgoing (relation, tail) pairs of `e`, sorted by (relation, tail).
  std::span<const Action> outgoing(EntityId e) const;
  bool has_edge(EntityId head, RelationId relation, EntityId tail) const;

  std::vector<EntityId> entities_of_type(TypeId type) const;
  std::size_t count_of_type(TypeId type) const;

  // Graph over the same entity and relation vocabulary with a different
  // (raw, non-augmented) triple set.
  KnowledgeGraph with_triples(std::vector<Triple> triples) const;

  std::shared_ptr<const EntityTable> entity_table() const { return entities_; }
  const std::vector<std::string>& relation_names() const {
    return relation_names_;
  }
  const LoadReport& load_report() const { return report_; }
  void set_load_report(const LoadReport& report) { report_ = report; }

 private:
  std::shared_ptr<const EntityTable> entities_;
  std::vector<std::string> relation_names_;
  std::vector<RelationId> inverse_of_;
  std::vector<Triple> triples_;
  std::vector<std::size_t> offsets_;
  std::vector<Action> adjacency_;
  std::vector<std::size_t> type_counts_;
  LoadReport report_;
};

// Reads `head<TAB>relation<TAB>tail` triples and `entity<TAB>type` types.
// A three-column types file is read as `entity<TAB>display-name<TAB>type`
// (the Hetionet nodes layout). Lines starting with '#' are skipped, as is a
// leading Hetionet header row.
KnowledgeGraph load_graph(const std::filesystem::path& triples_path,
                          const std::filesystem::path& types_path);

// Writes the raw triple set and the type table in the formats load_graph
// accepts. Inverse triples of an augmented graph are not written.
void write_graph_tsv(const KnowledgeGraph& kg,
                     const std::filesystem::path& triples_path,
                     const std::filesystem::path& types_path);

// Adds r^-1 (named `<r>__inv`) for every raw relation and (t, r^-1, h) for
// every (h, r, t).
KnowledgeGraph augment_inverses(const KnowledgeGraph& kg);

// Action list of `e`: (NO_OP, e) first, then outgoing edges in sorted order.
// When the out-degree exceeds max_out - 1, a uniform subsample drawn from a
// stream keyed by (seed, e) is kept, still in sorted order.
std::vector<Action> out_actions(const KnowledgeGraph& kg, EntityId e,
                                std::size_t max_out, std::uint64_t seed = 0);

struct DatasetSplit {
  std::vector<Triple> train;
  std::vector<Triple> valid;
  std::vector<Triple> test;
  RelationId target_relation = 0;
  int fold_index = 0;
  std::uint64_t seed = 0;
};

// k-fold split of the target-relation triples. Each triple lands in exactly
// one test fold; the remainder of each fold is split train/valid by
// `valid_fraction`.
std::vector<DatasetSplit> split_folds(const KnowledgeGraph& kg,
                                      RelationId target_relation, int k,
                                      std::uint64_t seed,
                                      double valid_fraction = 0.2);

// Raw graph a model is trained on for `split`: every non-target triple plus
// the split's training triples.
KnowledgeGraph training_graph(const KnowledgeGraph& kg,
                              const DatasetSplit& split);

struct GraphStats {
  std::size_t node_count = 0;
  std::size_t edge_count = 0;
  std::size_t node_type_count = 0;
  std::size_t edge_type_count = 0;
  double mean_degree = 0.0;
  std::vector<std::pair<double, double>> degree_percentiles;
  double degree_skew = 0.0;
};

// Undirected-degree statistics over the raw triple set. Percentiles use the
// nearest-rank method.
GraphStats graph_stats(const KnowledgeGraph& kg);
std::string stats_to_text(const GraphStats& stats);
std::string stats_to_json(const GraphStats& stats);

}  // namespace kgwalk
