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

#pragma once

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "kgwalk/kg_store.hpp"
#include "kgwalk/walk_env.hpp"

namespace kgwalk {

struct Prediction {
  EntityId entity = 0;
  double score = 0.0;
  // Best path that reached `entity`; absent for embedding rankers.
  std::optional<Rollout> witness;
};

// Scored candidate tails for one (head, relation, ?) query. Entities that
// are not listed were never reached.
struct PredictionList {
  EntityId head = 0;
  RelationId relation = 0;
  std::vector<Prediction> entries;
};

// Score descending, entity id ascending on ties.
void sort_predictions(PredictionList& list);

struct PathStyle {
  bool display_names = false;
  bool include_noop = true;
};

// `e0 -r1-> e1 -r2-> e2`
std::string render_path(const Rollout& path, const KnowledgeGraph& kg,
                        PathStyle style = {});

// Inverse of render_path. Entity tokens are resolved as keys first, then as
// display names.
Rollout parse_path(std::string_view text, const KnowledgeGraph& kg,
                   RelationId query_relation);

// True iff every non-NO_OP step is an edge of `kg`, starting at path.head.
bool validate_witness(const Rollout& path, const KnowledgeGraph& kg);

// Line-delimited JSON: one record per (query, candidate) with fields head,
// relation, candidate, score, witness (string or null).
void write_prediction_dump(std::ostream& out,
                           std::span<const PredictionList> lists,
                           const KnowledgeGraph& kg);
// Groups records by (head, relation) in first-seen order and sorts each list.
std::vector<PredictionList> read_prediction_dump(std::istream& in,
                                                 const KnowledgeGraph& kg);

}  // namespace kgwalk
