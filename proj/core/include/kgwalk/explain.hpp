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

// Witness paths -> metapaths, frequency tables and explanation exports.

#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "kgwalk/kg_store.hpp"
#include "kgwalk/predictions.hpp"
#include "kgwalk/walk_env.hpp"

namespace kgwalk {

// Type-level pattern of a path with NO_OP steps removed. An all-NO_OP path
// gives the single-type pattern of its head.
Metapath abstract_path(const Rollout& path, const KnowledgeGraph& kg);

struct MetapathStat {
  Metapath metapath;
  std::size_t count = 0;
  double percent = 0.0;
};

// Groups paths by metapath; most frequent first, ties by rendered pattern.
// percent = 100 * count / paths.size().
std::vector<MetapathStat> metapath_frequencies(std::span<const Rollout> paths,
                                               const KnowledgeGraph& kg,
                                               std::size_t top_k);

std::string metapath_table_text(std::span<const MetapathStat> stats);
std::string metapath_table_json(std::span<const MetapathStat> stats);

struct Explanation {
  EntityId head = 0;
  RelationId relation = 0;
  EntityId predicted = 0;
  double score = 0.0;
  Rollout path;
};

// One JSON record per prediction that carries a witness, best score first:
// query, candidate, score, rendered path (display names, NO_OP omitted) and
// its metapath.
void export_explanations(std::ostream& out, std::span<const PredictionList> lists,
                         const KnowledgeGraph& kg);
void export_explanations(const PredictionList& predictions,
                         const KnowledgeGraph& kg,
                         const std::filesystem::path& path);

std::vector<Explanation> read_explanations(std::istream& in,
                                           const KnowledgeGraph& kg);

}  // namespace kgwalk
