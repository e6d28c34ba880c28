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

// Walk environment over an augmented graph.
//
// An episode answers a query (head, relation, ?) by taking exactly
// `max_steps` actions from the head; NO_OP lets the walker stop early. The
// environment itself is stateless: WalkState values carry the episode.

#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "kgwalk/kg_store.hpp"

namespace kgwalk {

struct Query {
  EntityId head = 0;
  RelationId relation = 0;
  // Sorted. Hidden from the walker; only the reward looks at it.
  std::vector<EntityId> answers;
  TypeId target_type = 0;

  bool is_answer(EntityId e) const;
};

// Queries grouped by (head, relation): answers are every tail of `triples`
// for that pair. Heads appear in ascending order.
std::vector<Query> group_queries(const KnowledgeGraph& kg,
                                 std::span<const Triple> triples);

// A finished (or partial) walk.
struct Rollout {
  EntityId head = 0;
  RelationId query_relation = 0;
  std::vector<Action> steps;
  double log_probability = 0.0;

  EntityId terminal() const { return steps.empty() ? head : steps.back().entity; }
};

enum class WalkMode { kTrain, kEval };

struct WalkState {
  const Query* query = nullptr;
  WalkMode mode = WalkMode::kEval;
  EntityId current = 0;
  int step = 0;
  std::vector<Action> history;
};

// Alternating type/relation pattern: types.size() == relations.size() + 1.
struct Metapath {
  std::vector<TypeId> types;
  std::vector<RelationId> relations;
  std::string name;

  // At least one relation and no NO_OP.
  bool valid() const;
  bool same_pattern(const Metapath& other) const {
    return types == other.types && relations == other.relations;
  }
};

struct EnvConfig {
  int max_steps = 3;
  std::size_t max_out = kDefaultMaxOutDegree;
  std::uint64_t action_seed = 0;
};

struct EpisodeConfig {
  double lambda = 0.0;
  double terminal_reward = 1.0;
};

class WalkEnv {
 public:
  WalkEnv(const KnowledgeGraph& kg, EnvConfig config);

  const KnowledgeGraph& graph() const { return *kg_; }
  const EnvConfig& config() const { return config_; }

  WalkState reset(const Query& query, WalkMode mode) const;
  // In kTrain mode the edges (query.relation, answer) leaving the query head
  // are removed, at every step, so a NO_OP cannot unlock them.
  std::vector<Action> legal_actions(const WalkState& state) const;
  WalkState step(const WalkState& state, std::size_t action_index) const;
  // Same as above with an already computed legal_actions(state).
  WalkState step(const WalkState& state, std::span<const Action> actions,
                 std::size_t action_index) const;
  bool terminal(const WalkState& state) const {
    return state.step >= config_.max_steps;
  }
  // Capped action list of an entity, NO_OP first.
  std::span<const Action> actions_of(EntityId e) const { return actions_[e]; }

 private:
  const KnowledgeGraph* kg_;
  EnvConfig config_;
  std::vector<std::vector<Action>> actions_;
};

bool match_metapath(const Rollout& path, const Metapath& mp,
                    const KnowledgeGraph& kg);

// terminal_reward * [terminal is an answer] + lambda * [any metapath matches].
double terminal_reward(const Rollout& path, const Query& query,
                       std::span<const Metapath> metapaths,
                       const EpisodeConfig& cfg, const KnowledgeGraph& kg);

// One pattern per line: Type<TAB>relation<TAB>Type<TAB>...<TAB>Type.
std::vector<Metapath> load_metapaths(const std::filesystem::path& path,
                                     const KnowledgeGraph& kg);
Metapath parse_metapath(const std::string& line, const KnowledgeGraph& kg);
std::string render_metapath(const Metapath& mp, const KnowledgeGraph& kg);

}  // namespace kgwalk
