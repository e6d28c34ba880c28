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

#include "kgwalk/walk_env.hpp"

#include <algorithm>
#include <fstream>
#include <map>

namespace kgwalk {

bool Query::is_answer(EntityId e) const {
  return std::binary_search(answers.begin(), answers.end(), e);
}

std::vector<Query> group_queries(const KnowledgeGraph& kg,
                                 std::span<const Triple> triples) {
  std::map<std::pair<EntityId, RelationId>, std::vector<EntityId>> grouped;
  for (const Triple& t : triples) grouped[{t.head, t.relation}].push_back(t.tail);
  std::vector<Query> queries;
  queries.reserve(grouped.size());
  for (auto& [key, tails] : grouped) {
    std::sort(tails.begin(), tails.end());
    tails.erase(std::unique(tails.begin(), tails.end()), tails.end());
    Query q;
    q.head = key.first;
    q.relation = key.second;
    q.target_type = kg.entity_type(tails.front());
    for (EntityId t : tails) {
      if (kg.entity_type(t) != q.target_type) {
        throw ValidationError("answers of (" + kg.entity_key(q.head) + ", " +
                              kg.relation_name(q.relation) +
                              ", ?) have mixed entity types");
      }
    }
    q.answers = std::move(tails);
    queries.push_back(std::move(q));
  }
  return queries;
}

bool Metapath::valid() const {
  if (relations.empty() || types.size() != relations.size() + 1) return false;
  return std::find(relations.begin(), relations.end(), kNoOpRelation) ==
         relations.end();
}

WalkEnv::WalkEnv(const KnowledgeGraph& kg, EnvConfig config)
    : kg_(&kg), config_(config) {
  if (config_.max_steps < 1) throw ValidationError("max_steps must be >= 1");
  actions_.reserve(kg.entity_count());
  for (EntityId e = 0; e < kg.entity_count(); ++e) {
    actions_.push_back(out_actions(kg, e, config_.max_out, config_.action_seed));
  }
}

WalkState WalkEnv::reset(const Query& query, WalkMode mode) const {
  if (query.head >= kg_->entity_count()) {
    throw ValidationError("query head " + std::to_string(query.head) +
                          " is not a registered entity");
  }
  WalkState state;
  state.query = &query;
  state.mode = mode;
  state.current = query.head;
  state.step = 0;
  return state;
}

std::vector<Action> WalkEnv::legal_actions(const WalkState& state) const {
  if (terminal(state)) {
    throw ValidationError("legal_actions called on a terminal state");
  }
  const auto& all = actions_[state.current];
  if (state.mode != WalkMode::kTrain || state.current != state.query->head) {
    return std::vector<Action>(all.begin(), all.end());
  }
  std::vector<Action> out;
  out.reserve(all.size());
  for (const Action& a : all) {
    if (a.relation == state.query->relation && state.query->is_answer(a.entity)) {
      continue;
    }
    out.push_back(a);
  }
  return out;
}

WalkState WalkEnv::step(const WalkState& state, std::size_t action_index) const {
  const auto actions = legal_actions(state);
  return step(state, actions, action_index);
}

WalkState WalkEnv::step(const WalkState& state, std::span<const Action> actions,
                        std::size_t action_index) const {
  if (terminal(state)) throw ValidationError("step called on a terminal state");
  if (action_index >= actions.size()) {
    throw ValidationError("action index " + std::to_string(action_index) +
                          " out of range (" + std::to_string(actions.size()) +
                          " legal actions)");
  }
  WalkState next = state;
  next.current = actions[action_index].entity;
  next.history.push_back(actions[action_index]);
  ++next.step;
  return next;
}

bool match_metapath(const Rollout& path, const Metapath& mp,
                    const KnowledgeGraph& kg) {
  if (mp.types.empty() || mp.types.front() != kg.entity_type(path.head)) {
    return false;
  }
  std::size_t k = 0;
  for (const Action& a : path.steps) {
    if (a.relation == kNoOpRelation) continue;
    if (k >= mp.relations.size() || mp.relations[k] != a.relation ||
        mp.types[k + 1] != kg.entity_type(a.entity)) {
      return false;
    }
    ++k;
  }
  return k == mp.relations.size() && k > 0;
}

double terminal_reward(const Rollout& path, const Query& query,
                       std::span<const Metapath> metapaths,
                       const EpisodeConfig& cfg, const KnowledgeGraph& kg) {
  double reward = query.is_answer(path.terminal()) ? cfg.terminal_reward : 0.0;
  if (cfg.lambda != 0.0) {
    for (const Metapath& mp : metapaths) {
      if (match_metapath(path, mp, kg)) {
        reward += cfg.lambda;
        break;
      }
    }
  }
  return reward;
}

Metapath parse_metapath(const std::string& line, const KnowledgeGraph& kg) {
  std::vector<std::string> tokens;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find('\t', start);
    tokens.push_back(line.substr(start, pos == std::string::npos ? pos : pos - start));
    if (pos == std::string::npos) break;
    start = pos + 1;
  }
  if (tokens.size() < 3 || tokens.size() % 2 == 0) {
    throw ValidationError("metapath needs an odd number (>= 3) of tokens: '" +
                          line + "'");
  }
  Metapath mp;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i % 2 == 0) {
      mp.types.push_back(kg.type_id(tokens[i]));
    } else {
      const RelationId r = kg.relation_id(tokens[i]);
      if (r == kNoOpRelation) {
        throw ValidationError("metapath may not contain NO_OP");
      }
      mp.relations.push_back(r);
    }
  }
  mp.name = render_metapath(mp, kg);
  return mp;
}

std::vector<Metapath> load_metapaths(const std::filesystem::path& path,
                                     const KnowledgeGraph& kg) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open metapath file '" + path.string() + "'");
  std::vector<Metapath> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    try {
      out.push_back(parse_metapath(line, kg));
    } catch (const ValidationError& e) {
      throw ParseError(path.string(), line_no, e.what());
    }
  }
  return out;
}

std::string render_metapath(const Metapath& mp, const KnowledgeGraph& kg) {
  std::string out;
  for (std::size_t i = 0; i < mp.types.size(); ++i) {
    if (i > 0) out += " -" + kg.relation_name(mp.relations[i - 1]) + "-> ";
    out += kg.type_name(mp.types[i]);
  }
  return out;
}

}  // namespace kgwalk
