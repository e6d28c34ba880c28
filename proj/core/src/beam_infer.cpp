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

#include "kgwalk/beam_infer.hpp"

#include <algorithm>
#include <unordered_map>

namespace kgwalk {

namespace {

struct BeamNode {
  Vector hidden;
  EntityId current = 0;
  double log_prob = 0.0;
  std::vector<Action> steps;
};

struct Candidate {
  double log_prob;
  std::size_t beam;
  std::size_t action;
};

void select_top(std::vector<Candidate>& candidates, std::size_t width) {
  auto better = [](const Candidate& a, const Candidate& b) {
    if (a.log_prob != b.log_prob) return a.log_prob > b.log_prob;
    if (a.beam != b.beam) return a.beam < b.beam;
    return a.action < b.action;
  };
  if (candidates.size() > width) {
    std::nth_element(candidates.begin(),
                     candidates.begin() + static_cast<std::ptrdiff_t>(width),
                     candidates.end(), better);
    candidates.resize(width);
  }
  std::sort(candidates.begin(), candidates.end(), better);
}

PredictionList group_by_terminal(const Query& query,
                                 std::vector<Rollout> paths) {
  PredictionList list;
  list.head = query.head;
  list.relation = query.relation;
  std::unordered_map<EntityId, std::size_t> index;
  for (Rollout& path : paths) {
    const EntityId e = path.terminal();
    auto [it, inserted] = index.emplace(e, list.entries.size());
    if (inserted) {
      const double s = path.log_probability;
      list.entries.push_back(Prediction{e, s, std::move(path)});
    } else if (path.log_probability > list.entries[it->second].score) {
      list.entries[it->second].score = path.log_probability;
      list.entries[it->second].witness = std::move(path);
    }
  }
  sort_predictions(list);
  return list;
}

}  // namespace

PredictionList beam_search(const PolicyParams& params, const WalkEnv& env,
                           const Query& query, std::size_t width) {
  if (width < 1) throw ValidationError("beam width must be >= 1");
  const int T = env.config().max_steps;
  std::vector<BeamNode> beam(1);
  beam[0].hidden = Vector::Zero(params.dims.hidden_dim);
  beam[0].current = query.head;
  WalkState probe = env.reset(query, WalkMode::kEval);

  for (int s = 0; s < T; ++s) {
    std::vector<std::vector<Action>> actions(beam.size());
    std::vector<ActionDistribution> dists(beam.size());
    std::vector<Candidate> candidates;
    for (std::size_t b = 0; b < beam.size(); ++b) {
      probe.current = beam[b].current;
      probe.step = s;
      actions[b] = env.legal_actions(probe);
      const Vector x = state_encoding(params, beam[b].hidden, beam[b].current,
                                      query.relation);
      dists[b] = score_actions(params, x, actions[b]);
      for (std::size_t a = 0; a < actions[b].size(); ++a) {
        candidates.push_back(
            {beam[b].log_prob +
                 dists[b].log_probabilities[static_cast<Eigen::Index>(a)],
             b, a});
      }
    }
    select_top(candidates, width);
    std::vector<BeamNode> next;
    next.reserve(candidates.size());
    for (const Candidate& c : candidates) {
      const BeamNode& parent = beam[c.beam];
      const Action& taken = actions[c.beam][c.action];
      BeamNode node;
      node.current = taken.entity;
      node.log_prob = c.log_prob;
      node.steps = parent.steps;
      node.steps.push_back(taken);
      if (s + 1 < T) node.hidden = encode_history(params, parent.hidden, taken);
      next.push_back(std::move(node));
    }
    beam = std::move(next);
  }

  std::vector<Rollout> paths;
  paths.reserve(beam.size());
  for (BeamNode& node : beam) {
    Rollout r;
    r.head = query.head;
    r.query_relation = query.relation;
    r.steps = std::move(node.steps);
    r.log_probability = node.log_prob;
    paths.push_back(std::move(r));
  }
  return group_by_terminal(query, std::move(paths));
}

PredictionList embedding_guided_walk(const KgeParams& kge, const WalkEnv& env,
                                     const Query& query, std::size_t width) {
  if (width < 1) throw ValidationError("beam width must be >= 1");
  const int T = env.config().max_steps;
  struct Frontier {
    EntityId entity;
    double score;
    std::vector<Action> steps;
  };
  std::vector<Frontier> frontier{
      {query.head, score(kge, query.head, query.relation, query.head), {}}};
  WalkState probe = env.reset(query, WalkMode::kEval);

  for (int s = 0; s < T; ++s) {
    std::vector<Frontier> expanded;
    std::unordered_map<EntityId, std::size_t> seen;
    for (const Frontier& f : frontier) {
      probe.current = f.entity;
      probe.step = s;
      for (const Action& a : env.legal_actions(probe)) {
        if (seen.contains(a.entity)) continue;
        seen.emplace(a.entity, expanded.size());
        Frontier next{a.entity, score(kge, query.head, query.relation, a.entity),
                      f.steps};
        next.steps.push_back(a);
        expanded.push_back(std::move(next));
      }
    }
    std::stable_sort(expanded.begin(), expanded.end(),
                     [](const Frontier& a, const Frontier& b) {
                       if (a.score != b.score) return a.score > b.score;
                       return a.entity < b.entity;
                     });
    if (expanded.size() > width) expanded.resize(width);
    frontier = std::move(expanded);
  }

  PredictionList list;
  list.head = query.head;
  list.relation = query.relation;
  for (Frontier& f : frontier) {
    Rollout r;
    r.head = query.head;
    r.query_relation = query.relation;
    r.steps = std::move(f.steps);
    r.log_probability = f.score;
    list.entries.push_back(Prediction{f.entity, f.score, std::move(r)});
  }
  sort_predictions(list);
  return list;
}

}  // namespace kgwalk
