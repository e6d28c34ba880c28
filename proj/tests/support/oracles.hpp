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

// Independent reference implementations the library is checked against.

#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "kgwalk/eval_harness.hpp"
#include "kgwalk/policy_net.hpp"

namespace kgwalk::testing {

// Scores every universe entity (unlisted ones at -infinity), drops known
// tails other than the answer, sorts with the answer after its ties and
// returns its 1-based position.
std::size_t brute_force_rank(const PredictionList& predictions, EntityId answer,
                             const std::set<Triple>& known, const KnowledgeGraph& kg,
                             std::optional<TypeId> type);

FoldMetrics brute_force_metrics(std::span<const std::size_t> ranks);

struct EnumeratedPaths {
  // Best log-probability per terminal entity.
  std::map<EntityId, double> best;
  std::size_t path_count = 0;
};

// Every legal length-T action sequence replayed through the policy.
EnumeratedPaths enumerate_paths(const PolicyParams& params, const WalkEnv& env,
                                const Query& query);

// L = -A * sum log pi(a_s) - beta * sum H(pi_s) for a fixed action sequence.
double episode_objective(const PolicyParams& params, const WalkEnv& env,
                         const Query& query, WalkMode mode,
                         std::span<const std::size_t> choices, double advantage,
                         double beta);

struct GroupError {
  std::string name;
  double relative_error = 0.0;
  double analytic_norm = 0.0;
};

// Central differences over every parameter entry, compared per tensor with
// max|a - n| / max(max|a|, max|n|, 1e-6).
std::vector<GroupError> gradient_check(const PolicyParams& params, const WalkEnv& env,
                                       const Query& query, WalkMode mode,
                                       std::span<const std::size_t> choices,
                                       double advantage, double beta,
                                       double step = 1e-5);

// Uniformly random legal action indices for one episode.
std::vector<std::size_t> random_choices(const WalkEnv& env, const Query& query,
                                        WalkMode mode, Rng& rng);

}  // namespace kgwalk::testing
