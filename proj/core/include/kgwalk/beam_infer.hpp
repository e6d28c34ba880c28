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

// Deterministic beam inference.

#pragma once

#include <cstddef>
#include <limits>

#include "kgwalk/kge.hpp"
#include "kgwalk/policy_net.hpp"
#include "kgwalk/predictions.hpp"
#include "kgwalk/walk_env.hpp"

namespace kgwalk {

inline constexpr std::size_t kDefaultBeamWidth = 100;
inline constexpr std::size_t kUnboundedBeam =
    std::numeric_limits<std::size_t>::max();

// Keeps the `width` most probable partial paths per step (ties: earlier
// beam, then earlier action). After max_steps the surviving paths are
// grouped by terminal entity; each entity is scored by its best path's
// log-probability, which is also its witness.
PredictionList beam_search(const PolicyParams& params, const WalkEnv& env,
                           const Query& query, std::size_t width);

// Graph-constrained walk scored by an embedding model: the frontier of
// each step is ranked by score(head, query relation, frontier) and the best
// `width` distinct frontier entities survive. Every entity on the final
// frontier is a candidate with that score.
PredictionList embedding_guided_walk(const KgeParams& kge, const WalkEnv& env,
                                     const Query& query, std::size_t width);

}  // namespace kgwalk
