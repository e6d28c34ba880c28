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

// Stochastic walking policy with hand-derived gradients.
//
//   history   h_{s+1} = GRU(h_s, [rel_emb(r_s); ent_emb(e_s)]),  h_0 = 0
//   state     x_s = [h_s; ent_emb(current); rel_emb(query relation)]
//   scorer    q = W2 tanh(W1 x_s + b1) + b2           (embed_dim)
//   actions   logit_a = (W_key [rel_emb(r_a); ent_emb(t_a)]) . q
//   policy    pi(a | s) = softmax(logit)
//
// The GRU uses the usual update/reset/candidate gates:
//   z = sig(Wz x + Uz h + bz),  r = sig(Wr x + Ur h + br)
//   n = tanh(Wn x + bn + r * (Un h + bun)),  h' = (1 - z) * n + z * h

#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "kgwalk/tensor.hpp"
#include "kgwalk/walk_env.hpp"

namespace kgwalk {

struct PolicyDims {
  std::size_t entity_count = 0;
  std::size_t relation_count = 0;
  int embed_dim = 128;
  int hidden_dim = 256;
  // Width of the scorer's hidden layer; 0 means hidden_dim.
  int mlp_dim = 0;

  int scorer_width() const { return mlp_dim > 0 ? mlp_dim : hidden_dim; }
  friend bool operator==(const PolicyDims&, const PolicyDims&) = default;
};

struct PolicyParams {
  PolicyDims dims;

  Matrix entity_emb;    // entity_count x embed_dim
  Matrix relation_emb;  // relation_count x embed_dim

  Matrix w_update, u_update;  // H x 2d, H x H
  Vector b_update;
  Matrix w_reset, u_reset;
  Vector b_reset;
  Matrix w_cand, u_cand;
  Vector b_cand, b_cand_hidden;

  Matrix w_mlp;  // M x (H + 2d)
  Vector b_mlp;
  Matrix w_out;  // d x M
  Vector b_out;
  Matrix w_key;  // d x 2d

  // All-zero parameters of the given shape (also the gradient bundle shape).
  static PolicyParams zeros(const PolicyDims& dims);
  // Embeddings and weights uniform in +-1/sqrt(fan_in); update-gate bias 1.
  static PolicyParams initialize(const PolicyDims& dims, std::uint64_t seed);

  std::vector<TensorRef> tensors();
  std::vector<TensorRef> tensors() const {
    return const_cast<PolicyParams*>(this)->tensors();
  }

  void set_zero();
  bool all_finite() const;
};

struct ActionDistribution {
  Vector logits;
  Vector probabilities;
  Vector log_probabilities;

  std::size_t size() const { return static_cast<std::size_t>(probabilities.size()); }
  double entropy() const;
};

// One GRU update from `prev_hidden` after taking `action`.
Vector encode_history(const PolicyParams& params, const Vector& prev_hidden,
                      const Action& action);

// [hidden; ent_emb(current); rel_emb(query_relation)]
Vector state_encoding(const PolicyParams& params, const Vector& hidden,
                      EntityId current, RelationId query_relation);

ActionDistribution score_actions(const PolicyParams& params,
                                 const Vector& state_encoding,
                                 std::span<const Action> actions);

// Inverse-CDF draw. Returns (index, log-probability of that index).
std::pair<std::size_t, double> sample_action(const ActionDistribution& dist,
                                             Rng& rng);

// Everything the backward pass needs from one sampled step.
struct StepTrace {
  Vector state;  // x_s
  Vector mlp_act;
  Vector query_vec;
  Vector key_query;  // W_key^T q, size 2d
  std::vector<Action> actions;
  ActionDistribution dist;
  std::size_t chosen = 0;
  // GRU step h_s -> h_{s+1}; filled when another step follows.
  bool has_next = false;
  Vector gru_input, update_gate, reset_gate, candidate, cand_hidden_lin;
};

struct EpisodeTrace {
  Rollout rollout;
  std::vector<StepTrace> steps;
  double entropy_sum = 0.0;
};

// Samples a full episode (max_steps actions) for `query` with `rng`.
EpisodeTrace sample_episode(const PolicyParams& params, const WalkEnv& env,
                            const Query& query, WalkMode mode, Rng& rng);

// Replays a fixed sequence of action indices (legal-action positions at each
// step) and records the trace. Used by gradient checks and tests.
EpisodeTrace replay_episode(const PolicyParams& params, const WalkEnv& env,
                            const Query& query, WalkMode mode,
                            std::span<const std::size_t> choices);

// Adds dL/dtheta for L = -advantage * sum_s log pi(a_s) - beta * sum_s H(pi_s)
// into `grads` (same shape as params).
void policy_gradients(const PolicyParams& params, const EpisodeTrace& trace,
                      double advantage, double beta, PolicyParams& grads);

void save_policy(const std::filesystem::path& path, const PolicyParams& params,
                 const std::string& metadata_json);
PolicyParams load_policy(const std::filesystem::path& path,
                         std::string* metadata_json = nullptr);

}  // namespace kgwalk
