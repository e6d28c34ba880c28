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

// REINFORCE training of the walking policy, plus validation-driven grid
// search over its hyperparameters.

#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include "kgwalk/kg_store.hpp"
#include "kgwalk/policy_net.hpp"
#include "kgwalk/walk_env.hpp"

namespace kgwalk {

struct TrainConfig {
  int embed_dim = 128;
  int hidden_dim = 256;
  int mlp_dim = 0;
  double learning_rate = 0.001;
  // Metapath bonus; 0 is plain MINERVA.
  double lambda = 0.0;
  // Entropy weight, multiplied by beta_decay after every batch down to
  // beta_floor.
  double beta = 0.01;
  double beta_decay = 0.99;
  double beta_floor = 0.001;
  int rollouts_per_query = 20;
  int batch_size = 128;
  int total_batches = 2000;
  double baseline_momentum = 0.9;
  int max_steps = 3;
  std::size_t max_out = kDefaultMaxOutDegree;
  // Global-norm gradient clipping; <= 0 disables it.
  double grad_clip = 5.0;
  double terminal_reward = 1.0;
  std::uint64_t seed = 0;

  // Order used for deterministic tie-breaking in grid search.
  auto key() const {
    return std::tie(embed_dim, hidden_dim, mlp_dim, learning_rate, lambda,
                    beta, beta_decay, beta_floor, rollouts_per_query,
                    batch_size, total_batches, baseline_momentum, max_steps,
                    max_out, grad_clip, terminal_reward, seed);
  }
  void validate() const;
};

std::string train_config_to_json(const TrainConfig& cfg);
// Missing keys keep the defaults of `base`.
TrainConfig train_config_from_json(const std::string& json,
                                   const TrainConfig& base = {});

struct BaselineState {
  double value = 0.0;
  double momentum = 0.9;
};

// b <- mu * b + (1 - mu) * batch_mean_reward
BaselineState update_baseline(BaselineState state, double batch_mean_reward);

// Adam with per-tensor first/second moments.
class AdamOptimizer {
 public:
  AdamOptimizer(const PolicyDims& dims, double learning_rate,
                double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8);
  void step(PolicyParams& params, const PolicyParams& grads);
  std::int64_t steps() const { return t_; }

 private:
  double lr_, beta1_, beta2_, eps_;
  std::int64_t t_ = 0;
  PolicyParams m_, v_;
};

struct BatchRecord {
  int batch = 0;
  double mean_reward = 0.0;
  double hit_rate = 0.0;
  double entropy = 0.0;
  double beta = 0.0;
  double metapath_rate = 0.0;
  double grad_norm = 0.0;
};

std::string batch_record_to_json(const BatchRecord& r);

struct TrainResult {
  PolicyParams params;
  std::vector<BatchRecord> log;
};

using BatchCallback = std::function<void(const BatchRecord&)>;

// Trains on one query per training triple (tail direction). `train_graph`
// must be augmented; `train_triples` are the target-relation training facts
// whose tails are the rewarded answers.
TrainResult train_policy(const KnowledgeGraph& train_graph,
                         std::span<const Triple> train_triples,
                         std::span<const Metapath> metapaths,
                         const TrainConfig& cfg,
                         const BatchCallback& on_batch = {});

// The hyperparameter grid: embed {128,256} x hidden {256,512} x lr
// {1e-4,1e-3} x beta {0.01,0.1} x the given lambdas.
std::vector<TrainConfig> policy_grid(const TrainConfig& base,
                                     std::span<const double> lambdas);
std::vector<TrainConfig> minerva_grid(const TrainConfig& base);
std::vector<TrainConfig> polo_grid(const TrainConfig& base);

struct GridEntry {
  TrainConfig config;
  double score = 0.0;
};

struct GridResult {
  TrainConfig best;
  std::vector<GridEntry> table;
};

// Scores a trained policy; higher is better.
using PolicyScorer = std::function<double(const PolicyParams&, const TrainConfig&)>;

// Trains every config, scores it, returns the argmax. Ties go to the config
// with the lexicographically smaller key().
GridResult grid_search(std::span<const TrainConfig> grid,
                       const std::function<TrainResult(const TrainConfig&)>& train,
                       const PolicyScorer& score);

}  // namespace kgwalk
