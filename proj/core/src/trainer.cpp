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

#include "kgwalk/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include "json.hpp"

namespace kgwalk {

void TrainConfig::validate() const {
  auto fail = [](const std::string& what) {
    throw ValidationError("invalid training config: " + what);
  };
  if (embed_dim < 1 || hidden_dim < 1 || mlp_dim < 0) fail("dimensions");
  if (!(learning_rate >= 0.0)) fail("learning_rate must be >= 0");
  if (!(lambda >= 0.0)) fail("lambda must be >= 0");
  if (!(beta >= 0.0)) fail("beta must be >= 0");
  if (rollouts_per_query < 1) fail("rollouts_per_query must be >= 1");
  if (batch_size < 1) fail("batch_size must be >= 1");
  if (total_batches < 0) fail("total_batches must be >= 0");
  if (!(baseline_momentum >= 0.0 && baseline_momentum < 1.0)) {
    fail("baseline_momentum must be in [0, 1)");
  }
  if (max_steps < 1) fail("max_steps must be >= 1");
  if (max_out < 1) fail("max_out must be >= 1");
}

std::string train_config_to_json(const TrainConfig& c) {
  nlohmann::ordered_json j;
  j["embed_dim"] = c.embed_dim;
  j["hidden_dim"] = c.hidden_dim;
  j["mlp_dim"] = c.mlp_dim;
  j["learning_rate"] = c.learning_rate;
  j["lambda"] = c.lambda;
  j["beta"] = c.beta;
  j["beta_decay"] = c.beta_decay;
  j["beta_floor"] = c.beta_floor;
  j["rollouts_per_query"] = c.rollouts_per_query;
  j["batch_size"] = c.batch_size;
  j["total_batches"] = c.total_batches;
  j["baseline_momentum"] = c.baseline_momentum;
  j["max_steps"] = c.max_steps;
  j["max_out"] = c.max_out;
  j["grad_clip"] = c.grad_clip;
  j["terminal_reward"] = c.terminal_reward;
  j["seed"] = c.seed;
  return j.dump();
}

TrainConfig train_config_from_json(const std::string& json,
                                   const TrainConfig& base) {
  const auto j = nlohmann::json::parse(json);
  TrainConfig c = base;
  auto read = [&j](const char* key, auto& field) {
    if (j.contains(key)) field = j.at(key).get<std::decay_t<decltype(field)>>();
  };
  read("embed_dim", c.embed_dim);
  read("hidden_dim", c.hidden_dim);
  read("mlp_dim", c.mlp_dim);
  read("learning_rate", c.learning_rate);
  read("lambda", c.lambda);
  read("beta", c.beta);
  read("beta_decay", c.beta_decay);
  read("beta_floor", c.beta_floor);
  read("rollouts_per_query", c.rollouts_per_query);
  read("batch_size", c.batch_size);
  read("total_batches", c.total_batches);
  read("baseline_momentum", c.baseline_momentum);
  read("max_steps", c.max_steps);
  read("max_out", c.max_out);
  read("grad_clip", c.grad_clip);
  read("terminal_reward", c.terminal_reward);
  read("seed", c.seed);
  return c;
}

BaselineState update_baseline(BaselineState state, double batch_mean_reward) {
  state.value = state.momentum * state.value +
                (1.0 - state.momentum) * batch_mean_reward;
  return state;
}

AdamOptimizer::AdamOptimizer(const PolicyDims& dims, double learning_rate,
                             double beta1, double beta2, double eps)
    : lr_(learning_rate),
      beta1_(beta1),
      beta2_(beta2),
      eps_(eps),
      m_(PolicyParams::zeros(dims)),
      v_(PolicyParams::zeros(dims)) {}

void AdamOptimizer::step(PolicyParams& params, const PolicyParams& grads) {
  ++t_;
  const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  const auto p = params.tensors();
  const auto g = grads.tensors();
  const auto m = m_.tensors();
  const auto v = v_.tensors();
  for (std::size_t k = 0; k < p.size(); ++k) {
    const std::int64_t n = p[k].size();
    for (std::int64_t i = 0; i < n; ++i) {
      const double gi = g[k].data[i];
      double& mi = m[k].data[i];
      double& vi = v[k].data[i];
      if (gi == 0.0 && mi == 0.0 && vi == 0.0) continue;
      mi = beta1_ * mi + (1.0 - beta1_) * gi;
      vi = beta2_ * vi + (1.0 - beta2_) * gi * gi;
      p[k].data[i] -= lr_ * (mi / c1) / (std::sqrt(vi / c2) + eps_);
    }
  }
}

std::string batch_record_to_json(const BatchRecord& r) {
  nlohmann::ordered_json j;
  j["batch"] = r.batch;
  j["mean_reward"] = r.mean_reward;
  j["hit_rate"] = r.hit_rate;
  j["entropy"] = r.entropy;
  j["beta"] = r.beta;
  j["metapath_rate"] = r.metapath_rate;
  j["grad_norm"] = r.grad_norm;
  return j.dump();
}

TrainResult train_policy(const KnowledgeGraph& train_graph,
                         std::span<const Triple> train_triples,
                         std::span<const Metapath> metapaths,
                         const TrainConfig& cfg, const BatchCallback& on_batch) {
  cfg.validate();
  if (!train_graph.augmented()) {
    throw ValidationError("train_policy expects an augmented graph");
  }
  if (train_triples.empty()) {
    throw ValidationError("train_policy needs at least one training triple");
  }
  const std::vector<Query> queries = group_queries(train_graph, train_triples);
  std::map<std::pair<EntityId, RelationId>, std::size_t> query_index;
  for (std::size_t i = 0; i < queries.size(); ++i) {
    query_index[{queries[i].head, queries[i].relation}] = i;
  }
  // One query per training triple.
  std::vector<std::size_t> triple_query;
  triple_query.reserve(train_triples.size());
  for (const Triple& t : train_triples) {
    triple_query.push_back(query_index.at({t.head, t.relation}));
  }

  PolicyDims dims;
  dims.entity_count = train_graph.entity_count();
  dims.relation_count = train_graph.relation_count();
  dims.embed_dim = cfg.embed_dim;
  dims.hidden_dim = cfg.hidden_dim;
  dims.mlp_dim = cfg.mlp_dim;

  TrainResult result;
  result.params = PolicyParams::initialize(dims, derive_seed(cfg.seed, 101));
  PolicyParams grads = PolicyParams::zeros(dims);
  AdamOptimizer adam(dims, cfg.learning_rate);
  const WalkEnv env(train_graph,
                    EnvConfig{cfg.max_steps, cfg.max_out, cfg.seed});
  const EpisodeConfig episode{cfg.lambda, cfg.terminal_reward};

  BaselineState baseline{0.0, cfg.baseline_momentum};
  double beta = cfg.beta;
  Rng order_rng(derive_seed(cfg.seed, 202));
  std::vector<std::size_t> order(triple_query.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::size_t cursor = order.size();

  const std::uint64_t episode_seed = derive_seed(cfg.seed, 303);
  const std::size_t episodes_per_batch =
      static_cast<std::size_t>(cfg.batch_size) *
      static_cast<std::size_t>(cfg.rollouts_per_query);
  const double scale = 1.0 / static_cast<double>(episodes_per_batch);
  result.log.reserve(static_cast<std::size_t>(cfg.total_batches));

  for (int b = 0; b < cfg.total_batches; ++b) {
    grads.set_zero();
    double reward_sum = 0.0, entropy_sum = 0.0;
    std::size_t hits = 0, matches = 0, step_count = 0;
    for (int qi = 0; qi < cfg.batch_size; ++qi) {
      if (cursor == order.size()) {
        for (std::size_t i = order.size(); i > 1; --i) {
          std::swap(order[i - 1], order[order_rng.uniform_index(i)]);
        }
        cursor = 0;
      }
      const Query& query = queries[triple_query[order[cursor++]]];
      for (int k = 0; k < cfg.rollouts_per_query; ++k) {
        const std::uint64_t episode_index =
            static_cast<std::uint64_t>(b) * episodes_per_batch +
            static_cast<std::uint64_t>(qi) * cfg.rollouts_per_query + k;
        Rng rng(episode_seed ^ episode_index);
        const EpisodeTrace trace =
            sample_episode(result.params, env, query, WalkMode::kTrain, rng);
        const double reward =
            terminal_reward(trace.rollout, query, metapaths, episode, train_graph);
        reward_sum += reward;
        if (query.is_answer(trace.rollout.terminal())) ++hits;
        for (const Metapath& mp : metapaths) {
          if (match_metapath(trace.rollout, mp, train_graph)) {
            ++matches;
            break;
          }
        }
        entropy_sum += trace.entropy_sum;
        step_count += trace.steps.size();
        policy_gradients(result.params, trace, (reward - baseline.value) * scale,
                         beta * scale, grads);
      }
    }

    double sq = 0.0;
    for (const TensorRef& t : grads.tensors()) {
      for (double v : t.values()) sq += v * v;
    }
    const double grad_norm = std::sqrt(sq);
    if (!std::isfinite(grad_norm)) {
      std::ostringstream msg;
      msg << "non-finite gradient at batch " << b << " (mean reward "
          << reward_sum * scale << ", baseline " << baseline.value
          << ", beta " << beta << ")";
      throw TrainingError(msg.str());
    }
    if (cfg.grad_clip > 0.0 && grad_norm > cfg.grad_clip) {
      const double f = cfg.grad_clip / grad_norm;
      for (const TensorRef& t : grads.tensors()) {
        for (double& v : t.values()) v *= f;
      }
    }
    adam.step(result.params, grads);

    BatchRecord rec;
    rec.batch = b;
    rec.mean_reward = reward_sum * scale;
    rec.hit_rate = static_cast<double>(hits) * scale;
    rec.entropy = step_count > 0 ? entropy_sum / static_cast<double>(step_count) : 0.0;
    rec.beta = beta;
    rec.metapath_rate = static_cast<double>(matches) * scale;
    rec.grad_norm = grad_norm;
    if (!std::isfinite(rec.mean_reward) || !std::isfinite(rec.entropy)) {
      throw TrainingError("non-finite loss statistics at batch " +
                          std::to_string(b));
    }
    result.log.push_back(rec);
    if (on_batch) on_batch(rec);

    baseline = update_baseline(baseline, rec.mean_reward);
    beta = std::max(beta * cfg.beta_decay, cfg.beta_floor);
  }
  if (!result.params.all_finite()) {
    throw TrainingError("training produced non-finite parameters");
  }
  return result;
}

std::vector<TrainConfig> policy_grid(const TrainConfig& base,
                                     std::span<const double> lambdas) {
  std::vector<TrainConfig> grid;
  for (int embed : {128, 256}) {
    for (int hidden : {256, 512}) {
      for (double lr : {0.0001, 0.001}) {
        for (double lambda : lambdas) {
          for (double beta : {0.01, 0.1}) {
            TrainConfig c = base;
            c.embed_dim = embed;
            c.hidden_dim = hidden;
            c.learning_rate = lr;
            c.lambda = lambda;
            c.beta = beta;
            grid.push_back(c);
          }
        }
      }
    }
  }
  return grid;
}

std::vector<TrainConfig> minerva_grid(const TrainConfig& base) {
  const double lambdas[] = {0.0};
  return policy_grid(base, lambdas);
}

std::vector<TrainConfig> polo_grid(const TrainConfig& base) {
  const double lambdas[] = {0.1, 1.0};
  return policy_grid(base, lambdas);
}

GridResult grid_search(
    std::span<const TrainConfig> grid,
    const std::function<TrainResult(const TrainConfig&)>& train,
    const PolicyScorer& score) {
  if (grid.empty()) throw ValidationError("grid search needs a non-empty grid");
  GridResult result;
  bool have_best = false;
  double best_score = 0.0;
  for (const TrainConfig& cfg : grid) {
    const TrainResult trained = train(cfg);
    const double s = score(trained.params, cfg);
    result.table.push_back({cfg, s});
    const bool better = !have_best || s > best_score ||
                        (s == best_score && cfg.key() < result.best.key());
    if (better) {
      result.best = cfg;
      best_score = s;
      have_best = true;
    }
  }
  return result;
}

}  // namespace kgwalk
