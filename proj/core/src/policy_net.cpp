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

#include "kgwalk/policy_net.hpp"

#include <cmath>

#include "json.hpp"

namespace kgwalk {

namespace {

Vector sigmoid(const Vector& a) {
  return a.unaryExpr([](double v) { return 1.0 / (1.0 + std::exp(-v)); });
}

Vector tanh_vec(const Vector& a) {
  return a.unaryExpr([](double v) { return std::tanh(v); });
}

void fill_uniform(double* data, std::int64_t n, double bound, Rng& rng) {
  for (std::int64_t i = 0; i < n; ++i) data[i] = rng.uniform(-bound, bound);
}

struct GruStep {
  Vector input, update, reset, candidate, cand_hidden_lin, hidden;
};

GruStep gru_forward(const PolicyParams& p, const Vector& h, const Action& a) {
  const int d = p.dims.embed_dim;
  GruStep s;
  s.input.resize(2 * d);
  s.input.head(d) = p.relation_emb.row(a.relation).transpose();
  s.input.tail(d) = p.entity_emb.row(a.entity).transpose();
  s.update = sigmoid(p.w_update * s.input + p.u_update * h + p.b_update);
  s.reset = sigmoid(p.w_reset * s.input + p.u_reset * h + p.b_reset);
  s.cand_hidden_lin = p.u_cand * h + p.b_cand_hidden;
  s.candidate = tanh_vec(p.w_cand * s.input + p.b_cand +
                         s.reset.cwiseProduct(s.cand_hidden_lin));
  s.hidden = (Vector::Ones(h.size()) - s.update).cwiseProduct(s.candidate) +
             s.update.cwiseProduct(h);
  return s;
}

struct ScorerOut {
  Vector mlp_act, query_vec, key_query;
};

ScorerOut scorer_forward(const PolicyParams& p, const Vector& state) {
  ScorerOut o;
  o.mlp_act = tanh_vec(p.w_mlp * state + p.b_mlp);
  o.query_vec = p.w_out * o.mlp_act + p.b_out;
  o.key_query = p.w_key.transpose() * o.query_vec;
  return o;
}

ActionDistribution distribution_from_key(const PolicyParams& p,
                                         const Vector& key_query,
                                         std::span<const Action> actions) {
  const int d = p.dims.embed_dim;
  ActionDistribution dist;
  const auto n = static_cast<Eigen::Index>(actions.size());
  dist.logits.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Action& a = actions[static_cast<std::size_t>(i)];
    dist.logits[i] = key_query.head(d).dot(p.relation_emb.row(a.relation)) +
                     key_query.tail(d).dot(p.entity_emb.row(a.entity));
  }
  const double max_logit = dist.logits.maxCoeff();
  const Vector shifted = dist.logits.array() - max_logit;
  const double log_z = std::log(shifted.array().exp().sum());
  dist.log_probabilities = shifted.array() - log_z;
  dist.probabilities = dist.log_probabilities.array().exp();
  return dist;
}

nlohmann::json dims_to_json(const PolicyDims& d) {
  return {{"entity_count", d.entity_count},
          {"relation_count", d.relation_count},
          {"embed_dim", d.embed_dim},
          {"hidden_dim", d.hidden_dim},
          {"mlp_dim", d.mlp_dim}};
}

}  // namespace

PolicyParams PolicyParams::zeros(const PolicyDims& dims) {
  const auto E = static_cast<Eigen::Index>(dims.entity_count);
  const auto R = static_cast<Eigen::Index>(dims.relation_count);
  const Eigen::Index d = dims.embed_dim, H = dims.hidden_dim,
                     M = dims.scorer_width();
  PolicyParams p;
  p.dims = dims;
  p.entity_emb = Matrix::Zero(E, d);
  p.relation_emb = Matrix::Zero(R, d);
  p.w_update = Matrix::Zero(H, 2 * d);
  p.u_update = Matrix::Zero(H, H);
  p.b_update = Vector::Zero(H);
  p.w_reset = Matrix::Zero(H, 2 * d);
  p.u_reset = Matrix::Zero(H, H);
  p.b_reset = Vector::Zero(H);
  p.w_cand = Matrix::Zero(H, 2 * d);
  p.u_cand = Matrix::Zero(H, H);
  p.b_cand = Vector::Zero(H);
  p.b_cand_hidden = Vector::Zero(H);
  p.w_mlp = Matrix::Zero(M, H + 2 * d);
  p.b_mlp = Vector::Zero(M);
  p.w_out = Matrix::Zero(d, M);
  p.b_out = Vector::Zero(d);
  p.w_key = Matrix::Zero(d, 2 * d);
  return p;
}

PolicyParams PolicyParams::initialize(const PolicyDims& dims,
                                      std::uint64_t seed) {
  if (dims.embed_dim < 1 || dims.hidden_dim < 1) {
    throw ValidationError("policy dimensions must be positive");
  }
  PolicyParams p = zeros(dims);
  Rng rng(seed);
  const double d = dims.embed_dim, H = dims.hidden_dim;
  auto init = [&rng](auto& m, double fan_in) {
    fill_uniform(m.data(), m.size(), 1.0 / std::sqrt(fan_in), rng);
  };
  init(p.entity_emb, d);
  init(p.relation_emb, d);
  for (Matrix* w : {&p.w_update, &p.w_reset, &p.w_cand}) init(*w, 2 * d);
  for (Matrix* u : {&p.u_update, &p.u_reset, &p.u_cand}) init(*u, H);
  p.b_update.setConstant(1.0);
  init(p.w_mlp, H + 2 * d);
  init(p.w_out, dims.scorer_width());
  init(p.w_key, 2 * d);
  return p;
}

std::vector<TensorRef> PolicyParams::tensors() {
  return {tensor_ref("entity_emb", entity_emb),
          tensor_ref("relation_emb", relation_emb),
          tensor_ref("w_update", w_update),
          tensor_ref("u_update", u_update),
          tensor_ref("b_update", b_update),
          tensor_ref("w_reset", w_reset),
          tensor_ref("u_reset", u_reset),
          tensor_ref("b_reset", b_reset),
          tensor_ref("w_cand", w_cand),
          tensor_ref("u_cand", u_cand),
          tensor_ref("b_cand", b_cand),
          tensor_ref("b_cand_hidden", b_cand_hidden),
          tensor_ref("w_mlp", w_mlp),
          tensor_ref("b_mlp", b_mlp),
          tensor_ref("w_out", w_out),
          tensor_ref("b_out", b_out),
          tensor_ref("w_key", w_key)};
}

void PolicyParams::set_zero() {
  for (const TensorRef& t : tensors()) {
    std::fill(t.data, t.data + t.size(), 0.0);
  }
}

bool PolicyParams::all_finite() const {
  for (const TensorRef& t : tensors()) {
    for (double v : t.values()) {
      if (!std::isfinite(v)) return false;
    }
  }
  return true;
}

double ActionDistribution::entropy() const {
  double h = 0.0;
  for (Eigen::Index i = 0; i < probabilities.size(); ++i) {
    if (probabilities[i] > 0.0) h -= probabilities[i] * log_probabilities[i];
  }
  return h;
}

Vector encode_history(const PolicyParams& params, const Vector& prev_hidden,
                      const Action& action) {
  return gru_forward(params, prev_hidden, action).hidden;
}

Vector state_encoding(const PolicyParams& params, const Vector& hidden,
                      EntityId current, RelationId query_relation) {
  const int d = params.dims.embed_dim;
  const auto H = hidden.size();
  Vector x(H + 2 * d);
  x.head(H) = hidden;
  x.segment(H, d) = params.entity_emb.row(current).transpose();
  x.tail(d) = params.relation_emb.row(query_relation).transpose();
  return x;
}

ActionDistribution score_actions(const PolicyParams& params,
                                 const Vector& state,
                                 std::span<const Action> actions) {
  if (actions.empty()) throw ValidationError("score_actions: no actions");
  const ScorerOut o = scorer_forward(params, state);
  return distribution_from_key(params, o.key_query, actions);
}

std::pair<std::size_t, double> sample_action(const ActionDistribution& dist,
                                             Rng& rng) {
  const double u = rng.uniform();
  double cumulative = 0.0;
  const std::size_t n = dist.size();
  for (std::size_t i = 0; i < n; ++i) {
    cumulative += dist.probabilities[static_cast<Eigen::Index>(i)];
    if (u < cumulative) {
      return {i, dist.log_probabilities[static_cast<Eigen::Index>(i)]};
    }
  }
  // Rounding left u above the final cumulative sum: take the last index with
  // non-zero mass.
  std::size_t last = n - 1;
  while (last > 0 && dist.probabilities[static_cast<Eigen::Index>(last)] <= 0.0) {
    --last;
  }
  return {last, dist.log_probabilities[static_cast<Eigen::Index>(last)]};
}

namespace {

template <typename Chooser>
EpisodeTrace run_episode(const PolicyParams& params, const WalkEnv& env,
                         const Query& query, WalkMode mode, Chooser&& choose) {
  EpisodeTrace trace;
  trace.rollout.head = query.head;
  trace.rollout.query_relation = query.relation;
  WalkState state = env.reset(query, mode);
  Vector hidden = Vector::Zero(params.dims.hidden_dim);
  const int T = env.config().max_steps;
  trace.steps.reserve(static_cast<std::size_t>(T));
  for (int s = 0; s < T; ++s) {
    StepTrace st;
    st.actions = env.legal_actions(state);
    st.state = state_encoding(params, hidden, state.current, query.relation);
    ScorerOut o = scorer_forward(params, st.state);
    st.dist = distribution_from_key(params, o.key_query, st.actions);
    st.mlp_act = std::move(o.mlp_act);
    st.query_vec = std::move(o.query_vec);
    st.key_query = std::move(o.key_query);
    st.chosen = choose(s, st.dist);
    if (st.chosen >= st.actions.size()) {
      throw ValidationError("replayed action index out of range");
    }
    trace.rollout.log_probability +=
        st.dist.log_probabilities[static_cast<Eigen::Index>(st.chosen)];
    trace.entropy_sum += st.dist.entropy();
    const Action taken = st.actions[st.chosen];
    state = env.step(state, st.actions, st.chosen);
    trace.rollout.steps.push_back(taken);
    if (s + 1 < T) {
      GruStep g = gru_forward(params, hidden, taken);
      st.has_next = true;
      st.gru_input = std::move(g.input);
      st.update_gate = std::move(g.update);
      st.reset_gate = std::move(g.reset);
      st.candidate = std::move(g.candidate);
      st.cand_hidden_lin = std::move(g.cand_hidden_lin);
      hidden = std::move(g.hidden);
    }
    trace.steps.push_back(std::move(st));
  }
  return trace;
}

}  // namespace

EpisodeTrace sample_episode(const PolicyParams& params, const WalkEnv& env,
                            const Query& query, WalkMode mode, Rng& rng) {
  return run_episode(params, env, query, mode,
                     [&rng](int, const ActionDistribution& dist) {
                       return sample_action(dist, rng).first;
                     });
}

EpisodeTrace replay_episode(const PolicyParams& params, const WalkEnv& env,
                            const Query& query, WalkMode mode,
                            std::span<const std::size_t> choices) {
  if (choices.size() != static_cast<std::size_t>(env.config().max_steps)) {
    throw ValidationError("replay needs one choice per step");
  }
  return run_episode(params, env, query, mode,
                     [choices](int s, const ActionDistribution&) {
                       return choices[static_cast<std::size_t>(s)];
                     });
}

void policy_gradients(const PolicyParams& p, const EpisodeTrace& trace,
                      double advantage, double beta, PolicyParams& g) {
  if (advantage == 0.0 && beta == 0.0) return;
  const Eigen::Index d = p.dims.embed_dim;
  const Eigen::Index H = p.dims.hidden_dim;
  const RelationId qrel = trace.rollout.query_relation;
  Vector dh_next = Vector::Zero(H);

  for (std::size_t idx = trace.steps.size(); idx-- > 0;) {
    const StepTrace& st = trace.steps[idx];
    const Vector h = st.state.head(H);
    Vector dh = Vector::Zero(H);

    if (st.has_next) {
      // Backprop through h_{s+1} = (1 - z) n + z h.
      const Vector& z = st.update_gate;
      const Vector& r = st.reset_gate;
      const Vector& n = st.candidate;
      const Vector& c = st.cand_hidden_lin;
      const Vector& x = st.gru_input;
      const Vector dn = dh_next.cwiseProduct(Vector::Ones(H) - z);
      const Vector dz = dh_next.cwiseProduct(h - n);
      dh += dh_next.cwiseProduct(z);

      const Vector da_n = dn.cwiseProduct(Vector::Ones(H) - n.cwiseAbs2());
      const Vector dc = da_n.cwiseProduct(r);
      const Vector dr = da_n.cwiseProduct(c);
      const Vector da_r =
          dr.cwiseProduct(r.cwiseProduct(Vector::Ones(H) - r));
      const Vector da_z =
          dz.cwiseProduct(z.cwiseProduct(Vector::Ones(H) - z));

      g.w_cand.noalias() += da_n * x.transpose();
      g.b_cand += da_n;
      g.u_cand.noalias() += dc * h.transpose();
      g.b_cand_hidden += dc;
      g.w_reset.noalias() += da_r * x.transpose();
      g.u_reset.noalias() += da_r * h.transpose();
      g.b_reset += da_r;
      g.w_update.noalias() += da_z * x.transpose();
      g.u_update.noalias() += da_z * h.transpose();
      g.b_update += da_z;

      dh.noalias() += p.u_cand.transpose() * dc;
      dh.noalias() += p.u_reset.transpose() * da_r;
      dh.noalias() += p.u_update.transpose() * da_z;

      Vector dx = p.w_cand.transpose() * da_n;
      dx.noalias() += p.w_reset.transpose() * da_r;
      dx.noalias() += p.w_update.transpose() * da_z;
      const Action& taken = st.actions[st.chosen];
      g.relation_emb.row(taken.relation) += dx.head(d).transpose();
      g.entity_emb.row(taken.entity) += dx.tail(d).transpose();
    }

    // dL/dlogit_j = -A (1[j = a] - p_j) + beta p_j (log p_j + H(pi)).
    const auto& dist = st.dist;
    const double entropy = dist.entropy();
    const auto n_act = static_cast<Eigen::Index>(st.actions.size());
    Vector dlogit(n_act);
    for (Eigen::Index j = 0; j < n_act; ++j) {
      const double pj = dist.probabilities[j];
      const double indicator = static_cast<std::size_t>(j) == st.chosen ? 1.0 : 0.0;
      double entropy_term = 0.0;
      if (pj > 0.0) entropy_term = beta * (pj * (dist.log_probabilities[j] + entropy));
      dlogit[j] = -advantage * (indicator - pj) + entropy_term;
    }

    Vector dkey = Vector::Zero(2 * d);
    for (Eigen::Index j = 0; j < n_act; ++j) {
      const double gj = dlogit[j];
      if (gj == 0.0) continue;
      const Action& a = st.actions[static_cast<std::size_t>(j)];
      dkey.head(d) += gj * p.relation_emb.row(a.relation).transpose();
      dkey.tail(d) += gj * p.entity_emb.row(a.entity).transpose();
      g.relation_emb.row(a.relation) += gj * st.key_query.head(d).transpose();
      g.entity_emb.row(a.entity) += gj * st.key_query.tail(d).transpose();
    }

    g.w_key.noalias() += st.query_vec * dkey.transpose();
    const Vector dq = p.w_key * dkey;
    g.w_out.noalias() += dq * st.mlp_act.transpose();
    g.b_out += dq;
    const Vector dmlp = (p.w_out.transpose() * dq)
                            .cwiseProduct(Vector::Ones(st.mlp_act.size()) -
                                          st.mlp_act.cwiseAbs2());
    g.w_mlp.noalias() += dmlp * st.state.transpose();
    g.b_mlp += dmlp;
    const Vector dstate = p.w_mlp.transpose() * dmlp;
    dh += dstate.head(H);
    const EntityId current = idx == 0 ? trace.rollout.head
                                      : trace.rollout.steps[idx - 1].entity;
    g.entity_emb.row(current) += dstate.segment(H, d).transpose();
    g.relation_emb.row(qrel) += dstate.tail(d).transpose();

    dh_next = std::move(dh);
  }
}

void save_policy(const std::filesystem::path& path, const PolicyParams& params,
                 const std::string& metadata_json) {
  nlohmann::ordered_json meta;
  meta["dims"] = dims_to_json(params.dims);
  meta["config"] = metadata_json.empty() ? nlohmann::json::object()
                                         : nlohmann::json::parse(metadata_json);
  const auto tensors = params.tensors();
  write_checkpoint(path, {"policy", meta.dump()}, tensors);
}

PolicyParams load_policy(const std::filesystem::path& path,
                         std::string* metadata_json) {
  const CheckpointHeader header = read_checkpoint_header(path);
  if (header.model_kind != "policy") {
    throw IoError("checkpoint '" + path.string() + "' holds a '" +
                  header.model_kind + "' model, not a policy");
  }
  const auto meta = nlohmann::json::parse(header.metadata_json);
  PolicyDims dims;
  dims.entity_count = meta["dims"]["entity_count"].get<std::size_t>();
  dims.relation_count = meta["dims"]["relation_count"].get<std::size_t>();
  dims.embed_dim = meta["dims"]["embed_dim"].get<int>();
  dims.hidden_dim = meta["dims"]["hidden_dim"].get<int>();
  dims.mlp_dim = meta["dims"]["mlp_dim"].get<int>();
  PolicyParams params = PolicyParams::zeros(dims);
  const auto tensors = params.tensors();
  read_checkpoint(path, tensors);
  if (metadata_json != nullptr) *metadata_json = meta["config"].dump();
  return params;
}

}  // namespace kgwalk
