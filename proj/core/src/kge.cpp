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

#include "kgwalk/kge.hpp"

#include <algorithm>
#include <cmath>

#include "json.hpp"

namespace kgwalk {

std::string to_string(KgeKind kind) {
  return kind == KgeKind::kTransE ? "transe" : "distmult";
}

KgeKind kge_kind_from_string(const std::string& name) {
  if (name == "transe" || name == "TransE") return KgeKind::kTransE;
  if (name == "distmult" || name == "DistMult") return KgeKind::kDistMult;
  throw ValidationError("unknown embedding model '" + name + "'");
}

std::vector<TensorRef> KgeParams::tensors() {
  return {tensor_ref("entity_emb", entity_emb),
          tensor_ref("relation_emb", relation_emb)};
}

void KgeTrainConfig::validate() const {
  if (dim < 1) throw ValidationError("kge dim must be >= 1");
  if (!(learning_rate >= 0.0)) throw ValidationError("kge learning_rate must be >= 0");
  if (negatives_per_positive < 1) {
    throw ValidationError("negatives_per_positive must be >= 1");
  }
  if (max_steps < 0) throw ValidationError("kge max_steps must be >= 0");
  if (!(margin >= 0.0)) throw ValidationError("margin must be >= 0");
}

std::string kge_config_to_json(const KgeTrainConfig& c) {
  nlohmann::ordered_json j;
  j["dim"] = c.dim;
  j["learning_rate"] = c.learning_rate;
  j["negatives_per_positive"] = c.negatives_per_positive;
  j["max_steps"] = c.max_steps;
  j["margin"] = c.margin;
  j["filtered_negatives"] = c.filtered_negatives;
  j["seed"] = c.seed;
  return j.dump();
}

KgeTrainConfig kge_config_from_json(const std::string& json,
                                    const KgeTrainConfig& base) {
  const auto j = nlohmann::json::parse(json);
  KgeTrainConfig c = base;
  auto read = [&j](const char* key, auto& field) {
    if (j.contains(key)) field = j.at(key).get<std::decay_t<decltype(field)>>();
  };
  read("dim", c.dim);
  read("learning_rate", c.learning_rate);
  read("negatives_per_positive", c.negatives_per_positive);
  read("max_steps", c.max_steps);
  read("margin", c.margin);
  read("filtered_negatives", c.filtered_negatives);
  read("seed", c.seed);
  return c;
}

double score(const KgeParams& p, EntityId head, RelationId relation,
             EntityId tail) {
  const auto h = p.entity_emb.row(head);
  const auto r = p.relation_emb.row(relation);
  const auto t = p.entity_emb.row(tail);
  const Eigen::Index d = p.entity_emb.cols();
  if (p.kind == KgeKind::kTransE) {
    double sq = 0.0;
    for (Eigen::Index i = 0; i < d; ++i) {
      const double v = h[i] + r[i] - t[i];
      sq += v * v;
    }
    return -std::sqrt(sq);
  }
  double s = 0.0;
  // r * (h * t) keeps the score exactly symmetric in head and tail.
  for (Eigen::Index i = 0; i < d; ++i) s += r[i] * (h[i] * t[i]);
  return s;
}

KgeParams init_kge(KgeKind kind, std::size_t entity_count,
                   std::size_t relation_count, int dim, std::uint64_t seed) {
  KgeParams p;
  p.kind = kind;
  p.entity_emb = Matrix(static_cast<Eigen::Index>(entity_count), dim);
  p.relation_emb = Matrix(static_cast<Eigen::Index>(relation_count), dim);
  Rng rng(seed);
  const double bound = kind == KgeKind::kTransE ? 6.0 / std::sqrt(dim)
                                                : 1.0 / std::sqrt(dim);
  for (Matrix* m : {&p.entity_emb, &p.relation_emb}) {
    for (Eigen::Index i = 0; i < m->size(); ++i) {
      m->data()[i] = rng.uniform(-bound, bound);
    }
  }
  if (kind == KgeKind::kTransE) {
    for (Eigen::Index e = 0; e < p.entity_emb.rows(); ++e) {
      const double n = p.entity_emb.row(e).norm();
      if (n > 0.0) p.entity_emb.row(e) /= n;
    }
  }
  return p;
}

Corruption corrupt_triple(const KnowledgeGraph& kg, const Triple& positive,
                          bool filtered, Rng& rng) {
  constexpr int kMaxAttempts = 100;
  Corruption c;
  for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
    c.triple = positive;
    const auto e = static_cast<EntityId>(rng.uniform_index(kg.entity_count()));
    if (rng.uniform() < 0.5) {
      c.triple.head = e;
    } else {
      c.triple.tail = e;
    }
    if (!filtered ||
        !kg.has_edge(c.triple.head, c.triple.relation, c.triple.tail)) {
      c.ok = true;
      return c;
    }
  }
  c.ok = false;
  return c;
}

namespace {

double softplus(double x) {
  return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

}  // namespace

KgeTrainResult train_kge(const KnowledgeGraph& train_graph, KgeKind kind,
                         const KgeTrainConfig& cfg) {
  cfg.validate();
  if (train_graph.triple_count() == 0) {
    throw ValidationError("train_kge needs a non-empty graph");
  }
  KgeTrainResult result;
  result.params = init_kge(kind, train_graph.entity_count(),
                           train_graph.relation_count(), cfg.dim,
                           derive_seed(cfg.seed, 11));
  KgeParams& p = result.params;
  const auto triples = train_graph.triples();
  Rng rng(derive_seed(cfg.seed, 12));
  const Eigen::Index d = cfg.dim;
  const double inv_neg = 1.0 / cfg.negatives_per_positive;

  Vector gh(d), gr(d), gt(d), gnh(d), gnt(d);
  std::vector<EntityId> touched;
  double window_loss = 0.0;
  int window_count = 0;

  for (int step = 0; step < cfg.max_steps; ++step) {
    const Triple& pos = triples[rng.uniform_index(triples.size())];
    double loss = 0.0;
    gh.setZero();
    gr.setZero();
    gt.setZero();
    touched.clear();

    // Positive-side quantities are shared by every negative.
    Vector pos_vec;
    double pos_dist = 0.0;
    double pos_score = 0.0;
    if (kind == KgeKind::kTransE) {
      pos_vec = (p.entity_emb.row(pos.head) + p.relation_emb.row(pos.relation) -
                 p.entity_emb.row(pos.tail))
                    .transpose();
      pos_dist = pos_vec.norm();
    } else {
      pos_score = score(p, pos.head, pos.relation, pos.tail);
      loss += softplus(-pos_score);
      const double g = -sigmoid(-pos_score);
      gh += g * p.relation_emb.row(pos.relation).cwiseProduct(
                    p.entity_emb.row(pos.tail)).transpose();
      gr += g * p.entity_emb.row(pos.head).cwiseProduct(
                    p.entity_emb.row(pos.tail)).transpose();
      gt += g * p.entity_emb.row(pos.head).cwiseProduct(
                    p.relation_emb.row(pos.relation)).transpose();
    }

    struct NegGrad {
      Triple triple;
      Vector head, tail;
    };
    std::vector<NegGrad> neg_grads;
    for (int k = 0; k < cfg.negatives_per_positive; ++k) {
      const Corruption c = corrupt_triple(train_graph, pos, cfg.filtered_negatives, rng);
      if (!c.ok) continue;
      const Triple& neg = c.triple;
      if (kind == KgeKind::kTransE) {
        const Vector neg_vec = (p.entity_emb.row(neg.head) +
                                p.relation_emb.row(neg.relation) -
                                p.entity_emb.row(neg.tail))
                                   .transpose();
        const double neg_dist = neg_vec.norm();
        const double hinge = cfg.margin + pos_dist - neg_dist;
        if (hinge <= 0.0) continue;
        loss += hinge * inv_neg;
        if (pos_dist > 0.0) {
          const Vector u = pos_vec / pos_dist * inv_neg;
          gh += u;
          gr += u;
          gt -= u;
        }
        if (neg_dist > 0.0) {
          const Vector u = neg_vec / neg_dist * inv_neg;
          gr -= u;
          neg_grads.push_back({neg, -u, u});
        }
      } else {
        const double s = score(p, neg.head, neg.relation, neg.tail);
        loss += softplus(s) * inv_neg;
        const double g = sigmoid(s) * inv_neg;
        gr += g * p.entity_emb.row(neg.head).cwiseProduct(
                      p.entity_emb.row(neg.tail)).transpose();
        neg_grads.push_back(
            {neg,
             g * p.relation_emb.row(neg.relation)
                     .cwiseProduct(p.entity_emb.row(neg.tail))
                     .transpose(),
             g * p.entity_emb.row(neg.head)
                     .cwiseProduct(p.relation_emb.row(neg.relation))
                     .transpose()});
      }
    }
    if (!std::isfinite(loss)) {
      throw TrainingError("non-finite embedding loss at step " +
                          std::to_string(step));
    }

    const double lr = cfg.learning_rate;
    auto apply_entity = [&](EntityId e, const Vector& g) {
      if (lr == 0.0 || g.isZero(0.0)) return;
      p.entity_emb.row(e) -= lr * g.transpose();
      touched.push_back(e);
    };
    apply_entity(pos.head, gh);
    apply_entity(pos.tail, gt);
    for (const NegGrad& ng : neg_grads) {
      apply_entity(ng.triple.head, ng.head);
      apply_entity(ng.triple.tail, ng.tail);
    }
    if (lr != 0.0 && !gr.isZero(0.0)) {
      p.relation_emb.row(pos.relation) -= lr * gr.transpose();
    }
    if (kind == KgeKind::kTransE) {
      for (EntityId e : touched) {
        const double n = p.entity_emb.row(e).norm();
        if (n > 0.0) p.entity_emb.row(e) /= n;
      }
    }

    if (step == 0) result.loss_log.push_back({0, loss});
    window_loss += loss;
    ++window_count;
    if ((step + 1) % 1000 == 0 || step + 1 == cfg.max_steps) {
      result.loss_log.push_back({step + 1, window_loss / window_count});
      window_loss = 0.0;
      window_count = 0;
    }
  }
  return result;
}

PredictionList rank_tails(const KgeParams& params, EntityId head,
                          RelationId relation) {
  PredictionList list;
  list.head = head;
  list.relation = relation;
  const auto n = static_cast<EntityId>(params.entity_emb.rows());
  list.entries.reserve(n);
  for (EntityId t = 0; t < n; ++t) {
    list.entries.push_back(Prediction{t, score(params, head, relation, t), {}});
  }
  sort_predictions(list);
  return list;
}

std::vector<KgeTrainConfig> sample_kge_grid(const KgeTrainConfig& base,
                                            int draws, std::uint64_t seed) {
  Rng rng(seed);
  const double lo = std::log(0.001), hi = std::log(0.2);
  std::vector<KgeTrainConfig> grid;
  for (int i = 0; i < draws; ++i) {
    KgeTrainConfig c = base;
    c.learning_rate = std::exp(rng.uniform(lo, hi));
    grid.push_back(c);
  }
  return grid;
}

void save_kge(const std::filesystem::path& path, const KgeParams& params,
              const std::string& metadata_json) {
  nlohmann::ordered_json meta;
  meta["entity_count"] = params.entity_emb.rows();
  meta["relation_count"] = params.relation_emb.rows();
  meta["dim"] = params.dim();
  meta["config"] = metadata_json.empty() ? nlohmann::json::object()
                                         : nlohmann::json::parse(metadata_json);
  const auto tensors = params.tensors();
  write_checkpoint(path, {to_string(params.kind), meta.dump()}, tensors);
}

KgeParams load_kge(const std::filesystem::path& path) {
  const CheckpointHeader header = read_checkpoint_header(path);
  KgeParams p;
  p.kind = kge_kind_from_string(header.model_kind);
  const auto meta = nlohmann::json::parse(header.metadata_json);
  p.entity_emb = Matrix(meta["entity_count"].get<Eigen::Index>(),
                        meta["dim"].get<Eigen::Index>());
  p.relation_emb = Matrix(meta["relation_count"].get<Eigen::Index>(),
                          meta["dim"].get<Eigen::Index>());
  const auto tensors = p.tensors();
  read_checkpoint(path, tensors);
  return p;
}

}  // namespace kgwalk
