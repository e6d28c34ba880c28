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

#include "kgwalk/synth_data.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>
#include <unordered_set>

namespace kgwalk {

namespace {

enum PlantedRelation : RelationId {
  kTreats = 1,
  kBinds,
  kAssociates,
  kResembles,
  kInteracts,
  kParticipates,
  kPalliates,
  kUpregulates,
};

std::string padded(const char* prefix, int i) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%s_%03d", prefix, i);
  return buf;
}

}  // namespace

void PlantedGraphSpec::validate() const {
  if (n_compounds < 2 || n_genes < 1 || n_diseases < 2) {
    throw ValidationError(
        "planted graph needs at least 2 compounds, 1 gene and 2 diseases");
  }
  if (!(noise_rate >= 0.0 && noise_rate < 1.0)) {
    throw ValidationError("noise rate must be in [0, 1)");
  }
  for (double p : {binds_prob, associates_prob, distractor_prob}) {
    if (!(p >= 0.0 && p <= 1.0)) {
      throw ValidationError("edge probabilities must be in [0, 1]");
    }
  }
}

PlantedGraph generate_planted(const PlantedGraphSpec& spec) {
  spec.validate();
  auto table = std::make_shared<EntityTable>();
  table->type_names = {"Compound", "Gene", "Disease"};
  auto add = [&](const std::string& key, TypeId type) {
    const auto id = static_cast<EntityId>(table->keys.size());
    table->by_key.emplace(key, id);
    table->keys.push_back(key);
    table->display_names.push_back(key);
    table->types.push_back(type);
    return id;
  };
  std::vector<EntityId> compounds, genes, diseases;
  for (int i = 0; i < spec.n_compounds; ++i) compounds.push_back(add(padded("Compound", i), 0));
  for (int i = 0; i < spec.n_genes; ++i) genes.push_back(add(padded("Gene", i), 1));
  for (int i = 0; i < spec.n_diseases; ++i) diseases.push_back(add(padded("Disease", i), 2));

  Rng rng(spec.seed);
  std::vector<Triple> triples;
  auto sample_pairs = [&](const std::vector<EntityId>& from,
                          const std::vector<EntityId>& to, RelationId rel,
                          double prob) {
    for (EntityId a : from) {
      for (EntityId b : to) {
        if (a == b) continue;
        if (rng.uniform() < prob) triples.push_back(Triple{a, rel, b});
      }
    }
  };
  sample_pairs(compounds, genes, kBinds, spec.binds_prob);
  sample_pairs(genes, diseases, kAssociates, spec.associates_prob);

  // Rule closure.
  std::vector<std::vector<EntityId>> gene_diseases(table->keys.size());
  for (const Triple& t : triples) {
    if (t.relation == kAssociates) gene_diseases[t.head].push_back(t.tail);
  }
  std::set<std::pair<EntityId, EntityId>> closure;
  for (const Triple& t : triples) {
    if (t.relation != kBinds) continue;
    for (EntityId d : gene_diseases[t.tail]) closure.emplace(t.head, d);
  }
  if (closure.empty()) {
    throw ValidationError("planted spec yields no treats triples");
  }

  sample_pairs(compounds, compounds, kResembles, spec.distractor_prob);
  sample_pairs(genes, genes, kInteracts, spec.distractor_prob);
  sample_pairs(genes, diseases, kParticipates, spec.distractor_prob);
  sample_pairs(compounds, diseases, kPalliates, spec.distractor_prob);
  sample_pairs(diseases, genes, kUpregulates, spec.distractor_prob);

  std::vector<std::pair<EntityId, EntityId>> treats(closure.begin(), closure.end());
  const auto n_noise = static_cast<std::size_t>(
      std::llround(spec.noise_rate * static_cast<double>(treats.size())));
  if (n_noise > 0) {
    for (std::size_t i = treats.size(); i > 1; --i) {
      std::swap(treats[i - 1], treats[rng.uniform_index(i)]);
    }
    treats.resize(treats.size() - n_noise);
    std::set<std::pair<EntityId, EntityId>> present(treats.begin(), treats.end());
    const std::size_t free_pairs = compounds.size() * diseases.size() - closure.size();
    const std::size_t inserts = std::min(n_noise, free_pairs);
    std::size_t inserted = 0;
    while (inserted < inserts) {
      const EntityId c = compounds[rng.uniform_index(compounds.size())];
      const EntityId d = diseases[rng.uniform_index(diseases.size())];
      if (closure.contains({c, d}) || present.contains({c, d})) continue;
      present.emplace(c, d);
      treats.emplace_back(c, d);
      ++inserted;
    }
  }

  PlantedGraph out{
      KnowledgeGraph(std::make_shared<EntityTable>(), {std::string(kNoOpName)}, {}, {}),
      {}};
  for (const auto& [c, d] : treats) {
    triples.push_back(Triple{c, kTreats, d});
    out.treats.push_back(Triple{c, kTreats, d});
  }
  std::sort(out.treats.begin(), out.treats.end());
  std::vector<std::string> relations{std::string(kNoOpName), "treats", "binds",
                                     "associates", "resembles", "interacts",
                                     "participates", "palliates", "upregulates"};
  out.graph = KnowledgeGraph(std::move(table), std::move(relations), {},
                             std::move(triples));
  return out;
}

Metapath planted_rule(const KnowledgeGraph& kg) {
  Metapath mp;
  mp.types = {kg.type_id("Compound"), kg.type_id("Gene"), kg.type_id("Disease")};
  mp.relations = {kg.relation_id("binds"), kg.relation_id("associates")};
  mp.name = render_metapath(mp, kg);
  return mp;
}

KnowledgeGraph generate_random(std::size_t n_entities, std::size_t n_relations,
                               std::size_t n_triples, std::size_t n_types,
                               std::uint64_t seed) {
  const std::size_t space = n_entities * n_entities * n_relations;
  if (n_triples > space) {
    throw ValidationError("requested " + std::to_string(n_triples) +
                          " distinct triples but only " + std::to_string(space) +
                          " exist");
  }
  if (n_entities > 0 && n_types == 0) {
    throw ValidationError("entities need at least one type");
  }
  Rng rng(seed);
  auto table = std::make_shared<EntityTable>();
  for (std::size_t t = 0; t < n_types; ++t) {
    table->type_names.push_back("t" + std::to_string(t));
  }
  for (std::size_t e = 0; e < n_entities; ++e) {
    const std::string key = "e" + std::to_string(e);
    table->by_key.emplace(key, static_cast<EntityId>(e));
    table->keys.push_back(key);
    table->display_names.push_back(key);
    table->types.push_back(static_cast<TypeId>(rng.uniform_index(n_types)));
  }
  std::vector<std::string> relations{std::string(kNoOpName)};
  for (std::size_t r = 0; r < n_relations; ++r) {
    relations.push_back("r" + std::to_string(r));
  }

  auto decode = [&](std::uint64_t code) {
    const auto tail = static_cast<EntityId>(code % n_entities);
    code /= n_entities;
    const auto rel = static_cast<RelationId>(1 + code % n_relations);
    const auto head = static_cast<EntityId>(code / n_relations);
    return Triple{head, rel, tail};
  };
  std::vector<Triple> triples;
  triples.reserve(n_triples);
  if (n_triples * 2 > space) {
    std::vector<std::uint64_t> codes(space);
    for (std::uint64_t i = 0; i < space; ++i) codes[i] = i;
    for (std::size_t i = 0; i < n_triples; ++i) {
      std::swap(codes[i], codes[i + rng.uniform_index(space - i)]);
      triples.push_back(decode(codes[i]));
    }
  } else {
    std::unordered_set<std::uint64_t> used;
    while (triples.size() < n_triples) {
      const std::uint64_t code = rng.uniform_index(space);
      if (used.insert(code).second) triples.push_back(decode(code));
    }
  }
  return KnowledgeGraph(std::move(table), std::move(relations), {},
                        std::move(triples));
}

}  // namespace kgwalk
