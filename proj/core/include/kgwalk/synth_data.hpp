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

// Synthetic graphs for tests and desk-scale experiments.
//
// The planted graph has Compound, Gene and Disease entities and satisfies
//   (C, treats, D)  <=>  exists G: (C, binds, G) and (G, associates, D)
// before noise. Distractor relations come from a fixed menu:
//   resembles   Compound -> Compound
//   interacts   Gene     -> Gene
//   participates Gene    -> Disease
//   palliates   Compound -> Disease
//   upregulates Disease  -> Gene

#pragma once

#include <cstdint>
#include <vector>

#include "kgwalk/kg_store.hpp"
#include "kgwalk/walk_env.hpp"

namespace kgwalk {

struct PlantedGraphSpec {
  int n_compounds = 100;
  int n_genes = 50;
  int n_diseases = 40;
  double binds_prob = 0.04;
  double associates_prob = 0.05;
  // Per ordered pair, for each distractor relation.
  double distractor_prob = 0.05;
  // Fraction of treats triples replaced by spurious ones.
  double noise_rate = 0.0;
  std::uint64_t seed = 0;

  void validate() const;
};

struct PlantedGraph {
  KnowledgeGraph graph;
  // Final treats triples (after noise), sorted.
  std::vector<Triple> treats;
};

PlantedGraph generate_planted(const PlantedGraphSpec& spec);

// Compound -binds-> Gene -associates-> Disease on `kg` (raw or augmented).
Metapath planted_rule(const KnowledgeGraph& kg);

// Uniform random distinct triples over `n_relations` relations named r0..,
// entities e0.. with uniformly drawn types t0...
KnowledgeGraph generate_random(std::size_t n_entities, std::size_t n_relations,
                               std::size_t n_triples, std::size_t n_types,
                               std::uint64_t seed);

}  // namespace kgwalk
