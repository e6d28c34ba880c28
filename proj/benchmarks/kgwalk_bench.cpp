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

#include <benchmark/benchmark.h>

#include "kgwalk/beam_infer.hpp"
#include "kgwalk/eval_harness.hpp"
#include "kgwalk/policy_net.hpp"
#include "kgwalk/synth_data.hpp"

namespace {

using namespace kgwalk;

struct Fixture {
  KnowledgeGraph graph;
  KnowledgeGraph augmented;
  PolicyParams params;
  Query query;

  Fixture()
      : graph(generate_planted(PlantedGraphSpec{}).graph),
        augmented(augment_inverses(graph)),
        params(PolicyParams::initialize(
            PolicyDims{augmented.entity_count(), augmented.relation_count(), 32, 32, 0},
            1)) {
    const Triple t = graph.triples().front();
    query = Query{t.head, t.relation, {t.tail}, graph.entity_type(t.tail)};
  }
};

const Fixture& fixture() {
  static const Fixture f;
  return f;
}

void BM_OutActions(benchmark::State& state) {
  const auto g = generate_random(2000, 4, 60000, 3, 7);
  EntityId e = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(out_actions(g, e, static_cast<std::size_t>(state.range(0)), 3));
    e = (e + 1) % 2000;
  }
}
BENCHMARK(BM_OutActions)->Arg(16)->Arg(200);

void BM_BeamSearch(benchmark::State& state) {
  const Fixture& f = fixture();
  const WalkEnv env(f.augmented, EnvConfig{3, 200, 0});
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        beam_search(f.params, env, f.query, static_cast<std::size_t>(state.range(0))));
  }
}
BENCHMARK(BM_BeamSearch)->Arg(10)->Arg(100);

void BM_PolicyForwardBackward(benchmark::State& state) {
  const Fixture& f = fixture();
  const WalkEnv env(f.augmented, EnvConfig{3, 200, 0});
  PolicyParams grads = PolicyParams::zeros(f.params.dims);
  Rng rng(5);
  for (auto _ : state) {
    const EpisodeTrace trace = sample_episode(f.params, env, f.query, WalkMode::kTrain, rng);
    policy_gradients(f.params, trace, 0.5, 0.01, grads);
  }
}
BENCHMARK(BM_PolicyForwardBackward);

void BM_FilteredRank(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto g = generate_random(n, 1, n, 1, 11);
  PredictionList list{0, 1, {}};
  Rng rng(2);
  for (EntityId e = 0; e < n; ++e) list.entries.push_back({e, rng.uniform(), std::nullopt});
  FilterSet filter;
  filter.add(g.triples());
  const CandidateUniverse universe{&g, std::nullopt};
  for (auto _ : state) {
    benchmark::DoNotOptimize(filtered_rank(list, static_cast<EntityId>(n / 2), filter, universe));
  }
}
BENCHMARK(BM_FilteredRank)->Arg(1000)->Arg(50000);

}  // namespace

BENCHMARK_MAIN();
