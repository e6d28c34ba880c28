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

#include <gtest/gtest.h>

#include <algorithm>
#include <set>

#include "kgwalk/synth_data.hpp"
#include "kgwalk/walk_env.hpp"
#include "support/fixtures.hpp"

namespace kgwalk {
namespace {

using testing::GraphBuilder;
using testing::TempDir;

// Ibuprofen -treats-> Headache, Ibuprofen -binds-> COX1 -associates-> Headache
KnowledgeGraph toy() {
  return augment_inverses(GraphBuilder()
                              .entity("Ibuprofen", "Compound")
                              .entity("COX1", "Gene")
                              .entity("Headache", "Disease")
                              .entity("Lonely", "Disease")
                              .triple("Ibuprofen", "treats", "Headache")
                              .triple("Ibuprofen", "binds", "COX1")
                              .triple("COX1", "associates", "Headache")
                              .build());
}

Query treats_query(const KnowledgeGraph& kg) {
  return Query{kg.entity_id("Ibuprofen"), kg.relation_id("treats"),
               {kg.entity_id("Headache")}, kg.type_id("Disease")};
}

bool contains(const std::vector<Action>& actions, Action a) {
  return std::find(actions.begin(), actions.end(), a) != actions.end();
}

TEST(WalkEnv, ResetStartsAtHead) {
  const auto kg = toy();
  const WalkEnv env(kg, {});
  const Query q = treats_query(kg);
  const WalkState s = env.reset(q, WalkMode::kEval);
  EXPECT_EQ(s.current, q.head);
  EXPECT_EQ(s.step, 0);
  EXPECT_TRUE(s.history.empty());
  const WalkState again = env.reset(q, WalkMode::kEval);
  EXPECT_EQ(again.current, s.current);
  EXPECT_EQ(again.history, s.history);
}

TEST(WalkEnv, ResetUnknownHead) {
  const auto kg = toy();
  const WalkEnv env(kg, {});
  Query q = treats_query(kg);
  q.head = 99;
  EXPECT_THROW(env.reset(q, WalkMode::kEval), ValidationError);
}

TEST(WalkEnv, IsolatedNodeOnlyNoOp) {
  const auto kg = toy();
  const WalkEnv env(kg, {});
  Query q = treats_query(kg);
  q.head = kg.entity_id("Lonely");
  const auto actions = env.legal_actions(env.reset(q, WalkMode::kTrain));
  ASSERT_EQ(actions.size(), 1u);
  EXPECT_EQ(actions[0], (Action{kNoOpRelation, q.head}));
}

TEST(WalkEnv, TrainingMasksDirectAnswerEdge) {
  const auto kg = toy();
  const WalkEnv env(kg, {});
  const Query q = treats_query(kg);
  const Action direct{q.relation, kg.entity_id("Headache")};
  EXPECT_FALSE(contains(env.legal_actions(env.reset(q, WalkMode::kTrain)), direct));
  EXPECT_TRUE(contains(env.legal_actions(env.reset(q, WalkMode::kEval)), direct));
}

TEST(WalkEnv, MaskHoldsAfterNoOpAtHead) {
  const auto kg = toy();
  const WalkEnv env(kg, {});
  const Query q = treats_query(kg);
  const Action direct{q.relation, kg.entity_id("Headache")};
  WalkState s = env.reset(q, WalkMode::kTrain);
  s = env.step(s, 0);  // NO_OP
  EXPECT_EQ(s.current, q.head);
  EXPECT_FALSE(contains(env.legal_actions(s), direct));
}

TEST(WalkEnv, StepSemantics) {
  const auto kg = toy();
  const WalkEnv env(kg, EnvConfig{3, 200, 0});
  const Query q = treats_query(kg);
  WalkState s = env.reset(q, WalkMode::kEval);
  const auto actions = env.legal_actions(s);
  // NO_OP keeps the entity.
  WalkState n = env.step(s, actions, 0);
  EXPECT_EQ(n.current, q.head);
  EXPECT_EQ(n.step, 1);
  // (treats, Headache) from Ibuprofen.
  const Action direct{q.relation, kg.entity_id("Headache")};
  const auto it = std::find(actions.begin(), actions.end(), direct);
  ASSERT_NE(it, actions.end());
  WalkState moved = env.step(s, actions, static_cast<std::size_t>(it - actions.begin()));
  EXPECT_EQ(moved.current, kg.entity_id("Headache"));
  EXPECT_EQ(moved.history.size(), 1u);
  EXPECT_THROW(env.step(s, actions.size()), ValidationError);
  // T NO_OPs end at the head and the state is terminal.
  for (int i = 0; i < 3; ++i) s = env.step(s, 0);
  EXPECT_TRUE(env.terminal(s));
  EXPECT_EQ(s.current, q.head);
  EXPECT_THROW(env.legal_actions(s), ValidationError);
  EXPECT_THROW(env.step(s, 0), ValidationError);
}

TEST(WalkEnv, WalksStayWithinTHops) {
  for (std::uint64_t seed = 0; seed < 15; ++seed) {
    const auto kg = augment_inverses(generate_random(20, 2, 30, 2, seed));
    const WalkEnv env(kg, EnvConfig{3, 200, seed});
    // BFS distances from every head.
    for (EntityId h = 0; h < kg.entity_count(); h += 3) {
      std::vector<int> dist(kg.entity_count(), -1);
      std::vector<EntityId> frontier{h};
      dist[h] = 0;
      for (int d = 1; d <= 3; ++d) {
        std::vector<EntityId> next;
        for (EntityId e : frontier) {
          for (const Action& a : kg.outgoing(e)) {
            if (dist[a.entity] < 0) {
              dist[a.entity] = d;
              next.push_back(a.entity);
            }
          }
        }
        frontier = std::move(next);
      }
      Query q{h, 1, {}, 0};
      Rng rng(seed * 100 + h);
      for (int trial = 0; trial < 10; ++trial) {
        WalkState s = env.reset(q, WalkMode::kEval);
        while (!env.terminal(s)) {
          const auto actions = env.legal_actions(s);
          s = env.step(s, actions, rng.uniform_index(actions.size()));
          ASSERT_GE(dist[s.current], 0);
          ASSERT_LE(dist[s.current], s.step);
        }
      }
    }
  }
}

Rollout path_of(const KnowledgeGraph& kg, std::initializer_list<std::pair<const char*, const char*>> steps) {
  Rollout r;
  r.head = kg.entity_id("Ibuprofen");
  r.query_relation = kg.relation_id("treats");
  for (const auto& [rel, ent] : steps) {
    const bool noop = std::string(rel) == "NOOP";
    r.steps.push_back({noop ? kNoOpRelation : kg.relation_id(rel), kg.entity_id(ent)});
  }
  return r;
}

TEST(Metapath, MatchAndNoOpDeletion) {
  const auto kg = toy();
  const Metapath mp = parse_metapath("Compound\tbinds\tGene\tassociates\tDisease", kg);
  EXPECT_TRUE(mp.valid());
  EXPECT_EQ(render_metapath(mp, kg), "Compound -binds-> Gene -associates-> Disease");
  const Rollout p = path_of(kg, {{"binds", "COX1"}, {"associates", "Headache"}});
  EXPECT_TRUE(match_metapath(p, mp, kg));
  const Rollout with_noop =
      path_of(kg, {{"binds", "COX1"}, {"NOOP", "COX1"}, {"associates", "Headache"}});
  EXPECT_TRUE(match_metapath(with_noop, mp, kg));
  const Rollout noops = path_of(kg, {{"NOOP", "Ibuprofen"}, {"NOOP", "Ibuprofen"}});
  EXPECT_FALSE(match_metapath(noops, mp, kg));
  // Prefixes do not count.
  const Rollout prefix = path_of(kg, {{"binds", "COX1"}, {"NOOP", "COX1"}});
  EXPECT_FALSE(match_metapath(prefix, mp, kg));
}

TEST(Metapath, NoOpInsertionInvarianceProperty) {
  const auto kg = toy();
  const Metapath mp = parse_metapath("Compound\tbinds\tGene\tassociates\tDisease", kg);
  const Metapath direct = parse_metapath("Compound\ttreats\tDisease", kg);
  const Rollout base = path_of(kg, {{"binds", "COX1"}, {"associates", "Headache"}});
  Rng rng(4);
  for (int trial = 0; trial < 50; ++trial) {
    Rollout r = base;
    const int inserts = 1 + static_cast<int>(rng.uniform_index(3));
    for (int i = 0; i < inserts; ++i) {
      const std::size_t pos = rng.uniform_index(r.steps.size() + 1);
      const EntityId at = pos == 0 ? r.head : r.steps[pos - 1].entity;
      r.steps.insert(r.steps.begin() + static_cast<std::ptrdiff_t>(pos), {kNoOpRelation, at});
    }
    EXPECT_EQ(match_metapath(r, mp, kg), match_metapath(base, mp, kg));
    EXPECT_EQ(match_metapath(r, direct, kg), match_metapath(base, direct, kg));
  }
}

TEST(Metapath, ParseErrors) {
  const auto kg = toy();
  EXPECT_THROW(parse_metapath("Compound", kg), ValidationError);
  EXPECT_THROW(parse_metapath("Compound\tbinds", kg), ValidationError);
  EXPECT_THROW(parse_metapath("Compound\tunknown\tGene", kg), ValidationError);
  EXPECT_THROW(parse_metapath("Compound\t__no_op__\tCompound", kg), ValidationError);
  const Metapath inv = parse_metapath("Disease\tassociates__inv\tGene", kg);
  EXPECT_EQ(inv.relations[0], kg.inverse(kg.relation_id("associates")));
  TempDir dir;
  testing::write_text(dir / "m.tsv", "# comment\nCompound\ttreats\tDisease\nbad\n");
  try {
    load_metapaths(dir / "m.tsv", kg);
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 3u);
  }
}

TEST(Reward, Definition) {
  const auto kg = toy();
  const Query q = treats_query(kg);
  const std::vector<Metapath> mps{
      parse_metapath("Compound\tbinds\tGene\tassociates\tDisease", kg),
      parse_metapath("Compound\tbinds\tGene\tassociates\tDisease", kg)};
  const Rollout hit_rule = path_of(kg, {{"binds", "COX1"}, {"associates", "Headache"}});
  const Rollout miss = path_of(kg, {{"binds", "COX1"}});
  EXPECT_DOUBLE_EQ(terminal_reward(hit_rule, q, {}, {0.0, 1.0}, kg), 1.0);
  EXPECT_DOUBLE_EQ(terminal_reward(miss, q, mps, {1.0, 1.0}, kg), 0.0);
  // Two matching metapaths still give one bonus.
  EXPECT_DOUBLE_EQ(terminal_reward(hit_rule, q, mps, {0.1, 1.0}, kg), 1.1);
  // The bonus does not depend on the answer being right.
  Query wrong = q;
  wrong.answers = {kg.entity_id("Lonely")};
  EXPECT_DOUBLE_EQ(terminal_reward(hit_rule, wrong, mps, {0.5, 1.0}, kg), 0.5);
}

TEST(Reward, MinervaValuesAndMonotoneInLambda) {
  const auto kg = augment_inverses(generate_random(12, 2, 30, 2, 8));
  const Metapath mp = [&] {
    Metapath m;
    m.types = {0, 1};
    m.relations = {1};
    return m;
  }();
  const std::vector<Metapath> mps{mp};
  const WalkEnv env(kg, EnvConfig{2, 200, 0});
  Rng rng(3);
  for (int trial = 0; trial < 200; ++trial) {
    Query q{static_cast<EntityId>(rng.uniform_index(12)), 1,
            {static_cast<EntityId>(rng.uniform_index(12))}, 0};
    WalkState s = env.reset(q, WalkMode::kEval);
    while (!env.terminal(s)) {
      const auto a = env.legal_actions(s);
      s = env.step(s, a, rng.uniform_index(a.size()));
    }
    const Rollout r{q.head, q.relation, s.history, 0.0};
    const double r0 = terminal_reward(r, q, mps, {0.0, 1.0}, kg);
    EXPECT_TRUE(r0 == 0.0 || r0 == 1.0);
    double prev = r0;
    for (double lambda : {0.1, 0.5, 1.0, 2.0}) {
      const double v = terminal_reward(r, q, mps, {lambda, 1.0}, kg);
      EXPECT_GE(v, prev);
      prev = v;
    }
  }
}

TEST(GroupQueries, CollectsAnswers) {
  const auto kg = GraphBuilder().entity("A", "X").entity("B", "Y").entity("C", "Y")
                      .triple("A", "r", "B").triple("A", "r", "C").build();
  const auto queries = group_queries(kg, kg.triples());
  ASSERT_EQ(queries.size(), 1u);
  EXPECT_EQ(queries[0].answers.size(), 2u);
  EXPECT_EQ(queries[0].target_type, kg.type_id("Y"));
  const auto mixed = GraphBuilder().entity("A", "X").entity("B", "Y").entity("C", "Z")
                         .triple("A", "r", "B").triple("A", "r", "C").build();
  EXPECT_THROW(group_queries(mixed, mixed.triples()), ValidationError);
}

}  // namespace
}  // namespace kgwalk
