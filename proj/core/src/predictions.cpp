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

#include "kgwalk/predictions.hpp"

#include <algorithm>
#include <istream>
#include <map>
#include <ostream>

#include "json.hpp"

namespace kgwalk {

namespace {

EntityId resolve_entity(std::string_view token, const KnowledgeGraph& kg) {
  if (auto e = kg.find_entity(token)) return *e;
  for (EntityId e = 0; e < kg.entity_count(); ++e) {
    if (kg.entity_name(e) == token) return e;
  }
  throw ValidationError("unknown entity '" + std::string(token) + "' in path");
}

}  // namespace

void sort_predictions(PredictionList& list) {
  std::sort(list.entries.begin(), list.entries.end(),
            [](const Prediction& a, const Prediction& b) {
              if (a.score != b.score) return a.score > b.score;
              return a.entity < b.entity;
            });
}

std::string render_path(const Rollout& path, const KnowledgeGraph& kg,
                        PathStyle style) {
  auto name = [&](EntityId e) -> const std::string& {
    return style.display_names ? kg.entity_name(e) : kg.entity_key(e);
  };
  std::string out = name(path.head);
  for (const Action& a : path.steps) {
    if (a.relation == kNoOpRelation && !style.include_noop) continue;
    out += " -";
    out += kg.relation_name(a.relation);
    out += "-> ";
    out += name(a.entity);
  }
  return out;
}

Rollout parse_path(std::string_view text, const KnowledgeGraph& kg,
                   RelationId query_relation) {
  Rollout path;
  path.query_relation = query_relation;
  std::size_t pos = text.find(" -");
  path.head = resolve_entity(text.substr(0, pos), kg);
  EntityId current = path.head;
  while (pos != std::string_view::npos) {
    const std::size_t arrow = text.find("-> ", pos + 2);
    if (arrow == std::string_view::npos) {
      throw ValidationError("malformed path '" + std::string(text) + "'");
    }
    const RelationId r = kg.relation_id(text.substr(pos + 2, arrow - pos - 2));
    const std::size_t next = text.find(" -", arrow + 3);
    const EntityId e = resolve_entity(
        text.substr(arrow + 3, next == std::string_view::npos
                                   ? std::string_view::npos
                                   : next - arrow - 3),
        kg);
    if (r == kNoOpRelation && e != current) {
      throw ValidationError("NO_OP step changes entity in '" +
                            std::string(text) + "'");
    }
    path.steps.push_back(Action{r, e});
    current = e;
    pos = next;
  }
  return path;
}

bool validate_witness(const Rollout& path, const KnowledgeGraph& kg) {
  if (path.head >= kg.entity_count()) return false;
  EntityId current = path.head;
  for (const Action& a : path.steps) {
    if (a.relation == kNoOpRelation) {
      if (a.entity != current) return false;
      continue;
    }
    if (!kg.has_edge(current, a.relation, a.entity)) return false;
    current = a.entity;
  }
  return true;
}

void write_prediction_dump(std::ostream& out,
                           std::span<const PredictionList> lists,
                           const KnowledgeGraph& kg) {
  for (const PredictionList& list : lists) {
    for (const Prediction& p : list.entries) {
      nlohmann::ordered_json j;
      j["head"] = kg.entity_key(list.head);
      j["relation"] = kg.relation_name(list.relation);
      j["candidate"] = kg.entity_key(p.entity);
      j["score"] = p.score;
      if (p.witness) {
        j["witness"] = render_path(*p.witness, kg);
      } else {
        j["witness"] = nullptr;
      }
      out << j.dump() << '\n';
    }
  }
}

std::vector<PredictionList> read_prediction_dump(std::istream& in,
                                                 const KnowledgeGraph& kg) {
  std::vector<PredictionList> lists;
  std::map<std::pair<EntityId, RelationId>, std::size_t> index;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw ParseError("<predictions>", line_no, e.what());
    }
    const EntityId head = kg.entity_id(j.at("head").get<std::string>());
    const RelationId rel = kg.relation_id(j.at("relation").get<std::string>());
    auto [it, inserted] = index.emplace(std::make_pair(head, rel), lists.size());
    if (inserted) {
      PredictionList list;
      list.head = head;
      list.relation = rel;
      lists.push_back(std::move(list));
    }
    Prediction p;
    p.entity = kg.entity_id(j.at("candidate").get<std::string>());
    p.score = j.at("score").get<double>();
    if (j.contains("witness") && !j.at("witness").is_null()) {
      p.witness = parse_path(j.at("witness").get<std::string>(), kg, rel);
      p.witness->log_probability = p.score;
    }
    lists[it->second].entries.push_back(std::move(p));
  }
  for (auto& list : lists) sort_predictions(list);
  return lists;
}

}  // namespace kgwalk
