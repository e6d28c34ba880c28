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

#include "kgwalk/explain.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "json.hpp"

namespace kgwalk {

Metapath abstract_path(const Rollout& path, const KnowledgeGraph& kg) {
  Metapath mp;
  mp.types.push_back(kg.entity_type(path.head));
  for (const Action& a : path.steps) {
    if (a.relation == kNoOpRelation) continue;
    mp.relations.push_back(a.relation);
    mp.types.push_back(kg.entity_type(a.entity));
  }
  mp.name = render_metapath(mp, kg);
  return mp;
}

std::vector<MetapathStat> metapath_frequencies(std::span<const Rollout> paths,
                                               const KnowledgeGraph& kg,
                                               std::size_t top_k) {
  if (paths.empty()) throw ValidationError("metapath_frequencies: no paths");
  std::map<std::string, MetapathStat> by_name;
  for (const Rollout& path : paths) {
    Metapath mp = abstract_path(path, kg);
    auto [it, inserted] = by_name.try_emplace(mp.name);
    if (inserted) it->second.metapath = std::move(mp);
    ++it->second.count;
  }
  std::vector<MetapathStat> stats;
  stats.reserve(by_name.size());
  for (auto& [_, stat] : by_name) stats.push_back(std::move(stat));
  // by_name is already in pattern order; a stable sort keeps it for ties.
  std::stable_sort(stats.begin(), stats.end(),
                   [](const MetapathStat& a, const MetapathStat& b) {
                     return a.count > b.count;
                   });
  if (stats.size() > top_k) stats.resize(top_k);
  const double total = static_cast<double>(paths.size());
  for (MetapathStat& s : stats) {
    s.percent = 100.0 * static_cast<double>(s.count) / total;
  }
  return stats;
}

std::string metapath_table_text(std::span<const MetapathStat> stats) {
  std::size_t width = 8;
  for (const auto& s : stats) width = std::max(width, s.metapath.name.size());
  std::ostringstream out;
  out << "Metapath" << std::string(width - 8, ' ') << "  Count      %\n";
  for (const auto& s : stats) {
    char pct[32];
    std::snprintf(pct, sizeof(pct), "%5.1f", s.percent);
    char count[32];
    std::snprintf(count, sizeof(count), "%5zu", s.count);
    out << s.metapath.name << std::string(width - s.metapath.name.size(), ' ')
        << "  " << count << "  " << pct << '\n';
  }
  return out.str();
}

std::string metapath_table_json(std::span<const MetapathStat> stats) {
  auto arr = nlohmann::ordered_json::array();
  for (const auto& s : stats) {
    nlohmann::ordered_json j;
    j["metapath"] = s.metapath.name;
    j["count"] = s.count;
    j["percent"] = s.percent;
    arr.push_back(std::move(j));
  }
  return arr.dump(2) + "\n";
}

void export_explanations(std::ostream& out, std::span<const PredictionList> lists,
                         const KnowledgeGraph& kg) {
  struct Row {
    const PredictionList* list;
    const Prediction* prediction;
  };
  std::vector<Row> rows;
  for (const PredictionList& list : lists) {
    for (const Prediction& p : list.entries) {
      if (p.witness) rows.push_back({&list, &p});
    }
  }
  std::stable_sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
    return a.prediction->score > b.prediction->score;
  });
  const PathStyle style{true, false};
  for (const Row& row : rows) {
    const Rollout& path = *row.prediction->witness;
    nlohmann::ordered_json j;
    j["head"] = kg.entity_key(row.list->head);
    j["relation"] = kg.relation_name(row.list->relation);
    j["candidate"] = kg.entity_key(row.prediction->entity);
    j["candidate_name"] = kg.entity_name(row.prediction->entity);
    j["score"] = row.prediction->score;
    j["path"] = render_path(path, kg, style);
    j["metapath"] = abstract_path(path, kg).name;
    out << j.dump() << '\n';
  }
}

void export_explanations(const PredictionList& predictions,
                         const KnowledgeGraph& kg,
                         const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write explanations to '" + path.string() + "'");
  export_explanations(out, std::span<const PredictionList>(&predictions, 1), kg);
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

std::vector<Explanation> read_explanations(std::istream& in,
                                           const KnowledgeGraph& kg) {
  std::vector<Explanation> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw ParseError("<explanations>", line_no, e.what());
    }
    Explanation ex;
    ex.head = kg.entity_id(j.at("head").get<std::string>());
    ex.relation = kg.relation_id(j.at("relation").get<std::string>());
    ex.predicted = kg.entity_id(j.at("candidate").get<std::string>());
    ex.score = j.at("score").get<double>();
    ex.path = parse_path(j.at("path").get<std::string>(), kg, ex.relation);
    ex.path.log_probability = ex.score;
    out.push_back(std::move(ex));
  }
  return out;
}

}  // namespace kgwalk
