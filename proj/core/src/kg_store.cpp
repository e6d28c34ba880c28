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

#include "kgwalk/kg_store.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "json.hpp"

namespace kgwalk {

namespace {

std::vector<std::string_view> split_tabs(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find('\t', start);
    if (pos == std::string_view::npos) {
      fields.push_back(line.substr(start));
      break;
    }
    fields.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return fields;
}

void strip_cr(std::string& line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
}

bool ends_with(std::string_view s, std::string_view suffix) {
  return s.size() >= suffix.size() &&
         s.substr(s.size() - suffix.size()) == suffix;
}

}  // namespace

KnowledgeGraph::KnowledgeGraph(std::shared_ptr<const EntityTable> entities,
                               std::vector<std::string> relation_names,
                               std::vector<RelationId> inverse_of,
                               std::vector<Triple> triples)
    : entities_(std::move(entities)),
      relation_names_(std::move(relation_names)),
      inverse_of_(std::move(inverse_of)),
      triples_(std::move(triples)) {
  if (relation_names_.empty() || relation_names_[0] != kNoOpName) {
    throw ValidationError("relation 0 must be the reserved NO_OP relation");
  }
  if (!inverse_of_.empty() && inverse_of_.size() != relation_names_.size()) {
    throw ValidationError("inverse table size does not match relation count");
  }
  const std::size_t n = entities_->keys.size();
  for (const Triple& t : triples_) {
    if (t.head >= n || t.tail >= n) {
      throw ValidationError("triple references an unregistered entity");
    }
    if (t.relation == kNoOpRelation || t.relation >= relation_names_.size()) {
      throw ValidationError("triple references an invalid relation");
    }
  }
  std::sort(triples_.begin(), triples_.end());
  triples_.erase(std::unique(triples_.begin(), triples_.end()), triples_.end());

  // CSR adjacency; triples are sorted by (head, relation, tail) so each row
  // comes out sorted by (relation, tail).
  offsets_.assign(n + 1, 0);
  for (const Triple& t : triples_) ++offsets_[t.head + 1];
  std::partial_sum(offsets_.begin(), offsets_.end(), offsets_.begin());
  adjacency_.resize(triples_.size());
  for (std::size_t i = 0; i < triples_.size(); ++i) {
    adjacency_[i] = Action{triples_[i].relation, triples_[i].tail};
  }

  type_counts_.assign(entities_->type_names.size(), 0);
  for (TypeId t : entities_->types) ++type_counts_[t];
}

std::optional<EntityId> KnowledgeGraph::find_entity(std::string_view key) const {
  auto it = entities_->by_key.find(std::string(key));
  if (it == entities_->by_key.end()) return std::nullopt;
  return it->second;
}

std::optional<RelationId> KnowledgeGraph::find_relation(
    std::string_view name) const {
  for (RelationId r = 0; r < relation_names_.size(); ++r) {
    if (relation_names_[r] == name) return r;
  }
  return std::nullopt;
}

std::optional<TypeId> KnowledgeGraph::find_type(std::string_view name) const {
  const auto& names = entities_->type_names;
  for (TypeId t = 0; t < names.size(); ++t) {
    if (names[t] == name) return t;
  }
  return std::nullopt;
}

EntityId KnowledgeGraph::entity_id(std::string_view key) const {
  if (auto e = find_entity(key)) return *e;
  throw ValidationError("unknown entity '" + std::string(key) + "'");
}

RelationId KnowledgeGraph::relation_id(std::string_view name) const {
  if (auto r = find_relation(name)) return *r;
  throw ValidationError("unknown relation '" + std::string(name) + "'");
}

TypeId KnowledgeGraph::type_id(std::string_view name) const {
  if (auto t = find_type(name)) return *t;
  throw ValidationError("unknown entity type '" + std::string(name) + "'");
}

RelationId KnowledgeGraph::inverse(RelationId r) const {
  if (inverse_of_.empty()) return r == kNoOpRelation ? r : kInvalidId;
  return inverse_of_[r];
}

std::span<const Action> KnowledgeGraph::outgoing(EntityId e) const {
  return std::span<const Action>(adjacency_.data() + offsets_[e],
                                 offsets_[e + 1] - offsets_[e]);
}

bool KnowledgeGraph::has_edge(EntityId head, RelationId relation,
                              EntityId tail) const {
  if (head >= entity_count()) return false;
  const auto row = outgoing(head);
  return std::binary_search(row.begin(), row.end(), Action{relation, tail});
}

std::vector<EntityId> KnowledgeGraph::entities_of_type(TypeId type) const {
  std::vector<EntityId> out;
  for (EntityId e = 0; e < entity_count(); ++e) {
    if (entities_->types[e] == type) out.push_back(e);
  }
  return out;
}

std::size_t KnowledgeGraph::count_of_type(TypeId type) const {
  return type < type_counts_.size() ? type_counts_[type] : 0;
}

KnowledgeGraph KnowledgeGraph::with_triples(std::vector<Triple> triples) const {
  std::vector<std::string> raw_names;
  if (augmented()) {
    // Drop generated inverse relations; raw ids are a prefix of the table.
    for (RelationId r = 0; r < relation_names_.size(); ++r) {
      if (r == kNoOpRelation || inverse_of_[r] > r) {
        raw_names.push_back(relation_names_[r]);
      }
    }
  } else {
    raw_names = relation_names_;
  }
  return KnowledgeGraph(entities_, std::move(raw_names), {}, std::move(triples));
}

KnowledgeGraph load_graph(const std::filesystem::path& triples_path,
                          const std::filesystem::path& types_path) {
  auto table = std::make_shared<EntityTable>();
  LoadReport report;

  std::ifstream types_in(types_path);
  if (!types_in) {
    throw IoError("cannot open types file '" + types_path.string() + "'");
  }
  std::unordered_map<std::string, TypeId> type_ids;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(types_in, line)) {
    ++line_no;
    strip_cr(line);
    if (line.empty() || line[0] == '#') continue;
    if (line_no == 1 && line == "id\tname\tkind") continue;
    const auto fields = split_tabs(line);
    if (fields.size() != 2 && fields.size() != 3) {
      throw ParseError(types_path.string(), line_no,
                       "expected 2 or 3 tab-separated fields, got " +
                           std::to_string(fields.size()));
    }
    const std::string key(fields[0]);
    const std::string type_name(fields.back());
    const std::string display(fields.size() == 3 ? fields[1] : fields[0]);
    if (key.empty() || type_name.empty()) {
      throw ParseError(types_path.string(), line_no, "empty field");
    }
    auto [type_it, inserted_type] =
        type_ids.emplace(type_name, static_cast<TypeId>(table->type_names.size()));
    if (inserted_type) table->type_names.push_back(type_name);
    auto existing = table->by_key.find(key);
    if (existing != table->by_key.end()) {
      if (table->types[existing->second] != type_it->second) {
        throw ValidationError("entity '" + key + "' has two types: '" +
                              table->type_names[table->types[existing->second]] +
                              "' and '" + type_name + "'");
      }
      continue;
    }
    table->by_key.emplace(key, static_cast<EntityId>(table->keys.size()));
    table->keys.push_back(key);
    table->display_names.push_back(display);
    table->types.push_back(type_it->second);
  }

  std::ifstream triples_in(triples_path);
  if (!triples_in) {
    throw IoError("cannot open triples file '" + triples_path.string() + "'");
  }
  std::vector<std::string> relation_names{std::string(kNoOpName)};
  std::unordered_map<std::string, RelationId> relation_ids;
  std::vector<Triple> triples;
  std::vector<std::string> missing;
  std::unordered_map<std::string, bool> missing_seen;
  line_no = 0;
  while (std::getline(triples_in, line)) {
    ++line_no;
    strip_cr(line);
    if (line.empty()) continue;
    if (line[0] == '#') {
      ++report.comment_lines;
      continue;
    }
    if (line_no == 1 && line == "source\tmetaedge\ttarget") continue;
    const auto fields = split_tabs(line);
    if (fields.size() != 3) {
      throw ParseError(triples_path.string(), line_no,
                       "expected 3 tab-separated fields, got " +
                           std::to_string(fields.size()));
    }
    ++report.triple_lines;
    const std::string relation(fields[1]);
    if (relation == kNoOpName) {
      throw ParseError(triples_path.string(), line_no,
                       "relation name '" + relation + "' is reserved");
    }
    auto [rel_it, inserted] = relation_ids.emplace(
        relation, static_cast<RelationId>(relation_names.size()));
    if (inserted) relation_names.push_back(relation);

    EntityId ends[2] = {kInvalidId, kInvalidId};
    for (int i = 0; i < 2; ++i) {
      const std::string key(fields[i == 0 ? 0 : 2]);
      auto it = table->by_key.find(key);
      if (it == table->by_key.end()) {
        if (!missing_seen[key]) {
          missing_seen[key] = true;
          missing.push_back(key);
        }
      } else {
        ends[i] = it->second;
      }
    }
    if (ends[0] != kInvalidId && ends[1] != kInvalidId) {
      triples.push_back(Triple{ends[0], rel_it->second, ends[1]});
    }
  }
  if (!missing.empty()) {
    std::ostringstream msg;
    msg << missing.size() << " entit" << (missing.size() == 1 ? "y" : "ies")
        << " in '" << triples_path.string() << "' missing from types file '"
        << types_path.string() << "':";
    const std::size_t shown = std::min<std::size_t>(missing.size(), 20);
    for (std::size_t i = 0; i < shown; ++i) msg << ' ' << missing[i];
    if (shown < missing.size()) msg << " ...";
    throw ValidationError(msg.str());
  }

  const std::size_t before = triples.size();
  KnowledgeGraph kg(std::move(table), std::move(relation_names), {},
                    std::move(triples));
  report.duplicates_dropped = before - kg.triple_count();
  kg.set_load_report(report);
  return kg;
}

void write_graph_tsv(const KnowledgeGraph& kg,
                     const std::filesystem::path& triples_path,
                     const std::filesystem::path& types_path) {
  std::ofstream types_out(types_path);
  if (!types_out) {
    throw IoError("cannot write '" + types_path.string() + "'");
  }
  for (EntityId e = 0; e < kg.entity_count(); ++e) {
    types_out << kg.entity_key(e) << '\t';
    if (kg.entity_name(e) != kg.entity_key(e)) {
      types_out << kg.entity_name(e) << '\t';
    }
    types_out << kg.type_name(kg.entity_type(e)) << '\n';
  }
  std::ofstream triples_out(triples_path);
  if (!triples_out) {
    throw IoError("cannot write '" + triples_path.string() + "'");
  }
  for (const Triple& t : kg.triples()) {
    if (kg.augmented() && kg.inverse(t.relation) < t.relation) continue;
    triples_out << kg.entity_key(t.head) << '\t' << kg.relation_name(t.relation)
                << '\t' << kg.entity_key(t.tail) << '\n';
  }
}

KnowledgeGraph augment_inverses(const KnowledgeGraph& kg) {
  if (kg.augmented()) {
    throw ValidationError("graph already carries inverse relations");
  }
  const std::size_t raw = kg.relation_count();
  std::vector<std::string> names = kg.relation_names();
  for (RelationId r = 1; r < raw; ++r) {
    if (ends_with(names[r], kInverseSuffix)) {
      throw ValidationError("relation '" + names[r] +
                            "' collides with the reserved inverse suffix '" +
                            std::string(kInverseSuffix) + "'");
    }
  }
  std::vector<RelationId> inverse(2 * raw - 1);
  inverse[kNoOpRelation] = kNoOpRelation;
  for (RelationId r = 1; r < raw; ++r) {
    const auto inv = static_cast<RelationId>(raw + r - 1);
    names.push_back(names[r] + std::string(kInverseSuffix));
    inverse[r] = inv;
    inverse[inv] = r;
  }
  std::vector<Triple> triples(kg.triples().begin(), kg.triples().end());
  triples.reserve(2 * triples.size());
  for (const Triple& t : kg.triples()) {
    triples.push_back(Triple{t.tail, inverse[t.relation], t.head});
  }
  KnowledgeGraph out(kg.entity_table(), std::move(names), std::move(inverse),
                     std::move(triples));
  out.set_load_report(kg.load_report());
  return out;
}

std::vector<Action> out_actions(const KnowledgeGraph& kg, EntityId e,
                                std::size_t max_out, std::uint64_t seed) {
  if (e >= kg.entity_count()) {
    throw ValidationError("unknown entity id " + std::to_string(e));
  }
  if (max_out < 1) throw ValidationError("max_out must be >= 1");
  const auto row = kg.outgoing(e);
  std::vector<Action> actions;
  actions.reserve(std::min(row.size() + 1, max_out));
  actions.push_back(Action{kNoOpRelation, e});
  const std::size_t keep = max_out - 1;
  if (row.size() <= keep) {
    actions.insert(actions.end(), row.begin(), row.end());
    return actions;
  }
  // Partial Fisher-Yates over indices, then restore sorted order.
  std::vector<std::size_t> idx(row.size());
  std::iota(idx.begin(), idx.end(), 0);
  Rng rng(derive_seed(seed, e));
  for (std::size_t i = 0; i < keep; ++i) {
    const std::size_t j = i + rng.uniform_index(idx.size() - i);
    std::swap(idx[i], idx[j]);
  }
  idx.resize(keep);
  std::sort(idx.begin(), idx.end());
  for (std::size_t i : idx) actions.push_back(row[i]);
  return actions;
}

std::vector<DatasetSplit> split_folds(const KnowledgeGraph& kg,
                                      RelationId target_relation, int k,
                                      std::uint64_t seed,
                                      double valid_fraction) {
  if (k < 2) throw ValidationError("fold count must be >= 2");
  if (valid_fraction < 0.0 || valid_fraction >= 1.0) {
    throw ValidationError("valid fraction must be in [0, 1)");
  }
  std::vector<Triple> target;
  for (const Triple& t : kg.triples()) {
    if (t.relation == target_relation) target.push_back(t);
  }
  if (target.size() < static_cast<std::size_t>(k)) {
    throw ValidationError("relation '" + kg.relation_name(target_relation) +
                          "' has " + std::to_string(target.size()) +
                          " triples; need at least " + std::to_string(k) +
                          " for " + std::to_string(k) + "-fold splitting");
  }
  Rng rng(derive_seed(seed, 0));
  for (std::size_t i = target.size(); i > 1; --i) {
    std::swap(target[i - 1], target[rng.uniform_index(i)]);
  }

  std::vector<DatasetSplit> folds;
  const std::size_t n = target.size();
  for (int f = 0; f < k; ++f) {
    const std::size_t begin = n * f / k;
    const std::size_t end = n * (f + 1) / k;
    DatasetSplit split;
    split.target_relation = target_relation;
    split.fold_index = f;
    split.seed = seed;
    split.test.assign(target.begin() + begin, target.begin() + end);
    std::vector<Triple> rest(target.begin(), target.begin() + begin);
    rest.insert(rest.end(), target.begin() + end, target.end());
    Rng fold_rng(derive_seed(seed, 1 + f));
    for (std::size_t i = rest.size(); i > 1; --i) {
      std::swap(rest[i - 1], rest[fold_rng.uniform_index(i)]);
    }
    const auto n_valid = static_cast<std::size_t>(
        std::llround(valid_fraction * static_cast<double>(rest.size())));
    split.valid.assign(rest.begin(), rest.begin() + n_valid);
    split.train.assign(rest.begin() + n_valid, rest.end());
    std::sort(split.train.begin(), split.train.end());
    std::sort(split.valid.begin(), split.valid.end());
    std::sort(split.test.begin(), split.test.end());
    folds.push_back(std::move(split));
  }
  return folds;
}

KnowledgeGraph training_graph(const KnowledgeGraph& kg,
                              const DatasetSplit& split) {
  const KnowledgeGraph raw =
      kg.augmented() ? kg.with_triples([&] {
        std::vector<Triple> out;
        for (const Triple& t : kg.triples()) {
          if (kg.inverse(t.relation) > t.relation) out.push_back(t);
        }
        return out;
      }())
                     : kg;
  std::vector<Triple> triples;
  triples.reserve(raw.triple_count());
  for (const Triple& t : raw.triples()) {
    if (t.relation != split.target_relation) triples.push_back(t);
  }
  triples.insert(triples.end(), split.train.begin(), split.train.end());
  return raw.with_triples(std::move(triples));
}

GraphStats graph_stats(const KnowledgeGraph& kg) {
  if (kg.entity_count() == 0 || kg.triple_count() == 0) {
    throw ValidationError("graph statistics are undefined for an empty graph");
  }
  if (kg.augmented()) {
    throw ValidationError("graph statistics are defined on the raw graph");
  }
  GraphStats stats;
  stats.node_count = kg.entity_count();
  stats.edge_count = kg.triple_count();
  std::vector<bool> type_used(kg.type_count(), false);
  for (EntityId e = 0; e < kg.entity_count(); ++e) {
    type_used[kg.entity_type(e)] = true;
  }
  stats.node_type_count =
      static_cast<std::size_t>(std::count(type_used.begin(), type_used.end(), true));
  std::vector<bool> rel_used(kg.relation_count(), false);
  std::vector<double> degree(kg.entity_count(), 0.0);
  for (const Triple& t : kg.triples()) {
    rel_used[t.relation] = true;
    degree[t.head] += 1.0;
    degree[t.tail] += 1.0;
  }
  stats.edge_type_count =
      static_cast<std::size_t>(std::count(rel_used.begin(), rel_used.end(), true));
  const double n = static_cast<double>(stats.node_count);
  stats.mean_degree = 2.0 * static_cast<double>(stats.edge_count) / n;

  std::sort(degree.begin(), degree.end());
  for (double p : {50.0, 90.0, 99.0, 100.0}) {
    auto rank = static_cast<std::size_t>(std::ceil(p / 100.0 * n));
    rank = std::clamp<std::size_t>(rank, 1, degree.size());
    stats.degree_percentiles.emplace_back(p, degree[rank - 1]);
  }
  double m2 = 0.0, m3 = 0.0;
  for (double d : degree) {
    const double c = d - stats.mean_degree;
    m2 += c * c;
    m3 += c * c * c;
  }
  m2 /= n;
  m3 /= n;
  stats.degree_skew = m2 > 0.0 ? m3 / std::pow(m2, 1.5) : 0.0;
  return stats;
}

std::string stats_to_text(const GraphStats& stats) {
  std::ostringstream out;
  out << "node_count\t" << stats.node_count << '\n'
      << "edge_count\t" << stats.edge_count << '\n'
      << "node_type_count\t" << stats.node_type_count << '\n'
      << "edge_type_count\t" << stats.edge_type_count << '\n'
      << "mean_degree\t" << format_double(stats.mean_degree) << '\n';
  for (const auto& [p, v] : stats.degree_percentiles) {
    out << "degree_p" << format_double(p) << '\t' << format_double(v) << '\n';
  }
  out << "degree_skew\t" << format_double(stats.degree_skew) << '\n';
  return out.str();
}

std::string stats_to_json(const GraphStats& stats) {
  nlohmann::ordered_json j;
  j["node_count"] = stats.node_count;
  j["edge_count"] = stats.edge_count;
  j["node_type_count"] = stats.node_type_count;
  j["edge_type_count"] = stats.edge_type_count;
  j["mean_degree"] = stats.mean_degree;
  auto& pct = j["degree_percentiles"] = nlohmann::ordered_json::array();
  for (const auto& [p, v] : stats.degree_percentiles) {
    pct.push_back({{"percentile", p}, {"value", v}});
  }
  j["degree_skew"] = stats.degree_skew;
  return j.dump(2) + "\n";
}

}  // namespace kgwalk
