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

#include "kgwalk/eval_harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include "json.hpp"

namespace kgwalk {

void FilterSet::add(std::span<const Triple> triples) {
  for (const Triple& t : triples) {
    auto& tails = tails_[key(t.head, t.relation)];
    auto it = std::lower_bound(tails.begin(), tails.end(), t.tail);
    if (it == tails.end() || *it != t.tail) tails.insert(it, t.tail);
  }
}

std::span<const EntityId> FilterSet::known_tails(EntityId head,
                                                 RelationId relation) const {
  auto it = tails_.find(key(head, relation));
  if (it == tails_.end()) return {};
  return it->second;
}

bool FilterSet::contains(EntityId head, RelationId relation,
                         EntityId tail) const {
  const auto tails = known_tails(head, relation);
  return std::binary_search(tails.begin(), tails.end(), tail);
}

std::size_t CandidateUniverse::size() const {
  return type ? kg->count_of_type(*type) : kg->entity_count();
}

bool CandidateUniverse::contains(EntityId e) const {
  if (e >= kg->entity_count()) return false;
  return !type || kg->entity_type(e) == *type;
}

std::size_t filtered_rank(const PredictionList& predictions, EntityId answer,
                          const FilterSet& filter,
                          const CandidateUniverse& universe) {
  if (answer >= universe.kg->entity_count()) {
    throw ValidationError("answer entity " + std::to_string(answer) +
                          " is not in the graph");
  }
  {
    std::vector<EntityId> ids;
    ids.reserve(predictions.entries.size());
    for (const Prediction& p : predictions.entries) ids.push_back(p.entity);
    std::sort(ids.begin(), ids.end());
    if (std::adjacent_find(ids.begin(), ids.end()) != ids.end()) {
      throw ValidationError(
          "prediction list contains duplicate entities; deduplicate before "
          "ranking");
    }
  }
  auto filtered = [&](EntityId e) {
    return e != answer &&
           filter.contains(predictions.head, predictions.relation, e);
  };

  const Prediction* hit = nullptr;
  for (const Prediction& p : predictions.entries) {
    if (p.entity == answer) {
      hit = &p;
      break;
    }
  }
  if (hit != nullptr) {
    std::size_t rank = 1;
    for (const Prediction& p : predictions.entries) {
      if (p.entity == answer || !universe.contains(p.entity) || filtered(p.entity)) {
        continue;
      }
      if (p.score >= hit->score) ++rank;
    }
    return rank;
  }
  // Unreached answer: last among every unfiltered universe entity.
  std::size_t removed = 0;
  for (EntityId e : filter.known_tails(predictions.head, predictions.relation)) {
    if (e != answer && universe.contains(e)) ++removed;
  }
  return universe.size() - removed;
}

PredictionList prune_by_type(const PredictionList& predictions,
                             TypeId target_type, const KnowledgeGraph& kg) {
  PredictionList out;
  out.head = predictions.head;
  out.relation = predictions.relation;
  for (const Prediction& p : predictions.entries) {
    if (kg.entity_type(p.entity) == target_type) out.entries.push_back(p);
  }
  return out;
}

FoldMetrics compute_metrics(std::span<const std::size_t> ranks) {
  if (ranks.empty()) throw ValidationError("compute_metrics: no ranks");
  FoldMetrics m;
  std::size_t h1 = 0, h3 = 0, h10 = 0;
  double rr = 0.0;
  for (std::size_t r : ranks) {
    if (r < 1) throw ValidationError("ranks are 1-based");
    h1 += r <= 1;
    h3 += r <= 3;
    h10 += r <= 10;
    rr += 1.0 / static_cast<double>(r);
  }
  const double n = static_cast<double>(ranks.size());
  m.hits1 = static_cast<double>(h1) / n;
  m.hits3 = static_cast<double>(h3) / n;
  m.hits10 = static_cast<double>(h10) / n;
  m.mrr = rr / n;
  m.count = ranks.size();
  return m;
}

namespace {

MetricSummary summarize(std::span<const FoldMetrics> folds,
                        double FoldMetrics::*field) {
  const double n = static_cast<double>(folds.size());
  double sum = 0.0;
  for (const FoldMetrics& f : folds) sum += f.*field;
  MetricSummary s;
  s.mean = sum / n;
  double ss = 0.0;
  for (const FoldMetrics& f : folds) {
    const double d = f.*field - s.mean;
    ss += d * d;
  }
  s.standard_error = std::sqrt(ss / (n - 1.0)) / std::sqrt(n);
  return s;
}

std::string format_cell(const MetricSummary& s) {
  // ".463±.041": three decimals, leading zero dropped.
  auto trim = [](double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.3f", v);
    std::string out(buf);
    if (out.rfind("0.", 0) == 0) out.erase(0, 1);
    return out;
  };
  return trim(s.mean) + "±" + trim(s.standard_error);
}

nlohmann::ordered_json summary_json(const MetricSummary& s) {
  return {{"mean", s.mean}, {"standard_error", s.standard_error}};
}

nlohmann::ordered_json aggregate_json(const AggregateMetrics& a) {
  nlohmann::ordered_json j;
  j["folds"] = a.folds;
  j["hits1"] = summary_json(a.hits1);
  j["hits3"] = summary_json(a.hits3);
  j["hits10"] = summary_json(a.hits10);
  j["mrr"] = summary_json(a.mrr);
  return j;
}

nlohmann::ordered_json fold_json(const FoldMetrics& m) {
  nlohmann::ordered_json j;
  j["count"] = m.count;
  j["hits1"] = m.hits1;
  j["hits3"] = m.hits3;
  j["hits10"] = m.hits10;
  j["mrr"] = m.mrr;
  return j;
}

}  // namespace

AggregateMetrics aggregate_folds(std::span<const FoldMetrics> per_fold) {
  if (per_fold.size() < 2) {
    throw ValidationError("aggregate_folds needs at least 2 folds");
  }
  AggregateMetrics a;
  a.folds = per_fold.size();
  a.hits1 = summarize(per_fold, &FoldMetrics::hits1);
  a.hits3 = summarize(per_fold, &FoldMetrics::hits3);
  a.hits10 = summarize(per_fold, &FoldMetrics::hits10);
  a.mrr = summarize(per_fold, &FoldMetrics::mrr);
  return a;
}

QueryRanks rank_test_triples(const Predictor& predict,
                             std::span<const Triple> test,
                             const KnowledgeGraph& kg, const FilterSet& filter,
                             std::vector<PredictionList>* predictions,
                             int threads) {
  std::map<std::pair<EntityId, RelationId>, std::size_t> group_of;
  std::vector<Query> groups;
  for (const Triple& t : test) {
    auto [it, inserted] =
        group_of.emplace(std::make_pair(t.head, t.relation), groups.size());
    if (inserted) {
      Query q;
      q.head = t.head;
      q.relation = t.relation;
      q.target_type = kg.entity_type(t.tail);
      groups.push_back(std::move(q));
    }
    auto& answers = groups[it->second].answers;
    answers.insert(std::lower_bound(answers.begin(), answers.end(), t.tail), t.tail);
  }

  std::vector<PredictionList> lists(groups.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    while (true) {
      const std::size_t i = next.fetch_add(1);
      if (i >= groups.size()) return;
      try {
        lists[i] = predict(groups[i]);
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = groups.size();
        return;
      }
    }
  };
  const int n_threads = std::max(1, threads);
  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int i = 0; i < n_threads; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);

  QueryRanks ranks;
  ranks.pre_pruning.reserve(test.size());
  ranks.post_pruning.reserve(test.size());
  const CandidateUniverse all{&kg, std::nullopt};
  for (const Triple& t : test) {
    const std::size_t g = group_of.at({t.head, t.relation});
    const TypeId type = kg.entity_type(t.tail);
    ranks.pre_pruning.push_back(filtered_rank(lists[g], t.tail, filter, all));
    const PredictionList pruned = prune_by_type(lists[g], type, kg);
    ranks.post_pruning.push_back(
        filtered_rank(pruned, t.tail, filter, CandidateUniverse{&kg, type}));
  }
  if (predictions != nullptr) *predictions = std::move(lists);
  return ranks;
}

std::string format_metrics_table(
    const std::string& title,
    std::span<const std::pair<std::string, AggregateMetrics>> rows) {
  std::size_t name_width = 5;
  for (const auto& [name, _] : rows) name_width = std::max(name_width, name.size());
  std::ostringstream out;
  auto pad = [](const std::string& s, std::size_t w) {
    return s + std::string(w > s.size() ? w - s.size() : 0, ' ');
  };
  out << title << '\n';
  out << pad("Model", name_width) << " | " << pad("HITS@1", 10) << " | "
      << pad("HITS@3", 10) << " | " << pad("HITS@10", 10) << " | MRR\n";
  out << std::string(name_width, '-') << "-+-" << std::string(10, '-') << "-+-"
      << std::string(10, '-') << "-+-" << std::string(10, '-') << "-+-"
      << std::string(10, '-') << '\n';
  for (const auto& [name, m] : rows) {
    // The ± sign is two bytes but one column.
    auto cell = [&](const MetricSummary& s) {
      const std::string c = format_cell(s);
      return c + std::string(c.size() - 1 < 10 ? 10 - (c.size() - 1) : 0, ' ');
    };
    out << pad(name, name_width) << " | " << cell(m.hits1) << " | "
        << cell(m.hits3) << " | " << cell(m.hits10) << " | "
        << format_cell(m.mrr) << '\n';
  }
  return out.str();
}

std::string fold_metrics_to_json(const FoldMetrics& m) {
  return fold_json(m).dump(2) + "\n";
}

std::string metrics_report_to_json(const MetricsReport& report) {
  nlohmann::ordered_json j;
  auto folds = [](const std::vector<FoldMetrics>& v) {
    auto arr = nlohmann::ordered_json::array();
    for (const auto& f : v) arr.push_back(fold_json(f));
    return arr;
  };
  j["pre_pruning"]["per_fold"] = folds(report.pre_pruning);
  j["post_pruning"]["per_fold"] = folds(report.post_pruning);
  if (report.pre_aggregate) {
    j["pre_pruning"]["aggregate"] = aggregate_json(*report.pre_aggregate);
  }
  if (report.post_aggregate) {
    j["post_pruning"]["aggregate"] = aggregate_json(*report.post_aggregate);
  }
  return j.dump(2) + "\n";
}

}  // namespace kgwalk
