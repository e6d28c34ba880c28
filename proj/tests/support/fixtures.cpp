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

#include "support/fixtures.hpp"

#include <algorithm>
#include <atomic>
#include <fstream>
#include <sstream>

#include <unistd.h>

namespace kgwalk::testing {

GraphBuilder& GraphBuilder::entity(const std::string& key, const std::string& type) {
  entities_.emplace_back(key, type);
  return *this;
}

GraphBuilder& GraphBuilder::relation(const std::string& name) {
  if (std::find(relations_.begin(), relations_.end(), name) == relations_.end()) {
    relations_.push_back(name);
  }
  return *this;
}

GraphBuilder& GraphBuilder::triple(const std::string& head, const std::string& relation,
                                   const std::string& tail) {
  this->relation(relation);
  triples_.push_back({head, relation, tail});
  return *this;
}

KnowledgeGraph GraphBuilder::build() const {
  auto table = std::make_shared<EntityTable>();
  for (const auto& [key, type] : entities_) {
    auto it = std::find(table->type_names.begin(), table->type_names.end(), type);
    TypeId t = static_cast<TypeId>(it - table->type_names.begin());
    if (it == table->type_names.end()) table->type_names.push_back(type);
    table->by_key.emplace(key, static_cast<EntityId>(table->keys.size()));
    table->keys.push_back(key);
    table->display_names.push_back(key);
    table->types.push_back(t);
  }
  std::vector<std::string> names{std::string(kNoOpName)};
  names.insert(names.end(), relations_.begin(), relations_.end());
  std::vector<Triple> triples;
  for (const auto& [h, r, t] : triples_) {
    const auto rel = static_cast<RelationId>(
        std::find(relations_.begin(), relations_.end(), r) - relations_.begin() + 1);
    triples.push_back(Triple{table->by_key.at(h), rel, table->by_key.at(t)});
  }
  return KnowledgeGraph(std::move(table), std::move(names), {}, std::move(triples));
}

TempDir::TempDir() {
  static std::atomic<int> counter{0};
  path_ = std::filesystem::temp_directory_path() /
          ("kgwalk_test_" + std::to_string(::getpid()) + "_" +
           std::to_string(counter.fetch_add(1)));
  std::filesystem::remove_all(path_);
  std::filesystem::create_directories(path_);
}

TempDir::~TempDir() {
  std::error_code ec;
  std::filesystem::remove_all(path_, ec);
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace kgwalk::testing
