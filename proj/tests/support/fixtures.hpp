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

// Small graph builders and scratch directories for tests.

#pragma once

#include <filesystem>
#include <array>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "kgwalk/kg_store.hpp"

namespace kgwalk::testing {

// Builds a raw graph from string triples; relations are numbered in order of
// first appearance, entities in order of add_entity().
class GraphBuilder {
 public:
  GraphBuilder& entity(const std::string& key, const std::string& type);
  GraphBuilder& triple(const std::string& head, const std::string& relation,
                       const std::string& tail);
  // Registers a relation without adding triples.
  GraphBuilder& relation(const std::string& name);
  KnowledgeGraph build() const;

 private:
  std::vector<std::pair<std::string, std::string>> entities_;
  std::vector<std::string> relations_;
  std::vector<std::array<std::string, 3>> triples_;
};

// Removed on destruction.
class TempDir {
 public:
  TempDir();
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

void write_text(const std::filesystem::path& path, const std::string& text);
std::string read_text(const std::filesystem::path& path);

}  // namespace kgwalk::testing
