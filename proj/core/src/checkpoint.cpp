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

#include <bit>
#include <cstring>
#include <fstream>

#include "kgwalk/common.hpp"
#include "kgwalk/tensor.hpp"

namespace kgwalk {

namespace {

constexpr char kMagic[8] = {'K', 'G', 'W', 'A', 'L', 'K', 'C', 'K'};
constexpr std::uint32_t kVersion = 1;

static_assert(std::endian::native == std::endian::little,
              "checkpoint format assumes a little-endian host");

template <typename T>
void put(std::ofstream& out, T value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

void put_string(std::ofstream& out, const std::string& s) {
  put<std::uint32_t>(out, static_cast<std::uint32_t>(s.size()));
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

template <typename T>
T get(std::ifstream& in, const std::filesystem::path& path) {
  T value;
  if (!in.read(reinterpret_cast<char*>(&value), sizeof(T))) {
    throw IoError("truncated checkpoint '" + path.string() + "'");
  }
  return value;
}

std::string get_string(std::ifstream& in, const std::filesystem::path& path) {
  const auto n = get<std::uint32_t>(in, path);
  std::string s(n, '\0');
  if (n > 0 && !in.read(s.data(), n)) {
    throw IoError("truncated checkpoint '" + path.string() + "'");
  }
  return s;
}

CheckpointHeader read_header(std::ifstream& in,
                             const std::filesystem::path& path) {
  char magic[8];
  if (!in.read(magic, sizeof(magic)) ||
      std::memcmp(magic, kMagic, sizeof(magic)) != 0) {
    throw IoError("'" + path.string() + "' is not a kgwalk checkpoint");
  }
  const auto version = get<std::uint32_t>(in, path);
  if (version != kVersion) {
    throw IoError("unsupported checkpoint version " + std::to_string(version));
  }
  CheckpointHeader header;
  header.model_kind = get_string(in, path);
  header.metadata_json = get_string(in, path);
  return header;
}

}  // namespace

void write_checkpoint(const std::filesystem::path& path,
                      const CheckpointHeader& header,
                      std::span<const TensorRef> tensors) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write checkpoint '" + path.string() + "'");
  out.write(kMagic, sizeof(kMagic));
  put<std::uint32_t>(out, kVersion);
  put_string(out, header.model_kind);
  put_string(out, header.metadata_json);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(tensors.size()));
  for (const TensorRef& t : tensors) {
    put_string(out, t.name);
    put<std::uint64_t>(out, static_cast<std::uint64_t>(t.rows));
    put<std::uint64_t>(out, static_cast<std::uint64_t>(t.cols));
    out.write(reinterpret_cast<const char*>(t.data),
              static_cast<std::streamsize>(t.size() * sizeof(double)));
  }
  if (!out) throw IoError("write failed for checkpoint '" + path.string() + "'");
}

CheckpointHeader read_checkpoint_header(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint '" + path.string() + "'");
  return read_header(in, path);
}

CheckpointHeader read_checkpoint(const std::filesystem::path& path,
                                 std::span<const TensorRef> tensors) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint '" + path.string() + "'");
  CheckpointHeader header = read_header(in, path);
  const auto count = get<std::uint32_t>(in, path);
  if (count != tensors.size()) {
    throw IoError("checkpoint '" + path.string() + "' holds " +
                  std::to_string(count) + " tensors, expected " +
                  std::to_string(tensors.size()));
  }
  for (const TensorRef& t : tensors) {
    const std::string name = get_string(in, path);
    const auto rows = get<std::uint64_t>(in, path);
    const auto cols = get<std::uint64_t>(in, path);
    if (name != t.name || rows != static_cast<std::uint64_t>(t.rows) ||
        cols != static_cast<std::uint64_t>(t.cols)) {
      throw IoError("checkpoint tensor '" + name + "' (" +
                    std::to_string(rows) + "x" + std::to_string(cols) +
                    ") does not match expected '" + t.name + "' (" +
                    std::to_string(t.rows) + "x" + std::to_string(t.cols) + ")");
    }
    if (!in.read(reinterpret_cast<char*>(t.data),
                 static_cast<std::streamsize>(t.size() * sizeof(double)))) {
      throw IoError("truncated checkpoint '" + path.string() + "'");
    }
  }
  return header;
}

}  // namespace kgwalk
