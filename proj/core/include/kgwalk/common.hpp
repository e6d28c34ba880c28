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

#pragma once

#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>

namespace kgwalk {

using EntityId = std::uint32_t;
using RelationId = std::uint32_t;
using TypeId = std::uint32_t;

inline constexpr std::uint32_t kInvalidId =
    std::numeric_limits<std::uint32_t>::max();

// Base of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input line. `line()` is 1-based.
class ParseError : public Error {
 public:
  ParseError(const std::string& file, std::size_t line, const std::string& what);
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

// Input is well-formed but violates a contract (unknown entity, missing
// type, name collision, ...).
class ValidationError : public Error {
 public:
  using Error::Error;
};

// Training diverged (non-finite loss or gradient).
class TrainingError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

// Deterministic 64-bit generator (splitmix64-seeded xoshiro256**). The
// conversions below are fixed so sampled streams are identical on every
// platform, unlike the std:: distributions.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  std::uint64_t next_u64();
  // Uniform in [0, 1) with 53 random bits.
  double uniform();
  // Uniform in [0, n). n must be > 0.
  std::uint64_t uniform_index(std::uint64_t n);
  // Uniform in [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  double normal();

 private:
  std::uint64_t s_[4];
};

// Mixes a base seed with a stream index; used to derive independent
// per-episode and per-entity streams.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

// Shortest round-trippable decimal representation.
std::string format_double(double value);

// FNV-1a 64-bit.
std::uint64_t fnv1a64(const std::string& bytes);

}  // namespace kgwalk
