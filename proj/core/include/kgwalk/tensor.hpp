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
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace kgwalk {

using Matrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

// Non-owning view of one named parameter tensor, stored row-major.
struct TensorRef {
  std::string name;
  double* data = nullptr;
  std::int64_t rows = 0;
  std::int64_t cols = 1;

  std::int64_t size() const { return rows * cols; }
  std::span<double> values() const {
    return {data, static_cast<std::size_t>(size())};
  }
};

inline TensorRef tensor_ref(std::string name, Matrix& m) {
  return {std::move(name), m.data(), m.rows(), m.cols()};
}
inline TensorRef tensor_ref(std::string name, Vector& v) {
  return {std::move(name), v.data(), v.rows(), 1};
}

// Versioned binary checkpoint: a model kind tag, a JSON metadata record and
// a list of named float64 tensors. Loading restores values bit-exactly.
struct CheckpointHeader {
  std::string model_kind;
  std::string metadata_json;
};

void write_checkpoint(const std::filesystem::path& path,
                      const CheckpointHeader& header,
                      std::span<const TensorRef> tensors);

CheckpointHeader read_checkpoint_header(const std::filesystem::path& path);

// Reads tensor values into `tensors`, which must match the stored names and
// shapes in order. Returns the header.
CheckpointHeader read_checkpoint(const std::filesystem::path& path,
                                 std::span<const TensorRef> tensors);

}  // namespace kgwalk
