// Copyright 2026 The APQ Search Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//
// Tensor files: little-endian 32-bit floats with a JSON sidecar {"shape": [...]}
// at <path>.json.

#ifndef APQ_TENSOR_IO_HPP_
#define APQ_TENSOR_IO_HPP_

#include <bit>
#include <cstdint>
#include <fstream>
#include <numeric>
#include <string>
#include <vector>

#include <json.hpp>

#include "apq/errors.hpp"

namespace apq {

struct Tensor {
  std::vector<std::int64_t> shape;
  std::vector<double> values;
};

inline std::string tensor_sidecar_path(const std::string& path) {
  return path + ".json";
}

inline Tensor load_tensor(const std::string& path) {
  std::ifstream sidecar(tensor_sidecar_path(path));
  if (!sidecar) {
    throw IoError("missing tensor sidecar: " + tensor_sidecar_path(path));
  }
  Tensor tensor;
  try {
    Json j;
    sidecar >> j;
    tensor.shape = j.at("shape").get<std::vector<std::int64_t>>();
  } catch (const Json::exception& e) {
    throw CorruptFileError("malformed tensor sidecar for " + path + ": " +
                           e.what());
  }
  std::int64_t count = 1;
  for (std::int64_t d : tensor.shape) {
    if (d < 1) throw CorruptFileError("nonpositive tensor dimension");
    count *= d;
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open tensor: " + path);
  tensor.values.reserve(static_cast<std::size_t>(count));
  for (std::int64_t i = 0; i < count; ++i) {
    unsigned char bytes[4];
    in.read(reinterpret_cast<char*>(bytes), 4);
    if (in.gcount() != 4) {
      throw CorruptFileError("tensor file shorter than its shape: " + path);
    }
    std::uint32_t bits = 0;
    for (int b = 0; b < 4; ++b) bits |= static_cast<std::uint32_t>(bytes[b]) << (8 * b);
    tensor.values.push_back(static_cast<double>(std::bit_cast<float>(bits)));
  }
  if (in.peek() != std::char_traits<char>::eof()) {
    throw CorruptFileError("tensor file longer than its shape: " + path);
  }
  return tensor;
}

inline void save_tensor(const Tensor& tensor, const std::string& path) {
  std::int64_t count = 1;
  for (std::int64_t d : tensor.shape) count *= d;
  if (count != static_cast<std::int64_t>(tensor.values.size())) {
    throw ConfigError("tensor shape does not match value count");
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write tensor: " + path);
  for (double v : tensor.values) {
    const std::uint32_t bits = std::bit_cast<std::uint32_t>(static_cast<float>(v));
    unsigned char bytes[4];
    for (int b = 0; b < 4; ++b) bytes[b] = static_cast<unsigned char>((bits >> (8 * b)) & 0xff);
    out.write(reinterpret_cast<const char*>(bytes), 4);
  }
  std::ofstream sidecar(tensor_sidecar_path(path));
  if (!sidecar) {
    throw IoError("cannot write tensor sidecar: " + tensor_sidecar_path(path));
  }
  sidecar << Json{{"shape", tensor.shape}}.dump() << "\n";
}

}  // namespace apq

#endif  // APQ_TENSOR_IO_HPP_
