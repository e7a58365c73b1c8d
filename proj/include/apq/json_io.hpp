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
// JSON (de)serialization for spaces, architectures and policies, plus the
// space fingerprint used to detect mismatched artifact reuse.

#ifndef APQ_JSON_IO_HPP_
#define APQ_JSON_IO_HPP_

#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "apq/errors.hpp"
#include "apq/search_space.hpp"

namespace apq {

using Json = nlohmann::json;

inline Json space_to_json(const SearchSpaceConfig& space) {
  Json stages = Json::array();
  for (const StageConfig& stage : space.stages) {
    stages.push_back({{"depth_choices", stage.depth_choices},
                      {"max_depth", stage.max_depth},
                      {"base_channels", stage.base_channels},
                      {"channel_choices", stage.channel_choices},
                      {"feature_hw", stage.feature_hw}});
  }
  return Json{{"stages", std::move(stages)},
              {"kernel_choices", space.kernel_choices},
              {"bit_choices", space.bit_choices},
              {"input_resolution", space.input_resolution},
              {"seed", space.seed}};
}

inline SearchSpaceConfig space_from_json(const Json& j) {
  SearchSpaceConfig space;
  try {
    space.stages.clear();
    for (const Json& js : j.at("stages")) {
      StageConfig stage;
      stage.depth_choices = js.at("depth_choices").get<std::vector<int>>();
      stage.max_depth = js.at("max_depth").get<int>();
      stage.base_channels = js.at("base_channels").get<int>();
      stage.channel_choices = js.at("channel_choices").get<std::vector<int>>();
      stage.feature_hw = js.value("feature_hw", 0);
      space.stages.push_back(std::move(stage));
    }
    space.kernel_choices = j.at("kernel_choices").get<std::vector<int>>();
    space.bit_choices = j.at("bit_choices").get<std::vector<int>>();
    space.input_resolution = j.value("input_resolution", 224);
    space.seed = j.value("seed", std::uint64_t{0});
  } catch (const Json::exception& e) {
    throw ConfigError(std::string("malformed space document: ") + e.what());
  }
  check_space(space);
  return space;
}

inline SearchSpaceConfig load_space(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open space file: " + path);
  Json j;
  try {
    in >> j;
  } catch (const Json::exception& e) {
    throw ConfigError("cannot parse " + path + ": " + e.what());
  }
  return space_from_json(j);
}

inline void save_space(const SearchSpaceConfig& space, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write space file: " + path);
  out << space_to_json(space).dump(2) << "\n";
}

inline std::string to_hex(std::uint64_t value) {
  std::ostringstream out;
  out << std::hex << std::setw(16) << std::setfill('0') << value;
  return out.str();
}

// Hash of the canonical space JSON; stored in checkpoints, cost tables and
// datasets so stale artifacts are detected before use.
inline std::string space_fingerprint(const SearchSpaceConfig& space) {
  return to_hex(fnv1a64(space_to_json(space).dump()));
}

inline Json arch_to_json(const ArchSpec& arch) {
  Json blocks = Json::array();
  for (const auto& block : arch.blocks) {
    if (block.has_value()) {
      blocks.push_back(Json{block->kernel, block->channels});
    } else {
      blocks.push_back(nullptr);
    }
  }
  return Json{{"depths", arch.depths}, {"blocks", std::move(blocks)}};
}

inline ArchSpec arch_from_json(const Json& j) {
  ArchSpec arch;
  arch.depths = j.at("depths").get<std::vector<int>>();
  for (const Json& b : j.at("blocks")) {
    if (b.is_null()) {
      arch.blocks.emplace_back(std::nullopt);
    } else {
      arch.blocks.emplace_back(BlockConfig{b.at(0).get<int>(), b.at(1).get<int>()});
    }
  }
  return arch;
}

inline Json policy_to_json(const QuantPolicy& policy) {
  Json bits = Json::array();
  for (const auto& b : policy.bits) {
    if (b.has_value()) {
      bits.push_back(Json{b->w_pw, b->a_pw, b->w_dw, b->a_dw});
    } else {
      bits.push_back(nullptr);
    }
  }
  return Json{{"bits", std::move(bits)}};
}

inline QuantPolicy policy_from_json(const Json& j) {
  QuantPolicy policy;
  for (const Json& b : j.at("bits")) {
    if (b.is_null()) {
      policy.bits.emplace_back(std::nullopt);
    } else {
      policy.bits.emplace_back(BlockBits{b.at(0).get<int>(), b.at(1).get<int>(),
                                         b.at(2).get<int>(), b.at(3).get<int>()});
    }
  }
  return policy;
}

// Encodings are exact {0,1} vectors; serialize them as integers.
inline Json encoding_to_json(const std::vector<double>& values) {
  Json arr = Json::array();
  for (double v : values) arr.push_back(v == 1.0 ? 1 : 0);
  return arr;
}

inline std::vector<double> encoding_from_json(const Json& arr) {
  std::vector<double> values;
  values.reserve(arr.size());
  for (const Json& v : arr) values.push_back(v.get<double>());
  return values;
}

inline std::string file_fingerprint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open file for fingerprinting: " + path);
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  char buffer[1 << 16];
  while (in) {
    in.read(buffer, sizeof(buffer));
    hash = fnv1a64(buffer, static_cast<std::size_t>(in.gcount()), hash);
  }
  return to_hex(hash);
}

}  // namespace apq

#endif  // APQ_JSON_IO_HPP_
