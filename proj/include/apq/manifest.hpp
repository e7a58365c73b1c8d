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

#ifndef APQ_MANIFEST_HPP_
#define APQ_MANIFEST_HPP_

#include <fstream>
#include <map>
#include <string>

#include <json.hpp>

#include "apq/errors.hpp"
#include "apq/json_io.hpp"

namespace apq {

inline constexpr char kToolVersion[] = "0.1.0";

// Emitted next to every output artifact. Two runs with the same command,
// config and input fingerprints produce identical outputs; the duration is
// informational and lives only here, never in the artifacts themselves.
struct RunManifest {
  std::string command;
  Json resolved_config;
  std::map<std::string, std::string> input_fingerprints;  // path -> hash
  std::string tool_version = kToolVersion;
  double wall_clock_seconds = 0.0;
};

inline Json manifest_to_json(const RunManifest& m) {
  Json inputs = Json::object();
  for (const auto& [path, fingerprint] : m.input_fingerprints) {
    inputs[path] = fingerprint;
  }
  return Json{{"command", m.command},
              {"config", m.resolved_config},
              {"input_fingerprints", inputs},
              {"tool_version", m.tool_version},
              {"wall_clock_seconds", m.wall_clock_seconds}};
}

inline void write_manifest(const RunManifest& m, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write manifest: " + path);
  out << manifest_to_json(m).dump(2) << "\n";
}

}  // namespace apq

#endif  // APQ_MANIFEST_HPP_
