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
// Dataset files are JSONL: a header line {space_fingerprint, oracle_config}
// followed by one record per line {arch, policy|null, encoding, accuracy}.

#ifndef APQ_DATASET_IO_HPP_
#define APQ_DATASET_IO_HPP_

#include <fstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "apq/errors.hpp"
#include "apq/json_io.hpp"
#include "apq/oracle.hpp"
#include "apq/predictor.hpp"

namespace apq {

inline Json oracle_config_to_json(const OracleConfig& cfg) {
  return Json{{"seed", cfg.seed},
              {"acc_floor", cfg.acc_floor},
              {"acc_ceil", cfg.acc_ceil},
              {"noise_amplitude", cfg.noise_amplitude},
              {"degradation_scale", cfg.degradation_scale},
              {"interaction_scale", cfg.interaction_scale}};
}

inline OracleConfig oracle_config_from_json(const Json& j) {
  OracleConfig cfg;
  cfg.seed = j.value("seed", std::uint64_t{0});
  cfg.acc_floor = j.value("acc_floor", cfg.acc_floor);
  cfg.acc_ceil = j.value("acc_ceil", cfg.acc_ceil);
  cfg.noise_amplitude = j.value("noise_amplitude", cfg.noise_amplitude);
  cfg.degradation_scale = j.value("degradation_scale", cfg.degradation_scale);
  cfg.interaction_scale = j.value("interaction_scale", cfg.interaction_scale);
  cfg.check_valid();
  return cfg;
}

class DatasetWriter {
 public:
  DatasetWriter(const std::string& path, const std::string& fingerprint,
                const OracleConfig& oracle_cfg)
      : out_(path) {
    if (!out_) throw IoError("cannot write dataset: " + path);
    const Json header{{"space_fingerprint", fingerprint},
                      {"oracle_config", oracle_config_to_json(oracle_cfg)}};
    out_ << header.dump() << "\n";
  }

  void write(const DatasetRecord& record) {
    Json line{{"arch", arch_to_json(record.arch)},
              {"policy", record.policy.has_value()
                             ? policy_to_json(*record.policy)
                             : Json(nullptr)},
              {"encoding", encoding_to_json(record.encoding)},
              {"accuracy", record.accuracy}};
    out_ << line.dump() << "\n";
    ++count_;
  }

  std::size_t count() const { return count_; }

 private:
  std::ofstream out_;
  std::size_t count_ = 0;
};

struct LoadedDataset {
  std::string space_fingerprint;
  OracleConfig oracle_config;
  std::vector<DatasetRecord> records;

  bool mixed_precision() const {
    return !records.empty() && records.front().policy.has_value();
  }

  std::vector<LabeledSample> samples() const {
    std::vector<LabeledSample> out;
    out.reserve(records.size());
    for (const DatasetRecord& r : records) {
      out.push_back(LabeledSample{r.encoding, r.accuracy});
    }
    return out;
  }
};

inline LoadedDataset load_dataset(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open dataset: " + path);
  std::string line;
  if (!std::getline(in, line)) {
    throw CorruptFileError("dataset has no header line: " + path);
  }
  LoadedDataset loaded;
  try {
    const Json header = Json::parse(line);
    loaded.space_fingerprint = header.at("space_fingerprint").get<std::string>();
    loaded.oracle_config = oracle_config_from_json(header.at("oracle_config"));
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      const Json j = Json::parse(line);
      DatasetRecord record;
      record.arch = arch_from_json(j.at("arch"));
      if (!j.at("policy").is_null()) {
        record.policy = policy_from_json(j.at("policy"));
      }
      record.encoding = encoding_from_json(j.at("encoding"));
      record.accuracy = j.at("accuracy").get<double>();
      loaded.records.push_back(std::move(record));
    }
  } catch (const Json::exception& e) {
    throw CorruptFileError("malformed dataset " + path + ": " + e.what());
  }
  return loaded;
}

}  // namespace apq

#endif  // APQ_DATASET_IO_HPP_
