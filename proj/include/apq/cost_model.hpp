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
// Additive hardware cost estimation. Latency and energy come from a per-layer
// lookup table (one entry per slot configuration and bitwidth assignment) and
// a network's cost is the sum over its active slots. BitOps is computed
// analytically as MACs x weight-bits x activation-bits.

#ifndef APQ_COST_MODEL_HPP_
#define APQ_COST_MODEL_HPP_

#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "apq/errors.hpp"
#include "apq/json_io.hpp"
#include "apq/rng.hpp"
#include "apq/search_space.hpp"

namespace apq {

struct LayerKey {
  int slot_index = 0;
  int kernel = 0;
  int channels = 0;
  int w_pw_bits = 0;
  int a_pw_bits = 0;
  int w_dw_bits = 0;
  int a_dw_bits = 0;
  friend bool operator==(const LayerKey&, const LayerKey&) = default;

  std::string to_string() const {
    std::ostringstream out;
    out << "slot=" << slot_index << " kernel=" << kernel
        << " channels=" << channels << " bits=(" << w_pw_bits << ","
        << a_pw_bits << "," << w_dw_bits << "," << a_dw_bits << ")";
    return out.str();
  }
};

struct LayerKeyHash {
  std::size_t operator()(const LayerKey& k) const {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    const int fields[7] = {k.slot_index, k.kernel,    k.channels, k.w_pw_bits,
                           k.a_pw_bits,  k.w_dw_bits, k.a_dw_bits};
    h = fnv1a64(fields, sizeof(fields), h);
    return static_cast<std::size_t>(h);
  }
};

struct CostEntry {
  double latency_ms = 0.0;
  double energy_mJ = 0.0;
};

struct CostTable {
  std::string hardware_name;
  std::string space_fingerprint;
  std::unordered_map<LayerKey, CostEntry, LayerKeyHash> entries;

  const CostEntry& at(const LayerKey& key) const {
    auto it = entries.find(key);
    if (it == entries.end()) {
      throw MissingKeyError("cost table has no entry for " + key.to_string());
    }
    return it->second;
  }
};

// Resource budget; bounds are inclusive (cost == bound still passes).
struct Constraint {
  std::optional<double> max_latency_ms;
  std::optional<double> max_energy_mJ;
  std::optional<double> max_bitops_G;

  bool has_any() const {
    return max_latency_ms || max_energy_mJ || max_bitops_G;
  }
  void check_valid() const {
    if (!has_any()) {
      throw ConfigError("constraint must carry at least one bound");
    }
    for (const auto& bound : {max_latency_ms, max_energy_mJ, max_bitops_G}) {
      if (bound && *bound <= 0.0) {
        throw ConfigError("constraint bounds must be positive");
      }
    }
  }
};

inline LayerKey layer_key(int slot, const BlockConfig& block,
                          const BlockBits& bits) {
  return LayerKey{slot,      block.kernel, block.channels, bits.w_pw,
                  bits.a_pw, bits.w_dw,    bits.a_dw};
}

struct Costs {
  double latency_ms = 0.0;
  double energy_mJ = 0.0;
};

// Exact sum of table entries over active slots, in slot order; skipped slots
// contribute nothing.
inline Costs total_cost(const CostTable& table, const ArchSpec& arch,
                        const QuantPolicy& policy) {
  Costs total;
  for (std::size_t slot = 0; slot < arch.blocks.size(); ++slot) {
    if (!arch.blocks[slot].has_value()) continue;
    const CostEntry& entry = table.at(layer_key(
        static_cast<int>(slot), *arch.blocks[slot], *policy.bits[slot]));
    total.latency_ms += entry.latency_ms;
    total.energy_mJ += entry.energy_mJ;
  }
  return total;
}

namespace detail {

// Spatial map edge of a stage at the requested input resolution. feature_hw
// values are declared at space.input_resolution and scale linearly.
inline double effective_hw(const SearchSpaceConfig& space, int stage,
                           double input_resolution) {
  const int hw = space.stages[stage].feature_hw;
  if (hw <= 0) {
    throw MissingSpatialMetadataError(
        "stage " + std::to_string(stage) +
        " has no feature_hw; cannot compute MACs");
  }
  return hw * (input_resolution / space.input_resolution);
}

inline double depthwise_macs(int kernel, int channels, double hw) {
  return static_cast<double>(kernel) * kernel * channels * hw * hw;
}

inline double pointwise_macs(int in_channels, int out_channels, double hw) {
  return static_cast<double>(in_channels) * out_channels * hw * hw;
}

}  // namespace detail

// Giga bit-operations: per active slot,
//   MACs_dw * w_dw * a_dw + MACs_pw * w_pw * a_pw,
// with MACs_dw = k^2 * C * H * W and MACs_pw = B * C * H * W, where C is the
// chosen channel count of the slot's expansion layer and B the stage's base
// channel count feeding it.
inline double bitops(const SearchSpaceConfig& space, const ArchSpec& arch,
                     const QuantPolicy& policy, double input_resolution) {
  double total = 0.0;
  for (std::size_t slot = 0; slot < arch.blocks.size(); ++slot) {
    if (!arch.blocks[slot].has_value()) continue;
    const int stage = space.stage_of_slot(static_cast<int>(slot));
    const double hw = detail::effective_hw(space, stage, input_resolution);
    const BlockConfig& block = *arch.blocks[slot];
    const BlockBits& bits = *policy.bits[slot];
    const double dw = detail::depthwise_macs(block.kernel, block.channels, hw) *
                      bits.w_dw * bits.a_dw;
    const double pw = detail::pointwise_macs(space.stages[stage].base_channels,
                                             block.channels, hw) *
                      bits.w_pw * bits.a_pw;
    total += (dw + pw) / 1e9;
  }
  return total;
}

inline bool satisfies(const Constraint& constraint, const CostTable& table,
                      const SearchSpaceConfig& space, const ArchSpec& arch,
                      const QuantPolicy& policy) {
  constraint.check_valid();
  if (constraint.max_latency_ms || constraint.max_energy_mJ) {
    const Costs costs = total_cost(table, arch, policy);
    if (constraint.max_latency_ms && costs.latency_ms > *constraint.max_latency_ms)
      return false;
    if (constraint.max_energy_mJ && costs.energy_mJ > *constraint.max_energy_mJ)
      return false;
  }
  if (constraint.max_bitops_G &&
      bitops(space, arch, policy, space.input_resolution) >
          *constraint.max_bitops_G) {
    return false;
  }
  return true;
}

struct HardwareProfile {
  std::string name = "synth-default";
  double alpha_latency = 4e-8;  // ms per MAC at 8x8 bits
  double beta_latency = 0.01;   // ms per kernel-size unit
  double alpha_energy = 6e-8;   // mJ per MAC at 8x8 bits
  double beta_energy = 0.005;   // mJ per kernel-size unit
  double jitter_rel = 0.02;     // relative amplitude of seeded noise
};

// Analytic stand-in for hardware measurement:
//   cost(key) = alpha * MACs(key) * (mean_wbits * mean_abits) / 64
//             + beta * kernel, perturbed by seeded jitter of at most
// jitter_rel relative. Complete over the space by construction.
inline CostTable build_synthetic_table(const SearchSpaceConfig& space,
                                       const HardwareProfile& profile,
                                       std::uint64_t seed) {
  CostTable table;
  table.hardware_name = profile.name;
  table.space_fingerprint = space_fingerprint(space);
  const auto& bits = space.bit_choices;
  int slot = 0;
  for (std::size_t s = 0; s < space.stages.size(); ++s) {
    const StageConfig& stage = space.stages[s];
    const double hw = detail::effective_hw(space, static_cast<int>(s),
                                           space.input_resolution);
    for (int i = 0; i < stage.max_depth; ++i, ++slot) {
      for (int kernel : space.kernel_choices) {
        for (int channels : stage.channel_choices) {
          for (int w_pw : bits) {
            for (int a_pw : bits) {
              for (int w_dw : bits) {
                for (int a_dw : bits) {
                  const LayerKey key{slot, kernel, channels, w_pw,
                                     a_pw, w_dw,   a_dw};
                  const double macs =
                      detail::depthwise_macs(kernel, channels, hw) +
                      detail::pointwise_macs(stage.base_channels, channels, hw);
                  const double wbar = 0.5 * (w_pw + w_dw);
                  const double abar = 0.5 * (a_pw + a_dw);
                  const double scale = wbar * abar / 64.0;
                  const std::uint64_t kh =
                      LayerKeyHash{}(key) ^ derive_seed(seed, "cost_jitter");
                  const double j_lat =
                      1.0 + profile.jitter_rel *
                                (2.0 * hash_unit_real(kh) - 1.0);
                  const double j_en =
                      1.0 + profile.jitter_rel *
                                (2.0 * hash_unit_real(kh ^ 0x5851f42d4c957f2dULL) -
                                 1.0);
                  table.entries[key] = CostEntry{
                      (profile.alpha_latency * macs * scale +
                       profile.beta_latency * kernel) *
                          j_lat,
                      (profile.alpha_energy * macs * scale +
                       profile.beta_energy * kernel) *
                          j_en};
                }
              }
            }
          }
        }
      }
    }
  }
  return table;
}

inline std::size_t reachable_key_count(const SearchSpaceConfig& space) {
  std::size_t count = 0;
  const std::size_t bits4 = space.bit_choices.size() * space.bit_choices.size() *
                            space.bit_choices.size() * space.bit_choices.size();
  for (const StageConfig& stage : space.stages) {
    count += static_cast<std::size_t>(stage.max_depth) *
             space.kernel_choices.size() * stage.channel_choices.size() * bits4;
  }
  return count;
}

// Cheapest achievable total cost over the whole space: per stage, the minimum
// over allowed depths of the sum of per-slot minima. Used to produce a
// helpful message when a constraint is infeasible.
inline Costs min_achievable_cost(const CostTable& table,
                                 const SearchSpaceConfig& space) {
  Costs total;
  int slot = 0;
  for (const StageConfig& stage : space.stages) {
    std::vector<Costs> slot_min(stage.max_depth,
                                Costs{std::numeric_limits<double>::infinity(),
                                      std::numeric_limits<double>::infinity()});
    for (int i = 0; i < stage.max_depth; ++i) {
      for (int kernel : space.kernel_choices) {
        for (int channels : stage.channel_choices) {
          for (int w_pw : space.bit_choices)
            for (int a_pw : space.bit_choices)
              for (int w_dw : space.bit_choices)
                for (int a_dw : space.bit_choices) {
                  const CostEntry& e = table.at(
                      LayerKey{slot + i, kernel, channels, w_pw, a_pw, w_dw,
                               a_dw});
                  slot_min[i].latency_ms =
                      std::min(slot_min[i].latency_ms, e.latency_ms);
                  slot_min[i].energy_mJ =
                      std::min(slot_min[i].energy_mJ, e.energy_mJ);
                }
        }
      }
    }
    Costs best{std::numeric_limits<double>::infinity(),
               std::numeric_limits<double>::infinity()};
    for (int d : stage.depth_choices) {
      Costs c;
      for (int i = 0; i < d; ++i) {
        c.latency_ms += slot_min[i].latency_ms;
        c.energy_mJ += slot_min[i].energy_mJ;
      }
      best.latency_ms = std::min(best.latency_ms, c.latency_ms);
      best.energy_mJ = std::min(best.energy_mJ, c.energy_mJ);
    }
    total.latency_ms += best.latency_ms;
    total.energy_mJ += best.energy_mJ;
    slot += stage.max_depth;
  }
  return total;
}

// Minimum achievable BitOps over the space, by the same per-slot scan.
inline double min_achievable_bitops(const SearchSpaceConfig& space,
                                    double input_resolution) {
  double total = 0.0;
  const int min_bit = space.bit_choices.front();
  for (std::size_t s = 0; s < space.stages.size(); ++s) {
    const StageConfig& stage = space.stages[s];
    const double hw = detail::effective_hw(space, static_cast<int>(s),
                                           input_resolution);
    std::vector<double> slot_min(stage.max_depth,
                                 std::numeric_limits<double>::infinity());
    for (int i = 0; i < stage.max_depth; ++i) {
      for (int kernel : space.kernel_choices) {
        for (int channels : stage.channel_choices) {
          const double g =
              (detail::depthwise_macs(kernel, channels, hw) * min_bit * min_bit +
               detail::pointwise_macs(stage.base_channels, channels, hw) *
                   min_bit * min_bit) /
              1e9;
          slot_min[i] = std::min(slot_min[i], g);
        }
      }
    }
    double best = std::numeric_limits<double>::infinity();
    for (int d : stage.depth_choices) {
      double c = 0.0;
      for (int i = 0; i < d; ++i) c += slot_min[i];
      best = std::min(best, c);
    }
    total += best;
  }
  return total;
}

inline void save_cost_table(const CostTable& table, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write cost table: " + path);
  // Entries sorted by key fields so the file is byte-stable across runs.
  std::vector<const LayerKey*> keys;
  keys.reserve(table.entries.size());
  for (const auto& [key, entry] : table.entries) keys.push_back(&key);
  std::sort(keys.begin(), keys.end(), [](const LayerKey* a, const LayerKey* b) {
    return std::tie(a->slot_index, a->kernel, a->channels, a->w_pw_bits,
                    a->a_pw_bits, a->w_dw_bits, a->a_dw_bits) <
           std::tie(b->slot_index, b->kernel, b->channels, b->w_pw_bits,
                    b->a_pw_bits, b->w_dw_bits, b->a_dw_bits);
  });
  Json entries = Json::array();
  for (const LayerKey* key : keys) {
    const CostEntry& e = table.entries.at(*key);
    entries.push_back({{"slot_index", key->slot_index},
                       {"kernel", key->kernel},
                       {"channels", key->channels},
                       {"w_pw_bits", key->w_pw_bits},
                       {"a_pw_bits", key->a_pw_bits},
                       {"w_dw_bits", key->w_dw_bits},
                       {"a_dw_bits", key->a_dw_bits},
                       {"latency_ms", e.latency_ms},
                       {"energy_mJ", e.energy_mJ}});
  }
  Json doc{{"hardware_name", table.hardware_name},
           {"space_fingerprint", table.space_fingerprint},
           {"entries", std::move(entries)}};
  out << doc.dump() << "\n";
}

// Loads a table and verifies it is complete for the given space: every
// reachable LayerKey must be present, with nonnegative costs.
inline CostTable load_cost_table(const std::string& path,
                                 const SearchSpaceConfig& space) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open cost table: " + path);
  Json doc;
  try {
    in >> doc;
  } catch (const Json::exception& e) {
    throw CorruptFileError("cannot parse cost table " + path + ": " + e.what());
  }
  CostTable table;
  try {
    table.hardware_name = doc.at("hardware_name").get<std::string>();
    table.space_fingerprint = doc.at("space_fingerprint").get<std::string>();
    for (const Json& je : doc.at("entries")) {
      const LayerKey key{je.at("slot_index").get<int>(),
                         je.at("kernel").get<int>(),
                         je.at("channels").get<int>(),
                         je.at("w_pw_bits").get<int>(),
                         je.at("a_pw_bits").get<int>(),
                         je.at("w_dw_bits").get<int>(),
                         je.at("a_dw_bits").get<int>()};
      const CostEntry entry{je.at("latency_ms").get<double>(),
                            je.at("energy_mJ").get<double>()};
      if (entry.latency_ms < 0.0 || entry.energy_mJ < 0.0) {
        throw CorruptFileError("negative cost for " + key.to_string());
      }
      table.entries[key] = entry;
    }
  } catch (const Json::exception& e) {
    throw CorruptFileError("malformed cost table " + path + ": " + e.what());
  }
  if (table.space_fingerprint != space_fingerprint(space)) {
    throw ConfigError("cost table " + path +
                      " was built for a different space (fingerprint " +
                      table.space_fingerprint + ")");
  }
  // Completeness scan.
  int slot = 0;
  for (const StageConfig& stage : space.stages) {
    for (int i = 0; i < stage.max_depth; ++i, ++slot) {
      for (int kernel : space.kernel_choices) {
        for (int channels : stage.channel_choices) {
          for (int w_pw : space.bit_choices)
            for (int a_pw : space.bit_choices)
              for (int w_dw : space.bit_choices)
                for (int a_dw : space.bit_choices) {
                  const LayerKey key{slot, kernel, channels, w_pw,
                                     a_pw, w_dw,   a_dw};
                  if (!table.entries.count(key)) {
                    throw ConfigError("cost table " + path +
                                      " is incomplete; missing " +
                                      key.to_string());
                  }
                }
        }
      }
    }
  }
  return table;
}

}  // namespace apq

#endif  // APQ_COST_MODEL_HPP_
