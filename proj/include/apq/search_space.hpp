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
// The joint design space: network architecture (kernel size, channel width,
// stage depth) crossed with a per-block mixed-precision quantization policy.
// The space is a combinatorial description only; no network graphs are built.

#ifndef APQ_SEARCH_SPACE_HPP_
#define APQ_SEARCH_SPACE_HPP_

#include <algorithm>
#include <cstdint>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "apq/errors.hpp"
#include "apq/rng.hpp"

namespace apq {

using BigCount = boost::multiprecision::cpp_int;

struct StageConfig {
  std::vector<int> depth_choices{2, 3, 4};
  int max_depth = 4;
  int base_channels = 0;
  std::vector<int> channel_choices;  // 4*B .. 6*B, step 8
  int feature_hw = 0;                // spatial map edge used by cost models
};

// Channel grid {4B, 4B+8, ..., 6B}; B must be a multiple of 4 so every entry
// is divisible by 8.
inline std::vector<int> default_channel_choices(int base_channels) {
  std::vector<int> choices;
  for (int c = 4 * base_channels; c <= 6 * base_channels; c += 8) {
    choices.push_back(c);
  }
  return choices;
}

inline StageConfig make_stage(std::vector<int> depth_choices, int base_channels,
                              int feature_hw) {
  StageConfig stage;
  stage.depth_choices = std::move(depth_choices);
  stage.max_depth =
      *std::max_element(stage.depth_choices.begin(), stage.depth_choices.end());
  stage.base_channels = base_channels;
  stage.channel_choices = default_channel_choices(base_channels);
  stage.feature_hw = feature_hw;
  return stage;
}

struct SearchSpaceConfig {
  std::vector<StageConfig> stages;
  std::vector<int> kernel_choices{3, 5, 7};
  std::vector<int> bit_choices{4, 6, 8};
  int input_resolution = 224;  // resolution at which feature_hw is declared
  std::uint64_t seed = 0;

  int total_slots() const {
    int n = 0;
    for (const auto& s : stages) n += s.max_depth;
    return n;
  }

  int slot_begin(int stage_index) const {
    int n = 0;
    for (int s = 0; s < stage_index; ++s) n += stages[s].max_depth;
    return n;
  }

  int stage_of_slot(int slot) const {
    int begin = 0;
    for (int s = 0; s < static_cast<int>(stages.size()); ++s) {
      begin += stages[s].max_depth;
      if (slot < begin) return s;
    }
    return -1;
  }
};

// MobileNetV2-flavored default: five searchable stages of up to four blocks
// plus one fixed single-block stage, 21 block slots in total.
inline SearchSpaceConfig default_space() {
  SearchSpaceConfig space;
  space.stages = {
      make_stage({2, 3, 4}, 24, 56), make_stage({2, 3, 4}, 32, 28),
      make_stage({2, 3, 4}, 64, 14), make_stage({2, 3, 4}, 96, 14),
      make_stage({2, 3, 4}, 160, 7), make_stage({1}, 320, 7),
  };
  return space;
}

// Small enough to enumerate exhaustively (20,880 joint pairs).
inline SearchSpaceConfig tiny_space() {
  SearchSpaceConfig space;
  space.stages = {make_stage({1, 2}, 8, 16)};
  space.kernel_choices = {3, 5, 7};
  space.bit_choices = {4, 8};
  space.input_resolution = 32;
  return space;
}

namespace detail {

inline bool strictly_increasing(const std::vector<int>& v) {
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (v[i] <= v[i - 1]) return false;
  }
  return true;
}

}  // namespace detail

// Throws ConfigError when the space itself is ill-formed. Call before using
// a space loaded from user input.
inline void check_space(const SearchSpaceConfig& space) {
  auto fail = [](const std::string& msg) { throw ConfigError(msg); };
  if (space.stages.empty()) fail("space has no stages");
  if (space.kernel_choices.empty() ||
      !detail::strictly_increasing(space.kernel_choices)) {
    fail("kernel_choices must be nonempty and strictly increasing");
  }
  for (int k : space.kernel_choices) {
    if (k < 1 || k % 2 == 0) fail("kernel sizes must be odd integers >= 1");
  }
  if (space.bit_choices.empty() ||
      !detail::strictly_increasing(space.bit_choices)) {
    fail("bit_choices must be nonempty and strictly increasing");
  }
  for (int b : space.bit_choices) {
    if (b < 1 || b > 32) fail("bitwidths must lie in [1, 32]");
  }
  if (space.input_resolution < 1) fail("input_resolution must be positive");
  for (std::size_t s = 0; s < space.stages.size(); ++s) {
    const StageConfig& stage = space.stages[s];
    std::ostringstream where;
    where << "stage " << s << ": ";
    if (stage.depth_choices.empty()) fail(where.str() + "empty depth_choices");
    int max_choice = *std::max_element(stage.depth_choices.begin(),
                                       stage.depth_choices.end());
    if (stage.max_depth != max_choice) {
      fail(where.str() + "max_depth must equal max(depth_choices)");
    }
    for (int d : stage.depth_choices) {
      if (d < 1 || d > stage.max_depth) {
        fail(where.str() + "depth choice out of [1, max_depth]");
      }
    }
    if (stage.channel_choices.empty() ||
        !detail::strictly_increasing(stage.channel_choices)) {
      fail(where.str() + "channel_choices must be strictly increasing");
    }
    for (int c : stage.channel_choices) {
      if (c % 8 != 0) fail(where.str() + "channel choice not divisible by 8");
    }
    if (stage.channel_choices.front() != 4 * stage.base_channels ||
        stage.channel_choices.back() != 6 * stage.base_channels) {
      fail(where.str() + "channel_choices must span 4*B .. 6*B");
    }
  }
}

// One concrete sub-network. Slots whose index within their stage is >= the
// stage's chosen depth are skipped and carry no kernel/channel values.
struct BlockConfig {
  int kernel = 0;
  int channels = 0;
  friend bool operator==(const BlockConfig&, const BlockConfig&) = default;
};

struct ArchSpec {
  std::vector<int> depths;                         // one per stage
  std::vector<std::optional<BlockConfig>> blocks;  // one per global slot
  friend bool operator==(const ArchSpec&, const ArchSpec&) = default;
};

// Weight/activation bitwidths for the pointwise and depthwise convolutions of
// one block. Defined exactly on the non-skipped slots of the paired ArchSpec.
struct BlockBits {
  int w_pw = 0;
  int a_pw = 0;
  int w_dw = 0;
  int a_dw = 0;
  friend bool operator==(const BlockBits&, const BlockBits&) = default;
};

struct QuantPolicy {
  std::vector<std::optional<BlockBits>> bits;  // aligned with ArchSpec slots
  friend bool operator==(const QuantPolicy&, const QuantPolicy&) = default;
};

struct Violation {
  int slot = -1;  // -1 when the problem is not tied to a single slot
  std::string message;
};

struct ValidationResult {
  std::vector<Violation> violations;
  bool ok() const { return violations.empty(); }
  std::string to_string() const {
    std::ostringstream out;
    for (const auto& v : violations) {
      out << "slot " << v.slot << ": " << v.message << "\n";
    }
    return out.str();
  }
};

namespace detail {

inline bool contains(const std::vector<int>& v, int x) {
  return std::find(v.begin(), v.end(), x) != v.end();
}

}  // namespace detail

inline ValidationResult validate_arch(const SearchSpaceConfig& space,
                                      const ArchSpec& arch) {
  ValidationResult result;
  auto flag = [&result](int slot, std::string msg) {
    result.violations.push_back({slot, std::move(msg)});
  };
  const int n_stages = static_cast<int>(space.stages.size());
  if (static_cast<int>(arch.depths.size()) != n_stages) {
    flag(-1, "depth list length does not match stage count");
    return result;
  }
  if (static_cast<int>(arch.blocks.size()) != space.total_slots()) {
    flag(-1, "block list length does not match slot count");
    return result;
  }
  int slot = 0;
  for (int s = 0; s < n_stages; ++s) {
    const StageConfig& stage = space.stages[s];
    const int depth = arch.depths[s];
    if (!detail::contains(stage.depth_choices, depth)) {
      flag(-1, "stage " + std::to_string(s) + ": depth " +
                   std::to_string(depth) + " not in depth_choices");
    }
    for (int i = 0; i < stage.max_depth; ++i, ++slot) {
      const bool active = i < depth;
      const auto& block = arch.blocks[slot];
      if (active && !block.has_value()) {
        flag(slot, "active slot has no block configuration");
        continue;
      }
      if (!active && block.has_value()) {
        flag(slot, "skipped slot carries kernel/channel values");
        continue;
      }
      if (!block.has_value()) continue;
      if (!detail::contains(space.kernel_choices, block->kernel)) {
        flag(slot, "kernel " + std::to_string(block->kernel) +
                       " not in kernel_choices");
      }
      if (!detail::contains(stage.channel_choices, block->channels)) {
        flag(slot, "channels " + std::to_string(block->channels) +
                       " not in stage channel_choices");
      }
    }
  }
  return result;
}

inline ValidationResult validate(const SearchSpaceConfig& space,
                                 const ArchSpec& arch,
                                 const QuantPolicy& policy) {
  ValidationResult result = validate_arch(space, arch);
  auto flag = [&result](int slot, std::string msg) {
    result.violations.push_back({slot, std::move(msg)});
  };
  const int n_slots = space.total_slots();
  if (static_cast<int>(policy.bits.size()) != n_slots) {
    flag(-1, "policy length does not match slot count");
    return result;
  }
  if (static_cast<int>(arch.blocks.size()) != n_slots) return result;
  for (int slot = 0; slot < n_slots; ++slot) {
    const bool active = arch.blocks[slot].has_value();
    const auto& bits = policy.bits[slot];
    if (active && !bits.has_value()) {
      flag(slot, "active slot has no bitwidth assignment");
      continue;
    }
    if (!active && bits.has_value()) {
      flag(slot, "bitwidths assigned to a skipped slot");
      continue;
    }
    if (!bits.has_value()) continue;
    for (int b : {bits->w_pw, bits->a_pw, bits->w_dw, bits->a_dw}) {
      if (!detail::contains(space.bit_choices, b)) {
        flag(slot, "bitwidth " + std::to_string(b) + " not in bit_choices");
      }
    }
  }
  return result;
}

// Uniform independent choice per axis; a pure function of (space, rng state).
inline ArchSpec sample_arch(const SearchSpaceConfig& space, Rng& rng) {
  ArchSpec arch;
  arch.depths.reserve(space.stages.size());
  arch.blocks.resize(space.total_slots());
  int slot = 0;
  for (const StageConfig& stage : space.stages) {
    const int depth = rng.pick(stage.depth_choices);
    arch.depths.push_back(depth);
    for (int i = 0; i < stage.max_depth; ++i, ++slot) {
      if (i < depth) {
        arch.blocks[slot] = BlockConfig{rng.pick(space.kernel_choices),
                                        rng.pick(stage.channel_choices)};
      }
    }
  }
  return arch;
}

inline QuantPolicy sample_policy(const SearchSpaceConfig& space,
                                 const ArchSpec& arch, Rng& rng) {
  QuantPolicy policy;
  policy.bits.resize(arch.blocks.size());
  for (std::size_t slot = 0; slot < arch.blocks.size(); ++slot) {
    if (!arch.blocks[slot].has_value()) continue;
    policy.bits[slot] =
        BlockBits{rng.pick(space.bit_choices), rng.pick(space.bit_choices),
                  rng.pick(space.bit_choices), rng.pick(space.bit_choices)};
  }
  return policy;
}

// Closed-form cardinalities. Architectures: product over stages of
// sum_d (|K|*|C_s|)^d; each active block multiplies in |B|^4 policy choices.
inline BigCount arch_cardinality(const SearchSpaceConfig& space) {
  BigCount total = 1;
  const BigCount per_block_base = space.kernel_choices.size();
  for (const StageConfig& stage : space.stages) {
    const BigCount per_block = per_block_base * stage.channel_choices.size();
    BigCount stage_count = 0;
    for (int d : stage.depth_choices) {
      stage_count += boost::multiprecision::pow(per_block, d);
    }
    total *= stage_count;
  }
  return total;
}

inline BigCount joint_cardinality(const SearchSpaceConfig& space) {
  BigCount total = 1;
  BigCount bits4 = BigCount(space.bit_choices.size());
  bits4 = bits4 * bits4 * bits4 * bits4;
  for (const StageConfig& stage : space.stages) {
    const BigCount per_block =
        BigCount(space.kernel_choices.size()) * stage.channel_choices.size() *
        bits4;
    BigCount stage_count = 0;
    for (int d : stage.depth_choices) {
      stage_count += boost::multiprecision::pow(per_block, d);
    }
    total *= stage_count;
  }
  return total;
}

// Exhaustive enumeration in a fixed lexicographic order: stage depths vary
// slowest, then active-slot kernels, then channels, then the flattened
// (w_pw, a_pw, w_dw, a_dw) bit fields, which vary fastest.
class JointEnumerator {
 public:
  explicit JointEnumerator(const SearchSpaceConfig& space) : space_(space) {
    depth_idx_.assign(space_.stages.size(), 0);
    reset_assignments();
  }

  // Produces the next pair; returns false once the space is exhausted.
  bool next(ArchSpec& arch, QuantPolicy& policy) {
    if (done_) return false;
    emit(arch, policy);
    advance();
    return true;
  }

 private:
  void reset_assignments() {
    active_slots_.clear();
    int slot = 0;
    for (std::size_t s = 0; s < space_.stages.size(); ++s) {
      const StageConfig& stage = space_.stages[s];
      const int depth = stage.depth_choices[depth_idx_[s]];
      for (int i = 0; i < stage.max_depth; ++i, ++slot) {
        if (i < depth) active_slots_.push_back({slot, static_cast<int>(s)});
      }
    }
    kernel_idx_.assign(active_slots_.size(), 0);
    channel_idx_.assign(active_slots_.size(), 0);
    bit_idx_.assign(active_slots_.size() * 4, 0);
  }

  void emit(ArchSpec& arch, QuantPolicy& policy) const {
    arch.depths.clear();
    for (std::size_t s = 0; s < space_.stages.size(); ++s) {
      arch.depths.push_back(space_.stages[s].depth_choices[depth_idx_[s]]);
    }
    arch.blocks.assign(space_.total_slots(), std::nullopt);
    policy.bits.assign(space_.total_slots(), std::nullopt);
    for (std::size_t a = 0; a < active_slots_.size(); ++a) {
      const auto [slot, stage] = active_slots_[a];
      arch.blocks[slot] = BlockConfig{
          space_.kernel_choices[kernel_idx_[a]],
          space_.stages[stage].channel_choices[channel_idx_[a]]};
      policy.bits[slot] = BlockBits{space_.bit_choices[bit_idx_[4 * a + 0]],
                                    space_.bit_choices[bit_idx_[4 * a + 1]],
                                    space_.bit_choices[bit_idx_[4 * a + 2]],
                                    space_.bit_choices[bit_idx_[4 * a + 3]]};
    }
  }

  // Odometer increment, least-significant group first.
  void advance() {
    const int n_bits = static_cast<int>(space_.bit_choices.size());
    for (int i = static_cast<int>(bit_idx_.size()) - 1; i >= 0; --i) {
      if (++bit_idx_[i] < n_bits) return;
      bit_idx_[i] = 0;
    }
    for (int a = static_cast<int>(active_slots_.size()) - 1; a >= 0; --a) {
      const int stage = active_slots_[a].second;
      const int n = static_cast<int>(space_.stages[stage].channel_choices.size());
      if (++channel_idx_[a] < n) return;
      channel_idx_[a] = 0;
    }
    const int n_kernels = static_cast<int>(space_.kernel_choices.size());
    for (int a = static_cast<int>(active_slots_.size()) - 1; a >= 0; --a) {
      if (++kernel_idx_[a] < n_kernels) return;
      kernel_idx_[a] = 0;
    }
    for (int s = static_cast<int>(depth_idx_.size()) - 1; s >= 0; --s) {
      const int n = static_cast<int>(space_.stages[s].depth_choices.size());
      if (++depth_idx_[s] < n) {
        reset_assignments();
        return;
      }
      depth_idx_[s] = 0;
    }
    done_ = true;
  }

  SearchSpaceConfig space_;
  std::vector<int> depth_idx_;
  std::vector<std::pair<int, int>> active_slots_;  // (global slot, stage)
  std::vector<int> kernel_idx_;
  std::vector<int> channel_idx_;
  std::vector<int> bit_idx_;
  bool done_ = false;
};

inline std::vector<std::pair<ArchSpec, QuantPolicy>> enumerate_pairs(
    const SearchSpaceConfig& space, std::uint64_t limit) {
  const BigCount count = joint_cardinality(space);
  if (count > BigCount(limit)) {
    throw CardinalityOverflowError(
        "joint space holds " + count.str() + " pairs, more than the limit of " +
            std::to_string(limit),
        count.str());
  }
  std::vector<std::pair<ArchSpec, QuantPolicy>> pairs;
  pairs.reserve(static_cast<std::size_t>(count));
  JointEnumerator it(space);
  ArchSpec arch;
  QuantPolicy policy;
  while (it.next(arch, policy)) pairs.emplace_back(arch, policy);
  return pairs;
}

}  // namespace apq

#endif  // APQ_SEARCH_SPACE_HPP_
