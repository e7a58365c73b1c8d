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
// One-hot feature vectors consumed by the accuracy predictor. Per block slot
// the joint layout is
//   [kernel | channels | w_pw | a_pw | w_dw | a_dw]
// and slot sections are concatenated in slot order. A skipped slot encodes as
// an all-zero section, so every encoding of a given space has the same length.

#ifndef APQ_ENCODING_HPP_
#define APQ_ENCODING_HPP_

#include <algorithm>
#include <string>
#include <utility>
#include <vector>

#include "apq/errors.hpp"
#include "apq/search_space.hpp"

namespace apq {

struct ArchOnlyEncoding {
  std::vector<double> values;
};

struct Encoding {
  std::vector<double> values;
};

inline std::vector<double> one_hot(const std::vector<int>& choices, int value) {
  std::vector<double> v(choices.size(), 0.0);
  auto it = std::find(choices.begin(), choices.end(), value);
  if (it == choices.end()) {
    throw InvalidInputError("value " + std::to_string(value) +
                            " is not among the configured choices");
  }
  v[static_cast<std::size_t>(it - choices.begin())] = 1.0;
  return v;
}

// Precomputed coordinate offsets for a space. arch_to_joint maps each
// architecture-only coordinate to its position in the joint layout; the
// predictor-transfer step uses it to place pretrained input rows.
struct EncodingLayout {
  int joint_dim = 0;
  int arch_dim = 0;
  std::vector<int> joint_slot_offset;  // per slot, into joint vectors
  std::vector<int> arch_slot_offset;   // per slot, into arch-only vectors
  std::vector<int> slot_stage;         // per slot
  std::vector<int> arch_to_joint;      // per arch coordinate

  explicit EncodingLayout(const SearchSpaceConfig& space) {
    const int n_kernels = static_cast<int>(space.kernel_choices.size());
    const int n_bits = static_cast<int>(space.bit_choices.size());
    int slot = 0;
    for (std::size_t s = 0; s < space.stages.size(); ++s) {
      const int n_channels =
          static_cast<int>(space.stages[s].channel_choices.size());
      for (int i = 0; i < space.stages[s].max_depth; ++i, ++slot) {
        joint_slot_offset.push_back(joint_dim);
        arch_slot_offset.push_back(arch_dim);
        slot_stage.push_back(static_cast<int>(s));
        for (int c = 0; c < n_kernels + n_channels; ++c) {
          arch_to_joint.push_back(joint_dim + c);
        }
        arch_dim += n_kernels + n_channels;
        joint_dim += n_kernels + n_channels + 4 * n_bits;
      }
    }
  }

  int slot_count() const { return static_cast<int>(joint_slot_offset.size()); }
};

namespace detail {

inline int choice_index(const std::vector<int>& choices, int value) {
  return static_cast<int>(
      std::find(choices.begin(), choices.end(), value) - choices.begin());
}

}  // namespace detail

inline ArchOnlyEncoding encode_arch(const SearchSpaceConfig& space,
                                    const ArchSpec& arch) {
  const ValidationResult check = validate_arch(space, arch);
  if (!check.ok()) {
    throw InvalidInputError("cannot encode invalid architecture:\n" +
                            check.to_string());
  }
  const EncodingLayout layout(space);
  ArchOnlyEncoding enc;
  enc.values.assign(layout.arch_dim, 0.0);
  const int n_kernels = static_cast<int>(space.kernel_choices.size());
  for (int slot = 0; slot < layout.slot_count(); ++slot) {
    const auto& block = arch.blocks[slot];
    if (!block.has_value()) continue;
    const auto& channels = space.stages[layout.slot_stage[slot]].channel_choices;
    const int base = layout.arch_slot_offset[slot];
    enc.values[base + detail::choice_index(space.kernel_choices, block->kernel)] =
        1.0;
    enc.values[base + n_kernels +
               detail::choice_index(channels, block->channels)] = 1.0;
  }
  return enc;
}

inline Encoding encode_joint(const SearchSpaceConfig& space,
                             const ArchSpec& arch, const QuantPolicy& policy) {
  const ValidationResult check = validate(space, arch, policy);
  if (!check.ok()) {
    throw InvalidInputError("cannot encode invalid (arch, policy) pair:\n" +
                            check.to_string());
  }
  const EncodingLayout layout(space);
  Encoding enc;
  enc.values.assign(layout.joint_dim, 0.0);
  const int n_kernels = static_cast<int>(space.kernel_choices.size());
  const int n_bits = static_cast<int>(space.bit_choices.size());
  for (int slot = 0; slot < layout.slot_count(); ++slot) {
    const auto& block = arch.blocks[slot];
    if (!block.has_value()) continue;
    const auto& channels = space.stages[layout.slot_stage[slot]].channel_choices;
    const int n_channels = static_cast<int>(channels.size());
    const int base = layout.joint_slot_offset[slot];
    enc.values[base + detail::choice_index(space.kernel_choices, block->kernel)] =
        1.0;
    enc.values[base + n_kernels +
               detail::choice_index(channels, block->channels)] = 1.0;
    const BlockBits& bits = *policy.bits[slot];
    const int fields[4] = {bits.w_pw, bits.a_pw, bits.w_dw, bits.a_dw};
    for (int f = 0; f < 4; ++f) {
      enc.values[base + n_kernels + n_channels + f * n_bits +
                 detail::choice_index(space.bit_choices, fields[f])] = 1.0;
    }
  }
  return enc;
}

// Exact inverse of encode_joint on its image. Rejects vectors whose per-field
// sections are not clean one-hots, whose skip pattern is not a stage suffix,
// or whose implied depth is not an allowed choice.
inline std::pair<ArchSpec, QuantPolicy> decode(const SearchSpaceConfig& space,
                                               const Encoding& enc) {
  const EncodingLayout layout(space);
  if (static_cast<int>(enc.values.size()) != layout.joint_dim) {
    throw MalformedEncodingError(
        "encoding length " + std::to_string(enc.values.size()) +
        " does not match space layout length " +
        std::to_string(layout.joint_dim));
  }
  for (double v : enc.values) {
    if (v != 0.0 && v != 1.0) {
      throw MalformedEncodingError("encoding entries must be 0 or 1");
    }
  }
  // Reads one one-hot field; index = -1 signals an all-zero field.
  auto read_field = [&enc](int begin, int size, int slot) {
    int ones = 0;
    int index = -1;
    for (int i = 0; i < size; ++i) {
      if (enc.values[begin + i] == 1.0) {
        ++ones;
        index = i;
      }
    }
    if (ones > 1) {
      throw MalformedEncodingError("slot " + std::to_string(slot) +
                                   ": field has more than one 1");
    }
    return ones == 0 ? -1 : index;
  };

  const int n_kernels = static_cast<int>(space.kernel_choices.size());
  const int n_bits = static_cast<int>(space.bit_choices.size());
  ArchSpec arch;
  QuantPolicy policy;
  arch.blocks.assign(layout.slot_count(), std::nullopt);
  policy.bits.assign(layout.slot_count(), std::nullopt);
  std::vector<bool> active(layout.slot_count(), false);

  for (int slot = 0; slot < layout.slot_count(); ++slot) {
    const auto& channels = space.stages[layout.slot_stage[slot]].channel_choices;
    const int n_channels = static_cast<int>(channels.size());
    const int base = layout.joint_slot_offset[slot];
    int idx[6];
    idx[0] = read_field(base, n_kernels, slot);
    idx[1] = read_field(base + n_kernels, n_channels, slot);
    for (int f = 0; f < 4; ++f) {
      idx[2 + f] = read_field(base + n_kernels + n_channels + f * n_bits,
                              n_bits, slot);
    }
    const bool all_zero =
        std::all_of(std::begin(idx), std::end(idx), [](int i) { return i < 0; });
    const bool all_set =
        std::all_of(std::begin(idx), std::end(idx), [](int i) { return i >= 0; });
    if (!all_zero && !all_set) {
      throw MalformedEncodingError("slot " + std::to_string(slot) +
                                   ": partially zeroed section");
    }
    if (all_zero) continue;
    active[slot] = true;
    arch.blocks[slot] = BlockConfig{space.kernel_choices[idx[0]],
                                    channels[idx[1]]};
    policy.bits[slot] = BlockBits{space.bit_choices[idx[2]],
                                  space.bit_choices[idx[3]],
                                  space.bit_choices[idx[4]],
                                  space.bit_choices[idx[5]]};
  }

  // Active slots must form a prefix of each stage and imply a legal depth.
  int slot = 0;
  for (std::size_t s = 0; s < space.stages.size(); ++s) {
    const StageConfig& stage = space.stages[s];
    int depth = 0;
    bool in_prefix = true;
    for (int i = 0; i < stage.max_depth; ++i) {
      if (active[slot + i]) {
        if (!in_prefix) {
          throw MalformedEncodingError(
              "stage " + std::to_string(s) +
              ": active slot follows a skipped slot");
        }
        ++depth;
      } else {
        in_prefix = false;
      }
    }
    if (!detail::contains(stage.depth_choices, depth)) {
      throw MalformedEncodingError("stage " + std::to_string(s) + ": depth " +
                                   std::to_string(depth) +
                                   " is not an allowed choice");
    }
    arch.depths.push_back(depth);
    slot += stage.max_depth;
  }
  return {std::move(arch), std::move(policy)};
}

}  // namespace apq

#endif  // APQ_ENCODING_HPP_
