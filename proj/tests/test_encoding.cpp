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

#include <catch2/catch_amalgamated.hpp>

#include <vector>

#include "apq/encoding.hpp"
#include "apq/rng.hpp"
#include "apq/search_space.hpp"

namespace apq {
namespace {

// 5 slots, 3 kernels, 4 channel choices, 2 bit choices: the worked example
// geometry with a 75-dimensional joint encoding.
SearchSpaceConfig five_block_space() {
  SearchSpaceConfig space;
  space.stages = {make_stage({5}, 12, 8)};
  space.kernel_choices = {3, 5, 7};
  space.bit_choices = {4, 8};
  check_space(space);
  return space;
}

TEST_CASE("one-hot of the worked block example") {
  REQUIRE(one_hot({3, 5, 7}, 3) == std::vector<double>{1, 0, 0});
  REQUIRE(one_hot({16, 24, 32, 40}, 32) == std::vector<double>{0, 0, 1, 0});
  REQUIRE_THROWS_AS(one_hot({3, 5, 7}, 4), InvalidInputError);
}

TEST_CASE("five-block joint encoding is 75-dimensional") {
  const SearchSpaceConfig space = five_block_space();
  REQUIRE(space.stages[0].channel_choices.size() == 4);  // {48,56,64,72}
  const EncodingLayout layout(space);
  REQUIRE(layout.joint_dim == 5 * (3 + 4 + 2 * 4));
  REQUIRE(layout.arch_dim == 5 * (3 + 4));

  Rng rng(3);
  const ArchSpec arch = sample_arch(space, rng);
  const QuantPolicy policy = sample_policy(space, arch, rng);
  REQUIRE(encode_joint(space, arch, policy).values.size() == 75);
}

TEST_CASE("block section layout: kernel and channel one-hots concatenate") {
  const SearchSpaceConfig space = five_block_space();
  ArchSpec arch;
  arch.depths = {5};
  // kernel 3 (first of three), channels 64 (third of four).
  for (int i = 0; i < 5; ++i) arch.blocks.push_back(BlockConfig{3, 64});
  const ArchOnlyEncoding enc = encode_arch(space, arch);
  const std::vector<double> expected_section{1, 0, 0, 0, 0, 1, 0};
  for (int slot = 0; slot < 5; ++slot) {
    for (int i = 0; i < 7; ++i) {
      REQUIRE(enc.values[slot * 7 + i] == expected_section[i]);
    }
  }
}

TEST_CASE("bit fields encode (4,8,8,4) over {4,8} as [1,0,0,1,0,1,1,0]") {
  const SearchSpaceConfig space = five_block_space();
  ArchSpec arch;
  arch.depths = {5};
  for (int i = 0; i < 5; ++i) arch.blocks.push_back(BlockConfig{3, 48});
  QuantPolicy policy;
  for (int i = 0; i < 5; ++i) policy.bits.push_back(BlockBits{4, 8, 8, 4});
  const Encoding enc = encode_joint(space, arch, policy);
  const std::vector<double> expected_bits{1, 0, 0, 1, 0, 1, 1, 0};
  const int section = 3 + 4 + 8;
  for (int slot = 0; slot < 5; ++slot) {
    for (int i = 0; i < 8; ++i) {
      REQUIRE(enc.values[slot * section + 7 + i] == expected_bits[i]);
    }
  }
}

TEST_CASE("skipped slots encode as all zeros") {
  SearchSpaceConfig space;
  space.stages = {make_stage({1, 2}, 12, 8)};
  space.kernel_choices = {3, 5, 7};
  space.bit_choices = {4, 8};
  check_space(space);
  ArchSpec arch;
  arch.depths = {1};
  arch.blocks = {BlockConfig{3, 64}, std::nullopt};
  QuantPolicy policy;
  policy.bits = {BlockBits{4, 4, 8, 8}, std::nullopt};

  const ArchOnlyEncoding arch_enc = encode_arch(space, arch);
  for (int i = 7; i < 14; ++i) REQUIRE(arch_enc.values[i] == 0.0);

  const Encoding joint = encode_joint(space, arch, policy);
  const int section = 3 + 4 + 8;
  for (int i = section; i < 2 * section; ++i) REQUIRE(joint.values[i] == 0.0);
}

TEST_CASE("default 21-block space encoding length matches the closed form") {
  const SearchSpaceConfig space = default_space();
  int expected = 0;
  for (const StageConfig& stage : space.stages) {
    expected += stage.max_depth *
                (3 + static_cast<int>(stage.channel_choices.size()) + 12);
  }
  const EncodingLayout layout(space);
  REQUIRE(layout.joint_dim == expected);
  Rng rng(11);
  const ArchSpec arch = sample_arch(space, rng);
  const QuantPolicy policy = sample_policy(space, arch, rng);
  REQUIRE(static_cast<int>(encode_joint(space, arch, policy).values.size()) ==
          expected);
}

TEST_CASE("decode inverts encode_joint on random samples") {
  const SearchSpaceConfig space = default_space();
  Rng rng(42);
  for (int i = 0; i < 1000; ++i) {
    const ArchSpec arch = sample_arch(space, rng);
    const QuantPolicy policy = sample_policy(space, arch, rng);
    const auto [arch2, policy2] = decode(space, encode_joint(space, arch, policy));
    REQUIRE(arch2 == arch);
    REQUIRE(policy2 == policy);
  }
}

TEST_CASE("encodings of one space share a single length and skip pattern") {
  const SearchSpaceConfig space = tiny_space();
  const EncodingLayout layout(space);
  Rng rng(4);
  for (int i = 0; i < 200; ++i) {
    const ArchSpec arch = sample_arch(space, rng);
    const QuantPolicy policy = sample_policy(space, arch, rng);
    const Encoding enc = encode_joint(space, arch, policy);
    REQUIRE(static_cast<int>(enc.values.size()) == layout.joint_dim);
    // Slot skipped exactly when its whole section is zero.
    for (int slot = 0; slot < layout.slot_count(); ++slot) {
      const int begin = layout.joint_slot_offset[slot];
      const int end = slot + 1 < layout.slot_count()
                          ? layout.joint_slot_offset[slot + 1]
                          : layout.joint_dim;
      bool any = false;
      for (int c = begin; c < end; ++c) any |= enc.values[c] != 0.0;
      REQUIRE(any == arch.blocks[slot].has_value());
    }
  }
}

TEST_CASE("all-zero vector fails to decode when depth 0 is not a choice") {
  const SearchSpaceConfig space = tiny_space();
  const EncodingLayout layout(space);
  Encoding zeros;
  zeros.values.assign(layout.joint_dim, 0.0);
  REQUIRE_THROWS_AS(decode(space, zeros), MalformedEncodingError);
}

TEST_CASE("two ones in a kernel field fail to decode") {
  const SearchSpaceConfig space = tiny_space();
  Rng rng(9);
  ArchSpec arch = sample_arch(space, rng);
  const QuantPolicy policy = sample_policy(space, arch, rng);
  Encoding enc = encode_joint(space, arch, policy);
  enc.values[0] = 1.0;
  enc.values[1] = 1.0;
  REQUIRE_THROWS_AS(decode(space, enc), MalformedEncodingError);
}

TEST_CASE("partially zeroed slots and bad lengths fail to decode") {
  const SearchSpaceConfig space = tiny_space();
  const EncodingLayout layout(space);
  Rng rng(10);
  ArchSpec arch;
  arch.depths = {2};
  arch.blocks = {BlockConfig{3, 32}, BlockConfig{5, 40}};
  QuantPolicy policy;
  policy.bits = {BlockBits{4, 4, 4, 4}, BlockBits{8, 8, 8, 8}};
  Encoding enc = encode_joint(space, arch, policy);
  // Zero out only the kernel field of slot 1.
  const int base = layout.joint_slot_offset[1];
  for (int i = 0; i < 3; ++i) enc.values[base + i] = 0.0;
  REQUIRE_THROWS_AS(decode(space, enc), MalformedEncodingError);

  Encoding wrong_len;
  wrong_len.values.assign(layout.joint_dim + 1, 0.0);
  REQUIRE_THROWS_AS(decode(space, wrong_len), MalformedEncodingError);
}

TEST_CASE("encoding an invalid pair is rejected") {
  const SearchSpaceConfig space = tiny_space();
  ArchSpec arch;
  arch.depths = {2};
  arch.blocks = {BlockConfig{3, 32}, BlockConfig{9, 40}};  // kernel 9 invalid
  QuantPolicy policy;
  policy.bits = {BlockBits{4, 4, 4, 4}, BlockBits{8, 8, 8, 8}};
  REQUIRE_THROWS_AS(encode_joint(space, arch, policy), InvalidInputError);
}

}  // namespace
}  // namespace apq
