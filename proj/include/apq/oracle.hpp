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
// Deterministic synthetic accuracy oracle. Stands in for evaluating
// sub-networks of a pretrained weight-sharing supernet: full-precision
// accuracy is a logistic function of a per-slot capacity score, and quantized
// accuracy subtracts a bitwidth degradation plus a capacity-bitwidth
// interaction term, so that the best bit allocation depends on the
// architecture. Every label is a pure function of (config, space, inputs).

#ifndef APQ_ORACLE_HPP_
#define APQ_ORACLE_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "apq/encoding.hpp"
#include "apq/errors.hpp"
#include "apq/rng.hpp"
#include "apq/search_space.hpp"

namespace apq {

struct OracleConfig {
  std::uint64_t seed = 0;
  double acc_floor = 0.30;
  double acc_ceil = 0.80;
  double noise_amplitude = 0.002;
  double degradation_scale = 0.015;
  double interaction_scale = 0.008;

  void check_valid() const {
    if (!(acc_floor >= 0.0 && acc_floor < acc_ceil && acc_ceil <= 1.0)) {
      throw ConfigError("oracle requires 0 <= acc_floor < acc_ceil <= 1");
    }
    if (noise_amplitude < 0.0 || degradation_scale < 0.0 ||
        interaction_scale < 0.0) {
      throw ConfigError("oracle amplitudes must be nonnegative");
    }
  }
};

struct DatasetRecord {
  ArchSpec arch;
  std::optional<QuantPolicy> policy;
  std::vector<double> encoding;
  double accuracy = 0.0;
};

namespace detail {

inline double normalized_index(int index, int count) {
  return count > 1 ? static_cast<double>(index) / (count - 1) : 1.0;
}

// Canonical byte string of an architecture, hashed for per-arch jitter.
inline std::uint64_t arch_hash(std::uint64_t seed, const ArchSpec& arch) {
  std::uint64_t h = derive_seed(seed, "arch_noise");
  for (int d : arch.depths) h = fnv1a64(&d, sizeof(d), h);
  for (const auto& block : arch.blocks) {
    const int fields[3] = {block.has_value() ? 1 : 0,
                           block ? block->kernel : 0,
                           block ? block->channels : 0};
    h = fnv1a64(fields, sizeof(fields), h);
  }
  return h;
}

}  // namespace detail

class Oracle {
 public:
  Oracle(OracleConfig config, SearchSpaceConfig space)
      : cfg_(config), space_(std::move(space)) {
    cfg_.check_valid();
    const int slots = space_.total_slots();
    omega_.reserve(slots);
    delta_.reserve(slots);
    int min_depth_total = 0;
    int max_depth_total = 0;
    // Capacity weights sized so the full-precision spread comfortably
    // dominates the default bit-degradation scale: rankings before and after
    // quantization then correlate without coinciding.
    for (int i = 0; i < slots; ++i) {
      Rng rng = derive_rng(cfg_.seed, "slot_coeff", static_cast<std::uint64_t>(i));
      omega_.push_back(0.10 + 0.20 * rng.uniform_real());
      delta_.push_back(0.20 + 0.80 * rng.uniform_real());
    }
    Rng rng = derive_rng(cfg_.seed, "global_coeff");
    kappa_ = 0.04 + 0.04 * rng.uniform_real();
    for (const StageConfig& stage : space_.stages) {
      min_depth_total += *std::min_element(stage.depth_choices.begin(),
                                           stage.depth_choices.end());
      max_depth_total += stage.max_depth;
    }
    double omega_sum = 0.0;
    for (double w : omega_) omega_sum += w;
    // Centers the logistic argument over the space so labels spread across
    // [acc_floor, acc_ceil] instead of saturating.
    mu_ = 0.5 * omega_sum + kappa_ * 0.5 * (min_depth_total + max_depth_total);
  }

  const SearchSpaceConfig& space() const { return space_; }
  const OracleConfig& config() const { return cfg_; }

  double fp_accuracy(const ArchSpec& arch) const {
    const ValidationResult check = validate_arch(space_, arch);
    if (!check.ok()) {
      throw InvalidInputError("oracle got an invalid architecture:\n" +
                              check.to_string());
    }
    double score = 0.0;
    int depth_total = 0;
    // Slot-ascending evaluation order keeps labels bit-identical everywhere.
    for (std::size_t slot = 0; slot < arch.blocks.size(); ++slot) {
      if (!arch.blocks[slot].has_value()) continue;
      score += omega_[slot] * capacity(static_cast<int>(slot), *arch.blocks[slot]);
    }
    for (int d : arch.depths) depth_total += d;
    score += kappa_ * depth_total - mu_;
    const double base =
        cfg_.acc_floor + (cfg_.acc_ceil - cfg_.acc_floor) * logistic(score);
    const double noise =
        cfg_.noise_amplitude *
        (2.0 * hash_unit_real(detail::arch_hash(cfg_.seed, arch)) - 1.0);
    return std::clamp(base + noise, cfg_.acc_floor, cfg_.acc_ceil);
  }

  double quant_accuracy(const ArchSpec& arch, const QuantPolicy& policy) const {
    const ValidationResult check = validate(space_, arch, policy);
    if (!check.ok()) {
      throw InvalidInputError("oracle got an invalid (arch, policy) pair:\n" +
                              check.to_string());
    }
    const double fp = fp_accuracy(arch);
    double degradation = 0.0;
    double interaction = 0.0;
    for (std::size_t slot = 0; slot < arch.blocks.size(); ++slot) {
      if (!arch.blocks[slot].has_value()) continue;
      const BlockBits& bits = *policy.bits[slot];
      const double w_mean = 0.5 * (bits.w_pw + bits.w_dw);
      const double a_mean = 0.5 * (bits.a_pw + bits.a_dw);
      const int min_bits =
          std::min({bits.w_pw, bits.a_pw, bits.w_dw, bits.a_dw});
      degradation += cfg_.degradation_scale * delta_[slot] *
                     (std::max(0.0, 8.0 - w_mean) + std::max(0.0, 8.0 - a_mean)) /
                     8.0;
      interaction += cfg_.interaction_scale * delta_[slot] *
                     capacity(static_cast<int>(slot), *arch.blocks[slot]) *
                     std::max(0.0, 8.0 - min_bits) / 8.0;
    }
    return std::clamp(fp - degradation - interaction, 0.0, fp);
  }

 private:
  static double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }

  // Normalized (kernel, channel) choice position in [0, 1].
  double capacity(int slot, const BlockConfig& block) const {
    const int stage = space_.stage_of_slot(slot);
    const auto& kernels = space_.kernel_choices;
    const auto& channels = space_.stages[stage].channel_choices;
    const int ki = static_cast<int>(
        std::find(kernels.begin(), kernels.end(), block.kernel) -
        kernels.begin());
    const int ci = static_cast<int>(
        std::find(channels.begin(), channels.end(), block.channels) -
        channels.begin());
    return 0.5 * (detail::normalized_index(ki, static_cast<int>(kernels.size())) +
                  detail::normalized_index(ci, static_cast<int>(channels.size())));
  }

  OracleConfig cfg_;
  SearchSpaceConfig space_;
  std::vector<double> omega_;  // nonnegative capacity weights
  std::vector<double> delta_;  // per-slot quantization sensitivity
  double kappa_ = 0.0;
  double mu_ = 0.0;
};

inline double fp_accuracy(const OracleConfig& cfg,
                          const SearchSpaceConfig& space, const ArchSpec& arch) {
  return Oracle(cfg, space).fp_accuracy(arch);
}

inline double quant_accuracy(const OracleConfig& cfg,
                             const SearchSpaceConfig& space,
                             const ArchSpec& arch, const QuantPolicy& policy) {
  return Oracle(cfg, space).quant_accuracy(arch, policy);
}

using RecordSink = std::function<void(const DatasetRecord&)>;

// Full-precision dataset: n records with architecture-only encodings. Each
// record's sampling stream derives from (sampling_seed, index), so records
// are independent of each other and reproducible in isolation. By default
// sampling is driven by the oracle seed; experiments that need several
// independently sampled datasets over one fixed oracle pass their own
// sampling_seed.
inline void gen_fp_dataset(const OracleConfig& cfg,
                           const SearchSpaceConfig& space, std::size_t n,
                           const RecordSink& sink,
                           std::optional<std::uint64_t> sampling_seed =
                               std::nullopt) {
  const Oracle oracle(cfg, space);
  const std::uint64_t seed = sampling_seed.value_or(cfg.seed);
  for (std::size_t i = 0; i < n; ++i) {
    Rng rng = derive_rng(seed, "fp_data", i);
    DatasetRecord record;
    record.arch = sample_arch(space, rng);
    record.encoding = encode_arch(space, record.arch).values;
    record.accuracy = oracle.fp_accuracy(record.arch);
    sink(record);
  }
}

inline std::vector<DatasetRecord> gen_fp_dataset(
    const OracleConfig& cfg, const SearchSpaceConfig& space, std::size_t n,
    std::optional<std::uint64_t> sampling_seed = std::nullopt) {
  std::vector<DatasetRecord> records;
  records.reserve(n);
  gen_fp_dataset(
      cfg, space, n,
      [&records](const DatasetRecord& r) { records.push_back(r); },
      sampling_seed);
  return records;
}

// Mixed-precision dataset in two blocks: n_random fully random (arch, policy)
// pairs, then n_grouped / policies_per_arch architectures with
// policies_per_arch policies each.
inline void gen_mp_dataset(const OracleConfig& cfg,
                           const SearchSpaceConfig& space, std::size_t n_random,
                           std::size_t n_grouped, std::size_t policies_per_arch,
                           const RecordSink& sink,
                           std::optional<std::uint64_t> sampling_seed =
                               std::nullopt) {
  if (policies_per_arch == 0 || n_grouped % policies_per_arch != 0) {
    throw ConfigError("n_grouped must be divisible by policies_per_arch");
  }
  const Oracle oracle(cfg, space);
  const std::uint64_t seed = sampling_seed.value_or(cfg.seed);
  auto emit = [&](const ArchSpec& arch, const QuantPolicy& policy) {
    DatasetRecord record;
    record.arch = arch;
    record.policy = policy;
    record.encoding = encode_joint(space, arch, policy).values;
    record.accuracy = oracle.quant_accuracy(arch, policy);
    sink(record);
  };
  for (std::size_t i = 0; i < n_random; ++i) {
    Rng rng = derive_rng(seed, "mp_random", i);
    const ArchSpec arch = sample_arch(space, rng);
    emit(arch, sample_policy(space, arch, rng));
  }
  const std::size_t n_archs = n_grouped / policies_per_arch;
  for (std::size_t a = 0; a < n_archs; ++a) {
    Rng arch_rng = derive_rng(seed, "mp_grouped_arch", a);
    const ArchSpec arch = sample_arch(space, arch_rng);
    for (std::size_t p = 0; p < policies_per_arch; ++p) {
      Rng policy_rng = derive_rng(seed, "mp_grouped_policy", a, p);
      emit(arch, sample_policy(space, arch, policy_rng));
    }
  }
}

inline std::vector<DatasetRecord> gen_mp_dataset(
    const OracleConfig& cfg, const SearchSpaceConfig& space,
    std::size_t n_random, std::size_t n_grouped, std::size_t policies_per_arch,
    std::optional<std::uint64_t> sampling_seed = std::nullopt) {
  std::vector<DatasetRecord> records;
  records.reserve(n_random + n_grouped);
  gen_mp_dataset(
      cfg, space, n_random, n_grouped, policies_per_arch,
      [&records](const DatasetRecord& r) { records.push_back(r); },
      sampling_seed);
  return records;
}

}  // namespace apq

#endif  // APQ_ORACLE_HPP_
