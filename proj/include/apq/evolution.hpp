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
// Resource-constrained evolutionary search over (architecture, quantization
// policy) pairs. Candidates are scored once at creation by a caller-supplied
// scorer (normally the quantization-aware predictor, so the search never
// touches the oracle or a dataset) and filtered by the cost model: offspring
// that exceed the constraint are resampled, never admitted. A running Top-k
// carries across generations, which makes the best-so-far score monotone.

#ifndef APQ_EVOLUTION_HPP_
#define APQ_EVOLUTION_HPP_

#include <algorithm>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <tuple>
#include <unordered_set>
#include <utility>
#include <vector>

#include "apq/cost_model.hpp"
#include "apq/encoding.hpp"
#include "apq/errors.hpp"
#include "apq/predictor.hpp"
#include "apq/rng.hpp"
#include "apq/search_space.hpp"

namespace apq {

struct EvolutionConfig {
  int population_size = 100;
  int top_k = 25;
  int n_mutation = 50;
  int n_crossover = 50;
  double mutation_prob = 0.1;
  int iter_max = 500;
  int max_resample_attempts = 1000;
  std::uint64_t seed = 0;

  void check_valid() const {
    if (population_size < 1) throw ConfigError("population_size must be >= 1");
    if (top_k < 1 || top_k > population_size) {
      throw ConfigError("top_k must lie in [1, population_size]");
    }
    if (n_mutation < 0 || n_crossover < 0) {
      throw ConfigError("offspring counts must be nonnegative");
    }
    if (!(mutation_prob > 0.0 && mutation_prob <= 1.0)) {
      throw ConfigError("mutation_prob must lie in (0, 1]");
    }
    if (iter_max < 1) throw ConfigError("iter_max must be >= 1");
    if (max_resample_attempts < 1) {
      throw ConfigError("max_resample_attempts must be >= 1");
    }
  }
};

struct Candidate {
  ArchSpec arch;
  QuantPolicy policy;
  double predicted_accuracy = 0.0;
  double latency_ms = 0.0;
  double energy_mJ = 0.0;
  std::uint64_t id = 0;  // insertion order, used as the final tie-breaker
};

using Scorer = std::function<double(const ArchSpec&, const QuantPolicy&)>;

// Scores via the quantization-aware predictor. The params and space must
// outlive the returned scorer.
inline Scorer predictor_scorer(const MlpParams& params,
                               const SearchSpaceConfig& space) {
  return [&params, &space](const ArchSpec& arch, const QuantPolicy& policy) {
    return forward(params, encode_joint(space, arch, policy).values);
  };
}

namespace detail {

// Higher predicted accuracy first; ties by lower latency, then insertion.
inline bool candidate_before(const Candidate& a, const Candidate& b) {
  return std::tie(b.predicted_accuracy, a.latency_ms, a.id) <
         std::tie(a.predicted_accuracy, b.latency_ms, b.id);
}

// Canonical byte string of a configuration; the elite pool keeps at most one
// candidate per distinct configuration so it cannot fill up with copies.
inline std::string candidate_key(const ArchSpec& arch,
                                 const QuantPolicy& policy) {
  std::string key;
  key.reserve(arch.blocks.size() * 7 + arch.depths.size() + 8);
  auto push = [&key](int value) {
    key.push_back(static_cast<char>(value & 0xff));
    key.push_back(static_cast<char>((value >> 8) & 0xff));
  };
  for (int d : arch.depths) push(d);
  for (std::size_t i = 0; i < arch.blocks.size(); ++i) {
    if (!arch.blocks[i].has_value()) {
      push(-1);
      continue;
    }
    push(arch.blocks[i]->kernel);
    push(arch.blocks[i]->channels);
    push(policy.bits[i]->w_pw);
    push(policy.bits[i]->a_pw);
    push(policy.bits[i]->w_dw);
    push(policy.bits[i]->a_dw);
  }
  return key;
}

inline Candidate make_candidate(ArchSpec arch, QuantPolicy policy,
                                const CostTable& table, const Scorer& scorer) {
  Candidate c;
  const Costs costs = total_cost(table, arch, policy);
  c.latency_ms = costs.latency_ms;
  c.energy_mJ = costs.energy_mJ;
  c.predicted_accuracy = scorer(arch, policy);
  c.arch = std::move(arch);
  c.policy = std::move(policy);
  return c;
}

inline BlockBits sample_bits(const SearchSpaceConfig& space, Rng& rng) {
  return BlockBits{rng.pick(space.bit_choices), rng.pick(space.bit_choices),
                   rng.pick(space.bit_choices), rng.pick(space.bit_choices)};
}

inline BlockConfig sample_block(const SearchSpaceConfig& space, int stage,
                                Rng& rng) {
  return BlockConfig{rng.pick(space.kernel_choices),
                     rng.pick(space.stages[stage].channel_choices)};
}

}  // namespace detail

// Rejection sampling until population_size candidates satisfy the constraint.
inline std::vector<Candidate> init_population(const SearchSpaceConfig& space,
                                              const Constraint& constraint,
                                              const CostTable& table,
                                              const EvolutionConfig& cfg,
                                              Rng& rng, const Scorer& scorer) {
  cfg.check_valid();
  constraint.check_valid();
  std::vector<Candidate> population;
  population.reserve(cfg.population_size);
  int consecutive_rejections = 0;
  while (static_cast<int>(population.size()) < cfg.population_size) {
    ArchSpec arch = sample_arch(space, rng);
    QuantPolicy policy = sample_policy(space, arch, rng);
    if (!satisfies(constraint, table, space, arch, policy)) {
      if (++consecutive_rejections >= cfg.max_resample_attempts) {
        throw InfeasibleConstraintError(
            "no feasible candidate found after " +
            std::to_string(cfg.max_resample_attempts) +
            " consecutive rejections");
      }
      continue;
    }
    consecutive_rejections = 0;
    population.push_back(
        detail::make_candidate(std::move(arch), std::move(policy), table, scorer));
  }
  return population;
}

// Per stage, with probability mutation_prob the depth is resampled (newly
// activated slots get fresh uniform draws, deactivated slots are cleared);
// per active slot, with the same probability the kernel, channels and all
// four bit fields are redrawn. The whole operator repeats until the child
// satisfies the constraint, up to max_resample_attempts.
inline Candidate mutate(const Candidate& parent, const SearchSpaceConfig& space,
                        const Constraint& constraint, const CostTable& table,
                        const EvolutionConfig& cfg, Rng& rng,
                        const Scorer& scorer) {
  for (int attempt = 0; attempt < cfg.max_resample_attempts; ++attempt) {
    ArchSpec arch = parent.arch;
    QuantPolicy policy = parent.policy;
    int slot = 0;
    for (std::size_t s = 0; s < space.stages.size(); ++s) {
      const StageConfig& stage = space.stages[s];
      if (rng.bernoulli(cfg.mutation_prob)) {
        const int new_depth = rng.pick(stage.depth_choices);
        for (int i = 0; i < stage.max_depth; ++i) {
          const bool was_active = arch.blocks[slot + i].has_value();
          const bool now_active = i < new_depth;
          if (now_active && !was_active) {
            arch.blocks[slot + i] =
                detail::sample_block(space, static_cast<int>(s), rng);
            policy.bits[slot + i] = detail::sample_bits(space, rng);
          } else if (!now_active && was_active) {
            arch.blocks[slot + i] = std::nullopt;
            policy.bits[slot + i] = std::nullopt;
          }
        }
        arch.depths[s] = new_depth;
      }
      slot += stage.max_depth;
    }
    for (std::size_t i = 0; i < arch.blocks.size(); ++i) {
      if (!arch.blocks[i].has_value()) continue;
      if (rng.bernoulli(cfg.mutation_prob)) {
        const int stage = space.stage_of_slot(static_cast<int>(i));
        arch.blocks[i] = detail::sample_block(space, stage, rng);
        policy.bits[i] = detail::sample_bits(space, rng);
      }
    }
    if (satisfies(constraint, table, space, arch, policy)) {
      return detail::make_candidate(std::move(arch), std::move(policy), table,
                                    scorer);
    }
  }
  throw MutationStuckError("no feasible mutant after " +
                           std::to_string(cfg.max_resample_attempts) +
                           " attempts");
}

// Per stage a fair coin picks the parent providing the depth; each slot
// active in the child copies its full configuration (kernel, channels, bits)
// from a coin-chosen parent. A slot skipped in the chosen parent inherits
// from the other; skipped in both means a fresh uniform draw.
inline Candidate crossover(const Candidate& pa, const Candidate& pb,
                           const SearchSpaceConfig& space,
                           const Constraint& constraint, const CostTable& table,
                           const EvolutionConfig& cfg, Rng& rng,
                           const Scorer& scorer) {
  for (int attempt = 0; attempt < cfg.max_resample_attempts; ++attempt) {
    ArchSpec arch;
    QuantPolicy policy;
    arch.depths.resize(space.stages.size());
    arch.blocks.assign(space.total_slots(), std::nullopt);
    policy.bits.assign(space.total_slots(), std::nullopt);
    int slot = 0;
    for (std::size_t s = 0; s < space.stages.size(); ++s) {
      const StageConfig& stage = space.stages[s];
      arch.depths[s] =
          rng.bernoulli(0.5) ? pa.arch.depths[s] : pb.arch.depths[s];
      for (int i = 0; i < arch.depths[s]; ++i) {
        const int g = slot + i;
        const Candidate& first = rng.bernoulli(0.5) ? pa : pb;
        const Candidate& second = (&first == &pa) ? pb : pa;
        if (first.arch.blocks[g].has_value()) {
          arch.blocks[g] = first.arch.blocks[g];
          policy.bits[g] = first.policy.bits[g];
        } else if (second.arch.blocks[g].has_value()) {
          arch.blocks[g] = second.arch.blocks[g];
          policy.bits[g] = second.policy.bits[g];
        } else {
          arch.blocks[g] = detail::sample_block(space, static_cast<int>(s), rng);
          policy.bits[g] = detail::sample_bits(space, rng);
        }
      }
      slot += stage.max_depth;
    }
    if (satisfies(constraint, table, space, arch, policy)) {
      return detail::make_candidate(std::move(arch), std::move(policy), table,
                                    scorer);
    }
  }
  throw CrossoverStuckError("no feasible child after " +
                            std::to_string(cfg.max_resample_attempts) +
                            " attempts");
}

struct HistoryPoint {
  int iter = 0;
  double best = 0.0;  // best-so-far predicted accuracy (monotone)
  double mean = 0.0;  // mean predicted accuracy of the iteration's population
};

struct SearchResult {
  std::vector<Candidate> top_k;  // sorted by descending predicted accuracy
  std::vector<HistoryPoint> history;
  std::uint64_t scorer_evaluations = 0;
};

// The main loop. Each iteration scores only newly created candidates (the
// carried-over Top-k keeps its scores), so the scorer runs exactly
// population_size times per iteration when n_mutation + n_crossover equals
// population_size and no resampling fallback triggers.
inline SearchResult search(const SearchSpaceConfig& space,
                           const Constraint& constraint, const CostTable& table,
                           const Scorer& scorer, const EvolutionConfig& cfg) {
  cfg.check_valid();
  constraint.check_valid();
  Rng rng(derive_seed(cfg.seed, "evolution"));
  std::uint64_t evaluations = 0;
  std::uint64_t next_id = 0;
  const Scorer counting_scorer = [&scorer, &evaluations](
                                     const ArchSpec& a, const QuantPolicy& q) {
    ++evaluations;
    return scorer(a, q);
  };

  std::vector<Candidate> population =
      init_population(space, constraint, table, cfg, rng, counting_scorer);
  for (Candidate& c : population) c.id = next_id++;

  std::vector<Candidate> top;
  std::unordered_set<std::string> top_keys;
  auto merge_into_top = [&](const Candidate& c) {
    const std::string key = detail::candidate_key(c.arch, c.policy);
    if (top_keys.count(key)) return;  // config already in the elite pool
    top.push_back(c);
    std::sort(top.begin(), top.end(), detail::candidate_before);
    if (static_cast<int>(top.size()) > cfg.top_k) {
      const Candidate& dropped = top.back();
      if (dropped.id == c.id) {
        top.pop_back();
        return;
      }
      top_keys.erase(detail::candidate_key(dropped.arch, dropped.policy));
      top.pop_back();
    }
    top_keys.insert(key);
  };

  SearchResult result;
  for (int iter = 1; iter <= cfg.iter_max; ++iter) {
    if (iter > 1) {
      std::vector<Candidate> next;
      next.reserve(top.size() + cfg.n_crossover + cfg.n_mutation);
      next.insert(next.end(), top.begin(), top.end());
      for (int i = 0; i < cfg.n_crossover; ++i) {
        const Candidate& pa = top[rng.uniform_index(top.size())];
        const Candidate& pb = top[rng.uniform_index(top.size())];
        Candidate child;
        try {
          child = crossover(pa, pb, space, constraint, table, cfg, rng,
                            counting_scorer);
        } catch (const CrossoverStuckError&) {
          child = detail::candidate_before(pa, pb) ? pa : pb;
        }
        child.id = next_id++;
        next.push_back(std::move(child));
      }
      for (int i = 0; i < cfg.n_mutation; ++i) {
        const Candidate& parent = top[rng.uniform_index(top.size())];
        Candidate child;
        try {
          child = mutate(parent, space, constraint, table, cfg, rng,
                         counting_scorer);
        } catch (const MutationStuckError&) {
          child = parent;
        }
        child.id = next_id++;
        next.push_back(std::move(child));
      }
      population = std::move(next);
    }
    for (const Candidate& c : population) merge_into_top(c);
    double mean = 0.0;
    for (const Candidate& c : population) mean += c.predicted_accuracy;
    mean /= static_cast<double>(population.size());
    result.history.push_back(
        HistoryPoint{iter, top.front().predicted_accuracy, mean});
  }
  result.top_k = std::move(top);
  result.scorer_evaluations = evaluations;
  return result;
}

}  // namespace apq

#endif  // APQ_EVOLUTION_HPP_
