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
// The predictor-transfer ablation: for each (budget, seed), train a
// quantization-aware predictor from scratch and one transferred from a
// full-precision predictor, then compare pairwise accuracy on a shared
// held-out test set. The oracle world stays fixed across seeds; seeds vary
// the sampled datasets and the training randomness. Mixed-precision budgets
// split half/half between fully random pairs and grouped
// (one architecture x several policies) pairs.

#ifndef APQ_EXPERIMENT_HPP_
#define APQ_EXPERIMENT_HPP_

#include <cstdint>
#include <fstream>
#include <functional>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "apq/encoding.hpp"
#include "apq/errors.hpp"
#include "apq/oracle.hpp"
#include "apq/predictor.hpp"
#include "apq/rng.hpp"
#include "apq/search_space.hpp"

namespace apq {

struct TransferExperimentConfig {
  OracleConfig oracle;
  std::vector<int> budgets{500, 1000, 2000};
  std::vector<std::uint64_t> seeds{0, 1, 2, 3, 4};
  std::size_t fp_train_size = 10000;
  std::size_t test_size = 1000;
  std::size_t policies_per_arch = 10;
  TrainConfig fp_train;
  TrainConfig scratch_train;
  TrainConfig transfer_train = transfer_finetune_config();
};

struct TransferExperimentRow {
  int budget = 0;
  std::uint64_t seed = 0;
  std::string variant;  // "scratch" or "transfer"
  double pairwise_acc = 0.0;
};

struct TransferExperimentResult {
  std::vector<TransferExperimentRow> rows;
  // (budget, variant) -> mean pairwise accuracy over seeds
  std::map<std::pair<int, std::string>, double> means;
};

inline TransferExperimentResult run_transfer_experiment(
    const SearchSpaceConfig& space, const TransferExperimentConfig& cfg,
    const std::function<void(const std::string&)>& log = nullptr) {
  const EncodingLayout layout(space);
  TransferExperimentResult result;
  auto say = [&log](const std::string& msg) {
    if (log) log(msg);
  };

  for (const std::uint64_t seed : cfg.seeds) {
    // One full-precision predictor per seed, shared across budgets.
    const std::vector<DatasetRecord> fp_records = gen_fp_dataset(
        cfg.oracle, space, cfg.fp_train_size, derive_seed(seed, "exp_fp"));
    std::vector<LabeledSample> fp_samples;
    fp_samples.reserve(fp_records.size());
    for (const DatasetRecord& r : fp_records) {
      fp_samples.push_back(LabeledSample{r.encoding, r.accuracy});
    }
    TrainConfig fp_train = cfg.fp_train;
    fp_train.seed = derive_seed(seed, "exp_fp_train");
    const MlpParams fp_predictor =
        train(init_params(layout.arch_dim, derive_seed(seed, "exp_fp_init"),
                          fp_train.weight_init_scale),
              fp_samples, fp_train)
            .params;
    say("seed " + std::to_string(seed) + ": full-precision predictor trained on " +
        std::to_string(cfg.fp_train_size) + " records");

    const std::vector<DatasetRecord> test_records = gen_mp_dataset(
        cfg.oracle, space, cfg.test_size, 0, 1, derive_seed(seed, "exp_test"));
    std::vector<LabeledSample> test_samples;
    test_samples.reserve(test_records.size());
    for (const DatasetRecord& r : test_records) {
      test_samples.push_back(LabeledSample{r.encoding, r.accuracy});
    }

    for (const int budget : cfg.budgets) {
      if (budget < 2 || budget % 2 != 0 ||
          (budget / 2) % cfg.policies_per_arch != 0) {
        throw ConfigError(
            "budget " + std::to_string(budget) +
            " must be even with half divisible by policies_per_arch");
      }
      const std::vector<DatasetRecord> train_records = gen_mp_dataset(
          cfg.oracle, space, budget / 2, budget / 2, cfg.policies_per_arch,
          derive_seed(seed, "exp_mp", static_cast<std::uint64_t>(budget)));
      std::vector<LabeledSample> train_samples;
      train_samples.reserve(train_records.size());
      for (const DatasetRecord& r : train_records) {
        train_samples.push_back(LabeledSample{r.encoding, r.accuracy});
      }

      TrainConfig scratch_train = cfg.scratch_train;
      scratch_train.seed =
          derive_seed(seed, "exp_scratch_train", static_cast<std::uint64_t>(budget));
      const MlpParams scratch = train(
          init_params(layout.joint_dim,
                      derive_seed(seed, "exp_scratch_init",
                                  static_cast<std::uint64_t>(budget)),
                      scratch_train.weight_init_scale),
          train_samples, scratch_train)
                                    .params;
      const double scratch_acc = pairwise_accuracy(scratch, test_samples);
      result.rows.push_back(
          TransferExperimentRow{budget, seed, "scratch", scratch_acc});

      TrainConfig transfer_train = cfg.transfer_train;
      transfer_train.seed =
          derive_seed(seed, "exp_transfer_train", static_cast<std::uint64_t>(budget));
      const MlpParams transferred =
          train(transfer_init(fp_predictor, space), train_samples, transfer_train)
              .params;
      const double transfer_acc = pairwise_accuracy(transferred, test_samples);
      result.rows.push_back(
          TransferExperimentRow{budget, seed, "transfer", transfer_acc});

      say("seed " + std::to_string(seed) + " budget " + std::to_string(budget) +
          ": scratch " + std::to_string(scratch_acc) + ", transfer " +
          std::to_string(transfer_acc));
    }
  }

  std::map<std::pair<int, std::string>, std::pair<double, int>> sums;
  for (const TransferExperimentRow& row : result.rows) {
    auto& [sum, count] = sums[{row.budget, row.variant}];
    sum += row.pairwise_acc;
    ++count;
  }
  for (const auto& [key, sum_count] : sums) {
    result.means[key] = sum_count.first / sum_count.second;
  }
  return result;
}

inline void write_transfer_csv(const TransferExperimentResult& result,
                               const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write experiment CSV: " + path);
  out << "budget,seed,variant,pairwise_acc\n";
  out.precision(17);
  for (const TransferExperimentRow& row : result.rows) {
    out << row.budget << "," << row.seed << "," << row.variant << ","
        << row.pairwise_acc << "\n";
  }
}

}  // namespace apq

#endif  // APQ_EXPERIMENT_HPP_
