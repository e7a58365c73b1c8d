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

#include <cmath>
#include <vector>

#include "apq/quantizer.hpp"
#include "apq/rng.hpp"

namespace apq {
namespace {

std::vector<double> gaussian_tensor(std::uint64_t seed, int n, double sigma) {
  Rng rng(seed);
  std::vector<double> values;
  values.reserve(n);
  for (int i = 0; i < n; ++i) {
    // Box-Muller on our deterministic stream.
    const double u1 = std::max(rng.uniform_real(), 1e-12);
    const double u2 = rng.uniform_real();
    values.push_back(sigma * std::sqrt(-2.0 * std::log(u1)) *
                     std::cos(2.0 * M_PI * u2));
  }
  return values;
}

TEST_CASE("grid points are fixed points") {
  const QuantScheme scheme{8, 1.0, QuantMode::kSymmetricWeights};
  const std::vector<double> grid{-1.0, 0.0, 1.0};
  REQUIRE(quantize(grid, scheme) == grid);
}

TEST_CASE("out-of-range inputs saturate at the clip") {
  const QuantScheme scheme{8, 1.0, QuantMode::kSymmetricWeights};
  const auto out = quantize({10.0, -10.0}, scheme);
  REQUIRE(out[0] == 1.0);
  REQUIRE(out[1] == -1.0);
}

TEST_CASE("error is at most half a step for in-range inputs") {
  const QuantScheme scheme{4, 0.8, QuantMode::kSymmetricWeights};
  const double step = quant_step(scheme);
  Rng rng(5);
  std::vector<double> values;
  for (int i = 0; i < 1000; ++i) {
    values.push_back(0.8 * (2.0 * rng.uniform_real() - 1.0));
  }
  const auto out = quantize(values, scheme);
  for (std::size_t i = 0; i < values.size(); ++i) {
    REQUIRE(std::abs(out[i] - values[i]) <= step / 2 + 1e-15);
  }
}

TEST_CASE("quantize is idempotent") {
  for (const QuantMode mode :
       {QuantMode::kSymmetricWeights, QuantMode::kNonnegActivations}) {
    const QuantScheme scheme{4, 1.3, mode};
    Rng rng(6);
    std::vector<double> values;
    for (int i = 0; i < 500; ++i) {
      values.push_back(3.0 * (2.0 * rng.uniform_real() - 1.0));
    }
    const auto once = quantize(values, scheme);
    REQUIRE(quantize(once, scheme) == once);
  }
}

TEST_CASE("quantize is pointwise nondecreasing") {
  const QuantScheme scheme{3, 1.0, QuantMode::kSymmetricWeights};
  Rng rng(7);
  std::vector<double> values;
  for (int i = 0; i < 400; ++i) {
    values.push_back(2.4 * (2.0 * rng.uniform_real() - 1.0));
  }
  std::sort(values.begin(), values.end());
  const auto out = quantize(values, scheme);
  for (std::size_t i = 1; i < out.size(); ++i) {
    REQUIRE(out[i] >= out[i - 1]);
  }
}

TEST_CASE("activation mode never emits negatives") {
  const QuantScheme scheme{4, 2.0, QuantMode::kNonnegActivations};
  Rng rng(8);
  std::vector<double> values;
  for (int i = 0; i < 400; ++i) {
    values.push_back(5.0 * (2.0 * rng.uniform_real() - 1.0));
  }
  for (double v : quantize(values, scheme)) REQUIRE(v >= 0.0);
}

TEST_CASE("empty tensors are rejected") {
  REQUIRE_THROWS_AS(quantize({}, QuantScheme{8, 1.0,
                                             QuantMode::kSymmetricWeights}),
                    EmptyTensorError);
}

TEST_CASE("kl divergence of identical histograms is zero") {
  const std::vector<double> p{1, 2, 3, 4};
  REQUIRE(kl_divergence(p, p, 1e-8) == 0.0);
}

TEST_CASE("kl divergence reproduces the analytic two-bin value") {
  // KL([1,0] || [0.5,0.5]) -> ln 2 as epsilon -> 0.
  const double kl = kl_divergence({1.0, 0.0}, {0.5, 0.5}, 1e-8);
  REQUIRE(std::abs(kl - std::log(2.0)) < 1e-3);
}

TEST_CASE("kl divergence is nonnegative on random histograms") {
  Rng rng(9);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> p(32), q(32);
    for (int i = 0; i < 32; ++i) {
      p[i] = rng.uniform_real();
      q[i] = rng.uniform_real();
    }
    REQUIRE(kl_divergence(p, q, 1e-8) >= 0.0);
  }
}

TEST_CASE("kl divergence rejects mismatched bin counts") {
  REQUIRE_THROWS_AS(kl_divergence({1, 2}, {1, 2, 3}, 1e-8),
                    BinCountMismatchError);
}

TEST_CASE("calibration on an exact grid tensor finds near-zero KL") {
  // Values already on the 4-bit symmetric grid with clip 1.0, including the
  // extremes so the top candidate equals the true range.
  const QuantScheme scheme{4, 1.0, QuantMode::kSymmetricWeights};
  const double step = quant_step(scheme);
  std::vector<double> values;
  Rng rng(10);
  for (int i = 0; i < 4000; ++i) {
    const int level = static_cast<int>(rng.uniform_index(16)) - 7;  // -7..8
    values.push_back(std::min(1.0, level * step));
  }
  values.push_back(1.0);
  values.push_back(-1.0);
  CalibConfig cfg;
  const CalibResult result =
      kl_calibrate(values, 4, cfg, QuantMode::kSymmetricWeights);
  REQUIRE(result.kl <= 1e-6);
}

TEST_CASE("calibrated clip attains the grid minimum") {
  CalibConfig cfg;
  cfg.histogram_bins = 512;
  cfg.candidate_grid_size = 50;
  for (const std::uint64_t seed : {11ull, 12ull, 13ull, 14ull, 15ull}) {
    for (const int bits : {3, 4, 6}) {
      const std::vector<double> tensor = gaussian_tensor(seed, 3000, 0.5);
      const CalibResult result =
          kl_calibrate(tensor, bits, cfg, QuantMode::kSymmetricWeights);
      for (const double clip :
           candidate_clips(tensor, cfg, QuantMode::kSymmetricWeights)) {
        const double kl =
            calibration_kl(tensor, bits, cfg, QuantMode::kSymmetricWeights, clip);
        REQUIRE(result.kl <= kl + 1e-12);
      }
    }
  }
}

TEST_CASE("gaussian tensors calibrate below the max at 4 bits") {
  CalibConfig cfg;
  for (const std::uint64_t seed : {21ull, 22ull, 23ull, 24ull, 25ull}) {
    const std::vector<double> tensor = gaussian_tensor(seed, 5000, 1.0);
    double max_abs = 0.0;
    for (double v : tensor) max_abs = std::max(max_abs, std::abs(v));
    const CalibResult result =
        kl_calibrate(tensor, 4, cfg, QuantMode::kSymmetricWeights);
    // Clipping outliers beats covering them: the chosen candidate is not the
    // last grid point.
    REQUIRE(result.clip < max_abs * (1.0 - 0.5 / cfg.candidate_grid_size));
  }
}

TEST_CASE("ties resolve to the smallest clip") {
  CalibConfig cfg;
  cfg.candidate_grid_size = 4;
  cfg.histogram_bins = 16;
  // Two-point tensor: many candidates produce identical (0-ish) KL; the scan
  // must keep the first (smallest) minimizer.
  const std::vector<double> tensor{0.0, 0.0, 0.0, 1.0, -1.0, 0.0};
  const CalibResult result =
      kl_calibrate(tensor, 8, cfg, QuantMode::kSymmetricWeights);
  const auto grid = candidate_clips(tensor, cfg, QuantMode::kSymmetricWeights);
  double best_kl = std::numeric_limits<double>::infinity();
  double expected_clip = 0.0;
  for (const double clip : grid) {
    const double kl =
        calibration_kl(tensor, 8, cfg, QuantMode::kSymmetricWeights, clip);
    if (kl < best_kl) {
      best_kl = kl;
      expected_clip = clip;
    }
  }
  REQUIRE(result.clip == expected_clip);
}

TEST_CASE("degenerate tensors are rejected") {
  CalibConfig cfg;
  REQUIRE_THROWS_AS(
      kl_calibrate({1.0, 1.0, 1.0}, 4, cfg, QuantMode::kSymmetricWeights),
      DegenerateTensorError);
  REQUIRE_THROWS_AS(kl_calibrate({}, 4, cfg, QuantMode::kSymmetricWeights),
                    EmptyTensorError);
}

TEST_CASE("calibration config bounds are enforced") {
  CalibConfig bins;
  bins.histogram_bins = 8;
  REQUIRE_THROWS_AS(bins.check_valid(), ConfigError);
  CalibConfig grid;
  grid.candidate_grid_size = 1;
  REQUIRE_THROWS_AS(grid.check_valid(), ConfigError);
  REQUIRE_THROWS_AS(quantize({1.0}, QuantScheme{1, 1.0,
                                                QuantMode::kSymmetricWeights}),
                    ConfigError);
}

}  // namespace
}  // namespace apq
