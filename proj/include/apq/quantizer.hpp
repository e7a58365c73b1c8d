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
// Linear quantization with KL-divergence clip calibration. Weights quantize
// symmetrically to [-v, v]; activations (non-negative after ReLU6) quantize
// to [0, v]. The clip v is chosen per tensor by scanning a uniform candidate
// grid and minimizing the KL divergence between the histogram of the original
// values and the histogram induced by quantizing them.

#ifndef APQ_QUANTIZER_HPP_
#define APQ_QUANTIZER_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include "apq/errors.hpp"

namespace apq {

enum class QuantMode {
  kSymmetricWeights,
  kNonnegActivations,
};

struct QuantScheme {
  int bits = 8;
  double clip = 1.0;
  QuantMode mode = QuantMode::kSymmetricWeights;
};

struct CalibConfig {
  int histogram_bins = 2048;
  int candidate_grid_size = 100;
  double epsilon_smoothing = 1e-8;

  void check_valid() const {
    if (histogram_bins < 16) throw ConfigError("histogram_bins must be >= 16");
    if (candidate_grid_size < 2) {
      throw ConfigError("candidate_grid_size must be >= 2");
    }
  }
};

// Symmetric weights: 2^b - 1 uniform levels centered on zero with +-clip on
// the grid, so the step is clip / (2^(b-1) - 1). Non-negative activations:
// 2^b levels over [0, clip], step clip / (2^b - 1).
inline double quant_step(const QuantScheme& scheme) {
  return scheme.mode == QuantMode::kSymmetricWeights
             ? scheme.clip / (std::pow(2.0, scheme.bits - 1) - 1.0)
             : scheme.clip / (std::pow(2.0, scheme.bits) - 1.0);
}

inline double quantize_value(double x, const QuantScheme& scheme) {
  const double lo =
      scheme.mode == QuantMode::kSymmetricWeights ? -scheme.clip : 0.0;
  const double clamped = std::min(std::max(x, lo), scheme.clip);
  const double step = quant_step(scheme);
  return std::round(clamped / step) * step;
}

// Dequantized values: clamp to the clip range, snap to the uniform grid of
// 2^b - 1 steps. Idempotent and pointwise nondecreasing; the error for
// in-range inputs is at most half a step.
inline std::vector<double> quantize(const std::vector<double>& tensor,
                                    const QuantScheme& scheme) {
  if (tensor.empty()) throw EmptyTensorError("cannot quantize an empty tensor");
  if (scheme.bits < 2) throw ConfigError("quantization bits must be >= 2");
  if (!(scheme.clip > 0.0) || !std::isfinite(scheme.clip)) {
    throw ConfigError("clip value must be finite and positive");
  }
  std::vector<double> out;
  out.reserve(tensor.size());
  for (double x : tensor) out.push_back(quantize_value(x, scheme));
  return out;
}

// KL(P || Q) after epsilon-smoothing and renormalization of both histograms.
inline double kl_divergence(const std::vector<double>& p,
                            const std::vector<double>& q, double epsilon) {
  if (p.size() != q.size()) {
    throw BinCountMismatchError("histograms have " + std::to_string(p.size()) +
                                " vs " + std::to_string(q.size()) + " bins");
  }
  double p_sum = 0.0;
  double q_sum = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    p_sum += p[i] + epsilon;
    q_sum += q[i] + epsilon;
  }
  double kl = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double pi = (p[i] + epsilon) / p_sum;
    const double qi = (q[i] + epsilon) / q_sum;
    kl += pi * std::log(pi / qi);
  }
  return kl;
}

namespace detail {

// Histogram over the clip range; out-of-range values pile up in edge bins,
// matching the clamping the quantizer applies.
inline std::vector<double> clip_histogram(const std::vector<double>& values,
                                          double lo, double hi, int bins) {
  std::vector<double> hist(bins, 0.0);
  const double width = (hi - lo) / bins;
  for (double x : values) {
    int bin = static_cast<int>(std::floor((x - lo) / width));
    bin = std::min(std::max(bin, 0), bins - 1);
    hist[bin] += 1.0;
  }
  return hist;
}

}  // namespace detail

// The candidate clip grid: uniform from max|w|/G to max|w| in G points.
inline std::vector<double> candidate_clips(const std::vector<double>& tensor,
                                           const CalibConfig& cfg,
                                           QuantMode mode) {
  cfg.check_valid();
  double extent = 0.0;
  for (double x : tensor) {
    const double v = mode == QuantMode::kSymmetricWeights ? std::abs(x) : x;
    extent = std::max(extent, v);
  }
  if (extent <= 0.0) {
    throw DegenerateTensorError("tensor has no spread; cannot calibrate");
  }
  std::vector<double> grid;
  grid.reserve(cfg.candidate_grid_size);
  for (int j = 1; j <= cfg.candidate_grid_size; ++j) {
    grid.push_back(extent * j / cfg.candidate_grid_size);
  }
  return grid;
}

// KL between the original and quantized value distributions at one clip
// candidate, both histogrammed over the same bins.
inline double calibration_kl(const std::vector<double>& tensor, int bits,
                             const CalibConfig& cfg, QuantMode mode,
                             double clip) {
  const double lo = mode == QuantMode::kSymmetricWeights ? -clip : 0.0;
  const QuantScheme scheme{bits, clip, mode};
  const std::vector<double> original =
      detail::clip_histogram(tensor, lo, clip, cfg.histogram_bins);
  std::vector<double> quantized(tensor.size());
  for (std::size_t i = 0; i < tensor.size(); ++i) {
    quantized[i] = quantize_value(tensor[i], scheme);
  }
  const std::vector<double> induced =
      detail::clip_histogram(quantized, lo, clip, cfg.histogram_bins);
  return kl_divergence(original, induced, cfg.epsilon_smoothing);
}

struct CalibResult {
  double clip = 0.0;
  double kl = 0.0;
};

// Scans the candidate grid and returns the clip with minimum KL; ties go to
// the smallest clip (finer resolution).
inline CalibResult kl_calibrate(const std::vector<double>& tensor, int bits,
                                const CalibConfig& cfg, QuantMode mode) {
  if (tensor.empty()) throw EmptyTensorError("cannot calibrate an empty tensor");
  const bool all_equal =
      std::all_of(tensor.begin(), tensor.end(),
                  [&tensor](double x) { return x == tensor.front(); });
  if (all_equal) {
    throw DegenerateTensorError("all tensor elements are equal");
  }
  CalibResult best{0.0, std::numeric_limits<double>::infinity()};
  for (double clip : candidate_clips(tensor, cfg, mode)) {
    const double kl = calibration_kl(tensor, bits, cfg, mode, clip);
    if (kl < best.kl) best = CalibResult{clip, kl};
  }
  return best;
}

}  // namespace apq

#endif  // APQ_QUANTIZER_HPP_
