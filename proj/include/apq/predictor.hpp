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
// The accuracy predictor: a 3-layer feed-forward network (two hidden layers
// of width 400, scalar sigmoid output) trained with Adam on MSE loss. Two
// input variants share the code: architecture-only encodings for the
// full-precision predictor and joint encodings for the quantization-aware
// one. transfer_init() grows a trained full-precision predictor into the
// joint input space by placing its first-layer rows at the architecture
// coordinates and zero-initializing the quantization coordinates, so the
// transferred predictor reproduces the original's outputs exactly until
// fine-tuning moves it.

#ifndef APQ_PREDICTOR_HPP_
#define APQ_PREDICTOR_HPP_

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "apq/encoding.hpp"
#include "apq/errors.hpp"
#include "apq/rng.hpp"
#include "apq/search_space.hpp"

namespace apq {

struct MlpParams {
  static constexpr int kHidden = 400;

  Eigen::MatrixXd w1;  // input_dim x kHidden
  Eigen::VectorXd b1;  // kHidden
  Eigen::MatrixXd w2;  // kHidden x kHidden
  Eigen::VectorXd b2;  // kHidden
  Eigen::VectorXd w3;  // kHidden
  double b3 = 0.0;

  int input_dim() const { return static_cast<int>(w1.rows()); }

  bool all_finite() const {
    return w1.allFinite() && b1.allFinite() && w2.allFinite() &&
           b2.allFinite() && w3.allFinite() && std::isfinite(b3);
  }
};

struct TrainConfig {
  double learning_rate = 1e-3;
  int batch_size = 256;
  int epochs = 100;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_epsilon = 1e-8;
  double weight_init_scale = 1.0;
  std::uint64_t seed = 0;

  void check_valid() const {
    if (!(learning_rate > 0.0)) throw ConfigError("learning_rate must be > 0");
    if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
    if (epochs < 0) throw ConfigError("epochs must be >= 0");
    if (adam_beta1 < 0.0 || adam_beta1 >= 1.0 || adam_beta2 < 0.0 ||
        adam_beta2 >= 1.0) {
      throw ConfigError("adam betas must lie in [0, 1)");
    }
  }
};

// Fine-tuning defaults for the transfer step: shorter and gentler than a
// from-scratch run, since most weights arrive pretrained.
inline TrainConfig transfer_finetune_config() {
  TrainConfig cfg;
  cfg.learning_rate = 1e-4;
  cfg.epochs = 30;
  return cfg;
}

struct LabeledSample {
  std::vector<double> encoding;
  double accuracy = 0.0;
};

namespace detail {

inline double uniform_symmetric(Rng& rng, double scale) {
  return scale * (2.0 * rng.uniform_real() - 1.0);
}

inline void fill_uniform(Eigen::MatrixXd& m, Rng& rng, double scale) {
  // Row-major fill order, independent of Eigen's storage layout.
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      m(r, c) = uniform_symmetric(rng, scale);
    }
  }
}

}  // namespace detail

// Glorot-style uniform init in [-s, s] with s = scale * sqrt(6/(fan_in+fan_out));
// biases start at zero.
inline MlpParams init_params(int input_dim, std::uint64_t seed,
                             double weight_init_scale = 1.0) {
  if (input_dim < 1) throw DimensionMismatchError("input_dim must be >= 1");
  MlpParams p;
  const int h = MlpParams::kHidden;
  p.w1.resize(input_dim, h);
  p.b1 = Eigen::VectorXd::Zero(h);
  p.w2.resize(h, h);
  p.b2 = Eigen::VectorXd::Zero(h);
  p.w3.resize(h);
  Rng rng1 = derive_rng(seed, "init_w1");
  detail::fill_uniform(p.w1, rng1,
                       weight_init_scale * std::sqrt(6.0 / (input_dim + h)));
  Rng rng2 = derive_rng(seed, "init_w2");
  detail::fill_uniform(p.w2, rng2, weight_init_scale * std::sqrt(6.0 / (h + h)));
  Rng rng3 = derive_rng(seed, "init_w3");
  const double s3 = weight_init_scale * std::sqrt(6.0 / (h + 1));
  for (int i = 0; i < h; ++i) p.w3(i) = detail::uniform_symmetric(rng3, s3);
  p.b3 = 0.0;
  return p;
}

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// Single-sample forward pass. The first layer accumulates rows of w1 in
// ascending coordinate order, skipping zero inputs. For one-hot encodings
// this is both faster than a dense product and gives an exact guarantee:
// inserting zero-valued coordinates (as transfer_init does for the
// quantization head) cannot change the result even at the bit level.
inline double forward(const MlpParams& params,
                      const std::vector<double>& x) {
  if (static_cast<int>(x.size()) != params.input_dim()) {
    throw DimensionMismatchError(
        "input has " + std::to_string(x.size()) + " coordinates, predictor expects " +
        std::to_string(params.input_dim()));
  }
  Eigen::VectorXd z1 = params.b1;
  for (std::size_t j = 0; j < x.size(); ++j) {
    if (x[j] != 0.0) {
      z1.noalias() += x[j] * params.w1.row(static_cast<Eigen::Index>(j)).transpose();
    }
  }
  const Eigen::VectorXd a1 = z1.cwiseMax(0.0);
  Eigen::VectorXd z2 = params.w2.transpose() * a1 + params.b2;
  const Eigen::VectorXd a2 = z2.cwiseMax(0.0);
  return sigmoid(params.w3.dot(a2) + params.b3);
}

struct MlpGrad {
  Eigen::MatrixXd w1;
  Eigen::VectorXd b1;
  Eigen::MatrixXd w2;
  Eigen::VectorXd b2;
  Eigen::VectorXd w3;
  double b3 = 0.0;
};

struct GradResult {
  MlpGrad grad;
  double mse = 0.0;
};

namespace detail {

struct BatchViews {
  Eigen::MatrixXd x;  // batch x input_dim
  Eigen::VectorXd y;  // batch
};

inline BatchViews gather_batch(const std::vector<LabeledSample>& data,
                               const std::vector<int>& indices, int begin,
                               int end, int input_dim) {
  BatchViews views;
  views.x.resize(end - begin, input_dim);
  views.y.resize(end - begin);
  for (int r = begin; r < end; ++r) {
    const LabeledSample& sample = data[indices[r]];
    if (static_cast<int>(sample.encoding.size()) != input_dim) {
      throw DimensionMismatchError("sample encoding length mismatch");
    }
    views.x.row(r - begin) = Eigen::Map<const Eigen::VectorXd>(
        sample.encoding.data(), input_dim);
    views.y(r - begin) = sample.accuracy;
  }
  return views;
}

// Dense batched forward + backward for the mean squared error
//   L = (1/B) sum_i (sigmoid(f(x_i)) - t_i)^2.
inline GradResult batch_grad(const MlpParams& p, const Eigen::MatrixXd& x,
                             const Eigen::VectorXd& targets) {
  const Eigen::Index batch = x.rows();
  const Eigen::MatrixXd z1 =
      (x * p.w1).rowwise() + p.b1.transpose();
  const Eigen::MatrixXd a1 = z1.cwiseMax(0.0);
  const Eigen::MatrixXd z2 = (a1 * p.w2).rowwise() + p.b2.transpose();
  const Eigen::MatrixXd a2 = z2.cwiseMax(0.0);
  const Eigen::VectorXd z3 = (a2 * p.w3).array() + p.b3;
  const Eigen::VectorXd y = z3.unaryExpr([](double v) { return sigmoid(v); });
  const Eigen::VectorXd residual = y - targets;

  GradResult result;
  result.mse = residual.squaredNorm() / static_cast<double>(batch);

  const Eigen::VectorXd dz3 =
      (2.0 / static_cast<double>(batch)) * residual.array() * y.array() *
      (1.0 - y.array());
  result.grad.w3 = a2.transpose() * dz3;
  result.grad.b3 = dz3.sum();
  const Eigen::MatrixXd da2 = dz3 * p.w3.transpose();
  const Eigen::MatrixXd dz2 =
      da2.array() * (z2.array() > 0.0).cast<double>();
  result.grad.w2 = a1.transpose() * dz2;
  result.grad.b2 = dz2.colwise().sum();
  const Eigen::MatrixXd da1 = dz2 * p.w2.transpose();
  const Eigen::MatrixXd dz1 =
      da1.array() * (z1.array() > 0.0).cast<double>();
  result.grad.w1 = x.transpose() * dz1;
  result.grad.b1 = dz1.colwise().sum();
  return result;
}

}  // namespace detail

// Exact analytic gradient of the batch MSE loss.
inline GradResult grad(const MlpParams& params,
                       const std::vector<LabeledSample>& batch) {
  if (batch.empty()) throw DimensionMismatchError("gradient of an empty batch");
  std::vector<int> all(batch.size());
  std::iota(all.begin(), all.end(), 0);
  const detail::BatchViews views = detail::gather_batch(
      batch, all, 0, static_cast<int>(batch.size()), params.input_dim());
  return detail::batch_grad(params, views.x, views.y);
}

struct TrainResult {
  MlpParams params;
  double final_mse = 0.0;
};

// Adam over shuffled mini-batches for cfg.epochs. Deterministic: the shuffle
// stream, batch order and update arithmetic are all fixed by (data, cfg, init).
inline TrainResult train(const MlpParams& init,
                         const std::vector<LabeledSample>& data,
                         const TrainConfig& cfg) {
  cfg.check_valid();
  if (data.empty()) throw ConfigError("training data is empty");
  for (const LabeledSample& s : data) {
    if (static_cast<int>(s.encoding.size()) != init.input_dim()) {
      throw DimensionMismatchError("sample encoding length mismatch");
    }
    if (!(s.accuracy >= 0.0 && s.accuracy <= 1.0)) {
      throw ConfigError("sample accuracy must lie in [0, 1]");
    }
  }

  MlpParams p = init;
  const int n = static_cast<int>(data.size());
  const int h = MlpParams::kHidden;
  MlpGrad m{Eigen::MatrixXd::Zero(p.w1.rows(), h), Eigen::VectorXd::Zero(h),
            Eigen::MatrixXd::Zero(h, h), Eigen::VectorXd::Zero(h),
            Eigen::VectorXd::Zero(h), 0.0};
  MlpGrad v = m;
  long step = 0;

  auto adam_update = [&cfg, &step](auto& param, auto& m_t, auto& v_t,
                                   const auto& g) {
    const double bc1 = 1.0 - std::pow(cfg.adam_beta1, static_cast<double>(step));
    const double bc2 = 1.0 - std::pow(cfg.adam_beta2, static_cast<double>(step));
    m_t = cfg.adam_beta1 * m_t + (1.0 - cfg.adam_beta1) * g;
    v_t = (cfg.adam_beta2 * v_t.array() +
           (1.0 - cfg.adam_beta2) * g.array().square())
              .matrix();
    param.array() -= cfg.learning_rate * (m_t.array() / bc1) /
                     ((v_t.array() / bc2).sqrt() + cfg.adam_epsilon);
  };

  std::vector<int> indices(data.size());
  std::iota(indices.begin(), indices.end(), 0);
  Rng shuffle_rng = derive_rng(cfg.seed, "train_shuffle");

  double last_mse = 0.0;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    // Fisher-Yates with our own stream; std::shuffle is not pinned.
    for (int i = n - 1; i > 0; --i) {
      const int j = static_cast<int>(shuffle_rng.uniform_index(i + 1));
      std::swap(indices[i], indices[j]);
    }
    for (int begin = 0; begin < n; begin += cfg.batch_size) {
      const int end = std::min(begin + cfg.batch_size, n);
      const detail::BatchViews views =
          detail::gather_batch(data, indices, begin, end, p.input_dim());
      const GradResult g = detail::batch_grad(p, views.x, views.y);
      if (!std::isfinite(g.mse)) {
        throw NonFiniteLossError(
            "non-finite loss at epoch " + std::to_string(epoch), epoch);
      }
      ++step;
      adam_update(p.w1, m.w1, v.w1, g.grad.w1);
      adam_update(p.b1, m.b1, v.b1, g.grad.b1);
      adam_update(p.w2, m.w2, v.w2, g.grad.w2);
      adam_update(p.b2, m.b2, v.b2, g.grad.b2);
      adam_update(p.w3, m.w3, v.w3, g.grad.w3);
      {
        const double bc1 =
            1.0 - std::pow(cfg.adam_beta1, static_cast<double>(step));
        const double bc2 =
            1.0 - std::pow(cfg.adam_beta2, static_cast<double>(step));
        m.b3 = cfg.adam_beta1 * m.b3 + (1.0 - cfg.adam_beta1) * g.grad.b3;
        v.b3 = cfg.adam_beta2 * v.b3 +
               (1.0 - cfg.adam_beta2) * g.grad.b3 * g.grad.b3;
        p.b3 -= cfg.learning_rate * (m.b3 / bc1) /
                (std::sqrt(v.b3 / bc2) + cfg.adam_epsilon);
      }
      last_mse = g.mse;
    }
  }

  TrainResult result{std::move(p), last_mse};
  if (cfg.epochs > 0) {
    std::vector<int> all(data.size());
    std::iota(all.begin(), all.end(), 0);
    const detail::BatchViews views =
        detail::gather_batch(data, all, 0, n, result.params.input_dim());
    result.final_mse =
        detail::batch_grad(result.params, views.x, views.y).mse;
  }
  return result;
}

// Grows a full-precision predictor (architecture-only input) into the joint
// input space. First-layer rows of the architecture coordinates are copied to
// their interleaved positions in the joint layout; rows for the quantization
// coordinates start at zero; everything else is copied verbatim. Until
// fine-tuning, predictions on encode_joint(a, q) equal the original's on
// encode_arch(a) for every policy q.
inline MlpParams transfer_init(const MlpParams& fp,
                               const SearchSpaceConfig& space) {
  const EncodingLayout layout(space);
  if (fp.input_dim() != layout.arch_dim) {
    throw DimensionMismatchError(
        "full-precision predictor has input_dim " +
        std::to_string(fp.input_dim()) + " but the space's architecture encoding is " +
        std::to_string(layout.arch_dim) + "-dimensional");
  }
  MlpParams joint = fp;
  joint.w1 = Eigen::MatrixXd::Zero(layout.joint_dim, MlpParams::kHidden);
  for (int a = 0; a < layout.arch_dim; ++a) {
    joint.w1.row(layout.arch_to_joint[a]) = fp.w1.row(a);
  }
  return joint;
}

// Fraction of unordered test pairs with distinct labels whose order the
// predictor reproduces. Predicted ties count as wrong; label ties are left
// out of the denominator, so a constant predictor scores 0.
inline double pairwise_accuracy(const MlpParams& params,
                                const std::vector<LabeledSample>& test) {
  if (test.size() < 2) {
    throw DegenerateTestSetError("pairwise accuracy needs at least 2 samples");
  }
  std::vector<double> predicted;
  predicted.reserve(test.size());
  for (const LabeledSample& s : test) predicted.push_back(forward(params, s.encoding));
  long correct = 0;
  long total = 0;
  for (std::size_t i = 0; i < test.size(); ++i) {
    for (std::size_t j = i + 1; j < test.size(); ++j) {
      const double label_diff = test[i].accuracy - test[j].accuracy;
      if (label_diff == 0.0) continue;
      ++total;
      const double pred_diff = predicted[i] - predicted[j];
      if (pred_diff != 0.0 && (pred_diff > 0.0) == (label_diff > 0.0)) {
        ++correct;
      }
    }
  }
  if (total == 0) {
    throw DegenerateTestSetError("all test labels are equal");
  }
  return static_cast<double>(correct) / static_cast<double>(total);
}

namespace detail {

inline void write_f64_le(std::ostream& out, double value) {
  const std::uint64_t bits = std::bit_cast<std::uint64_t>(value);
  char bytes[8];
  for (int i = 0; i < 8; ++i) {
    bytes[i] = static_cast<char>((bits >> (8 * i)) & 0xff);
  }
  out.write(bytes, 8);
}

inline double read_f64_le(std::istream& in) {
  char bytes[8];
  in.read(bytes, 8);
  if (in.gcount() != 8) throw CorruptFileError("checkpoint truncated");
  std::uint64_t bits = 0;
  for (int i = 0; i < 8; ++i) {
    bits |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes[i]))
            << (8 * i);
  }
  return std::bit_cast<double>(bits);
}

}  // namespace detail

inline constexpr char kCheckpointMagic[] = "APQPRED1";

// Checkpoint layout: 8 magic bytes, one line of JSON header
// {input_dim, space_fingerprint, variant}, then the weights as little-endian
// 64-bit floats in w1 (row-major), b1, w2 (row-major), b2, w3, b3 order.
inline void save_predictor(const MlpParams& params, const std::string& variant,
                           const std::string& fingerprint,
                           const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write checkpoint: " + path);
  out.write(kCheckpointMagic, 8);
  const nlohmann::json header{{"input_dim", params.input_dim()},
                              {"space_fingerprint", fingerprint},
                              {"variant", variant}};
  const std::string header_text = header.dump();
  out << header_text << "\n";
  auto write_matrix = [&out](const Eigen::MatrixXd& m) {
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      for (Eigen::Index c = 0; c < m.cols(); ++c) {
        detail::write_f64_le(out, m(r, c));
      }
    }
  };
  auto write_vector = [&out](const Eigen::VectorXd& v) {
    for (Eigen::Index i = 0; i < v.size(); ++i) detail::write_f64_le(out, v(i));
  };
  write_matrix(params.w1);
  write_vector(params.b1);
  write_matrix(params.w2);
  write_vector(params.b2);
  write_vector(params.w3);
  detail::write_f64_le(out, params.b3);
  if (!out) throw IoError("failed while writing checkpoint: " + path);
}

struct LoadedPredictor {
  MlpParams params;
  std::string variant;
  std::string space_fingerprint;
};

inline LoadedPredictor load_predictor(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint: " + path);
  char magic[8];
  in.read(magic, 8);
  if (in.gcount() != 8 || std::string(magic, 8) != kCheckpointMagic) {
    throw CorruptFileError("bad checkpoint magic in " + path);
  }
  std::string header_text;
  if (!std::getline(in, header_text)) {
    throw CorruptFileError("checkpoint header missing in " + path);
  }
  LoadedPredictor loaded;
  int input_dim = 0;
  try {
    const nlohmann::json header = nlohmann::json::parse(header_text);
    input_dim = header.at("input_dim").get<int>();
    loaded.space_fingerprint = header.at("space_fingerprint").get<std::string>();
    loaded.variant = header.at("variant").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw CorruptFileError("malformed checkpoint header in " + path + ": " +
                           e.what());
  }
  if (input_dim < 1) throw CorruptFileError("nonpositive input_dim in " + path);
  const int h = MlpParams::kHidden;
  MlpParams& p = loaded.params;
  p.w1.resize(input_dim, h);
  p.b1.resize(h);
  p.w2.resize(h, h);
  p.b2.resize(h);
  p.w3.resize(h);
  auto read_matrix = [&in](Eigen::MatrixXd& m) {
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      for (Eigen::Index c = 0; c < m.cols(); ++c) {
        m(r, c) = detail::read_f64_le(in);
      }
    }
  };
  auto read_vector = [&in](Eigen::VectorXd& v) {
    for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = detail::read_f64_le(in);
  };
  read_matrix(p.w1);
  read_vector(p.b1);
  read_matrix(p.w2);
  read_vector(p.b2);
  read_vector(p.w3);
  p.b3 = detail::read_f64_le(in);
  if (in.peek() != std::char_traits<char>::eof()) {
    throw CorruptFileError("trailing bytes in checkpoint " + path);
  }
  return loaded;
}

}  // namespace apq

#endif  // APQ_PREDICTOR_HPP_
