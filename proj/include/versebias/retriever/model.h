// Copyright 2026 The Versebias Authors.
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


// Dual-encoder towers: token + learned position embeddings, pre-norm
// transformer layers, final layer norm, mean pooling and a small
// feed-forward head (ReLU hidden layers, SoftSign output).
//
// Parameters are plain row-major Eigen matrices; the forward and backward
// passes are written out by hand so that gradients can be checked against
// finite differences in double precision.

#ifndef VERSEBIAS_RETRIEVER_MODEL_H_
#define VERSEBIAS_RETRIEVER_MODEL_H_

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "versebias/random.h"

namespace versebias::retriever {

template <typename Real>
using Matrix =
    Eigen::Matrix<Real, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename Real>
using RowVector = Eigen::Matrix<Real, 1, Eigen::Dynamic>;

enum class Tower { kInput, kResponse };

struct EncoderConfig {
  int vocab_size = 0;
  int max_len = 32;
  int model_dim = 64;
  int num_layers = 2;
  int num_heads = 2;
  int ff_hidden = 64;
  int head_layers = 2;
  int head_hidden = 64;
  int embedding_dim = 64;
  double attention_dropout = 0.1;
  bool share_towers = false;

  // Small enough to train on one CPU core in minutes.
  static EncoderConfig Desk(int vocab_size);
  // 4 layers x 4 heads, hidden size 1024, two 500-wide head layers.
  static EncoderConfig Reference(int vocab_size);

  // Throws std::invalid_argument on non-positive sizes, model_dim not
  // divisible by num_heads, or dropout outside [0, 1).
  void Validate() const;
  nlohmann::json ToJson() const;
  // Unknown keys are rejected.
  static EncoderConfig FromJson(const nlohmann::json& j);

  bool operator==(const EncoderConfig&) const = default;
};

template <typename Real>
struct LayerParams {
  Matrix<Real> attn_norm_gain, attn_norm_bias;  // 1 x d
  Matrix<Real> query, key, value, output;       // d x d
  // No key bias: it shifts every score in a row equally and softmax
  // ignores it.
  Matrix<Real> query_bias, value_bias, output_bias;  // 1 x d
  Matrix<Real> ff_norm_gain, ff_norm_bias;      // 1 x d
  Matrix<Real> ff_in, ff_in_bias;               // d x f, 1 x f
  Matrix<Real> ff_out, ff_out_bias;             // f x d, 1 x d
};

template <typename Real>
struct TowerParams {
  Matrix<Real> token_embedding;     // vocab x d
  Matrix<Real> position_embedding;  // max_len x d
  std::vector<LayerParams<Real>> layers;
  Matrix<Real> final_norm_gain, final_norm_bias;
  std::vector<Matrix<Real>> head_weights;  // in x out
  std::vector<Matrix<Real>> head_biases;   // 1 x out
};

template <typename Real>
class ModelParams {
 public:
  using NamedTensor = std::pair<std::string, Matrix<Real>*>;
  using ConstNamedTensor = std::pair<std::string, const Matrix<Real>*>;

  ModelParams() = default;

  // Every value zero, including layer-norm gains.
  static ModelParams Zeros(const EncoderConfig& config);
  // Unit norm gains, zero biases, scaled normal weights.
  static ModelParams Random(const EncoderConfig& config, uint64_t seed);

  const EncoderConfig& config() const { return config_; }
  TowerParams<Real>& tower(Tower t);
  const TowerParams<Real>& tower(Tower t) const;

  // Trainable tensors in a fixed order. With shared towers only the input
  // tower is listed.
  std::vector<NamedTensor> Tensors();
  std::vector<ConstNamedTensor> Tensors() const;
  size_t NumScalars() const;
  bool AllFinite() const;

  void SetZero();
  // this += scale * other (same config).
  void AddScaled(const ModelParams& other, Real scale);
  double SquaredNorm() const;

  template <typename Other>
  ModelParams<Other> Cast() const;

  // SHA-256 over the config and every tensor's shape and raw bytes.
  std::string Hash() const;

  // "versebias-checkpoint 1" line, a JSON header line (config, dtype, hash,
  // tensor shapes), then little-endian tensor data.
  void Save(const std::filesystem::path& path) const;
  static ModelParams Load(const std::filesystem::path& path);
  std::string Serialize() const;
  static ModelParams Deserialize(std::string_view bytes);

 private:
  template <typename>
  friend class ModelParams;

  EncoderConfig config_;
  TowerParams<Real> input_;
  TowerParams<Real> response_;
};

// One forward pass of a tower over a token sequence, holding what the
// backward pass needs.
template <typename Real>
class TowerPass {
 public:
  // `ids` must be non-empty with every id in [0, vocab_size). Sequences
  // longer than max_len keep their first max_len - 1 ids plus the last one.
  // Attention dropout is applied only when `dropout` is non-null.
  TowerPass(const ModelParams<Real>& params, Tower tower,
            std::span<const int> ids, UniformStream* dropout = nullptr);

  const RowVector<Real>& output() const { return output_; }
  bool truncated() const { return truncated_; }

  // Accumulates d(loss)/d(params) into `grads` given d(loss)/d(output).
  void Backward(const RowVector<Real>& d_output, ModelParams<Real>& grads) const;

 private:
  struct NormCache {
    Matrix<Real> normalized;
    std::vector<Real> inv_std;
  };
  struct LayerCache {
    Matrix<Real> input;
    NormCache attn_norm;
    Matrix<Real> normed;
    Matrix<Real> q, k, v;
    std::vector<Matrix<Real>> probs;      // softmax, per head
    std::vector<Matrix<Real>> keep;       // dropout scale, per head
    Matrix<Real> context;
    Matrix<Real> mid;
    NormCache ff_norm;
    Matrix<Real> ff_normed;
    Matrix<Real> hidden_pre;
  };

  const ModelParams<Real>& params_;
  Tower tower_;
  std::vector<int> ids_;
  bool truncated_ = false;
  bool dropout_applied_ = false;
  std::vector<LayerCache> layers_;
  Matrix<Real> last_;
  NormCache final_norm_;
  std::vector<RowVector<Real>> head_inputs_;
  std::vector<RowVector<Real>> head_pre_;
  RowVector<Real> output_;
};

// Embedding of a token sequence with dropout off.
template <typename Real>
RowVector<Real> Encode(const ModelParams<Real>& params, Tower tower,
                       std::span<const int> ids, bool* truncated = nullptr);

template <typename Real>
template <typename Other>
ModelParams<Other> ModelParams<Real>::Cast() const {
  ModelParams<Other> out = ModelParams<Other>::Zeros(config_);
  auto src = Tensors();
  auto dst = out.Tensors();
  for (size_t i = 0; i < src.size(); ++i) {
    *dst[i].second = src[i].second->template cast<Other>();
  }
  return out;
}

extern template class ModelParams<float>;
extern template class ModelParams<double>;
extern template class TowerPass<float>;
extern template class TowerPass<double>;

}  // namespace versebias::retriever

#endif  // VERSEBIAS_RETRIEVER_MODEL_H_
