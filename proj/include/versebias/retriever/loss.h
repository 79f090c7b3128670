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


// Dot-product scoring and the sampled-softmax training objective.
//
// Row i of a batch of K pairs scores its input against every response in
// the batch, optionally against its own input encoded by the response tower
// (the self negative) and against any hard negatives attached to that row:
//
//   P(y_i | x_i) = exp(S(x_i, y_i)) / (sum_k exp(S(x_i, y_k))
//                                      + exp(S(x_i, x_i)) + sum_j exp(S(x_i, n_ij)))
//
// and the batch loss is the mean negative log probability over rows.

#ifndef VERSEBIAS_RETRIEVER_LOSS_H_
#define VERSEBIAS_RETRIEVER_LOSS_H_

#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include "versebias/random.h"
#include "versebias/retriever/model.h"

namespace versebias::retriever {

using TokenIds = std::vector<int>;

struct TrainRow {
  TokenIds input;
  TokenIds positive;
  std::vector<TokenIds> hard_negatives;
};

struct TrainBatch {
  std::vector<TrainRow> rows;
};

struct LossOptions {
  bool self_negative = true;
  bool hard_negatives = true;

  nlohmann::json ToJson() const;
  static LossOptions FromJson(const nlohmann::json& j);
};

// Dot product. Throws std::invalid_argument on a dimension mismatch.
double Score(std::span<const double> hx, std::span<const double> hy);

// Embeddings for one batch, already encoded.
struct BatchEmbeddings {
  Matrix<double> inputs;                  // K x e
  Matrix<double> responses;               // K x e
  Matrix<double> selves;                  // K x e, or 0 rows when unused
  std::vector<Matrix<double>> hard;       // per row, n_i x e
};

// Scores of row i: the K in-batch responses, then the self negative (when
// present), then the row's hard negatives.
std::vector<double> RowLogits(const BatchEmbeddings& e, int row);
double LogSumExp(std::span<const double> values);
double ProbFromEmbeddings(const BatchEmbeddings& e, int row);
double LossFromEmbeddings(const BatchEmbeddings& e);

// Throws std::invalid_argument for K < 2.
template <typename Real>
BatchEmbeddings EmbedBatch(const ModelParams<Real>& params,
                           const TrainBatch& batch, const LossOptions& options);

template <typename Real>
double ProbBatch(const ModelParams<Real>& params, const TrainBatch& batch,
                 int row, const LossOptions& options);

template <typename Real>
double BatchLoss(const ModelParams<Real>& params, const TrainBatch& batch,
                 const LossOptions& options);

// Loss with gradients accumulated into `grads` (which must share the
// config). Dropout is applied when `dropout` is non-null.
template <typename Real>
double BatchLossAndGrad(const ModelParams<Real>& params,
                        const TrainBatch& batch, const LossOptions& options,
                        ModelParams<Real>& grads,
                        UniformStream* dropout = nullptr);

// Softmax of S(x, .) over every element of `pool`.
template <typename Real>
std::vector<double> PoolDistribution(const ModelParams<Real>& params,
                                     std::span<const int> x,
                                     std::span<const TokenIds> pool);

// Probability of `y` under PoolDistribution. Throws std::invalid_argument
// when y is not an element of the pool.
template <typename Real>
double ProbFull(const ModelParams<Real>& params, std::span<const int> x,
                std::span<const int> y, std::span<const TokenIds> pool);

}  // namespace versebias::retriever

#endif  // VERSEBIAS_RETRIEVER_LOSS_H_
