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


#include "versebias/retriever/loss.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace versebias::retriever {

nlohmann::json LossOptions::ToJson() const {
  return {{"self_negative", self_negative}, {"hard_negatives", hard_negatives}};
}

LossOptions LossOptions::FromJson(const nlohmann::json& j) {
  LossOptions o;
  for (const auto& [key, v] : j.items()) {
    if (key == "self_negative") {
      o.self_negative = v.get<bool>();
    } else if (key == "hard_negatives") {
      o.hard_negatives = v.get<bool>();
    } else {
      throw std::invalid_argument("unknown loss option: " + key);
    }
  }
  return o;
}

double Score(std::span<const double> hx, std::span<const double> hy) {
  if (hx.size() != hy.size()) {
    throw std::invalid_argument("score: embedding dimensions differ (" +
                                std::to_string(hx.size()) + " vs " +
                                std::to_string(hy.size()) + ")");
  }
  double s = 0;
  for (size_t i = 0; i < hx.size(); ++i) s += hx[i] * hy[i];
  return s;
}

std::vector<double> RowLogits(const BatchEmbeddings& e, int row) {
  const auto hx = e.inputs.row(row);
  std::vector<double> logits;
  logits.reserve(e.responses.rows() + 1 +
                 (e.hard.empty() ? 0 : e.hard[row].rows()));
  for (Eigen::Index k = 0; k < e.responses.rows(); ++k) {
    logits.push_back(hx.dot(e.responses.row(k)));
  }
  if (e.selves.rows() > 0) logits.push_back(hx.dot(e.selves.row(row)));
  if (!e.hard.empty()) {
    for (Eigen::Index j = 0; j < e.hard[row].rows(); ++j) {
      logits.push_back(hx.dot(e.hard[row].row(j)));
    }
  }
  return logits;
}

double LogSumExp(std::span<const double> values) {
  double mx = -std::numeric_limits<double>::infinity();
  for (double v : values) mx = std::max(mx, v);
  if (!std::isfinite(mx)) return mx;
  double sum = 0;
  for (double v : values) sum += std::exp(v - mx);
  return mx + std::log(sum);
}

double ProbFromEmbeddings(const BatchEmbeddings& e, int row) {
  auto logits = RowLogits(e, row);
  return std::exp(logits[row] - LogSumExp(logits));
}

double LossFromEmbeddings(const BatchEmbeddings& e) {
  const int k = static_cast<int>(e.inputs.rows());
  double total = 0;
  for (int i = 0; i < k; ++i) {
    auto logits = RowLogits(e, i);
    total += LogSumExp(logits) - logits[i];
  }
  return total / k;
}

namespace {

void CheckBatch(const TrainBatch& batch) {
  if (batch.rows.size() < 2) {
    throw std::invalid_argument("a batch needs at least 2 pairs");
  }
}

template <typename Real>
Matrix<double> Stack(const std::vector<RowVector<Real>>& rows) {
  if (rows.empty()) return Matrix<double>(0, 0);
  Matrix<double> m(rows.size(), rows[0].size());
  for (size_t i = 0; i < rows.size(); ++i) m.row(i) = rows[i].template cast<double>();
  return m;
}

}  // namespace

template <typename Real>
BatchEmbeddings EmbedBatch(const ModelParams<Real>& params,
                           const TrainBatch& batch, const LossOptions& options) {
  CheckBatch(batch);
  std::vector<RowVector<Real>> in, resp, self;
  BatchEmbeddings e;
  for (const auto& r : batch.rows) {
    in.push_back(Encode(params, Tower::kInput, r.input));
    resp.push_back(Encode(params, Tower::kResponse, r.positive));
    if (options.self_negative) {
      self.push_back(Encode(params, Tower::kResponse, r.input));
    }
    if (options.hard_negatives) {
      std::vector<RowVector<Real>> hard;
      for (const auto& n : r.hard_negatives) {
        hard.push_back(Encode(params, Tower::kResponse, n));
      }
      Matrix<double> h = Stack(hard);
      if (hard.empty()) h.resize(0, params.config().embedding_dim);
      e.hard.push_back(std::move(h));
    }
  }
  e.inputs = Stack(in);
  e.responses = Stack(resp);
  e.selves = Stack(self);
  return e;
}

template <typename Real>
double ProbBatch(const ModelParams<Real>& params, const TrainBatch& batch,
                 int row, const LossOptions& options) {
  if (row < 0 || row >= static_cast<int>(batch.rows.size())) {
    throw std::out_of_range("batch row out of range");
  }
  return ProbFromEmbeddings(EmbedBatch(params, batch, options), row);
}

template <typename Real>
double BatchLoss(const ModelParams<Real>& params, const TrainBatch& batch,
                 const LossOptions& options) {
  return LossFromEmbeddings(EmbedBatch(params, batch, options));
}

template <typename Real>
double BatchLossAndGrad(const ModelParams<Real>& params,
                        const TrainBatch& batch, const LossOptions& options,
                        ModelParams<Real>& grads, UniformStream* dropout) {
  CheckBatch(batch);
  const int k = static_cast<int>(batch.rows.size());
  std::vector<TowerPass<Real>> in, resp, self;
  std::vector<std::vector<TowerPass<Real>>> hard(k);
  in.reserve(k);
  resp.reserve(k);
  for (const auto& r : batch.rows) {
    in.emplace_back(params, Tower::kInput, r.input, dropout);
    resp.emplace_back(params, Tower::kResponse, r.positive, dropout);
  }
  if (options.self_negative) {
    self.reserve(k);
    for (const auto& r : batch.rows) {
      self.emplace_back(params, Tower::kResponse, r.input, dropout);
    }
  }
  if (options.hard_negatives) {
    for (int i = 0; i < k; ++i) {
      hard[i].reserve(batch.rows[i].hard_negatives.size());
      for (const auto& n : batch.rows[i].hard_negatives) {
        hard[i].emplace_back(params, Tower::kResponse, n, dropout);
      }
    }
  }

  auto as_double = [](const TowerPass<Real>& p) {
    return RowVector<double>(p.output().template cast<double>());
  };
  const int e = params.config().embedding_dim;
  std::vector<RowVector<double>> hx(k), hy(k), hs(self.size());
  for (int i = 0; i < k; ++i) {
    hx[i] = as_double(in[i]);
    hy[i] = as_double(resp[i]);
  }
  for (size_t i = 0; i < self.size(); ++i) hs[i] = as_double(self[i]);

  std::vector<RowVector<double>> dx(k, RowVector<double>::Zero(e));
  std::vector<RowVector<double>> dy(k, RowVector<double>::Zero(e));
  double loss = 0;
  for (int i = 0; i < k; ++i) {
    std::vector<double> logits;
    for (int j = 0; j < k; ++j) logits.push_back(hx[i].dot(hy[j]));
    if (!self.empty()) logits.push_back(hx[i].dot(hs[i]));
    std::vector<RowVector<double>> hn;
    for (const auto& p : hard[i]) {
      hn.push_back(as_double(p));
      logits.push_back(hx[i].dot(hn.back()));
    }
    double lse = LogSumExp(logits);
    loss += lse - logits[i];
    // d(loss)/d(logit) = (softmax - onehot) / K
    std::vector<double> g(logits.size());
    for (size_t j = 0; j < logits.size(); ++j) {
      g[j] = std::exp(logits[j] - lse) / k;
    }
    g[i] -= 1.0 / k;
    size_t at = 0;
    for (int j = 0; j < k; ++j, ++at) {
      dx[i] += g[at] * hy[j];
      dy[j] += g[at] * hx[i];
    }
    if (!self.empty()) {
      dx[i] += g[at] * hs[i];
      self[i].Backward((g[at] * hx[i]).template cast<Real>(), grads);
      ++at;
    }
    for (size_t j = 0; j < hn.size(); ++j, ++at) {
      dx[i] += g[at] * hn[j];
      hard[i][j].Backward((g[at] * hx[i]).template cast<Real>(), grads);
    }
  }
  for (int i = 0; i < k; ++i) {
    in[i].Backward(dx[i].template cast<Real>(), grads);
    resp[i].Backward(dy[i].template cast<Real>(), grads);
  }
  return loss / k;
}

template <typename Real>
std::vector<double> PoolDistribution(const ModelParams<Real>& params,
                                     std::span<const int> x,
                                     std::span<const TokenIds> pool) {
  if (pool.empty()) throw std::invalid_argument("pool is empty");
  RowVector<double> hx = Encode(params, Tower::kInput, x).template cast<double>();
  std::vector<double> logits;
  logits.reserve(pool.size());
  for (const auto& y : pool) {
    logits.push_back(
        hx.dot(Encode(params, Tower::kResponse, y).template cast<double>()));
  }
  double lse = LogSumExp(logits);
  for (double& v : logits) v = std::exp(v - lse);
  return logits;
}

template <typename Real>
double ProbFull(const ModelParams<Real>& params, std::span<const int> x,
                std::span<const int> y, std::span<const TokenIds> pool) {
  auto it = std::find_if(pool.begin(), pool.end(), [&](const TokenIds& p) {
    return std::equal(p.begin(), p.end(), y.begin(), y.end());
  });
  if (it == pool.end()) throw std::invalid_argument("y is not in the pool");
  return PoolDistribution(params, x, pool)[it - pool.begin()];
}

#define VERSEBIAS_INSTANTIATE(Real)                                          \
  template BatchEmbeddings EmbedBatch(const ModelParams<Real>&,              \
                                      const TrainBatch&, const LossOptions&); \
  template double ProbBatch(const ModelParams<Real>&, const TrainBatch&, int, \
                            const LossOptions&);                              \
  template double BatchLoss(const ModelParams<Real>&, const TrainBatch&,      \
                            const LossOptions&);                              \
  template double BatchLossAndGrad(const ModelParams<Real>&,                  \
                                   const TrainBatch&, const LossOptions&,     \
                                   ModelParams<Real>&, UniformStream*);       \
  template std::vector<double> PoolDistribution(                              \
      const ModelParams<Real>&, std::span<const int>,                         \
      std::span<const TokenIds>);                                             \
  template double ProbFull(const ModelParams<Real>&, std::span<const int>,    \
                           std::span<const int>, std::span<const TokenIds>);

VERSEBIAS_INSTANTIATE(float)
VERSEBIAS_INSTANTIATE(double)

#undef VERSEBIAS_INSTANTIATE

}  // namespace versebias::retriever
