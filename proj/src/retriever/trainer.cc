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


#include "versebias/retriever/trainer.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <tuple>

#include "versebias/random.h"

namespace versebias::retriever {

void TrainConfig::Validate() const {
  if (steps < 0) throw std::invalid_argument("steps must be >= 0");
  if (batch_size < 2) throw std::invalid_argument("batch_size must be >= 2");
  if (!(learning_rate > 0) || !(final_learning_rate > 0)) {
    throw std::invalid_argument("learning rates must be > 0");
  }
  if (!(decay_fraction >= 0 && decay_fraction <= 1)) {
    throw std::invalid_argument("decay_fraction must be in [0, 1]");
  }
}

nlohmann::json TrainConfig::ToJson() const {
  return {{"steps", steps},
          {"batch_size", batch_size},
          {"learning_rate", learning_rate},
          {"final_learning_rate", final_learning_rate},
          {"decay_fraction", decay_fraction},
          {"seed", seed},
          {"dropout", dropout},
          {"loss", loss.ToJson()}};
}

TrainConfig TrainConfig::FromJson(const nlohmann::json& j) {
  TrainConfig c;
  for (const auto& [key, v] : j.items()) {
    if (key == "steps") {
      c.steps = v.get<int>();
    } else if (key == "batch_size") {
      c.batch_size = v.get<int>();
    } else if (key == "learning_rate") {
      c.learning_rate = v.get<double>();
    } else if (key == "final_learning_rate") {
      c.final_learning_rate = v.get<double>();
    } else if (key == "decay_fraction") {
      c.decay_fraction = v.get<double>();
    } else if (key == "seed") {
      c.seed = v.get<uint64_t>();
    } else if (key == "dropout") {
      c.dropout = v.get<bool>();
    } else if (key == "loss") {
      c.loss = LossOptions::FromJson(v);
    } else {
      throw std::invalid_argument("unknown retriever training key: " + key);
    }
  }
  c.Validate();
  return c;
}

TrainingDiverged::TrainingDiverged(int step, double loss)
    : std::runtime_error("training diverged at step " + std::to_string(step) +
                         ": loss " + std::to_string(loss) +
                         "; lower the learning rate or check inputs"),
      step_(step) {}

TrainResult Train(std::span<const TrainRow> examples,
                  const EncoderConfig& encoder, const TrainConfig& config,
                  const ProgressFn& progress) {
  config.Validate();
  const size_t k = static_cast<size_t>(config.batch_size);
  if (examples.size() < 2 * k) {
    throw std::invalid_argument(
        "need at least 2 x batch_size training examples, got " +
        std::to_string(examples.size()));
  }
  TrainResult result;
  result.params = ModelParams<float>::Random(encoder, config.seed);
  ModelParams<float> grads = ModelParams<float>::Zeros(encoder);
  UniformStream order_rng(config.seed + 1);
  UniformStream dropout_rng(config.seed + 2);

  // Canonical content order first, so only the seed decides the visit order.
  std::vector<size_t> order(examples.size());
  std::iota(order.begin(), order.end(), size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    const auto& x = examples[a];
    const auto& y = examples[b];
    return std::tie(x.input, x.positive, x.hard_negatives) <
           std::tie(y.input, y.positive, y.hard_negatives);
  });
  SeededShuffle(order, order_rng);
  size_t cursor = 0;
  const int decay_step =
      static_cast<int>(std::lround(config.decay_fraction * config.steps));

  TrainBatch batch;
  batch.rows.resize(k);
  for (int step = 0; step < config.steps; ++step) {
    for (size_t i = 0; i < k; ++i) {
      if (cursor == order.size()) {
        SeededShuffle(order, order_rng);
        cursor = 0;
      }
      batch.rows[i] = examples[order[cursor++]];
    }
    grads.SetZero();
    double loss = BatchLossAndGrad(result.params, batch, config.loss, grads,
                                   config.dropout ? &dropout_rng : nullptr);
    if (!std::isfinite(loss)) throw TrainingDiverged(step, loss);
    double rate = step < decay_step ? config.learning_rate
                                    : config.final_learning_rate;
    result.params.AddScaled(grads, static_cast<float>(-rate));
    result.loss_curve.push_back(loss);
    if (progress) progress(step, loss, rate);
  }
  if (!result.params.AllFinite()) {
    throw TrainingDiverged(config.steps, std::nan(""));
  }
  return result;
}

double EvaluateLoss(const ModelParams<float>& params,
                    std::span<const TrainRow> examples, int batch_size,
                    const LossOptions& options) {
  TrainBatch batch;
  double total = 0;
  int batches = 0;
  for (size_t start = 0; start + batch_size <= examples.size();
       start += batch_size) {
    batch.rows.assign(examples.begin() + start,
                      examples.begin() + start + batch_size);
    total += BatchLoss(params, batch, options);
    ++batches;
  }
  if (batches == 0) {
    throw std::invalid_argument("not enough examples for one batch");
  }
  return total / batches;
}

}  // namespace versebias::retriever
