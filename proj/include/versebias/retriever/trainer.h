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


// Mini-batch SGD for the dual encoder with a step-decayed learning rate.

#ifndef VERSEBIAS_RETRIEVER_TRAINER_H_
#define VERSEBIAS_RETRIEVER_TRAINER_H_

#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "versebias/retriever/loss.h"
#include "versebias/retriever/model.h"

namespace versebias::retriever {

struct TrainConfig {
  int steps = 2000;
  int batch_size = 32;
  double learning_rate = 0.05;
  double final_learning_rate = 0.005;
  // The rate drops to final_learning_rate after this fraction of the steps.
  double decay_fraction = 0.5;
  uint64_t seed = 7;
  bool dropout = true;
  LossOptions loss;

  void Validate() const;
  nlohmann::json ToJson() const;
  static TrainConfig FromJson(const nlohmann::json& j);
};

class TrainingDiverged : public std::runtime_error {
 public:
  TrainingDiverged(int step, double loss);
  int step() const { return step_; }

 private:
  int step_;
};

struct TrainResult {
  ModelParams<float> params;
  std::vector<double> loss_curve;  // training loss at every step
};

using ProgressFn = std::function<void(int step, double loss, double rate)>;

// Parameters are initialized from config.seed; batches are drawn by walking
// a seeded permutation of `examples` in content order (reshuffled after each
// pass), so the caller's ordering of `examples` does not matter. Throws
// std::invalid_argument when there are fewer than 2 * batch_size examples
// and TrainingDiverged on a non-finite loss.
TrainResult Train(std::span<const TrainRow> examples,
                  const EncoderConfig& encoder, const TrainConfig& config,
                  const ProgressFn& progress = {});

// Mean loss over consecutive full batches of `examples`, dropout off.
double EvaluateLoss(const ModelParams<float>& params,
                    std::span<const TrainRow> examples, int batch_size,
                    const LossOptions& options);

}  // namespace versebias::retriever

#endif  // VERSEBIAS_RETRIEVER_TRAINER_H_
