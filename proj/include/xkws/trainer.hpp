// Copyright 2026 The xkws Authors
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

#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "xkws/network.hpp"
#include "xkws/targets.hpp"

namespace xkws {

struct TrainConfig {
  double learning_rate = 1e-4;
  std::size_t batch_size = 8;
  std::size_t max_epochs = 25;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  // Stop once dev loss has failed to improve for this many epochs in a row
  // (at least one).
  std::size_t patience = 5;
  std::uint64_t seed = 0;  // shuffling stream
  bool shuffle = true;
  std::size_t threads = 0;  // 0: one per hardware thread

  void validate() const;
};

template <typename Real>
struct AdamState {
  std::array<std::vector<Real>, kNumLayers> m_weight, v_weight, m_bias, v_bias;
  std::uint64_t step = 0;

  static AdamState zeros_like(const NetworkParams<Real>& params);
};

// One bias-corrected Adam update. Throws before touching anything when a
// gradient entry is non-finite, naming the offending layer.
template <typename Real>
void adam_step(NetworkParams<Real>& params, const Gradients<Real>& grads,
               AdamState<Real>& state, const TrainConfig& config);

struct Example {
  std::string id;
  Matrix<float> frames;  // standardised and length-normalised
  std::vector<float> target;
};

// Pairs frames with targets; throws ValidationError naming the first id
// without a target.
std::vector<Example> assemble_examples(
    std::span<const std::string> ids,
    const std::function<Matrix<float>(const std::string&)>& frames,
    const TargetMap& targets);

struct EpochRecord {
  std::size_t epoch = 0;  // 1-based
  double train_loss = 0;
  double dev_loss = 0;
  double seconds = 0;
};

struct TrainHistory {
  std::vector<EpochRecord> epochs;
  std::size_t best_epoch = 0;  // 1-based; earliest minimum of dev loss

  // epoch,train_loss,dev_loss,seconds
  std::string to_csv() const;
};

struct TrainResult {
  NetworkParams<float> params;  // from the best dev-loss epoch
  TrainHistory history;
};

// Called after every epoch; `params` are the current (not best) weights.
using EpochCallback = std::function<void(
    const EpochRecord&, bool improved, const NetworkParams<float>& params)>;

// Mean per-utterance summed cross-entropy.
double mean_loss(const NetworkParams<float>& params,
                 std::span<const Example> examples, std::size_t threads);

// Mini-batch Adam with early stopping on dev loss. Batch gradients are the
// mean over members, reduced in batch order, so results do not depend on
// the thread count.
TrainResult train(std::span<const Example> train_set,
                  std::span<const Example> dev_set, const TrainConfig& config,
                  const Architecture& arch, std::size_t output_dim,
                  std::uint64_t init_seed, const EpochCallback& on_epoch = {});

}  // namespace xkws
