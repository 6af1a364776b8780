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

#include "xkws/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fmt/format.h>
#include <limits>
#include <numeric>
#include <random>

#include "xkws/errors.hpp"
#include "xkws/parallel.hpp"
#include "xkws/simd/kernels.hpp"

namespace xkws {

void TrainConfig::validate() const {
  if (!(learning_rate > 0)) throw ValidationError("learning_rate must be > 0");
  if (batch_size < 1) throw ValidationError("batch_size must be >= 1");
  if (max_epochs < 1) throw ValidationError("max_epochs must be >= 1");
  if (patience < 1) throw ValidationError("patience must be >= 1");
  if (!(beta1 >= 0 && beta1 < 1) || !(beta2 >= 0 && beta2 < 1))
    throw ValidationError("Adam betas must lie in [0, 1)");
  if (!(epsilon > 0)) throw ValidationError("Adam epsilon must be > 0");
}

template <typename Real>
AdamState<Real> AdamState<Real>::zeros_like(const NetworkParams<Real>& params) {
  AdamState s;
  for (std::size_t i = 0; i < kNumLayers; ++i) {
    s.m_weight[i].assign(params.layers[i].weight.size(), Real(0));
    s.v_weight[i].assign(params.layers[i].weight.size(), Real(0));
    s.m_bias[i].assign(params.layers[i].bias.size(), Real(0));
    s.v_bias[i].assign(params.layers[i].bias.size(), Real(0));
  }
  return s;
}

template <typename Real>
void adam_step(NetworkParams<Real>& params, const Gradients<Real>& grads,
               AdamState<Real>& state, const TrainConfig& config) {
  if (!grads.same_shape(params))
    throw DimensionError("gradients do not match the parameters");
  for (std::size_t i = 0; i < kNumLayers; ++i) {
    if (state.m_weight[i].size() != params.layers[i].weight.size() ||
        state.m_bias[i].size() != params.layers[i].bias.size())
      throw DimensionError("Adam state does not match the parameters");
    const auto finite = [](const std::vector<Real>& v) {
      return std::all_of(v.begin(), v.end(),
                         [](Real x) { return std::isfinite(x); });
    };
    if (!finite(grads.layers[i].weight) || !finite(grads.layers[i].bias))
      throw ValidationError("non-finite gradient in layer " +
                            std::string(kLayerNames[i]));
  }

  ++state.step;
  const auto t = static_cast<double>(state.step);
  simd::AdamUpdate<Real> u;
  u.learning_rate = static_cast<Real>(config.learning_rate);
  u.beta1 = static_cast<Real>(config.beta1);
  u.beta2 = static_cast<Real>(config.beta2);
  u.epsilon = static_cast<Real>(config.epsilon);
  u.bias_correction1 = static_cast<Real>(1.0 - std::pow(config.beta1, t));
  u.bias_correction2 = static_cast<Real>(1.0 - std::pow(config.beta2, t));
  const auto& k = simd::active_kernels<Real>();
  for (std::size_t i = 0; i < kNumLayers; ++i) {
    u.n = params.layers[i].weight.size();
    u.param = params.layers[i].weight.data();
    u.grad = grads.layers[i].weight.data();
    u.m = state.m_weight[i].data();
    u.v = state.v_weight[i].data();
    k.adam(u);
    u.n = params.layers[i].bias.size();
    u.param = params.layers[i].bias.data();
    u.grad = grads.layers[i].bias.data();
    u.m = state.m_bias[i].data();
    u.v = state.v_bias[i].data();
    k.adam(u);
  }
  ++params.revision;
}

std::vector<Example> assemble_examples(
    std::span<const std::string> ids,
    const std::function<Matrix<float>(const std::string&)>& frames,
    const TargetMap& targets) {
  std::vector<Example> out;
  out.reserve(ids.size());
  for (const auto& id : ids) {
    auto it = targets.find(id);
    if (it == targets.end())
      throw ValidationError("no training target for utterance '" + id + "'");
    out.push_back({id, frames(id), it->second.values});
  }
  return out;
}

std::string TrainHistory::to_csv() const {
  std::string out = "epoch,train_loss,dev_loss,seconds\n";
  for (const auto& e : epochs)
    out += fmt::format("{},{:.6f},{:.6f},{:.3f}\n", e.epoch, e.train_loss,
                       e.dev_loss, e.seconds);
  return out;
}

namespace {

std::size_t resolve_threads(std::size_t requested) {
  return requested == 0 ? default_thread_count() : requested;
}

void check_example(const Example& ex, std::size_t output_dim) {
  if (ex.target.size() != output_dim)
    throw DimensionError("target for '" + ex.id + "' has " +
                         std::to_string(ex.target.size()) +
                         " entries, expected " + std::to_string(output_dim));
}

void zero(Gradients<float>& g) {
  for (auto& l : g.layers) {
    std::fill(l.weight.begin(), l.weight.end(), 0.0f);
    std::fill(l.bias.begin(), l.bias.end(), 0.0f);
  }
}

void accumulate(Gradients<float>& into, const Gradients<float>& from) {
  const auto& k = simd::active_kernels<float>();
  for (std::size_t i = 0; i < kNumLayers; ++i) {
    k.axpy(1.0f, from.layers[i].weight.data(), into.layers[i].weight.data(),
           into.layers[i].weight.size());
    k.axpy(1.0f, from.layers[i].bias.data(), into.layers[i].bias.data(),
           into.layers[i].bias.size());
  }
}

}  // namespace

double mean_loss(const NetworkParams<float>& params,
                 std::span<const Example> examples, std::size_t threads) {
  if (examples.empty()) return 0.0;
  std::vector<double> losses(examples.size());
  parallel_for(examples.size(), resolve_threads(threads), [&](std::size_t i) {
    const auto trace = forward(params, examples[i].frames);
    losses[i] = summed_cross_entropy<float>(trace.scores, examples[i].target);
  });
  return std::accumulate(losses.begin(), losses.end(), 0.0) /
         static_cast<double>(examples.size());
}

TrainResult train(std::span<const Example> train_set,
                  std::span<const Example> dev_set, const TrainConfig& config,
                  const Architecture& arch, std::size_t output_dim,
                  std::uint64_t init_seed, const EpochCallback& on_epoch) {
  config.validate();
  if (train_set.empty()) throw ValidationError("empty train split");
  if (dev_set.empty())
    throw ValidationError("empty dev split; early stopping needs dev data");
  for (const auto& ex : train_set) check_example(ex, output_dim);
  for (const auto& ex : dev_set) check_example(ex, output_dim);

  const std::size_t threads = resolve_threads(config.threads);
  NetworkParams<float> params = init_params<float>(arch, output_dim, init_seed);
  AdamState<float> adam = AdamState<float>::zeros_like(params);
  std::mt19937_64 shuffle_rng(config.seed);

  std::vector<std::size_t> order(train_set.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  const std::size_t slots = std::min(config.batch_size, train_set.size());
  std::vector<Gradients<float>> member_grads(slots, zero_gradients(params));
  Gradients<float> batch_grad = zero_gradients(params);
  std::vector<double> member_loss(slots);

  TrainResult result{params, {}};
  double best_loss = std::numeric_limits<double>::infinity();
  std::size_t since_best = 0;

  for (std::size_t epoch = 1; epoch <= config.max_epochs; ++epoch) {
    const auto start = std::chrono::steady_clock::now();
    if (config.shuffle) std::shuffle(order.begin(), order.end(), shuffle_rng);

    double loss_sum = 0.0;
    for (std::size_t b = 0; b < order.size(); b += config.batch_size) {
      const std::size_t members = std::min(config.batch_size, order.size() - b);
      const float scale = 1.0f / static_cast<float>(members);
      parallel_for(members, threads, [&](std::size_t i) {
        const Example& ex = train_set[order[b + i]];
        zero(member_grads[i]);
        const auto trace = forward(params, ex.frames);
        member_loss[i] = summed_cross_entropy<float>(trace.scores, ex.target);
        backward<float>(params, trace, ex.target, scale, member_grads[i]);
      });
      zero(batch_grad);
      for (std::size_t i = 0; i < members; ++i) {
        accumulate(batch_grad, member_grads[i]);
        loss_sum += member_loss[i];
      }
      adam_step(params, batch_grad, adam, config);
    }

    EpochRecord rec;
    rec.epoch = epoch;
    rec.train_loss = loss_sum / static_cast<double>(train_set.size());
    rec.dev_loss = mean_loss(params, dev_set, threads);
    rec.seconds = std::chrono::duration<double>(
                      std::chrono::steady_clock::now() - start)
                      .count();
    if (!std::isfinite(rec.dev_loss))
      throw ValidationError("dev loss became non-finite at epoch " +
                            std::to_string(epoch));
    const bool improved = rec.dev_loss < best_loss;
    if (improved) {
      best_loss = rec.dev_loss;
      result.params = params;
      result.history.best_epoch = epoch;
      since_best = 0;
    } else {
      ++since_best;
    }
    result.history.epochs.push_back(rec);
    if (on_epoch) on_epoch(rec, improved, params);
    if (!improved && since_best >= config.patience)
      break;
  }
  return result;
}

template struct AdamState<float>;
template struct AdamState<double>;
template void adam_step<float>(NetworkParams<float>&, const Gradients<float>&,
                               AdamState<float>&, const TrainConfig&);
template void adam_step<double>(NetworkParams<double>&,
                                const Gradients<double>&, AdamState<double>&,
                                const TrainConfig&);

}  // namespace xkws
