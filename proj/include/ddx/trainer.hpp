#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "ddx/dataset.hpp"
#include "ddx/model.hpp"

namespace ddx {

struct TrainConfig {
  double learning_rate = 0.01;
  std::size_t batch_size = 512;
  std::size_t epochs = 15;
  double dropout_rate = 0.7;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  std::uint64_t seed = 0;
  // Per-case work inside a batch; results do not depend on this.
  std::size_t threads = 1;

  void validate() const;
};

struct AdamState {
  ParameterBlocks first_moment;
  ParameterBlocks second_moment;
  std::uint64_t step = 0;

  static AdamState fresh(const ModelParameters& p);
};

struct TrainingExample {
  ModelInput input;
  Vector target;  // distribution over vocab diseases
};

// KL(target || model) = sum_{y: p(y) > 0} p(y) (ln p(y) - logprobs[y]).
double kl_loss(const Vector& target, const Vector& logprobs);

struct BatchGradient {
  ParameterBlocks grad;  // mean over the batch
  double mean_loss = 0.0;
};

// Analytic gradient of the mean KL loss. With dropout_rate > 0 case i of
// the batch draws its mask from derive_seed(mask_seed, i).
BatchGradient backward(const ModelParameters& p, std::span<const TrainingExample> batch,
                       double dropout_rate = 0.0, std::uint64_t mask_seed = 0, std::size_t threads = 1);

// One bias-corrected ADAM update; increments s.step.
void adam_step(ModelParameters& p, const ParameterBlocks& g, AdamState& s, const TrainConfig& cfg);

struct EpochStats {
  std::size_t epoch = 0;  // 1-based
  double mean_loss = 0.0;
  std::optional<double> holdout_top1;
  std::optional<double> holdout_top3;
  std::optional<double> holdout_top5;
};

struct TrainResult {
  ModelParameters params;
  std::vector<EpochStats> history;
  std::uint64_t optimizer_steps = 0;
};

// Encodes every case against p.vocab; throws if a ddx names a disease
// outside the vocabulary. Unknown findings are dropped.
std::vector<TrainingExample> make_examples(const Vocabulary& vocab, const CaseSet& cases);

TrainResult train(const ModelParameters& p0, const CaseSet& train_set, const TrainConfig& cfg,
                  const CaseSet* holdout = nullptr,
                  const std::function<void(const EpochStats&)>& on_epoch = {});

}  // namespace ddx
