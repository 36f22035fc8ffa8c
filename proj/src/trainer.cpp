#include "ddx/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "ddx/error.hpp"
#include "ddx/parallel.hpp"

namespace ddx {

void TrainConfig::validate() const {
  if (!(dropout_rate >= 0.0 && dropout_rate < 1.0)) throw Error("dropout rate must lie in [0, 1)");
  if (batch_size < 1) throw Error("batch size must be at least 1");
  if (epochs < 1) throw Error("epochs must be at least 1");
  if (!(learning_rate > 0.0)) throw Error("learning rate must be positive");
}

AdamState AdamState::fresh(const ModelParameters& p) {
  const auto dims = p.dims();
  return {ParameterBlocks::zeros(dims), ParameterBlocks::zeros(dims), 0};
}

double kl_loss(const Vector& target, const Vector& logprobs) {
  double loss = 0.0;
  for (Eigen::Index y = 0; y < target.size(); ++y) {
    const double p = target[y];
    if (p > 0.0) loss += p * (std::log(p) - logprobs[y]);
  }
  return loss;
}

namespace {

// Gradient of log_softmax(v) given the upstream gradient g: g - softmax(v) * sum(g).
Vector log_softmax_backward(const Vector& v, const Vector& g) {
  const Vector s = log_softmax(v).array().exp().matrix();
  return g - s * g.sum();
}

struct CaseGradient {
  ForwardTrace trace;
  Vector grad_logits;        // dLoss/dz
  Vector grad_demographic;   // dLoss/du
  Vector grad_pooled;        // dLoss/dh
  double loss = 0.0;
};

CaseGradient case_gradient(const ModelParameters& p, const TrainingExample& ex, double dropout_rate,
                           std::uint64_t mask_seed) {
  CaseGradient out;
  Rng rng(mask_seed);
  const auto mode = dropout_rate > 0.0 ? ForwardMode::train(dropout_rate, rng) : ForwardMode::infer();
  const Vector logp = forward(p, ex.input, mode, &out.trace);
  out.loss = kl_loss(ex.target, logp);

  // Recompute the two stream inputs; forward only keeps what is needed here.
  const auto& w = p.weights;
  const Vector z = w.projection.transpose() * out.trace.pooled + w.bias;
  Vector u = Vector::Zero(w.bias.size());
  std::vector<std::size_t> demo(ex.input.demo);
  std::sort(demo.begin(), demo.end());
  demo.erase(std::unique(demo.begin(), demo.end()), demo.end());
  for (const auto f : demo) u += w.demographic_embeddings.row(p.demographic_row[f]).transpose();

  // out = log_softmax(lf + ld); dLoss/dout = -target.
  const Vector q = logp.array().exp().matrix();
  const Vector grad_combined = q * ex.target.sum() - ex.target;
  out.grad_logits = log_softmax_backward(z, grad_combined);
  out.grad_demographic = log_softmax_backward(u, grad_combined);
  out.grad_pooled = w.projection * out.grad_logits;
  return out;
}

}  // namespace

BatchGradient backward(const ModelParameters& p, std::span<const TrainingExample> batch, double dropout_rate,
                       std::uint64_t mask_seed, std::size_t threads) {
  if (batch.empty()) throw Error("backward: empty batch");
  const auto B = batch.size();
  std::vector<CaseGradient> parts(B);
  parallel_for(B, threads, [&](std::size_t i) {
    parts[i] = case_gradient(p, batch[i], dropout_rate, derive_seed(mask_seed, i));
  });

  const auto dims = p.dims();
  BatchGradient out{ParameterBlocks::zeros(dims), 0.0};
  auto& g = out.grad;
  const double scale = 1.0 / static_cast<double>(B);
  const auto D = static_cast<Eigen::Index>(dims.embedding);
  const auto L = static_cast<Eigen::Index>(dims.diseases);

  Matrix pooled(static_cast<Eigen::Index>(B), D);
  Matrix logits_grad(static_cast<Eigen::Index>(B), L);
  for (std::size_t i = 0; i < B; ++i) {
    const auto& c = parts[i];
    const auto row = static_cast<Eigen::Index>(i);
    pooled.row(row) = c.trace.pooled.transpose();
    logits_grad.row(row) = c.grad_logits.transpose();
    out.mean_loss += c.loss;

    if (!c.trace.rows.empty()) {
      const double share = scale / static_cast<double>(c.trace.rows.size());
      for (std::size_t r = 0; r < c.trace.rows.size(); ++r) {
        auto target = g.finding_embeddings.row(static_cast<Eigen::Index>(c.trace.rows[r]));
        if (c.trace.mask.size() > 0) {
          target += share * c.grad_pooled.transpose().cwiseProduct(c.trace.mask.row(static_cast<Eigen::Index>(r)));
        } else {
          target += share * c.grad_pooled.transpose();
        }
      }
    }

    std::vector<std::size_t> demo(batch[i].input.demo);
    std::sort(demo.begin(), demo.end());
    demo.erase(std::unique(demo.begin(), demo.end()), demo.end());
    for (const auto f : demo) {
      g.demographic_embeddings.row(p.demographic_row[f]) += scale * c.grad_demographic.transpose();
    }
  }
  g.projection.noalias() = scale * (pooled.transpose() * logits_grad);
  g.bias = scale * logits_grad.colwise().sum().transpose();
  out.mean_loss *= scale;
  return out;
}

namespace {

template <typename M>
void adam_block(M& param, const M& grad, M& m, M& v, double lr, double b1, double b2, double eps, double c1,
                double c2) {
  m = b1 * m + (1.0 - b1) * grad;
  v = b2 * v + (1.0 - b2) * grad.cwiseProduct(grad);
  param.array() -= lr * (m.array() / c1) / ((v.array() / c2).sqrt() + eps);
}

}  // namespace

void adam_step(ModelParameters& p, const ParameterBlocks& g, AdamState& s, const TrainConfig& cfg) {
  if (!p.weights.same_shape(g) || !p.weights.same_shape(s.first_moment) || !p.weights.same_shape(s.second_moment)) {
    throw Error("adam_step: gradient or state shape mismatch");
  }
  ++s.step;
  const double t = static_cast<double>(s.step);
  const double c1 = 1.0 - std::pow(cfg.adam_beta1, t);
  const double c2 = 1.0 - std::pow(cfg.adam_beta2, t);
  const auto apply = [&](auto& param, const auto& grad, auto& m, auto& v) {
    adam_block(param, grad, m, v, cfg.learning_rate, cfg.adam_beta1, cfg.adam_beta2, cfg.adam_eps, c1, c2);
  };
  auto& w = p.weights;
  apply(w.finding_embeddings, g.finding_embeddings, s.first_moment.finding_embeddings,
        s.second_moment.finding_embeddings);
  apply(w.projection, g.projection, s.first_moment.projection, s.second_moment.projection);
  apply(w.bias, g.bias, s.first_moment.bias, s.second_moment.bias);
  apply(w.demographic_embeddings, g.demographic_embeddings, s.first_moment.demographic_embeddings,
        s.second_moment.demographic_embeddings);
}

std::vector<TrainingExample> make_examples(const Vocabulary& vocab, const CaseSet& cases) {
  std::vector<TrainingExample> out;
  out.reserve(cases.size());
  for (const auto& c : cases.cases) {
    try {
      out.push_back({encode_case(vocab, c).input, encode_target(vocab, c.ddx)});
    } catch (const Error& e) {
      throw Error("case '" + c.id + "': " + e.what());
    }
  }
  return out;
}

namespace {

void holdout_accuracy(const ModelParameters& p, const CaseSet& holdout, std::size_t threads, EpochStats& stats) {
  if (holdout.empty()) return;
  std::vector<std::size_t> rank(holdout.size(), 0);  // 0 = not within top 5
  parallel_for(holdout.size(), threads, [&](std::size_t i) {
    const auto& c = holdout.cases[i];
    if (c.ddx.entries.empty()) return;
    const auto& truth = c.ddx.entries.front().disease;
    const auto top = predict_topk(p, encode_case(p.vocab, c).input, 5);
    for (std::size_t r = 0; r < top.size(); ++r) {
      if (top[r].disease == truth) {
        rank[i] = r + 1;
        break;
      }
    }
  });
  const auto frac = [&](std::size_t k) {
    const auto hits = std::count_if(rank.begin(), rank.end(), [&](std::size_t r) { return r >= 1 && r <= k; });
    return static_cast<double>(hits) / static_cast<double>(rank.size());
  };
  stats.holdout_top1 = frac(1);
  stats.holdout_top3 = frac(3);
  stats.holdout_top5 = frac(5);
}

}  // namespace

TrainResult train(const ModelParameters& p0, const CaseSet& train_set, const TrainConfig& cfg,
                  const CaseSet* holdout, const std::function<void(const EpochStats&)>& on_epoch) {
  cfg.validate();
  if (train_set.empty()) throw Error("training set is empty");
  const auto examples = make_examples(p0.vocab, train_set);

  TrainResult result{p0, {}, 0};
  auto state = AdamState::fresh(p0);
  std::vector<std::size_t> order(examples.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<TrainingExample> batch;

  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    Rng shuffle_rng(derive_seed(cfg.seed, 1, epoch));
    shuffle_rng.shuffle(std::span(order));
    double loss_sum = 0.0;
    std::size_t batch_index = 0;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size, ++batch_index) {
      const auto end = std::min(order.size(), start + cfg.batch_size);
      batch.clear();
      for (std::size_t i = start; i < end; ++i) batch.push_back(examples[order[i]]);
      const auto g = backward(result.params, batch, cfg.dropout_rate, derive_seed(cfg.seed, 2, epoch, batch_index),
                              cfg.threads);
      adam_step(result.params, g.grad, state, cfg);
      loss_sum += g.mean_loss * static_cast<double>(batch.size());
    }
    EpochStats stats;
    stats.epoch = epoch;
    stats.mean_loss = loss_sum / static_cast<double>(examples.size());
    if (holdout) holdout_accuracy(result.params, *holdout, cfg.threads, stats);
    result.history.push_back(stats);
    if (on_epoch) on_epoch(stats);
  }
  result.optimizer_steps = state.step;
  return result;
}

}  // namespace ddx
