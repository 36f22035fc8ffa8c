#include <doctest.h>

#include <cmath>

#include "ddx/error.hpp"
#include "ddx/trainer.hpp"
#include "model_fixtures.hpp"
#include "oracles.hpp"

using namespace ddx;
using testing::random_batch;
using testing::random_model;

namespace {

Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (const double x : v) out[i++] = x;
  return out;
}

ClinicalCase labelled(std::string id, FindingSet pos, FindingSet neg, std::string disease) {
  ClinicalCase c;
  c.id = std::move(id);
  c.pos = std::move(pos);
  c.neg = std::move(neg);
  c.ddx = normalize_ddx({{std::move(disease), 1.0}});
  return c;
}

// Four diseases, each owning one finding; other findings observed absent.
CaseSet separable_cases(std::size_t per_disease) {
  CaseSet cs;
  for (std::size_t d = 0; d < 4; ++d) {
    for (std::size_t i = 0; i < per_disease; ++i) {
      FindingSet neg;
      for (std::size_t o = 0; o < 4; ++o) {
        if (o != d) neg.insert("f" + std::to_string(o));
      }
      cs.cases.push_back(labelled("c" + std::to_string(d) + "_" + std::to_string(i), {"f" + std::to_string(d)}, neg,
                                  "d" + std::to_string(d)));
    }
  }
  return cs;
}

}  // namespace

TEST_CASE("kl_loss") {
  CHECK(kl_loss(vec({1.0, 0.0}), vec({std::log(0.5), std::log(0.5)})) == doctest::Approx(0.693147).epsilon(1e-6));
  CHECK(kl_loss(vec({0.5, 0.5}), vec({std::log(0.75), std::log(0.25)})) == doctest::Approx(0.143841).epsilon(1e-6));
  const Vector q = vec({0.2, 0.3, 0.5});
  CHECK(std::abs(kl_loss(q, q.array().log().matrix())) < 1e-12);
  // Zero-probability targets contribute nothing even against -inf.
  CHECK(kl_loss(vec({1.0, 0.0}), vec({0.0, -std::numeric_limits<double>::infinity()})) == 0.0);

  Rng rng(31);
  for (int t = 0; t < 1000; ++t) {
    const auto L = 2 + rng.uniform_int(0, 6);
    const auto p = testing::random_distribution(rng, L);
    const auto q = testing::random_distribution(rng, L, false);
    const Vector logq = q.array().log().matrix();
    const double kl = kl_loss(p, logq);
    CHECK(kl >= 0.0);
    CHECK(kl == doctest::Approx(testing::oracle_kl(p, std::vector<double>(logq.data(), logq.data() + logq.size())))
                    .epsilon(1e-12));
  }
}

TEST_CASE("gradient vanishes at the optimum") {
  Rng rng(32);
  for (int t = 0; t < 50; ++t) {
    const auto p = random_model(rng, 6, 4, 5, 2, 2.0);
    const auto x = testing::random_input(rng, 6, 2);
    std::vector<TrainingExample> batch{{x, forward(p, x).array().exp().matrix()}};
    const auto g = backward(p, batch).grad;
    CHECK(testing::max_abs_diff(g, ParameterBlocks::zeros(p.dims())) < 1e-10);
  }
}

TEST_CASE("gradient matches finite differences") {
  Rng rng(33);
  SUBCASE("dropout off") {
    for (int t = 0; t < 100; ++t) {
      const auto K = 2 + rng.uniform_int(0, 4);
      const auto M = rng.uniform_int(0, 1);
      const auto L = 2 + rng.uniform_int(0, 2);
      const auto D = 1 + rng.uniform_int(0, 7);
      const auto p = random_model(rng, K, L, D, M);
      const auto batch = random_batch(rng, 1, K, L, M);
      const auto analytic = backward(p, batch).grad;
      const auto numeric = testing::numerical_gradient(p, batch, 0.0, 0, 1e-4);
      CHECK(testing::max_relative_error(analytic, numeric, 1e-8) < 1e-4);
    }
  }
  SUBCASE("fixed dropout masks, several cases") {
    for (int t = 0; t < 30; ++t) {
      const auto p = random_model(rng, 6, 4, 6, 2);
      const auto batch = random_batch(rng, 3, 6, 4, 2);
      const auto analytic = backward(p, batch, 0.7, 99).grad;
      const auto numeric = testing::numerical_gradient(p, batch, 0.7, 99, 1e-4);
      CHECK(testing::max_relative_error(analytic, numeric, 1e-8) < 1e-4);
    }
  }
}

TEST_CASE("duplicated cases give the single-case gradient") {
  Rng rng(34);
  const auto p = random_model(rng, 6, 4, 5, 2);
  const auto one = random_batch(rng, 1, 6, 4, 2);
  const std::vector<TrainingExample> two{one[0], one[0]};
  const auto g1 = backward(p, one);
  const auto g2 = backward(p, two);
  CHECK(testing::max_abs_diff(g1.grad, g2.grad) < 1e-15);
  CHECK(g1.mean_loss == doctest::Approx(g2.mean_loss).epsilon(1e-15));
  CHECK_THROWS_AS(backward(p, {}), Error);
}

TEST_CASE("backward is independent of the thread count") {
  Rng rng(35);
  const auto p = random_model(rng, 8, 4, 6, 2);
  const auto batch = random_batch(rng, 40, 8, 4, 2);
  const auto a = backward(p, batch, 0.7, 5, 1);
  const auto b = backward(p, batch, 0.7, 5, 4);
  CHECK(testing::max_abs_diff(a.grad, b.grad) == 0.0);
  CHECK(a.mean_loss == b.mean_loss);
}

TEST_CASE("adam_step") {
  ModelParameters p(testing::small_vocab(1, 1, 0), ParameterBlocks::zeros({1, 1, 1, 0}));
  TrainConfig cfg;
  auto s = AdamState::fresh(p);

  adam_step(p, ParameterBlocks::zeros(p.dims()), s, cfg);
  CHECK(testing::max_abs_diff(p.weights, ParameterBlocks::zeros(p.dims())) == 0.0);
  CHECK(s.step == 1);

  s = AdamState::fresh(p);
  auto ones = ParameterBlocks::zeros(p.dims());
  ones.finding_embeddings.setOnes();
  ones.projection.setOnes();
  ones.bias.setOnes();
  adam_step(p, ones, s, cfg);
  CHECK(p.weights.bias[0] == doctest::Approx(-0.01 / (1.0 + 1e-8)).epsilon(1e-12));
  CHECK(p.weights.projection(0, 0) == doctest::Approx(-0.01).epsilon(1e-6));
  const double after_one = p.weights.bias[0];
  adam_step(p, ones, s, cfg);
  CHECK(p.weights.bias[0] < after_one);
  CHECK(s.step == 2);

  auto bad = ParameterBlocks::zeros({2, 1, 1, 0});
  CHECK_THROWS_AS(adam_step(p, bad, s, cfg), Error);
}

TEST_CASE("config validation") {
  TrainConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  cfg.dropout_rate = 1.0;
  CHECK_THROWS_AS(cfg.validate(), Error);
  cfg = {};
  cfg.batch_size = 0;
  CHECK_THROWS_AS(cfg.validate(), Error);
  cfg = {};
  cfg.epochs = 0;
  CHECK_THROWS_AS(cfg.validate(), Error);
}

TEST_CASE("a single case is memorized") {
  CaseSet cs;
  auto c = labelled("only", {"f0", "f2"}, {"f1"}, "d0");
  c.ddx = normalize_ddx({{"d0", 0.7}, {"d1", 0.2}, {"d2", 0.1}});
  cs.cases.push_back(c);
  const auto vocab = build_vocabulary({cs});
  TrainConfig cfg;
  cfg.epochs = 200;
  cfg.dropout_rate = 0.0;
  const auto result = train(init_parameters(vocab, 16, 1), cs, cfg);
  CHECK(result.history.back().mean_loss < 1e-3);
  CHECK(result.optimizer_steps == 200);
  const auto ex = make_examples(vocab, cs);
  CHECK(kl_loss(ex[0].target, forward(result.params, ex[0].input)) < 1e-3);
}

TEST_CASE("optimizer step accounting") {
  const auto cs = separable_cases(5);
  const auto vocab = build_vocabulary({cs});
  TrainConfig cfg;
  cfg.epochs = 1;
  cfg.batch_size = 100;
  CHECK(train(init_parameters(vocab, 4, 1), cs, cfg).optimizer_steps == 1);
  cfg.epochs = 3;
  cfg.batch_size = 6;  // 20 cases: 6 + 6 + 6 + 2
  CHECK(train(init_parameters(vocab, 4, 1), cs, cfg).optimizer_steps == 12);
}

TEST_CASE("loss does not increase on a separable problem") {
  const auto cs = separable_cases(10);
  const auto vocab = build_vocabulary({cs});
  TrainConfig cfg;
  cfg.epochs = 30;
  cfg.dropout_rate = 0.0;
  cfg.batch_size = cs.size();
  std::vector<double> seen;
  const auto result = train(init_parameters(vocab, 8, 2), cs, cfg, &cs,
                            [&](const EpochStats& s) { seen.push_back(s.mean_loss); });
  REQUIRE(result.history.size() == 30);
  for (std::size_t i = 1; i < result.history.size(); ++i) {
    CHECK(result.history[i].mean_loss <= result.history[i - 1].mean_loss + 1e-6);
    CHECK(seen[i] == result.history[i].mean_loss);
  }
  CHECK(result.history.back().holdout_top1.value() == 1.0);
  CHECK(result.history.back().holdout_top5.value() == 1.0);
}

TEST_CASE("training is deterministic") {
  const auto cs = separable_cases(12);
  const auto vocab = build_vocabulary({cs});
  TrainConfig cfg;
  cfg.epochs = 3;
  cfg.batch_size = 7;
  const auto p0 = init_parameters(vocab, 8, 3);
  const auto a = serialize_checkpoint(train(p0, cs, cfg).params);
  cfg.threads = 4;
  CHECK(serialize_checkpoint(train(p0, cs, cfg).params) == a);
  cfg.seed = 1;
  CHECK(serialize_checkpoint(train(p0, cs, cfg).params) != a);
}

TEST_CASE("unknown target disease is rejected") {
  auto cs = separable_cases(1);
  const auto vocab = build_vocabulary({cs});
  cs.cases.push_back(labelled("x", {"f0"}, {}, "measles"));
  CHECK_THROWS_AS(train(init_parameters(vocab, 4, 1), cs, TrainConfig{}), Error);
  CHECK_THROWS_AS(train(init_parameters(vocab, 4, 1), CaseSet{}, TrainConfig{}), Error);
}
