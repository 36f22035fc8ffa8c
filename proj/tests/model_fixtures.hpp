#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "ddx/model.hpp"
#include "ddx/random.hpp"
#include "ddx/trainer.hpp"

namespace ddx::testing {

// Findings f0..f{K-1}, the first M demographic (one mutex group), diseases d0..d{L-1}.
inline Vocabulary small_vocab(std::size_t K, std::size_t L, std::size_t M) {
  std::vector<std::string> fs, ds;
  std::set<std::string> demo;
  std::map<std::string, std::optional<std::string>> groups;
  // Zero padding keeps sorted order equal to index order.
  auto id = [](char p, std::size_t i) {
    std::string s = std::to_string(i);
    return std::string(1, p) + std::string(3 - s.size(), '0') + s;
  };
  for (std::size_t i = 0; i < K; ++i) {
    fs.push_back(id('f', i));
    if (i < M) {
      demo.insert(fs.back());
      groups[fs.back()] = "grp";
    } else {
      groups[fs.back()] = std::nullopt;
    }
  }
  for (std::size_t i = 0; i < L; ++i) ds.push_back(id('d', i));
  return Vocabulary(fs, ds, demo, groups);
}

// Random weights of a larger scale than the initializer so that the
// softmaxes are far from uniform.
inline ModelParameters random_model(Rng& rng, std::size_t K, std::size_t L, std::size_t D, std::size_t M,
                                    double scale = 1.0) {
  auto p = init_parameters(small_vocab(K, L, M), D, rng.uniform_int(0, 1u << 30));
  auto fill = [&](auto& m) {
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = scale * (2.0 * rng.uniform() - 1.0);
  };
  fill(p.weights.finding_embeddings);
  fill(p.weights.projection);
  fill(p.weights.bias);
  fill(p.weights.demographic_embeddings);
  return p;
}

inline Vector random_distribution(Rng& rng, std::size_t L, bool sparse = true) {
  Vector t(static_cast<Eigen::Index>(L));
  for (std::size_t i = 0; i < L; ++i) t[static_cast<Eigen::Index>(i)] = rng.uniform();
  if (sparse) t[static_cast<Eigen::Index>(rng.uniform_int(0, L - 1))] = 0.0;
  return t / t.sum();
}

// Clinical findings are split randomly into present / absent / unobserved;
// at most one demographic finding is present.
inline ModelInput random_input(Rng& rng, std::size_t K, std::size_t M) {
  ModelInput x;
  for (std::size_t f = M; f < K; ++f) {
    const auto r = rng.uniform_int(0, 2);
    if (r == 0) x.pos_clinical.push_back(f);
    if (r == 1) x.neg_clinical.push_back(f);
  }
  if (M > 0 && rng.uniform() < 0.8) x.demo.push_back(rng.uniform_int(0, M - 1));
  return x;
}

inline std::vector<TrainingExample> random_batch(Rng& rng, std::size_t n, std::size_t K, std::size_t L,
                                                 std::size_t M) {
  std::vector<TrainingExample> batch;
  for (std::size_t i = 0; i < n; ++i) batch.push_back({random_input(rng, K, M), random_distribution(rng, L)});
  return batch;
}

inline double max_abs_diff(const ParameterBlocks& a, const ParameterBlocks& b) {
  return std::max({(a.finding_embeddings - b.finding_embeddings).cwiseAbs().maxCoeff(),
                   (a.projection - b.projection).cwiseAbs().maxCoeff(), (a.bias - b.bias).cwiseAbs().maxCoeff(),
                   a.demographic_embeddings.size() == 0
                       ? 0.0
                       : (a.demographic_embeddings - b.demographic_embeddings).cwiseAbs().maxCoeff()});
}

}  // namespace ddx::testing
