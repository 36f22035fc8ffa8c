#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "ddx/clinical_case.hpp"
#include "ddx/dataset.hpp"
#include "ddx/knowledge_base.hpp"
#include "ddx/random.hpp"

namespace ddx {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

inline constexpr std::size_t kDefaultEmbeddingDim = 1024;
inline constexpr double kInitRange = 0.05;
// Demographic prior logit for diseases the knowledge base rules out.
inline constexpr double kImpossibleLogit = -30.0;

struct ModelDims {
  std::size_t findings = 0;      // K
  std::size_t diseases = 0;      // L
  std::size_t embedding = 0;     // D
  std::size_t demographics = 0;  // M
};

// The trainable tensors. Also used for gradients and optimizer moments.
//   finding_embeddings      [2K x D]  row 2i: finding i present, 2i+1: absent
//   projection              [D x L]
//   bias                    [L]
//   demographic_embeddings  [M x L]
struct ParameterBlocks {
  Matrix finding_embeddings;
  Matrix projection;
  Vector bias;
  Matrix demographic_embeddings;

  static ParameterBlocks zeros(const ModelDims& dims);
  std::size_t size() const;
  bool all_finite() const;
  bool same_shape(const ParameterBlocks& other) const;
};

struct ModelParameters {
  Vocabulary vocab;
  ParameterBlocks weights;
  // finding index -> row of demographic_embeddings, or -1 for clinical findings.
  std::vector<std::ptrdiff_t> demographic_row;

  ModelParameters() = default;
  ModelParameters(Vocabulary vocab, ParameterBlocks weights);

  ModelDims dims() const;
};

// Indices refer to ModelParameters::vocab findings. pos/neg rows are
// gathered from finding_embeddings; demo picks demographic_embeddings rows.
struct ModelInput {
  std::vector<std::size_t> pos_clinical;
  std::vector<std::size_t> neg_clinical;
  std::vector<std::size_t> demo;
};

struct EncodedCase {
  ModelInput input;
  std::vector<std::string> skipped;  // findings outside the vocabulary
};

// Present demographic findings go to `demo`; every other known finding to
// the present/absent streams. Unknown findings are skipped and reported.
EncodedCase encode_case(const Vocabulary& vocab, const ClinicalCase& c);
// Dense target over vocab diseases; throws if the ddx names an unknown disease.
Vector encode_target(const Vocabulary& vocab, const DifferentialDiagnosis& ddx);

ModelParameters init_parameters(const Vocabulary& vocab, std::size_t dim, std::uint64_t seed,
                                const KnowledgeBase* kb = nullptr);

struct ForwardMode {
  double dropout_rate = 0.0;
  Rng* rng = nullptr;  // required when dropout_rate > 0

  static ForwardMode infer() { return {}; }
  static ForwardMode train(double rate, Rng& rng) { return {rate, &rng}; }
};

// Intermediate values kept for backpropagation.
struct ForwardTrace {
  std::vector<std::size_t> rows;  // gathered finding_embeddings rows
  Matrix mask;                    // [rows x D], 0 or 1/(1-rate); empty when no dropout
  Vector pooled;                  // h
  Vector logprobs;                // final output
};

Vector forward(const ModelParameters& p, const ModelInput& x, const ForwardMode& mode = ForwardMode::infer(),
               ForwardTrace* trace = nullptr);

struct RankedDisease {
  std::string disease;
  double probability = 0.0;
};

// k is clamped to L.
std::vector<RankedDisease> predict_topk(const ModelParameters& p, const ModelInput& x, std::size_t k);

Vector log_softmax(const Vector& z);

// Versioned little-endian container, see checkpoint.cpp.
std::string serialize_checkpoint(const ModelParameters& p);
ModelParameters deserialize_checkpoint(std::string_view bytes);
void save_checkpoint(const ModelParameters& p, const std::string& path);
ModelParameters load_checkpoint(const std::string& path);

}  // namespace ddx
