#include "ddx/model.hpp"

#include <algorithm>
#include <cmath>

#include "ddx/error.hpp"

namespace ddx {

ParameterBlocks ParameterBlocks::zeros(const ModelDims& dims) {
  const auto K = static_cast<Eigen::Index>(dims.findings);
  const auto L = static_cast<Eigen::Index>(dims.diseases);
  const auto D = static_cast<Eigen::Index>(dims.embedding);
  const auto M = static_cast<Eigen::Index>(dims.demographics);
  return {Matrix::Zero(2 * K, D), Matrix::Zero(D, L), Vector::Zero(L), Matrix::Zero(M, L)};
}

std::size_t ParameterBlocks::size() const {
  return static_cast<std::size_t>(finding_embeddings.size() + projection.size() + bias.size() +
                                  demographic_embeddings.size());
}

bool ParameterBlocks::all_finite() const {
  return finding_embeddings.allFinite() && projection.allFinite() && bias.allFinite() &&
         demographic_embeddings.allFinite();
}

bool ParameterBlocks::same_shape(const ParameterBlocks& o) const {
  const auto same = [](const auto& a, const auto& b) { return a.rows() == b.rows() && a.cols() == b.cols(); };
  return same(finding_embeddings, o.finding_embeddings) && same(projection, o.projection) &&
         same(bias, o.bias) && same(demographic_embeddings, o.demographic_embeddings);
}

ModelParameters::ModelParameters(Vocabulary v, ParameterBlocks w) : vocab(std::move(v)), weights(std::move(w)) {
  demographic_row.assign(vocab.finding_count(), -1);
  std::ptrdiff_t next = 0;
  for (std::size_t i = 0; i < vocab.finding_count(); ++i) {
    if (vocab.is_demographic(vocab.findings()[i])) demographic_row[i] = next++;
  }
  const auto d = dims();
  if (weights.finding_embeddings.rows() != static_cast<Eigen::Index>(2 * d.findings) ||
      weights.projection.cols() != static_cast<Eigen::Index>(d.diseases) ||
      weights.projection.rows() != weights.finding_embeddings.cols() ||
      weights.bias.size() != static_cast<Eigen::Index>(d.diseases) ||
      weights.demographic_embeddings.rows() != next ||
      weights.demographic_embeddings.cols() != static_cast<Eigen::Index>(d.diseases)) {
    throw Error("model parameter shapes do not match the vocabulary");
  }
}

ModelDims ModelParameters::dims() const {
  return {vocab.finding_count(), vocab.disease_count(), static_cast<std::size_t>(weights.projection.rows()),
          vocab.demographic_ids().size()};
}

EncodedCase encode_case(const Vocabulary& vocab, const ClinicalCase& c) {
  EncodedCase out;
  for (const auto& f : c.pos) {
    const auto i = vocab.finding_index(f);
    if (!i) out.skipped.push_back(f);
    else if (vocab.is_demographic(f)) out.input.demo.push_back(*i);
    else out.input.pos_clinical.push_back(*i);
  }
  for (const auto& f : c.neg) {
    const auto i = vocab.finding_index(f);
    if (!i) out.skipped.push_back(f);
    else out.input.neg_clinical.push_back(*i);
  }
  return out;
}

Vector encode_target(const Vocabulary& vocab, const DifferentialDiagnosis& ddx) {
  Vector t = Vector::Zero(static_cast<Eigen::Index>(vocab.disease_count()));
  for (const auto& e : ddx.entries) {
    const auto i = vocab.disease_index(e.disease);
    if (!i) throw Error("disease '" + e.disease + "' is not in the model vocabulary");
    t[static_cast<Eigen::Index>(*i)] += e.probability;
  }
  return t;
}

ModelParameters init_parameters(const Vocabulary& vocab, std::size_t dim, std::uint64_t seed,
                                const KnowledgeBase* kb) {
  if (dim < 1) throw Error("embedding dimension must be at least 1");
  ModelDims dims{vocab.finding_count(), vocab.disease_count(), dim, vocab.demographic_ids().size()};
  auto w = ParameterBlocks::zeros(dims);
  Rng rng(derive_seed(seed));
  const auto draw = [&] { return -kInitRange + 2.0 * kInitRange * rng.uniform(); };
  for (Eigen::Index i = 0; i < w.finding_embeddings.size(); ++i) w.finding_embeddings.data()[i] = draw();
  for (Eigen::Index i = 0; i < w.projection.size(); ++i) w.projection.data()[i] = draw();
  for (Eigen::Index i = 0; i < w.bias.size(); ++i) w.bias[i] = draw();

  ModelParameters p(vocab, std::move(w));
  if (kb) {
    for (std::size_t f = 0; f < vocab.finding_count(); ++f) {
      const auto row = p.demographic_row[f];
      if (row < 0) continue;
      const auto kf = kb->finding_index(vocab.findings()[f]);
      if (!kf) continue;
      for (std::size_t d = 0; d < vocab.disease_count(); ++d) {
        const auto kd = kb->disease_index(vocab.diseases()[d]);
        if (kd && kb->frequency(*kd, *kf) == 0.0) {
          p.weights.demographic_embeddings(row, static_cast<Eigen::Index>(d)) = kImpossibleLogit;
        }
      }
    }
  }
  return p;
}

Vector log_softmax(const Vector& z) {
  const double top = z.maxCoeff();
  const double lse = top + std::log((z.array() - top).exp().sum());
  return (z.array() - lse).matrix();
}

namespace {

std::vector<std::size_t> gather_rows(const ModelParameters& p, const ModelInput& x) {
  const auto K = p.vocab.finding_count();
  std::vector<std::size_t> rows;
  rows.reserve(x.pos_clinical.size() + x.neg_clinical.size());
  for (const auto i : x.pos_clinical) {
    if (i >= K) throw Error("finding index out of range");
    rows.push_back(2 * i);
  }
  for (const auto i : x.neg_clinical) {
    if (i >= K) throw Error("finding index out of range");
    rows.push_back(2 * i + 1);
  }
  std::sort(rows.begin(), rows.end());
  rows.erase(std::unique(rows.begin(), rows.end()), rows.end());
  for (std::size_t r = 1; r < rows.size(); ++r) {
    if (rows[r] / 2 == rows[r - 1] / 2) throw Error("finding is both present and absent in model input");
  }
  return rows;
}

}  // namespace

Vector forward(const ModelParameters& p, const ModelInput& x, const ForwardMode& mode, ForwardTrace* trace) {
  const auto& w = p.weights;
  const auto D = w.projection.rows();
  const auto rows = gather_rows(p, x);
  const bool dropout = mode.dropout_rate > 0.0;
  if (dropout && !mode.rng) throw Error("dropout requires a random stream");
  if (!(mode.dropout_rate >= 0.0 && mode.dropout_rate < 1.0)) throw Error("dropout rate must lie in [0, 1)");

  Vector h = Vector::Zero(D);
  Matrix mask;
  if (!rows.empty()) {
    if (dropout) {
      const double keep_scale = 1.0 / (1.0 - mode.dropout_rate);
      mask.resize(static_cast<Eigen::Index>(rows.size()), D);
      for (std::size_t r = 0; r < rows.size(); ++r) {
        for (Eigen::Index j = 0; j < D; ++j) {
          mask(static_cast<Eigen::Index>(r), j) = mode.rng->uniform() < mode.dropout_rate ? 0.0 : keep_scale;
        }
        h += w.finding_embeddings.row(static_cast<Eigen::Index>(rows[r])).transpose().cwiseProduct(
            mask.row(static_cast<Eigen::Index>(r)).transpose());
      }
    } else {
      for (const auto r : rows) h += w.finding_embeddings.row(static_cast<Eigen::Index>(r)).transpose();
    }
    h /= static_cast<double>(rows.size());
  }

  const Vector z = w.projection.transpose() * h + w.bias;
  const Vector lf = log_softmax(z);

  Vector u = Vector::Zero(w.bias.size());
  std::vector<std::size_t> demo(x.demo);
  std::sort(demo.begin(), demo.end());
  demo.erase(std::unique(demo.begin(), demo.end()), demo.end());
  for (const auto f : demo) {
    if (f >= p.demographic_row.size() || p.demographic_row[f] < 0) {
      throw Error("demographic input index does not name a demographic finding");
    }
    u += w.demographic_embeddings.row(p.demographic_row[f]).transpose();
  }
  const Vector ld = log_softmax(u);
  Vector out = log_softmax(lf + ld);

  if (trace) {
    trace->rows = rows;
    trace->mask = std::move(mask);
    trace->pooled = h;
    trace->logprobs = out;
  }
  return out;
}

std::vector<RankedDisease> predict_topk(const ModelParameters& p, const ModelInput& x, std::size_t k) {
  if (k < 1) throw Error("predict_topk: k must be at least 1");
  const Vector logp = forward(p, x);
  const auto L = static_cast<std::size_t>(logp.size());
  k = std::min(k, L);
  std::vector<std::size_t> order(L);
  for (std::size_t i = 0; i < L; ++i) order[i] = i;
  // Vocabulary diseases are id-sorted, so index order is the id tie-break.
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k), order.end(),
                    [&](std::size_t a, std::size_t b) {
                      const auto la = logp[static_cast<Eigen::Index>(a)];
                      const auto lb = logp[static_cast<Eigen::Index>(b)];
                      return la != lb ? la > lb : a < b;
                    });
  std::vector<RankedDisease> out;
  out.reserve(k);
  for (std::size_t i = 0; i < k; ++i) {
    out.push_back({p.vocab.diseases()[order[i]], std::exp(logp[static_cast<Eigen::Index>(order[i])])});
  }
  return out;
}

}  // namespace ddx
