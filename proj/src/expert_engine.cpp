#include "ddx/expert_engine.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "ddx/error.hpp"

namespace ddx {

namespace {

std::vector<std::size_t> resolve(const KnowledgeBase& kb, const FindingSet& ids) {
  std::vector<std::size_t> out;
  out.reserve(ids.size());
  for (const auto& id : ids) out.push_back(kb.require_finding(id));
  return out;
}

void check_disjoint(const FindingSet& pos, const FindingSet& neg) {
  for (const auto& f : pos) {
    if (neg.count(f)) throw Error("finding '" + f + "' is both present and absent");
  }
}

}  // namespace

double score_disease(const KnowledgeBase& kb, std::size_t disease, std::span<const std::size_t> pos,
                     std::span<const std::size_t> neg) {
  double score = 0.0;
  for (const auto f : pos) {
    const double freq = kb.frequency(disease, f);
    if (freq == 0.0 && kb.finding(f).is_demographic()) return kExcluded;
    score += std::log(kExpertSmoothing + freq);
  }
  for (const auto f : neg) score += std::log(kExpertSmoothing + 1.0 - kb.frequency(disease, f));
  return score;
}

double score_disease(const KnowledgeBase& kb, std::string_view disease, const FindingSet& pos,
                     const FindingSet& neg) {
  check_disjoint(pos, neg);
  const auto d = kb.require_disease(disease);
  const auto p = resolve(kb, pos);
  const auto n = resolve(kb, neg);
  return score_disease(kb, d, p, n);
}

std::vector<double> softmax_normalize(std::span<const double> scores) {
  if (scores.empty()) throw Error("softmax_normalize: empty input");
  double top = kExcluded;
  for (const double s : scores) {
    if (std::isnan(s)) throw Error("softmax_normalize: NaN score");
    if (s != kExcluded) top = std::max(top, s);
  }
  if (top == kExcluded) throw Error("softmax_normalize: every score is excluded");
  std::vector<double> out(scores.size(), 0.0);
  double total = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (scores[i] == kExcluded) continue;
    out[i] = std::exp(scores[i] - top);
    total += out[i];
  }
  for (auto& p : out) p /= total;
  return out;
}

DifferentialDiagnosis expert_inference(const KnowledgeBase& kb, std::span<const std::size_t> pos,
                                       std::span<const std::size_t> neg, std::size_t k) {
  if (k == 0) throw Error("expert_inference: k must be positive");
  std::vector<std::pair<double, std::size_t>> scored;
  for (std::size_t d = 0; d < kb.diseases().size(); ++d) {
    const double s = score_disease(kb, d, pos, neg);
    if (s != kExcluded) scored.emplace_back(s, d);
  }
  if (scored.empty()) throw Error("expert_inference: every disease is excluded by the findings");

  const auto better = [&](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return kb.disease(a.second).id < kb.disease(b.second).id;
  };
  const auto keep = std::min(k, scored.size());
  std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(keep), scored.end(), better);
  scored.resize(keep);

  std::vector<double> raw(keep);
  for (std::size_t i = 0; i < keep; ++i) raw[i] = scored[i].first;
  const auto probs = softmax_normalize(raw);

  DifferentialDiagnosis ddx;
  for (std::size_t i = 0; i < keep; ++i) {
    if (probs[i] <= 0.0) continue;
    ddx.entries.push_back({kb.disease(scored[i].second).id, probs[i]});
    ddx.raw_scores.push_back(raw[i]);
  }
  return ddx;
}

DifferentialDiagnosis expert_inference(const KnowledgeBase& kb, const FindingSet& pos,
                                       const FindingSet& neg, std::size_t k) {
  check_disjoint(pos, neg);
  const auto p = resolve(kb, pos);
  const auto n = resolve(kb, neg);
  return expert_inference(kb, p, n, k);
}

}  // namespace ddx
