#pragma once

#include <cstddef>
#include <limits>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ddx/knowledge_base.hpp"

namespace ddx {

using FindingSet = std::set<std::string>;

struct DdxEntry {
  std::string disease;
  double probability = 0.0;

  bool operator==(const DdxEntry&) const = default;
};

// Ranked differential: descending probability, ties by ascending disease id.
// `raw_scores` runs parallel to `entries`.
struct DifferentialDiagnosis {
  std::vector<DdxEntry> entries;
  std::vector<double> raw_scores;
};

inline constexpr double kExpertSmoothing = 1e-3;
inline constexpr double kExcluded = -std::numeric_limits<double>::infinity();
inline constexpr std::size_t kDefaultDdxTopK = 5;

// Smoothed naive-Bayes log likelihood:
//   sum_{f in pos} ln(eps + FREQ(d,f)) + sum_{f in neg} ln(eps + 1 - FREQ(d,f)).
// A present demographic finding with FREQ(d,f) = 0 returns kExcluded.
double score_disease(const KnowledgeBase& kb, std::string_view disease, const FindingSet& pos,
                     const FindingSet& neg);
double score_disease(const KnowledgeBase& kb, std::size_t disease, std::span<const std::size_t> pos,
                     std::span<const std::size_t> neg);

// Max-shifted softmax; kExcluded maps to 0.
std::vector<double> softmax_normalize(std::span<const double> scores);

// Scores every disease, keeps the top-k finite scores (ties by id) and
// renormalizes among the retained ones. Entries whose probability
// underflows to 0 are dropped.
DifferentialDiagnosis expert_inference(const KnowledgeBase& kb, const FindingSet& pos,
                                       const FindingSet& neg, std::size_t k = kDefaultDdxTopK);
DifferentialDiagnosis expert_inference(const KnowledgeBase& kb, std::span<const std::size_t> pos,
                                       std::span<const std::size_t> neg, std::size_t k = kDefaultDdxTopK);

}  // namespace ddx
