#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "ddx/clinical_case.hpp"
#include "ddx/knowledge_base.hpp"
#include "ddx/random.hpp"

namespace ddx {

struct SimConfig {
  std::size_t cases_total = 1000;
  std::size_t min_cases_per_disease = 50;
  std::uint64_t seed = 0;
  std::size_t ddx_top_k = kDefaultDdxTopK;
  double pos_threshold = 0.2;
  double neg_gate = 0.75;
  std::size_t max_findings_cap = 40;

  void validate() const;
};

// Optional record of what the elicitation walk looked at, for diagnostics.
struct SimTrace {
  std::size_t target_length = 0;       // L
  std::vector<std::string> visited;    // clinical findings visited, in order
};

// Drops every pool entry sharing a mutex group with any selected finding
// (the selected findings themselves included). Survivor order is kept.
std::vector<std::string> remove_mutex(const KnowledgeBase& kb, const std::vector<std::string>& pool,
                                      const FindingSet& selected);

// Diseases with at least one nonzero clinical finding, ascending id.
std::vector<std::string> simulable_diseases(const KnowledgeBase& kb);

ClinicalCase simulate_case(const KnowledgeBase& kb, std::string_view disease, Rng& rng,
                           const SimConfig& cfg, SimTrace* trace = nullptr);

// Case i draws from its own stream derive_seed(cfg.seed, i), so the output
// does not depend on `threads`.
std::vector<ClinicalCase> simulate_dataset(const KnowledgeBase& kb, const SimConfig& cfg,
                                           std::size_t threads = 1);

}  // namespace ddx
