#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ddx/clinical_case.hpp"
#include "ddx/dataset.hpp"
#include "ddx/knowledge_base.hpp"
#include "ddx/model.hpp"

namespace ddx {

enum class TruthMode { argmax, seed_disease };

std::string_view to_string(TruthMode mode);
TruthMode parse_truth_mode(std::string_view text);

// Argmax of the ddx, ties by ascending disease id.
std::string truth_label(const ClinicalCase& c);
std::string truth_for(const ClinicalCase& c, TruthMode mode);

using Ranking = std::vector<std::string>;

double top_k_accuracy(const std::vector<Ranking>& predictions, const std::vector<std::string>& truths,
                      std::size_t k);
double target_in_top_k(const std::vector<Ranking>& predictions, std::string_view target, std::size_t k);

struct CaseRecord {
  std::string case_id;
  std::string truth;
  std::vector<RankedDisease> ranked;  // top max(5, max k)
  std::map<std::size_t, bool> hit;    // truth within first k
  std::map<std::size_t, bool> target_hit;
  std::size_t skipped_findings = 0;
};

struct EvalReport {
  std::string diagnoser;  // "model" or "expert"
  std::size_t n_cases = 0;
  std::vector<std::size_t> ks;
  std::map<std::size_t, double> accuracy;
  std::optional<std::string> target_disease;
  std::map<std::size_t, double> target_accuracy;
  TruthMode truth_mode = TruthMode::argmax;
  std::size_t skipped_findings = 0;
  std::size_t cases_with_skips = 0;
  std::vector<CaseRecord> records;
};

struct EvalOptions {
  std::vector<std::size_t> ks = {1, 3, 5};
  std::optional<std::string> target_disease;
  TruthMode truth_mode = TruthMode::argmax;
  std::size_t threads = 1;
};

// Model predictions run with dropout off. Findings outside the model
// vocabulary are skipped and counted.
EvalReport evaluate(const ModelParameters& model, const CaseSet& cases, const EvalOptions& options = {});
// The expert engine keeps max(ks) diseases; findings unknown to the
// knowledge base are skipped and counted.
EvalReport evaluate_expert(const KnowledgeBase& kb, const CaseSet& cases, const EvalOptions& options = {});

std::string report_to_json(const EvalReport& report);
// Rows = k, one column per report (model variant).
std::string format_report_table(const std::vector<std::pair<std::string, const EvalReport*>>& columns);

}  // namespace ddx
