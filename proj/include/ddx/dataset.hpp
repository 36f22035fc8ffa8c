#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "ddx/clinical_case.hpp"
#include "ddx/knowledge_base.hpp"

namespace ddx {

// Canonical index assignment for the model: findings and diseases in
// ascending id order.
class Vocabulary {
 public:
  Vocabulary() = default;
  // Ids are sorted and deduplicated; demographic ids must be findings.
  Vocabulary(std::vector<std::string> findings, std::vector<std::string> diseases,
             std::set<std::string> demographic_ids,
             std::map<std::string, std::optional<std::string>> mutex_groups = {});

  const std::vector<std::string>& findings() const { return findings_; }
  const std::vector<std::string>& diseases() const { return diseases_; }
  const std::set<std::string>& demographic_ids() const { return demographic_ids_; }
  const std::map<std::string, std::optional<std::string>>& mutex_groups() const { return mutex_groups_; }

  std::size_t finding_count() const { return findings_.size(); }
  std::size_t disease_count() const { return diseases_.size(); }

  std::optional<std::size_t> finding_index(std::string_view id) const;
  std::optional<std::size_t> disease_index(std::string_view id) const;
  bool is_demographic(std::string_view id) const { return demographic_ids_.count(std::string(id)) > 0; }

  bool operator==(const Vocabulary& other) const;

 private:
  std::vector<std::string> findings_;
  std::vector<std::string> diseases_;
  std::set<std::string> demographic_ids_;
  std::map<std::string, std::optional<std::string>> mutex_groups_;
  std::unordered_map<std::string, std::size_t> finding_lookup_;
  std::unordered_map<std::string, std::size_t> disease_lookup_;
};

struct CaseSet {
  std::vector<ClinicalCase> cases;
  std::vector<std::string> provenance;

  std::size_t size() const { return cases.size(); }
  bool empty() const { return cases.empty(); }
};

// Divides by the total and sorts (descending, ties by id). Zero weights are
// dropped; negative weights and an all-zero list are errors.
DifferentialDiagnosis normalize_ddx(const std::vector<std::pair<std::string, double>>& weights);

// One JSON object per line. Errors carry the 1-based line number.
CaseSet read_cases(std::string_view text, std::string provenance = {});
std::string write_case_line(const ClinicalCase& c);
std::string write_cases(const CaseSet& cs);

CaseSet load_cases(const std::string& path);
void save_cases(const CaseSet& cs, const std::string& path);

Vocabulary build_vocabulary(const std::vector<CaseSet>& sets, const KnowledgeBase* kb = nullptr,
                            const std::set<std::string>* restrict_to = nullptr);

std::pair<CaseSet, CaseSet> split_train_test(const CaseSet& cs, double train_fraction, std::uint64_t seed);

CaseSet merge(const std::vector<CaseSet>& sets);

}  // namespace ddx
