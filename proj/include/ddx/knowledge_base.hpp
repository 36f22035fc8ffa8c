#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace ddx {

enum class FindingKind { demographic, clinical };

std::string_view to_string(FindingKind kind);

struct Finding {
  std::string id;
  std::string display_name;
  FindingKind kind = FindingKind::clinical;
  // Findings sharing a group are mutually exclusive (age brackets, sex, ...).
  std::optional<std::string> mutex_group;

  bool is_demographic() const { return kind == FindingKind::demographic; }
};

struct Disease {
  std::string id;
  std::string display_name;
};

struct FrequencyEntry {
  std::string disease;
  std::string finding;
  double freq = 0.0;
};

// Expert knowledge base: diseases, findings and the sparse FREQ(d, f)
// table. Immutable once built; a missing (disease, finding) pair has
// frequency exactly 0.
//
// The constructor does not enforce invariants so that a malformed base can
// still be inspected by validate_knowledge_base(); parse_knowledge_base()
// only returns bases that validated cleanly.
class KnowledgeBase {
 public:
  KnowledgeBase() = default;
  KnowledgeBase(std::vector<Disease> diseases, std::vector<Finding> findings,
                std::vector<FrequencyEntry> frequencies);

  const std::vector<Disease>& diseases() const { return diseases_; }
  const std::vector<Finding>& findings() const { return findings_; }
  // Entries as declared, including duplicates or dangling references.
  const std::vector<FrequencyEntry>& frequency_entries() const { return entries_; }

  std::optional<std::size_t> disease_index(std::string_view id) const;
  std::optional<std::size_t> finding_index(std::string_view id) const;
  // Throws ddx::Error for unknown ids.
  std::size_t require_disease(std::string_view id) const;
  std::size_t require_finding(std::string_view id) const;

  const Finding& finding(std::size_t index) const { return findings_[index]; }
  const Disease& disease(std::size_t index) const { return diseases_[index]; }

  double frequency(std::size_t disease, std::size_t finding) const;

  // Nonzero links of one disease as (finding index, freq), in finding index order.
  const std::vector<std::pair<std::size_t, double>>& links(std::size_t disease) const {
    return links_[disease];
  }

 private:
  std::vector<Disease> diseases_;
  std::vector<Finding> findings_;
  std::vector<FrequencyEntry> entries_;
  std::unordered_map<std::string, std::size_t> disease_lookup_;
  std::unordered_map<std::string, std::size_t> finding_lookup_;
  std::vector<std::unordered_map<std::size_t, double>> freq_;
  std::vector<std::vector<std::pair<std::size_t, double>>> links_;
};

enum class Severity { error, warning };

struct ValidationIssue {
  Severity severity = Severity::error;
  std::string location;
  std::string message;
};

struct ValidationReport {
  std::vector<ValidationIssue> issues;

  bool valid() const;
  std::size_t error_count() const;
  std::size_t warning_count() const;
};

struct ValidationOptions {
  // Diseases with fewer nonzero clinical findings than this get a warning.
  std::size_t min_clinical_findings = 3;
};

ValidationReport validate_knowledge_base(const KnowledgeBase& kb,
                                         const ValidationOptions& options = {});

// Syntax and schema checks only; the result may violate invariants.
KnowledgeBase read_knowledge_base_document(std::string_view text);

// Parses the JSON knowledge-base document. Throws ParseError on syntax or
// schema problems and ddx::Error listing every invariant violation.
KnowledgeBase parse_knowledge_base(std::string_view text);
KnowledgeBase load_knowledge_base(const std::string& path);

// Canonical document: declaration order for diseases and findings,
// frequencies ordered by (disease, finding) declaration index, zeros omitted.
std::string serialize_knowledge_base(const KnowledgeBase& kb);

double frequency(const KnowledgeBase& kb, std::string_view disease, std::string_view finding);

// Non-demographic findings with FREQ(d, f) > 0, descending frequency, ties
// by ascending finding id.
std::vector<std::string> sorted_findings(const KnowledgeBase& kb, std::string_view disease);
std::vector<std::size_t> sorted_finding_indices(const KnowledgeBase& kb, std::size_t disease);

}  // namespace ddx
