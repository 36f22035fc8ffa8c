#include "ddx/knowledge_base.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "ddx/error.hpp"

namespace ddx {

using nlohmann::json;

std::string_view to_string(FindingKind kind) {
  return kind == FindingKind::demographic ? "demographic" : "clinical";
}

KnowledgeBase::KnowledgeBase(std::vector<Disease> diseases, std::vector<Finding> findings,
                             std::vector<FrequencyEntry> frequencies)
    : diseases_(std::move(diseases)),
      findings_(std::move(findings)),
      entries_(std::move(frequencies)) {
  for (std::size_t i = 0; i < diseases_.size(); ++i) disease_lookup_.emplace(diseases_[i].id, i);
  for (std::size_t i = 0; i < findings_.size(); ++i) finding_lookup_.emplace(findings_[i].id, i);

  freq_.resize(diseases_.size());
  links_.resize(diseases_.size());
  for (const auto& e : entries_) {
    const auto d = disease_index(e.disease);
    const auto f = finding_index(e.finding);
    if (!d || !f) continue;
    freq_[*d].emplace(*f, e.freq);
  }
  for (std::size_t d = 0; d < diseases_.size(); ++d) {
    for (const auto& [f, v] : freq_[d]) {
      if (v > 0.0) links_[d].emplace_back(f, v);
    }
    std::sort(links_[d].begin(), links_[d].end());
  }
}

std::optional<std::size_t> KnowledgeBase::disease_index(std::string_view id) const {
  const auto it = disease_lookup_.find(std::string(id));
  if (it == disease_lookup_.end()) return std::nullopt;
  return it->second;
}

std::optional<std::size_t> KnowledgeBase::finding_index(std::string_view id) const {
  const auto it = finding_lookup_.find(std::string(id));
  if (it == finding_lookup_.end()) return std::nullopt;
  return it->second;
}

std::size_t KnowledgeBase::require_disease(std::string_view id) const {
  if (auto i = disease_index(id)) return *i;
  throw Error("unknown disease id '" + std::string(id) + "'");
}

std::size_t KnowledgeBase::require_finding(std::string_view id) const {
  if (auto i = finding_index(id)) return *i;
  throw Error("unknown finding id '" + std::string(id) + "'");
}

double KnowledgeBase::frequency(std::size_t disease, std::size_t finding) const {
  const auto& row = freq_.at(disease);
  const auto it = row.find(finding);
  return it == row.end() ? 0.0 : it->second;
}

bool ValidationReport::valid() const { return error_count() == 0; }

std::size_t ValidationReport::error_count() const {
  return static_cast<std::size_t>(std::count_if(issues.begin(), issues.end(), [](const auto& i) {
    return i.severity == Severity::error;
  }));
}

std::size_t ValidationReport::warning_count() const { return issues.size() - error_count(); }

ValidationReport validate_knowledge_base(const KnowledgeBase& kb, const ValidationOptions& options) {
  ValidationReport report;
  auto error = [&](std::string where, std::string what) {
    report.issues.push_back({Severity::error, std::move(where), std::move(what)});
  };

  std::set<std::string> seen;
  for (std::size_t i = 0; i < kb.diseases().size(); ++i) {
    const auto& d = kb.diseases()[i];
    const auto where = "diseases[" + std::to_string(i) + "]";
    if (d.id.empty()) error(where, "empty disease id");
    else if (!seen.insert(d.id).second) error(where, "duplicate disease id '" + d.id + "'");
  }

  seen.clear();
  for (std::size_t i = 0; i < kb.findings().size(); ++i) {
    const auto& f = kb.findings()[i];
    const auto where = "findings[" + std::to_string(i) + "]";
    if (f.id.empty()) error(where, "empty finding id");
    else if (!seen.insert(f.id).second) error(where, "duplicate finding id '" + f.id + "'");
    if (f.is_demographic() && (!f.mutex_group || f.mutex_group->empty())) {
      error(where, "demographic finding '" + f.id + "' has no mutex_group");
    }
  }

  std::set<std::pair<std::string, std::string>> pairs;
  for (std::size_t i = 0; i < kb.frequency_entries().size(); ++i) {
    const auto& e = kb.frequency_entries()[i];
    const auto where = "frequencies[" + std::to_string(i) + "]";
    if (!kb.disease_index(e.disease)) error(where, "unknown disease '" + e.disease + "'");
    if (!kb.finding_index(e.finding)) error(where, "unknown finding '" + e.finding + "'");
    if (!(e.freq >= 0.0 && e.freq <= 1.0)) {
      std::ostringstream os;
      os << "frequency out of range [0,1]: " << e.freq;
      error(where, os.str());
    }
    if (!pairs.emplace(e.disease, e.finding).second) {
      error(where, "duplicate frequency for (" + e.disease + ", " + e.finding + ")");
    }
  }

  for (std::size_t d = 0; d < kb.diseases().size(); ++d) {
    std::size_t clinical = 0;
    for (const auto& [f, v] : kb.links(d)) {
      if (!kb.finding(f).is_demographic()) ++clinical;
    }
    if (clinical < options.min_clinical_findings) {
      report.issues.push_back({Severity::warning, "diseases[" + std::to_string(d) + "]",
                               "insufficient findings for simulation: '" + kb.disease(d).id +
                                   "' has " + std::to_string(clinical) +
                                   " nonzero clinical findings"});
    }
  }
  return report;
}

namespace {

void check_keys(const json& obj, const std::string& where, std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) throw ParseError(where, "expected an object");
  for (const auto& [key, value] : obj.items()) {
    if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; })) {
      throw ParseError(where, "unknown field '" + key + "'");
    }
  }
}

std::string required_string(const json& obj, const std::string& where, const char* key) {
  const auto it = obj.find(key);
  if (it == obj.end()) throw ParseError(where, std::string("missing field '") + key + "'");
  if (!it->is_string()) throw ParseError(where + "." + key, "expected a string");
  return it->get<std::string>();
}

const json& required_array(const json& obj, const char* key) {
  const auto it = obj.find(key);
  if (it == obj.end()) throw ParseError("$", std::string("missing field '") + key + "'");
  if (!it->is_array()) throw ParseError(std::string("$.") + key, "expected an array");
  return *it;
}

}  // namespace

KnowledgeBase read_knowledge_base_document(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw ParseError("byte " + std::to_string(e.byte), "syntax error: " + std::string(e.what()));
  }
  check_keys(doc, "$", {"diseases", "findings", "frequencies"});

  std::vector<Disease> diseases;
  const auto& ds = required_array(doc, "diseases");
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const auto where = "$.diseases[" + std::to_string(i) + "]";
    check_keys(ds[i], where, {"id", "name"});
    diseases.push_back({required_string(ds[i], where, "id"), required_string(ds[i], where, "name")});
  }

  std::vector<Finding> findings;
  const auto& fs = required_array(doc, "findings");
  for (std::size_t i = 0; i < fs.size(); ++i) {
    const auto where = "$.findings[" + std::to_string(i) + "]";
    check_keys(fs[i], where, {"id", "name", "kind", "mutex_group"});
    Finding f;
    f.id = required_string(fs[i], where, "id");
    f.display_name = required_string(fs[i], where, "name");
    const auto kind = required_string(fs[i], where, "kind");
    if (kind == "demographic") f.kind = FindingKind::demographic;
    else if (kind == "clinical") f.kind = FindingKind::clinical;
    else throw ParseError(where + ".kind", "expected \"demographic\" or \"clinical\", got \"" + kind + "\"");
    if (fs[i].contains("mutex_group")) f.mutex_group = required_string(fs[i], where, "mutex_group");
    findings.push_back(std::move(f));
  }

  std::vector<FrequencyEntry> entries;
  const auto& qs = required_array(doc, "frequencies");
  for (std::size_t i = 0; i < qs.size(); ++i) {
    const auto where = "$.frequencies[" + std::to_string(i) + "]";
    check_keys(qs[i], where, {"disease", "finding", "freq"});
    FrequencyEntry e;
    e.disease = required_string(qs[i], where, "disease");
    e.finding = required_string(qs[i], where, "finding");
    const auto it = qs[i].find("freq");
    if (it == qs[i].end()) throw ParseError(where, "missing field 'freq'");
    if (!it->is_number()) throw ParseError(where + ".freq", "expected a number");
    e.freq = it->get<double>();
    entries.push_back(std::move(e));
  }

  return KnowledgeBase(std::move(diseases), std::move(findings), std::move(entries));
}

KnowledgeBase parse_knowledge_base(std::string_view text) {
  auto kb = read_knowledge_base_document(text);
  const auto report = validate_knowledge_base(kb);
  if (!report.valid()) {
    std::string msg = "invalid knowledge base:";
    for (const auto& issue : report.issues) {
      if (issue.severity == Severity::error) msg += "\n  " + issue.location + ": " + issue.message;
    }
    throw Error(msg);
  }
  return kb;
}

KnowledgeBase load_knowledge_base(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open knowledge base '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_knowledge_base(buf.str());
}

std::string serialize_knowledge_base(const KnowledgeBase& kb) {
  json doc;
  doc["diseases"] = json::array();
  for (const auto& d : kb.diseases()) doc["diseases"].push_back({{"id", d.id}, {"name", d.display_name}});
  doc["findings"] = json::array();
  for (const auto& f : kb.findings()) {
    json j = {{"id", f.id}, {"name", f.display_name}, {"kind", std::string(to_string(f.kind))}};
    if (f.mutex_group) j["mutex_group"] = *f.mutex_group;
    doc["findings"].push_back(std::move(j));
  }
  doc["frequencies"] = json::array();
  for (std::size_t d = 0; d < kb.diseases().size(); ++d) {
    for (const auto& [f, v] : kb.links(d)) {
      doc["frequencies"].push_back(
          {{"disease", kb.disease(d).id}, {"finding", kb.finding(f).id}, {"freq", v}});
    }
  }
  return doc.dump(2) + "\n";
}

double frequency(const KnowledgeBase& kb, std::string_view disease, std::string_view finding) {
  return kb.frequency(kb.require_disease(disease), kb.require_finding(finding));
}

std::vector<std::size_t> sorted_finding_indices(const KnowledgeBase& kb, std::size_t disease) {
  std::vector<std::pair<std::size_t, double>> ranked;
  for (const auto& [f, v] : kb.links(disease)) {
    if (!kb.finding(f).is_demographic()) ranked.emplace_back(f, v);
  }
  std::sort(ranked.begin(), ranked.end(), [&](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return kb.finding(a.first).id < kb.finding(b.first).id;
  });
  std::vector<std::size_t> out;
  out.reserve(ranked.size());
  for (const auto& r : ranked) out.push_back(r.first);
  return out;
}

std::vector<std::string> sorted_findings(const KnowledgeBase& kb, std::string_view disease) {
  std::vector<std::string> out;
  for (auto f : sorted_finding_indices(kb, kb.require_disease(disease))) out.push_back(kb.finding(f).id);
  return out;
}

}  // namespace ddx
