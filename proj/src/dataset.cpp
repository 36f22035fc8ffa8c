#include "ddx/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "ddx/error.hpp"
#include "ddx/random.hpp"

namespace ddx {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

template <typename T>
void sort_unique(std::vector<T>& v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
}

}  // namespace

Vocabulary::Vocabulary(std::vector<std::string> findings, std::vector<std::string> diseases,
                       std::set<std::string> demographic_ids,
                       std::map<std::string, std::optional<std::string>> mutex_groups)
    : findings_(std::move(findings)),
      diseases_(std::move(diseases)),
      demographic_ids_(std::move(demographic_ids)),
      mutex_groups_(std::move(mutex_groups)) {
  sort_unique(findings_);
  sort_unique(diseases_);
  for (std::size_t i = 0; i < findings_.size(); ++i) finding_lookup_.emplace(findings_[i], i);
  for (std::size_t i = 0; i < diseases_.size(); ++i) disease_lookup_.emplace(diseases_[i], i);
  for (const auto& id : demographic_ids_) {
    if (!finding_lookup_.count(id)) throw Error("demographic id '" + id + "' is not a vocabulary finding");
  }
  for (const auto& f : findings_) mutex_groups_.try_emplace(f, std::nullopt);
  std::erase_if(mutex_groups_, [&](const auto& kv) { return !finding_lookup_.count(kv.first); });
}

std::optional<std::size_t> Vocabulary::finding_index(std::string_view id) const {
  const auto it = finding_lookup_.find(std::string(id));
  if (it == finding_lookup_.end()) return std::nullopt;
  return it->second;
}

std::optional<std::size_t> Vocabulary::disease_index(std::string_view id) const {
  const auto it = disease_lookup_.find(std::string(id));
  if (it == disease_lookup_.end()) return std::nullopt;
  return it->second;
}

bool Vocabulary::operator==(const Vocabulary& other) const {
  return findings_ == other.findings_ && diseases_ == other.diseases_ &&
         demographic_ids_ == other.demographic_ids_ && mutex_groups_ == other.mutex_groups_;
}

DifferentialDiagnosis normalize_ddx(const std::vector<std::pair<std::string, double>>& weights) {
  double total = 0.0;
  for (const auto& [d, w] : weights) {
    if (!(w >= 0.0) || !std::isfinite(w)) throw Error("ddx weight for '" + d + "' must be finite and non-negative");
    total += w;
  }
  if (!(total > 0.0)) throw Error("ddx is not normalizable: all weights are zero");

  std::vector<std::pair<std::string, double>> kept;
  for (const auto& e : weights) {
    if (e.second > 0.0) kept.push_back(e);
  }
  std::sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  // Already-normalized input is kept bit-exact so read/write cycles are stable.
  const bool normalized = std::abs(total - 1.0) <= 1e-12;
  DifferentialDiagnosis ddx;
  for (const auto& [d, w] : kept) {
    ddx.entries.push_back({d, normalized ? w : w / total});
    ddx.raw_scores.push_back(w);
  }
  return ddx;
}

namespace {

FindingSet read_id_array(const json& obj, const char* key, std::size_t line) {
  const auto it = obj.find(key);
  if (it == obj.end()) throw ParseError("line " + std::to_string(line), std::string("missing field '") + key + "'");
  if (!it->is_array()) throw ParseError("line " + std::to_string(line), std::string("'") + key + "' must be an array");
  FindingSet out;
  for (const auto& v : *it) {
    if (!v.is_string()) throw ParseError("line " + std::to_string(line), std::string("'") + key + "' entries must be strings");
    out.insert(v.get<std::string>());
  }
  return out;
}

ClinicalCase parse_case(const json& obj, std::size_t line) {
  const auto where = "line " + std::to_string(line);
  if (!obj.is_object()) throw ParseError(where, "expected a JSON object");
  for (const auto& [key, value] : obj.items()) {
    if (key != "id" && key != "pos" && key != "neg" && key != "ddx" && key != "source" && key != "seed_disease") {
      throw ParseError(where, "unknown field '" + key + "'");
    }
  }
  ClinicalCase c;
  if (!obj.contains("id") || !obj["id"].is_string()) throw ParseError(where, "'id' must be a string");
  c.id = obj["id"].get<std::string>();
  c.pos = read_id_array(obj, "pos", line);
  c.neg = read_id_array(obj, "neg", line);
  for (const auto& f : c.pos) {
    if (c.neg.count(f)) throw ParseError(where, "finding '" + f + "' is in both pos and neg");
  }

  if (!obj.contains("source") || !obj["source"].is_string()) throw ParseError(where, "'source' must be a string");
  try {
    c.source = parse_case_source(obj["source"].get<std::string>());
  } catch (const Error& e) {
    throw ParseError(where, e.what());
  }
  if (obj.contains("seed_disease")) {
    if (!obj["seed_disease"].is_string()) throw ParseError(where, "'seed_disease' must be a string");
    c.seed_disease = obj["seed_disease"].get<std::string>();
  }

  if (!obj.contains("ddx") || !obj["ddx"].is_array()) throw ParseError(where, "'ddx' must be an array");
  std::vector<std::pair<std::string, double>> weights;
  std::set<std::string> seen;
  for (const auto& e : obj["ddx"]) {
    if (!e.is_object() || !e.contains("disease") || !e["disease"].is_string() || !e.contains("p") ||
        !e["p"].is_number() || e.size() != 2) {
      throw ParseError(where, "ddx entries must be {\"disease\": string, \"p\": number}");
    }
    auto d = e["disease"].get<std::string>();
    if (!seen.insert(d).second) throw ParseError(where, "disease '" + d + "' repeated in ddx");
    weights.emplace_back(std::move(d), e["p"].get<double>());
  }
  try {
    c.ddx = normalize_ddx(weights);
  } catch (const Error& e) {
    throw ParseError(where, e.what());
  }
  return c;
}

}  // namespace

CaseSet read_cases(std::string_view text, std::string provenance) {
  CaseSet cs;
  if (!provenance.empty()) cs.provenance.push_back(std::move(provenance));
  std::set<std::string> ids;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start < text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    const auto line = text.substr(start, end - start);
    start = end + 1;
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
    json obj;
    try {
      obj = json::parse(line.begin(), line.end());
    } catch (const json::parse_error& e) {
      throw ParseError("line " + std::to_string(line_no), std::string("syntax error: ") + e.what());
    }
    auto c = parse_case(obj, line_no);
    if (!ids.insert(c.id).second) throw ParseError("line " + std::to_string(line_no), "duplicate case id '" + c.id + "'");
    cs.cases.push_back(std::move(c));
  }
  return cs;
}

std::string write_case_line(const ClinicalCase& c) {
  ordered_json obj;
  obj["id"] = c.id;
  obj["pos"] = ordered_json::array();
  for (const auto& f : c.pos) obj["pos"].push_back(f);
  obj["neg"] = ordered_json::array();
  for (const auto& f : c.neg) obj["neg"].push_back(f);
  obj["ddx"] = ordered_json::array();
  for (const auto& e : c.ddx.entries) obj["ddx"].push_back({{"disease", e.disease}, {"p", e.probability}});
  obj["source"] = std::string(to_string(c.source));
  if (c.seed_disease) obj["seed_disease"] = *c.seed_disease;
  return obj.dump();
}

std::string write_cases(const CaseSet& cs) {
  std::string out;
  for (const auto& c : cs.cases) {
    out += write_case_line(c);
    out += '\n';
  }
  return out;
}

CaseSet load_cases(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open case file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return read_cases(buf.str(), path);
  } catch (const ParseError& e) {
    throw ParseError(path + ":" + e.location(), std::string(e.what()).substr(e.location().size() + 2));
  }
}

void save_cases(const CaseSet& cs, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write case file '" + path + "'");
  out << write_cases(cs);
  if (!out) throw Error("failed writing case file '" + path + "'");
}

Vocabulary build_vocabulary(const std::vector<CaseSet>& sets, const KnowledgeBase* kb,
                            const std::set<std::string>* restrict_to) {
  std::set<std::string> findings;
  std::set<std::string> diseases;
  for (const auto& cs : sets) {
    for (const auto& c : cs.cases) {
      findings.insert(c.pos.begin(), c.pos.end());
      findings.insert(c.neg.begin(), c.neg.end());
      for (const auto& e : c.ddx.entries) diseases.insert(e.disease);
    }
  }
  if (kb) {
    for (const auto& f : kb->findings()) findings.insert(f.id);
  }
  if (restrict_to) {
    std::erase_if(findings, [&](const std::string& f) { return !restrict_to->count(f); });
  }
  if (diseases.empty()) throw Error("cannot build a vocabulary without diseases");

  std::set<std::string> demographic;
  std::map<std::string, std::optional<std::string>> groups;
  for (const auto& f : findings) {
    std::optional<std::string> group;
    if (kb) {
      if (const auto i = kb->finding_index(f)) {
        if (kb->finding(*i).is_demographic()) demographic.insert(f);
        group = kb->finding(*i).mutex_group;
      }
    }
    groups.emplace(f, std::move(group));
  }
  return Vocabulary({findings.begin(), findings.end()}, {diseases.begin(), diseases.end()},
                    std::move(demographic), std::move(groups));
}

std::pair<CaseSet, CaseSet> split_train_test(const CaseSet& cs, double train_fraction, std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) throw Error("train fraction must lie in (0, 1)");
  if (cs.size() < 2) throw Error("need at least 2 cases to split");
  std::vector<std::size_t> order(cs.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(derive_seed(seed));
  rng.shuffle(std::span(order));
  const auto n_train =
      static_cast<std::size_t>(std::floor(train_fraction * static_cast<double>(cs.size()) + 1e-9));

  std::pair<CaseSet, CaseSet> out;
  out.first.provenance = cs.provenance;
  out.second.provenance = cs.provenance;
  for (std::size_t i = 0; i < order.size(); ++i) {
    (i < n_train ? out.first : out.second).cases.push_back(cs.cases[order[i]]);
  }
  return out;
}

CaseSet merge(const std::vector<CaseSet>& sets) {
  CaseSet out;
  std::set<std::string> ids;
  for (const auto& cs : sets) {
    for (const auto& c : cs.cases) {
      if (!ids.insert(c.id).second) throw Error("duplicate case id '" + c.id + "' across merged sets");
      out.cases.push_back(c);
    }
    out.provenance.insert(out.provenance.end(), cs.provenance.begin(), cs.provenance.end());
  }
  return out;
}

}  // namespace ddx
