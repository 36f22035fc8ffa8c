#include "ddx/evaluator.hpp"

#include <algorithm>
#include <cstdio>
#include <functional>
#include <iomanip>
#include <sstream>

#include <json.hpp>

#include "ddx/error.hpp"
#include "ddx/expert_engine.hpp"
#include "ddx/parallel.hpp"

namespace ddx {

std::string_view to_string(TruthMode mode) {
  return mode == TruthMode::argmax ? "argmax" : "seed-disease";
}

TruthMode parse_truth_mode(std::string_view text) {
  if (text == "argmax") return TruthMode::argmax;
  if (text == "seed-disease") return TruthMode::seed_disease;
  throw Error("unknown truth mode '" + std::string(text) + "' (expected argmax or seed-disease)");
}

std::string truth_label(const ClinicalCase& c) {
  if (c.ddx.entries.empty()) throw Error("case '" + c.id + "' has an empty ddx");
  const auto best = std::min_element(c.ddx.entries.begin(), c.ddx.entries.end(), [](const auto& a, const auto& b) {
    if (a.probability != b.probability) return a.probability > b.probability;
    return a.disease < b.disease;
  });
  return best->disease;
}

std::string truth_for(const ClinicalCase& c, TruthMode mode) {
  if (mode == TruthMode::argmax) return truth_label(c);
  if (!c.seed_disease) throw Error("case '" + c.id + "' has no seed_disease");
  return *c.seed_disease;
}

namespace {

bool within(const Ranking& ranked, std::string_view disease, std::size_t k) {
  const auto end = ranked.begin() + static_cast<std::ptrdiff_t>(std::min(k, ranked.size()));
  return std::find(ranked.begin(), end, disease) != end;
}

}  // namespace

double top_k_accuracy(const std::vector<Ranking>& predictions, const std::vector<std::string>& truths,
                      std::size_t k) {
  if (predictions.size() != truths.size()) throw Error("top_k_accuracy: predictions and truths differ in length");
  if (predictions.empty()) throw Error("top_k_accuracy: no cases");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < predictions.size(); ++i) hits += within(predictions[i], truths[i], k) ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(predictions.size());
}

double target_in_top_k(const std::vector<Ranking>& predictions, std::string_view target, std::size_t k) {
  if (predictions.empty()) throw Error("target_in_top_k: no cases");
  std::size_t hits = 0;
  for (const auto& p : predictions) hits += within(p, target, k) ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(predictions.size());
}

namespace {

using Ranker = std::function<std::vector<RankedDisease>(const ClinicalCase&, std::size_t depth, std::size_t& skipped)>;

EvalReport run_evaluation(std::string diagnoser, const CaseSet& cases, const EvalOptions& options,
                          const Ranker& rank) {
  if (cases.empty()) throw Error("cannot evaluate an empty case set");
  if (options.ks.empty()) throw Error("no k values requested");
  for (const auto k : options.ks) {
    if (k < 1) throw Error("k must be at least 1");
  }

  EvalReport report;
  report.diagnoser = std::move(diagnoser);
  report.n_cases = cases.size();
  report.ks = options.ks;
  std::sort(report.ks.begin(), report.ks.end());
  report.ks.erase(std::unique(report.ks.begin(), report.ks.end()), report.ks.end());
  report.target_disease = options.target_disease;
  report.truth_mode = options.truth_mode;
  const std::size_t depth = std::max<std::size_t>(5, report.ks.back());

  report.records.resize(cases.size());
  parallel_for(cases.size(), options.threads, [&](std::size_t i) {
    const auto& c = cases.cases[i];
    auto& rec = report.records[i];
    rec.case_id = c.id;
    rec.truth = truth_for(c, options.truth_mode);
    rec.ranked = rank(c, depth, rec.skipped_findings);
  });

  std::vector<Ranking> predictions;
  std::vector<std::string> truths;
  for (auto& rec : report.records) {
    Ranking r;
    for (const auto& e : rec.ranked) r.push_back(e.disease);
    for (const auto k : report.ks) {
      rec.hit[k] = within(r, rec.truth, k);
      if (report.target_disease) rec.target_hit[k] = within(r, *report.target_disease, k);
    }
    report.skipped_findings += rec.skipped_findings;
    report.cases_with_skips += rec.skipped_findings > 0 ? 1 : 0;
    predictions.push_back(std::move(r));
    truths.push_back(rec.truth);
  }
  for (const auto k : report.ks) {
    report.accuracy[k] = top_k_accuracy(predictions, truths, k);
    if (report.target_disease) report.target_accuracy[k] = target_in_top_k(predictions, *report.target_disease, k);
  }
  return report;
}

}  // namespace

EvalReport evaluate(const ModelParameters& model, const CaseSet& cases, const EvalOptions& options) {
  return run_evaluation("model", cases, options, [&](const ClinicalCase& c, std::size_t depth, std::size_t& skipped) {
    const auto encoded = encode_case(model.vocab, c);
    skipped = encoded.skipped.size();
    return predict_topk(model, encoded.input, depth);
  });
}

EvalReport evaluate_expert(const KnowledgeBase& kb, const CaseSet& cases, const EvalOptions& options) {
  return run_evaluation("expert", cases, options, [&](const ClinicalCase& c, std::size_t depth, std::size_t& skipped) {
    std::vector<std::size_t> pos;
    std::vector<std::size_t> neg;
    skipped = 0;
    for (const auto& f : c.pos) {
      if (auto i = kb.finding_index(f)) pos.push_back(*i);
      else ++skipped;
    }
    for (const auto& f : c.neg) {
      if (auto i = kb.finding_index(f)) neg.push_back(*i);
      else ++skipped;
    }
    std::vector<RankedDisease> ranked;
    try {
      for (auto& e : expert_inference(kb, pos, neg, depth).entries) ranked.push_back({e.disease, e.probability});
    } catch (const Error&) {
      // every disease excluded: an empty ranking counts as a miss
    }
    return ranked;
  });
}

std::string report_to_json(const EvalReport& report) {
  nlohmann::ordered_json j;
  j["diagnoser"] = report.diagnoser;
  j["n_cases"] = report.n_cases;
  j["truth"] = std::string(to_string(report.truth_mode));
  j["ks"] = report.ks;
  for (const auto& [k, v] : report.accuracy) j["accuracy"][std::to_string(k)] = v;
  if (report.target_disease) {
    j["target_disease"] = *report.target_disease;
    for (const auto& [k, v] : report.target_accuracy) j["target_accuracy"][std::to_string(k)] = v;
  }
  j["skipped_findings"] = report.skipped_findings;
  j["cases_with_skips"] = report.cases_with_skips;
  j["cases"] = nlohmann::ordered_json::array();
  for (const auto& rec : report.records) {
    nlohmann::ordered_json r;
    r["id"] = rec.case_id;
    r["truth"] = rec.truth;
    r["ranked"] = nlohmann::ordered_json::array();
    for (std::size_t i = 0; i < std::min<std::size_t>(5, rec.ranked.size()); ++i) {
      r["ranked"].push_back({{"disease", rec.ranked[i].disease}, {"p", rec.ranked[i].probability}});
    }
    for (const auto& [k, hit] : rec.hit) r["hit"][std::to_string(k)] = hit;
    for (const auto& [k, hit] : rec.target_hit) r["target_hit"][std::to_string(k)] = hit;
    r["skipped_findings"] = rec.skipped_findings;
    j["cases"].push_back(std::move(r));
  }
  return j.dump(2) + "\n";
}

std::string format_report_table(const std::vector<std::pair<std::string, const EvalReport*>>& columns) {
  std::ostringstream os;
  std::vector<std::size_t> ks;
  bool any_target = false;
  for (const auto& [name, rep] : columns) {
    ks.insert(ks.end(), rep->ks.begin(), rep->ks.end());
    any_target = any_target || rep->target_disease.has_value();
  }
  std::sort(ks.begin(), ks.end());
  ks.erase(std::unique(ks.begin(), ks.end()), ks.end());

  const auto cell = [](const std::map<std::size_t, double>& m, std::size_t k) {
    const auto it = m.find(k);
    if (it == m.end()) return std::string("-");
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.1f%%", 100.0 * it->second);
    return std::string(buf);
  };
  const auto emit = [&](const std::string& title, auto select) {
    os << title << "\n" << std::left << std::setw(8) << "top-k";
    for (const auto& [name, rep] : columns) os << std::setw(std::max<int>(12, static_cast<int>(name.size()) + 2)) << name;
    os << "\n";
    for (const auto k : ks) {
      os << std::setw(8) << k;
      for (const auto& [name, rep] : columns) {
        os << std::setw(std::max<int>(12, static_cast<int>(name.size()) + 2)) << cell(select(*rep), k);
      }
      os << "\n";
    }
  };
  emit("Top-k accuracy (n = " + std::to_string(columns.empty() ? 0 : columns.front().second->n_cases) + ")",
       [](const EvalReport& r) -> const std::map<std::size_t, double>& { return r.accuracy; });
  if (any_target) {
    std::string target;
    for (const auto& [name, rep] : columns) {
      if (rep->target_disease) target = *rep->target_disease;
    }
    os << "\n";
    emit("Target '" + target + "' within top-k",
         [](const EvalReport& r) -> const std::map<std::size_t, double>& { return r.target_accuracy; });
  }
  return os.str();
}

}  // namespace ddx
