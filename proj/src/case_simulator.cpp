#include "ddx/case_simulator.hpp"

#include <algorithm>
#include <set>

#include "ddx/error.hpp"
#include "ddx/parallel.hpp"

namespace ddx {

std::string_view to_string(CaseSource source) {
  switch (source) {
    case CaseSource::expert_sim: return "expert_sim";
    case CaseSource::assessment: return "assessment";
    case CaseSource::vignette: return "vignette";
  }
  return "expert_sim";
}

CaseSource parse_case_source(std::string_view text) {
  if (text == "expert_sim") return CaseSource::expert_sim;
  if (text == "assessment") return CaseSource::assessment;
  if (text == "vignette") return CaseSource::vignette;
  throw Error("unknown case source '" + std::string(text) + "'");
}

void SimConfig::validate() const {
  if (cases_total < 1) throw Error("SimConfig: cases_total must be at least 1");
  if (ddx_top_k < 1) throw Error("SimConfig: ddx_top_k must be at least 1");
  if (max_findings_cap < 1) throw Error("SimConfig: max_findings_cap must be at least 1");
  if (!(pos_threshold >= 0.0 && pos_threshold <= 1.0)) throw Error("SimConfig: pos_threshold outside [0,1]");
  if (!(neg_gate >= 0.0 && neg_gate <= 1.0)) throw Error("SimConfig: neg_gate outside [0,1]");
}

std::vector<std::string> remove_mutex(const KnowledgeBase& kb, const std::vector<std::string>& pool,
                                      const FindingSet& selected) {
  std::set<std::string> groups;
  for (const auto& id : selected) {
    const auto f = kb.finding_index(id);
    if (f && kb.finding(*f).mutex_group) groups.insert(*kb.finding(*f).mutex_group);
  }
  std::vector<std::string> out;
  for (const auto& id : pool) {
    if (selected.count(id)) continue;
    const auto f = kb.finding_index(id);
    if (f && kb.finding(*f).mutex_group && groups.count(*kb.finding(*f).mutex_group)) continue;
    out.push_back(id);
  }
  return out;
}

std::vector<std::string> simulable_diseases(const KnowledgeBase& kb) {
  std::vector<std::string> out;
  for (std::size_t d = 0; d < kb.diseases().size(); ++d) {
    const auto& links = kb.links(d);
    if (std::any_of(links.begin(), links.end(),
                    [&](const auto& l) { return !kb.finding(l.first).is_demographic(); })) {
      out.push_back(kb.disease(d).id);
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

namespace {

std::vector<std::size_t> demographics_by_id(const KnowledgeBase& kb) {
  std::vector<std::size_t> out;
  for (std::size_t f = 0; f < kb.findings().size(); ++f) {
    if (kb.finding(f).is_demographic()) out.push_back(f);
  }
  std::sort(out.begin(), out.end(),
            [&](auto a, auto b) { return kb.finding(a).id < kb.finding(b).id; });
  return out;
}

}  // namespace

ClinicalCase simulate_case(const KnowledgeBase& kb, std::string_view disease, Rng& rng,
                           const SimConfig& cfg, SimTrace* trace) {
  const auto y = kb.require_disease(disease);
  const auto candidates = sorted_finding_indices(kb, y);
  if (candidates.empty()) {
    throw Error("disease '" + std::string(disease) + "' is unsuitable for simulation: no nonzero clinical findings");
  }

  std::vector<std::size_t> pos;
  std::vector<std::size_t> neg;
  std::set<std::string> blocked;
  const auto is_blocked = [&](std::size_t f) {
    const auto& g = kb.finding(f).mutex_group;
    return g && blocked.count(*g) > 0;
  };
  const auto accept = [&](std::size_t f) {
    pos.push_back(f);
    if (const auto& g = kb.finding(f).mutex_group) blocked.insert(*g);
  };

  for (const auto f : demographics_by_id(kb)) {
    if (is_blocked(f)) continue;
    if (rng.uniform() < kb.frequency(y, f)) accept(f);
  }

  const std::size_t upper = std::min(candidates.size(), cfg.max_findings_cap);
  const std::size_t lower = std::min<std::size_t>(5, upper);
  const std::size_t target = static_cast<std::size_t>(rng.uniform_int(lower, upper)) + pos.size();
  if (trace) {
    trace->target_length = target;
    trace->visited.clear();
  }

  for (const auto f : candidates) {
    if (pos.size() + neg.size() > target) break;
    if (is_blocked(f)) continue;
    if (trace) trace->visited.push_back(kb.finding(f).id);
    const double freq = kb.frequency(y, f);
    const double u = rng.uniform();
    if (freq >= cfg.pos_threshold) {
      if (u < freq) accept(f);
    } else if (u > cfg.neg_gate) {
      neg.push_back(f);
    }
  }

  ClinicalCase c;
  c.source = CaseSource::expert_sim;
  c.seed_disease = kb.disease(y).id;
  for (const auto f : pos) c.pos.insert(kb.finding(f).id);
  for (const auto f : neg) c.neg.insert(kb.finding(f).id);
  c.ddx = expert_inference(kb, pos, neg, cfg.ddx_top_k);
  return c;
}

std::vector<ClinicalCase> simulate_dataset(const KnowledgeBase& kb, const SimConfig& cfg,
                                           std::size_t threads) {
  cfg.validate();
  const auto pool = simulable_diseases(kb);
  if (pool.empty()) throw Error("no disease in the knowledge base can be simulated");
  if (cfg.cases_total < pool.size() * cfg.min_cases_per_disease) {
    throw Error("cases_total " + std::to_string(cfg.cases_total) + " is below " +
                std::to_string(pool.size()) + " diseases x " +
                std::to_string(cfg.min_cases_per_disease) + " minimum cases");
  }

  const std::size_t guaranteed = pool.size() * cfg.min_cases_per_disease;
  std::vector<ClinicalCase> cases(cfg.cases_total);
  auto make = [&](std::size_t i) {
    Rng rng(derive_seed(cfg.seed, i));
    const std::size_t which = i < guaranteed ? i / cfg.min_cases_per_disease
                                             : static_cast<std::size_t>(rng.uniform_int(0, pool.size() - 1));
    auto c = simulate_case(kb, pool[which], rng, cfg);
    c.id = "sim-" + std::to_string(i);
    cases[i] = std::move(c);
  };

  parallel_for(cases.size(), threads, make);
  return cases;
}

}  // namespace ddx
