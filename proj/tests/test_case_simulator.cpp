#include <doctest.h>

#include <map>
#include <numeric>

#include "ddx/case_simulator.hpp"
#include "ddx/dataset.hpp"
#include "ddx/error.hpp"
#include "ddx/synthetic_kb.hpp"
#include "fixtures.hpp"

using namespace ddx;

namespace {

KnowledgeBase mutex_kb() {
  return parse_knowledge_base(R"({
    "diseases": [{"id": "d", "name": "D"}, {"id": "empty", "name": "No findings"}],
    "findings": [
      {"id": "age_adult", "name": "Adult", "kind": "demographic", "mutex_group": "age"},
      {"id": "age_child", "name": "Child", "kind": "demographic", "mutex_group": "age"},
      {"id": "male", "name": "Male", "kind": "demographic", "mutex_group": "sex"},
      {"id": "c1", "name": "c1", "kind": "clinical"}, {"id": "c2", "name": "c2", "kind": "clinical"},
      {"id": "c3", "name": "c3", "kind": "clinical"}, {"id": "c4", "name": "c4", "kind": "clinical"},
      {"id": "c5", "name": "c5", "kind": "clinical"},
      {"id": "cough", "name": "Cough", "kind": "clinical"}, {"id": "fever", "name": "Fever", "kind": "clinical"}],
    "frequencies": [
      {"disease": "d", "finding": "age_adult", "freq": 1.0}, {"disease": "d", "finding": "age_child", "freq": 1.0},
      {"disease": "d", "finding": "c1", "freq": 1.0}, {"disease": "d", "finding": "c2", "freq": 1.0},
      {"disease": "d", "finding": "c3", "freq": 1.0}, {"disease": "d", "finding": "c4", "freq": 1.0},
      {"disease": "d", "finding": "c5", "freq": 1.0},
      {"disease": "empty", "finding": "age_adult", "freq": 0.5}]})");
}

std::size_t group_count(const KnowledgeBase& kb, const ClinicalCase& c, const std::string& group) {
  std::size_t n = 0;
  for (const auto& f : c.pos) {
    const auto& g = kb.finding(kb.require_finding(f)).mutex_group;
    if (g && *g == group) ++n;
  }
  return n;
}

}  // namespace

TEST_CASE("remove_mutex") {
  const auto kb = mutex_kb();
  CHECK(remove_mutex(kb, {"age_child", "age_adult", "cough"}, {"age_adult"}) == std::vector<std::string>{"cough"});
  CHECK(remove_mutex(kb, {"cough", "fever"}, {"male"}) == std::vector<std::string>{"cough", "fever"});
  CHECK(remove_mutex(kb, {}, {"male"}).empty());
}

TEST_CASE("certain findings give a seed-independent case") {
  const auto kb = mutex_kb();
  // No demographics: strip them so the case is only the five clinical findings.
  auto entries = kb.frequency_entries();
  std::erase_if(entries, [](const auto& e) { return e.finding.rfind("age_", 0) == 0; });
  const KnowledgeBase plain(kb.diseases(), kb.findings(), entries);
  SimConfig cfg;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    Rng rng(seed);
    const auto c = simulate_case(plain, "d", rng, cfg);
    CHECK(c.pos == FindingSet{"c1", "c2", "c3", "c4", "c5"});
    CHECK(c.neg.empty());
    CHECK(c.seed_disease == std::optional<std::string>("d"));
  }
}

TEST_CASE("unsuitable disease") {
  const auto kb = mutex_kb();
  Rng rng(1);
  CHECK_THROWS_WITH_AS(simulate_case(kb, "empty", rng, SimConfig{}), doctest::Contains("unsuitable"), Error);
}

TEST_CASE("mutually exclusive demographics") {
  const auto kb = mutex_kb();
  for (std::uint64_t seed = 0; seed < 1000; ++seed) {
    Rng rng(seed);
    const auto c = simulate_case(kb, "d", rng, SimConfig{});
    CHECK(group_count(kb, c, "age") == 1);
  }
}

TEST_CASE("trace records the length target and visit order") {
  const auto kb = testing::toy_kb();
  Rng rng(2);
  SimTrace trace;
  simulate_case(kb, "flu", rng, SimConfig{}, &trace);
  // flu has 3 clinical findings, so L = 3 + demographics and all are visited
  CHECK(trace.visited == std::vector<std::string>{"fever", "fatigue", "cough"});
  CHECK(trace.target_length >= 3);
}

TEST_CASE("simulate_dataset counts and determinism") {
  const auto kb = make_separable_kb({.diseases = 5, .seed = 3});
  SimConfig cfg;
  cfg.cases_total = 300;
  cfg.min_cases_per_disease = 50;
  cfg.seed = 7;
  const auto cases = simulate_dataset(kb, cfg);
  REQUIRE(cases.size() == 300);
  std::map<std::string, std::size_t> per;
  for (const auto& c : cases) per[*c.seed_disease]++;
  CHECK(per.size() == 5);
  for (const auto& [d, n] : per) CHECK(n >= 50);
  CHECK(cases.front().id == "sim-0");
  CHECK(cases.back().id == "sim-299");

  CaseSet a{cases, {}};
  CaseSet b{simulate_dataset(kb, cfg), {}};
  CaseSet c{simulate_dataset(kb, cfg, 4), {}};
  CHECK(write_cases(a) == write_cases(b));
  CHECK(write_cases(a) == write_cases(c));

  cfg.seed = 8;
  CHECK(write_cases(CaseSet{simulate_dataset(kb, cfg), {}}) != write_cases(a));

  cfg.cases_total = 249;
  CHECK_THROWS_AS(simulate_dataset(kb, cfg), Error);
}

TEST_CASE("single disease, no minimum") {
  const auto kb = testing::toy_kb();
  auto entries = kb.frequency_entries();
  std::erase_if(entries, [](const auto& e) { return e.disease != "flu"; });
  const KnowledgeBase flu_only(kb.diseases(), kb.findings(), entries);
  SimConfig cfg;
  cfg.cases_total = 10;
  cfg.min_cases_per_disease = 0;
  const auto cases = simulate_dataset(flu_only, cfg);
  CHECK(cases.size() == 10);
  for (const auto& c : cases) CHECK(*c.seed_disease == "flu");
}

TEST_CASE("case invariants on random bases") {
  Rng rng(99);
  for (int trial = 0; trial < 30; ++trial) {
    // two demographic findings share a group, and clinical findings are
    // paired into groups as well
    std::vector<Finding> fs = {{"age_a", "", FindingKind::demographic, "age"},
                               {"age_b", "", FindingKind::demographic, "age"}};
    for (int f = 0; f < 8; ++f) {
      fs.push_back({"c" + std::to_string(f), "", FindingKind::clinical,
                    f < 4 ? std::optional<std::string>("dur" + std::to_string(f / 2)) : std::nullopt});
    }
    std::vector<Disease> ds = {{"x", ""}, {"y", ""}, {"z", ""}};
    std::vector<FrequencyEntry> qs;
    for (const auto& d : ds) {
      for (const auto& f : fs) qs.push_back({d.id, f.id, rng.uniform() < 0.2 ? 0.0 : rng.uniform()});
      qs.push_back({d.id, "c7", 0.5});
    }
    std::erase_if(qs, [&, seen = std::set<std::pair<std::string, std::string>>()](const auto& e) mutable {
      return !seen.insert({e.disease, e.finding}).second;
    });
    const KnowledgeBase kb(ds, fs, qs);
    REQUIRE(validate_knowledge_base(kb, {0}).valid());
    SimConfig cfg;
    cfg.cases_total = 60;
    cfg.min_cases_per_disease = 5;
    cfg.seed = static_cast<std::uint64_t>(trial);
    for (const auto& c : simulate_dataset(kb, cfg)) {
      for (const auto& f : c.pos) CHECK(c.neg.count(f) == 0);
      CHECK(group_count(kb, c, "age") <= 1);
      for (int g = 0; g < 2; ++g) CHECK(group_count(kb, c, "dur" + std::to_string(g)) <= 1);
      double total = 0.0;
      for (const auto& e : c.ddx.entries) {
        CHECK(e.probability > 0.0);
        total += e.probability;
      }
      CHECK(total == doctest::Approx(1.0).epsilon(1e-9));
    }
  }
}

TEST_CASE("seed disease is in the differential on a separable base") {
  const auto kb = make_separable_kb({.seed = 1});
  SimConfig cfg;
  cfg.cases_total = 1000;
  cfg.seed = 2;
  std::size_t present = 0;
  const auto cases = simulate_dataset(kb, cfg);
  for (const auto& c : cases) {
    for (const auto& e : c.ddx.entries) {
      if (e.disease == *c.seed_disease) {
        ++present;
        break;
      }
    }
  }
  CHECK(static_cast<double>(present) / static_cast<double>(cases.size()) >= 0.95);
}

TEST_CASE("config validation") {
  SimConfig cfg;
  cfg.pos_threshold = 1.5;
  CHECK_THROWS_AS(cfg.validate(), Error);
  cfg = {};
  cfg.cases_total = 0;
  CHECK_THROWS_AS(cfg.validate(), Error);
}
