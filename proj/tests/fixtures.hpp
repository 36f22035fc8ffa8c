#pragma once

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <string>
#include <vector>

#include "ddx/knowledge_base.hpp"
#include "ddx/random.hpp"

namespace ddx::testing {

// flu/cold/pregnancy toy base: sex is a demographic mutex group, pregnancy
// is impossible for males.
inline const char* kToyKb = R"({
  "diseases": [
    {"id": "cold", "name": "Common cold"},
    {"id": "flu", "name": "Influenza"},
    {"id": "pregnancy", "name": "Pregnancy"}
  ],
  "findings": [
    {"id": "cough", "name": "Cough", "kind": "clinical"},
    {"id": "fatigue", "name": "Fatigue", "kind": "clinical"},
    {"id": "fever", "name": "Fever", "kind": "clinical"},
    {"id": "nausea", "name": "Nausea", "kind": "clinical"},
    {"id": "vomiting", "name": "Vomiting", "kind": "clinical"},
    {"id": "female", "name": "Female", "kind": "demographic", "mutex_group": "sex"},
    {"id": "male", "name": "Male", "kind": "demographic", "mutex_group": "sex"}
  ],
  "frequencies": [
    {"disease": "flu", "finding": "fever", "freq": 0.8},
    {"disease": "flu", "finding": "cough", "freq": 0.6},
    {"disease": "flu", "finding": "fatigue", "freq": 0.7},
    {"disease": "flu", "finding": "female", "freq": 0.5},
    {"disease": "flu", "finding": "male", "freq": 0.5},
    {"disease": "cold", "finding": "cough", "freq": 0.9},
    {"disease": "cold", "finding": "fever", "freq": 0.1},
    {"disease": "cold", "finding": "fatigue", "freq": 0.3},
    {"disease": "cold", "finding": "female", "freq": 0.5},
    {"disease": "cold", "finding": "male", "freq": 0.5},
    {"disease": "pregnancy", "finding": "nausea", "freq": 0.7},
    {"disease": "pregnancy", "finding": "fatigue", "freq": 0.5},
    {"disease": "pregnancy", "finding": "vomiting", "freq": 0.4},
    {"disease": "pregnancy", "finding": "female", "freq": 1.0},
    {"disease": "pregnancy", "finding": "male", "freq": 0.0}
  ]
})";

inline KnowledgeBase toy_kb() { return parse_knowledge_base(kToyKb); }

// Random small base: `demographics` demographic findings in one mutex group
// followed by clinical findings; every frequency drawn from a small grid
// that includes 0 and 1 so ties and exclusions occur.
inline KnowledgeBase random_kb(Rng& rng, std::size_t n_diseases, std::size_t n_findings, std::size_t demographics) {
  static const double grid[] = {0.0, 0.0, 0.05, 0.1, 0.2, 0.3, 0.5, 0.5, 0.7, 0.9, 1.0};
  std::vector<Disease> ds;
  std::vector<Finding> fs;
  std::vector<FrequencyEntry> qs;
  for (std::size_t d = 0; d < n_diseases; ++d) ds.push_back({"d" + std::to_string(d), "disease"});
  for (std::size_t f = 0; f < n_findings; ++f) {
    const bool demo = f < demographics;
    fs.push_back({"f" + std::to_string(f), "finding", demo ? FindingKind::demographic : FindingKind::clinical,
                  demo ? std::optional<std::string>("grp") : std::nullopt});
  }
  for (std::size_t d = 0; d < n_diseases; ++d) {
    for (std::size_t f = 0; f < n_findings; ++f) {
      const double v = grid[rng.uniform_int(0, std::size(grid) - 1)];
      if (v > 0.0) qs.push_back({ds[d].id, fs[f].id, v});
    }
  }
  return KnowledgeBase(std::move(ds), std::move(fs), std::move(qs));
}

class TempDir {
 public:
  TempDir() {
    char tmpl[] = "/tmp/ddx-test-XXXXXX";
    path_ = mkdtemp(tmpl);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  std::string file(const std::string& name) const { return (path_ / name).string(); }

 private:
  std::filesystem::path path_;
};

}  // namespace ddx::testing
