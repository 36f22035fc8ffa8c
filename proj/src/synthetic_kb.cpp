#include "ddx/synthetic_kb.hpp"

#include <algorithm>
#include <cstdio>
#include <numeric>

#include "ddx/error.hpp"
#include "ddx/random.hpp"

namespace ddx {

namespace {

std::string numbered(const char* prefix, std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%s%02zu", prefix, i);
  return buf;
}

}  // namespace

KnowledgeBase make_separable_kb(const SeparableKbSpec& spec) {
  if (spec.diseases < 1 || spec.exclusive_per_disease < 1) throw Error("separable KB needs diseases and findings");
  if (spec.background_per_disease > (spec.diseases - 1) * spec.exclusive_per_disease) {
    throw Error("too many background links for the number of foreign findings");
  }
  Rng rng(derive_seed(spec.seed));
  const auto between = [&](double lo, double hi) { return lo + (hi - lo) * rng.uniform(); };

  std::vector<Disease> diseases;
  std::vector<Finding> findings;
  std::vector<FrequencyEntry> freqs;

  const std::pair<const char*, const char*> demographics[] = {
      {"sex_female", "sex"},       {"sex_male", "sex"},       {"age_child", "age"},
      {"age_young_adult", "age"},  {"age_middle", "age"},     {"age_senior", "age"}};
  for (const auto& [id, group] : demographics) {
    findings.push_back({id, id, FindingKind::demographic, std::string(group)});
  }

  const auto n_clinical = spec.diseases * spec.exclusive_per_disease;
  for (std::size_t f = 0; f < n_clinical; ++f) {
    const auto id = numbered("finding_", f / spec.exclusive_per_disease) + "_" + std::to_string(f % spec.exclusive_per_disease);
    findings.push_back({id, id, FindingKind::clinical, std::nullopt});
  }

  for (std::size_t d = 0; d < spec.diseases; ++d) {
    const auto id = numbered("disease_", d);
    diseases.push_back({id, id});

    // Sex: every fifth disease is female-only, the next one male-only.
    freqs.push_back({id, "sex_female", d % 5 == 1 ? 0.0 : 0.5});
    freqs.push_back({id, "sex_male", d % 5 == 0 ? 0.0 : 0.5});
    freqs.push_back({id, "age_child", d % 4 == 0 ? 0.0 : between(0.1, 0.3)});
    freqs.push_back({id, "age_young_adult", between(0.2, 0.4)});
    freqs.push_back({id, "age_middle", between(0.2, 0.4)});
    freqs.push_back({id, "age_senior", d % 7 == 3 ? 0.0 : between(0.1, 0.3)});

    for (std::size_t j = 0; j < spec.exclusive_per_disease; ++j) {
      const auto& f = findings[6 + d * spec.exclusive_per_disease + j].id;
      freqs.push_back({id, f, between(spec.exclusive_min, spec.exclusive_max)});
    }

    std::vector<std::size_t> foreign;
    for (std::size_t f = 0; f < n_clinical; ++f) {
      if (f / spec.exclusive_per_disease != d) foreign.push_back(f);
    }
    rng.shuffle(std::span(foreign));
    foreign.resize(spec.background_per_disease);
    std::sort(foreign.begin(), foreign.end());
    for (const auto f : foreign) {
      freqs.push_back({id, findings[6 + f].id, between(spec.background_min, spec.background_max)});
    }
  }
  // Zero entries are kept in the table; they mean "never observed".
  return KnowledgeBase(std::move(diseases), std::move(findings), std::move(freqs));
}

}  // namespace ddx
