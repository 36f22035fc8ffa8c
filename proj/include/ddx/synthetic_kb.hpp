#pragma once

#include <cstddef>
#include <cstdint>

#include "ddx/knowledge_base.hpp"

namespace ddx {

// Parameters for a separable toy knowledge base: every disease owns a block
// of findings at high frequency, and links at low frequency to a few
// findings owned by other diseases. Six demographic values form two mutex
// groups (sex: 2 values, age: 4 brackets); some diseases rule out a sex or
// an age bracket.
struct SeparableKbSpec {
  std::size_t diseases = 20;
  std::size_t exclusive_per_disease = 3;
  double exclusive_min = 0.7;
  double exclusive_max = 0.95;
  std::size_t background_per_disease = 6;
  double background_min = 0.02;
  double background_max = 0.15;
  std::uint64_t seed = 0;
};

KnowledgeBase make_separable_kb(const SeparableKbSpec& spec);

}  // namespace ddx
