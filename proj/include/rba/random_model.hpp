#pragma once

#include <cstdint>
#include <string>

#include "rba/assembly.hpp"
#include "rba/model.hpp"

namespace rba {

// Deterministic generator state (splitmix64); identical across platforms so
// seeded suites stay reproducible.
struct Rng {
  std::uint64_t state;
  explicit Rng(std::uint64_t seed) : state(seed) {}
  std::uint64_t next_u64();
  double uniform(double lo, double hi);
  long uniform_int(long lo, long hi);  // inclusive
  bool chance(double p);
};

// Knobs for seeded test models. Defaults give desk-scale models with an
// admissible basal composition and a finite maximal growth rate around
// 0.05-1 per hour.
struct RandomModelOptions {
  int min_metabolites = 2;
  int max_metabolites = 4;
  double isoenzyme_chance = 0.35;      // chance a conversion gets two catalysts
  double fixed_metabolite_chance = 0.5;
  int processes = 1;
  double density_slack = 2.0;  // basal density load multiplier kept below caps
};

/// Seeded random model spec (pre-expansion; may contain isoenzymes).
RawModelSpec random_model_spec(std::uint64_t seed, const RandomModelOptions& opts = {});

/// Seeded turnover rates and degradation terms for a compiled model.
TurnoverSpec random_turnover(std::uint64_t seed, const MetabolicModel& model);

/// Serialize a spec back to the model document format (round-trips through
/// load_model).
std::string to_document(const RawModelSpec& spec);

}  // namespace rba
