#ifndef DILEMMA_SYNTH_HPP
#define DILEMMA_SYNTH_HPP

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "dilemma/strategy.hpp"

namespace dilemma {

// Parametric strategy families used to synthesize pools offline.
//
//   all_c, all_d       constant
//   random             C with probability p                       p in [0,1]
//   cc, cd             reference CC(t) / CD(t)                   t integer
//   reciprocator       opens C; C if last-round opponent cooperation
//                      >= threshold, otherwise C with prob forgiveness
//   grim_trigger       C until some round's opponent defection fraction
//                      exceeds tolerance, then D forever
//   endgame            opens C; D in the final `horizon` rounds; otherwise
//                      reciprocates with `threshold`
//   stock_guardian     opens C; C when stock fraction < low_stock or when
//                      last-round opponent cooperation >= threshold
//   rota               assumes player i should cooperate in round t iff
//                      (i + t) % period == 0; follows that schedule and
//                      defects for `punish` rounds after any opponent skips
//                      a scheduled cooperation
enum class Family {
  kAllC,
  kAllD,
  kRandom,
  kCooperateThreshold,
  kDefectThreshold,
  kReciprocator,
  kGrimTrigger,
  kEndgame,
  kStockGuardian,
  kRota,
};

std::string_view ToString(Family family);
Family ParseFamily(std::string_view name);

struct ParamRange {
  double lo = 0.0;
  double hi = 0.0;
};

struct FamilySpec {
  Family family = Family::kAllC;
  double weight = 1.0;
  // Overrides of the family's default parameter ranges, keyed by name.
  std::map<std::string, ParamRange> ranges;

  // {"family": "reciprocator", "weight": 2, "threshold": [0.3, 0.7],
  //  "forgiveness": 0.1}
  static FamilySpec FromJson(const nlohmann::json& j);
};

// Default range of every parameter a family accepts.
std::map<std::string, ParamRange> DefaultRanges(Family family);

// Draws one strategy from `spec`. `index` only feeds the label.
Strategy SampleFamilyMember(const FamilySpec& spec, Rng& rng, std::size_t index);

// `size` strategies, each from a family chosen in proportion to weight.
// Reproducible given seed.
StrategyPool SynthPool(const std::vector<FamilySpec>& families, std::size_t size,
                       std::uint64_t seed, std::string gene_tag = "synthetic",
                       Attitude attitude = Attitude::kCollective);

}  // namespace dilemma

#endif  // DILEMMA_SYNTH_HPP
