#ifndef DILEMMA_VALIDATE_HPP
#define DILEMMA_VALIDATE_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "dilemma/game.hpp"
#include "dilemma/strategy.hpp"

namespace dilemma {

struct ValidationFault {
  int trial = 0;
  int round = 0;
  // "evaluation_trap", "step_budget", "invalid_action" or "nondeterministic".
  std::string check;
  std::string message;
};

// Admission gate for a strategy. Failures are recorded, never thrown.
struct ValidationReport {
  std::string label;
  int trials = 0;
  bool valid_actions = true;     // only ever returned C or D
  bool within_budget = true;     // never overran the step budget
  bool no_traps = true;          // evaluation never trapped
  bool deterministic = true;     // replaying a trial seed reproduced it
  double cooperation_rate = 0.0; // over all decisions of completed trials
  std::vector<ValidationFault> faults;

  bool passed() const { return valid_actions && within_budget && no_traps && deterministic; }
};

// Plays `trials` games of `params` with the subject at a random seat. The
// first four trials seat unanimous A-D, A-C, CC(n-1) and CD(1) opponents;
// later trials draw each opponent from A-C, A-D, Rnd(p), CC(t) and CD(t)
// with random parameters. Each trial is replayed once with the same
// seed to check determinism.
ValidationReport ValidateStrategy(const Strategy& strategy, const GameParams& params, int trials,
                                  std::uint64_t seed,
                                  std::uint64_t step_budget = kDefaultStepBudget);

}  // namespace dilemma

#endif  // DILEMMA_VALIDATE_HPP
