#include "dilemma/validate.hpp"

#include <optional>
#include <stdexcept>

#include "dilemma/play.hpp"

namespace dilemma {

namespace {

Strategy RandomOpponent(Rng& rng, int players) {
  switch (rng.Below(5)) {
    case 0: return MakeReference(ReferenceSpec::AllC());
    case 1: return MakeReference(ReferenceSpec::AllD());
    case 2: return MakeReference(ReferenceSpec::Random(rng.Uniform()));
    case 3: return MakeReference(ReferenceSpec::CC(static_cast<int>(rng.Below(players))));
    default: return MakeReference(ReferenceSpec::CD(static_cast<int>(rng.Below(players))));
  }
}

// Fixed opponent line-ups for the first trials: unanimous defection and
// cooperation reach the zero and one edges of every opponent statistic.
std::optional<ReferenceSpec> Scenario(int trial, int players) {
  switch (trial) {
    case 0: return ReferenceSpec::AllD();
    case 1: return ReferenceSpec::AllC();
    case 2: return ReferenceSpec::CC(players - 1);
    case 3: return ReferenceSpec::CD(1);
    default: return std::nullopt;
  }
}

}  // namespace

ValidationReport ValidateStrategy(const Strategy& strategy, const GameParams& params, int trials,
                                  std::uint64_t seed, std::uint64_t step_budget) {
  if (trials < 1) throw std::invalid_argument("validation needs trials >= 1");
  params.Validate();

  ValidationReport report;
  report.label = strategy.label();
  report.trials = trials;
  long cooperations = 0;
  long decisions = 0;

  for (int trial = 0; trial < trials; ++trial) {
    Rng setup(DeriveSeed(seed, {static_cast<std::uint64_t>(trial), 0}));
    const auto seat = static_cast<std::size_t>(setup.Below(static_cast<std::uint64_t>(params.players)));
    std::vector<Strategy> lineup;
    lineup.reserve(static_cast<std::size_t>(params.players));
    const std::optional<ReferenceSpec> scenario = Scenario(trial, params.players);
    for (std::size_t i = 0; i < static_cast<std::size_t>(params.players); ++i) {
      if (i == seat) {
        lineup.push_back(strategy);
      } else if (scenario) {
        lineup.push_back(MakeReference(*scenario));
      } else {
        lineup.push_back(RandomOpponent(setup, params.players));
      }
    }
    const std::uint64_t game_seed = DeriveSeed(seed, {static_cast<std::uint64_t>(trial), 1});

    GameResult first;
    try {
      first = PlayGame(params, lineup, game_seed, step_budget);
    } catch (const StrategyFault& fault) {
      // Reference opponents cannot fault, so the subject is responsible.
      report.faults.push_back(
          {trial, fault.round(), std::string(ToString(fault.kind())), fault.detail()});
      switch (fault.kind()) {
        case FaultKind::kEvaluationTrap: report.no_traps = false; break;
        case FaultKind::kStepBudget: report.within_budget = false; break;
        case FaultKind::kInvalidAction: report.valid_actions = false; break;
      }
      continue;
    }

    try {
      GameResult replay = PlayGame(params, lineup, game_seed, step_budget);
      for (std::size_t t = 0; t < first.rounds.size(); ++t) {
        if (first.rounds[t].actions != replay.rounds[t].actions) {
          report.deterministic = false;
          report.faults.push_back({trial, static_cast<int>(t), "nondeterministic",
                                   "replay with the same seed diverged"});
          break;
        }
      }
    } catch (const StrategyFault& fault) {
      report.deterministic = false;
      report.faults.push_back({trial, fault.round(), "nondeterministic",
                               std::string("replay faulted: ") + fault.detail()});
    }

    for (const RoundRecord& r : first.rounds) {
      cooperations += r.actions[seat] == Action::kCooperate ? 1 : 0;
      ++decisions;
    }
  }
  report.cooperation_rate = decisions > 0 ? static_cast<double>(cooperations) / decisions : 0.0;
  return report;
}

}  // namespace dilemma
