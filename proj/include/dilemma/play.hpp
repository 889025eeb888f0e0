#ifndef DILEMMA_PLAY_HPP
#define DILEMMA_PLAY_HPP

#include <cstdint>
#include <span>

#include "dilemma/game.hpp"
#include "dilemma/strategy.hpp"

namespace dilemma {

// Plays one iterated game. Moves are simultaneous: every player decides
// round t from the same completed history before any round-t action is
// recorded. Player i draws randomness from its own stream derived from
// (seed, i), so the result is a pure function of the arguments.
//
// Throws StrategyFault when a policy traps, overruns `step_budget` or
// returns something other than C/D.
GameResult PlayGame(const GameParams& params, std::span<const Strategy> strategies,
                    std::uint64_t seed, std::uint64_t step_budget = kDefaultStepBudget);

}  // namespace dilemma

#endif  // DILEMMA_PLAY_HPP
