#ifndef DILEMMA_FINGERPRINT_HPP
#define DILEMMA_FINGERPRINT_HPP

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "dilemma/game.hpp"
#include "dilemma/strategy.hpp"

namespace dilemma {

// An opponent history up to some round, with opponents reduced to a count of
// cooperators per round (players are exchangeable).
struct DecisionNode {
  std::vector<int> opponent_cooperators;

  int depth() const { return static_cast<int>(opponent_cooperators.size()); }
  // "root" for the empty history, otherwise counts joined by '.', e.g. "3.0".
  std::string Name() const;
};

// One node per opponent-count history of length 0..rounds-1, breadth-first
// and lexicographic within a depth. There are sum_{t<rounds} players^t nodes.
std::vector<DecisionNode> EnumerateNodes(int players = 4, int rounds = 5);

// Cooperation rate per node, in node order.
using FeatureVector = std::vector<double>;

struct FingerprintOptions {
  int rollouts = 50;
  std::uint64_t seed = 0;
  std::uint64_t step_budget = kDefaultStepBudget;
};

// For each node, replays the node's opponent history `rollouts` times while
// the strategy (seated as player 0) plays its own moves, and records how
// often it cooperates at the node's round. Opponent seats are ordered at
// random per replay and the first c in that order cooperate, so identities
// stay consistent within a replay. The CPR stock follows the forced counts
// plus the subject's own actions.
//
// A strategy fault is rethrown as StrategyFault whose detail names the node.
FeatureVector Fingerprint(const Strategy& strategy, const GameParams& params,
                          std::span<const DecisionNode> nodes,
                          const FingerprintOptions& options = {});

}  // namespace dilemma

#endif  // DILEMMA_FINGERPRINT_HPP
