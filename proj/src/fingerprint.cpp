#include "dilemma/fingerprint.hpp"

#include <stdexcept>

namespace dilemma {

std::string DecisionNode::Name() const {
  if (opponent_cooperators.empty()) return "root";
  std::string name;
  for (std::size_t i = 0; i < opponent_cooperators.size(); ++i) {
    if (i) name += '.';
    name += std::to_string(opponent_cooperators[i]);
  }
  return name;
}

std::vector<DecisionNode> EnumerateNodes(int players, int rounds) {
  if (players < 2) throw std::invalid_argument("fingerprint nodes need players >= 2");
  if (rounds < 1) throw std::invalid_argument("fingerprint nodes need rounds >= 1");
  std::vector<DecisionNode> nodes{DecisionNode{}};
  std::size_t level_begin = 0;
  for (int depth = 1; depth < rounds; ++depth) {
    const std::size_t level_end = nodes.size();
    for (std::size_t i = level_begin; i < level_end; ++i) {
      for (int c = 0; c < players; ++c) {
        DecisionNode child = nodes[i];
        child.opponent_cooperators.push_back(c);
        nodes.push_back(std::move(child));
      }
    }
    level_begin = level_end;
  }
  return nodes;
}

FeatureVector Fingerprint(const Strategy& strategy, const GameParams& params,
                          std::span<const DecisionNode> nodes, const FingerprintOptions& options) {
  params.Validate();
  if (options.rollouts < 1) throw std::invalid_argument("fingerprint needs rollouts >= 1");
  const auto n = static_cast<std::size_t>(params.players);

  FeatureVector features(nodes.size(), 0.0);
  std::vector<std::size_t> opponents(n - 1);
  std::vector<RoundRecord> history;

  for (std::size_t node_index = 0; node_index < nodes.size(); ++node_index) {
    const DecisionNode& node = nodes[node_index];
    if (node.depth() >= params.rounds) {
      throw std::invalid_argument("node " + node.Name() + " is deeper than the game");
    }
    for (int c : node.opponent_cooperators) {
      if (c < 0 || c > params.players - 1) {
        throw std::invalid_argument("node " + node.Name() + " has an impossible count");
      }
    }

    int cooperated = 0;
    for (int replay = 0; replay < options.rollouts; ++replay) {
      Rng seating(DeriveSeed(options.seed, {node_index, static_cast<std::uint64_t>(replay), 0}));
      Rng stream(DeriveSeed(options.seed, {node_index, static_cast<std::uint64_t>(replay), 1}));
      for (std::size_t i = 0; i < opponents.size(); ++i) opponents[i] = i + 1;
      Shuffle(opponents, seating);

      std::unique_ptr<Policy> policy = strategy.Instantiate();
      history.clear();
      double stock = params.capacity;
      for (int t = 0; t <= node.depth(); ++t) {
        Observation obs;
        obs.params = &params;
        obs.round_index = t;
        obs.my_index = 0;
        obs.history = history;
        if (params.kind == GameKind::kCommonPool) obs.current_stock = stock;

        StepMeter meter(options.step_budget);
        Action a;
        try {
          a = policy->Decide(obs, stream, meter);
        } catch (const PolicyFault& fault) {
          throw StrategyFault(fault.kind(), 0, strategy.label(), t,
                              "at fingerprint node " + node.Name() + ": " + fault.what());
        } catch (const std::exception& e) {
          throw StrategyFault(FaultKind::kEvaluationTrap, 0, strategy.label(), t,
                              "at fingerprint node " + node.Name() + ": " + e.what());
        }
        if (!IsValid(a)) {
          throw StrategyFault(FaultKind::kInvalidAction, 0, strategy.label(), t,
                              "at fingerprint node " + node.Name());
        }
        if (t == node.depth()) {
          cooperated += a == Action::kCooperate ? 1 : 0;
          break;
        }

        RoundRecord record;
        record.actions.assign(n, Action::kDefect);
        record.actions[0] = a;
        const int forced = node.opponent_cooperators[static_cast<std::size_t>(t)];
        for (int j = 0; j < forced; ++j) record.actions[opponents[static_cast<std::size_t>(j)]] = Action::kCooperate;
        ScoreRound(params, record, stock);
        history.push_back(std::move(record));
      }
    }
    features[node_index] = static_cast<double>(cooperated) / options.rollouts;
  }
  return features;
}

}  // namespace dilemma
