#include "dilemma/play.hpp"

#include <memory>
#include <string>
#include <vector>

namespace dilemma {

GameResult PlayGame(const GameParams& params, std::span<const Strategy> strategies,
                    std::uint64_t seed, std::uint64_t step_budget) {
  params.Validate();
  const auto n = static_cast<std::size_t>(params.players);
  if (strategies.size() != n) {
    throw std::invalid_argument("game needs " + std::to_string(n) + " strategies, got " +
                                std::to_string(strategies.size()));
  }

  std::vector<std::unique_ptr<Policy>> policies;
  std::vector<Rng> streams;
  policies.reserve(n);
  streams.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    policies.push_back(strategies[i].Instantiate());
    streams.emplace_back(DeriveSeed(seed, {i}));
  }

  GameResult result;
  result.rounds.reserve(static_cast<std::size_t>(params.rounds));
  double stock = params.capacity;

  for (int t = 0; t < params.rounds; ++t) {
    RoundRecord record;
    record.actions.resize(n);
    Observation obs;
    obs.params = &params;
    obs.round_index = t;
    obs.history = result.rounds;
    if (params.kind == GameKind::kCommonPool) obs.current_stock = stock;

    for (std::size_t i = 0; i < n; ++i) {
      obs.my_index = static_cast<int>(i);
      StepMeter meter(step_budget);
      Action a;
      try {
        a = policies[i]->Decide(obs, streams[i], meter);
      } catch (const PolicyFault& fault) {
        throw StrategyFault(fault.kind(), static_cast<int>(i), strategies[i].label(), t,
                            fault.what());
      } catch (const std::exception& e) {
        throw StrategyFault(FaultKind::kEvaluationTrap, static_cast<int>(i),
                            strategies[i].label(), t, e.what());
      }
      if (!IsValid(a)) {
        throw StrategyFault(FaultKind::kInvalidAction, static_cast<int>(i),
                            strategies[i].label(), t,
                            "returned action code " + std::to_string(static_cast<int>(a)));
      }
      record.actions[i] = a;
    }

    ScoreRound(params, record, stock);
    result.rounds.push_back(std::move(record));
  }

  result.totals.assign(n, 0.0);
  for (const RoundRecord& r : result.rounds) {
    for (std::size_t i = 0; i < n; ++i) result.totals[i] += r.payoffs[i];
  }
  result.normalized.resize(n);
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    result.normalized[i] = result.totals[i] / params.rounds;
    sum += result.totals[i];
  }
  result.mean_welfare = sum / (static_cast<double>(n) * params.rounds);
  return result;
}

}  // namespace dilemma
