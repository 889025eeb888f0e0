#include "dilemma/game.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace dilemma {

std::string_view ToString(GameKind kind) {
  switch (kind) {
    case GameKind::kPublicGoods: return "pgg";
    case GameKind::kCollectiveRisk: return "crd";
    case GameKind::kCommonPool: return "cpr";
  }
  throw std::logic_error("unknown GameKind");
}

GameKind ParseGameKind(std::string_view text) {
  if (text == "pgg" || text == "public_goods") return GameKind::kPublicGoods;
  if (text == "crd" || text == "collective_risk") return GameKind::kCollectiveRisk;
  if (text == "cpr" || text == "common_pool") return GameKind::kCommonPool;
  throw std::invalid_argument("unknown game '" + std::string(text) +
                              "' (expected pgg, crd or cpr)");
}

GameParams GameParams::Defaults(GameKind kind, int players, int rounds, double k) {
  GameParams p;
  p.kind = kind;
  p.players = players;
  p.rounds = rounds;
  p.k = k;
  p.threshold = players / 2;
  p.capacity = 4.0 * players;
  return p;
}

void GameParams::Validate() const {
  if (players < 2) throw std::invalid_argument("players must be >= 2");
  if (rounds < 1) throw std::invalid_argument("rounds must be >= 1");
  if (!std::isfinite(k)) throw std::invalid_argument("k must be finite");
  switch (kind) {
    case GameKind::kPublicGoods:
      if (!(k > 1.0 && k < players)) {
        throw std::invalid_argument("public goods game requires 1 < k < n (k=" +
                                    std::to_string(k) + ", n=" +
                                    std::to_string(players) + ")");
      }
      break;
    case GameKind::kCollectiveRisk:
      if (threshold < 1 || threshold > players) {
        throw std::invalid_argument("collective risk dilemma requires 1 <= m <= n (m=" +
                                    std::to_string(threshold) + ")");
      }
      break;
    case GameKind::kCommonPool:
      if (!(capacity > 0.0) || !std::isfinite(capacity)) {
        throw std::invalid_argument("common pool resource requires capacity > 0");
      }
      break;
  }
}

int CountCooperators(std::span<const Action> actions) {
  return static_cast<int>(std::count(actions.begin(), actions.end(), Action::kCooperate));
}

namespace {

void CheckLength(std::span<const Action> actions, const GameParams& params) {
  if (static_cast<int>(actions.size()) != params.players) {
    throw std::invalid_argument("expected " + std::to_string(params.players) +
                                " actions, got " + std::to_string(actions.size()));
  }
}

void CheckKind(const GameParams& params, GameKind kind) {
  if (params.kind != kind) {
    throw std::invalid_argument("parameters are for " + std::string(ToString(params.kind)) +
                                ", not " + std::string(ToString(kind)));
  }
}

double DefectBonus(Action a) { return a == Action::kDefect ? 1.0 : 0.0; }

}  // namespace

std::vector<double> PublicGoodsPayoffs(std::span<const Action> actions,
                                       const GameParams& params) {
  CheckKind(params, GameKind::kPublicGoods);
  params.Validate();
  CheckLength(actions, params);
  const double share = CountCooperators(actions) * params.k / params.players;
  std::vector<double> payoffs(actions.size());
  for (std::size_t i = 0; i < actions.size(); ++i) payoffs[i] = share + DefectBonus(actions[i]);
  return payoffs;
}

std::vector<double> CollectiveRiskPayoffs(std::span<const Action> actions,
                                          const GameParams& params) {
  CheckKind(params, GameKind::kCollectiveRisk);
  params.Validate();
  CheckLength(actions, params);
  const double benefit = CountCooperators(actions) >= params.threshold ? params.k : 0.0;
  std::vector<double> payoffs(actions.size());
  for (std::size_t i = 0; i < actions.size(); ++i) payoffs[i] = benefit + DefectBonus(actions[i]);
  return payoffs;
}

double CommonPoolGrowth(double remaining, double capacity) {
  return std::min(remaining + 2.0 * remaining * (1.0 - remaining / capacity), capacity);
}

CommonPoolStep CommonPoolRound(std::span<const Action> actions, double stock,
                               const GameParams& params) {
  CheckKind(params, GameKind::kCommonPool);
  params.Validate();
  CheckLength(actions, params);
  if (!(stock >= 0.0 && stock <= params.capacity)) {
    throw std::invalid_argument("stock " + std::to_string(stock) + " outside [0, " +
                                std::to_string(params.capacity) + "]");
  }
  const int n = params.players;
  const int cooperators = CountCooperators(actions);
  const double share = stock / (2.0 * n);

  CommonPoolStep step;
  step.payoffs.resize(actions.size());
  for (std::size_t i = 0; i < actions.size(); ++i) {
    step.payoffs[i] = share + share * DefectBonus(actions[i]);
  }
  step.remaining = stock * cooperators / (2.0 * n);
  step.next_stock = CommonPoolGrowth(step.remaining, params.capacity);
  return step;
}

void ScoreRound(const GameParams& params, RoundRecord& record, double& stock) {
  record.cooperators = CountCooperators(record.actions);
  switch (params.kind) {
    case GameKind::kPublicGoods:
      record.payoffs = PublicGoodsPayoffs(record.actions, params);
      break;
    case GameKind::kCollectiveRisk:
      record.payoffs = CollectiveRiskPayoffs(record.actions, params);
      break;
    case GameKind::kCommonPool: {
      CommonPoolStep step = CommonPoolRound(record.actions, stock, params);
      record.payoffs = std::move(step.payoffs);
      record.stock_before = stock;
      record.stock_after = step.next_stock;
      stock = step.next_stock;
      break;
    }
  }
}

double RoundWelfare(const GameParams& params, int cooperators, double stock) {
  const int n = params.players;
  const double defectors = n - cooperators;
  switch (params.kind) {
    case GameKind::kPublicGoods:
      return cooperators * params.k / n + defectors / n;
    case GameKind::kCollectiveRisk:
      return (cooperators >= params.threshold ? params.k : 0.0) + defectors / n;
    case GameKind::kCommonPool:
      // n_c * S/(2n) + (n - n_c) * S/n, averaged over n players.
      return stock * (2.0 * n - cooperators) / (2.0 * n * n);
  }
  throw std::logic_error("unknown GameKind");
}

namespace {

struct CprSearch {
  const GameParams& params;
  double best_min = std::numeric_limits<double>::infinity();
  double best_max = -std::numeric_limits<double>::infinity();

  void Visit(int depth, double stock, double accumulated) {
    if (depth == params.rounds) {
      best_min = std::min(best_min, accumulated);
      best_max = std::max(best_max, accumulated);
      return;
    }
    const int n = params.players;
    for (int c = 0; c <= n; ++c) {
      const double remaining = stock * c / (2.0 * n);
      Visit(depth + 1, CommonPoolGrowth(remaining, params.capacity),
            accumulated + RoundWelfare(params, c, stock));
    }
  }
};

// Beam over count sequences: at each depth, successor states are binned by
// stock level and each bin keeps its best accumulated welfare.
double CprBeam(const GameParams& params, int width, bool maximize) {
  struct State {
    double stock;
    double accumulated;
    bool used;
  };
  const int n = params.players;
  std::vector<State> beam{{params.capacity, 0.0, true}};
  std::vector<State> next(static_cast<std::size_t>(width));
  for (int depth = 0; depth < params.rounds; ++depth) {
    std::fill(next.begin(), next.end(), State{0.0, 0.0, false});
    for (const State& s : beam) {
      if (!s.used) continue;
      for (int c = 0; c <= n; ++c) {
        const double stock = CommonPoolGrowth(s.stock * c / (2.0 * n), params.capacity);
        const double acc = s.accumulated + RoundWelfare(params, c, s.stock);
        auto bin = static_cast<std::size_t>(stock / params.capacity * (width - 1) + 0.5);
        bin = std::min(bin, static_cast<std::size_t>(width - 1));
        State& slot = next[bin];
        if (!slot.used || (maximize ? acc > slot.accumulated : acc < slot.accumulated)) {
          slot = {stock, acc, true};
        }
      }
    }
    beam.swap(next);
    next.resize(static_cast<std::size_t>(width));
  }
  double best = maximize ? -std::numeric_limits<double>::infinity()
                         : std::numeric_limits<double>::infinity();
  for (const State& s : beam) {
    if (!s.used) continue;
    best = maximize ? std::max(best, s.accumulated) : std::min(best, s.accumulated);
  }
  return best;
}

bool ExhaustiveFits(int players, int rounds, std::uint64_t budget) {
  std::uint64_t total = 1;
  for (int t = 0; t < rounds; ++t) {
    if (total > budget / static_cast<std::uint64_t>(players + 1)) return false;
    total *= static_cast<std::uint64_t>(players + 1);
  }
  return total <= budget;
}

}  // namespace

WelfareBounds ComputeWelfareBounds(const GameParams& params, const BoundsOptions& options) {
  params.Validate();
  WelfareBounds bounds;
  if (params.kind != GameKind::kCommonPool) {
    // Payoffs are round-separable, so the per-round extremes are the answer.
    bounds.min_mean = std::numeric_limits<double>::infinity();
    bounds.max_mean = -std::numeric_limits<double>::infinity();
    for (int c = 0; c <= params.players; ++c) {
      const double w = RoundWelfare(params, c);
      bounds.min_mean = std::min(bounds.min_mean, w);
      bounds.max_mean = std::max(bounds.max_mean, w);
    }
    return bounds;
  }

  if (ExhaustiveFits(params.players, params.rounds, options.exhaustive_budget)) {
    CprSearch search{params};
    search.Visit(0, params.capacity, 0.0);
    bounds.min_mean = search.best_min / params.rounds;
    bounds.max_mean = search.best_max / params.rounds;
    return bounds;
  }
  if (options.beam_width < 2) throw std::invalid_argument("beam_width must be >= 2");
  bounds.min_mean = CprBeam(params, options.beam_width, false) / params.rounds;
  bounds.max_mean = CprBeam(params, options.beam_width, true) / params.rounds;
  bounds.approximate = true;
  return bounds;
}

}  // namespace dilemma
