#ifndef DILEMMA_GAME_HPP
#define DILEMMA_GAME_HPP

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace dilemma {

enum class GameKind { kPublicGoods, kCollectiveRisk, kCommonPool };

// "pgg", "crd", "cpr".
std::string_view ToString(GameKind kind);
GameKind ParseGameKind(std::string_view text);

enum class Action : std::uint8_t { kDefect = 0, kCooperate = 1 };

inline char ToChar(Action a) { return a == Action::kCooperate ? 'C' : 'D'; }
inline bool IsValid(Action a) {
  return a == Action::kCooperate || a == Action::kDefect;
}

// Parameters of one iterated game. `k` is the PGG multiplication factor or
// the CRD collective benefit; the CPR carrying capacity is a separate field.
struct GameParams {
  GameKind kind = GameKind::kPublicGoods;
  int players = 4;
  int rounds = 20;
  double k = 2.0;
  int threshold = 2;       // CRD: cooperators needed (m)
  double capacity = 16.0;  // CPR: carrying capacity, also the initial stock

  // m = floor(n/2) and capacity = 4n.
  static GameParams Defaults(GameKind kind, int players, int rounds = 20,
                             double k = 2.0);

  // Throws std::invalid_argument naming the violated constraint.
  void Validate() const;
};

struct RoundRecord {
  std::vector<Action> actions;
  std::vector<double> payoffs;
  int cooperators = 0;
  std::optional<double> stock_before;  // CPR only
  std::optional<double> stock_after;   // CPR only
};

struct GameResult {
  std::vector<RoundRecord> rounds;
  std::vector<double> totals;
  std::vector<double> normalized;  // totals / rounds
  double mean_welfare = 0.0;       // sum(totals) / (players * rounds)
};

int CountCooperators(std::span<const Action> actions);

// n_c * k / n, plus 1 for defectors.
std::vector<double> PublicGoodsPayoffs(std::span<const Action> actions,
                                       const GameParams& params);

// k + defect indicator when n_c >= m, otherwise the defect indicator alone.
std::vector<double> CollectiveRiskPayoffs(std::span<const Action> actions,
                                          const GameParams& params);

struct CommonPoolStep {
  std::vector<double> payoffs;
  double remaining = 0.0;   // stock left after extraction
  double next_stock = 0.0;  // after regrowth, capped at capacity
};

// Cooperators take stock/(2n), defectors stock/n; the remainder regrows
// logistically: next = min(S' + 2 S' (1 - S'/capacity), capacity).
CommonPoolStep CommonPoolRound(std::span<const Action> actions, double stock,
                               const GameParams& params);

double CommonPoolGrowth(double remaining, double capacity);

// Mean per-player payoff of one round with `cooperators` cooperators. For
// CPR the round's stock must be supplied.
double RoundWelfare(const GameParams& params, int cooperators,
                    double stock = 0.0);

// Fills cooperators and payoffs of `record` from its actions. For CPR also
// records the stock before/after and advances `stock`.
void ScoreRound(const GameParams& params, RoundRecord& record, double& stock);

struct WelfareBounds {
  double min_mean = 0.0;
  double max_mean = 0.0;
  bool approximate = false;
};

struct BoundsOptions {
  // CPR: exhaustive search when (n+1)^r does not exceed this.
  std::uint64_t exhaustive_budget = 1'000'000;
  // CPR: number of stock buckets kept per depth by the beam search.
  int beam_width = 1024;
};

// Minimum and maximum achievable mean normalized payoff over all joint action
// sequences.
WelfareBounds ComputeWelfareBounds(const GameParams& params,
                                   const BoundsOptions& options = {});

}  // namespace dilemma

#endif  // DILEMMA_GAME_HPP
