#ifndef DILEMMA_STRATEGY_HPP
#define DILEMMA_STRATEGY_HPP

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "dilemma/game.hpp"
#include "dilemma/rng.hpp"

namespace dilemma {

inline constexpr std::uint64_t kDefaultStepBudget = 100'000;

// What a player sees before choosing its action for round `round_index`.
// Only completed rounds are visible.
struct Observation {
  const GameParams* params = nullptr;
  int round_index = 0;
  int my_index = 0;
  std::span<const RoundRecord> history;
  std::optional<double> current_stock;  // CPR only

  int players() const { return params->players; }
  int rounds() const { return params->rounds; }
  // Rounds still to be played after the current one.
  int RoundsRemaining() const { return params->rounds - round_index - 1; }
  bool HasHistory() const { return !history.empty(); }

  // Number of opponents that cooperated in the previous round. Requires
  // history.
  int OpponentCooperatorsLastRound() const;
  // Fraction of opponent decisions over all completed rounds that were C.
  // Requires history.
  double OpponentCooperationRate() const;
  std::optional<Action> MyLastAction() const;
};

enum class FaultKind { kEvaluationTrap, kStepBudget, kInvalidAction };

std::string_view ToString(FaultKind kind);

// Raised by a policy while deciding.
class PolicyFault : public std::runtime_error {
 public:
  PolicyFault(FaultKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  FaultKind kind() const { return kind_; }

 private:
  FaultKind kind_;
};

// A policy fault with the context needed to identify the offending strategy.
class StrategyFault : public std::runtime_error {
 public:
  StrategyFault(FaultKind kind, int player, std::string label, int round,
                const std::string& detail);

  FaultKind kind() const { return kind_; }
  int player() const { return player_; }
  const std::string& label() const { return label_; }
  int round() const { return round_; }
  const std::string& detail() const { return detail_; }

 private:
  FaultKind kind_;
  int player_;
  std::string label_;
  int round_;
  std::string detail_;
};

// Counts evaluation steps spent on one decision.
class StepMeter {
 public:
  explicit StepMeter(std::uint64_t limit) : limit_(limit) {}

  void Charge(std::uint64_t steps = 1) {
    used_ += steps;
    if (used_ > limit_) {
      throw PolicyFault(FaultKind::kStepBudget,
                        "step budget of " + std::to_string(limit_) + " exceeded");
    }
  }
  std::uint64_t used() const { return used_; }
  std::uint64_t limit() const { return limit_; }

 private:
  std::uint64_t limit_;
  std::uint64_t used_ = 0;
};

// Per-game decision maker. May keep state between rounds of one game.
class Policy {
 public:
  virtual ~Policy() = default;
  virtual Action Decide(const Observation& obs, Rng& rng, StepMeter& meter) = 0;
};

enum class Origin { kReference, kParametric, kFile };

std::string_view ToString(Origin origin);

// Immutable, cheaply copyable handle to a decision rule. Every game gets a
// fresh Policy from Instantiate(), so no state survives between games.
class Strategy {
 public:
  using Factory = std::function<std::unique_ptr<Policy>()>;

  Strategy(std::string label, Origin origin, Factory factory);

  const std::string& label() const { return impl_->label; }
  Origin origin() const { return impl_->origin; }
  std::unique_ptr<Policy> Instantiate() const { return impl_->factory(); }

  // Identity comparison: true only for copies of the same handle.
  bool operator==(const Strategy& other) const { return impl_ == other.impl_; }

 private:
  struct Impl {
    std::string label;
    Origin origin;
    Factory factory;
  };
  std::shared_ptr<const Impl> impl_;
};

enum class Attitude { kCollective, kExploitative };

std::string_view ToString(Attitude attitude);
Attitude ParseAttitude(std::string_view text);

struct StrategyPool {
  std::string gene_tag;
  Attitude attitude = Attitude::kCollective;
  std::vector<Strategy> members;

  // `count` distinct member indices in random order. Throws
  // std::invalid_argument if the pool is too small.
  std::vector<std::size_t> SampleWithoutReplacement(std::size_t count, Rng& rng) const;
};

// Fixed reference strategies.
struct ReferenceSpec {
  enum class Kind { kAllC, kAllD, kRandom, kCooperateThreshold, kDefectThreshold };
  Kind kind = Kind::kAllC;
  double p = 0.5;     // kRandom
  int threshold = 0;  // CC(t) / CD(t)

  static ReferenceSpec AllC() { return {Kind::kAllC}; }
  static ReferenceSpec AllD() { return {Kind::kAllD}; }
  static ReferenceSpec Random(double p) { return {Kind::kRandom, p}; }
  static ReferenceSpec CC(int t) { return {Kind::kCooperateThreshold, 0.5, t}; }
  static ReferenceSpec CD(int t) { return {Kind::kDefectThreshold, 0.5, t}; }

  // "all_c", "all_d", "rnd:0.25", "cc:2", "cd:1".
  static ReferenceSpec Parse(std::string_view text);
  std::string Name() const;
};

// Builds a reference strategy. When `players` > 0 the CC/CD threshold is also
// checked against the opponent count (t <= players - 1).
Strategy MakeReference(const ReferenceSpec& spec, int players = 0);

// {AllD, Rnd(0.25), Rnd(0.5), Rnd(0.75), AllC, CC(1..n-1), CD(1..n-1)}.
std::vector<ReferenceSpec> DefaultReferenceSet(int players);

// Fisher-Yates shuffle driven by Rng, identical on every platform.
template <typename T>
void Shuffle(std::vector<T>& items, Rng& rng) {
  for (std::size_t i = items.size(); i > 1; --i) {
    const std::size_t j = rng.Below(i);
    std::swap(items[i - 1], items[j]);
  }
}

}  // namespace dilemma

#endif  // DILEMMA_STRATEGY_HPP
