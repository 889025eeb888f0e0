#include "dilemma/strategy.hpp"

#include <charconv>
#include <cmath>
#include <sstream>

namespace dilemma {

int Observation::OpponentCooperatorsLastRound() const {
  const RoundRecord& last = history.back();
  const int mine = last.actions[static_cast<std::size_t>(my_index)] == Action::kCooperate ? 1 : 0;
  return last.cooperators - mine;
}

double Observation::OpponentCooperationRate() const {
  long total = 0;
  const auto me = static_cast<std::size_t>(my_index);
  for (const RoundRecord& r : history) {
    total += r.cooperators - (r.actions[me] == Action::kCooperate ? 1 : 0);
  }
  return static_cast<double>(total) /
         (static_cast<double>(history.size()) * (params->players - 1));
}

std::optional<Action> Observation::MyLastAction() const {
  if (history.empty()) return std::nullopt;
  return history.back().actions[static_cast<std::size_t>(my_index)];
}

std::string_view ToString(FaultKind kind) {
  switch (kind) {
    case FaultKind::kEvaluationTrap: return "evaluation_trap";
    case FaultKind::kStepBudget: return "step_budget";
    case FaultKind::kInvalidAction: return "invalid_action";
  }
  return "unknown";
}

StrategyFault::StrategyFault(FaultKind kind, int player, std::string label, int round,
                             const std::string& detail)
    : std::runtime_error("strategy '" + label + "' (player " + std::to_string(player) +
                         ", round " + std::to_string(round) + "): " +
                         std::string(ToString(kind)) + ": " + detail),
      kind_(kind),
      player_(player),
      label_(std::move(label)),
      round_(round),
      detail_(detail) {}

std::string_view ToString(Origin origin) {
  switch (origin) {
    case Origin::kReference: return "reference";
    case Origin::kParametric: return "parametric";
    case Origin::kFile: return "file";
  }
  return "unknown";
}

Strategy::Strategy(std::string label, Origin origin, Factory factory)
    : impl_(std::make_shared<const Impl>(Impl{std::move(label), origin, std::move(factory)})) {
  if (!impl_->factory) throw std::invalid_argument("strategy needs a policy factory");
}

std::string_view ToString(Attitude attitude) {
  return attitude == Attitude::kCollective ? "collective" : "exploitative";
}

Attitude ParseAttitude(std::string_view text) {
  if (text == "collective" || text == "Collective") return Attitude::kCollective;
  if (text == "exploitative" || text == "Exploitative") return Attitude::kExploitative;
  throw std::invalid_argument("unknown attitude '" + std::string(text) +
                              "' (expected collective or exploitative)");
}

std::vector<std::size_t> StrategyPool::SampleWithoutReplacement(std::size_t count,
                                                                Rng& rng) const {
  if (count > members.size()) {
    throw std::invalid_argument("pool '" + gene_tag + "/" + std::string(ToString(attitude)) +
                                "' has " + std::to_string(members.size()) +
                                " members, cannot draw " + std::to_string(count));
  }
  // Partial Fisher-Yates over an index table.
  std::vector<std::size_t> index(members.size());
  for (std::size_t i = 0; i < index.size(); ++i) index[i] = i;
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t j = i + rng.Below(index.size() - i);
    std::swap(index[i], index[j]);
  }
  index.resize(count);
  return index;
}

namespace {

class ConstantPolicy final : public Policy {
 public:
  explicit ConstantPolicy(Action a) : action_(a) {}
  Action Decide(const Observation&, Rng&, StepMeter& meter) override {
    meter.Charge();
    return action_;
  }

 private:
  Action action_;
};

class RandomPolicy final : public Policy {
 public:
  explicit RandomPolicy(double p) : p_(p) {}
  Action Decide(const Observation&, Rng& rng, StepMeter& meter) override {
    meter.Charge();
    return rng.Bernoulli(p_) ? Action::kCooperate : Action::kDefect;
  }

 private:
  double p_;
};

// CC(t): opens with C, then C iff >= t opponents cooperated last round.
// CD(t): opens with D, then D iff >= t opponents cooperated last round.
class ThresholdPolicy final : public Policy {
 public:
  ThresholdPolicy(int threshold, Action opening) : threshold_(threshold), opening_(opening) {}
  Action Decide(const Observation& obs, Rng&, StepMeter& meter) override {
    meter.Charge();
    if (!obs.HasHistory()) return opening_;
    const bool met = obs.OpponentCooperatorsLastRound() >= threshold_;
    if (opening_ == Action::kCooperate) return met ? Action::kCooperate : Action::kDefect;
    return met ? Action::kDefect : Action::kCooperate;
  }

 private:
  int threshold_;
  Action opening_;
};

std::string FormatProbability(double p) {
  std::ostringstream out;
  out << p;
  return out.str();
}

}  // namespace

ReferenceSpec ReferenceSpec::Parse(std::string_view text) {
  if (text == "all_c" || text == "A-C") return AllC();
  if (text == "all_d" || text == "A-D") return AllD();
  const auto colon = text.find(':');
  if (colon == std::string_view::npos) {
    throw std::invalid_argument("unknown reference strategy '" + std::string(text) + "'");
  }
  const std::string_view head = text.substr(0, colon);
  const std::string_view arg = text.substr(colon + 1);
  auto bad = [&] {
    return std::invalid_argument("malformed reference strategy '" + std::string(text) + "'");
  };
  if (head == "rnd") {
    double p = 0.0;
    // from_chars for double is available in libstdc++ 11.
    auto [ptr, ec] = std::from_chars(arg.data(), arg.data() + arg.size(), p);
    if (ec != std::errc() || ptr != arg.data() + arg.size()) throw bad();
    return Random(p);
  }
  if (head == "cc" || head == "cd") {
    int t = 0;
    auto [ptr, ec] = std::from_chars(arg.data(), arg.data() + arg.size(), t);
    if (ec != std::errc() || ptr != arg.data() + arg.size()) throw bad();
    return head == "cc" ? CC(t) : CD(t);
  }
  throw bad();
}

std::string ReferenceSpec::Name() const {
  switch (kind) {
    case Kind::kAllC: return "A-C";
    case Kind::kAllD: return "A-D";
    case Kind::kRandom: return "Rnd(" + FormatProbability(p) + ")";
    case Kind::kCooperateThreshold: return "CC(" + std::to_string(threshold) + ")";
    case Kind::kDefectThreshold: return "CD(" + std::to_string(threshold) + ")";
  }
  return "?";
}

Strategy MakeReference(const ReferenceSpec& spec, int players) {
  using Kind = ReferenceSpec::Kind;
  switch (spec.kind) {
    case Kind::kAllC:
      return Strategy(spec.Name(), Origin::kReference,
                      [] { return std::make_unique<ConstantPolicy>(Action::kCooperate); });
    case Kind::kAllD:
      return Strategy(spec.Name(), Origin::kReference,
                      [] { return std::make_unique<ConstantPolicy>(Action::kDefect); });
    case Kind::kRandom: {
      if (!(spec.p >= 0.0 && spec.p <= 1.0)) {
        throw std::invalid_argument("Rnd(p) requires p in [0, 1]");
      }
      const double p = spec.p;
      return Strategy(spec.Name(), Origin::kReference,
                      [p] { return std::make_unique<RandomPolicy>(p); });
    }
    case Kind::kCooperateThreshold:
    case Kind::kDefectThreshold: {
      if (spec.threshold < 0 || (players > 0 && spec.threshold > players - 1)) {
        throw std::invalid_argument(spec.Name() + " requires t in {0.." +
                                    (players > 0 ? std::to_string(players - 1) : "n-1") + "}");
      }
      const int t = spec.threshold;
      const Action opening =
          spec.kind == Kind::kCooperateThreshold ? Action::kCooperate : Action::kDefect;
      return Strategy(spec.Name(), Origin::kReference,
                      [t, opening] { return std::make_unique<ThresholdPolicy>(t, opening); });
    }
  }
  throw std::logic_error("unknown reference kind");
}

std::vector<ReferenceSpec> DefaultReferenceSet(int players) {
  std::vector<ReferenceSpec> set{ReferenceSpec::AllD(), ReferenceSpec::Random(0.25),
                                 ReferenceSpec::Random(0.5), ReferenceSpec::Random(0.75),
                                 ReferenceSpec::AllC()};
  for (int t = 1; t < players; ++t) set.push_back(ReferenceSpec::CC(t));
  for (int t = 1; t < players; ++t) set.push_back(ReferenceSpec::CD(t));
  return set;
}

}  // namespace dilemma
