#include "dilemma/synth.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace dilemma {

namespace {

constexpr std::pair<Family, std::string_view> kFamilyNames[] = {
    {Family::kAllC, "all_c"},
    {Family::kAllD, "all_d"},
    {Family::kRandom, "random"},
    {Family::kCooperateThreshold, "cc"},
    {Family::kDefectThreshold, "cd"},
    {Family::kReciprocator, "reciprocator"},
    {Family::kGrimTrigger, "grim_trigger"},
    {Family::kEndgame, "endgame"},
    {Family::kStockGuardian, "stock_guardian"},
    {Family::kRota, "rota"},
};

double LastOpponentCooperation(const Observation& obs) {
  return static_cast<double>(obs.OpponentCooperatorsLastRound()) / (obs.players() - 1);
}

class Reciprocator final : public Policy {
 public:
  Reciprocator(double threshold, double forgiveness)
      : threshold_(threshold), forgiveness_(forgiveness) {}
  Action Decide(const Observation& obs, Rng& rng, StepMeter& meter) override {
    meter.Charge();
    if (!obs.HasHistory() || LastOpponentCooperation(obs) >= threshold_) {
      return Action::kCooperate;
    }
    return rng.Bernoulli(forgiveness_) ? Action::kCooperate : Action::kDefect;
  }

 private:
  double threshold_;
  double forgiveness_;
};

class GrimTrigger final : public Policy {
 public:
  explicit GrimTrigger(double tolerance) : tolerance_(tolerance) {}
  Action Decide(const Observation& obs, Rng&, StepMeter& meter) override {
    meter.Charge();
    if (obs.HasHistory() && 1.0 - LastOpponentCooperation(obs) > tolerance_) triggered_ = true;
    return triggered_ ? Action::kDefect : Action::kCooperate;
  }

 private:
  double tolerance_;
  bool triggered_ = false;
};

class EndgameDefector final : public Policy {
 public:
  EndgameDefector(int horizon, double threshold) : horizon_(horizon), threshold_(threshold) {}
  Action Decide(const Observation& obs, Rng&, StepMeter& meter) override {
    meter.Charge();
    if (!obs.HasHistory()) return Action::kCooperate;
    if (obs.round_index >= obs.rounds() - horizon_) return Action::kDefect;
    return LastOpponentCooperation(obs) >= threshold_ ? Action::kCooperate : Action::kDefect;
  }

 private:
  int horizon_;
  double threshold_;
};

class StockGuardian final : public Policy {
 public:
  StockGuardian(double low_stock, double threshold)
      : low_stock_(low_stock), threshold_(threshold) {}
  Action Decide(const Observation& obs, Rng&, StepMeter& meter) override {
    meter.Charge();
    if (!obs.HasHistory()) return Action::kCooperate;
    if (obs.current_stock && *obs.current_stock / obs.params->capacity < low_stock_) {
      return Action::kCooperate;
    }
    return LastOpponentCooperation(obs) >= threshold_ ? Action::kCooperate : Action::kDefect;
  }

 private:
  double low_stock_;
  double threshold_;
};

class RotaFollower final : public Policy {
 public:
  RotaFollower(int period, int punish) : period_(period), punish_(punish) {}
  Action Decide(const Observation& obs, Rng&, StepMeter& meter) override {
    meter.Charge(static_cast<std::uint64_t>(obs.players()));
    if (obs.HasHistory()) {
      const int last = obs.round_index - 1;
      const RoundRecord& r = obs.history.back();
      for (int j = 0; j < obs.players(); ++j) {
        if (j == obs.my_index) continue;
        if (Scheduled(j, last) && r.actions[static_cast<std::size_t>(j)] == Action::kDefect) {
          punishing_until_ = obs.round_index + punish_;
          break;
        }
      }
    }
    if (obs.round_index < punishing_until_) return Action::kDefect;
    return Scheduled(obs.my_index, obs.round_index) ? Action::kCooperate : Action::kDefect;
  }

 private:
  bool Scheduled(int player, int round) const { return (player + round) % period_ == 0; }

  int period_;
  int punish_;
  int punishing_until_ = 0;
};

std::string Describe(const std::string& name, const std::vector<std::pair<std::string, double>>& params,
                     std::size_t index) {
  std::ostringstream out;
  out << name << '(';
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (i) out << ',';
    out << params[i].first << '=' << params[i].second;
  }
  out << ")#" << index;
  return out.str();
}

}  // namespace

std::string_view ToString(Family family) {
  for (const auto& [f, name] : kFamilyNames) {
    if (f == family) return name;
  }
  return "?";
}

Family ParseFamily(std::string_view name) {
  for (const auto& [f, text] : kFamilyNames) {
    if (text == name) return f;
  }
  throw std::invalid_argument("unknown strategy family '" + std::string(name) + "'");
}

std::map<std::string, ParamRange> DefaultRanges(Family family) {
  switch (family) {
    case Family::kAllC:
    case Family::kAllD: return {};
    case Family::kRandom: return {{"p", {0.0, 1.0}}};
    case Family::kCooperateThreshold:
    case Family::kDefectThreshold: return {{"t", {1, 3}}};
    case Family::kReciprocator: return {{"threshold", {0.3, 0.7}}, {"forgiveness", {0.0, 0.2}}};
    case Family::kGrimTrigger: return {{"tolerance", {0.0, 0.25}}};
    case Family::kEndgame: return {{"horizon", {1, 5}}, {"threshold", {0.0, 0.5}}};
    case Family::kStockGuardian: return {{"low_stock", {0.3, 0.6}}, {"threshold", {0.5, 1.0}}};
    case Family::kRota: return {{"period", {2, 2}}, {"punish", {1, 20}}};
  }
  return {};
}

FamilySpec FamilySpec::FromJson(const nlohmann::json& j) {
  if (!j.is_object()) throw std::invalid_argument("family entry must be an object");
  if (!j.contains("family") || !j["family"].is_string()) {
    throw std::invalid_argument("family entry needs a string field 'family'");
  }
  FamilySpec spec;
  spec.family = ParseFamily(j["family"].get<std::string>());
  const auto defaults = DefaultRanges(spec.family);
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (it.key() == "family") continue;
    if (it.key() == "weight") {
      if (!it->is_number() || !(it->get<double>() > 0.0)) {
        throw std::invalid_argument("family weight must be a positive number");
      }
      spec.weight = it->get<double>();
      continue;
    }
    if (!defaults.contains(it.key())) {
      throw std::invalid_argument("family '" + std::string(ToString(spec.family)) +
                                  "' has no parameter '" + it.key() + "'");
    }
    ParamRange range;
    if (it->is_number()) {
      range.lo = range.hi = it->get<double>();
    } else if (it->is_array() && it->size() == 2 && (*it)[0].is_number() && (*it)[1].is_number()) {
      range.lo = (*it)[0].get<double>();
      range.hi = (*it)[1].get<double>();
    } else {
      throw std::invalid_argument("parameter '" + it.key() + "' must be a number or [lo, hi]");
    }
    if (range.lo > range.hi) {
      throw std::invalid_argument("parameter '" + it.key() + "' has lo > hi");
    }
    spec.ranges[it.key()] = range;
  }
  return spec;
}

Strategy SampleFamilyMember(const FamilySpec& spec, Rng& rng, std::size_t index) {
  auto ranges = DefaultRanges(spec.family);
  for (const auto& [name, range] : spec.ranges) ranges[name] = range;

  auto real = [&](const char* name) {
    const ParamRange& r = ranges.at(name);
    return r.lo + (r.hi - r.lo) * rng.Uniform();
  };
  auto integer = [&](const char* name) {
    const ParamRange& r = ranges.at(name);
    return static_cast<int>(rng.Between(static_cast<long long>(std::ceil(r.lo)),
                                        static_cast<long long>(std::floor(r.hi))));
  };
  auto check_unit = [](const char* name, double v) {
    if (!(v >= 0.0 && v <= 1.0)) {
      throw std::invalid_argument(std::string(name) + " must lie in [0, 1]");
    }
  };

  const std::string family(ToString(spec.family));
  switch (spec.family) {
    case Family::kAllC: {
      Strategy base = MakeReference(ReferenceSpec::AllC());
      return Strategy(Describe(family, {}, index), Origin::kParametric,
                      [base] { return base.Instantiate(); });
    }
    case Family::kAllD: {
      Strategy base = MakeReference(ReferenceSpec::AllD());
      return Strategy(Describe(family, {}, index), Origin::kParametric,
                      [base] { return base.Instantiate(); });
    }
    case Family::kRandom: {
      const double p = real("p");
      check_unit("p", p);
      Strategy base = MakeReference(ReferenceSpec::Random(p));
      return Strategy(Describe(family, {{"p", p}}, index), Origin::kParametric,
                      [base] { return base.Instantiate(); });
    }
    case Family::kCooperateThreshold:
    case Family::kDefectThreshold: {
      const int t = integer("t");
      Strategy base = MakeReference(spec.family == Family::kCooperateThreshold
                                        ? ReferenceSpec::CC(t)
                                        : ReferenceSpec::CD(t));
      return Strategy(Describe(family, {{"t", t}}, index), Origin::kParametric,
                      [base] { return base.Instantiate(); });
    }
    case Family::kReciprocator: {
      const double threshold = real("threshold");
      const double forgiveness = real("forgiveness");
      check_unit("forgiveness", forgiveness);
      return Strategy(
          Describe(family, {{"threshold", threshold}, {"forgiveness", forgiveness}}, index),
          Origin::kParametric,
          [=] { return std::make_unique<Reciprocator>(threshold, forgiveness); });
    }
    case Family::kGrimTrigger: {
      const double tolerance = real("tolerance");
      return Strategy(Describe(family, {{"tolerance", tolerance}}, index), Origin::kParametric,
                      [=] { return std::make_unique<GrimTrigger>(tolerance); });
    }
    case Family::kEndgame: {
      const int horizon = integer("horizon");
      const double threshold = real("threshold");
      if (horizon < 1) throw std::invalid_argument("endgame horizon must be >= 1");
      return Strategy(Describe(family, {{"horizon", horizon}, {"threshold", threshold}}, index),
                      Origin::kParametric,
                      [=] { return std::make_unique<EndgameDefector>(horizon, threshold); });
    }
    case Family::kStockGuardian: {
      const double low = real("low_stock");
      const double threshold = real("threshold");
      return Strategy(Describe(family, {{"low_stock", low}, {"threshold", threshold}}, index),
                      Origin::kParametric,
                      [=] { return std::make_unique<StockGuardian>(low, threshold); });
    }
    case Family::kRota: {
      const int period = integer("period");
      const int punish = integer("punish");
      if (period < 1) throw std::invalid_argument("rota period must be >= 1");
      if (punish < 0) throw std::invalid_argument("rota punish must be >= 0");
      return Strategy(Describe(family, {{"period", period}, {"punish", punish}}, index),
                      Origin::kParametric,
                      [=] { return std::make_unique<RotaFollower>(period, punish); });
    }
  }
  throw std::logic_error("unknown family");
}

StrategyPool SynthPool(const std::vector<FamilySpec>& families, std::size_t size,
                       std::uint64_t seed, std::string gene_tag, Attitude attitude) {
  if (families.empty()) throw std::invalid_argument("synth_pool needs at least one family");
  if (size < 1) throw std::invalid_argument("synth_pool size must be >= 1");
  double total = 0.0;
  for (const FamilySpec& f : families) {
    if (!(f.weight > 0.0)) throw std::invalid_argument("family weights must be positive");
    total += f.weight;
  }

  StrategyPool pool;
  pool.gene_tag = std::move(gene_tag);
  pool.attitude = attitude;
  pool.members.reserve(size);
  Rng rng(DeriveSeed(seed, {0x5e7}));
  for (std::size_t i = 0; i < size; ++i) {
    double pick = rng.Uniform() * total;
    std::size_t chosen = families.size() - 1;
    for (std::size_t f = 0; f < families.size(); ++f) {
      if (pick < families[f].weight) {
        chosen = f;
        break;
      }
      pick -= families[f].weight;
    }
    pool.members.push_back(SampleFamilyMember(families[chosen], rng, i));
  }
  return pool;
}

}  // namespace dilemma
