#include "dilemma/policy_file.hpp"

#include <array>
#include <cmath>
#include <utility>

#include "dilemma/io.hpp"

namespace dilemma {

namespace {

constexpr std::array<std::pair<Variable, std::string_view>, 8> kVariableNames{{
    {Variable::kRound, "round"},
    {Variable::kRoundsRemaining, "rounds_remaining"},
    {Variable::kLastOpponentCooperators, "last_opponent_cooperators"},
    {Variable::kLastOpponentCooperation, "last_opponent_cooperation"},
    {Variable::kOpponentCooperationRate, "opponent_cooperation_rate"},
    {Variable::kOwnLastCooperated, "own_last_cooperated"},
    {Variable::kStockFraction, "stock_fraction"},
    {Variable::kPlayers, "players"},
}};

constexpr std::array<std::pair<Comparison, std::string_view>, 6> kComparisonNames{{
    {Comparison::kLt, "<"},
    {Comparison::kLe, "<="},
    {Comparison::kGt, ">"},
    {Comparison::kGe, ">="},
    {Comparison::kEq, "=="},
    {Comparison::kNe, "!="},
}};

}  // namespace

std::string_view ToString(Variable v) {
  for (const auto& [var, name] : kVariableNames) {
    if (var == v) return name;
  }
  return "?";
}

std::optional<Variable> ParseVariable(std::string_view name) {
  for (const auto& [var, text] : kVariableNames) {
    if (text == name) return var;
  }
  return std::nullopt;
}

bool NeedsHistory(Variable v) {
  return v == Variable::kLastOpponentCooperators || v == Variable::kLastOpponentCooperation ||
         v == Variable::kOpponentCooperationRate || v == Variable::kOwnLastCooperated;
}

std::string_view ToString(Comparison c) {
  for (const auto& [cmp, name] : kComparisonNames) {
    if (cmp == c) return name;
  }
  return "?";
}

std::optional<Comparison> ParseComparison(std::string_view op) {
  for (const auto& [cmp, text] : kComparisonNames) {
    if (text == op) return cmp;
  }
  return std::nullopt;
}

namespace {

double Read(Variable v, const Observation& obs) {
  switch (v) {
    case Variable::kRound: return obs.round_index;
    case Variable::kRoundsRemaining: return obs.RoundsRemaining();
    case Variable::kLastOpponentCooperators: return obs.OpponentCooperatorsLastRound();
    case Variable::kLastOpponentCooperation:
      return static_cast<double>(obs.OpponentCooperatorsLastRound()) / (obs.players() - 1);
    case Variable::kOpponentCooperationRate: return obs.OpponentCooperationRate();
    case Variable::kOwnLastCooperated:
      return obs.MyLastAction() == Action::kCooperate ? 1.0 : 0.0;
    case Variable::kStockFraction:
      if (!obs.current_stock) {
        throw PolicyFault(FaultKind::kEvaluationTrap,
                          "stock_fraction read outside the common pool game");
      }
      return *obs.current_stock / obs.params->capacity;
    case Variable::kPlayers: return obs.players();
  }
  throw PolicyFault(FaultKind::kEvaluationTrap, "unknown variable");
}

bool Compare(double lhs, Comparison op, double rhs) {
  switch (op) {
    case Comparison::kLt: return lhs < rhs;
    case Comparison::kLe: return lhs <= rhs;
    case Comparison::kGt: return lhs > rhs;
    case Comparison::kGe: return lhs >= rhs;
    case Comparison::kEq: return lhs == rhs;
    case Comparison::kNe: return lhs != rhs;
  }
  return false;
}

}  // namespace

bool Evaluate(const Condition& condition, const Observation& obs, StepMeter& meter) {
  meter.Charge();
  switch (condition.kind) {
    case Condition::Kind::kAlways: return true;
    case Condition::Kind::kCompare: {
      if (!obs.HasHistory() &&
          (NeedsHistory(condition.var) || (condition.per && NeedsHistory(*condition.per)))) {
        return false;
      }
      double lhs = Read(condition.var, obs);
      if (condition.per) {
        const double denominator = Read(*condition.per, obs);
        if (denominator == 0.0) {
          throw PolicyFault(FaultKind::kEvaluationTrap,
                            "division by zero: " + std::string(ToString(condition.var)) + " / " +
                                std::string(ToString(*condition.per)));
        }
        lhs /= denominator;
      }
      return Compare(lhs, condition.op, condition.value);
    }
    case Condition::Kind::kAll:
      for (const Condition& c : condition.children) {
        if (!Evaluate(c, obs, meter)) return false;
      }
      return true;
    case Condition::Kind::kAny:
      for (const Condition& c : condition.children) {
        if (Evaluate(c, obs, meter)) return true;
      }
      return false;
    case Condition::Kind::kNot: return !Evaluate(condition.children.at(0), obs, meter);
  }
  return false;
}

double CooperationProbability(const PolicySpec& spec, const Observation& obs,
                              StepMeter& meter) {
  for (const PolicyRule& rule : spec.rules) {
    if (Evaluate(rule.when, obs, meter)) return rule.cooperate_prob;
  }
  return spec.default_prob;
}

namespace {

class RulePolicy final : public Policy {
 public:
  explicit RulePolicy(std::shared_ptr<const PolicySpec> spec) : spec_(std::move(spec)) {}

  Action Decide(const Observation& obs, Rng& rng, StepMeter& meter) override {
    const double p = CooperationProbability(*spec_, obs, meter);
    if (p >= 1.0) return Action::kCooperate;
    if (p <= 0.0) return Action::kDefect;
    return rng.Bernoulli(p) ? Action::kCooperate : Action::kDefect;
  }

 private:
  std::shared_ptr<const PolicySpec> spec_;
};

// Tracks the JSON path of the node being parsed for error messages.
class SchemaReader {
 public:
  explicit SchemaReader(std::string source) : source_(std::move(source)) {}

  [[noreturn]] void Fail(const std::string& path, const std::string& message) const {
    throw PolicyFileError(source_ + ": " + path + ": " + message);
  }

  const nlohmann::json& Field(const nlohmann::json& obj, const std::string& path,
                              const char* key) const {
    auto it = obj.find(key);
    if (it == obj.end()) Fail(path, std::string("missing field '") + key + "'");
    return *it;
  }

  double Probability(const nlohmann::json& j, const std::string& path) const {
    if (!j.is_number()) Fail(path, "expected a number");
    const double p = j.get<double>();
    if (!(p >= 0.0 && p <= 1.0)) Fail(path, "probability must be in [0, 1]");
    return p;
  }

  void OnlyKeys(const nlohmann::json& obj, const std::string& path,
                std::initializer_list<std::string_view> allowed) const {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
      bool ok = false;
      for (std::string_view a : allowed) ok = ok || it.key() == a;
      if (!ok) Fail(path, "unknown field '" + it.key() + "'");
    }
  }

  Variable ReadVariable(const nlohmann::json& j, const std::string& path) const {
    if (!j.is_string()) Fail(path, "expected a variable name");
    const std::string name = j.get<std::string>();
    auto v = ParseVariable(name);
    if (!v) Fail(path, "unknown predicate '" + name + "'");
    return *v;
  }

  Condition ReadCondition(const nlohmann::json& j, const std::string& path) const {
    Condition c;
    if (j.is_string()) {
      if (j.get<std::string>() != "always") {
        Fail(path, "unknown predicate '" + j.get<std::string>() + "'");
      }
      c.kind = Condition::Kind::kAlways;
      return c;
    }
    if (!j.is_object() || j.empty()) Fail(path, "expected \"always\" or a predicate object");

    if (j.contains("var")) {
      OnlyKeys(j, path, {"var", "per", "op", "value"});
      c.kind = Condition::Kind::kCompare;
      c.var = ReadVariable(j["var"], path + ".var");
      if (j.contains("per")) c.per = ReadVariable(j["per"], path + ".per");
      const nlohmann::json& op = Field(j, path, "op");
      if (!op.is_string()) Fail(path + ".op", "expected a comparison operator");
      auto cmp = ParseComparison(op.get<std::string>());
      if (!cmp) Fail(path + ".op", "unknown operator '" + op.get<std::string>() + "'");
      c.op = *cmp;
      const nlohmann::json& value = Field(j, path, "value");
      if (!value.is_number()) Fail(path + ".value", "expected a number");
      c.value = value.get<double>();
      return c;
    }

    if (j.size() != 1) Fail(path, "a combinator object must have exactly one key");
    const std::string key = j.begin().key();
    const nlohmann::json& body = j.begin().value();
    const std::string sub = path + "." + key;
    if (key == "all" || key == "any") {
      c.kind = key == "all" ? Condition::Kind::kAll : Condition::Kind::kAny;
      if (!body.is_array() || body.empty()) Fail(sub, "expected a non-empty array");
      for (std::size_t i = 0; i < body.size(); ++i) {
        c.children.push_back(ReadCondition(body[i], sub + "[" + std::to_string(i) + "]"));
      }
      return c;
    }
    if (key == "not") {
      c.kind = Condition::Kind::kNot;
      c.children.push_back(ReadCondition(body, sub));
      return c;
    }
    Fail(path, "unknown predicate '" + key + "'");
  }

  PolicySpec ReadMember(const nlohmann::json& j, const std::string& path) const {
    if (!j.is_object()) Fail(path, "expected an object");
    OnlyKeys(j, path, {"label", "rules", "default_prob"});
    PolicySpec spec;
    const nlohmann::json& label = Field(j, path, "label");
    if (!label.is_string()) Fail(path + ".label", "expected a string");
    spec.label = label.get<std::string>();
    const nlohmann::json& rules = Field(j, path, "rules");
    if (!rules.is_array()) Fail(path + ".rules", "expected an array");
    for (std::size_t i = 0; i < rules.size(); ++i) {
      const std::string rp = path + ".rules[" + std::to_string(i) + "]";
      const nlohmann::json& r = rules[i];
      if (!r.is_object()) Fail(rp, "expected an object");
      OnlyKeys(r, rp, {"when", "cooperate_prob"});
      PolicyRule rule;
      rule.when = ReadCondition(Field(r, rp, "when"), rp + ".when");
      rule.cooperate_prob = Probability(Field(r, rp, "cooperate_prob"), rp + ".cooperate_prob");
      spec.rules.push_back(std::move(rule));
    }
    spec.default_prob = Probability(Field(j, path, "default_prob"), path + ".default_prob");
    return spec;
  }

  PolicyFile ReadFile(const nlohmann::json& j) const {
    if (!j.is_object()) Fail("$", "expected an object");
    OnlyKeys(j, "$", {"schema_version", "gene_tag", "attitude", "members"});
    PolicyFile file;
    const nlohmann::json& version = Field(j, "$", "schema_version");
    if (!version.is_number_integer()) Fail("$.schema_version", "expected an integer");
    file.schema_version = version.get<int>();
    if (file.schema_version != kPolicySchemaVersion) {
      Fail("$.schema_version", "unsupported schema version " +
                                   std::to_string(file.schema_version) + " (expected " +
                                   std::to_string(kPolicySchemaVersion) + ")");
    }
    const nlohmann::json& tag = Field(j, "$", "gene_tag");
    if (!tag.is_string() || tag.get<std::string>().empty()) {
      Fail("$.gene_tag", "expected a non-empty string");
    }
    file.gene_tag = tag.get<std::string>();
    const nlohmann::json& attitude = Field(j, "$", "attitude");
    if (!attitude.is_string()) Fail("$.attitude", "expected a string");
    try {
      file.attitude = ParseAttitude(attitude.get<std::string>());
    } catch (const std::invalid_argument& e) {
      Fail("$.attitude", e.what());
    }
    const nlohmann::json& members = Field(j, "$", "members");
    if (!members.is_array()) Fail("$.members", "expected an array");
    if (members.empty()) Fail("$.members", "pool has no members");
    for (std::size_t i = 0; i < members.size(); ++i) {
      file.members.push_back(ReadMember(members[i], "$.members[" + std::to_string(i) + "]"));
    }
    return file;
  }

 private:
  std::string source_;
};

}  // namespace

Strategy MakePolicyStrategy(PolicySpec spec) {
  std::string label = spec.label;
  auto shared = std::make_shared<const PolicySpec>(std::move(spec));
  return Strategy(std::move(label), Origin::kFile,
                  [shared] { return std::make_unique<RulePolicy>(shared); });
}

PolicyFile ParsePolicyFile(std::string_view text, std::string_view source) {
  nlohmann::json j;
  try {
    j = ParseJsonText(text, source);
  } catch (const JsonSyntaxError& e) {
    throw PolicyFileError(e.what());
  }
  return SchemaReader(std::string(source)).ReadFile(j);
}

PolicyFile ReadPolicyFile(const std::filesystem::path& path) {
  std::string text;
  try {
    text = ReadTextFile(path);
  } catch (const std::runtime_error& e) {
    throw PolicyFileError(e.what());
  }
  return ParsePolicyFile(text, path.string());
}

nlohmann::json ToJson(const Condition& condition) {
  switch (condition.kind) {
    case Condition::Kind::kAlways: return "always";
    case Condition::Kind::kCompare: {
      nlohmann::json j{{"var", ToString(condition.var)},
                       {"op", ToString(condition.op)},
                       {"value", condition.value}};
      if (condition.per) j["per"] = ToString(*condition.per);
      return j;
    }
    case Condition::Kind::kAll:
    case Condition::Kind::kAny: {
      nlohmann::json children = nlohmann::json::array();
      for (const Condition& c : condition.children) children.push_back(ToJson(c));
      return {{condition.kind == Condition::Kind::kAll ? "all" : "any", children}};
    }
    case Condition::Kind::kNot: return {{"not", ToJson(condition.children.at(0))}};
  }
  return nullptr;
}

nlohmann::json ToJson(const PolicyFile& file) {
  nlohmann::json members = nlohmann::json::array();
  for (const PolicySpec& spec : file.members) {
    nlohmann::json rules = nlohmann::json::array();
    for (const PolicyRule& r : spec.rules) {
      rules.push_back({{"when", ToJson(r.when)}, {"cooperate_prob", r.cooperate_prob}});
    }
    members.push_back(
        {{"label", spec.label}, {"rules", std::move(rules)}, {"default_prob", spec.default_prob}});
  }
  return {{"schema_version", file.schema_version},
          {"gene_tag", file.gene_tag},
          {"attitude", ToString(file.attitude)},
          {"members", std::move(members)}};
}

StrategyPool MakePool(const PolicyFile& file) {
  StrategyPool pool;
  pool.gene_tag = file.gene_tag;
  pool.attitude = file.attitude;
  for (const PolicySpec& spec : file.members) pool.members.push_back(MakePolicyStrategy(spec));
  return pool;
}

StrategyPool LoadPool(const std::filesystem::path& path) { return MakePool(ReadPolicyFile(path)); }

}  // namespace dilemma
