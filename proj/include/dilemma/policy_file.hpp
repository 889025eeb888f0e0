#ifndef DILEMMA_POLICY_FILE_HPP
#define DILEMMA_POLICY_FILE_HPP

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "dilemma/strategy.hpp"

namespace dilemma {

inline constexpr int kPolicySchemaVersion = 1;

// Observable quantities a rule may test. The set is closed: policy files
// cannot express anything else.
enum class Variable {
  kRound,                      // round index, 0-based
  kRoundsRemaining,            // rounds after the current one
  kLastOpponentCooperators,    // opponents that played C last round
  kLastOpponentCooperation,    // the same as a fraction of opponents
  kOpponentCooperationRate,    // fraction of all past opponent moves that were C
  kOwnLastCooperated,          // 1 if this player played C last round, else 0
  kStockFraction,              // current stock / capacity (CPR only)
  kPlayers,                    // n
};

std::string_view ToString(Variable v);
std::optional<Variable> ParseVariable(std::string_view name);
// Variables that need at least one completed round.
bool NeedsHistory(Variable v);

enum class Comparison { kLt, kLe, kGt, kGe, kEq, kNe };

std::string_view ToString(Comparison c);
std::optional<Comparison> ParseComparison(std::string_view op);

struct Condition {
  enum class Kind { kAlways, kCompare, kAll, kAny, kNot };
  Kind kind = Kind::kAlways;

  // kCompare: (var [/ per]) op value
  Variable var = Variable::kRound;
  std::optional<Variable> per;
  Comparison op = Comparison::kEq;
  double value = 0.0;

  std::vector<Condition> children;  // kAll, kAny, kNot (exactly one)
};

struct PolicyRule {
  Condition when;
  double cooperate_prob = 1.0;
};

// Ordered rule list; the first rule whose condition holds decides the
// cooperation probability, otherwise `default_prob` applies.
struct PolicySpec {
  std::string label;
  std::vector<PolicyRule> rules;
  double default_prob = 0.0;
};

struct PolicyFile {
  int schema_version = kPolicySchemaVersion;
  std::string gene_tag;
  Attitude attitude = Attitude::kCollective;
  std::vector<PolicySpec> members;
};

// Parse or schema error. The message carries the source name and either a
// line:column position (syntax errors) or a JSON path (schema errors).
class PolicyFileError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Comparisons against history-dependent variables are false in round 0.
// Division by zero or reading the stock outside the common pool game raises
// PolicyFault(kEvaluationTrap). Every node evaluated charges one step.
bool Evaluate(const Condition& condition, const Observation& obs, StepMeter& meter);

// Probability of cooperating under `spec` at `obs`.
double CooperationProbability(const PolicySpec& spec, const Observation& obs,
                              StepMeter& meter);

Strategy MakePolicyStrategy(PolicySpec spec);

PolicyFile ParsePolicyFile(std::string_view text, std::string_view source = "<memory>");
PolicyFile ReadPolicyFile(const std::filesystem::path& path);

nlohmann::json ToJson(const Condition& condition);
nlohmann::json ToJson(const PolicyFile& file);

StrategyPool MakePool(const PolicyFile& file);
StrategyPool LoadPool(const std::filesystem::path& path);

}  // namespace dilemma

#endif  // DILEMMA_POLICY_FILE_HPP
