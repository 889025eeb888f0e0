#ifndef DILEMMA_CONFIG_HPP
#define DILEMMA_CONFIG_HPP

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "dilemma/evolution.hpp"
#include "dilemma/game.hpp"
#include "dilemma/selfplay.hpp"
#include "dilemma/strategy.hpp"

namespace dilemma {

inline constexpr int kConfigSchemaVersion = 1;

// Anything wrong with a config file or the pools it names.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Values given on the command line take precedence over the file.
struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<double> k;
  unsigned threads = 1;
};

// A parsed config file plus the location used in diagnostics and for
// resolving relative pool paths.
struct ConfigDocument {
  nlohmann::json root;
  std::filesystem::path path;
  std::filesystem::path base_dir;
};

ConfigDocument LoadConfig(const std::filesystem::path& path);
ConfigDocument ParseConfig(std::string_view text, const std::filesystem::path& path);

// The document with overrides folded in, serialized canonically. Its SHA-256
// is the manifest's config digest.
std::string EffectiveConfigText(const ConfigDocument& doc, const Overrides& overrides,
                                std::uint64_t seed);

std::uint64_t MasterSeed(const ConfigDocument& doc, const Overrides& overrides);

// Pool sources, each an object in the config:
//   {"file": "pools/x.json"}                    policy file
//   {"synth": [family, ...], "size": 64, ...}   parametric families
//   {"reference": "all_d", "size": 64, ...}     copies of one reference
// "gene_tag" and "attitude" set or override the pool identity. `stream`
// separates the seeds of different synth pools in one config.
StrategyPool ResolvePool(const nlohmann::json& source, const ConfigDocument& doc,
                         const std::string& json_path, std::uint64_t master_seed,
                         std::uint64_t stream);

struct FingerprintJob {
  GameParams params;  // players and rounds also fix the node enumeration
  int rollouts = 50;
  int pca_components = 10;  // components written to pca.json
  std::vector<StrategyPool> pools;
  std::vector<ReferenceSpec> references;
  std::uint64_t seed = 0;
};

struct ValidateJob {
  GameParams params;
  int trials = 50;
  std::uint64_t step_budget = kDefaultStepBudget;
  StrategyPool pool;
  std::uint64_t seed = 0;
};

struct EvolveJob {
  EvolutionConfig config;
  int runs = 1;
};

FingerprintJob ReadFingerprintJob(const ConfigDocument& doc, const Overrides& overrides);
MixGridConfig ReadSelfplayJob(const ConfigDocument& doc, const Overrides& overrides);
EvolveJob ReadEvolveJob(const ConfigDocument& doc, const Overrides& overrides);
// Accepts either a policy file (validated under the default four-player
// public goods game) or a config with "pool", "game" and "trials".
ValidateJob ReadValidateJob(const ConfigDocument& doc, const Overrides& overrides);

}  // namespace dilemma

#endif  // DILEMMA_CONFIG_HPP
