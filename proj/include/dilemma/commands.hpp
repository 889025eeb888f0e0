#ifndef DILEMMA_COMMANDS_HPP
#define DILEMMA_COMMANDS_HPP

#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>

#include "dilemma/config.hpp"
#include "dilemma/game.hpp"

namespace dilemma {

enum ExitCode : int { kExitOk = 0, kExitConfig = 1, kExitStrategyFault = 2 };

struct CommandOptions {
  std::filesystem::path config;
  std::filesystem::path out;
  Overrides overrides;
};

// Each command writes its data files and manifest.json into options.out and
// reports progress on `log`. Errors propagate as exceptions; RunGuarded maps
// them to exit codes.
int CmdFingerprint(const CommandOptions& options, std::ostream& log);
int CmdSelfplay(const CommandOptions& options, std::ostream& log);
int CmdEvolve(const CommandOptions& options, std::ostream& log);
// Exits with kExitStrategyFault when any member fails validation.
int CmdValidate(const CommandOptions& options, std::ostream& log);
// Prints the bounds; with `out` set also writes bounds.json and a manifest.
int CmdBounds(const GameParams& params, const std::optional<std::filesystem::path>& out,
              std::ostream& log);

// Runs `body`, printing any error to `err`: ConfigError and other failures
// give kExitConfig, StrategyFault gives kExitStrategyFault.
int RunGuarded(const std::function<int()>& body, std::ostream& err);

}  // namespace dilemma

#endif  // DILEMMA_COMMANDS_HPP
