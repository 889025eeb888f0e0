#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "dilemma/commands.hpp"
#include "dilemma/manifest.hpp"

namespace {

struct CommonFlags {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<double> k;
  unsigned threads = 1;
};

void AddCommon(CLI::App* cmd, CommonFlags& flags, const std::string& default_out) {
  flags.out = default_out;
  cmd->add_option("--seed", flags.seed, "Master seed (overrides the config)");
  cmd->add_option("--out", flags.out, "Output directory")->capture_default_str();
  cmd->add_option("--threads", flags.threads, "Worker threads, 0 = all cores")
      ->capture_default_str();
  cmd->add_option("--k", flags.k, "Override the game's payoff parameter k");
}

dilemma::CommandOptions ToOptions(const CommonFlags& flags) {
  dilemma::CommandOptions options;
  options.config = flags.config;
  options.out = flags.out;
  options.overrides.seed = flags.seed;
  options.overrides.k = flags.k;
  options.overrides.threads = flags.threads;
  return options;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Iterated N-player social dilemma engine"};
  app.set_version_flag("--version", std::string(dilemma::kEngineVersion));
  app.require_subcommand(1);

  CommonFlags fp, sp, ev, va;
  auto* fingerprint = app.add_subcommand("fingerprint", "Behavioral fingerprints, PCA and metrics");
  fingerprint->add_option("--config", fp.config, "Config file")->required();
  AddCommon(fingerprint, fp, "out/fingerprint");

  auto* selfplay = app.add_subcommand("selfplay", "Mixed-pool welfare grid");
  selfplay->add_option("--config", sp.config, "Config file")->required();
  AddCommon(selfplay, sp, "out/selfplay");

  auto* evolve = app.add_subcommand("evolve", "Cultural evolution runs");
  evolve->add_option("--config", ev.config, "Config file")->required();
  AddCommon(evolve, ev, "out/evolve");

  auto* validate = app.add_subcommand("validate", "Admission checks for a strategy pool");
  auto* pool_opt = validate->add_option("--pool", va.config, "Policy file or validate config");
  validate->add_option("--config", va.config, "Alias of --pool")->excludes(pool_opt);
  AddCommon(validate, va, "out/validate");

  auto* bounds = app.add_subcommand("bounds", "Minimum and maximum mean normalized payoff");
  std::string game = "pgg";
  int players = 4;
  int rounds = 20;
  double k = 2.0;
  std::optional<int> threshold;
  std::optional<double> capacity;
  std::optional<std::string> bounds_out;
  bounds->add_option("--game", game, "pgg, crd or cpr")->capture_default_str();
  bounds->add_option("--players,-n", players, "Players")->capture_default_str();
  bounds->add_option("--rounds,-r", rounds, "Rounds")->capture_default_str();
  bounds->add_option("--k", k, "Multiplication factor or collective benefit")
      ->capture_default_str();
  bounds->add_option("--threshold,-m", threshold, "Collective risk threshold (default n/2)");
  bounds->add_option("--capacity", capacity, "Common pool capacity (default 4n)");
  bounds->add_option("--out", bounds_out, "Also write bounds.json and a manifest here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    // Usage errors share the config-error exit code; --help exits 0.
    return app.exit(e) == 0 ? 0 : dilemma::kExitConfig;
  }

  using namespace dilemma;
  return RunGuarded(
      [&]() -> int {
        if (*fingerprint) return CmdFingerprint(ToOptions(fp), std::cout);
        if (*selfplay) return CmdSelfplay(ToOptions(sp), std::cout);
        if (*evolve) return CmdEvolve(ToOptions(ev), std::cout);
        if (*validate) {
          if (va.config.empty()) throw ConfigError("validate needs --pool PATH");
          return CmdValidate(ToOptions(va), std::cout);
        }
        GameKind kind;
        try {
          kind = ParseGameKind(game);
        } catch (const std::invalid_argument& e) {
          throw ConfigError(e.what());
        }
        GameParams params = GameParams::Defaults(kind, players, rounds, k);
        if (threshold) params.threshold = *threshold;
        if (capacity) params.capacity = *capacity;
        std::optional<std::filesystem::path> out;
        if (bounds_out) out = *bounds_out;
        return CmdBounds(params, out, std::cout);
      },
      std::cerr);
}
