#ifndef DILEMMA_SELFPLAY_HPP
#define DILEMMA_SELFPLAY_HPP

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "dilemma/game.hpp"
#include "dilemma/strategy.hpp"

namespace dilemma {

struct MixGridConfig {
  GameKind kind = GameKind::kPublicGoods;
  int rounds = 20;
  double k = 2.0;
  std::vector<int> group_sizes{4, 16, 64, 256};
  int samples_per_cell = 200;
  StrategyPool exploitative;
  StrategyPool collective;
  std::uint64_t master_seed = 0;
  unsigned threads = 1;
  std::uint64_t step_budget = kDefaultStepBudget;
};

struct MixGridRow {
  GameKind kind = GameKind::kPublicGoods;
  int n = 0;
  int n_e = 0;
  int n_c = 0;
  double mean_welfare = 0.0;
  double std_error = 0.0;
  double welfare_min = 0.0;
  double welfare_max = 0.0;
  int samples = 0;

  bool operator==(const MixGridRow&) const = default;
};

// Game parameters used for a group of `n` in the grid: m = n/2, capacity 4n.
GameParams GridParams(const MixGridConfig& config, int n);

// For every group size n and every n_e in 0..n, plays samples_per_cell games,
// each with a fresh draw of n_e exploitative and n - n_e collective members
// (without replacement within a game). Rows are ordered by group size, then
// n_e. The result does not depend on config.threads.
std::vector<MixGridRow> RunMixGrid(const MixGridConfig& config);

// game,n,n_e,mean_welfare,std_error,welfare_min,welfare_max,samples
std::string GridCsv(std::span<const MixGridRow> rows);
void WriteGridCsv(std::span<const MixGridRow> rows, const std::filesystem::path& path);
std::vector<MixGridRow> ParseGridCsv(std::string_view text);
std::vector<MixGridRow> ReadGridCsv(const std::filesystem::path& path);

}  // namespace dilemma

#endif  // DILEMMA_SELFPLAY_HPP
