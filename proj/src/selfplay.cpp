#include "dilemma/selfplay.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "dilemma/io.hpp"
#include "dilemma/parallel.hpp"
#include "dilemma/play.hpp"

namespace dilemma {

GameParams GridParams(const MixGridConfig& config, int n) {
  return GameParams::Defaults(config.kind, n, config.rounds, config.k);
}

std::vector<MixGridRow> RunMixGrid(const MixGridConfig& config) {
  if (config.samples_per_cell < 1) throw std::invalid_argument("samples_per_cell must be >= 1");
  if (config.group_sizes.empty()) throw std::invalid_argument("no group sizes given");
  const std::size_t smallest =
      std::min(config.exploitative.members.size(), config.collective.members.size());

  struct Cell {
    int n;
    int n_e;
    GameParams params;
    WelfareBounds bounds;
  };
  std::vector<Cell> cells;
  for (int n : config.group_sizes) {
    if (n < 2) throw std::invalid_argument("group sizes must be >= 2");
    if (static_cast<std::size_t>(n) > smallest) {
      throw std::invalid_argument("pool too small: group size " + std::to_string(n) +
                                  " needs " + std::to_string(n) +
                                  " members in each pool, smallest has " +
                                  std::to_string(smallest));
    }
    const GameParams params = GridParams(config, n);
    const WelfareBounds bounds = ComputeWelfareBounds(params);
    for (int n_e = 0; n_e <= n; ++n_e) cells.push_back({n, n_e, params, bounds});
  }

  const auto samples = static_cast<std::size_t>(config.samples_per_cell);
  std::vector<double> welfare(cells.size() * samples);
  ParallelFor(welfare.size(), config.threads, [&](std::size_t task) {
    const Cell& cell = cells[task / samples];
    const std::size_t sample = task % samples;
    Rng draw(DeriveSeed(config.master_seed, {static_cast<std::uint64_t>(cell.n),
                                             static_cast<std::uint64_t>(cell.n_e), sample, 0}));
    std::vector<Strategy> group;
    group.reserve(static_cast<std::size_t>(cell.n));
    for (std::size_t i : config.exploitative.SampleWithoutReplacement(cell.n_e, draw)) {
      group.push_back(config.exploitative.members[i]);
    }
    for (std::size_t i : config.collective.SampleWithoutReplacement(cell.n - cell.n_e, draw)) {
      group.push_back(config.collective.members[i]);
    }
    const std::uint64_t game_seed = DeriveSeed(
        config.master_seed,
        {static_cast<std::uint64_t>(cell.n), static_cast<std::uint64_t>(cell.n_e), sample, 1});
    welfare[task] = PlayGame(cell.params, group, game_seed, config.step_budget).mean_welfare;
  });

  std::vector<MixGridRow> rows;
  rows.reserve(cells.size());
  for (std::size_t c = 0; c < cells.size(); ++c) {
    const auto first = welfare.begin() + static_cast<std::ptrdiff_t>(c * samples);
    const auto last = first + static_cast<std::ptrdiff_t>(samples);
    MixGridRow row;
    row.kind = config.kind;
    row.n = cells[c].n;
    row.n_e = cells[c].n_e;
    row.n_c = row.n - row.n_e;
    row.welfare_min = cells[c].bounds.min_mean;
    row.welfare_max = cells[c].bounds.max_mean;
    row.samples = config.samples_per_cell;
    const auto [lo, hi] = std::minmax_element(first, last);
    if (*lo == *hi) {
      row.mean_welfare = *lo;
      row.std_error = 0.0;
    } else {
      double sum = 0.0;
      for (auto it = first; it != last; ++it) sum += *it;
      row.mean_welfare = sum / static_cast<double>(samples);
      double ss = 0.0;
      for (auto it = first; it != last; ++it) ss += (*it - row.mean_welfare) * (*it - row.mean_welfare);
      row.std_error = samples > 1 ? std::sqrt(ss / static_cast<double>(samples - 1)) /
                                        std::sqrt(static_cast<double>(samples))
                                  : 0.0;
    }
    rows.push_back(row);
  }
  return rows;
}

std::string GridCsv(std::span<const MixGridRow> rows) {
  std::string out = "game,n,n_e,mean_welfare,std_error,welfare_min,welfare_max,samples\n";
  for (const MixGridRow& r : rows) {
    out += std::string(ToString(r.kind)) + ',' + std::to_string(r.n) + ',' +
           std::to_string(r.n_e) + ',' + FormatDouble(r.mean_welfare) + ',' +
           FormatDouble(r.std_error) + ',' + FormatDouble(r.welfare_min) + ',' +
           FormatDouble(r.welfare_max) + ',' + std::to_string(r.samples) + '\n';
  }
  return out;
}

void WriteGridCsv(std::span<const MixGridRow> rows, const std::filesystem::path& path) {
  WriteTextFile(path, GridCsv(rows));
}

std::vector<MixGridRow> ParseGridCsv(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string line;
  if (!std::getline(in, line) ||
      line.rfind("game,n,n_e,mean_welfare,std_error,welfare_min,welfare_max,samples", 0) != 0) {
    throw std::invalid_argument("grid CSV has an unexpected header");
  }
  std::vector<MixGridRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = SplitCsvLine(line);
    if (f.size() != 8) throw std::invalid_argument("grid CSV row has " + std::to_string(f.size()) + " fields");
    MixGridRow r;
    r.kind = ParseGameKind(f[0]);
    r.n = std::stoi(f[1]);
    r.n_e = std::stoi(f[2]);
    r.n_c = r.n - r.n_e;
    r.mean_welfare = ParseDouble(f[3]);
    r.std_error = ParseDouble(f[4]);
    r.welfare_min = ParseDouble(f[5]);
    r.welfare_max = ParseDouble(f[6]);
    r.samples = std::stoi(f[7]);
    rows.push_back(r);
  }
  return rows;
}

std::vector<MixGridRow> ReadGridCsv(const std::filesystem::path& path) {
  return ParseGridCsv(ReadTextFile(path));
}

}  // namespace dilemma
