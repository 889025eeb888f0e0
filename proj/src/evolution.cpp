#include "dilemma/evolution.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "dilemma/io.hpp"
#include "dilemma/parallel.hpp"
#include "dilemma/play.hpp"

namespace dilemma {

std::string Gene::Name() const { return pool_tag + "/" + std::string(ToString(attitude)); }

GameParams EvolutionConfig::Params() const {
  return GameParams::Defaults(kind, group_size, rounds, k);
}

Gene EvolutionConfig::GeneAt(std::size_t index) const {
  if (index >= pools.size()) {
    throw std::out_of_range("unregistered gene index " + std::to_string(index));
  }
  return {pools[index].gene_tag, pools[index].attitude};
}

std::size_t EvolutionConfig::GeneIndex(const Gene& gene) const {
  for (std::size_t i = 0; i < pools.size(); ++i) {
    if (pools[i].gene_tag == gene.pool_tag && pools[i].attitude == gene.attitude) return i;
  }
  throw std::invalid_argument("unregistered gene " + gene.Name());
}

void EvolutionConfig::Validate() const {
  if (population < 2) throw std::invalid_argument("population must be >= 2");
  if (group_size < 2) throw std::invalid_argument("group_size must be >= 2");
  if (population % group_size != 0) {
    throw std::invalid_argument("population " + std::to_string(population) +
                                " is not divisible by group_size " + std::to_string(group_size));
  }
  if (games_per_agent < 1) throw std::invalid_argument("games_per_agent must be >= 1");
  if (elites < 0 || elites >= population) {
    throw std::invalid_argument("elites must be in [0, population)");
  }
  if (!(mutation_rate >= 0.0 && mutation_rate <= 1.0)) {
    throw std::invalid_argument("mutation_rate must be in [0, 1]");
  }
  if (!(dominance_threshold > 0.0 && dominance_threshold <= 1.0)) {
    throw std::invalid_argument("dominance_threshold must be in (0, 1]");
  }
  if (max_generations < 0) throw std::invalid_argument("max_generations must be >= 0");
  if (pools.empty()) throw std::invalid_argument("evolution needs at least one gene pool");
  for (std::size_t i = 0; i < pools.size(); ++i) {
    if (pools[i].members.empty()) {
      throw std::invalid_argument("pool for gene " + GeneAt(i).Name() + " is empty");
    }
    for (std::size_t j = 0; j < i; ++j) {
      if (GeneAt(i) == GeneAt(j)) {
        throw std::invalid_argument("gene " + GeneAt(i).Name() + " registered twice");
      }
    }
  }
  Params().Validate();
}

std::vector<std::vector<std::vector<std::size_t>>> SamplePartitions(int population, int group_size,
                                                                    int waves,
                                                                    std::uint64_t seed) {
  if (group_size < 1 || population % group_size != 0) {
    throw std::invalid_argument("population must be divisible by group_size");
  }
  std::vector<std::vector<std::vector<std::size_t>>> result(static_cast<std::size_t>(waves));
  std::vector<std::size_t> order(static_cast<std::size_t>(population));
  for (int w = 0; w < waves; ++w) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng rng(DeriveSeed(seed, {static_cast<std::uint64_t>(w)}));
    Shuffle(order, rng);
    auto& groups = result[static_cast<std::size_t>(w)];
    for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(group_size)) {
      groups.emplace_back(order.begin() + static_cast<std::ptrdiff_t>(start),
                          order.begin() + static_cast<std::ptrdiff_t>(start) + group_size);
    }
  }
  return result;
}

std::vector<Individual> InitialPopulation(const EvolutionConfig& config, std::uint64_t seed) {
  config.Validate();
  Rng rng(seed);
  std::vector<Individual> population;
  population.reserve(static_cast<std::size_t>(config.population));
  for (int i = 0; i < config.population; ++i) {
    const std::size_t gene = static_cast<std::size_t>(i) % config.pools.size();
    const StrategyPool& pool = config.pools[gene];
    population.push_back({gene, pool.members[rng.Below(pool.members.size())], 0.0});
  }
  return population;
}

std::vector<int> GeneCounts(std::span<const Individual> population, std::size_t genes) {
  std::vector<int> counts(genes, 0);
  for (const Individual& ind : population) {
    if (ind.gene >= genes) throw std::out_of_range("unregistered gene index " + std::to_string(ind.gene));
    ++counts[ind.gene];
  }
  return counts;
}

double WelfareEfficiency(std::span<const double> game_welfare, const WelfareBounds& bounds) {
  if (bounds.max_mean == bounds.min_mean) {
    throw std::domain_error("welfare efficiency undefined: welfare_max == welfare_min");
  }
  if (game_welfare.empty()) throw std::invalid_argument("welfare efficiency of no games");
  double sum = 0.0;
  for (double w : game_welfare) sum += w;
  const double mean = sum / static_cast<double>(game_welfare.size());
  const double efficiency = (mean - bounds.min_mean) / (bounds.max_mean - bounds.min_mean);
  return bounds.approximate ? std::clamp(efficiency, 0.0, 1.0) : efficiency;
}

double WelfareEfficiency(std::span<const double> game_welfare, const GameParams& params) {
  return WelfareEfficiency(game_welfare, ComputeWelfareBounds(params));
}

GenerationOutcome RunGeneration(std::span<const Individual> population,
                                const EvolutionConfig& config, int generation,
                                const WelfareBounds& bounds, std::uint64_t seed) {
  if (static_cast<int>(population.size()) != config.population) {
    throw std::invalid_argument("population has " + std::to_string(population.size()) +
                                " agents, config says " + std::to_string(config.population));
  }
  const std::size_t gene_count = config.pools.size();
  const GameParams params = config.Params();
  const std::uint64_t gen_seed = DeriveSeed(seed, {static_cast<std::uint64_t>(generation)});

  GenerationOutcome out;
  out.scored.assign(population.begin(), population.end());
  out.stats.generation = generation;
  out.stats.gene_counts = GeneCounts(population, gene_count);

  // (1) Play every group of every wave.
  const auto partitions =
      SamplePartitions(config.population, config.group_size, config.games_per_agent,
                       DeriveSeed(gen_seed, {0}));
  const std::size_t groups_per_wave = partitions.front().size();
  const std::size_t games = partitions.size() * groups_per_wave;
  std::vector<std::vector<double>> normalized(games);
  out.game_welfare.assign(games, 0.0);
  ParallelFor(games, config.threads, [&](std::size_t g) {
    const auto& members = partitions[g / groups_per_wave][g % groups_per_wave];
    std::vector<Strategy> lineup;
    lineup.reserve(members.size());
    for (std::size_t a : members) lineup.push_back(out.scored[a].strategy);
    GameResult result = PlayGame(params, lineup, DeriveSeed(gen_seed, {1, g}), config.step_budget);
    normalized[g] = std::move(result.normalized);
    out.game_welfare[g] = result.mean_welfare;
  });

  out.games_played.assign(population.size(), 0);
  std::vector<double> payoff_sum(population.size(), 0.0);
  for (std::size_t g = 0; g < games; ++g) {
    const auto& members = partitions[g / groups_per_wave][g % groups_per_wave];
    for (std::size_t seat = 0; seat < members.size(); ++seat) {
      payoff_sum[members[seat]] += normalized[g][seat];
      ++out.games_played[members[seat]];
    }
  }
  for (std::size_t a = 0; a < population.size(); ++a) {
    out.scored[a].fitness = payoff_sum[a] / out.games_played[a];
  }

  double welfare_sum = 0.0;
  for (double w : out.game_welfare) welfare_sum += w;
  out.stats.mean_welfare = welfare_sum / static_cast<double>(games);
  out.stats.welfare_efficiency = WelfareEfficiency(out.game_welfare, bounds);

  // (2) Elites: shuffle first so that ties are ordered at random.
  Rng rank_rng(DeriveSeed(gen_seed, {2}));
  std::vector<std::size_t> ranking(population.size());
  std::iota(ranking.begin(), ranking.end(), std::size_t{0});
  Shuffle(ranking, rank_rng);
  std::stable_sort(ranking.begin(), ranking.end(), [&](std::size_t a, std::size_t b) {
    return out.scored[a].fitness > out.scored[b].fitness;
  });
  out.elite_indices.assign(ranking.begin(), ranking.begin() + config.elites);

  out.next.reserve(population.size());
  for (std::size_t e : out.elite_indices) {
    out.next.push_back({out.scored[e].gene, out.scored[e].strategy, 0.0});
  }

  // (3) Offspring: fitness-proportional parent over the whole scored
  // population, optional mutation to a different gene, fresh strategy.
  std::vector<double> cumulative(population.size());
  double running = 0.0;
  for (std::size_t a = 0; a < population.size(); ++a) {
    running += out.scored[a].fitness;
    cumulative[a] = running;
  }
  Rng repro(DeriveSeed(gen_seed, {3}));
  while (out.next.size() < population.size()) {
    std::size_t parent;
    if (running > 0.0) {
      const double pick = repro.Uniform() * running;
      parent = static_cast<std::size_t>(
          std::upper_bound(cumulative.begin(), cumulative.end(), pick) - cumulative.begin());
      parent = std::min(parent, population.size() - 1);
    } else {
      parent = repro.Below(population.size());
    }
    std::size_t gene = out.scored[parent].gene;
    if (gene_count > 1 && repro.Bernoulli(config.mutation_rate)) {
      const std::size_t other = repro.Below(gene_count - 1);
      gene = other >= gene ? other + 1 : other;
    }
    const StrategyPool& pool = config.pools[gene];
    out.next.push_back({gene, pool.members[repro.Below(pool.members.size())], 0.0});
  }
  return out;
}

std::string_view ToString(Termination t) {
  return t == Termination::kThreshold ? "threshold" : "max_generations";
}

namespace {

bool Dominated(const std::vector<int>& counts, const EvolutionConfig& config) {
  const double needed = config.dominance_threshold * config.population;
  for (int c : counts) {
    if (c >= needed - 1e-9) return true;
  }
  return false;
}

EvolutionResult Evolve(const EvolutionConfig& config, unsigned threads) {
  config.Validate();
  EvolutionConfig local = config;
  local.threads = threads;
  const WelfareBounds bounds = ComputeWelfareBounds(local.Params());
  const std::uint64_t seed = local.master_seed;

  std::vector<Individual> population = InitialPopulation(local, DeriveSeed(seed, {0}));
  EvolutionResult result;
  for (int generation = 0;; ++generation) {
    const std::vector<int> counts = GeneCounts(population, local.pools.size());
    if (Dominated(counts, local)) {
      result.terminated_by = Termination::kThreshold;
      break;
    }
    if (generation == local.max_generations) {
      result.terminated_by = Termination::kMaxGenerations;
      break;
    }
    GenerationOutcome outcome =
        RunGeneration(population, local, generation, bounds, DeriveSeed(seed, {1}));
    result.history.push_back(std::move(outcome.stats));
    population = std::move(outcome.next);
    ++result.generations_run;
  }

  result.final_counts = GeneCounts(population, local.pools.size());
  const int best = *std::max_element(result.final_counts.begin(), result.final_counts.end());
  std::vector<std::size_t> leaders;
  for (std::size_t g = 0; g < result.final_counts.size(); ++g) {
    if (result.final_counts[g] == best) leaders.push_back(g);
  }
  Rng tie(DeriveSeed(seed, {2}));
  result.winner = leaders.size() == 1 ? leaders.front() : leaders[tie.Below(leaders.size())];
  result.final_efficiency = result.history.empty() ? std::numeric_limits<double>::quiet_NaN()
                                                   : result.history.back().welfare_efficiency;
  return result;
}

}  // namespace

EvolutionResult RunEvolution(const EvolutionConfig& config) {
  return Evolve(config, config.threads);
}

std::vector<EvolutionResult> RunBatch(const EvolutionConfig& config, int run_count) {
  if (run_count < 1) throw std::invalid_argument("batch needs run_count >= 1");
  config.Validate();
  std::vector<EvolutionResult> results(static_cast<std::size_t>(run_count));
  ParallelFor(results.size(), config.threads, [&](std::size_t run) {
    EvolutionConfig local = config;
    local.master_seed = DeriveSeed(config.master_seed, {run});
    results[run] = Evolve(local, 1);
  });
  return results;
}

BatchSummary Summarize(const EvolutionConfig& config, std::span<const EvolutionResult> results) {
  if (results.empty()) throw std::invalid_argument("summary of no runs");
  BatchSummary summary;
  for (std::size_t g = 0; g < config.pools.size(); ++g) summary.genes.push_back(config.GeneAt(g));
  summary.wins.assign(config.pools.size(), 0);
  summary.runs = static_cast<int>(results.size());
  double generations = 0.0;
  double efficiency = 0.0;
  int efficiency_runs = 0;
  for (const EvolutionResult& r : results) {
    ++summary.wins.at(r.winner);
    if (r.terminated_by == Termination::kThreshold) ++summary.threshold_reached;
    generations += r.generations_run;
    if (!std::isnan(r.final_efficiency)) {
      efficiency += r.final_efficiency;
      ++efficiency_runs;
    }
  }
  summary.average_generations = generations / summary.runs;
  summary.mean_final_efficiency = efficiency_runs > 0
                                      ? efficiency / efficiency_runs
                                      : std::numeric_limits<double>::quiet_NaN();
  return summary;
}

BatchSummary BatchRuns(const EvolutionConfig& config, int run_count) {
  const std::vector<EvolutionResult> results = RunBatch(config, run_count);
  return Summarize(config, results);
}

std::string GenerationCsv(const EvolutionConfig& config, std::span<const EvolutionResult> runs) {
  std::string out = "run,generation,gene,frequency,mean_welfare,welfare_efficiency\n";
  for (std::size_t run = 0; run < runs.size(); ++run) {
    for (const GenerationStats& s : runs[run].history) {
      for (std::size_t g = 0; g < s.gene_counts.size(); ++g) {
        out += std::to_string(run) + ',' + std::to_string(s.generation) + ',' +
               config.GeneAt(g).Name() + ',' + std::to_string(s.gene_counts[g]) + ',' +
               FormatDouble(s.mean_welfare) + ',' + FormatDouble(s.welfare_efficiency) + '\n';
      }
    }
  }
  return out;
}

std::string BatchSummaryCsv(const BatchSummary& summary) {
  std::string out = "row,gene_tag,attitude,value\n";
  for (std::size_t g = 0; g < summary.genes.size(); ++g) {
    out += "wins," + summary.genes[g].pool_tag + ',' +
           std::string(ToString(summary.genes[g].attitude)) + ',' +
           std::to_string(summary.wins[g]) + '\n';
  }
  out += "threshold_reached,,," + std::to_string(summary.threshold_reached) + '\n';
  out += "average_generations,,," + FormatDouble(summary.average_generations) + '\n';
  out += "welfare_efficiency,,," +
         (std::isnan(summary.mean_final_efficiency) ? std::string("undefined")
                                                    : FormatDouble(summary.mean_final_efficiency)) +
         '\n';
  out += "runs,,," + std::to_string(summary.runs) + '\n';
  return out;
}

nlohmann::json ToJson(const BatchSummary& summary) {
  nlohmann::json wins = nlohmann::json::array();
  for (std::size_t g = 0; g < summary.genes.size(); ++g) {
    wins.push_back({{"gene_tag", summary.genes[g].pool_tag},
                    {"attitude", ToString(summary.genes[g].attitude)},
                    {"wins", summary.wins[g]}});
  }
  nlohmann::json j{{"runs", summary.runs},
                   {"wins", std::move(wins)},
                   {"threshold_reached", summary.threshold_reached},
                   {"average_generations", summary.average_generations}};
  if (std::isnan(summary.mean_final_efficiency)) {
    j["welfare_efficiency"] = nullptr;
  } else {
    j["welfare_efficiency"] = summary.mean_final_efficiency;
  }
  return j;
}

}  // namespace dilemma
