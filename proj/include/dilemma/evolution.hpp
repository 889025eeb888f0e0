#ifndef DILEMMA_EVOLUTION_HPP
#define DILEMMA_EVOLUTION_HPP

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "dilemma/game.hpp"
#include "dilemma/strategy.hpp"

namespace dilemma {

// (pool tag, attitude): the unit of cultural selection.
struct Gene {
  std::string pool_tag;
  Attitude attitude = Attitude::kCollective;

  std::string Name() const;  // "tag/attitude"
  bool operator==(const Gene&) const = default;
};

struct Individual {
  std::size_t gene = 0;  // index into EvolutionConfig::pools
  Strategy strategy;
  double fitness = 0.0;
};

struct EvolutionConfig {
  GameKind kind = GameKind::kPublicGoods;
  int rounds = 20;
  double k = 2.0;
  int population = 512;
  int group_size = 4;
  int games_per_agent = 4;
  int elites = 64;
  double mutation_rate = 0.10;
  double dominance_threshold = 0.75;
  int max_generations = 200;
  // One registered pool per gene; the gene of pool i is index i.
  std::vector<StrategyPool> pools;
  std::uint64_t master_seed = 0;
  unsigned threads = 1;
  std::uint64_t step_budget = kDefaultStepBudget;

  GameParams Params() const;
  Gene GeneAt(std::size_t index) const;
  // Index of the pool registered for `gene`; throws for an unregistered gene.
  std::size_t GeneIndex(const Gene& gene) const;
  // Throws std::invalid_argument on the first violated constraint.
  void Validate() const;
};

struct GenerationStats {
  int generation = 0;
  std::vector<int> gene_counts;  // of the population that played
  double mean_welfare = 0.0;      // mean over the generation's games
  double welfare_efficiency = 0.0;
};

// Everything a generation step produced, including bookkeeping that tests
// check against the invariants.
struct GenerationOutcome {
  std::vector<Individual> next;    // elites first, then offspring
  std::vector<Individual> scored;  // the input population with fitness set
  GenerationStats stats;
  std::vector<std::size_t> elite_indices;  // into `scored`
  std::vector<int> games_played;           // per agent of `scored`
  std::vector<double> game_welfare;        // one per game played
};

// `waves` independent uniform partitions of [0, population) into groups of
// group_size. Result[w][g] lists the agents of group g in wave w.
std::vector<std::vector<std::vector<std::size_t>>> SamplePartitions(int population, int group_size,
                                                                    int waves,
                                                                    std::uint64_t seed);

// Round-robin over genes, each agent with a strategy drawn from its pool.
std::vector<Individual> InitialPopulation(const EvolutionConfig& config, std::uint64_t seed);

std::vector<int> GeneCounts(std::span<const Individual> population, std::size_t genes);

// One generation: play games_per_agent partitions, score, keep the elites,
// and refill the rest by fitness-proportional copying with mutation.
GenerationOutcome RunGeneration(std::span<const Individual> population,
                                const EvolutionConfig& config, int generation,
                                const WelfareBounds& bounds, std::uint64_t seed);

// (mean welfare - min) / (max - min). Clamped to [0, 1] only when the bounds
// are approximate. Throws std::domain_error when max == min.
double WelfareEfficiency(std::span<const double> game_welfare, const WelfareBounds& bounds);
double WelfareEfficiency(std::span<const double> game_welfare, const GameParams& params);

enum class Termination { kThreshold, kMaxGenerations };
std::string_view ToString(Termination t);

struct EvolutionResult {
  std::size_t winner = 0;
  Termination terminated_by = Termination::kMaxGenerations;
  int generations_run = 0;
  std::vector<GenerationStats> history;
  std::vector<int> final_counts;
  // Welfare efficiency of the last generation played; NaN if none was.
  double final_efficiency = 0.0;
};

// Iterates until a gene holds dominance_threshold of the population or
// max_generations generations have been played. The winner is the plurality
// gene of the final population; ties are broken by a seeded draw.
EvolutionResult RunEvolution(const EvolutionConfig& config);

struct BatchSummary {
  std::vector<Gene> genes;
  std::vector<int> wins;  // per gene
  int runs = 0;
  int threshold_reached = 0;
  double average_generations = 0.0;
  double mean_final_efficiency = 0.0;  // over runs that played a generation
};

// `run_count` independent runs; run i uses seed DeriveSeed(master_seed, {i}).
// Runs are spread over config.threads workers, each run single-threaded.
std::vector<EvolutionResult> RunBatch(const EvolutionConfig& config, int run_count);
BatchSummary Summarize(const EvolutionConfig& config, std::span<const EvolutionResult> results);
BatchSummary BatchRuns(const EvolutionConfig& config, int run_count);

// run,generation,gene,frequency,mean_welfare,welfare_efficiency: one row per
// gene per generation of each run.
std::string GenerationCsv(const EvolutionConfig& config, std::span<const EvolutionResult> runs);

// Rows per gene with win counts, then the summary rows.
std::string BatchSummaryCsv(const BatchSummary& summary);
nlohmann::json ToJson(const BatchSummary& summary);

}  // namespace dilemma

#endif  // DILEMMA_EVOLUTION_HPP
