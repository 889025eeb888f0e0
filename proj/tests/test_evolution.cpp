#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "dilemma/evolution.hpp"
#include "dilemma/rng.hpp"

using namespace dilemma;

namespace {

StrategyPool Pool(std::string tag, Attitude attitude, const ReferenceSpec& spec, std::size_t size = 8) {
  StrategyPool pool{std::move(tag), attitude, {}};
  for (std::size_t i = 0; i < size; ++i) pool.members.push_back(MakeReference(spec));
  return pool;
}

EvolutionConfig DefectorsAndCooperators() {
  EvolutionConfig c;
  c.rounds = 5;
  c.population = 32;
  c.group_size = 4;
  c.elites = 4;
  c.max_generations = 20;
  c.pools = {Pool("defectors", Attitude::kExploitative, ReferenceSpec::AllD()),
             Pool("cooperators", Attitude::kCollective, ReferenceSpec::AllC())};
  return c;
}

double Mean(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0) / v.size(); }

double StdError(const std::vector<double>& v) {
  const double m = Mean(v);
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return std::sqrt(ss / (v.size() - 1) / v.size());
}

}  // namespace

TEST_CASE("generation invariants") {
  EvolutionConfig c = DefectorsAndCooperators();
  c.pools.push_back(Pool("random", Attitude::kCollective, ReferenceSpec::Random(0.5)));
  c.population = 48;
  c.elites = 6;
  c.games_per_agent = 3;
  const WelfareBounds bounds = ComputeWelfareBounds(c.Params());
  std::vector<Individual> pop = InitialPopulation(c, 1);
  for (int g = 0; g < 30; ++g) {
    const GenerationOutcome out = RunGeneration(pop, c, g, bounds, 77);
    REQUIRE(out.next.size() == 48);
    const std::vector<int> counts = GeneCounts(out.next, 3);
    CHECK(std::accumulate(counts.begin(), counts.end(), 0) == 48);
    CHECK(out.stats.gene_counts == GeneCounts(pop, 3));
    CHECK(out.stats.generation == g);
    for (int played : out.games_played) CHECK(played == 3);
    CHECK(out.game_welfare.size() == 48 / 4 * 3);

    REQUIRE(out.elite_indices.size() == 6);
    double weakest_elite = 1e300;
    for (std::size_t e = 0; e < 6; ++e) {
      const Individual& kept = out.scored[out.elite_indices[e]];
      CHECK(out.next[e].gene == kept.gene);
      CHECK(out.next[e].strategy == kept.strategy);
      weakest_elite = std::min(weakest_elite, kept.fitness);
    }
    for (std::size_t i = 0; i < out.scored.size(); ++i) {
      if (std::find(out.elite_indices.begin(), out.elite_indices.end(), i) == out.elite_indices.end()) {
        CHECK(out.scored[i].fitness <= weakest_elite);
      }
    }
    pop = out.next;
  }
}

TEST_CASE("small populations play exactly their quota") {
  EvolutionConfig c = DefectorsAndCooperators();
  c.population = 8;
  c.elites = 1;
  c.games_per_agent = 4;
  const GenerationOutcome out = RunGeneration(InitialPopulation(c, 2), c, 0, ComputeWelfareBounds(c.Params()), 3);
  for (int played : out.games_played) CHECK(played == 4);
  CHECK(out.game_welfare.size() == 8);
}

TEST_CASE("partitions cover the population") {
  for (const auto& wave : SamplePartitions(64, 4, 50, 9)) {
    std::vector<std::size_t> seen;
    for (const auto& group : wave) {
      CHECK(group.size() == 4);
      seen.insert(seen.end(), group.begin(), group.end());
    }
    std::sort(seen.begin(), seen.end());
    std::vector<std::size_t> all(64);
    std::iota(all.begin(), all.end(), std::size_t{0});
    CHECK(seen == all);
  }
}

TEST_CASE("uniform partitions form all-cooperator groups at the hypergeometric rate") {
  // Agents [0, f) are cooperators. P(all four in one group are cooperators)
  // = C(f,4) / C(N,4), frozen from exact rational arithmetic.
  struct Case {
    int population, cooperators;
    double probability;
  };
  for (const Case c : {Case{16, 8, 1.0 / 26}, Case{64, 32, 145.0 / 2562}, Case{64, 48, 16215.0 / 52948}}) {
    const int waves = 20000;
    int hits = 0;
    int groups = 0;
    for (const auto& wave : SamplePartitions(c.population, 4, waves, 4242)) {
      for (const auto& group : wave) {
        ++groups;
        hits += std::all_of(group.begin(), group.end(),
                            [&](std::size_t a) { return a < static_cast<std::size_t>(c.cooperators); });
      }
    }
    const double rate = static_cast<double>(hits) / groups;
    const double sigma = std::sqrt(c.probability * (1 - c.probability) / groups);
    CHECK(std::abs(rate - c.probability) <= 4 * sigma);
  }
}

TEST_CASE("without mutation lost genes stay lost") {
  EvolutionConfig c = DefectorsAndCooperators();
  c.pools.push_back(Pool("random", Attitude::kCollective, ReferenceSpec::Random(0.5)));
  c.mutation_rate = 0.0;
  c.population = 24;
  c.elites = 2;
  const WelfareBounds bounds = ComputeWelfareBounds(c.Params());
  std::vector<Individual> pop = InitialPopulation(c, 4);
  for (Individual& ind : pop) {
    if (ind.gene == 2) ind = Individual{0, c.pools[0].members[0], 0.0};
  }
  for (int g = 0; g < 25; ++g) {
    pop = RunGeneration(pop, c, g, bounds, 11).next;
    CHECK(GeneCounts(pop, 3)[2] == 0);
  }

  std::vector<Individual> single(24, Individual{1, c.pools[1].members[0], 0.0});
  for (int g = 0; g < 5; ++g) {
    single = RunGeneration(single, c, g, bounds, 12).next;
    CHECK(GeneCounts(single, 3)[1] == 24);
  }
}

TEST_CASE("offspring follow fitness shares") {
  // With no elites and no mutation, E[defector offspring] = population x
  // defectors' share of total fitness.
  EvolutionConfig c = DefectorsAndCooperators();
  c.elites = 0;
  c.mutation_rate = 0.0;
  c.population = 64;
  const WelfareBounds bounds = ComputeWelfareBounds(c.Params());
  const std::vector<Individual> start = InitialPopulation(c, 5);
  std::vector<double> excess;
  for (std::uint64_t seed = 0; seed < 300; ++seed) {
    const GenerationOutcome out = RunGeneration(start, c, 0, bounds, seed);
    double total = 0.0, defectors = 0.0;
    for (const Individual& ind : out.scored) {
      total += ind.fitness;
      if (ind.gene == 0) defectors += ind.fitness;
    }
    excess.push_back(GeneCounts(out.next, 2)[0] - 64 * defectors / total);
    // Defectors always out-earn cooperators in the same public goods group.
    CHECK(defectors / 32 > (total - defectors) / 32);
  }
  CHECK(std::abs(Mean(excess)) <= 3 * StdError(excess));
}

TEST_CASE("defection spreads in the public goods game") {
  EvolutionConfig c = DefectorsAndCooperators();
  c.population = 64;
  c.elites = 8;
  c.mutation_rate = 0.0;
  c.dominance_threshold = 1.0;
  c.max_generations = 100;
  int fixed = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    c.master_seed = seed;
    const EvolutionResult r = RunEvolution(c);
    REQUIRE(!r.history.empty());
    fixed += r.final_counts[0] == 64;
    CHECK(r.winner == 0);
  }
  CHECK(fixed >= 18);
}

TEST_CASE("neutral genes drift around their expectation") {
  // Three behaviourally identical genes, mutation 1: elites are a uniform
  // draw, every offspring copies a uniform parent and switches to one of the
  // other two genes. From 22/21/21, E[gene 0 next] = 8*22/64 + 56*(42/64)/2 = 21.125.
  EvolutionConfig c;
  c.rounds = 3;
  c.population = 64;
  c.elites = 8;
  c.mutation_rate = 1.0;
  c.pools = {Pool("a", Attitude::kCollective, ReferenceSpec::AllC()),
             Pool("b", Attitude::kCollective, ReferenceSpec::AllC()),
             Pool("c", Attitude::kCollective, ReferenceSpec::AllC())};
  const WelfareBounds bounds = ComputeWelfareBounds(c.Params());
  const std::vector<Individual> start = InitialPopulation(c, 0);
  REQUIRE(GeneCounts(start, 3) == std::vector<int>{22, 21, 21});
  std::vector<double> counts;
  for (std::uint64_t seed = 0; seed < 400; ++seed) {
    counts.push_back(GeneCounts(RunGeneration(start, c, 0, bounds, seed).next, 3)[0]);
  }
  CHECK(std::abs(Mean(counts) - 21.125) <= 3 * StdError(counts));
}

TEST_CASE("two neutral genes with forced switching stay balanced") {
  EvolutionConfig c;
  c.rounds = 3;
  c.population = 64;
  c.elites = 8;
  c.mutation_rate = 1.0;
  c.pools = {Pool("a", Attitude::kCollective, ReferenceSpec::AllC()),
             Pool("b", Attitude::kCollective, ReferenceSpec::AllC())};
  const WelfareBounds bounds = ComputeWelfareBounds(c.Params());
  std::vector<double> long_run;
  for (std::uint64_t run = 0; run < 40; ++run) {
    std::vector<Individual> pop = InitialPopulation(c, run);
    double sum = 0.0;
    int samples = 0;
    for (int g = 0; g < 60; ++g) {
      pop = RunGeneration(pop, c, g, bounds, DeriveSeed(1000, {run})).next;
      if (g >= 20) sum += GeneCounts(pop, 2)[0], ++samples;
    }
    long_run.push_back(sum / samples);
  }
  CHECK(std::abs(Mean(long_run) - 32.0) <= 3 * StdError(long_run));
}

TEST_CASE("termination") {
  SUBCASE("a single-gene start is already dominant") {
    EvolutionConfig c = DefectorsAndCooperators();
    c.pools.resize(1);
    const EvolutionResult r = RunEvolution(c);
    CHECK(r.terminated_by == Termination::kThreshold);
    CHECK(r.generations_run == 0);
    CHECK(r.history.empty());
    CHECK(r.winner == 0);
    CHECK(std::isnan(r.final_efficiency));
  }
  SUBCASE("max_generations = 1 plays one generation") {
    EvolutionConfig c = DefectorsAndCooperators();
    c.max_generations = 1;
    c.dominance_threshold = 1.0;
    const EvolutionResult r = RunEvolution(c);
    CHECK(r.history.size() == 1);
    CHECK(r.generations_run == 1);
    CHECK(r.terminated_by == Termination::kMaxGenerations);
    CHECK(ToString(r.terminated_by) == "max_generations");
  }
  SUBCASE("history matches generations_run") {
    EvolutionConfig c = DefectorsAndCooperators();
    c.mutation_rate = 0.0;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      c.master_seed = seed;
      const EvolutionResult r = RunEvolution(c);
      CHECK(static_cast<int>(r.history.size()) == r.generations_run);
      CHECK(r.generations_run <= c.max_generations);
      if (r.terminated_by == Termination::kThreshold) {
        const int top = *std::max_element(r.final_counts.begin(), r.final_counts.end());
        CHECK(top >= c.dominance_threshold * c.population);
      }
    }
  }
}

TEST_CASE("welfare efficiency") {
  const GameParams pgg = GameParams::Defaults(GameKind::kPublicGoods, 4, 20, 2.0);
  CHECK(WelfareEfficiency(std::vector<double>{2.0, 2.0}, pgg) == 1.0);
  CHECK(WelfareEfficiency(std::vector<double>{1.0}, pgg) == 0.0);
  CHECK(WelfareEfficiency(std::vector<double>{1.0, 2.0}, pgg) == 0.5);
  CHECK_THROWS_AS(WelfareEfficiency(std::vector<double>{1.0}, WelfareBounds{1.0, 1.0, false}), std::domain_error);

  EvolutionConfig c = DefectorsAndCooperators();
  c.pools.resize(1);
  const WelfareBounds bounds = ComputeWelfareBounds(c.Params());
  std::vector<Individual> defectors(32, Individual{0, c.pools[0].members[0], 0.0});
  CHECK(RunGeneration(defectors, c, 0, bounds, 1).stats.welfare_efficiency == 0.0);
}

TEST_CASE("batches") {
  EvolutionConfig c = DefectorsAndCooperators();
  c.max_generations = 10;
  c.master_seed = 3;
  const BatchSummary one = BatchRuns(c, 1);
  CHECK(one.runs == 1);
  CHECK(std::accumulate(one.wins.begin(), one.wins.end(), 0) == 1);

  const std::vector<EvolutionResult> runs = RunBatch(c, 12);
  const BatchSummary s = Summarize(c, runs);
  CHECK(s.runs == 12);
  CHECK(std::accumulate(s.wins.begin(), s.wins.end(), 0) == 12);
  CHECK(s.genes[0].Name() == "defectors/exploitative");
  CHECK(s.threshold_reached <= 12);
  CHECK(s.average_generations <= 10.0);

  c.threads = 4;
  CHECK(GenerationCsv(c, RunBatch(c, 12)) == GenerationCsv(c, runs));
  CHECK(BatchSummaryCsv(s).rfind("row,gene_tag,attitude,value\n", 0) == 0);
  CHECK(ToJson(s)["runs"] == 12);
  CHECK_THROWS_AS(RunBatch(c, 0), std::invalid_argument);
}

TEST_CASE("a run does not depend on thread count") {
  EvolutionConfig c = DefectorsAndCooperators();
  c.pools.push_back(Pool("random", Attitude::kCollective, ReferenceSpec::Random(0.4)));
  c.population = 64;
  c.master_seed = 99;
  c.dominance_threshold = 1.0;
  c.threads = 1;
  const EvolutionResult a = RunEvolution(c);
  c.threads = 4;
  const EvolutionResult b = RunEvolution(c);
  CHECK(GenerationCsv(c, std::vector<EvolutionResult>{a}) == GenerationCsv(c, std::vector<EvolutionResult>{b}));
  CHECK(a.final_counts == b.final_counts);
  CHECK(a.winner == b.winner);
}

TEST_CASE("configuration errors") {
  EvolutionConfig c = DefectorsAndCooperators();
  CHECK_THROWS_AS(c.GeneIndex(Gene{"nobody", Attitude::kCollective}), std::invalid_argument);
  CHECK(c.GeneIndex(Gene{"cooperators", Attitude::kCollective}) == 1);
  CHECK_THROWS_AS(c.GeneAt(5), std::out_of_range);

  auto rejects = [](EvolutionConfig bad) { CHECK_THROWS_AS(bad.Validate(), std::invalid_argument); };
  EvolutionConfig bad = c;
  bad.population = 30;
  rejects(bad);
  bad = c;
  bad.elites = 32;
  rejects(bad);
  bad = c;
  bad.mutation_rate = 1.5;
  rejects(bad);
  bad = c;
  bad.pools.clear();
  rejects(bad);
  bad = c;
  bad.pools.push_back(c.pools[0]);
  rejects(bad);
  bad = c;
  bad.pools[1].members.clear();
  rejects(bad);
  bad = c;
  bad.dominance_threshold = 0.0;
  rejects(bad);
  CHECK_NOTHROW(c.Validate());

  std::vector<Individual> stray = InitialPopulation(c, 0);
  stray[0].gene = 7;
  CHECK_THROWS(RunGeneration(stray, c, 0, ComputeWelfareBounds(c.Params()), 0));
}
