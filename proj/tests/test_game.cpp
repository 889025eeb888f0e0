#include <doctest.h>

#include <algorithm>
#include <numeric>

#include "dilemma/game.hpp"
#include "dilemma/io.hpp"
#include "dilemma/play.hpp"
#include "dilemma/rng.hpp"
#include "dilemma/strategy.hpp"

using namespace dilemma;

namespace {

constexpr Action C = Action::kCooperate;
constexpr Action D = Action::kDefect;

std::vector<Action> Repeat(Action a, int n) { return std::vector<Action>(n, a); }

std::vector<Strategy> Lineup(const Strategy& s, int n) { return std::vector<Strategy>(n, s); }

}  // namespace

TEST_CASE("public goods payoffs, six players") {
  const GameParams p = GameParams::Defaults(GameKind::kPublicGoods, 6, 20, 2.0);
  for (double v : PublicGoodsPayoffs(Repeat(D, 6), p)) CHECK(v == 1.0);
  for (double v : PublicGoodsPayoffs(Repeat(C, 6), p)) CHECK(v == 2.0);
  const auto mixed = PublicGoodsPayoffs(std::vector<Action>{C, C, C, D, D, D}, p);
  CHECK(mixed == std::vector<double>{1, 1, 1, 2, 2, 2});
}

TEST_CASE("public goods rejects bad input") {
  GameParams p = GameParams::Defaults(GameKind::kPublicGoods, 4, 20, 2.0);
  CHECK_THROWS_AS(PublicGoodsPayoffs(Repeat(C, 3), p), std::invalid_argument);
  p.k = 4.0;
  CHECK_THROWS_AS(PublicGoodsPayoffs(Repeat(C, 4), p), std::invalid_argument);
  p.k = 1.0;
  CHECK_THROWS_AS(p.Validate(), std::invalid_argument);
  GameParams crd = GameParams::Defaults(GameKind::kCollectiveRisk, 4);
  CHECK_THROWS_AS(PublicGoodsPayoffs(Repeat(C, 4), crd), std::invalid_argument);
}

TEST_CASE("collective risk payoffs") {
  const GameParams p = GameParams::Defaults(GameKind::kCollectiveRisk, 4, 20, 2.0);
  REQUIRE(p.threshold == 2);
  CHECK(CollectiveRiskPayoffs(std::vector<Action>{C, C, D, D}, p) == std::vector<double>{2, 2, 3, 3});
  CHECK(CollectiveRiskPayoffs(std::vector<Action>{C, D, D, D}, p) == std::vector<double>{0, 1, 1, 1});
  CHECK(CollectiveRiskPayoffs(Repeat(C, 4), p) == std::vector<double>{2, 2, 2, 2});
  CHECK_THROWS_AS(CollectiveRiskPayoffs(Repeat(C, 5), p), std::invalid_argument);
  CHECK(GameParams::Defaults(GameKind::kCollectiveRisk, 7).threshold == 3);
  GameParams bad = p;
  bad.threshold = 0;
  CHECK_THROWS_AS(bad.Validate(), std::invalid_argument);
  bad.threshold = 5;
  CHECK_THROWS_AS(bad.Validate(), std::invalid_argument);
}

TEST_CASE("common pool round") {
  const GameParams p4 = GameParams::Defaults(GameKind::kCommonPool, 4);
  REQUIRE(p4.capacity == 16.0);

  const CommonPoolStep all_c = CommonPoolRound(Repeat(C, 4), 16.0, p4);
  CHECK(all_c.payoffs == std::vector<double>{2, 2, 2, 2});
  CHECK(all_c.remaining == 8.0);
  CHECK(all_c.next_stock == 16.0);

  const CommonPoolStep all_d = CommonPoolRound(Repeat(D, 4), 16.0, p4);
  CHECK(all_d.payoffs == std::vector<double>{4, 4, 4, 4});
  CHECK(all_d.remaining == 0.0);
  CHECK(all_d.next_stock == 0.0);

  const GameParams p2 = GameParams::Defaults(GameKind::kCommonPool, 2);
  const CommonPoolStep mixed = CommonPoolRound(std::vector<Action>{C, D}, 8.0, p2);
  CHECK(mixed.payoffs == std::vector<double>{2, 4});
  CHECK(mixed.remaining == 2.0);
  CHECK(mixed.next_stock == 5.0);

  CHECK_THROWS_AS(CommonPoolRound(Repeat(C, 4), 16.5, p4), std::invalid_argument);
  CHECK_THROWS_AS(CommonPoolRound(Repeat(C, 4), -1.0, p4), std::invalid_argument);
}

TEST_CASE("play_game examples") {
  const Strategy alld = MakeReference(ReferenceSpec::AllD());

  SUBCASE("one round of all-defect public goods") {
    const GameParams p = GameParams::Defaults(GameKind::kPublicGoods, 4, 1);
    const GameResult r = PlayGame(p, Lineup(alld, 4), 1);
    CHECK(r.totals == std::vector<double>{1, 1, 1, 1});
    CHECK(r.rounds.size() == 1);
    CHECK_FALSE(r.rounds[0].stock_before.has_value());
  }
  SUBCASE("common pool collapse") {
    const GameParams p = GameParams::Defaults(GameKind::kCommonPool, 4, 2);
    const GameResult r = PlayGame(p, Lineup(alld, 4), 1);
    CHECK(r.rounds[0].payoffs == std::vector<double>{4, 4, 4, 4});
    CHECK(*r.rounds[1].stock_before == 0.0);
    CHECK(r.rounds[1].payoffs == std::vector<double>{0, 0, 0, 0});
    CHECK(r.totals == std::vector<double>{4, 4, 4, 4});
    CHECK(r.normalized == std::vector<double>{2, 2, 2, 2});
  }
  SUBCASE("same seed, same result") {
    const GameParams p = GameParams::Defaults(GameKind::kCommonPool, 5, 20);
    std::vector<Strategy> mix{MakeReference(ReferenceSpec::Random(0.5)),
                              MakeReference(ReferenceSpec::CC(2)),
                              MakeReference(ReferenceSpec::CD(1)),
                              MakeReference(ReferenceSpec::Random(0.8)), alld};
    const GameResult a = PlayGame(p, mix, 99);
    const GameResult b = PlayGame(p, mix, 99);
    CHECK(ToJson(a, p).dump() == ToJson(b, p).dump());
    CHECK(GameResultCsv(a) == GameResultCsv(b));
  }
  SUBCASE("wrong lineup size") {
    const GameParams p = GameParams::Defaults(GameKind::kPublicGoods, 4, 3);
    CHECK_THROWS_AS(PlayGame(p, Lineup(alld, 3), 1), std::invalid_argument);
  }
}

TEST_CASE("play_game names the faulting strategy") {
  class Broken : public Policy {
   public:
    Action Decide(const Observation& obs, Rng&, StepMeter&) override {
      return obs.round_index == 2 ? static_cast<Action>(7) : Action::kCooperate;
    }
  };
  const Strategy broken("broken", Origin::kFile, [] { return std::make_unique<Broken>(); });
  const Strategy allc = MakeReference(ReferenceSpec::AllC());
  const GameParams p = GameParams::Defaults(GameKind::kPublicGoods, 3, 5);
  try {
    PlayGame(p, std::vector<Strategy>{allc, broken, allc}, 3);
    FAIL("expected a fault");
  } catch (const StrategyFault& f) {
    CHECK(f.kind() == FaultKind::kInvalidAction);
    CHECK(f.player() == 1);
    CHECK(f.label() == "broken");
    CHECK(f.round() == 2);
  }

  class Spinner : public Policy {
   public:
    Action Decide(const Observation&, Rng&, StepMeter& meter) override {
      for (;;) meter.Charge();
    }
  };
  const Strategy spinner("spinner", Origin::kFile, [] { return std::make_unique<Spinner>(); });
  try {
    PlayGame(p, std::vector<Strategy>{spinner, allc, allc}, 3, 1000);
    FAIL("expected a fault");
  } catch (const StrategyFault& f) {
    CHECK(f.kind() == FaultKind::kStepBudget);
    CHECK(f.player() == 0);
    CHECK(f.round() == 0);
  }
}

TEST_CASE("players only see completed rounds") {
  class Recorder : public Policy {
   public:
    Action Decide(const Observation& obs, Rng&, StepMeter&) override {
      CHECK(static_cast<int>(obs.history.size()) == obs.round_index);
      for (const RoundRecord& rec : obs.history) CHECK(rec.actions.size() == 3u);
      return obs.round_index % 2 ? Action::kDefect : Action::kCooperate;
    }
  };
  const Strategy s("recorder", Origin::kFile, [] { return std::make_unique<Recorder>(); });
  const GameParams p = GameParams::Defaults(GameKind::kCommonPool, 3, 6);
  const GameResult r = PlayGame(p, Lineup(s, 3), 0);
  CHECK(r.rounds.size() == 6);
}

TEST_CASE("welfare bounds") {
  SUBCASE("public goods") {
    for (int n : {2, 4, 16}) {
      const WelfareBounds b =
          ComputeWelfareBounds(GameParams::Defaults(GameKind::kPublicGoods, std::max(n, 3), 20, 2.0));
      CHECK(b.min_mean == 1.0);
      CHECK(b.max_mean == 2.0);
      CHECK_FALSE(b.approximate);
    }
  }
  SUBCASE("collective risk") {
    const WelfareBounds b = ComputeWelfareBounds(GameParams::Defaults(GameKind::kCollectiveRisk, 4));
    CHECK(b.min_mean == doctest::Approx(0.75).epsilon(1e-12));
    CHECK(b.max_mean == doctest::Approx(2.5).epsilon(1e-12));
  }
  SUBCASE("common pool, exhaustive") {
    // Frozen from an exact rational enumeration of all count sequences.
    struct Case {
      int n, r;
      double lo, hi;
    };
    for (const Case c : {Case{2, 2, 2.0, 3.0}, Case{2, 3, 4.0 / 3, 8.0 / 3},
                         Case{3, 3, 4.0 / 3, 8.0 / 3}, Case{4, 4, 1.0, 2.5}}) {
      const WelfareBounds b = ComputeWelfareBounds(GameParams::Defaults(GameKind::kCommonPool, c.n, c.r));
      CHECK_FALSE(b.approximate);
      CHECK(b.min_mean == doctest::Approx(c.lo).epsilon(1e-12));
      CHECK(b.max_mean == doctest::Approx(c.hi).epsilon(1e-12));
    }
  }
  SUBCASE("common pool, beam search agrees where exhaustive is possible") {
    const GameParams p = GameParams::Defaults(GameKind::kCommonPool, 4, 6);
    const WelfareBounds exact = ComputeWelfareBounds(p);
    BoundsOptions beam;
    beam.exhaustive_budget = 1;
    const WelfareBounds approx = ComputeWelfareBounds(p, beam);
    CHECK(approx.approximate);
    CHECK(approx.min_mean == doctest::Approx(exact.min_mean).epsilon(1e-9));
    CHECK(approx.max_mean == doctest::Approx(exact.max_mean).epsilon(1e-9));
  }
  SUBCASE("common pool, large groups") {
    const WelfareBounds b = ComputeWelfareBounds(GameParams::Defaults(GameKind::kCommonPool, 256, 20));
    CHECK(b.approximate);
    CHECK(b.min_mean == doctest::Approx(4.0 / 20).epsilon(1e-9));
    CHECK(b.max_mean == doctest::Approx(2.0 + 2.0 / 20).epsilon(1e-9));
  }
}

TEST_CASE("payoffs are symmetric under player permutation") {
  Rng rng(2024);
  for (GameKind kind : {GameKind::kPublicGoods, GameKind::kCollectiveRisk, GameKind::kCommonPool}) {
    for (int trial = 0; trial < 200; ++trial) {
      const int n = 3 + static_cast<int>(rng.Below(10));
      GameParams p = GameParams::Defaults(kind, n, 20, 1.0 + rng.Uniform() * (n - 1.5));
      std::vector<Action> actions(n);
      for (Action& a : actions) a = rng.Bernoulli(0.5) ? C : D;
      std::vector<std::size_t> perm(n);
      std::iota(perm.begin(), perm.end(), std::size_t{0});
      Shuffle(perm, rng);
      std::vector<Action> permuted(n);
      for (int i = 0; i < n; ++i) permuted[i] = actions[perm[i]];

      double stock = rng.Uniform() * p.capacity;
      double stock2 = stock;
      RoundRecord a{actions}, b{permuted};
      ScoreRound(p, a, stock);
      ScoreRound(p, b, stock2);
      for (int i = 0; i < n; ++i) CHECK(b.payoffs[i] == a.payoffs[perm[i]]);
      CHECK(stock == stock2);
    }
  }
}

TEST_CASE("payoff ranges") {
  Rng rng(7);
  for (int trial = 0; trial < 500; ++trial) {
    const int n = 2 + static_cast<int>(rng.Below(12));
    std::vector<Action> actions(n);
    for (Action& a : actions) a = rng.Bernoulli(0.5) ? C : D;
    const int nc = CountCooperators(actions);
    if (n >= 3) {
      const GameParams pgg = GameParams::Defaults(GameKind::kPublicGoods, n, 20, 1.5);
      for (double v : PublicGoodsPayoffs(actions, pgg)) {
        CHECK(v >= nc * pgg.k / n - 1e-12);
        CHECK(v <= nc * pgg.k / n + 1 + 1e-12);
      }
    }
    const GameParams crd = GameParams::Defaults(GameKind::kCollectiveRisk, n, 20, 2.5);
    for (double v : CollectiveRiskPayoffs(actions, crd)) {
      CHECK((v == 0.0 || v == 1.0 || v == 2.5 || v == 3.5));
    }
  }
}

TEST_CASE("common pool stock dynamics") {
  for (int n : {2, 3, 4, 8}) {
    const GameParams p = GameParams::Defaults(GameKind::kCommonPool, n);
    for (double stock = 0.0; stock <= p.capacity; stock += p.capacity / 37) {
      double previous = -1.0;
      for (int nc = 0; nc <= n; ++nc) {
        std::vector<Action> actions(n, D);
        std::fill(actions.begin(), actions.begin() + nc, C);
        const CommonPoolStep step = CommonPoolRound(actions, stock, p);
        CHECK(step.next_stock >= 0.0);
        CHECK(step.next_stock <= p.capacity);
        CHECK(step.next_stock >= previous);
        for (double v : step.payoffs) CHECK(v >= 0.0);
        previous = step.next_stock;
      }
    }
  }
}

TEST_CASE("ruin is absorbing") {
  Rng rng(5);
  const GameParams p = GameParams::Defaults(GameKind::kCommonPool, 4);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<Action> actions(4);
    for (Action& a : actions) a = rng.Bernoulli(0.7) ? C : D;
    const CommonPoolStep step = CommonPoolRound(actions, 0.0, p);
    CHECK(step.next_stock == 0.0);
    for (double v : step.payoffs) CHECK(v == 0.0);
  }
}

TEST_CASE("constant public goods groups match the closed form") {
  const Strategy allc = MakeReference(ReferenceSpec::AllC());
  const Strategy alld = MakeReference(ReferenceSpec::AllD());
  for (int n : {3, 4, 7}) {
    for (double k : {1.5, 2.0, 2.75}) {
      if (k >= n) continue;
      for (int nc = 0; nc <= n; ++nc) {
        std::vector<Strategy> lineup(n, alld);
        std::fill(lineup.begin(), lineup.begin() + nc, allc);
        const GameParams p = GameParams::Defaults(GameKind::kPublicGoods, n, 9, k);
        const GameResult r = PlayGame(p, lineup, 0);
        CHECK(r.mean_welfare == doctest::Approx(1 + nc * (k - 1) / n).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("game result bookkeeping") {
  Rng seeds(11);
  for (GameKind kind : {GameKind::kPublicGoods, GameKind::kCollectiveRisk, GameKind::kCommonPool}) {
    for (int trial = 0; trial < 20; ++trial) {
      const int n = 3 + static_cast<int>(seeds.Below(6));
      const GameParams p = GameParams::Defaults(kind, n, 1 + static_cast<int>(seeds.Below(25)));
      std::vector<Strategy> lineup;
      for (int i = 0; i < n; ++i) lineup.push_back(MakeReference(ReferenceSpec::Random(seeds.Uniform())));
      const GameResult r = PlayGame(p, lineup, seeds());
      REQUIRE(static_cast<int>(r.rounds.size()) == p.rounds);
      double sum = 0.0;
      for (int i = 0; i < n; ++i) {
        double column = 0.0;
        for (const RoundRecord& rec : r.rounds) column += rec.payoffs[i];
        CHECK(r.totals[i] == doctest::Approx(column).epsilon(1e-12));
        CHECK(r.normalized[i] == doctest::Approx(column / p.rounds).epsilon(1e-12));
        sum += r.normalized[i];
      }
      CHECK(r.mean_welfare == doctest::Approx(sum / n).epsilon(1e-12));
      for (const RoundRecord& rec : r.rounds) {
        CHECK(rec.stock_before.has_value() == (kind == GameKind::kCommonPool));
        CHECK(rec.stock_after.has_value() == (kind == GameKind::kCommonPool));
        CHECK(rec.payoffs.size() == rec.actions.size());
      }
    }
  }
}

TEST_CASE("game result serialization") {
  const GameParams p = GameParams::Defaults(GameKind::kCommonPool, 2, 2);
  std::vector<Strategy> lineup{MakeReference(ReferenceSpec::AllC()), MakeReference(ReferenceSpec::AllD())};
  const GameResult r = PlayGame(p, lineup, 0);
  const std::string csv = GameResultCsv(r);
  CHECK(csv.rfind("round,player,action,payoff,stock_before,stock_after\n", 0) == 0);
  CHECK(csv.find("0,0,C,2,8,5\n") != std::string::npos);
  CHECK(csv.find("0,1,D,4,8,5\n") != std::string::npos);
  const nlohmann::json j = ToJson(r, p);
  CHECK(j["schema_version"] == 1);
  CHECK(j["rounds"].size() == 2);
}

TEST_CASE("game kind names") {
  for (GameKind kind : {GameKind::kPublicGoods, GameKind::kCollectiveRisk, GameKind::kCommonPool}) {
    CHECK(ParseGameKind(ToString(kind)) == kind);
  }
  CHECK_THROWS_AS(ParseGameKind("chess"), std::invalid_argument);
}
