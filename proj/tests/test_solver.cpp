#include <catch2/catch_amalgamated.hpp>

#include "brt/verify.hpp"

using namespace brt;

TEST_CASE("full-depth dp matches the exhaustive oracle on tiny instances") {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const Scenario tiny = make_tiny_scenario(seed);
    const OracleCheck chk = check_oracle_equivalence(tiny);
    INFO("seed " << seed << ": " << chk.detail);
    CHECK(chk.passed);
    CHECK(chk.dp_cost == chk.oracle_cost);  // exact, not approximate
  }
}

TEST_CASE("singleton capture set forces the stop regardless of depth") {
  const Scenario sc = default_scenario();
  BusState s = initial_state(sc);
  s.position = 602.5;
  s.speed_idx = 1;  // u = 0.5 inside window 1: holding speed would exit it
  s.clock = 120;
  for (int la : {1, 5, 9}) {
    SolverConfig cfg;
    cfg.lookahead = la;
    cfg.horizon = 570;
    DpSolver dp(sc, cfg);
    const PolicyDecision d = dp.decide(s);
    CHECK(d.chosen_speed == 0.0);
  }
}

TEST_CASE("greedy depth-one maximizes position gain when only alpha2 is on") {
  Scenario sc = default_scenario();
  sc.params.alpha.queue = 0.0;
  sc.params.alpha.speed = 0.0;
  BusState s = initial_state(sc);
  s.position = 100.0;
  s.speed_idx = 2;  // u = 1, far behind pd
  s.clock = 60;
  SolverConfig cfg;
  cfg.lookahead = 1;
  cfg.horizon = 570;
  DpSolver dp(sc, cfg);
  CHECK(dp.decide(s).chosen_speed == 1.5);  // max of {0.5, 1, 1.5}
}

TEST_CASE("bus starting inside the return window stops and pays nothing") {
  Scenario tiny = make_tiny_scenario(1);
  // Isolate the terminal bookkeeping: no queues and no tracking penalty.
  tiny.params.alpha = {0.0, 0.0, 0.0};
  BusState s = initial_state(tiny);
  s.position = tiny.network.loop_length;
  s.recent_stop = tiny.network.stop_count() - 1;
  SolverConfig cfg;
  cfg.lookahead = 1;
  cfg.horizon = 1;
  const OracleResult res = exhaustive_oracle(s, 1, cfg, tiny);
  CHECK(res.cost == 0.0);
  CHECK(res.actions == std::vector<double>{0.0});
}

TEST_CASE("scaling the weights preserves the argmin and doubles the cost") {
  const Scenario tiny = make_tiny_scenario(2);
  Scenario scaled = tiny;
  scaled.params.alpha.queue *= 2.0;
  scaled.params.alpha.schedule *= 2.0;
  scaled.params.alpha.speed *= 2.0;
  const int horizon = static_cast<int>(tiny.timetable.depot_return_s);
  SolverConfig cfg;
  cfg.lookahead = horizon;
  cfg.horizon = horizon;
  const OracleResult a = exhaustive_oracle(initial_state(tiny), horizon, cfg, tiny);
  const OracleResult b =
      exhaustive_oracle(initial_state(scaled), horizon, cfg, scaled);
  CHECK(b.actions == a.actions);
  CHECK(b.cost == 2.0 * a.cost);  // doubling is exact in binary floating point
}

TEST_CASE("oracle respects its node budget") {
  const Scenario tiny = make_tiny_scenario(3);
  SolverConfig cfg;
  cfg.lookahead = 1;
  cfg.horizon = 80;
  cfg.node_budget = 2;
  CHECK_THROWS_AS(exhaustive_oracle(initial_state(tiny), 80, cfg, tiny),
                  oracle_too_large);
}

TEST_CASE("solver config validation") {
  SolverConfig cfg;
  cfg.lookahead = 0;
  cfg.horizon = 570;
  CHECK_THROWS_AS(cfg.validate(), validation_error);
  cfg.lookahead = 600;
  CHECK_THROWS_AS(cfg.validate(), validation_error);
  cfg.lookahead = 5;
  cfg.validate();
}

TEST_CASE("baseline follows the desired trajectory") {
  const Scenario sc = default_scenario();
  BusState s = initial_state(sc);

  SECTION("on schedule it holds the nominal speed") {
    s.position = 150.0;  // pd(30) = 150
    s.speed_idx = 2;
    s.clock = 30;
    CHECK(baseline_policy(s, 30, sc.timetable, sc.network, sc.params) == 1.0);
  }
  SECTION("behind schedule it accelerates") {
    s.position = 100.0;
    s.speed_idx = 2;
    s.clock = 30;
    CHECK(baseline_policy(s, 30, sc.timetable, sc.network, sc.params) == 1.5);
  }
  SECTION("departs on time") {
    s.position = 600.0;
    s.recent_stop = 1;
    s.clock = 150;
    CHECK(baseline_policy(s, 150, sc.timetable, sc.network, sc.params) == 0.5);
  }
}

TEST_CASE("planning disturbance carries closed-form means on cadence") {
  const Scenario sc = default_scenario();
  SolverConfig cfg;
  cfg.lookahead = 5;
  cfg.horizon = 570;
  const auto means = planning_arrival_means(sc, cfg);
  REQUIRE(means.size() == 4);
  for (double m : means) CHECK(m == Catch::Approx(2.09).epsilon(1e-12));

  BusState s = initial_state(sc);
  s.clock = 60;
  const Disturbance on = planning_disturbance(s, sc, means);
  CHECK(on.arrivals == means);
  s.clock = 61;
  const Disturbance off = planning_disturbance(s, sc, means);
  for (double g : off.arrivals) CHECK(g == 0.0);

  // sampled validation mode lands close to the closed form
  cfg.expectation = SolverConfig::Expectation::sampled;
  const auto sampled = planning_arrival_means(sc, cfg);
  for (std::size_t i = 0; i < sampled.size(); ++i)
    CHECK(sampled[i] == Catch::Approx(means[i]).epsilon(0.01));
}
