#include <catch2/catch_amalgamated.hpp>

#include "brt/cost.hpp"
#include "brt/scenario.hpp"

using namespace brt;

TEST_CASE("stage cost worked example") {
  const Scenario sc = default_scenario();
  BusState s = initial_state(sc);
  s.position = 450.0;
  s.speed_idx = 4;  // u = 2
  s.queues = {2.0, 0.0, 1.0, 0.0};
  // pd(100) = 500 on the default schedule.
  const CostBreakdown cb =
      stage_cost(s, 100.0, sc.timetable, sc.network, sc.params);
  CHECK(cb.queue_term == 3.0);
  CHECK(cb.schedule_term == Catch::Approx(5.0));
  CHECK(cb.speed_term == Catch::Approx(0.0125));  // 0.01*((2-1)^2+(2-1.5)^2)
  CHECK(cb.total == Catch::Approx(8.0125));
  CHECK(cb.depot_gate == 1);
}

TEST_CASE("terminal state costs nothing") {
  const Scenario sc = default_scenario();
  BusState s = initial_state(sc);
  s.position = 2400.0;
  s.recent_stop = 4;
  const CostBreakdown cb =
      stage_cost(s, 570.0, sc.timetable, sc.network, sc.params);
  CHECK(cb.total == 0.0);
  CHECK(cb.depot_gate == 0);
}

TEST_CASE("speed term at the symmetric midpoint") {
  Scenario sc = default_scenario();
  sc.params.speed_step = 0.25;
  BusState s = initial_state(sc);
  s.position = 300.0;
  s.speed_idx = 5;  // u = 1.25, midpoint of [1, 1.5]
  const CostBreakdown cb =
      stage_cost(s, 60.0, sc.timetable, sc.network, sc.params);
  CHECK(cb.speed_term ==
        Catch::Approx(sc.params.alpha.speed * (0.0625 + 0.0625)));
}

TEST_CASE("schedule term is signed") {
  const Scenario sc = default_scenario();
  BusState s = initial_state(sc);
  s.position = 400.0;  // ahead of pd(60) = 300
  s.speed_idx = 2;
  const CostBreakdown cb =
      stage_cost(s, 60.0, sc.timetable, sc.network, sc.params);
  CHECK(cb.schedule_term == Catch::Approx(-10.0));
}

TEST_CASE("queue affinity") {
  const Scenario sc = default_scenario();
  BusState s = initial_state(sc);
  s.position = 100.0;
  s.speed_idx = 2;
  const double base =
      stage_cost(s, 30.0, sc.timetable, sc.network, sc.params).total;
  for (int m = 1; m <= 4; ++m) {
    BusState t = s;
    t.queues[static_cast<std::size_t>(m - 1)] += 1.0;
    const double bumped =
        stage_cost(t, 30.0, sc.timetable, sc.network, sc.params).total;
    CHECK(bumped - base == Catch::Approx(sc.params.alpha.queue));
  }
}

TEST_CASE("fleet size mismatch rejected") {
  Scenario sc = default_scenario();
  sc.params.fleet_size = 2;
  const BusState s = initial_state(sc);
  CHECK_THROWS_AS(stage_cost(s, 0.0, sc.timetable, sc.network, sc.params),
                  validation_error);
}

TEST_CASE("expected cost is the cost at the expected queue") {
  const Scenario sc = default_scenario();
  BusState s = initial_state(sc);
  s.position = 100.0;
  s.speed_idx = 2;
  const double eg = default_arrival_cmf().mean();
  const std::vector<double> means(4, eg);
  const CostBreakdown ec =
      expected_stage_cost(s, 30.0, means, sc.timetable, sc.network, sc.params);
  const CostBreakdown plain =
      stage_cost(s, 30.0, sc.timetable, sc.network, sc.params);
  CHECK(ec.queue_term == Catch::Approx(4.0 * eg));
  CHECK(ec.schedule_term == plain.schedule_term);
  CHECK(ec.speed_term == plain.speed_term);

  // degenerate model adds nothing
  const CostBreakdown zero = expected_stage_cost(
      s, 30.0, std::vector<double>(4, 0.0), sc.timetable, sc.network,
      sc.params);
  CHECK(zero.total == plain.total);

  // affine in N: a mixture's expectation averages the component expectations
  const std::vector<double> d1(4, 1.0), d2(4, 3.0), mix(4, 2.0);
  const double c1 =
      expected_stage_cost(s, 30.0, d1, sc.timetable, sc.network, sc.params)
          .total;
  const double c2 =
      expected_stage_cost(s, 30.0, d2, sc.timetable, sc.network, sc.params)
          .total;
  const double cm =
      expected_stage_cost(s, 30.0, mix, sc.timetable, sc.network, sc.params)
          .total;
  CHECK(cm == Catch::Approx(0.5 * (c1 + c2)));
}
