#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "brt/feasibility.hpp"
#include "brt/scenario.hpp"

using namespace brt;

namespace {

BusState make_state(const Scenario& sc) { return initial_state(sc); }

Disturbance zero_disturbance(const Scenario& sc) {
  Disturbance w;
  w.arrivals.assign(static_cast<std::size_t>(sc.network.stop_count()), 0.0);
  return w;
}

}  // namespace

TEST_CASE("position step") {
  const Scenario sc = default_scenario();
  BusState s = make_state(sc);
  s.position = 100.0;
  CHECK(step_position(s, 2.0, 5.0) == 110.0);
  CHECK(step_position(s, 0.0, 5.0) == 100.0);
  s.position = 595.0;
  CHECK(step_position(s, 1.0, 5.0) == 600.0);
}

TEST_CASE("stop capture needs a stationary bus inside the window") {
  const Scenario sc = default_scenario();
  BusState s = make_state(sc);
  s.position = 602.0;
  s.speed_idx = 0;
  CHECK(step_recent_stop(s, sc.network) == 1);
  s.speed_idx = 2;  // passing through
  CHECK(step_recent_stop(s, sc.network) == 0);
  s.speed_idx = 0;
  s.position = 300.0;  // outside every window
  CHECK(step_recent_stop(s, sc.network) == 0);
}

TEST_CASE("capacity step branches") {
  const Scenario sc = default_scenario();
  BusState s = make_state(sc);
  s.recent_stop = 1;
  s.capacity_free = 20.0;
  s.onboard = sc.params.bus_capacity - 20.0;
  s.queues = {7.0, 0.0, 0.0, 0.0};
  Disturbance w = zero_disturbance(sc);

  SECTION("queue longer than the boarding rate") {
    CHECK(step_capacity(s, w, 3.0) == 17.0);
  }
  SECTION("alighting frees seats") {
    s.queues[0] = 2.0;
    s.alight_flag = 1;
    w.alight_now = 4.0;
    CHECK(step_capacity(s, w, 3.0) == 22.0);
  }
  SECTION("moving bus exchanges nobody") {
    s.speed_idx = 2;
    CHECK(step_capacity(s, w, 3.0) == 20.0);
  }
  SECTION("alighting beyond onboard rejected") {
    w.alight_now = s.onboard + 1.0;
    CHECK_THROWS_AS(step_capacity(s, w, 3.0), dynamics_error);
  }
}

TEST_CASE("queue step") {
  const Scenario sc = default_scenario();
  BusState s = make_state(sc);
  s.recent_stop = 1;
  s.queues = {5.0, 2.0, 0.0, 0.0};
  Disturbance w = zero_disturbance(sc);
  w.arrivals = {1.0, 0.0, 2.0, 0.0};
  CHECK(step_queues(s, w, 3.0) == std::vector<double>{3.0, 2.0, 2.0, 0.0});

  w.arrivals = {0.0, 0.0, 0.0, 0.0};
  CHECK(step_queues(s, w, 0.0) == s.queues);

  s.queues = {0.0, 0.0, 0.0, 0.0};
  w.arrivals = {2.0, 2.0, 2.0, 2.0};
  CHECK(step_queues(s, w, 0.0) == std::vector<double>{2.0, 2.0, 2.0, 2.0});

  CHECK_THROWS_AS(step_queues(s, w, 1.0), dynamics_error);  // nobody queued
}

TEST_CASE("transition composes the steps") {
  const Scenario sc = default_scenario();
  BusState s = make_state(sc);

  SECTION("first acceleration out of the depot") {
    const BusState t = transition(s, 0.5, zero_disturbance(sc), sc.network,
                                  sc.params);
    CHECK(t.position == 2.5);
    CHECK(t.recent_stop == 0);
    CHECK(t.clock == 1);
    CHECK(t.total_queued() == 0.0);
  }

  SECTION("dwell boards up to the boarding rate") {
    s.position = 600.0;
    s.recent_stop = 1;
    s.queues = {7.0, 0.0, 0.0, 0.0};
    TransitionAudit audit;
    const BusState t = transition(s, 0.0, zero_disturbance(sc), sc.network,
                                  sc.params, ClampMode::strict, &audit);
    CHECK(audit.boarded == 2.0);  // l = 2 in the default setup
    CHECK(t.queue(1) == 5.0);
    CHECK(t.capacity_free == sc.params.bus_capacity - 2.0);
    CHECK(t.onboard == 2.0);
  }

  SECTION("capture alights before boarding") {
    s.position = 1195.0;
    s.recent_stop = 1;
    s.onboard = 5.0;
    s.capacity_free = sc.params.bus_capacity - 5.0;
    s.alight_flag = 1;
    s.queues = {0.0, 1.0, 0.0, 0.0};
    Disturbance w = zero_disturbance(sc);
    w.alight_now = 3.0;
    TransitionAudit audit;
    const BusState t = transition(s, 0.0, w, sc.network, sc.params,
                                  ClampMode::strict, &audit);
    CHECK(t.recent_stop == 2);
    CHECK(audit.captured_stop);
    CHECK(audit.alighted == 3.0);
    CHECK(audit.boarded == 1.0);
    CHECK(t.onboard == 3.0);
    CHECK(t.capacity_free == sc.params.bus_capacity - 3.0);
  }

  SECTION("gamma refreshes on departure") {
    s.position = 600.0;
    s.recent_stop = 1;
    s.speed_idx = 0;
    s.onboard = 2.0;
    s.capacity_free = sc.params.bus_capacity - 2.0;
    Disturbance w = zero_disturbance(sc);
    w.alight_next_raw = 3.0;
    BusState t = transition(s, 0.5, w, sc.network, sc.params);
    CHECK(t.alight_flag == 1);
    w.alight_next_raw = 0.0;
    t = transition(s, 0.5, w, sc.network, sc.params);
    CHECK(t.alight_flag == 0);
  }

  SECTION("infeasible controls rejected") {
    CHECK_THROWS_AS(
        transition(s, 0.3, zero_disturbance(sc), sc.network, sc.params),
        infeasibility_error);  // off-grid
    CHECK_THROWS_AS(
        transition(s, 1.5, zero_disturbance(sc), sc.network, sc.params),
        infeasibility_error);  // jump larger than lambda
  }

  SECTION("constraint on alighting demand") {
    Disturbance w = zero_disturbance(sc);
    w.alight_now = 1.0;  // onboard is 0
    CHECK_THROWS_AS(transition(s, 0.0, w, sc.network, sc.params),
                    dynamics_error);
  }
}

TEST_CASE("passenger conservation over a random rollout") {
  const Scenario sc = default_scenario();
  std::mt19937_64 rng(7);
  BusState s = make_state(sc);
  for (int k = 0; k < 400; ++k) {
    const auto fc = feasible_controls(s, sc.network, sc.timetable, sc.params);
    const double u = fc.speeds[rng() % fc.speeds.size()];
    Disturbance w = zero_disturbance(sc);
    if (k % 30 == 0)
      for (auto& g : w.arrivals) g = static_cast<double>(rng() % 3);
    const int next = s.recent_stop + 1;
    if (next <= sc.network.stop_count() &&
        stop_window(sc.network, next).contains(s.position))
      w.alight_now = std::min<double>(static_cast<double>(rng() % 3), s.onboard);
    w.alight_next_raw = static_cast<double>(rng() % 2);

    TransitionAudit audit;
    const BusState t =
        transition(s, u, w, sc.network, sc.params, ClampMode::strict, &audit);
    const double dq = t.total_queued() - s.total_queued();
    const double donboard = t.onboard - s.onboard;
    CHECK(dq + donboard ==
          Catch::Approx(audit.arrivals_total - audit.alighted).margin(1e-9));
    CHECK(t.onboard == Catch::Approx(sc.params.bus_capacity - t.capacity_free)
                           .margin(1e-9));
    s = t;
    if (at_depot_return(s, sc.network)) break;
  }
}
