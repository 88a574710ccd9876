#pragma once

#include <random>
#include <string>
#include <vector>

#include "brt/harness.hpp"
#include "brt/io.hpp"
#include "brt/solver.hpp"

namespace brt {

// Small two-stop instances sized so the exhaustive oracle stays tractable:
// loop <= 400 m, horizon <= 80 s, deterministic or two-outcome arrivals.
inline Scenario make_tiny_scenario(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  auto pick = [&](auto... vs) {
    const double arr[] = {static_cast<double>(vs)...};
    return arr[rng() % (sizeof...(vs))];
  };

  Scenario sc;
  const double spacing = pick(100.0, 125.0, 150.0);
  sc.network.stop_positions = {spacing, 2.0 * spacing};
  sc.network.delta = 5.0;
  sc.network.loop_length = 2.0 * spacing;
  sc.params.traffic_factor = 5.0;
  sc.params.speed_step = 0.5;
  sc.params.max_speed = pick(1.5, 2.0);
  sc.params.lambda = 0.5;
  sc.params.boarding_rate = pick(1.0, 2.0);
  sc.params.bus_capacity = 30.0;
  sc.params.desired_speed_min = 1.0;
  sc.params.desired_speed_max = sc.params.max_speed - 0.5;

  double extra = pick(0.0, 4.0, 8.0);
  if (spacing >= 150.0 && extra > 4.0) extra = 4.0;  // keep T <= 80
  const double leg = spacing / 5.0 + extra;
  const double dwell = pick(6.0, 10.0);
  sc.timetable.depot_depart_s = 0.0;
  sc.timetable.entries = {{leg, leg + dwell}};
  sc.timetable.depot_return_s = leg + dwell + leg;

  sc.demand.arrival_period = static_cast<int>(pick(20.0, 25.0, 30.0));
  DiscreteCmf cmf;
  if (rng() % 2 == 0) {
    cmf = {{pick(1.0, 2.0)}, {1.0}};  // deterministic
  } else {
    const double lo = pick(1.0, 2.0);
    cmf = {{lo, lo + 1.0}, {pick(0.25, 0.5, 0.75), 1.0}};  // two-outcome
  }
  sc.demand.arrival_cmf.assign(2, cmf);
  sc.demand.alight_cmf = {{1.0}, {1.0}};
  sc.validate();
  return sc;
}

struct OracleCheck {
  bool passed = false;
  double dp_cost = 0.0;
  double oracle_cost = 0.0;
  bool actions_match = false;
  int horizon = 0;
  std::string detail;
};

// Full-depth equivalence: rolling DP with LA = T must reproduce the oracle's
// value and action sequence exactly under the shared tie-break.
inline OracleCheck check_oracle_equivalence(const Scenario& sc) {
  const int horizon = static_cast<int>(
      std::llround(observer_horizon(sc.timetable, sc.network, sc.params)));
  SolverConfig cfg;
  cfg.lookahead = horizon;
  cfg.horizon = horizon;

  OracleCheck chk;
  chk.horizon = horizon;
  const BusState start = initial_state(sc);
  const OracleResult oracle = exhaustive_oracle(start, horizon, cfg, sc);
  chk.oracle_cost = oracle.cost;

  DpSolver dp(sc, cfg);
  const auto means = planning_arrival_means(sc, cfg);
  std::vector<double> dp_actions;
  BusState s = start;
  chk.dp_cost = dp.decide(s).predicted_cost;
  while (s.clock < horizon && !at_depot_return(s, sc.network)) {
    const double u = dp.decide(s).chosen_speed;
    dp_actions.push_back(u);
    s = transition(s, u, planning_disturbance(s, sc, means), sc.network,
                   sc.params, ClampMode::lenient);
  }

  chk.actions_match = dp_actions == oracle.actions;
  chk.passed = chk.actions_match && chk.dp_cost == chk.oracle_cost;
  if (!chk.passed) {
    chk.detail = "dp_cost=" + std::to_string(chk.dp_cost) +
                 " oracle_cost=" + std::to_string(chk.oracle_cost) +
                 (chk.actions_match ? "" : " (action sequences differ)");
  }
  return chk;
}

struct FuzzReport {
  int episodes = 0;
  int violations = 0;
  std::vector<std::string> messages;
};

// Strict-mode episode fuzz over paired policies; every step is audited by
// run_episode, so any invariant breach surfaces as an episode_error.
inline FuzzReport fuzz_invariants(const Scenario& sc, int pairs,
                                  std::uint64_t base_seed, int lookahead = 5) {
  FuzzReport rep;
  for (int i = 0; i < pairs; ++i) {
    const std::uint64_t seed = base_seed + static_cast<std::uint64_t>(i);
    for (const PolicySpec p :
         {PolicySpec{PolicySpec::Kind::baseline, 0},
          PolicySpec{PolicySpec::Kind::dp, lookahead}}) {
      ++rep.episodes;
      try {
        EpisodeOptions opt;
        opt.record_trace = false;
        run_episode(sc, p, seed, opt);
      } catch (const std::exception& e) {
        ++rep.violations;
        rep.messages.push_back(p.name() + " seed " + std::to_string(seed) +
                               ": " + e.what());
      }
    }
  }
  return rep;
}

}  // namespace brt
