#pragma once

#include <chrono>
#include <cstdint>
#include <limits>
#include <map>
#include <vector>

#include "brt/cost.hpp"
#include "brt/demand.hpp"
#include "brt/feasibility.hpp"
#include "brt/scenario.hpp"

namespace brt {

class oracle_too_large : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SolverConfig {
  int lookahead = 5;  // LA, steps
  int horizon = 0;    // T, from observer_horizon
  enum class Expectation { closed_form, sampled } expectation =
      Expectation::closed_form;
  int sample_count = 10000;          // sampled-expectation validation mode
  std::uint64_t sample_seed = 1;
  std::uint64_t node_budget = 50'000'000;  // oracle guard

  void validate() const {
    if (lookahead < 1 || lookahead > horizon)
      throw validation_error("lookahead", "must satisfy 1 <= LA <= horizon");
  }
};

struct PolicyDecision {
  double chosen_speed = 0.0;
  double predicted_cost = 0.0;
  long long expanded_nodes = 0;
  long long solve_us = 0;
  Regime regime = Regime::cruise;
};

namespace detail {

// Exact state key: positions, capacities and queues live on a fixed grid, so
// scaled rounding is collision-free in practice and map ordering keeps
// lookups deterministic.
struct StateKey {
  int clock;
  long long pos;
  int speed;
  int stop;
  long long cap;
  int gamma;
  std::vector<long long> queues;
  auto operator<=>(const StateKey&) const = default;
};

inline StateKey make_key(const BusState& s) {
  StateKey k{s.clock, std::llround(s.position * 4096.0), s.speed_idx,
             s.recent_stop, std::llround(s.capacity_free * 4096.0),
             s.alight_flag, {}};
  k.queues.reserve(s.queues.size());
  for (double q : s.queues) k.queues.push_back(std::llround(q * 4096.0));
  return k;
}

struct MemoEntry {
  double value;
  double action;
};

}  // namespace detail

// Per-stop expected arrival counts used inside the planning tree.
inline std::vector<double> planning_arrival_means(const Scenario& sc,
                                                  const SolverConfig& cfg) {
  if (cfg.expectation == SolverConfig::Expectation::sampled) {
    DemandSchedule d = sc.demand;
    return sampled_expected_arrivals(d, d.arrival_period, cfg.sample_count,
                                     cfg.sample_seed);
  }
  std::vector<double> m;
  m.reserve(sc.demand.arrival_cmf.size());
  for (const auto& c : sc.demand.arrival_cmf) m.push_back(c.mean());
  return m;
}

inline Disturbance planning_disturbance(const BusState& s, const Scenario& sc,
                                        const std::vector<double>& means) {
  Disturbance w;
  w.arrivals.assign(means.size(), 0.0);
  if (arrival_tick(sc.demand, s.clock)) w.arrivals = means;
  return w;
}

// Rolling look-ahead dynamic programming over the feasible-control tree.
// Values are memoized per state; the memo survives across decisions as long
// as the truncation clock does not move (i.e. when LA reaches the horizon).
class DpSolver {
 public:
  DpSolver(const Scenario& sc, SolverConfig cfg)
      : sc_(sc), cfg_(cfg), means_(planning_arrival_means(sc, cfg)) {
    cfg_.validate();
  }

  PolicyDecision decide(const BusState& s) {
    const auto t0 = std::chrono::steady_clock::now();
    const int limit = std::min(s.clock + cfg_.lookahead, cfg_.horizon);
    if (limit != memo_limit_) {
      memo_.clear();
      memo_limit_ = limit;
    }
    PolicyDecision d;
    nodes_ = 0;
    double action = 0.0;
    d.predicted_cost = value(s, limit, &action);
    d.chosen_speed = action;
    d.expanded_nodes = nodes_ == 0 ? 1 : nodes_;
    d.regime = feasible_controls(s, sc_.network, sc_.timetable, sc_.params).regime;
    d.solve_us = std::chrono::duration_cast<std::chrono::microseconds>(
                     std::chrono::steady_clock::now() - t0)
                     .count();
    return d;
  }

 private:
  double value(const BusState& s, int limit, double* arg) {
    if (s.clock >= limit || at_depot_return(s, sc_.network)) {
      if (arg) *arg = 0.0;
      return 0.0;
    }
    const auto key = detail::make_key(s);
    if (auto it = memo_.find(key); it != memo_.end()) {
      if (arg) *arg = it->second.action;
      return it->second.value;
    }
    const auto fc =
        feasible_controls(s, sc_.network, sc_.timetable, sc_.params);
    double best = std::numeric_limits<double>::infinity();
    double best_action = fc.speeds.front();
    const Disturbance w = planning_disturbance(s, sc_, means_);
    for (double u : fc.speeds) {  // ascending: ties resolve to lower speed
      const BusState succ = transition(s, u, w, sc_.network, sc_.params,
                                       ClampMode::lenient);
      ++nodes_;
      const double v =
          stage_cost(succ, succ.clock, sc_.timetable, sc_.network, sc_.params)
              .total +
          value(succ, limit, nullptr);
      if (v < best) {
        best = v;
        best_action = u;
      }
    }
    memo_.emplace(key, detail::MemoEntry{best, best_action});
    if (arg) *arg = best_action;
    return best;
  }

  const Scenario& sc_;
  SolverConfig cfg_;
  std::vector<double> means_;
  std::map<detail::StateKey, detail::MemoEntry> memo_;
  int memo_limit_ = -1;
  long long nodes_ = 0;
};

inline PolicyDecision dp_lookahead(const BusState& s, int k,
                                   const SolverConfig& cfg,
                                   const Scenario& sc) {
  (void)k;  // the state carries its own clock
  DpSolver solver(sc, cfg);
  return solver.decide(s);
}

struct OracleResult {
  double cost = 0.0;
  std::vector<double> actions;
  long long expanded_nodes = 0;
};

// Exact minimum expected cost over all feasible control sequences up to the
// horizon. Depth-first over the full tree with memoization on (state, k);
// same tie-break as the DP (ascending speeds, strict improvement).
inline OracleResult exhaustive_oracle(const BusState& initial, int horizon,
                                      const SolverConfig& cfg,
                                      const Scenario& sc) {
  const auto means = planning_arrival_means(sc, cfg);
  std::map<detail::StateKey, detail::MemoEntry> memo;
  long long nodes = 0;

  auto rec = [&](auto&& self, const BusState& s) -> double {
    if (s.clock >= horizon || at_depot_return(s, sc.network)) return 0.0;
    const auto key = detail::make_key(s);
    if (auto it = memo.find(key); it != memo.end()) return it->second.value;
    const auto fc = feasible_controls(s, sc.network, sc.timetable, sc.params);
    double best = std::numeric_limits<double>::infinity();
    double best_action = fc.speeds.front();
    const Disturbance w = planning_disturbance(s, sc, means);
    for (double u : fc.speeds) {
      if (static_cast<std::uint64_t>(++nodes) > cfg.node_budget)
        throw oracle_too_large("oracle node budget exceeded");
      const BusState succ =
          transition(s, u, w, sc.network, sc.params, ClampMode::lenient);
      const double v =
          stage_cost(succ, succ.clock, sc.timetable, sc.network, sc.params)
              .total +
          self(self, succ);
      if (v < best) {
        best = v;
        best_action = u;
      }
    }
    memo.emplace(key, detail::MemoEntry{best, best_action});
    return best;
  };

  OracleResult out;
  out.cost = rec(rec, initial);
  BusState s = initial;
  while (s.clock < horizon && !at_depot_return(s, sc.network)) {
    const auto it = memo.find(detail::make_key(s));
    if (it == memo.end()) break;
    const double u = it->second.action;
    out.actions.push_back(u);
    s = transition(s, u, planning_disturbance(s, sc, means), sc.network,
                   sc.params, ClampMode::lenient);
  }
  out.expanded_nodes = nodes;
  return out;
}

// Timetable follower: of the feasible speeds, pick the one whose successor
// position lands closest to the desired position (ties to the lower speed).
inline double baseline_policy(const BusState& s, int k, const Timetable& tt,
                              const LoopNetwork& net,
                              const ScenarioParams& params) {
  const auto fc = feasible_controls(s, net, tt, params);
  const double t_next = std::min(static_cast<double>(k + 1), tt.depot_return_s);
  const double target = desired_position(tt, net, params, t_next);
  double best = fc.speeds.front();
  double best_err = std::numeric_limits<double>::infinity();
  for (double u : fc.speeds) {
    const double err = std::abs(s.position + u * params.traffic_factor - target);
    if (err < best_err) {
      best_err = err;
      best = u;
    }
  }
  return best;
}

}  // namespace brt
