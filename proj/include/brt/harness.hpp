#pragma once

#include <atomic>
#include <cmath>
#include <cstdint>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "brt/solver.hpp"

namespace brt {

// Episode invariant violation, tagged with the step where it happened.
class episode_error : public std::runtime_error {
 public:
  episode_error(int step, const std::string& what)
      : std::runtime_error("step " + std::to_string(step) + ": " + what),
        step_(step) {}
  int step() const { return step_; }

 private:
  int step_;
};

struct PolicySpec {
  enum class Kind { baseline, dp } kind = Kind::baseline;
  int lookahead = 5;

  std::string name() const {
    return kind == Kind::baseline ? "baseline"
                                  : "dp" + std::to_string(lookahead);
  }
};

struct StepRecord {
  int k = 0;
  double position = 0.0;
  double speed = 0.0;
  int recent_stop = 0;
  double capacity_free = 0.0;
  std::vector<double> queues;
  double stage_cost = 0.0;
  Regime regime = Regime::dwell_hold;
  long long solve_us = 0;
};

struct EpisodeResult {
  enum class Termination { returned, horizon_exhausted };

  std::vector<StepRecord> trace;
  std::vector<double> per_stop_area;  // passenger-seconds
  double total_cost = 0.0;
  std::vector<long long> step_timings;
  Termination termination = Termination::horizon_exhausted;
  long long truncation_events = 0;
  long long total_expanded_nodes = 0;
  long long decisions = 0;
  std::uint64_t disturbance_hash = 0;
  std::uint64_t seed = 0;
  int last_clock = 0;  // valid even when the trace is not recorded

  double mean_solve_us() const {
    if (step_timings.empty()) return 0.0;
    double s = 0.0;
    for (long long t : step_timings) s += static_cast<double>(t);
    return s / static_cast<double>(step_timings.size());
  }
  long long max_solve_us() const {
    long long m = 0;
    for (long long t : step_timings) m = std::max(m, t);
    return m;
  }
  double mean_expanded_nodes() const {
    return decisions == 0
               ? 0.0
               : static_cast<double>(total_expanded_nodes) /
                     static_cast<double>(decisions);
  }
  int final_clock() const { return last_clock; }
};

// Waiting accrues at a stop until the bus departs it; passengers arriving
// after that wait for the next trip and are not charged to this one.
inline bool stop_still_waiting(int m, int recent_stop, double speed) {
  return recent_stop < m || (recent_stop == m && speed == 0.0);
}

// Time integral of a stop's queue count at 1 s resolution, up to service.
inline double waiting_area(const std::vector<StepRecord>& trace, int m) {
  double a = 0.0;
  for (const auto& r : trace)
    if (stop_still_waiting(m, r.recent_stop, r.speed))
      a += r.queues[static_cast<std::size_t>(m - 1)];
  return a;
}

namespace detail {

inline bool contains_speed(const ControlSet& fc, double u) {
  for (double v : fc.speeds)
    if (std::abs(v - u) < 1e-9) return true;
  return false;
}

// Criterion checks applied to every simulated step.
inline void audit_step(const BusState& prev, const BusState& next, double u,
                       const ControlSet& fc, const TransitionAudit& audit,
                       const Scenario& sc) {
  const auto& p = sc.params;
  if (!contains_speed(fc, u))
    throw episode_error(next.clock, "policy chose a speed outside the feasible set");
  if (std::abs(next.speed_idx - prev.speed_idx) > p.lambda_steps())
    throw episode_error(next.clock, "speed change exceeds lambda");
  if (std::abs(next.position - (prev.position + u * p.traffic_factor)) > 1e-9)
    throw episode_error(next.clock, "position delta != u * c");
  if (next.capacity_free < -1e-9 ||
      next.capacity_free > p.bus_capacity + 1e-9)
    throw episode_error(next.clock, "capacity outside [0, B_max]");
  if (next.recent_stop < prev.recent_stop ||
      next.recent_stop > prev.recent_stop + 1)
    throw episode_error(next.clock, "recent stop moved by more than one");
  for (double q : next.queues)
    if (q < -1e-9) throw episode_error(next.clock, "negative queue");
  // Passenger conservation ledger.
  const double dq = next.total_queued() - prev.total_queued();
  const double donboard = next.onboard - prev.onboard;
  if (std::abs(dq + donboard -
               (audit.arrivals_total - audit.alighted)) > 1e-9)
    throw episode_error(next.clock, "passenger conservation ledger off");
  if (std::abs((p.bus_capacity - next.capacity_free) - next.onboard) > 1e-9)
    throw episode_error(next.clock, "onboard != B_max - B");
  // No departure before the scheduled time.
  if (prev.speed_idx == 0 && next.speed_idx > 0 && prev.recent_stop >= 1 &&
      prev.recent_stop < sc.network.stop_count() &&
      stop_window(sc.network, prev.recent_stop).contains(prev.position) &&
      prev.clock + 1e-9 < sc.timetable.departure_s(prev.recent_stop))
    throw episode_error(next.clock, "departed before timetable departure");
}

}  // namespace detail

struct EpisodeOptions {
  bool strict = true;
  bool record_trace = true;
};

// Run one trip under the chosen policy with the seeded disturbance stream.
// Paired runs with the same seed see identical realized demand because the
// stream is keyed by (seed, stop, k) alone.
inline EpisodeResult run_episode(const Scenario& scenario, PolicySpec policy,
                                 std::uint64_t seed,
                                 EpisodeOptions opt = {}) {
  Scenario sc = scenario;
  sc.validate();
  sc.demand.seed = seed;
  const int horizon = static_cast<int>(
      std::llround(observer_horizon(sc.timetable, sc.network, sc.params)));
  // Trips may overrun the scheduled return; allow half a schedule of slack
  // before declaring the horizon exhausted.
  const int cap = horizon + horizon / 2;

  std::optional<DpSolver> dp;
  if (policy.kind == PolicySpec::Kind::dp) {
    SolverConfig cfg;
    cfg.lookahead = policy.lookahead;
    cfg.horizon = cap;
    dp.emplace(sc, cfg);
  }

  EpisodeResult out;
  out.seed = seed;
  out.disturbance_hash = stream_hash(sc.demand, sc.network, horizon);
  BusState state = initial_state(sc);

  auto record = [&](const BusState& s, Regime regime, long long solve_us) {
    if (!opt.record_trace) return;
    StepRecord r;
    r.k = s.clock;
    r.position = s.position;
    r.speed = s.speed(sc.params);
    r.recent_stop = s.recent_stop;
    r.capacity_free = s.capacity_free;
    r.queues = s.queues;
    r.stage_cost =
        stage_cost(s, s.clock, sc.timetable, sc.network, sc.params).total;
    r.regime = regime;
    r.solve_us = solve_us;
    out.trace.push_back(std::move(r));
  };

  std::vector<double> areas(static_cast<std::size_t>(sc.network.stop_count()),
                            0.0);
  auto accumulate = [&](const BusState& s) {
    for (std::size_t i = 0; i < areas.size(); ++i)
      if (stop_still_waiting(static_cast<int>(i) + 1, s.recent_stop,
                             s.speed(sc.params)))
        areas[i] += s.queues[i];
    out.total_cost +=
        stage_cost(s, s.clock, sc.timetable, sc.network, sc.params).total;
  };

  accumulate(state);
  for (int k = 0; k < cap; ++k) {
    const auto fc =
        feasible_controls(state, sc.network, sc.timetable, sc.params);
    double u = 0.0;
    long long solve_us = 0;
    if (policy.kind == PolicySpec::Kind::baseline) {
      const auto t0 = std::chrono::steady_clock::now();
      u = baseline_policy(state, k, sc.timetable, sc.network, sc.params);
      solve_us = std::chrono::duration_cast<std::chrono::microseconds>(
                     std::chrono::steady_clock::now() - t0)
                     .count();
    } else {
      const PolicyDecision d = dp->decide(state);
      u = d.chosen_speed;
      solve_us = d.solve_us;
      out.total_expanded_nodes += d.expanded_nodes;
      ++out.decisions;
    }
    out.step_timings.push_back(solve_us);
    record(state, fc.regime, solve_us);

    const Disturbance w = disturbance_at(k, state, sc.demand, sc.network);
    if (w.alight_truncated) ++out.truncation_events;
    TransitionAudit audit;
    BusState next = transition(state, u, w, sc.network, sc.params,
                               opt.strict ? ClampMode::strict
                                          : ClampMode::lenient,
                               &audit);
    if (opt.strict) detail::audit_step(state, next, u, fc, audit, sc);
    state = std::move(next);
    accumulate(state);
    if (at_depot_return(state, sc.network)) {
      out.termination = EpisodeResult::Termination::returned;
      break;
    }
  }
  record(state,
         feasible_controls(state, sc.network, sc.timetable, sc.params).regime,
         0);
  out.last_clock = state.clock;
  out.per_stop_area = areas;
  return out;
}

struct EpisodeSummaryRow {
  std::string policy;
  int lookahead = 0;  // 0 for baseline
  std::uint64_t seed = 0;
  std::vector<double> per_stop_area;
  double total_cost = 0.0;
  int steps = 0;
  std::string termination;
  double mean_solve_us = 0.0;
  long long max_solve_us = 0;
  double mean_expanded_nodes = 0.0;
};

inline EpisodeSummaryRow summarize(const EpisodeResult& r,
                                   const PolicySpec& policy) {
  EpisodeSummaryRow row;
  row.policy = policy.kind == PolicySpec::Kind::baseline ? "baseline" : "dp";
  row.lookahead =
      policy.kind == PolicySpec::Kind::baseline ? 0 : policy.lookahead;
  row.seed = r.seed;
  row.per_stop_area = r.per_stop_area;
  row.total_cost = r.total_cost;
  row.steps = r.final_clock();
  row.termination = r.termination == EpisodeResult::Termination::returned
                        ? "returned"
                        : "horizon-exhausted";
  row.mean_solve_us = r.mean_solve_us();
  row.max_solve_us = r.max_solve_us();
  row.mean_expanded_nodes = r.mean_expanded_nodes();
  return row;
}

struct LookaheadAggregate {
  int lookahead = 0;
  std::vector<double> area_mean, area_min, area_max;      // per stop
  std::vector<double> improvement_mean_pct;               // per stop, paired
  double mean_solve_us = 0.0;
  long long max_solve_us = 0;
  double mean_expanded_nodes = 0.0;
};

struct BatchSummary {
  int runs = 0;
  std::vector<int> la_values;
  std::vector<std::uint64_t> seeds;
  std::vector<EpisodeSummaryRow> rows;  // one per (policy, LA, seed)
  std::vector<double> baseline_area_mean, baseline_area_min, baseline_area_max;
  std::vector<LookaheadAggregate> per_la;
};

namespace detail {

// Index-parallel loop; results must be written to pre-sized slots so the
// outcome is independent of scheduling. First exception wins and rethrows.
template <typename Fn>
void parallel_for(int n, int threads, Fn&& fn) {
  const int tn = std::min(std::max(threads, 1), std::max(n, 1));
  if (tn <= 1 || n <= 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr err;
  std::mutex err_mu;
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(tn));
  for (int t = 0; t < tn; ++t)
    pool.emplace_back([&] {
      for (int i; (i = next.fetch_add(1)) < n;) {
        try {
          fn(i);
        } catch (...) {
          std::scoped_lock lock(err_mu);
          if (!err) err = std::current_exception();
        }
      }
    });
  for (auto& th : pool) th.join();
  if (err) std::rethrow_exception(err);
}

}  // namespace detail

// Paired common-random-numbers batch: one baseline episode per seed plus one
// DP episode per (LA, seed), all sharing the seed's disturbance stream.
// Episodes are independent, so they may run on several threads; aggregation
// order is fixed by index, keeping the summary deterministic.
inline BatchSummary run_batch(const Scenario& scenario,
                              const std::vector<int>& la_values,
                              int runs_per_la, std::uint64_t base_seed,
                              EpisodeOptions opt = {}, int threads = 1) {
  if (runs_per_la < 0)
    throw validation_error("runs", "must be >= 0");
  BatchSummary bs;
  bs.runs = runs_per_la;
  bs.la_values = la_values;
  const int stops = scenario.network.stop_count();
  EpisodeOptions ep_opt = opt;
  ep_opt.record_trace = false;

  std::vector<std::vector<double>> baseline_areas(
      static_cast<std::size_t>(runs_per_la));
  std::vector<EpisodeSummaryRow> baseline_rows(
      static_cast<std::size_t>(runs_per_la));
  detail::parallel_for(runs_per_la, threads, [&](int r) {
    const std::uint64_t seed = base_seed + static_cast<std::uint64_t>(r);
    PolicySpec p{PolicySpec::Kind::baseline, 0};
    EpisodeResult res = run_episode(scenario, p, seed, ep_opt);
    baseline_areas[static_cast<std::size_t>(r)] = res.per_stop_area;
    baseline_rows[static_cast<std::size_t>(r)] = summarize(res, p);
  });
  for (int r = 0; r < runs_per_la; ++r) {
    bs.seeds.push_back(base_seed + static_cast<std::uint64_t>(r));
    bs.rows.push_back(baseline_rows[static_cast<std::size_t>(r)]);
  }

  auto stats = [&](const std::vector<std::vector<double>>& areas,
                   std::vector<double>& mean, std::vector<double>& mn,
                   std::vector<double>& mx) {
    mean.assign(static_cast<std::size_t>(stops), 0.0);
    mn.assign(static_cast<std::size_t>(stops),
              std::numeric_limits<double>::infinity());
    mx.assign(static_cast<std::size_t>(stops), 0.0);
    for (const auto& a : areas)
      for (int m = 0; m < stops; ++m) {
        mean[m] += a[m];
        mn[m] = std::min(mn[m], a[m]);
        mx[m] = std::max(mx[m], a[m]);
      }
    if (!areas.empty())
      for (int m = 0; m < stops; ++m) mean[m] /= static_cast<double>(areas.size());
    else
      mn.assign(static_cast<std::size_t>(stops), 0.0);
  };
  stats(baseline_areas, bs.baseline_area_mean, bs.baseline_area_min,
        bs.baseline_area_max);

  for (int la : la_values) {
    LookaheadAggregate agg;
    agg.lookahead = la;
    agg.improvement_mean_pct.assign(static_cast<std::size_t>(stops), 0.0);
    double solve_sum = 0.0, node_sum = 0.0;
    long long solve_count = 0;
    std::vector<EpisodeResult> results(static_cast<std::size_t>(runs_per_la));
    detail::parallel_for(runs_per_la, threads, [&](int r) {
      const std::uint64_t seed = base_seed + static_cast<std::uint64_t>(r);
      results[static_cast<std::size_t>(r)] =
          run_episode(scenario, PolicySpec{PolicySpec::Kind::dp, la}, seed,
                      ep_opt);
    });
    std::vector<std::vector<double>> areas;
    for (int r = 0; r < runs_per_la; ++r) {
      PolicySpec p{PolicySpec::Kind::dp, la};
      EpisodeResult& res = results[static_cast<std::size_t>(r)];
      areas.push_back(res.per_stop_area);
      bs.rows.push_back(summarize(res, p));
      for (int m = 0; m < stops; ++m) {
        const double base = baseline_areas[static_cast<std::size_t>(r)]
                                          [static_cast<std::size_t>(m)];
        agg.improvement_mean_pct[static_cast<std::size_t>(m)] +=
            base > 0.0 ? 100.0 * (1.0 - res.per_stop_area[m] / base) : 0.0;
      }
      for (long long t : res.step_timings) solve_sum += static_cast<double>(t);
      solve_count += static_cast<long long>(res.step_timings.size());
      agg.max_solve_us = std::max(agg.max_solve_us, res.max_solve_us());
      node_sum += res.mean_expanded_nodes();
    }
    if (runs_per_la > 0) {
      for (double& v : agg.improvement_mean_pct)
        v /= static_cast<double>(runs_per_la);
      agg.mean_expanded_nodes = node_sum / static_cast<double>(runs_per_la);
    }
    if (solve_count > 0)
      agg.mean_solve_us = solve_sum / static_cast<double>(solve_count);
    stats(areas, agg.area_mean, agg.area_min, agg.area_max);
    bs.per_la.push_back(std::move(agg));
  }
  return bs;
}

}  // namespace brt
