#pragma once

#include <span>
#include <vector>

#include "brt/dynamics.hpp"
#include "brt/network.hpp"

namespace brt {

struct CostBreakdown {
  double queue_term = 0.0;
  double schedule_term = 0.0;  // signed: negative when running ahead of pd
  double speed_term = 0.0;
  double total = 0.0;
  int depot_gate = 1;  // 0 iff every bus is home
};

inline int depot_gate(const BusState& s, const LoopNetwork& net) {
  return (s.speed_idx == 0 && stop_window(net, 0).contains(s.position)) ? 0 : 1;
}

// Multi-objective stage cost: queue counts, position deficit against the
// desired trajectory, and quadratic deviation from the desired speed range
// (gated off once the bus is back at the depot).
inline CostBreakdown stage_cost(std::span<const BusState> states,
                                std::span<const double> queues, double k,
                                const Timetable& tt, const LoopNetwork& net,
                                const ScenarioParams& params) {
  if (static_cast<int>(states.size()) != params.fleet_size)
    throw validation_error("fleet_size",
                           "state count does not match configured fleet size");
  CostBreakdown cb;
  for (double n : queues) cb.queue_term += params.alpha.queue * n;
  cb.depot_gate = 0;
  for (const BusState& s : states) {
    const double pd = desired_position(tt, net, params, k);
    cb.schedule_term += params.alpha.schedule * (pd - s.position);
    const int d = depot_gate(s, net);
    cb.depot_gate |= d;
    const double u = s.speed(params);
    const double lo = params.desired_speed_min;
    const double hi = params.desired_speed_max;
    cb.speed_term +=
        d * params.alpha.speed * ((u - lo) * (u - lo) + (u - hi) * (u - hi));
  }
  cb.total = cb.queue_term + cb.schedule_term + cb.speed_term;
  return cb;
}

inline CostBreakdown stage_cost(const BusState& s, double k,
                                const Timetable& tt, const LoopNetwork& net,
                                const ScenarioParams& params) {
  return stage_cost(std::span<const BusState>(&s, 1),
                    std::span<const double>(s.queues.data(), s.queues.size()),
                    k, tt, net, params);
}

// Expectation over arrivals in closed form: the cost is affine in N, so
// E[J] is J evaluated at N + E[G].
inline CostBreakdown expected_stage_cost(const BusState& s, double k,
                                         const std::vector<double>& expected_g,
                                         const Timetable& tt,
                                         const LoopNetwork& net,
                                         const ScenarioParams& params) {
  std::vector<double> n = s.queues;
  for (std::size_t i = 0; i < n.size() && i < expected_g.size(); ++i)
    n[i] += expected_g[i];
  return stage_cost(std::span<const BusState>(&s, 1),
                    std::span<const double>(n.data(), n.size()), k, tt, net,
                    params);
}

}  // namespace brt
