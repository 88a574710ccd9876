#pragma once

#include <string>
#include <vector>

#include "brt/dynamics.hpp"
#include "brt/network.hpp"

namespace brt {

enum class Regime { cruise, approach, stop, depart, dwell_hold };

inline const char* regime_name(Regime r) {
  switch (r) {
    case Regime::cruise: return "cruise";
    case Regime::approach: return "approach";
    case Regime::stop: return "stop";
    case Regime::depart: return "depart";
    case Regime::dwell_hold: return "dwell-hold";
  }
  return "?";
}

struct ControlSet {
  std::vector<double> speeds;  // ascending, speed-units
  Regime regime = Regime::cruise;
};

// Distance still to cover once the bus sheds lambda per second until it
// stops: c * ((u - lambda) + (u - 2 lambda) + ... + lambda).
inline double min_stop_distance(double u, double lambda, double c) {
  const long long m = std::llround(u / lambda);
  return c * lambda * 0.5 * static_cast<double>(m * (m - 1));
}

// Full lambda-per-step ramp length including one step at the current speed.
inline double braking_distance(double u, double lambda, double c) {
  const long long m = std::llround(u / lambda);
  return c * lambda * 0.5 * static_cast<double>(m * (m + 1));
}

// Feasible speeds for the next step. A moving bus targets the next unserved
// stop's window (it serves every stop it reaches; the recent-stop counter
// only advances through a stationary capture, so passing a stop would strand
// it); any candidate speed whose successor could no longer come to rest
// before the window's far edge is pruned. Stop positions land cλ apart and
// the window is wider than cλ, so the surviving set is never empty.
inline ControlSet feasible_controls(const BusState& s, const LoopNetwork& net,
                                    const Timetable& tt,
                                    const ScenarioParams& params) {
  const int stops = net.stop_count();
  const double lambda = params.lambda;
  const double c = params.traffic_factor;

  if (s.speed_idx == 0) {
    // Dwelling at a served stop (or the terminal).
    if (s.recent_stop >= 1 &&
        stop_window(net, s.recent_stop).contains(s.position)) {
      const int m = s.recent_stop;
      if (m == stops) return {{0.0}, Regime::dwell_hold};  // trip over
      const double dep = tt.departure_s(m);
      const bool ready =
          (s.queue(m) <= 0.0 || s.capacity_free <= 0.0) && s.clock + 1e-9 >= dep;
      const bool forced = std::abs(s.clock - dep) < 1e-9;  // hard timetable
      if (ready || forced) return {{lambda}, Regime::depart};
      return {{0.0}, Regime::dwell_hold};
    }
    // Stationary inside the next stop's window but not yet captured: rest
    // one more second so the capture registers.
    if (s.recent_stop < stops &&
        stop_window(net, s.recent_stop + 1).contains(s.position))
      return {{0.0}, Regime::stop};
    // At the depot before the trip starts.
    if (s.recent_stop == 0) {
      if (s.clock + 1e-9 >= tt.depot_depart_s) return {{lambda}, Regime::depart};
      return {{0.0}, Regime::dwell_hold};
    }
    // Stationary off-window: creep forward.
    return {{lambda}, Regime::depart};
  }

  const int next = std::min(s.recent_stop + 1, stops);
  const Interval w = stop_window(net, next);
  const bool in_window = w.contains(s.position);

  ControlSet cs;
  if (in_window && s.speed_idx <= params.lambda_steps())
    cs.speeds.push_back(0.0);  // come to rest inside the window
  bool pruned = false;
  for (int di : {-1, 0, 1}) {
    const int idx = s.speed_idx + di * params.lambda_steps();
    if (idx < 1 || idx > params.max_speed_index()) continue;
    const double v = params.speed_of(idx);
    const double landing = s.position + v * c;
    if (landing + min_stop_distance(v, lambda, c) < w.hi)
      cs.speeds.push_back(v);
    else
      pruned = true;
  }
  cs.regime =
      in_window ? Regime::stop : (pruned ? Regime::approach : Regime::cruise);
  if (cs.speeds.empty())
    throw infeasibility_error("empty control set at k=" +
                              std::to_string(s.clock));
  return cs;
}

}  // namespace brt
