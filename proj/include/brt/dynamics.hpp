#pragma once

#include <cmath>
#include <numeric>
#include <vector>

#include "brt/network.hpp"

namespace brt {

class dynamics_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bus state at one time stage. Queues hold doubles so the solver can push
// expected (fractional) arrivals through the same transition the simulator
// uses; simulated episodes keep every count integral.
struct BusState {
  double position = 0.0;       // P, meters from depot
  int speed_idx = 0;           // u = speed_idx * speed_step
  int recent_stop = 0;         // M, 0..stop_count
  double capacity_free = 0.0;  // B
  double onboard = 0.0;        // B_max - B
  std::vector<double> queues;  // N(1..M), index m-1
  int alight_flag = 0;         // gamma
  int clock = 0;               // k, seconds

  double speed(const ScenarioParams& p) const { return p.speed_of(speed_idx); }
  double queue(int m) const { return queues[static_cast<std::size_t>(m - 1)]; }
  double total_queued() const {
    return std::accumulate(queues.begin(), queues.end(), 0.0);
  }
};

// Per-step stochastic input. alight_now is the alighting demand for the stop
// the bus is about to capture, already truncated to the onboard count;
// alight_next_raw is the pre-sampled demand for the stop after the current
// one, consumed when the bus departs to refresh the alight flag.
struct Disturbance {
  std::vector<double> arrivals;  // G(m) per stop
  double alight_now = 0.0;
  double alight_next_raw = 0.0;
  bool alight_truncated = false;

  double arrivals_total() const {
    return std::accumulate(arrivals.begin(), arrivals.end(), 0.0);
  }
};

enum class ClampMode { strict, lenient };

struct TransitionAudit {
  double boarded = 0.0;
  double alighted = 0.0;
  double arrivals_total = 0.0;
  bool captured_stop = false;
  bool capacity_clamped = false;
};

inline double step_position(const BusState& s, double u_next, double c) {
  return s.position + u_next * c;
}

// Stop capture: the next stop is claimed only when the bus is stationary
// inside its window.
inline int step_recent_stop(const BusState& s, const LoopNetwork& net) {
  const int next = s.recent_stop + 1;
  if (next <= net.stop_count() && s.speed_idx == 0 &&
      stop_window(net, next).contains(s.position))
    return next;
  return s.recent_stop;
}

// Capacity update while dwelling; a moving bus exchanges no passengers.
inline double step_capacity(const BusState& s, const Disturbance& dist,
                            double boarding_rate) {
  if (dist.alight_now > s.onboard + 1e-9)
    throw dynamics_error("alighting demand exceeds onboard passengers");
  if (s.speed_idx > 0) return s.capacity_free;
  const double n = s.recent_stop >= 1 ? s.queue(s.recent_stop) : 0.0;
  const double served = s.alight_flag * dist.alight_now;
  if (n > boarding_rate) return s.capacity_free - boarding_rate + served;
  return s.capacity_free - n + served;
}

inline std::vector<double> step_queues(const BusState& s,
                                       const Disturbance& dist,
                                       double boarded_this_step) {
  std::vector<double> next = s.queues;
  for (std::size_t i = 0; i < next.size(); ++i) next[i] += dist.arrivals[i];
  if (boarded_this_step > 0.0) {
    if (s.recent_stop < 1 ||
        boarded_this_step > s.queue(s.recent_stop) + 1e-9)
      throw dynamics_error("boarded more passengers than were queued");
    next[static_cast<std::size_t>(s.recent_stop - 1)] -= boarded_this_step;
  }
  return next;
}

inline bool at_depot_return(const BusState& s, const LoopNetwork& net) {
  return s.recent_stop == net.stop_count() && s.speed_idx == 0;
}

// One time step of the coupled position / stop / capacity / queue dynamics.
// Arrivals injected here become visible in the successor's queues, one step
// after they were sampled.
inline BusState transition(const BusState& s, double u_next,
                           const Disturbance& dist, const LoopNetwork& net,
                           const ScenarioParams& params,
                           ClampMode mode = ClampMode::strict,
                           TransitionAudit* audit = nullptr) {
  const double step = params.speed_step;
  const int u_idx = static_cast<int>(std::llround(u_next / step));
  if (std::abs(u_next - u_idx * step) > 1e-9 || u_idx < 0 ||
      u_idx > params.max_speed_index())
    throw infeasibility_error("control speed off the feasible grid");
  if (std::abs(u_idx - s.speed_idx) > params.lambda_steps())
    throw infeasibility_error("control speed change exceeds lambda");
  if (dist.alight_now > s.onboard + 1e-9)
    throw dynamics_error("infeasible disturbance: alight > onboard");

  BusState t = s;
  t.position = step_position(s, u_next, params.traffic_factor);
  t.speed_idx = u_idx;
  t.clock = s.clock + 1;

  // Stop capture is evaluated on the post-move kinematic state.
  BusState probe = t;
  probe.queues = s.queues;
  t.recent_stop = step_recent_stop(probe, net);
  const bool captured = t.recent_stop != s.recent_stop;
  const bool dwelling = t.speed_idx == 0 && t.recent_stop >= 1 &&
                        stop_window(net, t.recent_stop).contains(t.position);

  double boarded = 0.0;
  double alighted = 0.0;
  if (dwelling) {
    alighted = captured ? std::min(dist.alight_now, s.onboard) : 0.0;
    boarded = std::min(s.queue(t.recent_stop), params.boarding_rate);
    Disturbance dw;
    dw.alight_now = alighted;
    BusState at_stop = s;
    at_stop.recent_stop = t.recent_stop;
    at_stop.speed_idx = 0;
    at_stop.alight_flag = captured ? 1 : s.alight_flag;
    t.capacity_free = step_capacity(at_stop, dw, params.boarding_rate);
    if (t.capacity_free < 0.0 || t.capacity_free > params.bus_capacity) {
      if (mode == ClampMode::strict)
        throw dynamics_error("bus capacity out of [0, B_max] at k=" +
                             std::to_string(t.clock));
      t.capacity_free =
          std::clamp(t.capacity_free, 0.0, params.bus_capacity);
      if (audit) audit->capacity_clamped = true;
    }
    t.onboard = s.onboard + boarded - alighted;
  }

  {
    BusState at = s;
    at.recent_stop = t.recent_stop;
    t.queues = step_queues(at, dist, boarded);
  }

  // gamma lifecycle: refreshed on departure from a stop (or the depot) with
  // the pre-sampled demand for the stop ahead, held through the dwell.
  const bool departing = s.speed_idx == 0 && u_idx > 0;
  if (departing)
    t.alight_flag = (dist.alight_next_raw > 0.0 && t.onboard > 0.0) ? 1 : 0;

  if (audit) {
    audit->boarded = boarded;
    audit->alighted = alighted;
    audit->arrivals_total = dist.arrivals_total();
    audit->captured_stop = captured;
  }
  return t;
}

}  // namespace brt
