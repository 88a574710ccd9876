#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace brt {

// Error carrying the name of the offending scenario field.
class validation_error : public std::runtime_error {
 public:
  validation_error(std::string field, const std::string& what)
      : std::runtime_error(field + ": " + what), field_(std::move(field)) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

class infeasibility_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Half-open position interval [lo, hi) in meters.
struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  bool contains(double p) const { return lo <= p && p < hi; }
};

// Loop geometry. Stops are indexed 1..M and listed by distance from the
// depot; the final stop sits at loop_length and doubles as the depot-return
// point, so its detection window wraps the trip terminus.
struct LoopNetwork {
  std::vector<double> stop_positions;  // theta^1 .. theta^M, meters
  double delta = 5.0;                  // detection half-width, meters
  double loop_length = 0.0;            // meters

  int stop_count() const { return static_cast<int>(stop_positions.size()); }

  double stop_position(int m) const {
    if (m < 1 || m > stop_count())
      throw validation_error("stop_index", "stop index " + std::to_string(m) +
                                               " out of range 1.." +
                                               std::to_string(stop_count()));
    return stop_positions[static_cast<std::size_t>(m - 1)];
  }

  void validate() const {
    if (delta <= 0.0) throw validation_error("delta", "must be > 0");
    if (stop_positions.empty())
      throw validation_error("stop_positions", "at least one stop required");
    if (stop_positions.front() <= 0.0)
      throw validation_error("stop_positions", "first stop must be > 0");
    for (std::size_t i = 1; i < stop_positions.size(); ++i) {
      if (stop_positions[i] <= stop_positions[i - 1])
        throw validation_error("stop_positions", "must be strictly increasing");
      // disjoint half-open windows
      if (stop_positions[i] - delta < stop_positions[i - 1] + delta)
        throw validation_error("stop_positions",
                               "detection windows overlap between stops " +
                                   std::to_string(i) + " and " +
                                   std::to_string(i + 1));
    }
    if (stop_positions.back() > loop_length)
      throw validation_error("stop_positions",
                             "last stop must lie at or before loop_length");
    for (std::size_t i = 0; i + 1 < stop_positions.size(); ++i) {
      if (stop_positions[i] + delta > loop_length)
        throw validation_error("stop_positions",
                               "interior stop window exceeds loop_length");
    }
  }
};

// Detection window of stop m; m = 0 maps to the depot-return window at
// loop_length (equal to the final stop's window when that stop sits at the
// loop end).
inline Interval stop_window(const LoopNetwork& net, int m) {
  if (m == 0)
    return {net.loop_length - net.delta, net.loop_length + net.delta};
  return {net.stop_position(m) - net.delta, net.stop_position(m) + net.delta};
}

// Per-stop schedule in seconds from trip start. Stops 1..M-1 have explicit
// arrival/departure rows; the final stop is the depot return and has
// arrival == departure == depot_return_s.
struct StopTiming {
  double arrival_s = 0.0;
  double departure_s = 0.0;
};

struct Timetable {
  double depot_depart_s = 0.0;
  std::vector<StopTiming> entries;  // stops 1..M-1
  double depot_return_s = 0.0;

  double arrival_s(int m) const {
    if (m >= 1 && m <= static_cast<int>(entries.size()))
      return entries[static_cast<std::size_t>(m - 1)].arrival_s;
    if (m == static_cast<int>(entries.size()) + 1) return depot_return_s;
    throw validation_error("timetable", "no entry for stop " + std::to_string(m));
  }

  double departure_s(int m) const {
    if (m >= 1 && m <= static_cast<int>(entries.size()))
      return entries[static_cast<std::size_t>(m - 1)].departure_s;
    if (m == static_cast<int>(entries.size()) + 1) return depot_return_s;
    throw validation_error("timetable", "no entry for stop " + std::to_string(m));
  }

  void validate() const {
    if (depot_depart_s < 0.0)
      throw validation_error("depot_depart_s", "must be >= 0");
    double prev_dep = depot_depart_s;
    for (std::size_t i = 0; i < entries.size(); ++i) {
      const auto& e = entries[i];
      if (e.arrival_s > e.departure_s)
        throw validation_error("timetable",
                               "arrival after departure at stop " +
                                   std::to_string(i + 1));
      if (e.departure_s <= prev_dep)
        throw validation_error("timetable",
                               "departures not strictly increasing at stop " +
                                   std::to_string(i + 1));
      prev_dep = e.departure_s;
    }
    if (depot_return_s < prev_dep)
      throw validation_error("depot_return_s",
                             "must be >= last scheduled departure");
  }
};

struct Weights {
  double queue = 1.0;     // alpha1, per waiting passenger
  double schedule = 0.1;  // alpha2, per meter of position deficit
  double speed = 0.01;    // alpha3, per squared speed-unit deviation
};

struct ScenarioParams {
  double traffic_factor = 5.0;  // meters per speed-unit per second
  double speed_step = 0.5;      // granularity of the speed grid
  double max_speed = 2.0;       // U, speed-units
  double lambda = 0.5;          // max speed change per second, speed-units
  double boarding_rate = 2.0;   // l, passengers per second of dwell
  double bus_capacity = 60.0;   // B_max
  Weights alpha;
  double desired_speed_min = 1.0;  // ud lower bound, speed-units
  double desired_speed_max = 1.5;  // ud upper bound, speed-units
  int fleet_size = 1;              // H

  int max_speed_index() const {
    return static_cast<int>(std::llround(max_speed / speed_step));
  }
  int lambda_steps() const {
    return static_cast<int>(std::llround(lambda / speed_step));
  }
  double speed_of(int idx) const { return idx * speed_step; }

  void validate() const {
    if (traffic_factor <= 0.0)
      throw validation_error("traffic_factor", "must be > 0");
    if (speed_step <= 0.0) throw validation_error("speed_step", "must be > 0");
    if (lambda <= 0.0 || lambda > max_speed)
      throw validation_error("lambda", "must satisfy 0 < lambda <= max_speed");
    if (std::abs(lambda / speed_step - std::llround(lambda / speed_step)) > 1e-9)
      throw validation_error("lambda", "must be a multiple of speed_step");
    if (std::abs(max_speed / speed_step - std::llround(max_speed / speed_step)) >
        1e-9)
      throw validation_error("max_speed", "must be a multiple of speed_step");
    if (boarding_rate < 1.0)
      throw validation_error("boarding_rate", "must be >= 1");
    if (bus_capacity < 1.0)
      throw validation_error("bus_capacity", "must be >= 1");
    if (alpha.queue < 0.0 || alpha.schedule < 0.0 || alpha.speed < 0.0)
      throw validation_error("alpha", "weights must be >= 0");
    if (desired_speed_min < speed_step)
      throw validation_error("desired_speed_min", "must be >= speed_step");
    if (desired_speed_max >= max_speed)
      throw validation_error("desired_speed_max", "must be < max_speed");
    if (desired_speed_min > desired_speed_max)
      throw validation_error("desired_speed_min", "must be <= desired_speed_max");
    if (fleet_size < 1) throw validation_error("fleet_size", "must be >= 1");
  }
};

// Schedule-matching cruise speed in m/s.
inline double nominal_speed_mps(const ScenarioParams& p) {
  return p.desired_speed_min * p.traffic_factor;
}

// Minimum on-schedule position at time k: held at theta^m through each dwell
// window, advancing at the nominal speed between departures and clamped at
// the next stop.
inline double desired_position(const Timetable& tt, const LoopNetwork& net,
                               const ScenarioParams& params, double k) {
  if (k < 0.0)
    throw validation_error("k", "desired_position time must be >= 0");
  if (k > tt.depot_return_s) return net.loop_length;  // overran trips aim home
  const double v = nominal_speed_mps(params);
  double leg_start_t = tt.depot_depart_s;
  double leg_start_p = 0.0;
  const int stops = net.stop_count();
  for (int m = 1; m <= stops; ++m) {
    const double theta = net.stop_position(m);
    if (k < tt.arrival_s(m)) {
      const double advanced = std::max(0.0, k - leg_start_t) * v;
      return std::min(leg_start_p + advanced, theta);
    }
    if (k < tt.departure_s(m)) return theta;
    leg_start_t = tt.departure_s(m);
    leg_start_p = theta;
  }
  return net.loop_length;
}

// Episode horizon fixed before the trip: the scheduled return-to-depot time.
inline double observer_horizon(const Timetable& tt, const LoopNetwork& net,
                               const ScenarioParams& params) {
  (void)net;
  (void)params;
  return tt.depot_return_s;
}

}  // namespace brt
