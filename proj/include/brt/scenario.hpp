#pragma once

#include "brt/demand.hpp"
#include "brt/dynamics.hpp"
#include "brt/network.hpp"

namespace brt {

// Everything needed to run one trip: geometry, schedule, kinematic and cost
// parameters, and the demand model.
struct Scenario {
  LoopNetwork network;
  Timetable timetable;
  ScenarioParams params;
  DemandSchedule demand;

  void validate() const {
    network.validate();
    timetable.validate();
    params.validate();
    demand.validate();
    if (static_cast<int>(timetable.entries.size()) + 1 != network.stop_count())
      throw validation_error(
          "timetable",
          "expected one row per intermediate stop (stops - 1 rows)");
    if (static_cast<int>(demand.arrival_cmf.size()) != network.stop_count())
      throw validation_error("arrival_cmf", "expected one cmf per stop");
    if (std::abs(network.stop_positions.back() - network.loop_length) > 1e-9)
      throw validation_error("stop_positions",
                             "final stop must sit at loop_length (depot return)");
    // A bus entering a window at speed lambda must land inside it.
    if (params.lambda * params.traffic_factor >= 2.0 * network.delta)
      throw validation_error("delta",
                             "window too narrow: lambda * traffic_factor must "
                             "be < 2 * delta");
    // Every leg must be coverable at the nominal speed, otherwise the desired
    // position trajectory would have to jump.
    const double v = nominal_speed_mps(params);
    double prev_t = timetable.depot_depart_s;
    double prev_p = 0.0;
    for (int m = 1; m <= network.stop_count(); ++m) {
      const double need = (network.stop_position(m) - prev_p) / v;
      if (timetable.arrival_s(m) - prev_t + 1e-9 < need)
        throw validation_error("timetable",
                               "leg to stop " + std::to_string(m) +
                                   " shorter than nominal travel time");
      prev_t = timetable.departure_s(m);
      prev_p = network.stop_position(m);
    }
  }
};

inline BusState initial_state(const Scenario& sc) {
  BusState s;
  s.capacity_free = sc.params.bus_capacity;
  s.queues.assign(static_cast<std::size_t>(sc.network.stop_count()), 0.0);
  return s;
}

// The four-stop loop of the reference setup: 2.4 km loop, 600 m spacing,
// c = 5, delta = 5, 120 s legs with 30 s dwells, arrivals every 60 s.
// Weights, U, capacity and boarding rate have no published values and are
// plain defaults.
inline Scenario default_scenario() {
  Scenario sc;
  sc.network.stop_positions = {600.0, 1200.0, 1800.0, 2400.0};
  sc.network.delta = 5.0;
  sc.network.loop_length = 2400.0;
  sc.timetable.depot_depart_s = 0.0;
  sc.timetable.entries = {{120.0, 150.0}, {270.0, 300.0}, {420.0, 450.0}};
  sc.timetable.depot_return_s = 570.0;
  sc.demand.arrival_period = 60;
  sc.demand.arrival_cmf.assign(4, default_arrival_cmf());
  sc.demand.alight_cmf = default_alight_cmf();
  sc.validate();
  return sc;
}

}  // namespace brt
