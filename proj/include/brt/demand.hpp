#pragma once

#include <cstdint>
#include <vector>

#include "brt/dynamics.hpp"
#include "brt/network.hpp"
#include "brt/rng.hpp"

namespace brt {

// Discrete distribution given by its cumulative probabilities over an
// ordered support set.
struct DiscreteCmf {
  std::vector<double> support;
  std::vector<double> cmf;

  void validate() const {
    if (support.empty() || support.size() != cmf.size())
      throw validation_error("cmf", "support and cmf must be non-empty and equal length");
    double prev = 0.0;
    for (std::size_t i = 0; i < cmf.size(); ++i) {
      if (cmf[i] < prev || cmf[i] > 1.0 + 1e-12)
        throw validation_error("cmf", "probabilities must be non-decreasing within [0,1]");
      prev = cmf[i];
      if (i > 0 && support[i] <= support[i - 1])
        throw validation_error("cmf", "support must be strictly increasing");
    }
    if (std::abs(cmf.back() - 1.0) > 1e-12)
      throw validation_error("cmf", "final cumulative probability must be 1.0");
  }

  double mean() const {
    double e = 0.0, prev = 0.0;
    for (std::size_t i = 0; i < support.size(); ++i) {
      e += support[i] * (cmf[i] - prev);
      prev = cmf[i];
    }
    return e;
  }
};

// Inverse-CMF draw: smallest support value v with r < cmf(v).
inline double sample_cmf(const DiscreteCmf& d, double r) {
  for (std::size_t i = 0; i < d.cmf.size(); ++i)
    if (r < d.cmf[i]) return d.support[i];
  return d.support.back();
}

// Lognormal-fitted boarding/alighting cadence defaults.
inline DiscreteCmf default_arrival_cmf() {
  return {{1, 2, 3, 4, 5}, {0.14, 0.81, 0.97, 0.99, 1.0}};
}
inline DiscreteCmf default_alight_cmf() {
  return {{1, 2, 3, 4, 5}, {0.51, 0.77, 0.88, 0.95, 1.0}};
}

struct DemandSchedule {
  int arrival_period = 60;                // seconds between arrival events
  std::vector<DiscreteCmf> arrival_cmf;   // one per stop
  DiscreteCmf alight_cmf;
  std::uint64_t seed = 0;

  void validate() const {
    if (arrival_period < 1)
      throw validation_error("arrival_period", "must be >= 1");
    if (arrival_cmf.empty())
      throw validation_error("arrival_cmf", "at least one per-stop cmf required");
    for (const auto& c : arrival_cmf) c.validate();
    alight_cmf.validate();
  }
};

namespace stream {
constexpr std::uint64_t arrivals = 0x41525256ULL;  // per (stop, k)
constexpr std::uint64_t alight = 0x414c4754ULL;    // per stop, once per trip
}  // namespace stream

// Arrival events fire on cadence ticks k = period, 2*period, ...; the trip
// starts with empty stops at k = 0.
inline bool arrival_tick(const DemandSchedule& d, int k) {
  return k > 0 && k % d.arrival_period == 0;
}

inline double arrival_sample(const DemandSchedule& d, int m, int k) {
  const double r = uniform01(d.seed, (stream::arrivals << 8) | static_cast<std::uint64_t>(m),
                             static_cast<std::uint64_t>(k));
  return sample_cmf(d.arrival_cmf[static_cast<std::size_t>(m - 1)], r);
}

// Alighting demand for stop m, fixed per trip so look-ahead depth cannot
// perturb the realized stream.
inline double alight_demand(const DemandSchedule& d, int m) {
  const double r = uniform01(d.seed, (stream::alight << 8) | static_cast<std::uint64_t>(m), 0);
  return sample_cmf(d.alight_cmf, r);
}

// Realized disturbance for the step taken at clock k.
inline Disturbance disturbance_at(int k, const BusState& s,
                                  const DemandSchedule& d,
                                  const LoopNetwork& net) {
  const int stops = net.stop_count();
  Disturbance w;
  w.arrivals.assign(static_cast<std::size_t>(stops), 0.0);
  if (arrival_tick(d, k))
    for (int m = 1; m <= stops; ++m)
      w.arrivals[static_cast<std::size_t>(m - 1)] = arrival_sample(d, m, k);

  const int next = s.recent_stop + 1;
  if (next <= stops && stop_window(net, next).contains(s.position)) {
    const double raw = alight_demand(d, next);
    w.alight_now = std::min(raw, s.onboard);
    w.alight_truncated = raw > s.onboard;
  }
  if (next <= stops)  // demand ahead, for the gamma refresh at departure
    w.alight_next_raw = alight_demand(d, next);
  return w;
}

// Closed-form per-stop E[G] at step k (zero off-cadence).
inline std::vector<double> expected_arrivals(const DemandSchedule& d, int k) {
  std::vector<double> e(d.arrival_cmf.size(), 0.0);
  if (arrival_tick(d, k))
    for (std::size_t i = 0; i < e.size(); ++i) e[i] = d.arrival_cmf[i].mean();
  return e;
}

// Sampling estimate of E[G], kept for validating the closed form.
inline std::vector<double> sampled_expected_arrivals(const DemandSchedule& d,
                                                     int k, int samples,
                                                     std::uint64_t seed) {
  std::vector<double> e(d.arrival_cmf.size(), 0.0);
  if (!arrival_tick(d, k) || samples < 1) return e;
  for (std::size_t i = 0; i < e.size(); ++i) {
    double acc = 0.0;
    for (int n = 0; n < samples; ++n)
      acc += sample_cmf(d.arrival_cmf[i],
                        uniform01(seed, 0xE57ULL + i, static_cast<std::uint64_t>(n)));
    e[i] = acc / samples;
  }
  return e;
}

// Hash of the full disturbance stream over [0, T]; a pure function of the
// schedule, so paired policies must agree on it.
inline std::uint64_t stream_hash(const DemandSchedule& d, const LoopNetwork& net,
                                 int horizon) {
  std::uint64_t h = splitmix64(d.seed);
  for (int k = 0; k <= horizon; ++k)
    if (arrival_tick(d, k))
      for (int m = 1; m <= net.stop_count(); ++m)
        h = splitmix64(h ^ static_cast<std::uint64_t>(arrival_sample(d, m, k) * 8));
  for (int m = 1; m <= net.stop_count(); ++m)
    h = splitmix64(h ^ static_cast<std::uint64_t>(alight_demand(d, m) * 8));
  return h;
}

}  // namespace brt
