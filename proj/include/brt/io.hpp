#pragma once

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "brt/harness.hpp"
#include "brt/scenario.hpp"

namespace brt {

class io_error : public std::runtime_error {
 public:
  io_error(const std::string& path, const std::string& what)
      : std::runtime_error(path + ": " + what) {}
};

namespace detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

inline std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) out.push_back(trim(item));
  return out;
}

inline double to_number(const std::string& field, const std::string& s) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw validation_error(field, "not a number: '" + s + "'");
  }
}

// Deterministic number formatting: integers print without a decimal point.
inline std::string format_number(double v) {
  const long long i = static_cast<long long>(std::llround(v));
  if (v == static_cast<double>(i) && std::abs(v) < 1e15)
    return std::to_string(i);
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

}  // namespace detail

// Plain key-value scenario text. Unspecified keys keep the default-scenario
// values; every invariant is revalidated after overrides and the first
// violation is reported with its field name.
inline Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw io_error(path, "cannot open scenario file");
  Scenario sc = default_scenario();
  bool stops_set = false;

  auto parse_cmf = [](const std::string& field,
                      const std::string& value) -> DiscreteCmf {
    DiscreteCmf d;
    for (const auto& pair : detail::split(value, ',')) {
      const auto kv = detail::split(pair, ':');
      if (kv.size() != 2)
        throw validation_error(field, "expected value:probability pairs");
      d.support.push_back(detail::to_number(field, kv[0]));
      d.cmf.push_back(detail::to_number(field, kv[1]));
    }
    return d;
  };

  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw validation_error("line " + std::to_string(lineno),
                             "expected key = value");
    const std::string key = detail::trim(line.substr(0, eq));
    const std::string value = detail::trim(line.substr(eq + 1));

    if (key == "loop_length_m")
      sc.network.loop_length = detail::to_number(key, value);
    else if (key == "delta_m")
      sc.network.delta = detail::to_number(key, value);
    else if (key == "stop_positions_m") {
      sc.network.stop_positions.clear();
      for (const auto& v : detail::split(value, ','))
        sc.network.stop_positions.push_back(detail::to_number(key, v));
      stops_set = true;
    } else if (key == "depot_depart_s")
      sc.timetable.depot_depart_s = detail::to_number(key, value);
    else if (key == "timetable") {
      sc.timetable.entries.clear();
      for (const auto& row : detail::split(value, ',')) {
        const auto ad = detail::split(row, ':');
        if (ad.size() != 2)
          throw validation_error(key, "expected arrival:departure rows");
        sc.timetable.entries.push_back(
            {detail::to_number(key, ad[0]), detail::to_number(key, ad[1])});
      }
    } else if (key == "depot_return_s")
      sc.timetable.depot_return_s = detail::to_number(key, value);
    else if (key == "traffic_factor")
      sc.params.traffic_factor = detail::to_number(key, value);
    else if (key == "speed_step")
      sc.params.speed_step = detail::to_number(key, value);
    else if (key == "max_speed")
      sc.params.max_speed = detail::to_number(key, value);
    else if (key == "lambda")
      sc.params.lambda = detail::to_number(key, value);
    else if (key == "boarding_rate")
      sc.params.boarding_rate = detail::to_number(key, value);
    else if (key == "bus_capacity")
      sc.params.bus_capacity = detail::to_number(key, value);
    else if (key == "alpha_queue")
      sc.params.alpha.queue = detail::to_number(key, value);
    else if (key == "alpha_schedule")
      sc.params.alpha.schedule = detail::to_number(key, value);
    else if (key == "alpha_speed")
      sc.params.alpha.speed = detail::to_number(key, value);
    else if (key == "desired_speed_min")
      sc.params.desired_speed_min = detail::to_number(key, value);
    else if (key == "desired_speed_max")
      sc.params.desired_speed_max = detail::to_number(key, value);
    else if (key == "fleet_size")
      sc.params.fleet_size = static_cast<int>(detail::to_number(key, value));
    else if (key == "arrival_period_s")
      sc.demand.arrival_period =
          static_cast<int>(detail::to_number(key, value));
    else if (key == "arrival_cmf")
      sc.demand.arrival_cmf.assign(1, parse_cmf(key, value));
    else if (key == "alight_cmf")
      sc.demand.alight_cmf = parse_cmf(key, value);
    else
      throw validation_error(key, "unknown scenario key");
  }
  // One shared arrival cmf is replicated per stop.
  if (sc.demand.arrival_cmf.size() == 1 || stops_set) {
    const DiscreteCmf shared = sc.demand.arrival_cmf.front();
    sc.demand.arrival_cmf.assign(sc.network.stop_positions.size(), shared);
  }
  sc.validate();
  return sc;
}

inline std::string trace_csv_header(int stops) {
  std::string h = "k,position_m,speed,recent_stop,capacity_free";
  for (int m = 1; m <= stops; ++m) h += ",n_stop_" + std::to_string(m);
  h += ",stage_cost,regime,solve_us";
  return h;
}

inline std::string trace_csv_line(const StepRecord& r) {
  std::string line = std::to_string(r.k) + "," +
                     detail::format_number(r.position) + "," +
                     detail::format_number(r.speed) + "," +
                     std::to_string(r.recent_stop) + "," +
                     detail::format_number(r.capacity_free);
  for (double q : r.queues) line += "," + detail::format_number(q);
  line += "," + detail::format_number(r.stage_cost) + "," +
          regime_name(r.regime) + "," + std::to_string(r.solve_us);
  return line;
}

inline void write_trace_csv(const EpisodeResult& res, int stops,
                            const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw io_error(path, "cannot open for writing");
  out << trace_csv_header(stops) << "\n";
  for (const auto& r : res.trace) out << trace_csv_line(r) << "\n";
  if (!out) throw io_error(path, "write failed");
}

inline std::string summary_json_line(const EpisodeSummaryRow& row) {
  std::string s = "{\"policy\":\"" + row.policy + "\"";
  s += ",\"la\":" + std::to_string(row.lookahead);
  s += ",\"seed\":" + std::to_string(row.seed);
  s += ",\"per_stop_area\":[";
  for (std::size_t i = 0; i < row.per_stop_area.size(); ++i) {
    if (i) s += ",";
    s += detail::format_number(row.per_stop_area[i]);
  }
  s += "],\"total_cost\":" + detail::format_number(row.total_cost);
  s += ",\"steps\":" + std::to_string(row.steps);
  s += ",\"termination\":\"" + row.termination + "\"";
  s += ",\"mean_solve_us\":" + detail::format_number(row.mean_solve_us);
  s += ",\"max_solve_us\":" + std::to_string(row.max_solve_us);
  s += ",\"mean_expanded_nodes\":" +
       detail::format_number(row.mean_expanded_nodes);
  s += "}";
  return s;
}

inline void write_summary_jsonl(const std::vector<EpisodeSummaryRow>& rows,
                                const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw io_error(path, "cannot open for writing");
  for (const auto& row : rows) out << summary_json_line(row) << "\n";
  if (!out) throw io_error(path, "write failed");
}

inline void write_trace_jsonl(const EpisodeResult& res,
                              const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw io_error(path, "cannot open for writing");
  for (const auto& r : res.trace) {
    out << "{\"k\":" << r.k << ",\"position_m\":"
        << detail::format_number(r.position)
        << ",\"speed\":" << detail::format_number(r.speed)
        << ",\"recent_stop\":" << r.recent_stop << ",\"capacity_free\":"
        << detail::format_number(r.capacity_free) << ",\"queues\":[";
    for (std::size_t i = 0; i < r.queues.size(); ++i) {
      if (i) out << ",";
      out << detail::format_number(r.queues[i]);
    }
    out << "],\"stage_cost\":" << detail::format_number(r.stage_cost)
        << ",\"regime\":\"" << regime_name(r.regime) << "\",\"solve_us\":"
        << r.solve_us << "}\n";
  }
  if (!out) throw io_error(path, "write failed");
}

// Parse a trace CSV back into records (queue columns only need to survive the
// metric recomputation round-trip).
inline std::vector<StepRecord> read_trace_csv(const std::string& path,
                                              int stops) {
  std::ifstream in(path);
  if (!in) throw io_error(path, "cannot open trace");
  std::vector<StepRecord> rows;
  std::string line;
  if (!std::getline(in, line)) throw io_error(path, "missing header");
  while (std::getline(in, line)) {
    if (detail::trim(line).empty()) continue;
    const auto cols = detail::split(line, ',');
    if (static_cast<int>(cols.size()) != 8 + stops)
      throw io_error(path, "unexpected column count");
    StepRecord r;
    r.k = static_cast<int>(detail::to_number("k", cols[0]));
    r.position = detail::to_number("position_m", cols[1]);
    r.speed = detail::to_number("speed", cols[2]);
    r.recent_stop = static_cast<int>(detail::to_number("recent_stop", cols[3]));
    r.capacity_free = detail::to_number("capacity_free", cols[4]);
    for (int m = 0; m < stops; ++m)
      r.queues.push_back(detail::to_number("n_stop", cols[5 + m]));
    r.stage_cost = detail::to_number("stage_cost", cols[5 + stops]);
    r.solve_us = static_cast<long long>(
        detail::to_number("solve_us", cols[7 + stops]));
    rows.push_back(std::move(r));
  }
  return rows;
}

}  // namespace brt
