#pragma once

// Recomputes each vehicle's travel time from the event log alone:
// free-flow time plus the sum of stop-to-go intervals.

#include <cmath>
#include <map>
#include <optional>
#include <string>

#include "ontoneg/traffic_sim.hpp"

namespace oracle {

namespace sim = ontoneg::sim;

struct Decomposition {
  double depart_s = 0;
  double arrive_s = 0;
  double waits_s = 0;
  bool complete = false;
};

inline std::map<std::string, Decomposition> decompose(const std::vector<sim::Event>& events) {
  std::map<std::string, Decomposition> out;
  std::map<std::string, double> stopped_at;
  for (const auto& e : events) {
    auto& d = out[e.vehicle];
    switch (e.kind) {
      case sim::EventKind::Depart: d.depart_s = e.time_s; break;
      case sim::EventKind::Stop: stopped_at[e.vehicle] = e.time_s; break;
      case sim::EventKind::Go:
        d.waits_s += e.time_s - stopped_at.at(e.vehicle);
        stopped_at.erase(e.vehicle);
        break;
      case sim::EventKind::Cross: break;
      case sim::EventKind::Arrive:
        d.arrive_s = e.time_s;
        d.complete = true;
        break;
    }
  }
  return out;
}

// Checks every arrived vehicle of a world run with log_events on; the tick
// count may differ from the exact time by `tolerance_ticks`. Returns a
// description of the first mismatch.
inline std::optional<std::string> check_travel_times(const sim::World& w,
                                                     double tolerance_ticks = 1.0) {
  auto dec = decompose(w.events);
  for (std::size_t i = 0; i < w.vehicles.size(); ++i) {
    const auto& v = w.vehicles[i];
    auto t = sim::travel_time(w, i);
    if (!t) continue;
    const auto& d = dec[v.name];
    if (!d.complete) return v.name + ": no arrive event";
    const double free_flow = sim::route_length(w, v) / v.speed_mps;
    const double logged = d.arrive_s - d.depart_s;
    if (std::abs(logged - (free_flow + d.waits_s)) > 1e-6) {
      return v.name + ": event log times do not add up";
    }
    if (std::abs(d.waits_s - v.wait_s) > 1e-6) return v.name + ": wait accumulator differs";
    if (std::abs(static_cast<double>(*t) - (free_flow + v.wait_s)) > tolerance_ticks + 1e-9) {
      return v.name + ": travel time " + std::to_string(*t) + " vs " +
             std::to_string(free_flow + v.wait_s);
    }
  }
  return std::nullopt;
}

}  // namespace oracle
