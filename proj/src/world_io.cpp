#include "ontoneg/world_io.hpp"

#include <ostream>

namespace ontoneg::sim {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

[[noreturn]] void bad(const std::string& msg) {
  throw SimError(SimErrc::InvalidWorld, msg);
}

std::string_view status_name(VehicleStatus s) {
  switch (s) {
    case VehicleStatus::Pending: return "pending";
    case VehicleStatus::Moving: return "moving";
    case VehicleStatus::Stopped: return "stopped";
    case VehicleStatus::Arrived: return "arrived";
  }
  return "pending";
}

VehicleStatus parse_status(const std::string& s) {
  if (s == "pending") return VehicleStatus::Pending;
  if (s == "moving") return VehicleStatus::Moving;
  if (s == "stopped") return VehicleStatus::Stopped;
  if (s == "arrived") return VehicleStatus::Arrived;
  bad("unknown vehicle status " + s);
}

LightState parse_state(const std::string& s) {
  auto st = parse_light_state(s);
  if (!st) bad("unknown light state " + s);
  return *st;
}

template <typename Find>
std::size_t resolve(Find find, const std::string& name, const char* what) {
  auto i = find(name);
  if (!i) bad(std::string("unknown ") + what + " " + name);
  return *i;
}

template <typename T>
T get_or(const json& j, const char* key, T fallback) {
  auto it = j.find(key);
  return it == j.end() ? fallback : it->get<T>();
}

}  // namespace

ordered_json world_to_json(const World& w) {
  ordered_json out;
  out["clock"] = w.clock;
  out["seed"] = w.seed;

  auto& nodes = out["nodes"] = ordered_json::array();
  for (const auto& n : w.nodes) nodes.push_back({{"name", n.name}, {"x", n.x}, {"y", n.y}});

  auto& segs = out["segments"] = ordered_json::array();
  for (const auto& s : w.segments) {
    segs.push_back({{"name", s.name},
                    {"length_m", s.length_m},
                    {"lanes", s.lanes},
                    {"direction", s.direction == Direction::OneWay ? "one_way" : "two_way"},
                    {"from", w.nodes.at(s.from).name},
                    {"to", w.nodes.at(s.to).name}});
  }

  auto& xs = out["intersections"] = ordered_json::array();
  for (const auto& x : w.intersections) {
    ordered_json ix;
    ix["name"] = x.name;
    ix["node"] = w.nodes.at(x.node).name;
    auto& aps = ix["approaches"] = ordered_json::array();
    for (const auto& a : x.approaches) {
      aps.push_back({{"segment", w.segments.at(a.segment).name},
                     {"light", a.light.value},
                     {"state", std::string(to_string(a.state))}});
    }
    ix["conflicts"] = x.conflicts.rows();
    auto& phases = ix["phases"] = ordered_json::array();
    for (const auto& ph : x.phases) {
      auto row = ordered_json::array();
      for (auto st : ph) row.push_back(std::string(to_string(st)));
      phases.push_back(std::move(row));
    }
    ix["current_phase"] = x.current_phase;
    ix["phase_ends_at"] = x.phase_ends_at;
    ix["phase_duration_s"] = x.phase_duration_s;
    ix["base_duration_s"] = x.base_duration_s;
    ix["congestion_gain"] = x.congestion_gain;
    xs.push_back(std::move(ix));
  }

  auto& vs = out["vehicles"] = ordered_json::array();
  for (const auto& v : w.vehicles) {
    ordered_json jv;
    jv["name"] = v.name;
    jv["origin"] = w.nodes.at(v.origin).name;
    auto& route = jv["route"] = ordered_json::array();
    for (auto s : v.route) route.push_back(w.segments.at(s).name);
    jv["speed_mps"] = v.speed_mps;
    jv["departure"] = v.departure;
    jv["status"] = std::string(status_name(v.status));
    jv["segment_index"] = v.segment_index;
    jv["offset_m"] = v.offset_m;
    jv["wait_s"] = v.wait_s;
    if (v.arrival) {
      jv["arrival"] = *v.arrival;
      jv["arrival_time_s"] = v.arrival_time_s;
    }
    if (!v.wait_by_intersection.empty()) jv["wait_by_intersection"] = v.wait_by_intersection;
    vs.push_back(std::move(jv));
  }
  return out;
}

World world_from_json(const json& j) {
  World w;
  try {
    w.clock = get_or<Tick>(j, "clock", 0);
    w.seed = get_or<std::uint64_t>(j, "seed", 0);
    for (const auto& n : j.at("nodes")) {
      w.nodes.push_back(Node{n.at("name").get<std::string>(), n.at("x").get<double>(),
                             n.at("y").get<double>()});
    }
    auto node = [&](const json& v) {
      return resolve([&](const std::string& s) { return w.find_node(s); },
                     v.get<std::string>(), "node");
    };
    for (const auto& s : j.at("segments")) {
      RoadSegment seg;
      seg.name = s.at("name").get<std::string>();
      seg.length_m = s.at("length_m").get<double>();
      seg.lanes = get_or<int>(s, "lanes", 1);
      auto dir = get_or<std::string>(s, "direction", "two_way");
      if (dir == "one_way") {
        seg.direction = Direction::OneWay;
      } else if (dir != "two_way") {
        bad("unknown direction " + dir);
      }
      seg.from = node(s.at("from"));
      seg.to = node(s.at("to"));
      w.segments.push_back(std::move(seg));
    }
    auto segment = [&](const json& v) {
      return resolve([&](const std::string& s) { return w.find_segment(s); },
                     v.get<std::string>(), "segment");
    };
    for (const auto& ix : j.at("intersections")) {
      Intersection x;
      x.name = ix.at("name").get<std::string>();
      x.node = node(ix.at("node"));
      for (const auto& a : ix.at("approaches")) {
        x.approaches.push_back(Approach{segment(a.at("segment")),
                                        LightId{a.at("light").get<std::string>()},
                                        parse_state(get_or<std::string>(a, "state", "red"))});
      }
      if (ix.contains("conflicts")) {
        try {
          x.conflicts = ConflictMatrix::from_rows(
              ix.at("conflicts").get<std::vector<std::vector<bool>>>());
        } catch (const std::invalid_argument& e) {
          bad(x.name + ": " + e.what());
        }
      } else if (x.approaches.size() == 4) {
        x.conflicts = ConflictMatrix::four_way();
      } else {
        bad(x.name + ": conflict matrix required");
      }
      if (ix.contains("phases")) {
        for (const auto& ph : ix.at("phases")) {
          std::vector<LightState> row;
          for (const auto& st : ph) row.push_back(parse_state(st.get<std::string>()));
          x.phases.push_back(std::move(row));
        }
      } else {
        x.phases = maximal_phases(x.conflicts);
      }
      x.current_phase = get_or<std::size_t>(ix, "current_phase", 0);
      x.base_duration_s = get_or<double>(ix, "base_duration_s", 30.0);
      x.phase_duration_s = get_or<double>(ix, "phase_duration_s", x.base_duration_s);
      x.phase_ends_at = get_or<Tick>(ix, "phase_ends_at",
                                     w.clock + static_cast<Tick>(x.phase_duration_s));
      x.congestion_gain = get_or<double>(ix, "congestion_gain", 0.0);
      w.intersections.push_back(std::move(x));
    }
    for (const auto& jv : j.at("vehicles")) {
      Vehicle v;
      v.name = jv.at("name").get<std::string>();
      v.origin = node(jv.at("origin"));
      for (const auto& s : jv.at("route")) v.route.push_back(segment(s));
      v.speed_mps = jv.at("speed_mps").get<double>();
      v.departure = get_or<Tick>(jv, "departure", 0);
      v.status = parse_status(get_or<std::string>(jv, "status", "pending"));
      v.segment_index = get_or<std::size_t>(jv, "segment_index", 0);
      v.offset_m = get_or<double>(jv, "offset_m", 0.0);
      v.wait_s = get_or<double>(jv, "wait_s", 0.0);
      if (jv.contains("arrival")) {
        v.arrival = jv.at("arrival").get<Tick>();
        v.arrival_time_s = get_or<double>(jv, "arrival_time_s", 0.0);
      }
      if (jv.contains("wait_by_intersection")) {
        v.wait_by_intersection =
            jv.at("wait_by_intersection").get<std::map<std::string, double>>();
      }
      w.vehicles.push_back(std::move(v));
    }
  } catch (const json::exception& e) {
    bad(std::string("malformed world: ") + e.what());
  }
  prepare(w);
  return w;
}

std::string serialize(const World& world) { return world_to_json(world).dump(); }

std::uint64_t world_hash(const World& world) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : serialize(world)) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

void write_events(std::ostream& out, const std::vector<Event>& events) {
  for (const auto& e : events) {
    ordered_json j;
    j["tick"] = e.tick;
    j["time_s"] = e.time_s;
    j["vehicle"] = e.vehicle;
    j["event"] = std::string(to_string(e.kind));
    if (!e.intersection.empty()) j["intersection"] = e.intersection;
    out << j.dump() << '\n';
  }
}

}  // namespace ontoneg::sim
