#include "ontoneg/traffic_sim.hpp"

#include <algorithm>
#include <cmath>
#include <array>
#include <deque>
#include <map>
#include <random>
#include <set>
#include <unordered_set>

#include <boost/random/uniform_int_distribution.hpp>
#include <boost/random/uniform_real_distribution.hpp>

namespace ontoneg::sim {

namespace {

constexpr double kEps = 1e-9;

[[noreturn]] void invalid(const std::string& msg) {
  throw SimError(SimErrc::InvalidWorld, msg);
}

Tick to_ticks(double duration_s) {
  return std::max<Tick>(1, static_cast<Tick>(std::ceil(duration_s - kEps)));
}

std::size_t other_end(const RoadSegment& s, std::size_t node) {
  return s.from == node ? s.to : s.from;
}

void emit(World& w, Tick tick, double time, const Vehicle& v, EventKind kind,
          const std::string& intersection = {}) {
  if (!w.log_events) return;
  w.events.push_back(Event{tick, time, v.name, kind, intersection});
}

std::optional<std::size_t> approach_index(const Intersection& x, std::size_t segment) {
  for (std::size_t a = 0; a < x.approaches.size(); ++a) {
    if (x.approaches[a].segment == segment) return a;
  }
  return std::nullopt;
}

}  // namespace

std::string_view to_string(EventKind k) {
  switch (k) {
    case EventKind::Depart: return "depart";
    case EventKind::Stop: return "stop";
    case EventKind::Go: return "go";
    case EventKind::Cross: return "cross";
    case EventKind::Arrive: return "arrive";
  }
  return "depart";
}

// ---------------------------------------------------------------------------
// Intersection helpers

std::vector<LightState> Intersection::states() const {
  std::vector<LightState> out;
  out.reserve(approaches.size());
  for (const auto& a : approaches) out.push_back(a.state);
  return out;
}

std::vector<LightId> Intersection::lights() const {
  std::vector<LightId> out;
  out.reserve(approaches.size());
  for (const auto& a : approaches) out.push_back(a.light);
  return out;
}

Configuration Intersection::configuration() const {
  Configuration c;
  for (const auto& a : approaches) c.assignments.emplace_back(a.light, a.state);
  return c;
}

Configuration Intersection::phase_configuration(std::size_t phase) const {
  Configuration c;
  for (std::size_t i = 0; i < approaches.size(); ++i) {
    c.assignments.emplace_back(approaches[i].light, phases.at(phase)[i]);
  }
  return c;
}

// ---------------------------------------------------------------------------
// World lookup

namespace {

template <typename Vec>
std::optional<std::size_t> find_named(const Vec& items, std::string_view name) {
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (items[i].name == name) return i;
  }
  return std::nullopt;
}

}  // namespace

std::optional<std::size_t> World::find_intersection(std::string_view name) const {
  return find_named(intersections, name);
}
std::optional<std::size_t> World::find_vehicle(std::string_view name) const {
  return find_named(vehicles, name);
}
std::optional<std::size_t> World::find_segment(std::string_view name) const {
  return find_named(segments, name);
}
std::optional<std::size_t> World::find_node(std::string_view name) const {
  return find_named(nodes, name);
}

bool World::all_arrived() const {
  return std::all_of(vehicles.begin(), vehicles.end(), [](const Vehicle& v) {
    return v.status == VehicleStatus::Arrived;
  });
}

// ---------------------------------------------------------------------------
// Validation

void prepare(World& w) {
  auto unique = [](const auto& items, const char* what) {
    std::unordered_set<std::string> seen;
    for (const auto& it : items) {
      if (it.name.empty()) invalid(std::string(what) + " with empty name");
      if (!seen.insert(it.name).second) {
        invalid(std::string("duplicate ") + what + " " + it.name);
      }
    }
  };
  unique(w.nodes, "node");
  unique(w.segments, "segment");
  unique(w.intersections, "intersection");
  unique(w.vehicles, "vehicle");

  for (const auto& s : w.segments) {
    if (!(s.length_m > 0) || !std::isfinite(s.length_m)) {
      invalid("segment " + s.name + " must have positive length");
    }
    if (s.lanes < 1) invalid("segment " + s.name + " must have at least one lane");
    if (s.from >= w.nodes.size() || s.to >= w.nodes.size() || s.from == s.to) {
      invalid("segment " + s.name + " has invalid endpoints");
    }
  }

  w.node_intersection.assign(w.nodes.size(), std::nullopt);
  std::unordered_set<std::string> light_names;
  for (std::size_t i = 0; i < w.intersections.size(); ++i) {
    const auto& x = w.intersections[i];
    if (x.node >= w.nodes.size()) invalid("intersection " + x.name + " has no node");
    if (w.node_intersection[x.node]) {
      invalid("two intersections share node " + w.nodes[x.node].name);
    }
    w.node_intersection[x.node] = i;
    if (x.conflicts.size() != x.approaches.size()) {
      invalid("intersection " + x.name + ": conflict matrix size mismatch");
    }
    for (const auto& a : x.approaches) {
      if (a.segment >= w.segments.size()) invalid(x.name + ": unknown approach segment");
      const auto& s = w.segments[a.segment];
      bool incident = s.direction == Direction::OneWay
                          ? s.to == x.node
                          : (s.to == x.node || s.from == x.node);
      if (!incident) invalid(x.name + ": segment " + s.name + " does not enter it");
      if (!light_names.insert(a.light.value).second) {
        invalid("duplicate light " + a.light.value);
      }
    }
    for (const auto& ph : x.phases) {
      if (ph.size() != x.approaches.size()) invalid(x.name + ": phase size mismatch");
      if (!conflict_free(ph, x.conflicts)) invalid(x.name + ": conflicting phase");
    }
    if (!x.phases.empty() && x.current_phase >= x.phases.size()) {
      invalid(x.name + ": current phase out of range");
    }
    if (x.base_duration_s <= 0 || x.congestion_gain < 0) {
      invalid(x.name + ": invalid timing parameters");
    }
  }

  for (auto& v : w.vehicles) {
    if (v.route.empty()) invalid("vehicle " + v.name + " has an empty route");
    if (!(v.speed_mps > 0) || !std::isfinite(v.speed_mps)) {
      invalid("vehicle " + v.name + " must have positive speed");
    }
    if (v.origin >= w.nodes.size()) invalid("vehicle " + v.name + ": unknown origin");
    v.path.assign(1, v.origin);
    for (std::size_t seg : v.route) {
      if (seg >= w.segments.size()) invalid("vehicle " + v.name + ": unknown segment");
      const auto& s = w.segments[seg];
      std::size_t here = v.path.back();
      bool ok = s.direction == Direction::OneWay ? s.from == here
                                                 : (s.from == here || s.to == here);
      if (!ok) invalid("vehicle " + v.name + ": route breaks at segment " + s.name);
      v.path.push_back(other_end(s, here));
    }
    if (v.status != VehicleStatus::Arrived && v.segment_index >= v.route.size()) {
      invalid("vehicle " + v.name + ": position beyond route");
    }
    if (v.offset_m < 0 ||
        (v.segment_index < v.route.size() &&
         v.offset_m > w.segments[v.route[v.segment_index]].length_m + kEps)) {
      invalid("vehicle " + v.name + ": offset outside segment");
    }
  }
}

// ---------------------------------------------------------------------------
// Geometry

Turn turn_at(const World& w, std::size_t prev_node, std::size_t node,
             std::size_t next_node) {
  const auto& p = w.nodes[prev_node];
  const auto& n = w.nodes[node];
  const auto& m = w.nodes[next_node];
  double ax = n.x - p.x, ay = n.y - p.y;
  double bx = m.x - n.x, by = m.y - n.y;
  double cross = ax * by - ay * bx;
  double scale = std::hypot(ax, ay) * std::hypot(bx, by);
  if (std::abs(cross) <= 1e-6 * scale) {
    return (ax * bx + ay * by) >= 0 ? Turn::Straight : Turn::Left;
  }
  return cross < 0 ? Turn::Right : Turn::Left;
}

double route_length(const World& w, const Vehicle& v) {
  double total = 0.0;
  for (std::size_t s : v.route) total += w.segments[s].length_m;
  return total;
}

double free_flow_time(const World& w, const Vehicle& v) {
  return route_length(w, v) / v.speed_mps;
}

std::optional<NextStop> next_stop(const World& w, const Vehicle& v) {
  if (v.status == VehicleStatus::Arrived || v.route.size() < 2) return std::nullopt;
  double ahead = w.segments[v.route[v.segment_index]].length_m - v.offset_m;
  double remaining = ahead;
  for (std::size_t k = v.segment_index + 1; k < v.route.size(); ++k) {
    remaining += w.segments[v.route[k]].length_m;
  }
  std::uint32_t turns = 0;
  for (std::size_t k = v.segment_index; k + 1 < v.route.size(); ++k) {
    if (turn_at(w, v.path[k], v.path[k + 1], v.path[k + 2]) != Turn::Straight) ++turns;
  }
  double distance = ahead;
  for (std::size_t k = v.segment_index; k + 1 < v.route.size(); ++k) {
    std::size_t node = v.path[k + 1];
    if (auto xi = w.node_intersection[node]) {
      if (auto a = approach_index(w.intersections[*xi], v.route[k])) {
        return NextStop{*xi, *a, turn_at(w, v.path[k], node, v.path[k + 2]),
                        distance, remaining, turns};
      }
    }
    distance += w.segments[v.route[k + 1]].length_m;
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Stepping

namespace {

// Whether the vehicle, standing at the end of its current segment, may
// enter the next one. Returns the intersection name when signalized.
bool released(const World& w, const Vehicle& v, std::string* where) {
  std::size_t k = v.segment_index;
  std::size_t node = v.path[k + 1];
  auto xi = w.node_intersection[node];
  if (!xi) return true;
  const auto& x = w.intersections[*xi];
  *where = x.name;
  auto a = approach_index(x, v.route[k]);
  if (!a) return true;
  Turn turn = turn_at(w, v.path[k], node, v.path[k + 2]);
  return permits(x.approaches[*a].state, turn);
}

void advance_vehicle(World& w, Vehicle& v) {
  const Tick t = w.clock;
  if (v.status == VehicleStatus::Arrived) return;
  if (v.status == VehicleStatus::Pending) {
    if (v.departure > t) return;
    v.status = VehicleStatus::Moving;
    emit(w, t, static_cast<double>(t), v, EventKind::Depart);
  }

  double budget = 1.0;
  if (v.status == VehicleStatus::Stopped) {
    std::string where;
    if (!released(w, v, &where)) {
      v.wait_s += 1.0;
      v.wait_by_intersection[where] += 1.0;
      return;
    }
    v.status = VehicleStatus::Moving;
    emit(w, t, static_cast<double>(t), v, EventKind::Go, where);
    emit(w, t, static_cast<double>(t), v, EventKind::Cross, where);
    ++v.segment_index;
    v.offset_m = 0.0;
  }

  while (true) {
    const double length = w.segments[v.route[v.segment_index]].length_m;
    const double to_end = (length - v.offset_m) / v.speed_mps;
    if (to_end > budget + kEps) {
      v.offset_m += v.speed_mps * budget;
      return;
    }
    budget = std::max(0.0, budget - to_end);
    v.offset_m = length;
    const double now = static_cast<double>(t) + (1.0 - budget);
    if (v.segment_index + 1 == v.route.size()) {
      v.status = VehicleStatus::Arrived;
      v.arrival = t + 1;
      v.arrival_time_s = now;
      emit(w, t, now, v, EventKind::Arrive);
      return;
    }
    std::string where;
    if (!released(w, v, &where)) {
      v.status = VehicleStatus::Stopped;
      v.wait_s += budget;
      v.wait_by_intersection[where] += budget;
      emit(w, t, now, v, EventKind::Stop, where);
      return;
    }
    if (!where.empty()) emit(w, t, now, v, EventKind::Cross, where);
    ++v.segment_index;
    v.offset_m = 0.0;
  }
}

void set_states(Intersection& x, const std::vector<LightState>& states) {
  for (std::size_t i = 0; i < x.approaches.size(); ++i) x.approaches[i].state = states[i];
}

}  // namespace

void step(World& w) {
  for (auto& v : w.vehicles) advance_vehicle(w, v);
  ++w.clock;
  for (auto& x : w.intersections) {
    if (x.phases.empty() || w.clock < x.phase_ends_at) continue;
    x.current_phase = (x.current_phase + 1) % x.phases.size();
    set_states(x, x.phases[x.current_phase]);
    x.phase_duration_s = x.base_duration_s;
    x.phase_ends_at = w.clock + to_ticks(x.base_duration_s);
  }
  ++w.safety_checks;
  if (!safe(w)) ++w.safety_violations;
}

bool safe(const World& w) {
  return std::all_of(w.intersections.begin(), w.intersections.end(),
                     [](const Intersection& x) {
                       return conflict_free(x.states(), x.conflicts);
                     });
}

// ---------------------------------------------------------------------------
// Signals

std::vector<std::uint32_t> congestion(const World& w, std::size_t xi, double radius_m) {
  if (xi >= w.intersections.size()) {
    throw SimError(SimErrc::UnknownIntersection, "unknown intersection");
  }
  const auto& x = w.intersections[xi];
  std::vector<std::uint32_t> out(x.approaches.size(), 0);
  for (const auto& v : w.vehicles) {
    if (v.status != VehicleStatus::Stopped) continue;
    if (v.path[v.segment_index + 1] != x.node) continue;
    auto a = approach_index(x, v.route[v.segment_index]);
    if (!a) continue;
    double gap = w.segments[v.route[v.segment_index]].length_m - v.offset_m;
    if (gap <= radius_m + kEps) ++out[*a];
  }
  return out;
}

std::vector<std::uint32_t> congestion(const World& w, std::string_view name,
                                      double radius_m) {
  auto xi = w.find_intersection(name);
  if (!xi) {
    throw SimError(SimErrc::UnknownIntersection,
                   "unknown intersection " + std::string(name));
  }
  return congestion(w, *xi, radius_m);
}

double adjusted_duration(double base_s, double gain, std::uint32_t max_queue) {
  return std::clamp(base_s + gain * max_queue, base_s, 4.0 * base_s);
}

void apply_configuration(World& w, std::size_t xi, const Configuration& config,
                         double duration_s) {
  if (xi >= w.intersections.size()) {
    throw SimError(SimErrc::UnknownIntersection, "unknown intersection");
  }
  auto& x = w.intersections[xi];
  if (!(duration_s >= x.base_duration_s)) {
    throw SimError(SimErrc::InvalidWorld,
                   "phase duration at " + x.name + " is below its base duration");
  }
  std::vector<LightState> states(x.approaches.size(), LightState::Red);
  std::vector<bool> seen(x.approaches.size(), false);
  for (const auto& [light, state] : config.assignments) {
    std::size_t a = 0;
    while (a < x.approaches.size() && x.approaches[a].light != light) ++a;
    if (a == x.approaches.size()) {
      throw SimError(SimErrc::ForeignLight,
                     "light " + light.value + " is not at " + x.name);
    }
    if (seen[a]) {
      throw SimError(SimErrc::ForeignLight, "light " + light.value + " assigned twice");
    }
    seen[a] = true;
    states[a] = state;
  }
  if (std::find(seen.begin(), seen.end(), false) != seen.end()) {
    throw SimError(SimErrc::ForeignLight,
                   "configuration does not cover every light of " + x.name);
  }
  if (!conflict_free(states, x.conflicts)) {
    throw SimError(SimErrc::ConflictingGreens,
                   "configuration turns conflicting approaches green at " + x.name);
  }
  set_states(x, states);
  auto it = std::find(x.phases.begin(), x.phases.end(), states);
  if (it != x.phases.end()) {
    x.current_phase = static_cast<std::size_t>(it - x.phases.begin());
  }
  x.phase_duration_s = duration_s;
  x.phase_ends_at = w.clock + to_ticks(duration_s);
}

std::optional<Tick> travel_time(const World& w, std::size_t vi) {
  if (vi >= w.vehicles.size()) {
    throw SimError(SimErrc::UnknownVehicle, "unknown vehicle");
  }
  const auto& v = w.vehicles[vi];
  if (!v.arrival) return std::nullopt;
  return *v.arrival - v.departure;
}

// ---------------------------------------------------------------------------
// Scenario generation

namespace {

// Approach order around a junction: west, north, east, south.
constexpr int kDr[4] = {0, -1, 0, 1};
constexpr int kDc[4] = {-1, 0, 1, 0};
constexpr const char* kDirName[4] = {"W", "N", "E", "S"};

struct Grid {
  std::uint32_t rows = 0;
  std::uint32_t cols = 0;
  std::uint32_t n = 0;

  explicit Grid(std::uint32_t count) : n(count) {
    cols = static_cast<std::uint32_t>(std::ceil(std::sqrt(static_cast<double>(count))));
    rows = (count + cols - 1) / cols;
  }
  std::optional<std::uint32_t> at(long r, long c) const {
    if (r < 0 || c < 0 || r >= static_cast<long>(rows) || c >= static_cast<long>(cols)) {
      return std::nullopt;
    }
    auto i = static_cast<std::uint32_t>(r * cols + c);
    if (i >= n) return std::nullopt;
    return i;
  }
  std::optional<std::uint32_t> neighbour(std::uint32_t i, int dir) const {
    return at(static_cast<long>(i / cols) + kDr[dir], static_cast<long>(i % cols) + kDc[dir]);
  }
  std::uint32_t terminals() const {
    std::uint32_t t = 0;
    for (std::uint32_t i = 0; i < n; ++i) {
      for (int d = 0; d < 4; ++d) t += neighbour(i, d) ? 0 : 1;
    }
    return t;
  }
};

struct Terminal {
  std::size_t node;
  std::uint32_t intersection;
  int dir;
  std::size_t stub;
};

using Rng = std::mt19937_64;

template <typename T>
T uniform_int(Rng& rng, T lo, T hi) {
  return boost::random::uniform_int_distribution<T>(lo, hi)(rng);
}

double uniform_real(Rng& rng, double lo, double hi) {
  if (lo == hi) return lo;
  return boost::random::uniform_real_distribution<double>(lo, hi)(rng);
}

// Random shortest path between two intersections over the grid links.
std::vector<std::uint32_t> random_shortest_path(const Grid& g, std::uint32_t from,
                                                std::uint32_t to, Rng& rng) {
  std::vector<int> dist(g.n, -1);
  std::deque<std::uint32_t> queue{to};
  dist[to] = 0;
  while (!queue.empty()) {
    auto i = queue.front();
    queue.pop_front();
    for (int d = 0; d < 4; ++d) {
      if (auto j = g.neighbour(i, d); j && dist[*j] < 0) {
        dist[*j] = dist[i] + 1;
        queue.push_back(*j);
      }
    }
  }
  std::vector<std::uint32_t> path{from};
  while (path.back() != to) {
    std::vector<std::uint32_t> options;
    for (int d = 0; d < 4; ++d) {
      auto j = g.neighbour(path.back(), d);
      if (j && dist[*j] == dist[path.back()] - 1) options.push_back(*j);
    }
    path.push_back(options[uniform_int<std::size_t>(rng, 0, options.size() - 1)]);
  }
  return path;
}

}  // namespace

std::uint64_t feasible_route_count(std::uint32_t n_intersections) {
  if (n_intersections == 0) return 0;
  std::uint64_t t = Grid(n_intersections).terminals();
  return t * (t - 1);
}

World generate_scenario(std::uint64_t seed, const ScenarioParams& p) {
  auto infeasible = [](const std::string& msg) {
    throw SimError(SimErrc::InfeasibleParams, msg);
  };
  if (p.n_vehicles == 0 || p.n_routes == 0 || p.n_intersections == 0) {
    infeasible("vehicle, route and intersection counts must be positive");
  }
  if (!(p.radius_m > 0) || !(p.base_duration_s > 0) || p.congestion_gain < 0) {
    infeasible("radius and base duration must be positive, gain non-negative");
  }
  if (!(p.min_speed_mps > 0) || p.max_speed_mps < p.min_speed_mps) {
    infeasible("speed range must be positive and ordered");
  }
  if (p.asymmetry < 0 || p.asymmetry > 1 || p.departure_window_s < 0) {
    infeasible("asymmetry must lie in [0, 1] and the departure window be >= 0");
  }
  if (p.n_routes > feasible_route_count(p.n_intersections)) {
    infeasible(std::to_string(p.n_routes) + " routes requested but only " +
               std::to_string(feasible_route_count(p.n_intersections)) +
               " distinct routes exist");
  }

  Rng rng(seed);
  World w;
  w.seed = seed;
  const Grid g(p.n_intersections);
  const double block = 2.0 * p.radius_m / std::hypot(g.cols + 1.0, g.rows + 1.0);
  const double cx = (g.cols - 1) / 2.0;
  const double cy = (g.rows - 1) / 2.0;

  for (std::uint32_t i = 0; i < g.n; ++i) {
    double x = (static_cast<double>(i % g.cols) - cx) * block;
    double y = (cy - static_cast<double>(i / g.cols)) * block;
    w.nodes.push_back(Node{"N" + std::to_string(i + 1), x, y});
  }

  std::map<std::pair<std::uint32_t, std::uint32_t>, std::size_t> links;
  std::vector<Terminal> terminals;
  std::vector<std::array<std::size_t, 4>> approach_segment(g.n);
  for (std::uint32_t i = 0; i < g.n; ++i) {
    for (int d = 0; d < 4; ++d) {
      if (auto j = g.neighbour(i, d)) {
        auto key = std::minmax(i, *j);
        auto it = links.find(key);
        if (it == links.end()) {
          std::size_t s = w.segments.size();
          w.segments.push_back(RoadSegment{"S" + std::to_string(s + 1), block, 2,
                                           Direction::TwoWay, key.first, key.second});
          it = links.emplace(key, s).first;
        }
        approach_segment[i][d] = it->second;
      } else {
        std::size_t node = w.nodes.size();
        const auto& xn = w.nodes[i];
        w.nodes.push_back(Node{"T" + std::to_string(terminals.size() + 1) + kDirName[d],
                               xn.x + kDc[d] * block, xn.y - kDr[d] * block});
        std::size_t s = w.segments.size();
        w.segments.push_back(RoadSegment{"S" + std::to_string(s + 1), block, 2,
                                         Direction::TwoWay, node, i});
        approach_segment[i][d] = s;
        terminals.push_back(Terminal{node, i, d, s});
      }
    }
  }

  for (std::uint32_t i = 0; i < g.n; ++i) {
    Intersection x;
    x.name = "Int" + std::to_string(i + 1);
    x.node = i;
    for (int d = 0; d < 4; ++d) {
      x.approaches.push_back(Approach{approach_segment[i][static_cast<std::size_t>(d)],
                                      LightId{"TL" + std::to_string(4 * i + d + 1)},
                                      LightState::Red});
    }
    x.conflicts = ConflictMatrix::four_way();
    x.phases = maximal_phases(x.conflicts);
    x.base_duration_s = p.base_duration_s;
    x.congestion_gain = p.congestion_gain;
    x.current_phase = uniform_int<std::size_t>(rng, 0, x.phases.size() - 1);
    for (std::size_t a = 0; a < 4; ++a) x.approaches[a].state = x.phases[x.current_phase][a];
    x.phase_duration_s = p.base_duration_s;
    x.phase_ends_at = uniform_int<Tick>(rng, 1, to_ticks(p.base_duration_s));
    w.intersections.push_back(std::move(x));
  }

  std::vector<std::size_t> west, east;
  for (std::size_t t = 0; t < terminals.size(); ++t) {
    if (terminals[t].dir == 0) west.push_back(t);
    if (terminals[t].dir == 2) east.push_back(t);
  }
  const std::size_t arterial_pairs = 2 * west.size() * east.size();

  struct RouteDef {
    std::size_t origin;
    std::vector<std::size_t> segments;
  };
  std::vector<RouteDef> routes;
  std::set<std::pair<std::size_t, std::size_t>> used;
  std::size_t arterial_used = 0;
  while (routes.size() < p.n_routes) {
    bool arterial = uniform_real(rng, 0.0, 1.0) < p.asymmetry &&
                    arterial_used < arterial_pairs;
    std::size_t a, b;
    if (arterial) {
      a = west[uniform_int<std::size_t>(rng, 0, west.size() - 1)];
      b = east[uniform_int<std::size_t>(rng, 0, east.size() - 1)];
      if (uniform_int(rng, 0, 1) == 1) std::swap(a, b);
    } else {
      a = uniform_int<std::size_t>(rng, 0, terminals.size() - 1);
      b = uniform_int<std::size_t>(rng, 0, terminals.size() - 2);
      if (b >= a) ++b;
    }
    if (!used.insert({a, b}).second) continue;
    const auto& ta = terminals[a];
    const auto& tb = terminals[b];
    bool is_arterial = (ta.dir == 0 && tb.dir == 2) || (ta.dir == 2 && tb.dir == 0);
    if (is_arterial) ++arterial_used;

    RouteDef r{ta.node, {ta.stub}};
    auto hops = random_shortest_path(g, ta.intersection, tb.intersection, rng);
    for (std::size_t k = 0; k + 1 < hops.size(); ++k) {
      r.segments.push_back(links.at(std::minmax(hops[k], hops[k + 1])));
    }
    r.segments.push_back(tb.stub);
    routes.push_back(std::move(r));
  }

  for (std::uint32_t i = 0; i < p.n_vehicles; ++i) {
    const auto& r = routes[i % routes.size()];
    Vehicle v;
    v.name = "v" + std::to_string(i + 1);
    v.origin = r.origin;
    v.route = r.segments;
    v.speed_mps = uniform_real(rng, p.min_speed_mps, p.max_speed_mps);
    v.departure = uniform_int<Tick>(rng, 0, p.departure_window_s);
    w.vehicles.push_back(std::move(v));
  }
  prepare(w);
  return w;
}

}  // namespace ontoneg::sim
