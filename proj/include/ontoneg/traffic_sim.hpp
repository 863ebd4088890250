#pragma once

// Deterministic discrete-time traffic world. One tick is one second.
// Vehicles drive at constant speed along fixed routes and stop only at
// signalized stop lines whose light does not release their movement;
// there is no car following, so stopped vehicles may share a position.

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "ontoneg/signal.hpp"

namespace ontoneg::sim {

using Tick = std::int64_t;

enum class Direction { OneWay, TwoWay };

struct Node {
  std::string name;
  double x = 0.0;
  double y = 0.0;
  bool operator==(const Node&) const = default;
};

struct RoadSegment {
  std::string name;
  double length_m = 0.0;
  int lanes = 1;
  Direction direction = Direction::TwoWay;
  std::size_t from = 0;  // node index; one-way segments run from -> to
  std::size_t to = 0;
  bool operator==(const RoadSegment&) const = default;
};

// An incoming segment at an intersection and the light governing it.
struct Approach {
  std::size_t segment = 0;
  LightId light;
  LightState state = LightState::Red;
  bool operator==(const Approach&) const = default;
};

struct Intersection {
  std::string name;
  std::size_t node = 0;
  std::vector<Approach> approaches;
  ConflictMatrix conflicts;
  // Timer cycle: states per approach. Used when a phase expires without a
  // negotiated replacement.
  std::vector<std::vector<LightState>> phases;
  std::size_t current_phase = 0;
  Tick phase_ends_at = 0;
  double phase_duration_s = 0.0;
  double base_duration_s = 30.0;
  double congestion_gain = 0.0;  // seconds per queued vehicle

  std::vector<LightState> states() const;
  std::vector<LightId> lights() const;
  Configuration configuration() const;
  Configuration phase_configuration(std::size_t phase) const;
  bool operator==(const Intersection&) const = default;
};

enum class VehicleStatus { Pending, Moving, Stopped, Arrived };

struct Vehicle {
  std::string name;
  std::size_t origin = 0;           // node the route starts at
  std::vector<std::size_t> route;   // segment indices
  double speed_mps = 10.0;          // constant
  Tick departure = 0;

  std::size_t segment_index = 0;
  double offset_m = 0.0;
  VehicleStatus status = VehicleStatus::Pending;
  double wait_s = 0.0;
  std::optional<Tick> arrival;
  double arrival_time_s = 0.0;      // exact, before tick quantization
  std::map<std::string, double> wait_by_intersection;

  // Derived: route nodes, size route.size() + 1.
  std::vector<std::size_t> path;

  bool operator==(const Vehicle&) const = default;
};

enum class EventKind { Depart, Stop, Go, Cross, Arrive };

std::string_view to_string(EventKind k);

struct Event {
  Tick tick = 0;        // tick during which the event happened
  double time_s = 0.0;  // exact time
  std::string vehicle;
  EventKind kind = EventKind::Depart;
  std::string intersection;  // Stop/Go/Cross only
};

struct World {
  Tick clock = 0;
  std::uint64_t seed = 0;
  std::vector<Node> nodes;
  std::vector<RoadSegment> segments;
  std::vector<Intersection> intersections;
  std::vector<Vehicle> vehicles;

  bool log_events = false;
  std::vector<Event> events;
  std::uint64_t safety_violations = 0;
  std::uint64_t safety_checks = 0;

  // Derived: intersection index per node.
  std::vector<std::optional<std::size_t>> node_intersection;

  std::optional<std::size_t> find_intersection(std::string_view name) const;
  std::optional<std::size_t> find_vehicle(std::string_view name) const;
  std::optional<std::size_t> find_segment(std::string_view name) const;
  std::optional<std::size_t> find_node(std::string_view name) const;
  bool all_arrived() const;
};

enum class SimErrc {
  InfeasibleParams,
  InvalidWorld,
  UnknownIntersection,
  UnknownVehicle,
  ConflictingGreens,
  ForeignLight,
  NotApproaching,
};

class SimError : public std::runtime_error {
 public:
  SimError(SimErrc code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  SimErrc code() const noexcept { return code_; }

 private:
  SimErrc code_;
};

struct ScenarioParams {
  std::uint32_t n_vehicles = 300;
  std::uint32_t n_routes = 50;
  std::uint32_t n_intersections = 10;
  double radius_m = 10000.0;
  double base_duration_s = 30.0;
  double congestion_gain = 5.0;
  // Fraction of routes drawn as west-east arterials; the rest are random
  // terminal pairs. Higher values concentrate traffic on one axis.
  double asymmetry = 0.0;
  Tick departure_window_s = 300;
  double min_speed_mps = 8.0;
  double max_speed_mps = 16.0;
};

// Validates topology and fills derived data (paths, node lookup). Throws
// SimError(InvalidWorld).
void prepare(World& world);

// Seeded grid scenario: every intersection has four approaches (missing
// neighbours become terminal stubs), routes join two terminals through at
// least one intersection, vehicles take routes round-robin, and each
// intersection starts in a randomly chosen phase.
World generate_scenario(std::uint64_t seed, const ScenarioParams& params);

// Number of distinct routes (ordered terminal pairs) the generator can draw
// for a given intersection count.
std::uint64_t feasible_route_count(std::uint32_t n_intersections);

// Advances the world by one tick: moves vehicles under the current lights,
// advances the clock, alternates expired phases, then checks safety.
void step(World& world);

// Stopped vehicles within `radius_m` upstream of each approach stop line.
std::vector<std::uint32_t> congestion(const World& world, std::size_t intersection,
                                      double radius_m = 200.0);
std::vector<std::uint32_t> congestion(const World& world, std::string_view intersection,
                                      double radius_m = 200.0);

// base + gain * max_queue clamped to [base, 4 * base].
double adjusted_duration(double base_s, double gain, std::uint32_t max_queue);

// Sets every light of the intersection atomically and restarts its timer.
// duration_s must not be below the intersection's base duration.
void apply_configuration(World& world, std::size_t intersection,
                         const Configuration& configuration, double duration_s);

std::optional<Tick> travel_time(const World& world, std::size_t vehicle);

// Free-flow time: route length / speed.
double free_flow_time(const World& world, const Vehicle& v);
double route_length(const World& world, const Vehicle& v);

// True when no intersection currently shows conflicting greens.
bool safe(const World& world);

// What a vehicle faces at the next signalized intersection on its route.
struct NextStop {
  std::size_t intersection;
  std::size_t approach;
  Turn turn;
  double distance_m;        // to the stop line
  double distance_remaining_m;  // to the end of the route
  std::uint32_t turns_remaining;
};

std::optional<NextStop> next_stop(const World& world, const Vehicle& v);

Turn turn_at(const World& world, std::size_t prev_node, std::size_t node,
             std::size_t next_node);

}  // namespace ontoneg::sim
