#pragma once

// Small hand-built worlds for simulator tests.

#include <string>

#include "ontoneg/traffic_sim.hpp"

namespace fixture {

namespace sim = ontoneg::sim;

// One four-way junction X at the origin with arms W, N, E, S (y grows
// north). Arm lengths are west, north, east, south. Lights TL1..TL4 follow
// the approach order W, N, E, S. Phase 0 releases W/E, phase 1 N/S.
inline sim::World crossing(double w = 200, double n = 200, double e = 300, double s = 200) {
  sim::World world;
  world.nodes = {{"X", 0, 0}, {"W", -w, 0}, {"N", 0, n}, {"E", e, 0}, {"S", 0, -s}};
  world.segments = {{"W-X", w, 1, sim::Direction::TwoWay, 1, 0},
                    {"N-X", n, 1, sim::Direction::TwoWay, 2, 0},
                    {"E-X", e, 1, sim::Direction::TwoWay, 3, 0},
                    {"S-X", s, 1, sim::Direction::TwoWay, 4, 0}};
  sim::Intersection x;
  x.name = "Int1";
  x.node = 0;
  for (std::size_t i = 0; i < 4; ++i) {
    x.approaches.push_back({i, ontoneg::LightId{"TL" + std::to_string(i + 1)}});
  }
  x.conflicts = ontoneg::ConflictMatrix::four_way();
  x.phases = ontoneg::maximal_phases(x.conflicts);
  x.current_phase = 0;
  for (std::size_t i = 0; i < 4; ++i) x.approaches[i].state = x.phases[0][i];
  x.base_duration_s = 30;
  x.phase_duration_s = 30;
  x.phase_ends_at = 1'000'000;
  world.intersections.push_back(x);
  return world;
}

// Adds a vehicle driving from arm `from` through X to arm `to` (segment
// indices 0..3 for W, N, E, S).
inline void add_vehicle(sim::World& world, const std::string& name, std::size_t from,
                        std::size_t to, double speed = 10, sim::Tick departure = 0) {
  sim::Vehicle v;
  v.name = name;
  v.origin = from + 1;
  v.route = {from, to};
  v.speed_mps = speed;
  v.departure = departure;
  world.vehicles.push_back(v);
}

// Runs until every vehicle has arrived or the cap is hit.
inline void run(sim::World& world, sim::Tick cap = 100'000) {
  while (!world.all_arrived() && world.clock < cap) sim::step(world);
}

}  // namespace fixture
