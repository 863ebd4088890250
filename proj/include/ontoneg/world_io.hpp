#pragma once

// JSON form of a World and JSON-lines form of its event log. Node,
// segment and intersection references are written by name.

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "ontoneg/traffic_sim.hpp"

namespace ontoneg::sim {

// Includes dynamic vehicle state (position, waits, arrival) and the clock,
// so a mid-run world round-trips exactly.
nlohmann::ordered_json world_to_json(const World& world);

// Parses and prepares a world. Throws SimError(InvalidWorld) on bad
// references or shapes.
World world_from_json(const nlohmann::json& j);

std::string serialize(const World& world);

// FNV-1a of serialize(world).
std::uint64_t world_hash(const World& world);

void write_events(std::ostream& out, const std::vector<Event>& events);

}  // namespace ontoneg::sim
