#pragma once

// Scripted scenarios: a world plus a fixed schedule of negotiation
// sessions and votes, replayed tick by tick. Votes are either a fixed bid
// or "auto", in which case the vehicle picks with choose_bid from its
// position at the vote tick.

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "ontoneg/knowledge_store.hpp"
#include "ontoneg/negotiation.hpp"
#include "ontoneg/traffic_sim.hpp"

namespace ontoneg::replay {

class ScenarioError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ScriptedVote {
  sim::Tick tick = 0;
  std::string vehicle;
  std::optional<negotiation::BidId> bid;  // nullopt: auto
  bool operator==(const ScriptedVote&) const = default;
};

struct ScriptedSession {
  std::string intersection;
  sim::Tick open_tick = 0;
  sim::Tick apply_tick = 0;
  double duration_s = 0.0;
  std::vector<ScriptedVote> votes;
  bool operator==(const ScriptedSession&) const = default;
};

struct Scenario {
  std::string description;
  sim::World world;
  std::uint32_t phase_count = 2;
  std::vector<ScriptedSession> sessions;
};

// Four intersections in a north-south chain. car1 enters from the west,
// turns right at Int1 and drives south through Int2..Int4. Background
// voters give tallies 3-2, 2-4, 4-3 and 0-3 once car1 has voted, so car1
// meets a red light only at Int3.
Scenario golden_corridor();

nlohmann::ordered_json scenario_to_json(const Scenario& s);
// Throws ScenarioError (or SimError for the embedded world).
Scenario scenario_from_json(const nlohmann::json& j);

struct SessionResult {
  std::string intersection;
  std::string session;
  sim::Tick apply_tick = 0;
  negotiation::BidId winner;
  negotiation::Tally tally;
  bool contested = false;
};

struct ReplayResult {
  sim::World world;
  std::vector<SessionResult> sessions;  // in close order
  std::vector<negotiation::TranscriptEvent> transcript;
  kb::KnowledgeStore store;             // schema plus the session mirror
  std::vector<kb::Violation> violations;  // store validation after the run
};

// Runs until every vehicle has arrived and every session has closed.
ReplayResult run(const Scenario& scenario);

}  // namespace ontoneg::replay
