#include "ontoneg/scenario.hpp"

#include <algorithm>
#include <charconv>

#include "ontoneg/harness.hpp"
#include "ontoneg/kb_format.hpp"
#include "ontoneg/world_io.hpp"

namespace ontoneg::replay {

namespace neg = ontoneg::negotiation;
using nlohmann::json;
using nlohmann::ordered_json;

namespace {

constexpr sim::Tick kHold = 1'000'000;  // keeps the initial phase until a session applies
constexpr double kDuration = 60.0;

// Approach directions in junction order: west, north, east, south.
constexpr double kDx[4] = {-1, 0, 1, 0};
constexpr double kDy[4] = {0, 1, 0, -1};
constexpr const char* kDir[4] = {"W", "N", "E", "S"};

}  // namespace

Scenario golden_corridor() {
  Scenario s;
  s.description =
      "car1 enters Int1 from the west, turns right and drives south through "
      "Int2, Int3 and Int4; the winning configurations leave it a red light "
      "only at Int3";
  sim::World& w = s.world;
  const double link = 400.0;
  const double stub = 200.0;

  for (int k = 0; k < 4; ++k) {
    w.nodes.push_back(sim::Node{"Int" + std::to_string(k + 1), 0.0, -link * k});
  }
  w.nodes.push_back(sim::Node{"A", -300.0, 0.0});
  w.nodes.push_back(sim::Node{"B", 0.0, -link * 4});
  const std::size_t a_node = 4, b_node = 5;

  auto add_segment = [&](const std::string& name, double length, std::size_t from,
                         std::size_t to) {
    w.segments.push_back(sim::RoadSegment{name, length, 2, sim::Direction::TwoWay, from, to});
    return w.segments.size() - 1;
  };
  const std::size_t entry = add_segment("A-Int1", 300.0, a_node, 0);
  std::size_t links[3];
  for (int k = 0; k < 3; ++k) {
    links[k] = add_segment("Int" + std::to_string(k + 1) + "-Int" + std::to_string(k + 2),
                           link, static_cast<std::size_t>(k), static_cast<std::size_t>(k + 1));
  }
  const std::size_t exit = add_segment("Int4-B", link, 3, b_node);

  for (std::size_t k = 0; k < 4; ++k) {
    const std::string name = "Int" + std::to_string(k + 1);
    std::size_t arm[4];
    for (int d = 0; d < 4; ++d) {
      if (d == 0 && k == 0) {
        arm[d] = entry;
      } else if (d == 1 && k > 0) {
        arm[d] = links[k - 1];
      } else if (d == 3 && k < 3) {
        arm[d] = links[k];
      } else if (d == 3) {
        arm[d] = exit;
      } else {
        const auto& c = w.nodes[k];
        w.nodes.push_back(sim::Node{name + "_" + kDir[d], c.x + kDx[d] * stub,
                                    c.y + kDy[d] * stub});
        arm[d] = add_segment(name + "_" + kDir[d], stub, w.nodes.size() - 1, k);
      }
    }
    sim::Intersection x;
    x.name = name;
    x.node = k;
    for (int d = 0; d < 4; ++d) {
      x.approaches.push_back(
          sim::Approach{arm[d], LightId{name + "_TL" + std::to_string(d + 1)}, LightState::Red});
    }
    x.conflicts = ConflictMatrix::four_way();
    x.phases = maximal_phases(x.conflicts);
    x.current_phase = 0;
    for (std::size_t a = 0; a < 4; ++a) x.approaches[a].state = x.phases[0][a];
    x.phase_ends_at = kHold;
    x.phase_duration_s = kDuration;
    x.base_duration_s = kDuration;
    x.congestion_gain = 0.0;
    w.intersections.push_back(std::move(x));
  }

  sim::Vehicle car;
  car.name = "car1";
  car.origin = a_node;
  car.route = {entry, links[0], links[1], links[2], exit};
  car.speed_mps = 10.0;
  car.departure = 0;
  w.vehicles.push_back(std::move(car));
  sim::prepare(w);

  // Background votes per intersection: (bid1, bid2).
  const int background[4][2] = {{2, 2}, {2, 3}, {4, 2}, {0, 2}};
  const sim::Tick apply[4] = {20, 60, 100, 190};
  for (int k = 0; k < 4; ++k) {
    ScriptedSession session;
    session.intersection = "Int" + std::to_string(k + 1);
    session.apply_tick = apply[k];
    session.open_tick = std::max<sim::Tick>(0, apply[k] - static_cast<sim::Tick>(kDuration));
    session.duration_s = kDuration;
    int voter = 0;
    for (std::uint32_t bid = 1; bid <= 2; ++bid) {
      for (int n = 0; n < background[k][bid - 1]; ++n) {
        session.votes.push_back(ScriptedVote{
            apply[k] - 10, session.intersection + "_voter" + std::to_string(++voter),
            neg::BidId{bid}});
      }
    }
    session.votes.push_back(ScriptedVote{apply[k] - 5, "car1", std::nullopt});
    s.sessions.push_back(std::move(session));
  }
  return s;
}

namespace {

neg::BidId parse_bid(const std::string& text) {
  std::uint32_t k = 0;
  const char* first = text.data() + 3;
  const char* last = text.data() + text.size();
  if (text.rfind("bid", 0) != 0 || text.size() == 3 ||
      std::from_chars(first, last, k).ptr != last || k == 0) {
    throw ScenarioError("bad bid reference '" + text + "'");
  }
  return neg::BidId{k};
}

}  // namespace

ordered_json scenario_to_json(const Scenario& s) {
  ordered_json j;
  j["description"] = s.description;
  j["phase_count"] = s.phase_count;
  j["world"] = sim::world_to_json(s.world);
  auto& sessions = j["sessions"] = ordered_json::array();
  for (const auto& ss : s.sessions) {
    ordered_json js;
    js["intersection"] = ss.intersection;
    js["open_tick"] = ss.open_tick;
    js["apply_tick"] = ss.apply_tick;
    js["duration_s"] = ss.duration_s;
    auto& votes = js["votes"] = ordered_json::array();
    for (const auto& v : ss.votes) {
      votes.push_back({{"tick", v.tick},
                       {"vehicle", v.vehicle},
                       {"bid", v.bid ? neg::to_string(*v.bid) : std::string("auto")}});
    }
    sessions.push_back(std::move(js));
  }
  return j;
}

Scenario scenario_from_json(const json& j) {
  Scenario s;
  try {
    s.description = j.value("description", std::string());
    s.phase_count = j.value("phase_count", 2u);
    s.world = sim::world_from_json(j.at("world"));
    for (const auto& js : j.at("sessions")) {
      ScriptedSession ss;
      ss.intersection = js.at("intersection").get<std::string>();
      ss.open_tick = js.at("open_tick").get<sim::Tick>();
      ss.apply_tick = js.at("apply_tick").get<sim::Tick>();
      ss.duration_s = js.at("duration_s").get<double>();
      for (const auto& v : js.at("votes")) {
        ScriptedVote vote;
        vote.tick = v.at("tick").get<sim::Tick>();
        vote.vehicle = v.at("vehicle").get<std::string>();
        auto bid = v.at("bid").get<std::string>();
        if (bid != "auto") vote.bid = parse_bid(bid);
        ss.votes.push_back(std::move(vote));
      }
      s.sessions.push_back(std::move(ss));
    }
  } catch (const json::exception& e) {
    throw ScenarioError(std::string("malformed scenario: ") + e.what());
  }
  return s;
}

ReplayResult run(const Scenario& s) {
  ReplayResult r{s.world, {}, {}, kb::make_negotiation_store(), {}};
  sim::World& w = r.world;
  w.log_events = true;
  neg::NegotiationEngine engine(&r.store);

  struct Plan {
    std::size_t intersection;
    neg::IntersectionLayout layout;
    neg::Party mediator;
    std::vector<neg::Bid> bids;
    std::optional<neg::SessionHandle> handle;
    bool closed = false;
  };
  std::vector<Plan> plans;
  sim::Tick last = 0;
  for (const auto& ss : s.sessions) {
    auto xi = w.find_intersection(ss.intersection);
    if (!xi) throw ScenarioError("session at unknown intersection " + ss.intersection);
    if (ss.open_tick < 0 || ss.open_tick >= ss.apply_tick) {
      throw ScenarioError("session at " + ss.intersection + " must open before it applies");
    }
    for (const auto& v : ss.votes) {
      if (v.tick < ss.open_tick || v.tick >= ss.apply_tick) {
        throw ScenarioError("vote by " + v.vehicle + " outside the session window");
      }
    }
    const auto& x = w.intersections[*xi];
    neg::IntersectionLayout layout{x.name, x.lights(), x.conflicts};
    neg::Party mediator{x.name + "_mediator", neg::Role::Mediator};
    auto bids = neg::generate_bids(layout, s.phase_count, mediator.id);
    plans.push_back(Plan{*xi, std::move(layout), std::move(mediator), std::move(bids), {}, false});
    last = std::max(last, ss.apply_tick);
  }

  const sim::Tick cap = last + harness::tick_cap(w);
  auto finished = [&] {
    return w.all_arrived() &&
           std::all_of(plans.begin(), plans.end(), [](const Plan& p) { return p.closed; });
  };
  while (!finished() && w.clock < cap) {
    const sim::Tick t = w.clock;
    for (std::size_t i = 0; i < plans.size(); ++i) {
      auto& p = plans[i];
      if (!p.handle || p.closed || s.sessions[i].apply_tick != t) continue;
      auto outcome = engine.close_session(*p.handle, t);
      p.closed = true;
      const auto& session = engine.session(*p.handle);
      if (outcome.contested) {
        sim::apply_configuration(w, p.intersection,
                                 session.find_bid(outcome.winner)->configuration,
                                 s.sessions[i].duration_s);
      }
      r.sessions.push_back(SessionResult{session.intersection(), session.name(), t,
                                         outcome.winner, outcome.tally, outcome.contested});
    }
    for (std::size_t i = 0; i < plans.size(); ++i) {
      auto& p = plans[i];
      if (s.sessions[i].open_tick != t) continue;
      p.handle = engine.open_session(p.mediator, p.layout, p.bids, s.sessions[i].apply_tick, t);
    }
    for (std::size_t i = 0; i < plans.size(); ++i) {
      auto& p = plans[i];
      if (!p.handle || p.closed) continue;
      for (const auto& vote : s.sessions[i].votes) {
        if (vote.tick != t) continue;
        neg::BidId bid;
        if (vote.bid) {
          bid = *vote.bid;
        } else {
          auto vi = w.find_vehicle(vote.vehicle);
          if (!vi) throw ScenarioError("auto vote by unknown vehicle " + vote.vehicle);
          const auto& v = w.vehicles[*vi];
          auto stop = sim::next_stop(w, v);
          if (!stop || stop->intersection != p.intersection) {
            throw ScenarioError(vote.vehicle + " is not approaching " +
                                s.sessions[i].intersection + " at tick " +
                                std::to_string(t));
          }
          const auto& x = w.intersections[p.intersection];
          neg::ApproachContext ctx{v.name,
                                   x.name,
                                   x.approaches[stop->approach].light,
                                   stop->turn,
                                   static_cast<double>(stop->turns_remaining),
                                   stop->distance_remaining_m,
                                   x.base_duration_s};
          bid = neg::choose_bid(ctx, engine.session(*p.handle), neg::Preference{});
        }
        engine.cast_vote(*p.handle, vote.vehicle, bid, t);
      }
    }
    sim::step(w);
  }
  if (!finished()) {
    throw ScenarioError("scenario did not finish within " + std::to_string(cap) + " ticks");
  }
  r.transcript = engine.transcript();
  r.violations = r.store.validate_all();
  return r;
}

}  // namespace ontoneg::replay
