#include "ontoneg/negotiation.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <set>

#include <json.hpp>

namespace ontoneg::negotiation {

namespace {

[[noreturn]] void fail(NegotiationErrc code, const std::string& msg) {
  throw NegotiationError(code, msg);
}

void check_preference(const Preference& p) {
  bool finite = std::isfinite(p.weight_wait) && std::isfinite(p.weight_turns) &&
                std::isfinite(p.weight_distance);
  bool nonneg = p.weight_wait >= 0 && p.weight_turns >= 0 && p.weight_distance >= 0;
  bool any = p.weight_wait > 0 || p.weight_turns > 0 || p.weight_distance > 0;
  if (!finite || !nonneg || !any) {
    fail(NegotiationErrc::InvalidPreference,
         "preference weights must be non-negative with at least one positive");
  }
}

void check_configuration(const IntersectionLayout& layout, const Bid& bid) {
  const auto& a = bid.configuration.assignments;
  if (a.size() != layout.lights.size()) {
    fail(NegotiationErrc::InvalidConfiguration,
         to_string(bid.id) + " does not cover every light of " + layout.id);
  }
  std::vector<LightState> states(layout.lights.size(), LightState::Red);
  std::vector<bool> seen(layout.lights.size(), false);
  for (const auto& [light, state] : a) {
    auto it = std::find(layout.lights.begin(), layout.lights.end(), light);
    if (it == layout.lights.end()) {
      fail(NegotiationErrc::InvalidConfiguration,
           to_string(bid.id) + ": light " + light.value + " is not at " + layout.id);
    }
    auto idx = static_cast<std::size_t>(it - layout.lights.begin());
    if (seen[idx]) {
      fail(NegotiationErrc::InvalidConfiguration,
           to_string(bid.id) + ": light " + light.value + " assigned twice");
    }
    seen[idx] = true;
    states[idx] = state;
  }
  if (!conflict_free(states, layout.conflicts)) {
    fail(NegotiationErrc::InvalidConfiguration,
         to_string(bid.id) + " turns conflicting approaches green");
  }
}

}  // namespace

std::string to_string(BidId id) { return "bid" + std::to_string(id.value); }

// ---------------------------------------------------------------------------
// Session accessors

const Bid* Session::find_bid(BidId id) const {
  for (const auto& b : bids_) {
    if (b.id == id) return &b;
  }
  return nullptr;
}

std::optional<BidId> Session::vote_of(const std::string& vehicle) const {
  auto it = votes_.find(vehicle);
  if (it == votes_.end()) return std::nullopt;
  return it->second;
}

std::uint32_t Session::revisions(const std::string& vehicle) const {
  auto it = revisions_.find(vehicle);
  return it == revisions_.end() ? 0 : it->second;
}

// ---------------------------------------------------------------------------
// Bids and strategy

std::vector<Bid> generate_bids(const IntersectionLayout& layout,
                               std::uint32_t phase_count,
                               const std::string& mediator_id) {
  if (phase_count < 2) {
    fail(NegotiationErrc::InvalidPhaseCount,
         "at least two phases are needed to alternate");
  }
  if (layout.lights.size() < 2 || layout.conflicts.size() != layout.lights.size()) {
    fail(NegotiationErrc::InvalidConfiguration,
         layout.id + " needs at least two lights and a matching conflict matrix");
  }
  auto phases = maximal_phases(layout.conflicts);
  if (phases.size() < phase_count) {
    fail(NegotiationErrc::NoConflictFreeConfiguration,
         layout.id + " admits only " + std::to_string(phases.size()) +
             " distinct conflict-free phases, " + std::to_string(phase_count) +
             " requested");
  }
  std::vector<Bid> bids;
  for (std::uint32_t k = 0; k < phase_count; ++k) {
    Bid bid{BidId{k + 1}, mediator_id, {}, 0};
    for (std::size_t i = 0; i < layout.lights.size(); ++i) {
      bid.configuration.assignments.emplace_back(layout.lights[i], phases[k][i]);
    }
    bids.push_back(std::move(bid));
  }
  return bids;
}

double bid_cost(const ApproachContext& ctx, const Bid& bid,
                const Preference& preference) {
  auto state = bid.configuration.state_of(ctx.approach_light);
  if (!state) {
    fail(NegotiationErrc::NotApproaching,
         ctx.vehicle + ": light " + ctx.approach_light.value + " is not in " +
             to_string(bid.id));
  }
  double wait = permits(*state, ctx.turn) ? 0.0 : ctx.phase_duration_s;
  return preference.weight_wait * wait +
         preference.weight_turns * ctx.turns_remaining +
         preference.weight_distance * ctx.distance_remaining_m;
}

namespace {

std::vector<BidId> cheapest_bids(const ApproachContext& ctx, const Session& session,
                                 const Preference& preference) {
  check_preference(preference);
  if (ctx.intersection != session.intersection()) {
    fail(NegotiationErrc::NotApproaching,
         ctx.vehicle + " is approaching " + ctx.intersection + ", not " +
             session.intersection());
  }
  std::vector<std::pair<double, BidId>> costs;
  for (const auto& bid : session.bids()) {
    costs.emplace_back(bid_cost(ctx, bid, preference), bid.id);
  }
  std::sort(costs.begin(), costs.end());
  std::vector<BidId> out;
  for (const auto& [cost, id] : costs) {
    if (cost == costs.front().first) out.push_back(id);
  }
  return out;  // ascending ids
}

}  // namespace

BidId choose_bid(const ApproachContext& ctx, const Session& session,
                 const Preference& preference) {
  return cheapest_bids(ctx, session, preference).front();
}

std::optional<BidId> reconsider_vote(const ApproachContext& ctx,
                                     const Session& session,
                                     const Preference& preference) {
  auto candidates = cheapest_bids(ctx, session, preference);
  auto current = session.vote_of(ctx.vehicle);
  const auto& tally = session.tally();
  BidId best = candidates.front();
  for (BidId id : candidates) {
    if (tally.at(id) > tally.at(best)) best = id;
  }
  if (!current) return best;
  bool current_cheapest =
      std::find(candidates.begin(), candidates.end(), *current) != candidates.end();
  if (!current_cheapest) return best;
  if (tally.at(best) > tally.at(*current)) return best;
  return std::nullopt;
}

BidId winning_bid(const Tally& tally) {
  if (tally.empty()) throw std::invalid_argument("empty tally");
  auto best = tally.begin();
  for (auto it = tally.begin(); it != tally.end(); ++it) {
    if (it->second > best->second) best = it;
  }
  return best->first;
}

// ---------------------------------------------------------------------------
// Engine

Session& NegotiationEngine::mutable_session(SessionHandle handle) {
  if (handle.index >= sessions_.size()) {
    fail(NegotiationErrc::UnknownSession, "unknown session");
  }
  return sessions_[handle.index];
}

const Session& NegotiationEngine::session(SessionHandle handle) const {
  if (handle.index >= sessions_.size()) {
    fail(NegotiationErrc::UnknownSession, "unknown session");
  }
  return sessions_[handle.index];
}

std::optional<SessionHandle> NegotiationEngine::open_session_at(
    const std::string& intersection) const {
  auto it = open_by_intersection_.find(intersection);
  if (it == open_by_intersection_.end()) return std::nullopt;
  return it->second;
}

kb::EntityId NegotiationEngine::session_entity(SessionHandle handle) const {
  return kb::EntityId{session(handle).name()};
}

kb::EntityId NegotiationEngine::bid_entity(SessionHandle handle, BidId bid) const {
  return kb::EntityId{session(handle).name() + "_" + to_string(bid)};
}

SessionHandle NegotiationEngine::open_session(const Party& mediator,
                                              const IntersectionLayout& layout,
                                              std::vector<Bid> bids,
                                              Tick apply_tick, Tick now) {
  if (mediator.role != Role::Mediator) {
    fail(NegotiationErrc::NotMediator, mediator.id + " is not a mediator");
  }
  if (open_by_intersection_.contains(layout.id)) {
    fail(NegotiationErrc::DuplicateSession,
         "a session is already open at " + layout.id);
  }
  if (bids.size() < 2) {
    fail(NegotiationErrc::TooFewBids, "a session needs at least two bids");
  }
  if (apply_tick <= now) {
    fail(NegotiationErrc::InvalidTick, "apply tick must be in the future");
  }
  std::set<BidId> ids;
  for (auto& bid : bids) {
    if (!ids.insert(bid.id).second) {
      fail(NegotiationErrc::InvalidConfiguration, "duplicate " + to_string(bid.id));
    }
    check_configuration(layout, bid);
    bid.party = mediator.id;
    bid.utility = 0;
  }
  std::sort(bids.begin(), bids.end(),
            [](const Bid& a, const Bid& b) { return a.id < b.id; });

  SessionHandle handle{static_cast<std::uint32_t>(sessions_.size())};
  Session s;
  s.name_ = layout.id + "_session" + std::to_string(handle.index);
  s.layout_ = layout;
  s.mediator_ = mediator;
  s.bids_ = std::move(bids);
  for (const auto& b : s.bids_) s.tally_[b.id] = 0;
  s.apply_tick_ = apply_tick;
  sessions_.push_back(std::move(s));
  open_by_intersection_.emplace(layout.id, handle);

  if (mirror_) mirror_open(handle);
  record(TranscriptEvent::Kind::Open, now, sessions_[handle.index], {}, std::nullopt);
  return handle;
}

const Tally& NegotiationEngine::cast_vote(SessionHandle handle,
                                          const std::string& vehicle, BidId bid,
                                          Tick now) {
  Session& s = mutable_session(handle);
  if (s.state_ == SessionState::Closed) {
    fail(NegotiationErrc::SessionClosed, s.name_ + " is closed");
  }
  if (!s.tally_.contains(bid)) {
    fail(NegotiationErrc::UnknownBid, to_string(bid) + " is not offered in " + s.name_);
  }
  if (now >= s.apply_tick_) {
    fail(NegotiationErrc::VoteAfterApply,
         "votes for " + s.name_ + " close at tick " + std::to_string(s.apply_tick_));
  }
  std::optional<BidId> old;
  auto it = s.votes_.find(vehicle);
  if (it != s.votes_.end()) {
    old = it->second;
    if (*old != bid) {
      --s.tally_[*old];
      ++s.revisions_[vehicle];
    }
    it->second = bid;
  } else {
    s.votes_.emplace(vehicle, bid);
  }
  if (old != bid) ++s.tally_[bid];
  for (auto& b : s.bids_) b.utility = s.tally_[b.id];

  if (mirror_ && old != bid) mirror_vote(handle, vehicle, old, bid);
  record(TranscriptEvent::Kind::Vote, now, s, vehicle, bid);
  return s.tally_;
}

Outcome NegotiationEngine::close_session(SessionHandle handle, Tick now) {
  Session& s = mutable_session(handle);
  if (s.state_ == SessionState::Closed) {
    fail(NegotiationErrc::SessionClosed, s.name_ + " is already closed");
  }
  if (now < s.apply_tick_) {
    fail(NegotiationErrc::CloseBeforeApply,
         s.name_ + " cannot close before tick " + std::to_string(s.apply_tick_));
  }
  Outcome outcome;
  outcome.tally = s.tally_;
  outcome.winner = winning_bid(s.tally_);
  outcome.contested = !s.votes_.empty();
  outcome.closed_at = now;

  AgreementRule rule;
  rule.role_inputs.push_back(s.mediator_.id);
  for (const auto& [vehicle, _] : s.votes_) rule.role_inputs.push_back(vehicle);
  for (const auto& b : s.bids_) rule.attribute_inputs.push_back(b.id);
  rule.attribute_output = outcome.winner;

  s.state_ = SessionState::Closed;
  s.outcome_ = outcome;
  s.agreement_ = std::move(rule);
  open_by_intersection_.erase(s.layout_.id);

  if (mirror_) mirror_close(handle);
  record(TranscriptEvent::Kind::Close, now, s, {}, outcome.winner);
  return outcome;
}

void NegotiationEngine::record(TranscriptEvent::Kind kind, Tick tick,
                               const Session& s, std::string vehicle,
                               std::optional<BidId> bid) {
  if (!record_) return;
  transcript_.push_back(
      TranscriptEvent{kind, tick, s.name_, s.layout_.id, std::move(vehicle), bid, s.tally_});
}

// ---------------------------------------------------------------------------
// Knowledge-store mirror

void NegotiationEngine::mirror_open(SessionHandle handle) {
  kb::KnowledgeStore& kb = *mirror_;
  const Session& s = sessions_[handle.index];
  const kb::EntityId intersection{s.layout_.id};
  const kb::EntityId mediator{s.mediator_.id};
  const kb::EntityId session = session_entity(handle);

  kb.assert_isa(intersection, "Intersection");
  kb.assert_isa(mediator, "Mediator");
  kb.assert_triple(mediator, "hasRole", kb::entity("mediator"));
  for (const auto& light : s.layout_.lights) {
    const kb::EntityId l{light.value};
    kb.assert_isa(l, "TrafficLight");
    kb.assert_triple(l, "NumberOfItems", std::string("Multiple"));
    kb.assert_triple(l, "NumberOfAttributes", std::int64_t{4});
    for (const char* st : {"red", "green", "right_green", "amber"}) {
      kb.assert_triple(l, "has_Part", kb::entity(st));
    }
    kb.assert_triple(l, "atIntersection", intersection);
  }

  kb.assert_isa(session, "TrafficLightSign");
  kb.assert_triple(session, "hasActor", mediator);
  for (const auto& light : s.layout_.lights) {
    kb.assert_triple(session, "hasObject", kb::entity(light.value));
  }
  for (const auto& bid : s.bids_) {
    auto b = bid_entity(handle, bid.id);
    kb.assert_isa(b, "Bid");
    kb.assert_triple(b, "hasParty", mediator);
    kb.assert_triple(b, "hasUtility", std::int64_t{0});
    kb.assert_triple(b, "hasConfiguration", to_string(bid.configuration));
    for (const auto& [light, _] : bid.configuration.assignments) {
      kb.assert_triple(b, "hasObject", kb::entity(light.value));
    }
    kb.assert_triple(session, "hasBid", b);
  }
}

void NegotiationEngine::mirror_vote(SessionHandle handle, const std::string& vehicle,
                                    std::optional<BidId> old_bid, BidId new_bid) {
  kb::KnowledgeStore& kb = *mirror_;
  const Session& s = sessions_[handle.index];
  const kb::EntityId v{vehicle};
  kb.assert_isa(v, "Negotiator");
  kb.assert_triple(v, "hasRole", kb::entity("negotiator"));
  kb.assert_triple(session_entity(handle), "hasActor", v);
  if (old_bid) {
    auto old = bid_entity(handle, *old_bid);
    kb.retract(kb::Fact{"votesFor", {v, old}});
    kb.set_value(old, "hasUtility", std::int64_t{s.tally_.at(*old_bid)});
  }
  auto now = bid_entity(handle, new_bid);
  kb.assert_triple(v, "votesFor", now);
  kb.set_value(now, "hasUtility", std::int64_t{s.tally_.at(new_bid)});
}

void NegotiationEngine::mirror_close(SessionHandle handle) {
  kb::KnowledgeStore& kb = *mirror_;
  const Session& s = sessions_[handle.index];
  const auto session = session_entity(handle);
  const kb::EntityId rule{s.name_ + "_rule"};
  const kb::EntityId outcome{s.name_ + "_outcome"};

  kb.assert_isa(rule, "TrafficLightSignAgreementRule");
  kb.assert_triple(rule, "appliesTo", session);
  for (const auto& party : s.agreement_->role_inputs) {
    kb.assert_triple(rule, "hasRoleInput", kb::entity(party));
  }
  for (BidId id : s.agreement_->attribute_inputs) {
    kb.assert_triple(rule, "hasAttributeInput", bid_entity(handle, id));
  }
  kb.assert_triple(rule, "hasAttributeOutput",
                   bid_entity(handle, s.agreement_->attribute_output));
  kb.assert_isa(outcome, "Outcome");
  kb.assert_triple(session, "hasOutcome", outcome);
}

// ---------------------------------------------------------------------------
// Transcript

void write_transcript(std::ostream& out, const std::vector<TranscriptEvent>& events) {
  for (const auto& e : events) {
    nlohmann::json j;
    switch (e.kind) {
      case TranscriptEvent::Kind::Open: j["event"] = "open"; break;
      case TranscriptEvent::Kind::Vote: j["event"] = "vote"; break;
      case TranscriptEvent::Kind::Close: j["event"] = "close"; break;
    }
    j["tick"] = e.tick;
    j["session"] = e.session;
    j["intersection"] = e.intersection;
    if (e.kind == TranscriptEvent::Kind::Vote) {
      j["vehicle"] = e.vehicle;
      j["bid"] = to_string(*e.bid);
    }
    if (e.kind == TranscriptEvent::Kind::Close) j["winner"] = to_string(*e.bid);
    nlohmann::json tally = nlohmann::json::object();
    for (const auto& [id, n] : e.tally) tally[to_string(id)] = n;
    j["tally"] = std::move(tally);
    out << j.dump() << '\n';
  }
}

}  // namespace ontoneg::negotiation
