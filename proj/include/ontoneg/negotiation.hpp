#pragma once

// Mediated voting protocol. A mediator per intersection publishes
// configuration bids; approaching vehicles cast one public, revisable vote
// per session; at the application tick the most voted bid wins (smallest bid
// id on ties). Sessions can be mirrored into a KnowledgeStore loaded with the
// negotiation schema, so agents and tools can query and validate them.

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "ontoneg/knowledge_store.hpp"
#include "ontoneg/signal.hpp"

namespace ontoneg::negotiation {

using Tick = std::int64_t;

enum class Role { Mediator, Negotiator };

struct Party {
  std::string id;
  Role role = Role::Negotiator;
};

struct BidId {
  std::uint32_t value = 0;
  auto operator<=>(const BidId&) const = default;
};

std::string to_string(BidId id);  // "bid<k>"

struct Bid {
  BidId id;
  std::string party;  // mediator id
  Configuration configuration;
  std::uint32_t utility = 0;  // live vote count
};

struct IntersectionLayout {
  std::string id;
  std::vector<LightId> lights;  // approach order
  ConflictMatrix conflicts;
};

struct Preference {
  double weight_wait = 1.0;
  double weight_turns = 0.0;
  double weight_distance = 0.0;
};

// What a vehicle knows about its approach to the next intersection.
struct ApproachContext {
  std::string vehicle;
  std::string intersection;
  LightId approach_light;
  Turn turn = Turn::Straight;
  double turns_remaining = 0.0;
  double distance_remaining_m = 0.0;
  double phase_duration_s = 0.0;  // red-light penalty
};

using Tally = std::map<BidId, std::uint32_t>;

struct Outcome {
  BidId winner;
  Tally tally;
  bool contested = false;  // at least one vote was cast
  Tick closed_at = 0;
};

// Declarative record of the agreement rule applied at close: the parties
// and bids it took as input and the bid it produced.
struct AgreementRule {
  std::vector<std::string> role_inputs;
  std::vector<BidId> attribute_inputs;
  BidId attribute_output;
};

enum class SessionState { Open, Closed };

enum class NegotiationErrc {
  NotMediator,
  DuplicateSession,
  TooFewBids,
  InvalidConfiguration,
  InvalidTick,
  UnknownSession,
  UnknownBid,
  SessionClosed,
  VoteAfterApply,
  CloseBeforeApply,
  NotApproaching,
  InvalidPreference,
  NoConflictFreeConfiguration,
  InvalidPhaseCount,
};

class NegotiationError : public std::runtime_error {
 public:
  NegotiationError(NegotiationErrc code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  NegotiationErrc code() const noexcept { return code_; }

 private:
  NegotiationErrc code_;
};

class Session {
 public:
  const std::string& name() const { return name_; }
  const IntersectionLayout& layout() const { return layout_; }
  const std::string& intersection() const { return layout_.id; }
  const Party& mediator() const { return mediator_; }
  const std::vector<Bid>& bids() const { return bids_; }
  const Bid* find_bid(BidId id) const;
  // Public tally; every party may read it.
  const Tally& tally() const { return tally_; }
  const std::map<std::string, BidId>& votes() const { return votes_; }
  std::optional<BidId> vote_of(const std::string& vehicle) const;
  // Number of times a vehicle changed its vote in this session.
  std::uint32_t revisions(const std::string& vehicle) const;
  Tick apply_tick() const { return apply_tick_; }
  SessionState state() const { return state_; }
  const std::optional<Outcome>& outcome() const { return outcome_; }
  const std::optional<AgreementRule>& agreement() const { return agreement_; }

 private:
  friend class NegotiationEngine;

  std::string name_;
  IntersectionLayout layout_;
  Party mediator_;
  std::vector<Bid> bids_;
  Tally tally_;
  std::map<std::string, BidId> votes_;
  std::map<std::string, std::uint32_t> revisions_;
  Tick apply_tick_ = 0;
  SessionState state_ = SessionState::Open;
  std::optional<Outcome> outcome_;
  std::optional<AgreementRule> agreement_;
};

struct SessionHandle {
  std::uint32_t index;
  auto operator<=>(const SessionHandle&) const = default;
};

struct TranscriptEvent {
  enum class Kind { Open, Vote, Close } kind;
  Tick tick = 0;
  std::string session;
  std::string intersection;
  std::string vehicle;        // Vote only
  std::optional<BidId> bid;   // Vote: chosen bid; Close: winner
  Tally tally;
};

// Conflict-free configurations for an intersection, one bid per maximal
// green set, ids bid1..bidN in phase order. A four-way crossing with
// phase_count 2 yields the two complementary phases.
std::vector<Bid> generate_bids(const IntersectionLayout& layout,
                               std::uint32_t phase_count,
                               const std::string& mediator_id);

// Cost of a bid for the vehicle described by ctx.
double bid_cost(const ApproachContext& ctx, const Bid& bid,
                const Preference& preference);

// Sincere vote: the cheapest bid for the vehicle, smallest id on ties.
BidId choose_bid(const ApproachContext& ctx, const Session& session,
                 const Preference& preference);

// Tally-aware revision. Among the bids of minimal cost for the vehicle,
// returns the one with the strictly highest public tally if that is not the
// vehicle's current vote; otherwise nullopt.
std::optional<BidId> reconsider_vote(const ApproachContext& ctx,
                                     const Session& session,
                                     const Preference& preference);

// Argmax of the tally, smallest id on ties.
BidId winning_bid(const Tally& tally);

class NegotiationEngine {
 public:
  // With a store, sessions, bids, votes and outcomes are mirrored into it.
  // The store must already hold the negotiation schema.
  explicit NegotiationEngine(kb::KnowledgeStore* mirror = nullptr)
      : mirror_(mirror) {}

  SessionHandle open_session(const Party& mediator,
                             const IntersectionLayout& layout,
                             std::vector<Bid> bids, Tick apply_tick, Tick now);
  const Tally& cast_vote(SessionHandle session, const std::string& vehicle,
                         BidId bid, Tick now);
  Outcome close_session(SessionHandle session, Tick now);

  const Session& session(SessionHandle handle) const;
  std::optional<SessionHandle> open_session_at(const std::string& intersection) const;
  std::size_t session_count() const { return sessions_.size(); }
  // Entity naming the session in the mirror store.
  kb::EntityId session_entity(SessionHandle handle) const;
  kb::EntityId bid_entity(SessionHandle handle, BidId bid) const;

  const std::vector<TranscriptEvent>& transcript() const { return transcript_; }
  void set_transcript_enabled(bool on) { record_ = on; }

 private:
  Session& mutable_session(SessionHandle handle);
  void record(TranscriptEvent::Kind kind, Tick tick, const Session& s,
              std::string vehicle, std::optional<BidId> bid);
  void mirror_open(SessionHandle handle);
  void mirror_vote(SessionHandle handle, const std::string& vehicle,
                   std::optional<BidId> old_bid, BidId new_bid);
  void mirror_close(SessionHandle handle);

  kb::KnowledgeStore* mirror_;
  std::vector<Session> sessions_;
  std::map<std::string, SessionHandle> open_by_intersection_;
  std::vector<TranscriptEvent> transcript_;
  bool record_ = true;
};

// One JSON object per line: event, tick, session, intersection, vehicle,
// bid/winner, tally snapshot.
void write_transcript(std::ostream& out, const std::vector<TranscriptEvent>& events);

}  // namespace ontoneg::negotiation
