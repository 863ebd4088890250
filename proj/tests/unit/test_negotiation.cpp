#include <algorithm>
#include <random>
#include <sstream>

#include <gtest/gtest.h>
#include <json.hpp>

#include "ontoneg/kb_format.hpp"
#include "ontoneg/negotiation.hpp"
#include "support/vote_sequences.hpp"

namespace neg = ontoneg::negotiation;
namespace kb = ontoneg::kb;
using ontoneg::ConflictMatrix;
using ontoneg::LightId;
using ontoneg::LightState;
using ontoneg::Turn;

namespace {

constexpr LightState G = LightState::Green;
constexpr LightState R = LightState::Red;

// Intersection k of the four-junction example: lights TL(4k-3)..TL(4k).
neg::IntersectionLayout crossing(int k) {
  neg::IntersectionLayout layout{"Int" + std::to_string(k), {}, ConflictMatrix::four_way()};
  for (int i = 1; i <= 4; ++i) layout.lights.push_back(LightId{"TL" + std::to_string(4 * (k - 1) + i)});
  return layout;
}

neg::Party mediator(const std::string& id = "m1") { return {id, neg::Role::Mediator}; }

ontoneg::Configuration config(const neg::IntersectionLayout& layout, std::vector<LightState> s) {
  ontoneg::Configuration c;
  for (std::size_t i = 0; i < s.size(); ++i) c.assignments.emplace_back(layout.lights[i], s[i]);
  return c;
}

neg::NegotiationErrc error_of(auto&& fn) {
  try {
    fn();
  } catch (const neg::NegotiationError& e) {
    return e.code();
  }
  ADD_FAILURE() << "no NegotiationError";
  return neg::NegotiationErrc::UnknownSession;
}

neg::ApproachContext approaching(const std::string& light, Turn turn = Turn::Straight) {
  neg::ApproachContext ctx;
  ctx.vehicle = "car1";
  ctx.intersection = "Int1";
  ctx.approach_light = LightId{light};
  ctx.turn = turn;
  ctx.phase_duration_s = 30.0;
  return ctx;
}

neg::Tally tally(std::initializer_list<std::pair<std::uint32_t, std::uint32_t>> xs) {
  neg::Tally t;
  for (auto [id, n] : xs) t[neg::BidId{id}] = n;
  return t;
}

}  // namespace

// --- generate_bids ---------------------------------------------------------

TEST(GenerateBids, FourWayCrossingGivesTheTwoComplementaryPhases) {
  for (int k = 1; k <= 4; ++k) {
    auto layout = crossing(k);
    auto bids = neg::generate_bids(layout, 2, "m");
    ASSERT_EQ(bids.size(), 2u);
    EXPECT_EQ(bids[0].id, neg::BidId{1});
    EXPECT_EQ(bids[0].configuration, config(layout, {G, R, G, R}));
    EXPECT_EQ(bids[1].configuration, config(layout, {R, G, R, G}));
  }
  EXPECT_EQ(ontoneg::to_string(neg::generate_bids(crossing(1), 2, "m")[0].configuration),
            "(TL1.green, TL2.red, TL3.green, TL4.red)");
}

TEST(GenerateBids, OneWayCrossingMatchesEnumeration) {
  neg::IntersectionLayout layout{"X", {LightId{"a"}, LightId{"b"}},
                                 ConflictMatrix::from_rows({{false, true}, {true, false}})};
  // All four Green/Red assignments, keeping the conflict-free maximal ones.
  std::vector<std::vector<LightState>> expected;
  for (int mask = 0; mask < 4; ++mask) {
    std::vector<LightState> s{mask & 1 ? G : R, mask & 2 ? G : R};
    if (mask == 3) continue;  // both green conflict
    if (std::count(s.begin(), s.end(), G) == 1) expected.push_back(s);
  }
  auto bids = neg::generate_bids(layout, 2, "m");
  ASSERT_EQ(bids.size(), 2u);
  for (const auto& b : bids) {
    std::vector<LightState> s;
    for (const auto& [_, st] : b.configuration.assignments) s.push_back(st);
    EXPECT_EQ(std::count(s.begin(), s.end(), G), 1);
    EXPECT_NE(std::find(expected.begin(), expected.end(), s), expected.end());
  }
  EXPECT_NE(bids[0].configuration, bids[1].configuration);
}

TEST(GenerateBids, Errors) {
  EXPECT_EQ(error_of([] { neg::generate_bids(crossing(1), 1, "m"); }),
            neg::NegotiationErrc::InvalidPhaseCount);
  EXPECT_EQ(error_of([] { neg::generate_bids(crossing(1), 3, "m"); }),
            neg::NegotiationErrc::NoConflictFreeConfiguration);
  neg::IntersectionLayout single{"S", {LightId{"a"}}, ConflictMatrix(1)};
  EXPECT_EQ(error_of([&] { neg::generate_bids(single, 2, "m"); }),
            neg::NegotiationErrc::InvalidConfiguration);
}

TEST(MaximalPhases, MatchesBruteForce) {
  std::mt19937 rng(99);
  for (int iter = 0; iter < 300; ++iter) {
    std::size_t n = 1 + rng() % 6;
    ConflictMatrix m(n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j)
        if (rng() % 2) m.set_conflict(i, j);

    std::vector<unsigned> free_sets;
    for (unsigned mask = 0; mask < (1u << n); ++mask) {
      bool ok = true;
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
          if ((mask >> i & 1) && (mask >> j & 1) && m.conflicts(i, j)) ok = false;
      if (ok) free_sets.push_back(mask);
    }
    std::vector<std::vector<LightState>> expected;
    for (unsigned a : free_sets) {
      bool maximal = std::none_of(free_sets.begin(), free_sets.end(),
                                  [&](unsigned b) { return b != a && (a & b) == a; });
      if (!maximal) continue;
      std::vector<LightState> s;
      for (std::size_t i = 0; i < n; ++i) s.push_back(a >> i & 1 ? G : R);
      expected.push_back(s);
    }
    std::sort(expected.begin(), expected.end(), [](const auto& x, const auto& y) {
      for (std::size_t i = 0; i < x.size(); ++i) {
        if (x[i] != y[i]) return x[i] == G;
      }
      return false;
    });
    ASSERT_EQ(ontoneg::maximal_phases(m), expected) << "iteration " << iter;
  }
}

// --- sessions and votes ----------------------------------------------------

TEST(Session, OpenStartsWithZeroTally) {
  neg::NegotiationEngine engine;
  auto layout = crossing(1);
  auto h = engine.open_session(mediator(), layout, neg::generate_bids(layout, 2, "m1"), 10, 0);
  EXPECT_EQ(engine.session(h).tally(), tally({{1, 0}, {2, 0}}));
  EXPECT_EQ(engine.session(h).state(), neg::SessionState::Open);
  for (const auto& b : engine.session(h).bids()) EXPECT_EQ(b.utility, 0u);
}

TEST(Session, OpenErrors) {
  neg::NegotiationEngine engine;
  auto layout = crossing(1);
  auto bids = neg::generate_bids(layout, 2, "m1");
  EXPECT_EQ(error_of([&] {
              engine.open_session({"car", neg::Role::Negotiator}, layout, bids, 10, 0);
            }),
            neg::NegotiationErrc::NotMediator);
  EXPECT_EQ(error_of([&] { engine.open_session(mediator(), layout, {bids[0]}, 10, 0); }),
            neg::NegotiationErrc::TooFewBids);
  EXPECT_EQ(error_of([&] { engine.open_session(mediator(), layout, bids, 5, 5); }),
            neg::NegotiationErrc::InvalidTick);
  auto bad = bids;
  bad[0].configuration = config(layout, {G, G, R, R});
  EXPECT_EQ(error_of([&] { engine.open_session(mediator(), layout, bad, 10, 0); }),
            neg::NegotiationErrc::InvalidConfiguration);
  engine.open_session(mediator(), layout, bids, 10, 0);
  EXPECT_EQ(error_of([&] { engine.open_session(mediator(), layout, bids, 20, 0); }),
            neg::NegotiationErrc::DuplicateSession);
}

TEST(Session, VoteAndRevote) {
  neg::NegotiationEngine engine;
  auto layout = crossing(1);
  auto h = engine.open_session(mediator(), layout, neg::generate_bids(layout, 2, "m1"), 10, 0);
  EXPECT_EQ(engine.cast_vote(h, "v1", neg::BidId{1}, 1), tally({{1, 1}, {2, 0}}));
  EXPECT_EQ(engine.cast_vote(h, "v1", neg::BidId{2}, 2), tally({{1, 0}, {2, 1}}));
  EXPECT_EQ(engine.session(h).revisions("v1"), 1u);
  EXPECT_EQ(engine.session(h).bids()[1].utility, 1u);
}

TEST(Session, FiveVehiclesThreeToTwo) {
  neg::NegotiationEngine engine;
  auto layout = crossing(1);
  auto h = engine.open_session(mediator(), layout, neg::generate_bids(layout, 2, "m1"), 10, 0);
  for (int i = 1; i <= 5; ++i) engine.cast_vote(h, "car" + std::to_string(i), neg::BidId{i <= 3 ? 1u : 2u}, 1);
  EXPECT_EQ(engine.session(h).tally(), tally({{1, 3}, {2, 2}}));
  auto out = engine.close_session(h, 10);
  EXPECT_EQ(out.winner, neg::BidId{1});
  EXPECT_TRUE(out.contested);
  EXPECT_EQ(out.tally, tally({{1, 3}, {2, 2}}));
  const auto& rule = *engine.session(h).agreement();
  EXPECT_EQ(rule.role_inputs.size(), 6u);
  EXPECT_EQ(rule.attribute_output, neg::BidId{1});
}

TEST(Session, VoteErrors) {
  neg::NegotiationEngine engine;
  auto layout = crossing(1);
  auto h = engine.open_session(mediator(), layout, neg::generate_bids(layout, 2, "m1"), 10, 0);
  EXPECT_EQ(error_of([&] { engine.cast_vote(h, "v", neg::BidId{3}, 1); }),
            neg::NegotiationErrc::UnknownBid);
  EXPECT_EQ(error_of([&] { engine.cast_vote(h, "v", neg::BidId{1}, 10); }),
            neg::NegotiationErrc::VoteAfterApply);
  EXPECT_EQ(error_of([&] { engine.close_session(h, 9); }), neg::NegotiationErrc::CloseBeforeApply);
  engine.close_session(h, 10);
  EXPECT_EQ(error_of([&] { engine.close_session(h, 11); }), neg::NegotiationErrc::SessionClosed);
  EXPECT_EQ(error_of([&] { engine.cast_vote(h, "v", neg::BidId{1}, 5); }),
            neg::NegotiationErrc::SessionClosed);
  EXPECT_EQ(error_of([&] { engine.session(neg::SessionHandle{7}); }),
            neg::NegotiationErrc::UnknownSession);
  // The intersection is free again once closed.
  EXPECT_NO_THROW(engine.open_session(mediator(), layout, neg::generate_bids(layout, 2, "m1"), 30, 11));
}

TEST(Winner, TieBreakAndExamples) {
  EXPECT_EQ(neg::winning_bid(tally({{1, 3}, {2, 2}})), neg::BidId{1});
  EXPECT_EQ(neg::winning_bid(tally({{1, 2}, {2, 4}})), neg::BidId{2});
  EXPECT_EQ(neg::winning_bid(tally({{1, 0}, {2, 0}})), neg::BidId{1});
  EXPECT_EQ(neg::winning_bid(tally({{1, 1}, {2, 3}, {3, 3}})), neg::BidId{2});
  EXPECT_THROW(neg::winning_bid({}), std::invalid_argument);
}

TEST(Winner, UncontestedSessionStillPicksBidOne) {
  neg::NegotiationEngine engine;
  auto layout = crossing(2);
  auto h = engine.open_session(mediator(), layout, neg::generate_bids(layout, 2, "m"), 3, 0);
  auto out = engine.close_session(h, 3);
  EXPECT_EQ(out.winner, neg::BidId{1});
  EXPECT_FALSE(out.contested);
}

// --- strategy --------------------------------------------------------------

TEST(Strategy, ApproachOnGreenLightWins) {
  neg::NegotiationEngine engine;
  auto layout = crossing(1);
  auto h = engine.open_session(mediator(), layout, neg::generate_bids(layout, 2, "m1"), 10, 0);
  const neg::Preference wait_only{1.0, 0.0, 0.0};
  EXPECT_EQ(neg::choose_bid(approaching("TL1", Turn::Right), engine.session(h), wait_only),
            neg::BidId{1});
  EXPECT_EQ(neg::choose_bid(approaching("TL2"), engine.session(h), wait_only), neg::BidId{2});
}

TEST(Strategy, CostFormulaByHand) {
  auto layout = crossing(1);
  auto bids = neg::generate_bids(layout, 2, "m");
  auto ctx = approaching("TL1");
  ctx.turns_remaining = 2;
  ctx.distance_remaining_m = 100;
  EXPECT_DOUBLE_EQ(neg::bid_cost(ctx, bids[0], {1, 0, 0}), 0.0);
  EXPECT_DOUBLE_EQ(neg::bid_cost(ctx, bids[1], {1, 0, 0}), 30.0);
  EXPECT_DOUBLE_EQ(neg::bid_cost(ctx, bids[1], {2, 3, 0.5}), 60.0 + 6.0 + 50.0);
  // RightGreen only releases right turns.
  auto rg = bids[0];
  rg.configuration = config(layout, {LightState::RightGreen, R, G, R});
  EXPECT_DOUBLE_EQ(neg::bid_cost(ctx, rg, {1, 0, 0}), 30.0);
  ctx.turn = Turn::Right;
  EXPECT_DOUBLE_EQ(neg::bid_cost(ctx, rg, {1, 0, 0}), 0.0);
}

TEST(Strategy, AllRedTiesGoToSmallestId) {
  // Three exclusive phases: the approach on L3 is red in bid1 and bid2.
  auto layout = oracle::exclusive_layout(3, "Int1");
  neg::NegotiationEngine engine;
  auto h = engine.open_session(mediator(), layout, neg::generate_bids(layout, 3, "m"), 10, 0);
  auto ctx = approaching("Int1_L3");
  const auto& s = engine.session(h);
  const auto& green = *s.find_bid(neg::BidId{1});
  EXPECT_EQ(green.configuration.state_of(LightId{"Int1_L1"}), G);
  EXPECT_EQ(neg::choose_bid(ctx, s, {1, 0, 0}), neg::BidId{3});
  ctx.approach_light = LightId{"Int1_L1"};
  EXPECT_EQ(neg::choose_bid(ctx, s, {0, 1, 0}), neg::BidId{1});  // every bid costs the same
}

TEST(Strategy, Errors) {
  neg::NegotiationEngine engine;
  auto layout = crossing(1);
  auto h = engine.open_session(mediator(), layout, neg::generate_bids(layout, 2, "m1"), 10, 0);
  auto ctx = approaching("TL9");
  EXPECT_EQ(error_of([&] { neg::choose_bid(ctx, engine.session(h), {1, 0, 0}); }),
            neg::NegotiationErrc::NotApproaching);
  ctx = approaching("TL1");
  ctx.intersection = "Int2";
  EXPECT_EQ(error_of([&] { neg::choose_bid(ctx, engine.session(h), {1, 0, 0}); }),
            neg::NegotiationErrc::NotApproaching);
  ctx = approaching("TL1");
  EXPECT_EQ(error_of([&] { neg::choose_bid(ctx, engine.session(h), {0, 0, 0}); }),
            neg::NegotiationErrc::InvalidPreference);
  EXPECT_EQ(error_of([&] { neg::choose_bid(ctx, engine.session(h), {-1, 1, 0}); }),
            neg::NegotiationErrc::InvalidPreference);
}

TEST(Strategy, ReconsiderFollowsTallyAmongEqualCostBids) {
  neg::NegotiationEngine engine;
  auto layout = crossing(1);
  auto h = engine.open_session(mediator(), layout, neg::generate_bids(layout, 2, "m1"), 10, 0);
  auto ctx = approaching("TL1");
  const neg::Preference wait_only{1, 0, 0};
  // Unvoted: recommend the sincere choice.
  EXPECT_EQ(neg::reconsider_vote(ctx, engine.session(h), wait_only), neg::BidId{1});
  engine.cast_vote(h, "car1", neg::BidId{2}, 1);
  // Current vote is not cheapest: switch.
  EXPECT_EQ(neg::reconsider_vote(ctx, engine.session(h), wait_only), neg::BidId{1});
  engine.cast_vote(h, "car1", neg::BidId{1}, 2);
  EXPECT_EQ(neg::reconsider_vote(ctx, engine.session(h), wait_only), std::nullopt);
  // Both bids cost the same under a turns-only preference: follow the leader.
  engine.cast_vote(h, "x", neg::BidId{2}, 3);
  engine.cast_vote(h, "y", neg::BidId{2}, 3);
  EXPECT_EQ(neg::reconsider_vote(ctx, engine.session(h), {0, 1, 0}), neg::BidId{2});
  EXPECT_EQ(neg::reconsider_vote(ctx, engine.session(h), wait_only), std::nullopt);
}

// --- knowledge-store mirror ------------------------------------------------

TEST(Mirror, OneActorIsOneViolationTwoActorsNone) {
  auto store = kb::make_negotiation_store();
  neg::NegotiationEngine engine(&store);
  auto layout = crossing(1);
  auto h = engine.open_session(mediator("Int1_mediator"), layout,
                               neg::generate_bids(layout, 2, "Int1_mediator"), 10, 0);
  auto violations = store.validate_all();
  ASSERT_EQ(violations.size(), 1u);
  EXPECT_EQ(violations[0].kind, kb::Violation::Kind::MinCardinality);
  EXPECT_EQ(violations[0].entity, engine.session_entity(h));
  EXPECT_EQ(violations[0].required, 2u);
  EXPECT_EQ(violations[0].found, 1u);
  EXPECT_NE(violations[0].message.find("required 2, found 1"), std::string::npos);

  engine.cast_vote(h, "car1", neg::BidId{1}, 1);
  EXPECT_TRUE(store.validate_all().empty());
  engine.close_session(h, 10);
  EXPECT_TRUE(store.validate_all().empty());
}

TEST(Mirror, UtilitiesTrackTallyAndOutcomeIsRecorded) {
  auto store = kb::make_negotiation_store();
  neg::NegotiationEngine engine(&store);
  auto layout = crossing(1);
  auto h = engine.open_session(mediator(), layout, neg::generate_bids(layout, 2, "m1"), 10, 0);
  auto b1 = engine.bid_entity(h, neg::BidId{1});
  auto b2 = engine.bid_entity(h, neg::BidId{2});
  auto utility = [&](const kb::EntityId& b) { return store.objects(b, "hasUtility"); };
  EXPECT_EQ(utility(b1), (std::vector<kb::Value>{std::int64_t{0}}));
  engine.cast_vote(h, "a", neg::BidId{1}, 1);
  engine.cast_vote(h, "b", neg::BidId{1}, 1);
  engine.cast_vote(h, "a", neg::BidId{2}, 2);
  EXPECT_EQ(utility(b1), (std::vector<kb::Value>{std::int64_t{1}}));
  EXPECT_EQ(utility(b2), (std::vector<kb::Value>{std::int64_t{1}}));
  engine.close_session(h, 10);
  auto rule = kb::EntityId{engine.session(h).name() + "_rule"};
  EXPECT_EQ(store.objects(rule, "hasAttributeOutput"), (std::vector<kb::Value>{b1}));
  EXPECT_EQ(store.objects(rule, "hasRoleInput").size(), 3u);
}

// --- transcript ------------------------------------------------------------

TEST(Transcript, OneJsonLinePerEvent) {
  neg::NegotiationEngine engine;
  auto layout = crossing(1);
  auto h = engine.open_session(mediator(), layout, neg::generate_bids(layout, 2, "m1"), 10, 0);
  engine.cast_vote(h, "car1", neg::BidId{2}, 4);
  engine.close_session(h, 10);
  std::ostringstream out;
  neg::write_transcript(out, engine.transcript());
  std::istringstream in(out.str());
  std::vector<nlohmann::json> lines;
  for (std::string line; std::getline(in, line);) lines.push_back(nlohmann::json::parse(line));
  ASSERT_EQ(lines.size(), 3u);
  EXPECT_EQ(lines[0]["event"], "open");
  EXPECT_EQ(lines[1]["event"], "vote");
  EXPECT_EQ(lines[1]["tick"], 4);
  EXPECT_EQ(lines[1]["vehicle"], "car1");
  EXPECT_EQ(lines[1]["bid"], "bid2");
  EXPECT_EQ(lines[1]["tally"], (nlohmann::json{{"bid1", 0}, {"bid2", 1}}));
  EXPECT_EQ(lines[2]["event"], "close");
  EXPECT_EQ(lines[2]["winner"], "bid2");
}

// --- properties ------------------------------------------------------------

TEST(VoteProperty, RandomSequencesKeepInvariants) {
  std::mt19937 rng(5);
  for (int i = 0; i < 1000; ++i) {
    auto failure = oracle::check_vote_sequence(rng, i % 10 == 0);
    ASSERT_FALSE(failure) << "sequence " << i << ": " << *failure;
  }
}

TEST(VoteProperty, WinnerIndependentOfBidOrderAndReplayIsDeterministic) {
  std::mt19937 rng(17);
  for (int iter = 0; iter < 200; ++iter) {
    auto layout = oracle::exclusive_layout(4);
    auto bids = neg::generate_bids(layout, 4, "m");
    std::vector<std::pair<std::string, std::uint32_t>> votes;
    for (int n = static_cast<int>(rng() % 15); n > 0; --n) {
      votes.emplace_back("v" + std::to_string(rng() % 6), 1 + rng() % 4);
    }
    auto run = [&](std::vector<neg::Bid> order) {
      neg::NegotiationEngine engine;
      auto h = engine.open_session(mediator(), layout, std::move(order), 100, 0);
      for (const auto& [v, b] : votes) engine.cast_vote(h, v, neg::BidId{b}, 1);
      auto out = engine.close_session(h, 100);
      return std::make_pair(out.winner, out.tally);
    };
    auto reference = run(bids);
    EXPECT_EQ(run(bids), reference);
    std::shuffle(bids.begin(), bids.end(), rng);
    EXPECT_EQ(run(bids), reference);
  }
}
