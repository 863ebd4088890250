#pragma once

// Random vote/revote sequences checked against a plain replay model: the
// last vote of each vehicle, counted per bid.

#include <map>
#include <optional>
#include <random>
#include <string>

#include "ontoneg/kb_format.hpp"
#include "ontoneg/negotiation.hpp"

namespace oracle {

namespace neg = ontoneg::negotiation;

// n lights that all conflict pairwise: exactly n single-green phases.
inline neg::IntersectionLayout exclusive_layout(std::size_t n, const std::string& id = "X") {
  neg::IntersectionLayout layout{id, {}, ontoneg::ConflictMatrix(n)};
  for (std::size_t i = 0; i < n; ++i) {
    layout.lights.push_back(ontoneg::LightId{id + "_L" + std::to_string(i + 1)});
    for (std::size_t j = i + 1; j < n; ++j) layout.conflicts.set_conflict(i, j);
  }
  return layout;
}

// Returns a description of the first broken invariant, or nullopt.
inline std::optional<std::string> check_vote_sequence(std::mt19937& rng, bool with_mirror) {
  auto pick = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
  const auto n_bids = static_cast<std::uint32_t>(pick(2, 4));
  auto layout = exclusive_layout(n_bids);
  neg::Party mediator{"X_mediator", neg::Role::Mediator};

  ontoneg::kb::KnowledgeStore store;
  if (with_mirror) store = ontoneg::kb::make_negotiation_store();
  neg::NegotiationEngine engine(with_mirror ? &store : nullptr);
  const neg::Tick apply = 1000;
  auto h = engine.open_session(mediator, layout, neg::generate_bids(layout, n_bids, mediator.id),
                               apply, 0);

  std::map<std::string, std::uint32_t> model;  // vehicle -> bid value
  const int ops = pick(0, 25);
  const int voters = pick(1, 8);
  for (int i = 0; i < ops; ++i) {
    std::string v = "v" + std::to_string(pick(1, voters));
    auto bid = static_cast<std::uint32_t>(pick(1, static_cast<int>(n_bids)));
    engine.cast_vote(h, v, neg::BidId{bid}, i);
    model[v] = bid;

    const auto& s = engine.session(h);
    std::uint32_t sum = 0;
    for (const auto& [id, n] : s.tally()) sum += n;
    if (sum != s.votes().size()) return "tally sum differs from voter count";
    if (s.votes().size() != model.size()) return "voter count differs from model";
    for (const auto& [veh, b] : model) {
      auto got = s.vote_of(veh);
      if (!got || got->value != b) return "vehicle " + veh + " holds the wrong vote";
    }
    for (const auto& bidrec : s.bids()) {
      std::uint32_t expect = 0;
      for (const auto& [veh, b] : model) expect += b == bidrec.id.value ? 1 : 0;
      if (s.tally().at(bidrec.id) != expect) return "tally differs from model";
      if (bidrec.utility != expect) return "bid utility differs from tally";
    }
  }

  auto before = engine.session(h).tally();
  auto outcome = engine.close_session(h, apply);
  if (outcome.tally != before) return "outcome tally differs from the live tally";
  // Independent argmax with smallest-id tie-break.
  std::uint32_t best = 1, best_n = 0;
  for (std::uint32_t b = 1; b <= n_bids; ++b) {
    std::uint32_t n = 0;
    for (const auto& [veh, v] : model) n += v == b ? 1 : 0;
    if (n > best_n) {
      best = b;
      best_n = n;
    }
  }
  if (outcome.winner.value != best) return "winner is not the argmax with id tie-break";
  if (outcome.contested != !model.empty()) return "contested flag wrong";

  try {
    engine.cast_vote(h, "late", neg::BidId{1}, apply - 1);
    return "vote accepted after close";
  } catch (const neg::NegotiationError& e) {
    if (e.code() != neg::NegotiationErrc::SessionClosed) return "wrong error after close";
  }
  if (engine.session(h).tally() != before) return "tally changed after close";

  if (with_mirror) {
    for (const auto& b : engine.session(h).bids()) {
      auto u = store.objects(engine.bid_entity(h, b.id), "hasUtility");
      if (u.size() != 1 ||
          u[0] != ontoneg::kb::Value{static_cast<std::int64_t>(before.at(b.id))}) {
        return "mirror utility differs from tally";
      }
    }
    if (store.facts_of("votesFor").size() != model.size()) return "mirror vote count wrong";
  }
  return std::nullopt;
}

}  // namespace oracle
