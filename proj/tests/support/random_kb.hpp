#pragma once

// Small random stores and queries over a fixed vocabulary, for oracle
// comparisons. Every asserted fact is also recorded in `facts`.

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "ontoneg/knowledge_store.hpp"

namespace oracle {

namespace kb = ontoneg::kb;

struct RandomCase {
  kb::KnowledgeStore store;
  std::vector<kb::Fact> facts;
  std::vector<kb::Pattern> query;
};

inline int pick(std::mt19937& rng, int lo, int hi) {
  return std::uniform_int_distribution<int>(lo, hi)(rng);
}

inline kb::KnowledgeStore vocabulary() {
  kb::KnowledgeStore s;
  s.define_class("Thing");
  s.define_class("A", "Thing");
  s.define_class("B", "Thing");
  s.define_property("p", kb::TypeRef::cls("Thing"), kb::TypeRef::cls("Thing"));
  s.define_property("q", kb::TypeRef::cls("A"), kb::TypeRef::cls("B"));
  s.define_property("r", kb::TypeRef::cls("Thing"), kb::TypeRef::literal(kb::LiteralKind::Integer));
  s.define_relation("t", {kb::TypeRef::cls("Thing"), kb::TypeRef::cls("Thing"),
                          kb::TypeRef::cls("Thing")});
  return s;
}

// At most `max_entities` entities, `max_triples` facts (isA included),
// `max_patterns` patterns over at most three variables.
inline RandomCase random_case(std::mt19937& rng, int max_entities = 8, int max_triples = 30,
                              int max_patterns = 3) {
  RandomCase c{vocabulary(), {}, {}};
  const int n = pick(rng, 1, max_entities);
  std::vector<std::string> names, a_names, b_names;
  for (int i = 0; i < n; ++i) {
    std::string e = "e" + std::to_string(i);
    std::string cls = pick(rng, 0, 1) ? "A" : "B";
    c.store.assert_isa(kb::EntityId{e}, cls);
    c.facts.push_back(kb::Fact{"isA", {kb::entity(e), kb::entity(cls)}});
    names.push_back(e);
    (cls == "A" ? a_names : b_names).push_back(e);
  }
  auto any = [&](const std::vector<std::string>& pool) {
    return kb::entity(pool[static_cast<std::size_t>(pick(rng, 0, static_cast<int>(pool.size()) - 1))]);
  };
  const int triples = pick(rng, 0, std::max(0, max_triples - n));
  for (int i = 0; i < triples; ++i) {
    kb::Fact f;
    switch (pick(rng, 0, 3)) {
      case 0: f = {"p", {any(names), any(names)}}; break;
      case 1:
        if (a_names.empty() || b_names.empty()) continue;
        f = {"q", {any(a_names), any(b_names)}};
        break;
      case 2: f = {"r", {any(names), std::int64_t{pick(rng, 0, 3)}}}; break;
      default: f = {"t", {any(names), any(names), any(names)}}; break;
    }
    c.store.assert_fact(f);
    c.facts.push_back(f);
  }

  const char* vars[] = {"x", "y", "z"};
  auto term = [&](bool integer) -> kb::Term {
    if (pick(rng, 0, 9) < 6) return kb::Variable{vars[pick(rng, 0, 2)]};
    if (integer) return kb::Value{std::int64_t{pick(rng, 0, 4)}};
    // Occasionally an entity the store has never seen.
    return kb::entity("e" + std::to_string(pick(rng, 0, max_entities)));
  };
  const int patterns = pick(rng, 1, max_patterns);
  for (int i = 0; i < patterns; ++i) {
    kb::Pattern p;
    switch (pick(rng, 0, 4)) {
      case 0: p = {"p", {term(false), term(false)}}; break;
      case 1: p = {"q", {term(false), term(false)}}; break;
      case 2: p = {"r", {term(false), term(true)}}; break;
      case 3: p = {"t", {term(false), term(false), term(false)}}; break;
      default: {
        kb::Term cls = pick(rng, 0, 2) == 0 ? kb::Term{kb::Variable{vars[pick(rng, 0, 2)]}}
                                            : kb::Term{kb::entity(pick(rng, 0, 1) ? "A" : "B")};
        p = {"isA", {term(false), cls}};
      }
    }
    c.query.push_back(std::move(p));
  }
  return c;
}

}  // namespace oracle
