#pragma once

// Line-oriented schema + facts format:
//
//   class <name> [: <parent>]
//   prop <name> <domain> <range> [<more argument types>...] [functional]
//   restrict <class> min <n> <property> ["comment"]
//   restrict <class> hasvalue <property> <value> ["comment"]
//   isa <entity> <class>
//   fact <subject> <predicate> <object> [<object>...]
//
// '#' starts a comment. `integer` and `string` are the literal kinds.
// Values are type-directed: a bare token in a literal-typed position becomes
// that literal; "quoted" tokens are always strings.

#include <filesystem>
#include <string>
#include <string_view>

#include "ontoneg/knowledge_store.hpp"

namespace ontoneg::kb {

// Applies every statement in `text` to `store`. Errors are KbError with the
// offending line number in the message; statements before it stay applied.
void load(KnowledgeStore& store, std::string_view text);
void load_file(KnowledgeStore& store, const std::filesystem::path& path);

// Serializes the store so that load(dump(s)) rebuilds an equivalent store.
std::string dump(const KnowledgeStore& store);

// The negotiation ontology (concepts, traffic objects, TrafficLightSign
// protocol, agreement-rule properties) bundled with the library.
std::string_view negotiation_schema();
KnowledgeStore make_negotiation_store();

}  // namespace ontoneg::kb
