#pragma once

// Minimal typed entity-relation store: a class hierarchy, typed properties,
// MinCardinality/HasValue restrictions checked under a closed world, and
// conjunctive pattern matching over asserted facts.
//
// Thread-safety: single writer, many readers. Mutating calls must be
// serialized by the caller; const calls may run concurrently with each other.

#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <variant>
#include <vector>

namespace ontoneg::kb {

struct EntityId {
  std::string name;
  auto operator<=>(const EntityId&) const = default;
};

// Entities sort before integers, integers before strings.
using Value = std::variant<EntityId, std::int64_t, std::string>;

std::string to_string(const Value& v);

inline Value entity(std::string name) { return EntityId{std::move(name)}; }

enum class LiteralKind { Integer, String };

// A property argument type: either a class name or a literal kind.
struct TypeRef {
  std::variant<std::string, LiteralKind> ref;

  static TypeRef cls(std::string name) { return TypeRef{std::move(name)}; }
  static TypeRef literal(LiteralKind k) { return TypeRef{k}; }
  bool is_class() const { return std::holds_alternative<std::string>(ref); }
  const std::string& class_name() const { return std::get<std::string>(ref); }
  bool operator==(const TypeRef&) const = default;
};

std::string to_string(const TypeRef& t);

struct MinCardinality {
  std::uint32_t n = 0;
  bool operator==(const MinCardinality&) const = default;
};

struct HasValue {
  Value value;
  bool operator==(const HasValue&) const = default;
};

struct Restriction {
  std::string on_property;
  std::variant<MinCardinality, HasValue> kind;
  std::optional<std::string> comment;
  bool operator==(const Restriction&) const = default;
};

struct ClassDef {
  std::string name;
  std::optional<std::string> parent;
  std::vector<Restriction> restrictions;
};

// Binary properties are the usual domain/range pairs. Relations with more
// arguments (used by desugared function terms) list every argument type;
// signature.front() is the domain, signature.back() the range.
struct PropertyDef {
  std::string name;
  std::vector<TypeRef> signature;
  bool functional = false;

  const TypeRef& domain() const { return signature.front(); }
  const TypeRef& range() const { return signature.back(); }
  std::size_t arity() const { return signature.size(); }
};

struct Fact {
  std::string predicate;
  std::vector<Value> args;  // args[0] is the subject
  auto operator<=>(const Fact&) const = default;
};

struct Triple {
  EntityId subject;
  std::string predicate;
  Value object;
};

struct Variable {
  std::string name;  // without the leading '?'
  auto operator<=>(const Variable&) const = default;
};

using Term = std::variant<Variable, Value>;

struct Pattern {
  std::string predicate;
  std::vector<Term> terms;
  bool operator==(const Pattern&) const = default;
};

std::string to_string(const Pattern& p);

// Variable name (no '?') to value. Ordered so bindings compare
// lexicographically by value in variable-name order.
using Binding = std::map<std::string, Value>;

struct Violation {
  EntityId entity;
  std::string declared_on;  // class carrying the restriction
  std::string property;
  enum class Kind { MinCardinality, HasValue } kind;
  std::uint32_t required = 0;  // MinCardinality only
  std::uint32_t found = 0;     // MinCardinality only
  std::optional<Value> expected;  // HasValue only
  std::string message;
  bool operator==(const Violation&) const = default;
};

enum class KbErrc {
  DuplicateName,
  DanglingReference,
  TypeViolation,
  FunctionalViolation,
  UnknownPredicate,
  UnknownEntity,
  ArityMismatch,
  InvalidRestriction,
  EmptyQuery,
  Parse,
};

std::string_view to_string(KbErrc e);

class KbError : public std::runtime_error {
 public:
  KbError(KbErrc code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  KbErrc code() const noexcept { return code_; }

 private:
  KbErrc code_;
};

struct ClassHandle {
  std::uint32_t index;
};
struct PropertyHandle {
  std::uint32_t index;
};

// Built-in instance-of predicate. Entities are untyped until asserted.
inline constexpr std::string_view kIsA = "isA";

class KnowledgeStore {
 public:
  ClassHandle define_class(std::string_view name,
                           std::optional<std::string_view> parent = std::nullopt,
                           std::vector<Restriction> restrictions = {});
  void add_restriction(std::string_view class_name, Restriction r);

  PropertyHandle define_property(std::string_view name, TypeRef domain,
                                 TypeRef range, bool functional = false);
  PropertyHandle define_relation(std::string_view name,
                                 std::vector<TypeRef> signature,
                                 bool functional = false);

  void assert_isa(const EntityId& e, std::string_view class_name);
  void assert_triple(const EntityId& subject, std::string_view predicate,
                     Value object);
  void assert_fact(Fact fact);
  // Removes a fact if present. Returns whether anything changed.
  bool retract(const Fact& fact);
  // Replaces every (subject, predicate, *) fact by the given one.
  void set_value(const EntityId& subject, std::string_view predicate,
                 Value object);

  std::vector<Binding> match(std::span<const Pattern> query) const;
  std::vector<Violation> validate(const EntityId& e) const;
  // Validates every typed entity, in entity order.
  std::vector<Violation> validate_all() const;

  bool has_class(std::string_view name) const;
  bool has_property(std::string_view name) const;
  bool is_subclass(std::string_view sub, std::string_view super) const;
  bool is_instance(const EntityId& e, std::string_view class_name) const;
  bool is_typed(const EntityId& e) const;
  bool contains(const Fact& f) const;

  const ClassDef& class_def(std::string_view name) const;
  const PropertyDef& property_def(std::string_view name) const;
  // Ancestor chain starting at the class itself.
  std::vector<std::string> ancestors(std::string_view name) const;

  std::size_t size() const { return fact_count_; }
  // Every fact, ordered by predicate then arguments.
  std::vector<Fact> facts() const;
  std::vector<Fact> facts_of(std::string_view predicate) const;
  // Objects of (subject, predicate, *) for a binary property.
  std::vector<Value> objects(const EntityId& subject,
                             std::string_view predicate) const;
  std::vector<EntityId> typed_entities() const;

  const std::vector<ClassDef>& classes() const { return classes_; }
  const std::vector<PropertyDef>& properties() const { return properties_; }

  // Converts a constant to the literal kind expected at an argument position
  // (bare identifiers become strings/integers where the type demands it).
  Value coerce(const TypeRef& type, const Value& v) const;

 private:
  const ClassDef* find_class(std::string_view name) const;
  const PropertyDef* find_property(std::string_view name) const;
  void check_value_type(const TypeRef& type, const Value& v,
                        std::string_view context) const;
  bool conforms(const TypeRef& type, const Value& v) const;
  void check_restriction(const Restriction& r) const;

  std::vector<ClassDef> classes_;
  std::unordered_map<std::string, std::uint32_t> class_index_;
  std::vector<PropertyDef> properties_;
  std::unordered_map<std::string, std::uint32_t> property_index_;

  // predicate -> facts
  std::map<std::string, std::set<Fact>, std::less<>> facts_;
  // entity -> asserted classes
  std::map<EntityId, std::set<std::string>> types_;
  std::size_t fact_count_ = 0;
};

}  // namespace ontoneg::kb
