#include "ontoneg/knowledge_store.hpp"

#include <algorithm>
#include <charconv>
#include <sstream>

namespace ontoneg::kb {

namespace {

std::optional<std::int64_t> parse_int(std::string_view s) {
  std::int64_t v = 0;
  if (s.empty()) return std::nullopt;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

[[noreturn]] void fail(KbErrc code, const std::string& msg) {
  throw KbError(code, msg);
}

}  // namespace

std::string to_string(const Value& v) {
  struct Visitor {
    std::string operator()(const EntityId& e) const { return e.name; }
    std::string operator()(std::int64_t i) const { return std::to_string(i); }
    std::string operator()(const std::string& s) const {
      std::string out = "\"";
      for (char c : s) {
        if (c == '"' || c == '\\') out += '\\';
        out += c;
      }
      out += '"';
      return out;
    }
  };
  return std::visit(Visitor{}, v);
}

std::string to_string(const TypeRef& t) {
  if (t.is_class()) return t.class_name();
  return std::get<LiteralKind>(t.ref) == LiteralKind::Integer ? "integer"
                                                              : "string";
}

std::string to_string(const Pattern& p) {
  std::string out = p.predicate + "(";
  for (std::size_t i = 0; i < p.terms.size(); ++i) {
    if (i) out += ", ";
    if (const auto* var = std::get_if<Variable>(&p.terms[i])) {
      out += "?" + var->name;
    } else {
      out += to_string(std::get<Value>(p.terms[i]));
    }
  }
  return out + ")";
}

std::string_view to_string(KbErrc e) {
  switch (e) {
    case KbErrc::DuplicateName: return "duplicate name";
    case KbErrc::DanglingReference: return "dangling reference";
    case KbErrc::TypeViolation: return "type violation";
    case KbErrc::FunctionalViolation: return "functional property violation";
    case KbErrc::UnknownPredicate: return "unknown predicate";
    case KbErrc::UnknownEntity: return "unknown entity";
    case KbErrc::ArityMismatch: return "arity mismatch";
    case KbErrc::InvalidRestriction: return "invalid restriction";
    case KbErrc::EmptyQuery: return "empty query";
    case KbErrc::Parse: return "parse error";
  }
  return "unknown error";
}

// ---------------------------------------------------------------------------
// Schema

const ClassDef* KnowledgeStore::find_class(std::string_view name) const {
  auto it = class_index_.find(std::string(name));
  return it == class_index_.end() ? nullptr : &classes_[it->second];
}

const PropertyDef* KnowledgeStore::find_property(std::string_view name) const {
  auto it = property_index_.find(std::string(name));
  return it == property_index_.end() ? nullptr : &properties_[it->second];
}

bool KnowledgeStore::has_class(std::string_view name) const {
  return find_class(name) != nullptr;
}

bool KnowledgeStore::has_property(std::string_view name) const {
  return find_property(name) != nullptr;
}

const ClassDef& KnowledgeStore::class_def(std::string_view name) const {
  const auto* c = find_class(name);
  if (!c) fail(KbErrc::DanglingReference, "unknown class " + std::string(name));
  return *c;
}

const PropertyDef& KnowledgeStore::property_def(std::string_view name) const {
  const auto* p = find_property(name);
  if (!p) {
    fail(KbErrc::UnknownPredicate, "unknown property " + std::string(name));
  }
  return *p;
}

std::vector<std::string> KnowledgeStore::ancestors(std::string_view name) const {
  std::vector<std::string> chain;
  const ClassDef* c = &class_def(name);
  while (c) {
    chain.push_back(c->name);
    c = c->parent ? find_class(*c->parent) : nullptr;
  }
  return chain;
}

bool KnowledgeStore::is_subclass(std::string_view sub,
                                 std::string_view super) const {
  const ClassDef* c = find_class(sub);
  while (c) {
    if (c->name == super) return true;
    c = c->parent ? find_class(*c->parent) : nullptr;
  }
  return false;
}

ClassHandle KnowledgeStore::define_class(std::string_view name,
                                         std::optional<std::string_view> parent,
                                         std::vector<Restriction> restrictions) {
  if (name.empty()) fail(KbErrc::Parse, "empty class name");
  if (has_class(name)) {
    fail(KbErrc::DuplicateName, "class " + std::string(name) + " already defined");
  }
  if (parent && !has_class(*parent)) {
    fail(KbErrc::DanglingReference, "class " + std::string(name) +
                                        ": undefined parent " +
                                        std::string(*parent));
  }
  for (const auto& r : restrictions) check_restriction(r);

  ClassDef def;
  def.name = std::string(name);
  if (parent) def.parent = std::string(*parent);
  def.restrictions = std::move(restrictions);
  auto index = static_cast<std::uint32_t>(classes_.size());
  class_index_.emplace(def.name, index);
  classes_.push_back(std::move(def));
  return ClassHandle{index};
}

void KnowledgeStore::add_restriction(std::string_view class_name,
                                     Restriction r) {
  auto it = class_index_.find(std::string(class_name));
  if (it == class_index_.end()) {
    fail(KbErrc::DanglingReference,
         "restriction on undefined class " + std::string(class_name));
  }
  check_restriction(r);
  classes_[it->second].restrictions.push_back(std::move(r));
}

void KnowledgeStore::check_restriction(const Restriction& r) const {
  const auto* p = find_property(r.on_property);
  if (!p) {
    fail(KbErrc::DanglingReference,
         "restriction on undefined property " + r.on_property);
  }
  if (p->arity() != 2) {
    fail(KbErrc::InvalidRestriction,
         "restrictions apply to binary properties only: " + r.on_property);
  }
  if (const auto* hv = std::get_if<HasValue>(&r.kind)) {
    check_value_type(p->range(), hv->value,
                     "hasValue restriction on " + r.on_property);
  }
}

PropertyHandle KnowledgeStore::define_property(std::string_view name,
                                               TypeRef domain, TypeRef range,
                                               bool functional) {
  return define_relation(name, {std::move(domain), std::move(range)},
                         functional);
}

PropertyHandle KnowledgeStore::define_relation(std::string_view name,
                                               std::vector<TypeRef> signature,
                                               bool functional) {
  if (name.empty()) fail(KbErrc::Parse, "empty property name");
  if (name == kIsA || has_property(name)) {
    fail(KbErrc::DuplicateName,
         "property " + std::string(name) + " already defined");
  }
  if (signature.size() < 2) {
    fail(KbErrc::ArityMismatch,
         "property " + std::string(name) + " needs at least two arguments");
  }
  if (!signature.front().is_class()) {
    fail(KbErrc::TypeViolation,
         "property " + std::string(name) + ": domain must be a class");
  }
  for (const auto& t : signature) {
    if (t.is_class() && !has_class(t.class_name())) {
      fail(KbErrc::DanglingReference, "property " + std::string(name) +
                                          ": undefined class " +
                                          t.class_name());
    }
  }
  PropertyDef def{std::string(name), std::move(signature), functional};
  auto index = static_cast<std::uint32_t>(properties_.size());
  property_index_.emplace(def.name, index);
  properties_.push_back(std::move(def));
  return PropertyHandle{index};
}

// ---------------------------------------------------------------------------
// Typing

bool KnowledgeStore::is_typed(const EntityId& e) const {
  return types_.contains(e);
}

bool KnowledgeStore::is_instance(const EntityId& e,
                                 std::string_view class_name) const {
  auto it = types_.find(e);
  if (it == types_.end()) return false;
  return std::any_of(it->second.begin(), it->second.end(),
                     [&](const std::string& c) {
                       return is_subclass(c, class_name);
                     });
}

Value KnowledgeStore::coerce(const TypeRef& type, const Value& v) const {
  const auto* e = std::get_if<EntityId>(&v);
  if (!e || type.is_class()) return v;
  if (std::get<LiteralKind>(type.ref) == LiteralKind::String) return e->name;
  if (auto i = parse_int(e->name)) return *i;
  return v;
}

bool KnowledgeStore::conforms(const TypeRef& type, const Value& v) const {
  if (!type.is_class()) {
    auto kind = std::get<LiteralKind>(type.ref);
    return kind == LiteralKind::Integer ? std::holds_alternative<std::int64_t>(v)
                                        : std::holds_alternative<std::string>(v);
  }
  const auto* e = std::get_if<EntityId>(&v);
  if (!e) return false;
  if (is_instance(*e, type.class_name())) return true;
  // A class name stands for itself where its superclass is expected.
  return has_class(e->name) && is_subclass(e->name, type.class_name());
}

void KnowledgeStore::check_value_type(const TypeRef& type, const Value& v,
                                      std::string_view context) const {
  if (!conforms(type, v)) {
    fail(KbErrc::TypeViolation, std::string(context) + ": " + to_string(v) +
                                    " does not conform to " + to_string(type));
  }
}

// ---------------------------------------------------------------------------
// Facts

void KnowledgeStore::assert_isa(const EntityId& e,
                                std::string_view class_name) {
  if (e.name.empty()) fail(KbErrc::Parse, "empty entity name");
  if (!has_class(class_name)) {
    fail(KbErrc::DanglingReference,
         "isA: undefined class " + std::string(class_name));
  }
  Fact f{std::string(kIsA), {e, EntityId{std::string(class_name)}}};
  if (facts_[f.predicate].insert(f).second) ++fact_count_;
  types_[e].insert(std::string(class_name));
}

void KnowledgeStore::assert_triple(const EntityId& subject,
                                   std::string_view predicate, Value object) {
  assert_fact(Fact{std::string(predicate), {subject, std::move(object)}});
}

void KnowledgeStore::assert_fact(Fact fact) {
  if (fact.predicate == kIsA) {
    if (fact.args.size() != 2) {
      fail(KbErrc::ArityMismatch, "isA takes two arguments");
    }
    const auto* e = std::get_if<EntityId>(&fact.args[0]);
    const auto* c = std::get_if<EntityId>(&fact.args[1]);
    if (!e || !c) fail(KbErrc::TypeViolation, "isA arguments must be names");
    assert_isa(*e, c->name);
    return;
  }
  const auto& prop = property_def(fact.predicate);
  if (fact.args.size() != prop.arity()) {
    fail(KbErrc::ArityMismatch,
         fact.predicate + " expects " + std::to_string(prop.arity()) +
             " arguments, got " + std::to_string(fact.args.size()));
  }
  for (std::size_t i = 0; i < fact.args.size(); ++i) {
    fact.args[i] = coerce(prop.signature[i], fact.args[i]);
  }
  const auto* subject = std::get_if<EntityId>(&fact.args[0]);
  if (!subject) fail(KbErrc::TypeViolation, fact.predicate + ": subject must be an entity");
  if (!is_instance(*subject, prop.domain().class_name())) {
    fail(KbErrc::TypeViolation, fact.predicate + ": subject " + subject->name +
                                    " is not an instance of " +
                                    prop.domain().class_name());
  }
  for (std::size_t i = 1; i < fact.args.size(); ++i) {
    check_value_type(prop.signature[i], fact.args[i], fact.predicate);
  }

  auto& bucket = facts_[fact.predicate];
  if (bucket.contains(fact)) return;
  if (prop.functional) {
    // Same leading arguments, different final value.
    Fact probe{fact.predicate, {fact.args[0]}};
    for (auto it = bucket.lower_bound(probe);
         it != bucket.end() && it->args[0] == fact.args[0]; ++it) {
      if (std::equal(fact.args.begin(), fact.args.end() - 1, it->args.begin())) {
        fail(KbErrc::FunctionalViolation,
             fact.predicate + " is functional; " + subject->name +
                 " already has value " + to_string(it->args.back()));
      }
    }
  }
  bucket.insert(std::move(fact));
  ++fact_count_;
}

bool KnowledgeStore::retract(const Fact& fact) {
  auto it = facts_.find(fact.predicate);
  if (it == facts_.end()) return false;
  if (it->second.erase(fact) == 0) return false;
  --fact_count_;
  if (fact.predicate == kIsA) {
    const auto& e = std::get<EntityId>(fact.args[0]);
    const auto& c = std::get<EntityId>(fact.args[1]);
    auto t = types_.find(e);
    t->second.erase(c.name);
    if (t->second.empty()) types_.erase(t);
  }
  return true;
}

void KnowledgeStore::set_value(const EntityId& subject,
                               std::string_view predicate, Value object) {
  const auto& prop = property_def(predicate);
  if (prop.arity() != 2) {
    fail(KbErrc::ArityMismatch, "set_value needs a binary property");
  }
  std::vector<Fact> old;
  for (auto& v : objects(subject, predicate)) {
    old.push_back(Fact{std::string(predicate), {subject, std::move(v)}});
  }
  for (const auto& f : old) retract(f);
  try {
    assert_triple(subject, predicate, std::move(object));
  } catch (...) {
    for (auto& f : old) assert_fact(std::move(f));
    throw;
  }
}

bool KnowledgeStore::contains(const Fact& f) const {
  auto it = facts_.find(f.predicate);
  return it != facts_.end() && it->second.contains(f);
}

std::vector<Fact> KnowledgeStore::facts() const {
  std::vector<Fact> out;
  out.reserve(fact_count_);
  for (const auto& [_, bucket] : facts_) {
    out.insert(out.end(), bucket.begin(), bucket.end());
  }
  return out;
}

std::vector<Fact> KnowledgeStore::facts_of(std::string_view predicate) const {
  auto it = facts_.find(predicate);
  if (it == facts_.end()) return {};
  return {it->second.begin(), it->second.end()};
}

std::vector<Value> KnowledgeStore::objects(const EntityId& subject,
                                           std::string_view predicate) const {
  std::vector<Value> out;
  auto bucket = facts_.find(predicate);
  if (bucket == facts_.end()) return out;
  Fact probe{std::string(predicate), {subject}};
  for (auto it = bucket->second.lower_bound(probe);
       it != bucket->second.end() && it->args[0] == Value{subject}; ++it) {
    out.push_back(it->args.back());
  }
  return out;
}

std::vector<EntityId> KnowledgeStore::typed_entities() const {
  std::vector<EntityId> out;
  out.reserve(types_.size());
  for (const auto& [e, _] : types_) out.push_back(e);
  return out;
}

// ---------------------------------------------------------------------------
// Matching

namespace {

struct Solver {
  const std::map<std::string, std::set<Fact>, std::less<>>& facts;
  std::span<const Pattern> query;
  std::vector<bool> done;
  Binding binding;
  std::set<Binding> results;

  std::size_t bound_terms(const Pattern& p) const {
    std::size_t n = 0;
    for (const auto& t : p.terms) {
      const auto* var = std::get_if<Variable>(&t);
      if (!var || binding.contains(var->name)) ++n;
    }
    return n;
  }

  void solve(std::size_t remaining) {
    if (remaining == 0) {
      results.insert(binding);
      return;
    }
    // Most-constrained pattern first.
    std::size_t next = query.size();
    std::size_t best = 0;
    for (std::size_t i = 0; i < query.size(); ++i) {
      if (done[i]) continue;
      std::size_t b = bound_terms(query[i]);
      if (next == query.size() || b > best) {
        next = i;
        best = b;
      }
    }
    const Pattern& p = query[next];
    auto bucket = facts.find(p.predicate);
    if (bucket == facts.end()) return;

    done[next] = true;
    std::vector<std::string> fresh;
    for (const Fact& f : bucket->second) {
      fresh.clear();
      bool ok = true;
      for (std::size_t i = 0; i < p.terms.size() && ok; ++i) {
        if (const auto* var = std::get_if<Variable>(&p.terms[i])) {
          auto it = binding.find(var->name);
          if (it == binding.end()) {
            binding.emplace(var->name, f.args[i]);
            fresh.push_back(var->name);
          } else {
            ok = it->second == f.args[i];
          }
        } else {
          ok = std::get<Value>(p.terms[i]) == f.args[i];
        }
      }
      if (ok) solve(remaining - 1);
      for (const auto& name : fresh) binding.erase(name);
    }
    done[next] = false;
  }
};

}  // namespace

std::vector<Binding> KnowledgeStore::match(std::span<const Pattern> query) const {
  if (query.empty()) fail(KbErrc::EmptyQuery, "query has no patterns");
  std::vector<Pattern> normalized(query.begin(), query.end());
  for (auto& p : normalized) {
    std::vector<TypeRef> signature;
    if (p.predicate == kIsA) {
      signature = {TypeRef::cls(""), TypeRef::cls("")};
    } else {
      const auto* prop = find_property(p.predicate);
      if (!prop) {
        fail(KbErrc::UnknownPredicate, "unknown predicate " + p.predicate);
      }
      signature = prop->signature;
    }
    if (p.terms.size() != signature.size()) {
      fail(KbErrc::ArityMismatch,
           to_string(p) + ": expected " + std::to_string(signature.size()) +
               " arguments");
    }
    for (std::size_t i = 0; i < p.terms.size(); ++i) {
      if (auto* v = std::get_if<Value>(&p.terms[i])) {
        *v = coerce(signature[i], *v);
      }
    }
  }

  Solver solver{facts_, normalized, std::vector<bool>(normalized.size()), {}, {}};
  solver.solve(normalized.size());
  return {solver.results.begin(), solver.results.end()};
}

// ---------------------------------------------------------------------------
// Validation

std::vector<Violation> KnowledgeStore::validate(const EntityId& e) const {
  auto types = types_.find(e);
  if (types == types_.end()) {
    fail(KbErrc::UnknownEntity, "entity " + e.name + " has no class");
  }
  std::vector<std::string> classes;
  for (const auto& direct : types->second) {
    for (auto& c : ancestors(direct)) {
      if (std::find(classes.begin(), classes.end(), c) == classes.end()) {
        classes.push_back(std::move(c));
      }
    }
  }

  std::vector<Violation> out;
  for (const auto& cname : classes) {
    for (const auto& r : class_def(cname).restrictions) {
      auto values = objects(e, r.on_property);
      Violation v{e, cname, r.on_property, Violation::Kind::MinCardinality,
                  0, 0, std::nullopt, {}};
      if (const auto* mc = std::get_if<MinCardinality>(&r.kind)) {
        auto found = static_cast<std::uint32_t>(values.size());
        if (found >= mc->n) continue;
        v.required = mc->n;
        v.found = found;
        std::ostringstream msg;
        msg << e.name << ": " << cname << " needs at least " << mc->n << " "
            << r.on_property << " (required " << mc->n << ", found " << found
            << ")";
        v.message = msg.str();
      } else {
        const auto& want = std::get<HasValue>(r.kind).value;
        const auto* want_class = std::get_if<EntityId>(&want);
        bool punned = want_class && has_class(want_class->name);
        bool ok = std::any_of(values.begin(), values.end(), [&](const Value& got) {
          if (got == want) return true;
          const auto* ge = std::get_if<EntityId>(&got);
          return punned && ge && is_instance(*ge, want_class->name);
        });
        if (ok) continue;
        v.kind = Violation::Kind::HasValue;
        v.expected = want;
        v.message = e.name + ": " + cname + " requires " + r.on_property +
                    " = " + to_string(want);
      }
      if (r.comment) v.message += " [" + *r.comment + "]";
      out.push_back(std::move(v));
    }
  }
  return out;
}

std::vector<Violation> KnowledgeStore::validate_all() const {
  std::vector<Violation> out;
  for (const auto& [e, _] : types_) {
    auto v = validate(e);
    out.insert(out.end(), std::make_move_iterator(v.begin()),
               std::make_move_iterator(v.end()));
  }
  return out;
}

}  // namespace ontoneg::kb
