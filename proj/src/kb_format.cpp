#include "ontoneg/kb_format.hpp"

#include <fstream>
#include <sstream>
#include <vector>

namespace ontoneg::kb {

namespace {

struct Token {
  std::string text;
  bool quoted = false;
};

[[noreturn]] void parse_fail(std::size_t line, const std::string& msg) {
  throw KbError(KbErrc::Parse, "line " + std::to_string(line) + ": " + msg);
}

std::vector<Token> tokenize(std::string_view line, std::size_t line_no) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < line.size()) {
    char c = line[i];
    if (c == ' ' || c == '\t' || c == '\r') {
      ++i;
    } else if (c == '#') {
      break;
    } else if (c == ':') {
      out.push_back({":", false});
      ++i;
    } else if (c == '"') {
      std::string s;
      ++i;
      bool closed = false;
      while (i < line.size()) {
        char d = line[i++];
        if (d == '\\' && i < line.size()) {
          s += line[i++];
        } else if (d == '"') {
          closed = true;
          break;
        } else {
          s += d;
        }
      }
      if (!closed) parse_fail(line_no, "unterminated string");
      out.push_back({std::move(s), true});
    } else {
      std::size_t start = i;
      while (i < line.size() && line[i] != ' ' && line[i] != '\t' &&
             line[i] != '\r' && line[i] != '#' && line[i] != ':' &&
             line[i] != '"') {
        ++i;
      }
      out.push_back({std::string(line.substr(start, i - start)), false});
    }
  }
  return out;
}

Value token_value(const Token& t) {
  if (t.quoted) return t.text;
  return EntityId{t.text};
}

TypeRef token_type(const Token& t) {
  if (t.text == "integer") return TypeRef::literal(LiteralKind::Integer);
  if (t.text == "string") return TypeRef::literal(LiteralKind::String);
  return TypeRef::cls(t.text);
}

void apply(KnowledgeStore& store, const std::vector<Token>& tok,
           std::size_t line_no) {
  const std::string& kw = tok[0].text;
  auto need = [&](bool ok, const char* usage) {
    if (!ok) parse_fail(line_no, std::string("usage: ") + usage);
  };

  if (kw == "class") {
    need((tok.size() == 2) || (tok.size() == 4 && tok[2].text == ":"),
         "class <name> [: <parent>]");
    std::optional<std::string_view> parent;
    if (tok.size() == 4) parent = tok[3].text;
    store.define_class(tok[1].text, parent);
  } else if (kw == "prop") {
    need(tok.size() >= 4, "prop <name> <domain> <range> [...] [functional]");
    bool functional = tok.back().text == "functional" && !tok.back().quoted;
    std::size_t end = tok.size() - (functional ? 1 : 0);
    need(end >= 4, "prop <name> <domain> <range> [...] [functional]");
    std::vector<TypeRef> sig;
    for (std::size_t i = 2; i < end; ++i) sig.push_back(token_type(tok[i]));
    store.define_relation(tok[1].text, std::move(sig), functional);
  } else if (kw == "restrict") {
    need(tok.size() >= 5, "restrict <class> min|hasvalue ...");
    Restriction r;
    const std::string& kind = tok[2].text;
    if (kind == "min") {
      need(tok.size() == 5 || tok.size() == 6,
           "restrict <class> min <n> <property> [\"comment\"]");
      std::uint32_t n = 0;
      try {
        std::size_t used = 0;
        long long v = std::stoll(tok[3].text, &used);
        if (used != tok[3].text.size() || v < 0) throw std::invalid_argument("");
        n = static_cast<std::uint32_t>(v);
      } catch (const std::exception&) {
        parse_fail(line_no, "min cardinality must be a non-negative integer");
      }
      r.on_property = tok[4].text;
      r.kind = MinCardinality{n};
      if (tok.size() == 6) r.comment = tok[5].text;
    } else if (kind == "hasvalue") {
      need(tok.size() == 5 || tok.size() == 6,
           "restrict <class> hasvalue <property> <value> [\"comment\"]");
      r.on_property = tok[3].text;
      Value v = token_value(tok[4]);
      if (store.has_property(r.on_property)) {
        v = store.coerce(store.property_def(r.on_property).range(), v);
      }
      r.kind = HasValue{std::move(v)};
      if (tok.size() == 6) r.comment = tok[5].text;
    } else {
      parse_fail(line_no, "unknown restriction kind " + kind);
    }
    store.add_restriction(tok[1].text, std::move(r));
  } else if (kw == "isa") {
    need(tok.size() == 3, "isa <entity> <class>");
    store.assert_isa(EntityId{tok[1].text}, tok[2].text);
  } else if (kw == "fact") {
    need(tok.size() >= 4, "fact <subject> <predicate> <object> [...]");
    Fact f;
    f.predicate = tok[2].text;
    f.args.push_back(token_value(tok[1]));
    for (std::size_t i = 3; i < tok.size(); ++i) f.args.push_back(token_value(tok[i]));
    store.assert_fact(std::move(f));
  } else {
    parse_fail(line_no, "unknown statement '" + kw + "'");
  }
}

}  // namespace

void load(KnowledgeStore& store, std::string_view text) {
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    std::string_view line = text.substr(pos, eol - pos);
    pos = eol + 1;
    ++line_no;
    auto tok = tokenize(line, line_no);
    if (tok.empty()) continue;
    try {
      apply(store, tok, line_no);
    } catch (const KbError& e) {
      if (e.code() == KbErrc::Parse) throw;
      throw KbError(e.code(), "line " + std::to_string(line_no) + ": " + e.what());
    }
  }
}

void load_file(KnowledgeStore& store, const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::ios_base::failure("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  load(store, buf.str());
}

namespace {

std::string quote(const std::string& s) { return to_string(Value{s}); }

}  // namespace

std::string dump(const KnowledgeStore& store) {
  std::ostringstream out;
  for (const auto& c : store.classes()) {
    out << "class " << c.name;
    if (c.parent) out << " : " << *c.parent;
    out << '\n';
  }
  for (const auto& p : store.properties()) {
    out << "prop " << p.name;
    for (const auto& t : p.signature) out << ' ' << to_string(t);
    if (p.functional) out << " functional";
    out << '\n';
  }
  auto facts = store.facts();
  for (const auto& f : facts) {
    if (f.predicate != kIsA) continue;
    out << "isa " << to_string(f.args[0]) << ' ' << to_string(f.args[1]) << '\n';
  }
  for (const auto& c : store.classes()) {
    for (const auto& r : c.restrictions) {
      out << "restrict " << c.name << ' ';
      if (const auto* mc = std::get_if<MinCardinality>(&r.kind)) {
        out << "min " << mc->n << ' ' << r.on_property;
      } else {
        out << "hasvalue " << r.on_property << ' '
            << to_string(std::get<HasValue>(r.kind).value);
      }
      if (r.comment) out << ' ' << quote(*r.comment);
      out << '\n';
    }
  }
  for (const auto& f : facts) {
    if (f.predicate == kIsA) continue;
    out << "fact " << to_string(f.args[0]) << ' ' << f.predicate;
    for (std::size_t i = 1; i < f.args.size(); ++i) out << ' ' << to_string(f.args[i]);
    out << '\n';
  }
  return out.str();
}

KnowledgeStore make_negotiation_store() {
  KnowledgeStore store;
  load(store, negotiation_schema());
  return store;
}

}  // namespace ontoneg::kb
