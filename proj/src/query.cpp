#include "ontoneg/query.hpp"

#include <cctype>
#include <charconv>
#include <optional>

namespace ontoneg::query {

ParseError::ParseError(ParseErrc code, std::size_t line, std::size_t column,
                       const std::string& what)
    : std::runtime_error("line " + std::to_string(line) + ", column " +
                         std::to_string(column) + ": " + what),
      code_(code),
      line_(line),
      column_(column) {}

namespace {

enum class Tok { Ident, Var, Int, String, LParen, RParen, Comma, End };

struct Token {
  Tok kind;
  std::string text;
  std::int64_t number = 0;
  std::size_t line = 1;
  std::size_t column = 1;
};

bool ident_start(char c) {
  return std::isalpha(static_cast<unsigned char>(c)) || c == '_';
}
bool ident_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
}

class Lexer {
 public:
  explicit Lexer(std::string_view src) : src_(src) {}

  Token next() {
    skip_space();
    Token t{Tok::End, {}, 0, line_, column_};
    if (pos_ >= src_.size()) return t;
    char c = src_[pos_];
    switch (c) {
      case '(': advance(); t.kind = Tok::LParen; return t;
      case ')': advance(); t.kind = Tok::RParen; return t;
      case ',': advance(); t.kind = Tok::Comma; return t;
      default: break;
    }
    if (c == '?') {
      advance();
      if (pos_ >= src_.size() || !ident_start(src_[pos_])) {
        throw ParseError(ParseErrc::Syntax, t.line, t.column,
                         "expected variable name after '?'");
      }
      t.kind = Tok::Var;
      t.text = take_while(ident_char);
      return t;
    }
    if (ident_start(c)) {
      t.kind = Tok::Ident;
      t.text = take_while(ident_char);
      return t;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '-') {
      std::size_t start = pos_;
      advance();
      while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) {
        advance();
      }
      std::string_view digits = src_.substr(start, pos_ - start);
      auto [ptr, ec] =
          std::from_chars(digits.data(), digits.data() + digits.size(), t.number);
      if (ec != std::errc{} || ptr != digits.data() + digits.size()) {
        throw ParseError(ParseErrc::Syntax, t.line, t.column, "malformed integer");
      }
      t.kind = Tok::Int;
      t.text = std::string(digits);
      return t;
    }
    if (c == '"') {
      advance();
      std::string s;
      while (true) {
        if (pos_ >= src_.size()) {
          throw ParseError(ParseErrc::Syntax, t.line, t.column,
                           "unterminated string");
        }
        char d = src_[pos_];
        advance();
        if (d == '"') break;
        if (d == '\\') {
          if (pos_ >= src_.size()) continue;
          d = src_[pos_];
          advance();
        }
        s += d;
      }
      t.kind = Tok::String;
      t.text = std::move(s);
      return t;
    }
    throw ParseError(ParseErrc::Syntax, t.line, t.column,
                     std::string("unexpected character '") + c + "'");
  }

 private:
  void advance() {
    if (src_[pos_] == '\n') {
      ++line_;
      column_ = 1;
    } else {
      ++column_;
    }
    ++pos_;
  }

  void skip_space() {
    while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) {
      advance();
    }
  }

  template <typename Pred>
  std::string take_while(Pred pred) {
    std::size_t start = pos_;
    while (pos_ < src_.size() && pred(src_[pos_])) advance();
    return std::string(src_.substr(start, pos_ - start));
  }

  std::string_view src_;
  std::size_t pos_ = 0;
  std::size_t line_ = 1;
  std::size_t column_ = 1;
};

bool is_and(const Token& t) {
  if (t.kind != Tok::Ident || t.text.size() != 3) return false;
  return std::toupper(static_cast<unsigned char>(t.text[0])) == 'A' &&
         std::toupper(static_cast<unsigned char>(t.text[1])) == 'N' &&
         std::toupper(static_cast<unsigned char>(t.text[2])) == 'D';
}

const char* describe(Tok k) {
  switch (k) {
    case Tok::Ident: return "identifier";
    case Tok::Var: return "variable";
    case Tok::Int: return "integer";
    case Tok::String: return "string";
    case Tok::LParen: return "'('";
    case Tok::RParen: return "')'";
    case Tok::Comma: return "','";
    case Tok::End: return "end of input";
  }
  return "token";
}

class Parser {
 public:
  explicit Parser(std::string_view src) : lexer_(src) { shift(); }

  QueryAst parse_query() {
    QueryAst ast;
    if (cur_.kind == Tok::End) {
      throw ParseError(ParseErrc::EmptyInput, cur_.line, cur_.column, "empty query");
    }
    ast.atoms.push_back(parse_atom());
    while (cur_.kind != Tok::End) {
      if (cur_.kind == Tok::Comma || is_and(cur_)) {
        shift();
      } else {
        unexpected("',' or AND");
      }
      ast.atoms.push_back(parse_atom());
    }
    return ast;
  }

 private:
  void shift() { cur_ = lexer_.next(); }

  [[noreturn]] void unexpected(const std::string& wanted) const {
    throw ParseError(ParseErrc::Syntax, cur_.line, cur_.column,
                     "expected " + wanted + ", found " + describe(cur_.kind));
  }

  void expect(Tok k) {
    if (cur_.kind != k) unexpected(describe(k));
    shift();
  }

  std::optional<SimpleArg> simple_from(const Token& t) {
    switch (t.kind) {
      case Tok::Var: return SimpleArg{kb::Variable{t.text}};
      case Tok::Ident: return SimpleArg{kb::Value{kb::EntityId{t.text}}};
      case Tok::Int: return SimpleArg{kb::Value{t.number}};
      case Tok::String: return SimpleArg{kb::Value{t.text}};
      default: return std::nullopt;
    }
  }

  Atom parse_atom() {
    if (cur_.kind != Tok::Ident) unexpected("predicate name");
    Atom atom{cur_.text, {}};
    shift();
    expect(Tok::LParen);
    if (cur_.kind == Tok::RParen) {
      throw ParseError(ParseErrc::EmptyArguments, cur_.line, cur_.column,
                       "atom " + atom.predicate + " has no arguments");
    }
    while (true) {
      atom.args.push_back(parse_arg());
      if (cur_.kind == Tok::Comma) {
        shift();
        continue;
      }
      expect(Tok::RParen);
      break;
    }
    return atom;
  }

  Argument parse_arg() {
    Token t = cur_;
    auto simple = simple_from(t);
    if (!simple) unexpected("argument");
    shift();
    if (t.kind != Tok::Ident || cur_.kind != Tok::LParen) {
      return std::visit([](auto&& v) -> Argument { return v; }, *simple);
    }
    FunctionTerm fn{t.text, {}};
    shift();
    if (cur_.kind == Tok::RParen) {
      throw ParseError(ParseErrc::EmptyArguments, cur_.line, cur_.column,
                       "function " + fn.function + " has no arguments");
    }
    while (true) {
      Token a = cur_;
      auto inner = simple_from(a);
      if (!inner) unexpected("argument");
      shift();
      if (a.kind == Tok::Ident && cur_.kind == Tok::LParen) {
        throw ParseError(ParseErrc::NestingTooDeep, a.line, a.column,
                         "function terms nest at most one level");
      }
      fn.args.push_back(std::move(*inner));
      if (cur_.kind == Tok::Comma) {
        shift();
        continue;
      }
      expect(Tok::RParen);
      break;
    }
    return fn;
  }

  Lexer lexer_;
  Token cur_;
};

std::string simple_text(const SimpleArg& a) {
  if (const auto* v = std::get_if<kb::Variable>(&a)) return "?" + v->name;
  return kb::to_string(std::get<kb::Value>(a));
}

bool reserved_variable(const std::string& name) {
  if (name.size() < 3 || name.compare(0, 2, "_g") != 0) return false;
  for (std::size_t i = 2; i < name.size(); ++i) {
    if (!std::isdigit(static_cast<unsigned char>(name[i]))) return false;
  }
  return true;
}

kb::Term to_term(const SimpleArg& a) {
  if (const auto* v = std::get_if<kb::Variable>(&a)) {
    if (reserved_variable(v->name)) {
      throw FlattenError("variable ?" + v->name + " is reserved for desugaring");
    }
    return *v;
  }
  return std::get<kb::Value>(a);
}

}  // namespace

QueryAst parse(std::string_view text) { return Parser(text).parse_query(); }

std::string to_string(const QueryAst& ast) {
  std::string out;
  for (std::size_t i = 0; i < ast.atoms.size(); ++i) {
    const Atom& atom = ast.atoms[i];
    if (i) out += ", ";
    out += atom.predicate + "(";
    for (std::size_t j = 0; j < atom.args.size(); ++j) {
      if (j) out += ", ";
      const Argument& arg = atom.args[j];
      if (const auto* fn = std::get_if<FunctionTerm>(&arg)) {
        out += fn->function + "(";
        for (std::size_t k = 0; k < fn->args.size(); ++k) {
          if (k) out += ", ";
          out += simple_text(fn->args[k]);
        }
        out += ")";
      } else if (const auto* v = std::get_if<kb::Variable>(&arg)) {
        out += "?" + v->name;
      } else {
        out += kb::to_string(std::get<kb::Value>(arg));
      }
    }
    out += ")";
  }
  return out;
}

std::vector<kb::Pattern> flatten(const QueryAst& ast) {
  std::vector<kb::Pattern> out;
  std::size_t counter = 0;
  auto fresh = [&] { return kb::Variable{"_g" + std::to_string(counter++)}; };

  for (const Atom& atom : ast.atoms) {
    kb::Pattern p{atom.predicate, {}};
    for (const Argument& arg : atom.args) {
      if (const auto* fn = std::get_if<FunctionTerm>(&arg)) {
        if (fn->args.size() > 2) {
          throw FlattenError("function " + fn->function + " has arity " +
                             std::to_string(fn->args.size()) +
                             "; at most 2 is supported");
        }
        kb::Pattern call{fn->function, {}};
        for (const auto& a : fn->args) call.terms.push_back(to_term(a));
        auto result = fresh();
        call.terms.emplace_back(result);
        out.push_back(std::move(call));
        p.terms.emplace_back(std::move(result));
      } else if (const auto* v = std::get_if<kb::Variable>(&arg)) {
        p.terms.push_back(to_term(SimpleArg{*v}));
      } else {
        p.terms.emplace_back(std::get<kb::Value>(arg));
      }
    }
    if (atom.args.size() == 1) p.terms.emplace_back(fresh());
    out.push_back(std::move(p));
  }
  return out;
}

}  // namespace ontoneg::query
