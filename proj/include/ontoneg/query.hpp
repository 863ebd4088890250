#pragma once

// Textual conjunctive query dialect.
//
//   query    = atom { conj atom } ;
//   conj     = "," | "AND" ;                 (* AND is case-insensitive *)
//   atom     = ident "(" arg { "," arg } ")" ;
//   arg      = simple | ident "(" simple { "," simple } ")" ;
//   simple   = variable | ident | integer | string ;
//   variable = "?" ( letter | "_" ) { letter | digit | "_" } ;
//
// Function terms nest one level only. See docs/query_grammar.md.

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "ontoneg/knowledge_store.hpp"

namespace ontoneg::query {

using SimpleArg = std::variant<kb::Variable, kb::Value>;

struct FunctionTerm {
  std::string function;
  std::vector<SimpleArg> args;
  bool operator==(const FunctionTerm&) const = default;
};

using Argument = std::variant<kb::Variable, kb::Value, FunctionTerm>;

struct Atom {
  std::string predicate;
  std::vector<Argument> args;
  bool operator==(const Atom&) const = default;
};

struct QueryAst {
  std::vector<Atom> atoms;
  bool operator==(const QueryAst&) const = default;
};

enum class ParseErrc { Syntax, NestingTooDeep, EmptyArguments, EmptyInput };

class ParseError : public std::runtime_error {
 public:
  ParseError(ParseErrc code, std::size_t line, std::size_t column,
             const std::string& what);
  ParseErrc code() const noexcept { return code_; }
  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }

 private:
  ParseErrc code_;
  std::size_t line_;
  std::size_t column_;
};

class FlattenError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

QueryAst parse(std::string_view text);

// Canonical text form; parse(to_string(ast)) == ast.
std::string to_string(const QueryAst& ast);

// Desugars function terms into relational patterns. Each f(a, b) becomes a
// fresh variable ?_gN plus a pattern f(a, b, ?_gN) emitted before the atom
// that uses it. A unary atom P(x) is read functionally and gets a fresh
// answer variable appended: P(x, ?_gN). Numbering runs left to right.
std::vector<kb::Pattern> flatten(const QueryAst& ast);

inline std::vector<kb::Pattern> compile(std::string_view text) {
  return flatten(parse(text));
}

}  // namespace ontoneg::query
