#pragma once

#include <memory>
#include <regex>
#include <string>
#include <variant>
#include <vector>

#include "lsc/event.hpp"
#include "lsc/value.hpp"

namespace lsc {

enum class CompareOp { Lt, Le, Gt, Ge, Ne };

std::string_view compare_op_text(CompareOp op);

// Field matchers. A bare identifier binds the variable on first occurrence
// and equality-checks afterwards; `matches` is an anchored full-match regex.
struct LiteralMatcher {
  Value value;
  bool operator==(const LiteralMatcher&) const = default;
};

struct BindMatcher {
  std::string var;
  bool operator==(const BindMatcher&) const = default;
};

struct CompareMatcher {
  CompareOp op;
  Value rhs;
  bool operator==(const CompareMatcher&) const = default;
};

struct RegexMatcher {
  std::string pattern;
  // Compiled once at construction; equality is on the source pattern.
  std::shared_ptr<const std::regex> compiled;

  static RegexMatcher make(std::string pattern);  // throws std::regex_error
  bool operator==(const RegexMatcher& o) const { return pattern == o.pattern; }
};

struct VarRef {
  std::string var;
  bool operator==(const VarRef&) const = default;
};
using PredicateArg = std::variant<Value, VarRef>;

struct PredicateMatcher {
  std::string name;
  std::vector<PredicateArg> args;
  bool operator==(const PredicateMatcher&) const = default;
};

using Matcher = std::variant<LiteralMatcher, BindMatcher, CompareMatcher,
                             RegexMatcher, PredicateMatcher>;

struct FieldConstraint {
  std::string field;
  Matcher matcher;
  bool operator==(const FieldConstraint&) const = default;
};

struct EventConstraint {
  EventKind kind = EventKind::Evr;  // never META
  std::vector<FieldConstraint> fields;
  bool operator==(const EventConstraint&) const = default;
};

// Consequence tree. Forbid wraps a single constraint (negation is leaf-only);
// Ordered/Unordered children are nonempty.
struct ConsequenceNode {
  enum class Type { Require, Forbid, Ordered, Unordered };

  Type type = Type::Require;
  EventConstraint constraint;           // leaves only
  std::vector<ConsequenceNode> children;  // scopes only

  static ConsequenceNode require(EventConstraint c);
  static ConsequenceNode forbid(EventConstraint c);
  static ConsequenceNode ordered(std::vector<ConsequenceNode> kids);
  static ConsequenceNode unordered(std::vector<ConsequenceNode> kids);

  bool is_leaf() const { return type == Type::Require || type == Type::Forbid; }
  bool operator==(const ConsequenceNode&) const = default;
};

struct Pattern {
  std::string name;
  EventConstraint trigger;
  ConsequenceNode consequence;
  bool operator==(const Pattern&) const = default;
};

struct Spec {
  std::vector<Pattern> patterns;
  bool operator==(const Spec&) const = default;
};

// Parses pattern-language text into a Spec. Performs binding analysis:
// every variable reference must be bound by the trigger or an earlier
// Require along the same ordered path. Throws SpecError.
Spec parse_spec(std::string_view text);

// Canonical text; parse_spec(pretty_print(s)) is structurally equal to s.
std::string pretty_print(const Spec& spec);
std::string constraint_to_string(const EventConstraint& c);

}  // namespace lsc
