#include <string>

#include "lsc/spec.hpp"

namespace lsc {

namespace {

void append_matcher(std::string& out, const Matcher& m) {
  if (const auto* lit = std::get_if<LiteralMatcher>(&m)) {
    out += lit->value.to_literal();
  } else if (const auto* bind = std::get_if<BindMatcher>(&m)) {
    out += bind->var;
  } else if (const auto* cmp = std::get_if<CompareMatcher>(&m)) {
    out += compare_op_text(cmp->op);
    out += ' ';
    out += cmp->rhs.to_literal();
  } else if (const auto* re = std::get_if<RegexMatcher>(&m)) {
    out += "matches ";
    out += Value::text(re->pattern).to_literal();
  } else if (const auto* pred = std::get_if<PredicateMatcher>(&m)) {
    out += pred->name;
    out += '(';
    bool first = true;
    for (const auto& arg : pred->args) {
      if (!first) out += ", ";
      first = false;
      if (const auto* v = std::get_if<Value>(&arg)) out += v->to_literal();
      else out += std::get<VarRef>(arg).var;
    }
    out += ')';
  }
}

void append_constraint(std::string& out, const EventConstraint& c) {
  out += kind_name(c.kind);
  out += '{';
  bool first = true;
  for (const auto& fc : c.fields) {
    if (!first) out += ", ";
    first = false;
    out += fc.field;
    out += ": ";
    append_matcher(out, fc.matcher);
  }
  out += '}';
}

void append_node(std::string& out, const ConsequenceNode& n, int indent) {
  std::string pad(static_cast<std::size_t>(indent) * 2, ' ');
  switch (n.type) {
    case ConsequenceNode::Type::Require:
      out += pad;
      append_constraint(out, n.constraint);
      break;
    case ConsequenceNode::Type::Forbid:
      out += pad + "not ";
      append_constraint(out, n.constraint);
      break;
    case ConsequenceNode::Type::Ordered:
    case ConsequenceNode::Type::Unordered: {
      bool ordered = n.type == ConsequenceNode::Type::Ordered;
      out += pad;
      out += ordered ? '[' : '{';
      out += '\n';
      for (std::size_t i = 0; i < n.children.size(); ++i) {
        append_node(out, n.children[i], indent + 1);
        if (i + 1 < n.children.size()) out += ',';
        out += '\n';
      }
      out += pad;
      out += ordered ? ']' : '}';
      break;
    }
  }
}

}  // namespace

std::string_view compare_op_text(CompareOp op) {
  switch (op) {
    case CompareOp::Lt: return "<";
    case CompareOp::Le: return "<=";
    case CompareOp::Gt: return ">";
    case CompareOp::Ge: return ">=";
    case CompareOp::Ne: return "!=";
  }
  return "<";
}

std::string constraint_to_string(const EventConstraint& c) {
  std::string out;
  append_constraint(out, c);
  return out;
}

std::string pretty_print(const Spec& spec) {
  std::string out;
  bool first = true;
  for (const auto& p : spec.patterns) {
    if (!first) out += '\n';
    first = false;
    out += "pattern " + p.name + ":\n  ";
    append_constraint(out, p.trigger);
    out += " =>\n";
    append_node(out, p.consequence, 2);
    out += '\n';
  }
  return out;
}

}  // namespace lsc
