#include "lsc/compiler.hpp"

#include <algorithm>
#include <cassert>

#include "lsc/errors.hpp"

namespace lsc {

namespace {

// ---- plan construction -------------------------------------------------

int build_plan(const ConsequenceNode& n, std::vector<PlanNode>& plan,
               const std::string& path, int parent, int index_in_parent) {
  int idx = static_cast<int>(plan.size());
  plan.emplace_back();
  plan[idx].path = path;
  plan[idx].parent = parent;
  plan[idx].index_in_parent = index_in_parent;
  switch (n.type) {
    case ConsequenceNode::Type::Require:
      plan[idx].type = PlanNode::Type::Require;
      plan[idx].immediate = false;
      break;
    case ConsequenceNode::Type::Forbid:
      plan[idx].type = PlanNode::Type::Forbid;
      plan[idx].immediate = true;
      break;
    case ConsequenceNode::Type::Ordered:
    case ConsequenceNode::Type::Unordered: {
      plan[idx].type = n.type == ConsequenceNode::Type::Ordered
                           ? PlanNode::Type::Ordered
                           : PlanNode::Type::Unordered;
      bool immediate = true;
      for (std::size_t i = 0; i < n.children.size(); ++i) {
        int child = build_plan(n.children[i], plan,
                               path + "." + std::to_string(i), idx,
                               static_cast<int>(i));
        plan[idx].children.push_back(child);
        immediate = immediate && plan[child].immediate;
      }
      plan[idx].immediate = immediate;
      break;
    }
  }
  return idx;
}

// Leaves activated the moment `idx` activates: for an ordered scope that is
// every leading child up to and including the first one that must wait.
void entry_leaves(const std::vector<PlanNode>& plan, int idx,
                  std::vector<int>& out) {
  const PlanNode& n = plan[idx];
  switch (n.type) {
    case PlanNode::Type::Require:
    case PlanNode::Type::Forbid:
      out.push_back(idx);
      break;
    case PlanNode::Type::Unordered:
      for (int c : n.children) entry_leaves(plan, c, out);
      break;
    case PlanNode::Type::Ordered:
      for (int c : n.children) {
        entry_leaves(plan, c, out);
        if (!plan[c].immediate) break;
      }
      break;
  }
}

// Leaves whose completion can be the completing event of `idx`.
void completer_leaves(const std::vector<PlanNode>& plan, int idx,
                      std::vector<int>& out) {
  const PlanNode& n = plan[idx];
  switch (n.type) {
    case PlanNode::Type::Require:
      out.push_back(idx);
      break;
    case PlanNode::Type::Forbid:
      break;
    case PlanNode::Type::Ordered: {
      for (auto it = n.children.rbegin(); it != n.children.rend(); ++it) {
        if (!plan[*it].immediate) {
          completer_leaves(plan, *it, out);
          break;
        }
      }
      break;
    }
    case PlanNode::Type::Unordered:
      for (int c : n.children)
        if (!plan[c].immediate) completer_leaves(plan, c, out);
      break;
  }
}

// Leaves activated when the ordered child at position `pos` completes.
std::vector<int> chain_successors(const std::vector<PlanNode>& plan, int ordered,
                                  int pos) {
  std::vector<int> out;
  const auto& children = plan[ordered].children;
  for (std::size_t j = pos + 1; j < children.size(); ++j) {
    entry_leaves(plan, children[j], out);
    if (!plan[children[j]].immediate) break;
  }
  return out;
}

void assign_closers(std::vector<PlanNode>& plan, int idx) {
  PlanNode& n = plan[idx];
  if (n.type == PlanNode::Type::Ordered) {
    // A non-final forbid (or any node's watches) waits for the next sibling
    // that completes at an event; pure-forbid siblings never close anything.
    for (std::size_t i = 0; i < n.children.size(); ++i) {
      int closer = -1;
      for (std::size_t j = i + 1; j < n.children.size(); ++j) {
        if (!plan[n.children[j]].immediate) {
          closer = n.children[j];
          break;
        }
      }
      plan[n.children[i]].closer = closer;
    }
  }
  for (int c : n.children) assign_closers(plan, c);
}

void validate_constraint_predicates(const EventConstraint& c,
                                    const PredicateRegistry& preds) {
  for (const auto& fc : c.fields) {
    if (const auto* pm = std::get_if<PredicateMatcher>(&fc.matcher)) {
      const auto* entry = preds.find(pm->name);
      if (!entry) throw CompileError::unknown_predicate(pm->name);
      std::size_t got = 1 + pm->args.size();  // field value is argument 0
      if (entry->arity != got)
        throw CompileError::arity_mismatch(pm->name, entry->arity, got);
    }
  }
}

void validate_predicates(const ConsequenceNode& n, const PredicateRegistry& preds) {
  if (n.is_leaf()) {
    validate_constraint_predicates(n.constraint, preds);
    return;
  }
  for (const auto& child : n.children) validate_predicates(child, preds);
}

const ConsequenceNode* node_at(const ConsequenceNode& root,
                               const std::vector<PlanNode>& plan, int idx) {
  // Recover the AST node for a plan index by walking index_in_parent links.
  std::vector<int> rev;
  for (int cur = idx; cur != 0; cur = plan[cur].parent)
    rev.push_back(plan[cur].index_in_parent);
  const ConsequenceNode* node = &root;
  for (auto it = rev.rbegin(); it != rev.rend(); ++it)
    node = &node->children[static_cast<std::size_t>(*it)];
  return node;
}

std::string escape_dot(std::string_view s) {
  std::string out;
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out;
}

}  // namespace

std::string_view state_kind_name(StateKind k) {
  switch (k) {
    case StateKind::Always: return "ALWAYS";
    case StateKind::Hot: return "HOT";
    case StateKind::Watch: return "WATCH";
  }
  return "HOT";
}

CompileError CompileError::unknown_predicate(const std::string& name) {
  CompileError e(Code::UnknownPredicate, "unknown predicate '" + name + "'");
  e.name_ = name;
  return e;
}

CompileError CompileError::arity_mismatch(const std::string& name,
                                          std::size_t expected, std::size_t got) {
  CompileError e(Code::ArityMismatch,
                 "predicate '" + name + "' expects " + std::to_string(expected) +
                     " argument(s) including the field value, got " +
                     std::to_string(got));
  e.name_ = name;
  return e;
}

PredicateError::PredicateError(const std::string& name, const std::string& cause)
    : Error("predicate '" + name + "' failed: " + cause), name_(name) {}

std::vector<Automaton> compile(const Spec& spec, const PredicateRegistry& preds) {
  std::vector<Automaton> out;
  out.reserve(spec.patterns.size());
  for (const auto& p : spec.patterns) {
    validate_constraint_predicates(p.trigger, preds);
    validate_predicates(p.consequence, preds);

    Automaton a;
    a.pattern_name = p.name;
    a.trigger = p.trigger;
    a.consequence = p.consequence;
    build_plan(p.consequence, a.plan, "c", -1, -1);
    assign_closers(a.plan, 0);

    auto state_id = [&](int idx) { return p.name + "/" + a.plan[idx].path; };

    for (std::size_t i = 0; i < a.plan.size(); ++i) {
      PlanNode& n = a.plan[i];
      if (n.type != PlanNode::Type::Require && n.type != PlanNode::Type::Forbid)
        continue;
      n.state_id = state_id(static_cast<int>(i));
      AutoState s;
      s.id = n.state_id;
      s.kind = n.type == PlanNode::Type::Require ? StateKind::Hot : StateKind::Watch;
      s.guard = node_at(p.consequence, a.plan, static_cast<int>(i))->constraint;
      s.origin = n.path;
      if (n.type == PlanNode::Type::Forbid && n.closer >= 0 &&
          a.plan[n.closer].type == PlanNode::Type::Require)
        s.deactivate_on = node_at(p.consequence, a.plan, n.closer)->constraint;
      a.states.emplace(s.id, std::move(s));
    }

    a.trigger_state_id = p.name + "/trigger";
    AutoState trig;
    trig.id = a.trigger_state_id;
    trig.kind = StateKind::Always;
    trig.guard = p.trigger;
    trig.origin = "trigger";
    std::vector<int> entry;
    entry_leaves(a.plan, 0, entry);
    for (int idx : entry) trig.on_match.push_back(state_id(idx));
    a.states.emplace(trig.id, std::move(trig));
    a.initial.push_back(a.trigger_state_id);

    // Chain succession edges: completing leaves spawn the next element.
    for (std::size_t i = 0; i < a.plan.size(); ++i) {
      if (a.plan[i].type != PlanNode::Type::Ordered) continue;
      const auto& children = a.plan[i].children;
      for (std::size_t pos = 0; pos < children.size(); ++pos) {
        if (a.plan[children[pos]].immediate) continue;
        auto next = chain_successors(a.plan, static_cast<int>(i),
                                     static_cast<int>(pos));
        if (next.empty()) continue;
        std::vector<int> completers;
        completer_leaves(a.plan, children[pos], completers);
        for (int leaf : completers) {
          auto& st = a.states.at(state_id(leaf));
          for (int target : next) st.on_match.push_back(state_id(target));
        }
      }
    }

    out.push_back(std::move(a));
  }
  return out;
}

std::optional<Binding> match(const EventConstraint& guard, const Event& e,
                             const Binding& binding,
                             const PredicateRegistry& preds) {
  if (e.kind != guard.kind) return std::nullopt;
  const double eps = preds.float_epsilon();
  Binding theta = binding;
  for (const auto& fc : guard.fields) {
    auto value = event_get(e, fc.field);
    if (!value) return std::nullopt;  // absent field never matches

    if (const auto* lit = std::get_if<LiteralMatcher>(&fc.matcher)) {
      if (!constraint_equal(*value, lit->value, eps)) return std::nullopt;
    } else if (const auto* bind = std::get_if<BindMatcher>(&fc.matcher)) {
      auto extended = theta.extended(bind->var, *value, eps);
      if (!extended) return std::nullopt;
      theta = std::move(*extended);
    } else if (const auto* cmp = std::get_if<CompareMatcher>(&fc.matcher)) {
      if (cmp->op == CompareOp::Ne) {
        if (constraint_equal(*value, cmp->rhs, eps)) return std::nullopt;
      } else {
        auto ord = numeric_compare(*value, cmp->rhs);
        if (!ord) return std::nullopt;
        bool ok = false;
        switch (cmp->op) {
          case CompareOp::Lt: ok = *ord < 0; break;
          case CompareOp::Le: ok = *ord <= 0; break;
          case CompareOp::Gt: ok = *ord > 0; break;
          case CompareOp::Ge: ok = *ord >= 0; break;
          case CompareOp::Ne: break;
        }
        if (!ok) return std::nullopt;
      }
    } else if (const auto* re = std::get_if<RegexMatcher>(&fc.matcher)) {
      if (!value->is_text()) return std::nullopt;
      if (!std::regex_match(value->as_text(), *re->compiled)) return std::nullopt;
    } else if (const auto* pm = std::get_if<PredicateMatcher>(&fc.matcher)) {
      const auto* entry = preds.find(pm->name);
      if (!entry) throw PredicateError(pm->name, "not registered");
      std::vector<Value> args;
      args.reserve(1 + pm->args.size());
      args.push_back(*value);
      for (const auto& arg : pm->args) {
        if (const auto* v = std::get_if<Value>(&arg)) {
          args.push_back(*v);
        } else {
          const auto& var = std::get<VarRef>(arg).var;
          const Value* bound = theta.find(var);
          if (!bound) throw PredicateError(pm->name, "variable '" + var +
                                                         "' is not bound");
          args.push_back(*bound);
        }
      }
      bool ok = false;
      try {
        ok = entry->fn(args);
      } catch (const std::exception& ex) {
        throw PredicateError(pm->name, ex.what());
      }
      if (!ok) return std::nullopt;
    }
  }
  return theta;
}

std::string to_dot(const Automaton& a) {
  std::string out = "digraph \"" + escape_dot(a.pattern_name) + "\" {\n";
  out += "  rankdir=LR;\n";
  for (const auto& [id, s] : a.states) {  // std::map: id order
    std::string label = escape_dot(s.origin) + "\\n" +
                        escape_dot(constraint_to_string(s.guard));
    out += "  \"" + escape_dot(id) + "\" [label=\"" + label + "\"";
    switch (s.kind) {
      case StateKind::Always: out += ", shape=doublecircle"; break;
      case StateKind::Hot: out += ", shape=box, style=filled, fillcolor=lightgoldenrod"; break;
      case StateKind::Watch: out += ", shape=box, style=dashed"; break;
    }
    out += "];\n";
  }
  for (const auto& [id, s] : a.states) {
    std::vector<std::string> targets = s.on_match;
    std::sort(targets.begin(), targets.end());
    targets.erase(std::unique(targets.begin(), targets.end()), targets.end());
    for (const auto& t : targets) {
      out += "  \"" + escape_dot(id) + "\" -> \"" + escape_dot(t) +
             "\" [label=\"" + escape_dot(constraint_to_string(s.guard)) + "\"];\n";
    }
  }
  out += "}\n";
  return out;
}

}  // namespace lsc
