#pragma once

#include <optional>
#include <vector>

#include "lsc/automaton.hpp"
#include "lsc/binding.hpp"
#include "lsc/predicates.hpp"

namespace lsc {

// One automaton per pattern; deterministic (state ids derive from the
// pattern name and AST path). Throws CompileError for unresolved or
// mis-applied predicates.
std::vector<Automaton> compile(const Spec& spec,
                               const PredicateRegistry& predicates = {});

// Evaluates a guard against an event under a binding. Returns the
// (possibly extended) binding on match, empty otherwise. Absent fields
// never match. Throws PredicateError if a user predicate throws.
std::optional<Binding> match(const EventConstraint& guard, const Event& e,
                             const Binding& binding,
                             const PredicateRegistry& predicates = {});

// Deterministic Graphviz rendering: ALWAYS double-circled, HOT filled,
// WATCH dashed; edges labeled with the source state's guard.
std::string to_dot(const Automaton& automaton);

}  // namespace lsc
