#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "lsc/spec.hpp"

namespace lsc {

// ALWAYS re-arms on every match and spawns a monitored instance.
// HOT must complete before end of log (else MissingEvent).
// WATCH reports ForbiddenEvent if it ever matches while active.
enum class StateKind { Always, Hot, Watch };

std::string_view state_kind_name(StateKind k);

struct AutoState {
  std::string id;            // "<pattern>/<ast path>"
  StateKind kind = StateKind::Hot;
  EventConstraint guard;
  std::vector<std::string> on_match;  // successor ids, spawned conjunctively
  // For WATCH states closed by a sibling Require leaf: that leaf's guard.
  std::optional<EventConstraint> deactivate_on;
  std::string origin;        // path into the source pattern, for reporting
};

// Static consequence-tree node used by the runtime for chain advancement,
// scope joins, and watch-window closure. Index 0 is the consequence root.
struct PlanNode {
  enum class Type { Require, Forbid, Ordered, Unordered };

  Type type = Type::Require;
  std::string path;               // "c", "c.0", "c.1.0", ...
  std::string state_id;           // leaves only
  std::vector<int> children;      // scopes only
  int parent = -1;
  int index_in_parent = -1;
  // True when the subtree contains no Require: it completes at activation.
  bool immediate = false;
  // For any node: index of the chain sibling whose completion this node's
  // watches wait on. For Forbid nodes: the closer of the watch itself.
  int closer = -1;
};

struct Automaton {
  std::string pattern_name;
  EventConstraint trigger;
  ConsequenceNode consequence;        // retained for reporting
  std::map<std::string, AutoState> states;
  std::vector<std::string> initial;   // ALWAYS state ids
  std::vector<PlanNode> plan;         // runtime activation structure
  std::string trigger_state_id;

  const AutoState& state(const std::string& id) const { return states.at(id); }
};

}  // namespace lsc
