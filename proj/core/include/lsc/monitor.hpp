#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "lsc/automaton.hpp"
#include "lsc/binding.hpp"
#include "lsc/compiler.hpp"
#include "lsc/event.hpp"
#include "lsc/predicates.hpp"

namespace lsc {

// A live automaton state waiting on events: HOT awaiting completion or
// WATCH guarding against a forbidden match.
struct Obligation {
  std::string state_id;
  Binding binding;
  std::int64_t activated_at = 0;  // index of the event that activated it
  std::string origin;             // AST path
};

enum class ViolationKind { MissingEvent, ForbiddenEvent };

std::string_view violation_kind_name(ViolationKind k);

struct Violation {
  std::string pattern;
  ViolationKind kind = ViolationKind::MissingEvent;
  std::int64_t trigger_index = 0;
  Binding binding;
  std::string obligation_origin;
  std::optional<std::int64_t> offending_index;  // ForbiddenEvent only
  std::string message;
  // For log references in the text report; not part of the JSON contract.
  std::int64_t trigger_time_us = 0;
  std::int64_t offending_time_us = 0;
};

struct PatternStats {
  std::string pattern;
  std::int64_t triggers = 0;
  std::int64_t satisfied = 0;
  std::int64_t violated = 0;
};

struct Report {
  std::string source_id;
  std::vector<PatternStats> patterns;
  std::vector<Violation> violations;

  bool pass() const { return violations.empty(); }
};

// Streams a log through compiled automata. Single-owner; distinct sessions
// over the same automata may run in parallel.
class Session {
 public:
  explicit Session(std::shared_ptr<const std::vector<Automaton>> automata,
                   PredicateRegistry predicates = {});
  explicit Session(std::vector<Automaton> automata,
                   PredicateRegistry predicates = {});
  ~Session();

  Session(Session&&) noexcept;
  Session& operator=(Session&&) noexcept;
  Session(const Session&) = delete;
  Session& operator=(const Session&) = delete;

  // Feed events in log order. Returns violations detected on this event.
  std::vector<Violation> step(const Event& e);

  // End of log: live HOT obligations become MissingEvent violations,
  // live WATCH obligations retire satisfied.
  Report finish(std::string source_id = {});

  std::vector<Obligation> live_obligations() const;
  std::size_t live_obligation_count() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

inline Session new_session(std::vector<Automaton> automata,
                           PredicateRegistry predicates = {}) {
  return Session(std::move(automata), std::move(predicates));
}

// Convenience: run a whole finalized log through a fresh session.
Report check(const std::vector<Automaton>& automata, const Log& log,
             const PredicateRegistry& predicates = {});

// Human-readable rendering, one block per violation with log references.
std::string report_to_text(const Report& report,
                           std::size_t max_violations = 0);
// Machine form: one JSON object; violation fields are exactly
// pattern, kind, trigger_index, offending_index, binding, message.
std::string report_to_json(const Report& report,
                           std::size_t max_violations = 0);

}  // namespace lsc
