#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "lsc/event.hpp"

namespace lsc {

// Which fields participate in event equality, per kind, and which kinds
// survive abstraction at all. META events are always dropped.
struct EqualityConfig {
  std::map<EventKind, std::vector<std::string>> fields;
  std::set<EventKind> include_kinds;

  static EqualityConfig all_kinds();  // every non-META kind, kind-only symbols

  bool operator==(const EqualityConfig&) const = default;
};

// Equality-quotiented event: the configured projection of one raw event.
// A missing field projects to ABSENT (distinct from empty text).
struct AbstractEvent {
  EventKind kind = EventKind::Evr;
  std::vector<std::pair<std::string, std::optional<Value>>> projection;

  bool operator==(const AbstractEvent&) const = default;
  bool operator<(const AbstractEvent& o) const;

  std::string to_display() const;
};

using AbstractTrace = std::vector<AbstractEvent>;

struct LearnedModel {
  EqualityConfig config;
  std::set<AbstractTrace> traces;
  bool endorsed = false;
  std::vector<std::string> provenance;

  bool operator==(const LearnedModel&) const = default;
};

struct DiffReport {
  bool matched = false;
  bool model_endorsed = false;
  // Mismatch details against the closest stored trace (maximal common
  // prefix; ties to the shorter, then lexicographically smaller trace).
  std::size_t divergence_index = 0;
  std::optional<AbstractEvent> expected;  // empty = expected end of trace
  std::optional<AbstractEvent> observed;  // empty = log ended early
  std::optional<std::int64_t> observed_log_index;
};

// Filters to include_kinds, drops META, and projects each event.
AbstractTrace project(const Log& log, const EqualityConfig& cfg);

// Records the set of distinct abstract traces. Throws ModelError on empty
// input.
LearnedModel learn(const std::vector<Log>& logs, const EqualityConfig& cfg);

// Membership check with first-divergence reporting.
DiffReport diff(const LearnedModel& model, const Log& log);

// Marks the model as user-approved; idempotent.
LearnedModel endorse(LearnedModel model);

// Stable JSON document {config, endorsed, provenance, traces}; hand-editable
// and byte-stable under a serialize/parse round trip.
std::string serialize_model(const LearnedModel& model);
LearnedModel parse_model(const std::string& text);  // throws ModelError

// Equality-config JSON: {"include_kinds": [...], "fields": {kind: [...]}}.
EqualityConfig parse_equality_config(const std::string& text);
std::string serialize_equality_config(const EqualityConfig& cfg);

}  // namespace lsc
