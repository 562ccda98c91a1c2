#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "lsc/event.hpp"

namespace lsc {

enum class TimeUnit { Seconds, Milliseconds, Microseconds };

// How raw records map onto Events. kind_field/time_field name the record
// keys holding the event kind and timestamp; everything else becomes a
// flattened field.
struct IngestConfig {
  std::string kind_field = "kind";
  std::string time_field = "time";
  std::map<std::string, EventKind> kind_aliases;  // raw value -> kind (non-META)
  TimeUnit time_unit = TimeUnit::Microseconds;
};

// One ground-to-canonical clock correspondence point.
struct ClockAnchor {
  std::int64_t ground_time_us = 0;
  std::int64_t canonical_time_us = 0;
};

// Parses JSON-lines input: one object per line, nested objects/arrays
// flattened with '.' separators. Events come back unsorted, index unset.
// Throws IngestError.
std::vector<Event> ingest(std::istream& in, const IngestConfig& cfg = {});
std::vector<Event> ingest(const std::string& text, const IngestConfig& cfg = {});

// CSV adapter: first row is the header; cells parse as integer/float/boolean
// when they look like one, text otherwise. Empty cells are absent fields.
std::vector<Event> ingest_csv(std::istream& in, const IngestConfig& cfg = {});
std::vector<Event> ingest_csv(const std::string& text, const IngestConfig& cfg = {});

// Remaps every event time by piecewise-linear interpolation over the
// anchors (extrapolating the nearest segment outside their range).
// Rounds to the nearest microsecond, ties to even. Throws AlignError.
std::vector<Event> time_align(std::vector<Event> events,
                              const std::vector<ClockAnchor>& anchors);

struct FinalizeStats {
  std::int64_t tie_groups = 0;  // groups of events sharing a timestamp
};

// Stable-sorts by time (input order breaks ties), assigns 0-based indices,
// and wraps the sequence in LOG_BEGIN / LOG_END meta events.
Log finalize(std::vector<Event> events, std::string source_id,
             FinalizeStats* stats = nullptr);

// Canonical JSON-lines form of a finalized log: keys kind, time, index,
// then fields in lexicographic order. Byte-stable.
std::string serialize_log(const Log& log);
std::string serialize_event(const Event& e);

}  // namespace lsc
