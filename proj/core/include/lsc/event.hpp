#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "lsc/value.hpp"

namespace lsc {

// META never appears in raw input; it is injected by the log normalizer.
enum class EventKind { Command, Product, Channel, Change, Evr, Meta };

std::string_view kind_name(EventKind kind);
std::optional<EventKind> kind_from_name(std::string_view name);

// Reserved field names; they resolve through event_get but never live in
// Event::fields.
inline constexpr std::string_view kKindField = "kind";
inline constexpr std::string_view kTimeField = "time";
inline constexpr std::string_view kIndexField = "index";

bool is_reserved_field(std::string_view name);

struct Event {
  EventKind kind = EventKind::Meta;
  std::int64_t time_us = 0;   // canonical timestamp, microseconds
  std::int64_t index = -1;    // position in the finalized Log; -1 = unset
  std::map<std::string, Value, std::less<>> fields;

  bool operator==(const Event&) const = default;
};

// A finalized, time-ordered event sequence with stable indices.
struct Log {
  std::vector<Event> events;
  std::string source_id;

  std::size_t size() const { return events.size(); }
};

// Total lookup: resolves reserved names (kind/time/index) and plain fields;
// absent names yield empty.
std::optional<Value> event_get(const Event& e, std::string_view name);

// True iff kinds match and every listed field agrees (both absent counts
// as agreement). Storage equality; an equivalence relation for a fixed list.
bool event_equal_under(const Event& a, const Event& b,
                       std::span<const std::string> fields);

}  // namespace lsc
