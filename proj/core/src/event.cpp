#include "lsc/event.hpp"

namespace lsc {

std::string_view kind_name(EventKind kind) {
  switch (kind) {
    case EventKind::Command: return "COMMAND";
    case EventKind::Product: return "PRODUCT";
    case EventKind::Channel: return "CHANNEL";
    case EventKind::Change: return "CHANGE";
    case EventKind::Evr: return "EVR";
    case EventKind::Meta: return "META";
  }
  return "META";
}

std::optional<EventKind> kind_from_name(std::string_view name) {
  if (name == "COMMAND") return EventKind::Command;
  if (name == "PRODUCT") return EventKind::Product;
  if (name == "CHANNEL") return EventKind::Channel;
  if (name == "CHANGE") return EventKind::Change;
  if (name == "EVR") return EventKind::Evr;
  if (name == "META") return EventKind::Meta;
  return std::nullopt;
}

bool is_reserved_field(std::string_view name) {
  return name == kKindField || name == kTimeField || name == kIndexField;
}

std::optional<Value> event_get(const Event& e, std::string_view name) {
  if (name == kKindField) return Value::text(std::string(kind_name(e.kind)));
  if (name == kTimeField) return Value::integer(e.time_us);
  if (name == kIndexField) return Value::integer(e.index);
  auto it = e.fields.find(name);
  if (it == e.fields.end()) return std::nullopt;
  return it->second;
}

bool event_equal_under(const Event& a, const Event& b,
                       std::span<const std::string> fields) {
  if (a.kind != b.kind) return false;
  for (const auto& name : fields) {
    auto va = event_get(a, name);
    auto vb = event_get(b, name);
    if (va.has_value() != vb.has_value()) return false;
    if (va && *va != *vb) return false;
  }
  return true;
}

}  // namespace lsc
