#include "lsc/logmaker.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <sstream>

#include <json.hpp>

#include "lsc/errors.hpp"

namespace lsc {

namespace {

using nlohmann::json;
using ordered_json = nlohmann::ordered_json;

std::int64_t round_half_even(long double x) {
  long double f = std::floor(x);
  long double frac = x - f;
  auto base = static_cast<std::int64_t>(f);
  if (frac > 0.5L) return base + 1;
  if (frac < 0.5L) return base;
  return (base % 2 == 0) ? base : base + 1;
}

long double unit_scale(TimeUnit unit) {
  switch (unit) {
    case TimeUnit::Seconds: return 1e6L;
    case TimeUnit::Milliseconds: return 1e3L;
    case TimeUnit::Microseconds: return 1.0L;
  }
  return 1.0L;
}

EventKind resolve_kind(const std::string& raw, const IngestConfig& cfg,
                       std::int64_t line_no) {
  if (auto it = cfg.kind_aliases.find(raw); it != cfg.kind_aliases.end())
    return it->second;
  if (auto k = kind_from_name(raw); k && *k != EventKind::Meta) return *k;
  throw IngestError(IngestError::Code::UnknownKind, line_no, raw);
}

std::int64_t convert_time(const json& v, const IngestConfig& cfg,
                          std::int64_t line_no) {
  long double scale = unit_scale(cfg.time_unit);
  if (v.is_number_integer()) {
    if (cfg.time_unit == TimeUnit::Microseconds) return v.get<std::int64_t>();
    return round_half_even(static_cast<long double>(v.get<std::int64_t>()) * scale);
  }
  if (v.is_number_unsigned() || v.is_number_float()) {
    return round_half_even(static_cast<long double>(v.get<double>()) * scale);
  }
  throw IngestError(IngestError::Code::MalformedLine, line_no,
                    "time value is not a number");
}

void flatten_json(const json& v, const std::string& prefix,
                  std::map<std::string, Value, std::less<>>& out,
                  std::int64_t line_no) {
  if (v.is_object()) {
    for (const auto& [key, child] : v.items()) {
      if (key.empty())
        throw IngestError(IngestError::Code::MalformedLine, line_no,
                          "empty field name");
      flatten_json(child, prefix.empty() ? key : prefix + "." + key, out, line_no);
    }
    return;
  }
  if (v.is_array()) {
    for (std::size_t i = 0; i < v.size(); ++i)
      flatten_json(v[i], prefix + "." + std::to_string(i), out, line_no);
    return;
  }
  if (v.is_null()) return;  // null means "field absent"
  if (is_reserved_field(prefix))
    throw IngestError(IngestError::Code::MalformedLine, line_no,
                      "field name '" + prefix + "' is reserved");
  Value value;
  if (v.is_string()) value = Value::text(v.get<std::string>());
  else if (v.is_boolean()) value = Value::boolean(v.get<bool>());
  else if (v.is_number_integer()) value = Value::integer(v.get<std::int64_t>());
  else value = Value::real(v.get<double>());
  if (!out.emplace(prefix, std::move(value)).second)
    throw IngestError(IngestError::Code::MalformedLine, line_no,
                      "duplicate field '" + prefix + "' after flattening");
}

Event event_from_record(const json& record, const IngestConfig& cfg,
                        std::int64_t line_no) {
  if (!record.is_object())
    throw IngestError(IngestError::Code::MalformedLine, line_no,
                      "record is not an object");
  Event e;
  bool have_kind = false, have_time = false;
  json rest = json::object();
  for (const auto& [key, v] : record.items()) {
    if (key == cfg.kind_field) {
      if (!v.is_string())
        throw IngestError(IngestError::Code::UnknownKind, line_no, v.dump());
      e.kind = resolve_kind(v.get<std::string>(), cfg, line_no);
      have_kind = true;
    } else if (key == cfg.time_field) {
      e.time_us = convert_time(v, cfg, line_no);
      have_time = true;
    } else if (key == kIndexField) {
      // Canonical output carries an index; it is re-derived at finalize.
      continue;
    } else {
      rest[key] = v;
    }
  }
  if (!have_kind)
    throw IngestError(IngestError::Code::UnknownKind, line_no, "(missing)");
  if (!have_time)
    throw IngestError(IngestError::Code::MissingTime, line_no, cfg.time_field);
  flatten_json(rest, "", e.fields, line_no);
  return e;
}

// Splits one CSV line; supports quoted cells with doubled quotes.
std::vector<std::string> split_csv_line(const std::string& line,
                                        std::int64_t line_no) {
  std::vector<std::string> cells;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur += c;
      }
    } else if (c == '"') {
      if (!cur.empty())
        throw IngestError(IngestError::Code::MalformedLine, line_no,
                          "unexpected quote");
      quoted = true;
    } else if (c == ',') {
      cells.push_back(std::move(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (quoted)
    throw IngestError(IngestError::Code::MalformedLine, line_no,
                      "unterminated quote");
  cells.push_back(std::move(cur));
  return cells;
}

bool parse_full_int(const std::string& s, std::int64_t& out) {
  if (s.empty()) return false;
  errno = 0;
  char* end = nullptr;
  long long v = std::strtoll(s.c_str(), &end, 10);
  if (errno != 0 || end != s.c_str() + s.size()) return false;
  out = v;
  return true;
}

bool parse_full_double(const std::string& s, double& out) {
  if (s.empty()) return false;
  errno = 0;
  char* end = nullptr;
  double v = std::strtod(s.c_str(), &end);
  if (errno != 0 || end != s.c_str() + s.size()) return false;
  if (std::isnan(v) || std::isinf(v)) return false;
  out = v;
  return true;
}

json csv_cell_to_json(const std::string& cell, bool was_quoted) {
  if (!was_quoted) {
    if (cell == "true") return json(true);
    if (cell == "false") return json(false);
    std::int64_t i;
    if (parse_full_int(cell, i)) return json(i);
    double d;
    if (parse_full_double(cell, d)) return json(d);
  }
  return json(cell);
}

std::string strip_cr(std::string line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return line;
}

}  // namespace

IngestError::IngestError(Code code, std::int64_t line_no, std::string detail)
    : Error("line " + std::to_string(line_no) + ": " +
            (code == Code::MalformedLine  ? "malformed record"
             : code == Code::UnknownKind  ? "unknown event kind"
                                          : "missing time field") +
            (detail.empty() ? "" : " (" + detail + ")")),
      code_(code),
      line_no_(line_no),
      detail_(std::move(detail)) {}

AlignError::AlignError(Code code, std::string detail)
    : Error(code == Code::InsufficientAnchors
                ? "clock alignment needs at least 2 anchors"
                : "clock anchors out of order: " + detail),
      code_(code) {}

std::vector<Event> ingest(std::istream& in, const IngestConfig& cfg) {
  std::vector<Event> events;
  std::string line;
  std::int64_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    line = strip_cr(line);
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    json record;
    try {
      record = json::parse(line);
    } catch (const json::exception& ex) {
      throw IngestError(IngestError::Code::MalformedLine, line_no, ex.what());
    }
    events.push_back(event_from_record(record, cfg, line_no));
  }
  return events;
}

std::vector<Event> ingest(const std::string& text, const IngestConfig& cfg) {
  std::istringstream in(text);
  return ingest(in, cfg);
}

std::vector<Event> ingest_csv(std::istream& in, const IngestConfig& cfg) {
  std::string line;
  std::int64_t line_no = 0;
  std::vector<std::string> header;
  std::vector<Event> events;
  while (std::getline(in, line)) {
    ++line_no;
    line = strip_cr(line);
    if (line.empty()) continue;
    // Quoted-cell detection feeds the "quoted text stays text" rule.
    std::vector<bool> quoted;
    {
      quoted.reserve(8);
      bool in_quote = false;
      bool cell_quoted = false;
      for (char c : line) {
        if (c == '"') {
          in_quote = !in_quote;
          cell_quoted = true;
        } else if (c == ',' && !in_quote) {
          quoted.push_back(cell_quoted);
          cell_quoted = false;
        }
      }
      quoted.push_back(cell_quoted);
    }
    auto cells = split_csv_line(line, line_no);
    if (header.empty()) {
      header = cells;
      for (const auto& h : header)
        if (h.empty())
          throw IngestError(IngestError::Code::MalformedLine, line_no,
                            "empty column name");
      continue;
    }
    if (cells.size() != header.size())
      throw IngestError(IngestError::Code::MalformedLine, line_no,
                        "expected " + std::to_string(header.size()) +
                            " cells, got " + std::to_string(cells.size()));
    json record = json::object();
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (cells[i].empty() && !quoted[i]) continue;  // absent field
      record[header[i]] = csv_cell_to_json(cells[i], quoted[i]);
    }
    events.push_back(event_from_record(record, cfg, line_no));
  }
  return events;
}

std::vector<Event> ingest_csv(const std::string& text, const IngestConfig& cfg) {
  std::istringstream in(text);
  return ingest_csv(in, cfg);
}

std::vector<Event> time_align(std::vector<Event> events,
                              const std::vector<ClockAnchor>& anchors) {
  if (anchors.size() < 2)
    throw AlignError(AlignError::Code::InsufficientAnchors, "");
  for (std::size_t i = 1; i < anchors.size(); ++i) {
    if (anchors[i].ground_time_us <= anchors[i - 1].ground_time_us ||
        anchors[i].canonical_time_us < anchors[i - 1].canonical_time_us)
      throw AlignError(AlignError::Code::BadAnchorOrder,
                       "anchor " + std::to_string(i));
  }
  auto interpolate = [&](std::int64_t t) {
    std::size_t seg = 0;
    if (t >= anchors.back().ground_time_us) {
      seg = anchors.size() - 2;
    } else {
      while (seg + 2 < anchors.size() && t > anchors[seg + 1].ground_time_us) ++seg;
    }
    const auto& a = anchors[seg];
    const auto& b = anchors[seg + 1];
    long double slope =
        static_cast<long double>(b.canonical_time_us - a.canonical_time_us) /
        static_cast<long double>(b.ground_time_us - a.ground_time_us);
    long double mapped = static_cast<long double>(a.canonical_time_us) +
                         static_cast<long double>(t - a.ground_time_us) * slope;
    return round_half_even(mapped);
  };
  for (auto& e : events) e.time_us = interpolate(e.time_us);
  return events;
}

Log finalize(std::vector<Event> events, std::string source_id,
             FinalizeStats* stats) {
  std::stable_sort(events.begin(), events.end(),
                   [](const Event& a, const Event& b) { return a.time_us < b.time_us; });
  if (stats) {
    stats->tie_groups = 0;
    for (std::size_t i = 1; i < events.size(); ++i) {
      if (events[i].time_us == events[i - 1].time_us &&
          (i < 2 || events[i - 1].time_us != events[i - 2].time_us))
        ++stats->tie_groups;
    }
  }

  std::int64_t begin_time = events.empty() ? 0 : events.front().time_us;
  std::int64_t end_time = events.empty() ? 0 : events.back().time_us;

  Log log;
  log.source_id = std::move(source_id);
  log.events.reserve(events.size() + 2);

  Event begin_marker;
  begin_marker.kind = EventKind::Meta;
  begin_marker.time_us = begin_time;
  begin_marker.fields.emplace("name", Value::text("LOG_BEGIN"));
  log.events.push_back(std::move(begin_marker));

  for (auto& e : events) log.events.push_back(std::move(e));

  Event end_marker;
  end_marker.kind = EventKind::Meta;
  end_marker.time_us = end_time;
  end_marker.fields.emplace("name", Value::text("LOG_END"));
  log.events.push_back(std::move(end_marker));

  for (std::size_t i = 0; i < log.events.size(); ++i)
    log.events[i].index = static_cast<std::int64_t>(i);
  return log;
}

std::string serialize_event(const Event& e) {
  ordered_json out;
  out["kind"] = std::string(kind_name(e.kind));
  out["time"] = e.time_us;
  out["index"] = e.index;
  for (const auto& [name, value] : e.fields) {  // std::map is already sorted
    switch (value.type()) {
      case Value::Type::Text: out[name] = value.as_text(); break;
      case Value::Type::Integer: out[name] = value.as_integer(); break;
      case Value::Type::Float: out[name] = value.as_float(); break;
      case Value::Type::Boolean: out[name] = value.as_boolean(); break;
    }
  }
  return out.dump();
}

std::string serialize_log(const Log& log) {
  std::string out;
  for (const auto& e : log.events) {
    out += serialize_event(e);
    out += '\n';
  }
  return out;
}

}  // namespace lsc
