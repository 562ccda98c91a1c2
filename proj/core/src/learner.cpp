#include "lsc/learner.hpp"

#include <algorithm>
#include <cctype>

#include <json.hpp>

#include "lsc/errors.hpp"

namespace lsc {

namespace {

using nlohmann::json;
using ordered_json = nlohmann::ordered_json;

int value_type_rank(const Value& v) { return static_cast<int>(v.type()); }

bool proj_value_less(const std::optional<Value>& a, const std::optional<Value>& b) {
  if (a.has_value() != b.has_value()) return !a.has_value();  // ABSENT first
  if (!a) return false;
  if (value_type_rank(*a) != value_type_rank(*b))
    return value_type_rank(*a) < value_type_rank(*b);
  return *a < *b;
}

json value_to_json(const Value& v) {
  switch (v.type()) {
    case Value::Type::Text: return json(v.as_text());
    case Value::Type::Integer: return json(v.as_integer());
    case Value::Type::Float: return json(v.as_float());
    case Value::Type::Boolean: return json(v.as_boolean());
  }
  return json();
}

Value value_from_json(const json& j) {
  if (j.is_string()) return Value::text(j.get<std::string>());
  if (j.is_boolean()) return Value::boolean(j.get<bool>());
  if (j.is_number_integer()) return Value::integer(j.get<std::int64_t>());
  if (j.is_number_float() || j.is_number_unsigned())
    return Value::real(j.get<double>());
  throw ModelError("unsupported value in model: " + j.dump());
}

EventKind kind_from_json(const json& j, const char* where) {
  if (!j.is_string()) throw ModelError(std::string(where) + ": kind must be a string");
  auto k = kind_from_name(j.get<std::string>());
  if (!k) throw ModelError(std::string(where) + ": unknown kind " + j.dump());
  return *k;
}

bool valid_field_name(const std::string& s) {
  if (s.empty()) return false;
  auto head = static_cast<unsigned char>(s[0]);
  if (!std::isalpha(head) && s[0] != '_') return false;
  for (char c : s) {
    auto u = static_cast<unsigned char>(c);
    if (!std::isalnum(u) && c != '_' && c != '.') return false;
  }
  return true;
}

void validate_config(const EqualityConfig& cfg) {
  if (cfg.include_kinds.empty())
    throw ModelError("equality config: include_kinds must be nonempty");
  if (cfg.include_kinds.count(EventKind::Meta))
    throw ModelError("equality config: META events are never compared");
  for (const auto& [kind, names] : cfg.fields) {
    for (const auto& name : names) {
      if (!valid_field_name(name))
        throw ModelError("equality config: invalid field name '" + name + "'");
    }
  }
}

// Projection positions paired with the raw log indices behind them.
std::vector<std::pair<AbstractEvent, std::int64_t>> project_indexed(
    const Log& log, const EqualityConfig& cfg) {
  std::vector<std::pair<AbstractEvent, std::int64_t>> out;
  static const std::vector<std::string> kNoFields;
  for (const auto& e : log.events) {
    if (e.kind == EventKind::Meta) continue;
    if (!cfg.include_kinds.count(e.kind)) continue;
    auto it = cfg.fields.find(e.kind);
    const auto& names = it == cfg.fields.end() ? kNoFields : it->second;
    AbstractEvent ae;
    ae.kind = e.kind;
    ae.projection.reserve(names.size());
    for (const auto& name : names)
      ae.projection.emplace_back(name, event_get(e, name));
    out.emplace_back(std::move(ae), e.index);
  }
  return out;
}

bool trace_less(const AbstractTrace& a, const AbstractTrace& b) {
  return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
}

}  // namespace

bool AbstractEvent::operator<(const AbstractEvent& o) const {
  if (kind != o.kind) return kind < o.kind;
  auto less = [](const std::pair<std::string, std::optional<Value>>& x,
                 const std::pair<std::string, std::optional<Value>>& y) {
    if (x.first != y.first) return x.first < y.first;
    return proj_value_less(x.second, y.second);
  };
  return std::lexicographical_compare(projection.begin(), projection.end(),
                                      o.projection.begin(), o.projection.end(),
                                      less);
}

std::string AbstractEvent::to_display() const {
  std::string out(kind_name(kind));
  out += '{';
  bool first = true;
  for (const auto& [name, value] : projection) {
    if (!first) out += ", ";
    first = false;
    out += name + ": " + (value ? value->to_literal() : "ABSENT");
  }
  out += '}';
  return out;
}

EqualityConfig EqualityConfig::all_kinds() {
  EqualityConfig cfg;
  cfg.include_kinds = {EventKind::Command, EventKind::Product, EventKind::Channel,
                       EventKind::Change, EventKind::Evr};
  return cfg;
}

AbstractTrace project(const Log& log, const EqualityConfig& cfg) {
  validate_config(cfg);
  AbstractTrace trace;
  for (auto& [ae, idx] : project_indexed(log, cfg)) trace.push_back(std::move(ae));
  return trace;
}

LearnedModel learn(const std::vector<Log>& logs, const EqualityConfig& cfg) {
  if (logs.empty()) throw ModelError("learn: need at least one log");
  validate_config(cfg);
  LearnedModel model;
  model.config = cfg;
  for (const auto& log : logs) {
    model.traces.insert(project(log, cfg));
    model.provenance.push_back(log.source_id);
  }
  return model;
}

DiffReport diff(const LearnedModel& model, const Log& log) {
  DiffReport report;
  report.model_endorsed = model.endorsed;

  auto indexed = project_indexed(log, model.config);
  AbstractTrace trace;
  trace.reserve(indexed.size());
  for (const auto& [ae, idx] : indexed) trace.push_back(ae);

  if (model.traces.count(trace)) {
    report.matched = true;
    return report;
  }

  // Closest stored trace: longest common prefix, ties to the shorter trace,
  // then to the lexicographically smaller one.
  const AbstractTrace* best = nullptr;
  std::size_t best_prefix = 0;
  for (const auto& stored : model.traces) {
    std::size_t k = 0;
    while (k < stored.size() && k < trace.size() && stored[k] == trace[k]) ++k;
    if (!best || k > best_prefix ||
        (k == best_prefix && (stored.size() < best->size() ||
                              (stored.size() == best->size() &&
                               trace_less(stored, *best))))) {
      best = &stored;
      best_prefix = k;
    }
  }

  report.matched = false;
  report.divergence_index = best_prefix;
  if (best && best_prefix < best->size()) report.expected = (*best)[best_prefix];
  if (best_prefix < trace.size()) {
    report.observed = trace[best_prefix];
    report.observed_log_index = indexed[best_prefix].second;
  }
  return report;
}

LearnedModel endorse(LearnedModel model) {
  model.endorsed = true;
  return model;
}

std::string serialize_model(const LearnedModel& model) {
  ordered_json out;
  ordered_json config;
  auto kinds = ordered_json::array();
  for (EventKind k : model.config.include_kinds)
    kinds.push_back(std::string(kind_name(k)));
  config["include_kinds"] = std::move(kinds);
  auto fields = ordered_json::object();
  for (const auto& [kind, names] : model.config.fields)
    fields[std::string(kind_name(kind))] = names;
  config["fields"] = std::move(fields);
  out["config"] = std::move(config);
  out["endorsed"] = model.endorsed;
  out["provenance"] = model.provenance;
  auto traces = ordered_json::array();
  for (const auto& trace : model.traces) {
    auto jt = ordered_json::array();
    for (const auto& ae : trace) {
      auto fields_arr = ordered_json::array();
      for (const auto& [name, value] : ae.projection) {
        fields_arr.push_back(ordered_json::array(
            {name, value ? ordered_json(value_to_json(*value))
                         : ordered_json(nullptr)}));
      }
      jt.push_back(ordered_json::array(
          {std::string(kind_name(ae.kind)), std::move(fields_arr)}));
    }
    traces.push_back(std::move(jt));
  }
  out["traces"] = std::move(traces);
  return out.dump(2) + "\n";
}

LearnedModel parse_model(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& ex) {
    throw ModelError(std::string("model is not valid JSON: ") + ex.what());
  }
  if (!doc.is_object() || !doc.contains("config") || !doc.contains("traces"))
    throw ModelError("model must be an object with config and traces");

  LearnedModel model;
  const json& config = doc["config"];
  if (!config.contains("include_kinds") || !config["include_kinds"].is_array())
    throw ModelError("config.include_kinds must be an array");
  for (const auto& k : config["include_kinds"])
    model.config.include_kinds.insert(kind_from_json(k, "include_kinds"));
  if (config.contains("fields")) {
    if (!config["fields"].is_object())
      throw ModelError("config.fields must be an object");
    for (const auto& [key, names] : config["fields"].items()) {
      auto kind = kind_from_json(json(key), "fields");
      if (!names.is_array()) throw ModelError("fields lists must be arrays");
      std::vector<std::string> list;
      for (const auto& n : names) {
        if (!n.is_string()) throw ModelError("field names must be strings");
        list.push_back(n.get<std::string>());
      }
      model.config.fields[kind] = std::move(list);
    }
  }
  validate_config(model.config);

  model.endorsed = doc.value("endorsed", false);
  if (doc.contains("provenance")) {
    for (const auto& p : doc["provenance"]) {
      if (!p.is_string()) throw ModelError("provenance entries must be strings");
      model.provenance.push_back(p.get<std::string>());
    }
  }
  if (!doc["traces"].is_array()) throw ModelError("traces must be an array");
  for (const auto& jt : doc["traces"]) {
    if (!jt.is_array()) throw ModelError("each trace must be an array");
    AbstractTrace trace;
    for (const auto& je : jt) {
      if (!je.is_array() || je.size() != 2)
        throw ModelError("each abstract event must be [kind, fields]");
      AbstractEvent ae;
      ae.kind = kind_from_json(je[0], "trace");
      if (ae.kind == EventKind::Meta)
        throw ModelError("trace: META events cannot appear in a model");
      if (!je[1].is_array()) throw ModelError("abstract event fields must be an array");
      for (const auto& jf : je[1]) {
        if (!jf.is_array() || jf.size() != 2 || !jf[0].is_string())
          throw ModelError("abstract fields must be [name, value]");
        std::optional<Value> value;
        if (!jf[1].is_null()) value = value_from_json(jf[1]);
        ae.projection.emplace_back(jf[0].get<std::string>(), std::move(value));
      }
      trace.push_back(std::move(ae));
    }
    model.traces.insert(std::move(trace));
  }
  return model;
}

EqualityConfig parse_equality_config(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& ex) {
    throw ModelError(std::string("equality config is not valid JSON: ") + ex.what());
  }
  if (!doc.is_object()) throw ModelError("equality config must be an object");
  EqualityConfig cfg;
  if (doc.contains("include_kinds")) {
    if (!doc["include_kinds"].is_array())
      throw ModelError("include_kinds must be an array");
    for (const auto& k : doc["include_kinds"])
      cfg.include_kinds.insert(kind_from_json(k, "include_kinds"));
  } else {
    cfg.include_kinds = EqualityConfig::all_kinds().include_kinds;
  }
  if (doc.contains("fields")) {
    if (!doc["fields"].is_object()) throw ModelError("fields must be an object");
    for (const auto& [key, names] : doc["fields"].items()) {
      auto kind = kind_from_json(json(key), "fields");
      if (!names.is_array()) throw ModelError("fields lists must be arrays");
      std::vector<std::string> list;
      for (const auto& n : names) {
        if (!n.is_string()) throw ModelError("field names must be strings");
        list.push_back(n.get<std::string>());
      }
      cfg.fields[kind] = std::move(list);
    }
  }
  validate_config(cfg);
  return cfg;
}

std::string serialize_equality_config(const EqualityConfig& cfg) {
  ordered_json out;
  auto kinds = ordered_json::array();
  for (EventKind k : cfg.include_kinds) kinds.push_back(std::string(kind_name(k)));
  out["include_kinds"] = std::move(kinds);
  auto fields = ordered_json::object();
  for (const auto& [kind, names] : cfg.fields)
    fields[std::string(kind_name(kind))] = names;
  out["fields"] = std::move(fields);
  return out.dump(2) + "\n";
}

}  // namespace lsc
