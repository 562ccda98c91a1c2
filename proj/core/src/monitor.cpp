#include "lsc/monitor.hpp"

#include <algorithm>
#include <cassert>
#include <cinttypes>
#include <unordered_map>

#include <json.hpp>

#include "lsc/spec.hpp"

namespace lsc {

namespace {

// Hash key for the obligation index: kind + one determinate field value.
// Numeric values are canonicalized so int 7 and float 7.0 share a key.
std::string canonical_value_key(const Value& v) {
  switch (v.type()) {
    case Value::Type::Text: return "t:" + v.as_text();
    case Value::Type::Boolean: return v.as_boolean() ? "b:1" : "b:0";
    case Value::Type::Integer: return "i:" + std::to_string(v.as_integer());
    case Value::Type::Float: {
      double d = v.as_float();
      if (d >= -9.2e18 && d <= 9.2e18) {
        auto i = static_cast<std::int64_t>(d);
        if (static_cast<double>(i) == d) return "i:" + std::to_string(i);
      }
      char buf[32];
      std::snprintf(buf, sizeof(buf), "f:%a", d);
      return buf;
    }
  }
  return {};
}

struct AnchorKey {
  EventKind kind;
  std::string field;  // empty = unanchored bucket
  std::string value;

  bool operator==(const AnchorKey&) const = default;
};

struct AnchorKeyHash {
  std::size_t operator()(const AnchorKey& k) const {
    std::size_t h = std::hash<int>()(static_cast<int>(k.kind));
    h = h * 1315423911u ^ std::hash<std::string>()(k.field);
    h = h * 1315423911u ^ std::hash<std::string>()(k.value);
    return h;
  }
};

}  // namespace

std::string_view violation_kind_name(ViolationKind k) {
  return k == ViolationKind::MissingEvent ? "MissingEvent" : "ForbiddenEvent";
}

struct Session::Impl {
  struct NodeRt {
    bool active = false;
    bool done = false;
    bool obligation_live = false;   // leaves
    Binding theta;                  // leaf: obligation env; ordered: chain env;
                                    // unordered: entry env
    std::int64_t lo = 0;            // first eligible event index (leaves)
    int cursor = 0;                 // ordered: position waiting to complete
    int remaining = 0;              // unordered: children still incomplete
  };

  struct Instance {
    const Automaton* automaton = nullptr;
    std::uint64_t id = 0;
    std::int64_t trigger_index = 0;
    std::int64_t trigger_time_us = 0;
    Binding theta0;
    std::vector<NodeRt> nodes;
    int live_hots = 0;
    int live_watches = 0;
    bool violated = false;
  };

  std::shared_ptr<const std::vector<Automaton>> automata;
  PredicateRegistry predicates;
  bool anchor_numerics = true;

  std::uint64_t next_instance_id = 1;
  std::unordered_map<std::uint64_t, Instance> instances;
  // Obligation lookup: anchored buckets plus per-kind fallback buckets.
  // Entries are (instance id, plan node); dead ones are pruned on scan.
  std::unordered_map<AnchorKey, std::vector<std::pair<std::uint64_t, int>>,
                     AnchorKeyHash>
      buckets;
  std::vector<PatternStats> stats;
  std::vector<Violation> violations;
  bool finished = false;

  explicit Impl(std::shared_ptr<const std::vector<Automaton>> a,
                PredicateRegistry p)
      : automata(std::move(a)), predicates(std::move(p)) {
    anchor_numerics = predicates.float_epsilon() == 0.0;
    stats.reserve(automata->size());
    for (const auto& automaton : *automata)
      stats.push_back(PatternStats{automaton.pattern_name, 0, 0, 0});
  }

  // ---- obligation index ------------------------------------------------

  bool anchorable(const Value& v) const {
    if (v.is_text() || v.is_boolean()) return true;
    return anchor_numerics;
  }

  // First guard field whose concrete value is known at spawn time.
  std::optional<AnchorKey> anchor_for(const EventConstraint& guard,
                                      const Binding& theta) const {
    for (const auto& fc : guard.fields) {
      if (is_reserved_field(fc.field)) continue;
      if (const auto* lit = std::get_if<LiteralMatcher>(&fc.matcher)) {
        if (anchorable(lit->value))
          return AnchorKey{guard.kind, fc.field, canonical_value_key(lit->value)};
      } else if (const auto* bind = std::get_if<BindMatcher>(&fc.matcher)) {
        if (const Value* bound = theta.find(bind->var); bound && anchorable(*bound))
          return AnchorKey{guard.kind, fc.field, canonical_value_key(*bound)};
      }
    }
    return std::nullopt;
  }

  void index_obligation(const Instance& inst, int node_idx) {
    const PlanNode& pn = inst.automaton->plan[node_idx];
    const AutoState& st = inst.automaton->state(pn.state_id);
    auto key = anchor_for(st.guard, inst.nodes[node_idx].theta);
    if (!key) key = AnchorKey{st.guard.kind, "", ""};
    buckets[*key].emplace_back(inst.id, node_idx);
  }

  // ---- activation / completion ------------------------------------------

  // Activates the subtree rooted at node_idx; returns true if it completed
  // immediately (contains no Require).
  bool activate(Instance& inst, int node_idx, std::int64_t lo,
                const Binding& theta) {
    const PlanNode& pn = inst.automaton->plan[node_idx];
    NodeRt& rt = inst.nodes[node_idx];
    rt.active = true;
    switch (pn.type) {
      case PlanNode::Type::Require:
        rt.theta = theta;
        rt.lo = lo;
        rt.obligation_live = true;
        ++inst.live_hots;
        index_obligation(inst, node_idx);
        return false;
      case PlanNode::Type::Forbid:
        rt.theta = theta;
        rt.lo = lo;
        rt.obligation_live = true;
        ++inst.live_watches;
        index_obligation(inst, node_idx);
        rt.done = true;  // completes immediately; the watch itself stays live
        return true;
      case PlanNode::Type::Ordered: {
        rt.theta = theta;
        rt.cursor = 0;
        const auto& children = pn.children;
        while (rt.cursor < static_cast<int>(children.size())) {
          if (activate(inst, children[rt.cursor], lo, rt.theta)) {
            ++rt.cursor;
            continue;
          }
          return false;
        }
        rt.done = true;
        return true;
      }
      case PlanNode::Type::Unordered: {
        rt.theta = theta;
        rt.remaining = static_cast<int>(pn.children.size());
        for (int child : pn.children)
          if (activate(inst, child, lo, theta)) --rt.remaining;
        if (rt.remaining == 0) {
          rt.done = true;
          return true;
        }
        return false;
      }
    }
    return false;
  }

  // Retires watches (in this instance) whose window closes when `closer_idx`
  // completes. Runs before watch matching of the completing event, so the
  // closing event itself cannot trip the watch.
  void close_watches(Instance& inst, int closer_idx) {
    const auto& plan = inst.automaton->plan;
    for (std::size_t i = 0; i < plan.size(); ++i) {
      if (plan[i].type != PlanNode::Type::Forbid) continue;
      if (plan[i].closer != closer_idx) continue;
      NodeRt& rt = inst.nodes[i];
      if (rt.obligation_live) {
        rt.obligation_live = false;
        --inst.live_watches;
      }
    }
  }

  // Node completion at event `at`, exporting `exported` to an enclosing
  // ordered chain. Cascades upward through scope joins.
  void complete_node(Instance& inst, int node_idx, std::int64_t at,
                     const Binding& exported) {
    const auto& plan = inst.automaton->plan;
    inst.nodes[node_idx].done = true;
    close_watches(inst, node_idx);

    int parent = plan[node_idx].parent;
    if (parent < 0) return;
    NodeRt& prt = inst.nodes[parent];
    if (plan[parent].type == PlanNode::Type::Ordered) {
      prt.theta = exported;
      ++prt.cursor;
      const auto& children = plan[parent].children;
      while (prt.cursor < static_cast<int>(children.size())) {
        if (activate(inst, children[prt.cursor], at + 1, prt.theta)) {
          ++prt.cursor;
          continue;
        }
        return;  // chain now waiting on this child
      }
      complete_node(inst, parent, at, prt.theta);
    } else {
      assert(plan[parent].type == PlanNode::Type::Unordered);
      if (--prt.remaining == 0)
        complete_node(inst, parent, at, prt.theta);  // exports its entry env
    }
  }

  // ---- stepping ----------------------------------------------------------

  // Candidate obligations for this event: the per-kind fallback bucket plus
  // one anchored bucket per event field. Dead entries are pruned in place.
  template <typename Fn>
  void scan_candidates(const Event& e, Fn&& fn) {
    auto visit_bucket = [&](const AnchorKey& key) {
      auto it = buckets.find(key);
      if (it == buckets.end()) return;
      auto& vec = it->second;
      std::size_t kept = 0;
      for (std::size_t i = 0; i < vec.size(); ++i) {
        auto [inst_id, node_idx] = vec[i];
        auto inst_it = instances.find(inst_id);
        if (inst_it == instances.end() ||
            !inst_it->second.nodes[node_idx].obligation_live)
          continue;  // dead; drop from bucket
        vec[kept++] = vec[i];
        fn(inst_it->second, node_idx);
      }
      vec.resize(kept);
      if (vec.empty()) buckets.erase(it);
    };
    visit_bucket(AnchorKey{e.kind, "", ""});
    for (const auto& [field, value] : e.fields)
      visit_bucket(AnchorKey{e.kind, field, canonical_value_key(value)});
  }

  std::vector<Violation> step(const Event& e) {
    assert(!finished);
    std::vector<Violation> fresh;

    // 1) HOT completions, in deterministic order.
    struct Completion {
      std::uint64_t inst_id;
      int node_idx;
      Binding extended;
    };
    std::vector<Completion> completions;
    scan_candidates(e, [&](Instance& inst, int node_idx) {
      const PlanNode& pn = inst.automaton->plan[node_idx];
      if (pn.type != PlanNode::Type::Require) return;
      NodeRt& rt = inst.nodes[node_idx];
      if (rt.lo > e.index) return;
      const AutoState& st = inst.automaton->state(pn.state_id);
      if (auto theta = match(st.guard, e, rt.theta, predicates))
        completions.push_back({inst.id, node_idx, std::move(*theta)});
    });
    std::sort(completions.begin(), completions.end(),
              [](const Completion& a, const Completion& b) {
                return a.inst_id != b.inst_id ? a.inst_id < b.inst_id
                                              : a.node_idx < b.node_idx;
              });
    for (auto& c : completions) {
      Instance& inst = instances.at(c.inst_id);
      NodeRt& rt = inst.nodes[c.node_idx];
      rt.obligation_live = false;
      --inst.live_hots;
      complete_node(inst, c.node_idx, e.index, c.extended);
    }

    // 2) WATCH matches among obligations still live after closures.
    struct WatchHit {
      std::uint64_t inst_id;
      int node_idx;
    };
    std::vector<WatchHit> hits;
    scan_candidates(e, [&](Instance& inst, int node_idx) {
      const PlanNode& pn = inst.automaton->plan[node_idx];
      if (pn.type != PlanNode::Type::Forbid) return;
      NodeRt& rt = inst.nodes[node_idx];
      if (rt.lo > e.index) return;
      const AutoState& st = inst.automaton->state(pn.state_id);
      if (match(st.guard, e, rt.theta, predicates))
        hits.push_back({inst.id, node_idx});
    });
    std::sort(hits.begin(), hits.end(), [](const WatchHit& a, const WatchHit& b) {
      return a.inst_id != b.inst_id ? a.inst_id < b.inst_id
                                    : a.node_idx < b.node_idx;
    });
    for (const auto& h : hits) {
      Instance& inst = instances.at(h.inst_id);
      NodeRt& rt = inst.nodes[h.node_idx];
      rt.obligation_live = false;
      --inst.live_watches;
      inst.violated = true;
      fresh.push_back(make_forbidden(inst, h.node_idx, e));
    }

    // 3) Trigger matching; obligations take effect strictly after e.
    for (const auto& automaton : *automata) {
      if (auto theta0 = match(automaton.trigger, e, Binding{}, predicates)) {
        Instance inst;
        inst.automaton = &automaton;
        inst.id = next_instance_id++;
        inst.trigger_index = e.index;
        inst.trigger_time_us = e.time_us;
        inst.theta0 = *theta0;
        inst.nodes.resize(automaton.plan.size());
        auto [it, inserted] = instances.emplace(inst.id, std::move(inst));
        assert(inserted);
        stats[static_cast<std::size_t>(&automaton - automata->data())].triggers++;
        activate(it->second, 0, e.index + 1, *theta0);
        reap(it->first);
      }
    }

    // 4) Retire instances with nothing live; their verdict is final.
    for (const auto& c : completions) reap(c.inst_id);
    for (const auto& h : hits) reap(h.inst_id);

    for (const auto& v : fresh) violations.push_back(v);
    return fresh;
  }

  void reap(std::uint64_t inst_id) {
    auto it = instances.find(inst_id);
    if (it == instances.end()) return;
    Instance& inst = it->second;
    if (inst.live_hots > 0 || inst.live_watches > 0) return;
    record_outcome(inst);
    instances.erase(it);
  }

  void record_outcome(const Instance& inst) {
    auto pattern_pos =
        static_cast<std::size_t>(inst.automaton - automata->data());
    if (inst.violated) stats[pattern_pos].violated++;
    else stats[pattern_pos].satisfied++;
  }

  Violation make_forbidden(const Instance& inst, int node_idx, const Event& e) {
    const PlanNode& pn = inst.automaton->plan[node_idx];
    const AutoState& st = inst.automaton->state(pn.state_id);
    Violation v;
    v.pattern = inst.automaton->pattern_name;
    v.kind = ViolationKind::ForbiddenEvent;
    v.trigger_index = inst.trigger_index;
    v.binding = inst.nodes[node_idx].theta;
    v.obligation_origin = pn.path;
    v.offending_index = e.index;
    v.trigger_time_us = inst.trigger_time_us;
    v.offending_time_us = e.time_us;
    v.message = "forbidden event " + constraint_to_string(st.guard) +
                " matched at index " + std::to_string(e.index) + " under " +
                v.binding.to_display();
    return v;
  }

  Violation make_missing(const Instance& inst, int node_idx) {
    const PlanNode& pn = inst.automaton->plan[node_idx];
    const AutoState& st = inst.automaton->state(pn.state_id);
    Violation v;
    v.pattern = inst.automaton->pattern_name;
    v.kind = ViolationKind::MissingEvent;
    v.trigger_index = inst.trigger_index;
    v.binding = inst.nodes[node_idx].theta;
    v.obligation_origin = pn.path;
    v.trigger_time_us = inst.trigger_time_us;
    v.message = "required event " + constraint_to_string(st.guard) +
                " never occurred after index " +
                std::to_string(inst.trigger_index) + " under " +
                v.binding.to_display();
    return v;
  }

  Report finish(std::string source_id) {
    assert(!finished);
    finished = true;

    std::vector<std::uint64_t> remaining;
    remaining.reserve(instances.size());
    for (const auto& [id, inst] : instances) remaining.push_back(id);
    std::sort(remaining.begin(), remaining.end());

    for (std::uint64_t id : remaining) {
      Instance& inst = instances.at(id);
      const auto& plan = inst.automaton->plan;
      for (std::size_t i = 0; i < plan.size(); ++i) {
        if (plan[i].type == PlanNode::Type::Require &&
            inst.nodes[i].obligation_live) {
          inst.violated = true;
          violations.push_back(make_missing(inst, static_cast<int>(i)));
        }
      }
      record_outcome(inst);
    }
    instances.clear();
    buckets.clear();

    Report report;
    report.source_id = std::move(source_id);
    report.patterns = stats;
    report.violations = violations;
    return report;
  }

  std::vector<Obligation> live() const {
    std::vector<Obligation> out;
    std::vector<const Instance*> ordered;
    for (const auto& [id, inst] : instances) ordered.push_back(&inst);
    std::sort(ordered.begin(), ordered.end(),
              [](const Instance* a, const Instance* b) { return a->id < b->id; });
    for (const Instance* inst : ordered) {
      const auto& plan = inst->automaton->plan;
      for (std::size_t i = 0; i < plan.size(); ++i) {
        if (!inst->nodes[i].obligation_live) continue;
        Obligation o;
        o.state_id = plan[i].state_id;
        o.binding = inst->nodes[i].theta;
        o.activated_at = inst->nodes[i].lo - 1;
        o.origin = plan[i].path;
        out.push_back(std::move(o));
      }
    }
    return out;
  }
};

Session::Session(std::shared_ptr<const std::vector<Automaton>> automata,
                 PredicateRegistry predicates)
    : impl_(std::make_unique<Impl>(std::move(automata), std::move(predicates))) {}

Session::Session(std::vector<Automaton> automata, PredicateRegistry predicates)
    : Session(std::make_shared<const std::vector<Automaton>>(std::move(automata)),
              std::move(predicates)) {}

Session::~Session() = default;
Session::Session(Session&&) noexcept = default;
Session& Session::operator=(Session&&) noexcept = default;

std::vector<Violation> Session::step(const Event& e) { return impl_->step(e); }

Report Session::finish(std::string source_id) {
  return impl_->finish(std::move(source_id));
}

std::vector<Obligation> Session::live_obligations() const { return impl_->live(); }

std::size_t Session::live_obligation_count() const {
  std::size_t n = 0;
  for (const auto& [id, inst] : impl_->instances)
    n += static_cast<std::size_t>(inst.live_hots + inst.live_watches);
  return n;
}

Report check(const std::vector<Automaton>& automata, const Log& log,
             const PredicateRegistry& predicates) {
  Session session(std::make_shared<const std::vector<Automaton>>(automata),
                  predicates);
  for (const auto& e : log.events) session.step(e);
  return session.finish(log.source_id);
}

// ---- report rendering ----------------------------------------------------

std::string report_to_text(const Report& report, std::size_t max_violations) {
  std::string out;
  out += "log: " + report.source_id + "\n";
  out += "verdict: " + std::string(report.pass() ? "PASS" : "FAIL") + "\n";
  for (const auto& p : report.patterns) {
    out += "pattern " + p.pattern + ": triggers=" + std::to_string(p.triggers) +
           " satisfied=" + std::to_string(p.satisfied) +
           " violated=" + std::to_string(p.violated) + "\n";
  }
  std::size_t shown = 0;
  for (const auto& v : report.violations) {
    if (max_violations != 0 && shown == max_violations) break;
    ++shown;
    out += "\nviolation: " + std::string(violation_kind_name(v.kind)) + "\n";
    out += "  pattern: " + v.pattern + "\n";
    out += "  trigger: " + report.source_id + ":" +
           std::to_string(v.trigger_index) + " (time " +
           std::to_string(v.trigger_time_us) + ")\n";
    if (v.offending_index) {
      out += "  offending: " + report.source_id + ":" +
             std::to_string(*v.offending_index) + " (time " +
             std::to_string(v.offending_time_us) + ")\n";
    }
    out += "  obligation: " + v.obligation_origin + "\n";
    out += "  binding: " + v.binding.to_display() + "\n";
    out += "  " + v.message + "\n";
  }
  if (max_violations != 0 && report.violations.size() > max_violations) {
    out += "\n(" + std::to_string(report.violations.size() - max_violations) +
           " more violations suppressed)\n";
  }
  return out;
}

std::string report_to_json(const Report& report, std::size_t max_violations) {
  nlohmann::ordered_json out;
  out["source_id"] = report.source_id;
  out["verdict"] = report.pass() ? "PASS" : "FAIL";
  auto patterns = nlohmann::ordered_json::array();
  for (const auto& p : report.patterns) {
    patterns.push_back({{"pattern", p.pattern},
                        {"triggers", p.triggers},
                        {"satisfied", p.satisfied},
                        {"violated", p.violated}});
  }
  out["patterns"] = std::move(patterns);
  auto vs = nlohmann::ordered_json::array();
  std::size_t shown = 0;
  for (const auto& v : report.violations) {
    if (max_violations != 0 && shown == max_violations) break;
    ++shown;
    nlohmann::ordered_json jv;
    jv["pattern"] = v.pattern;
    jv["kind"] = std::string(violation_kind_name(v.kind));
    jv["trigger_index"] = v.trigger_index;
    if (v.offending_index) jv["offending_index"] = *v.offending_index;
    auto binding = nlohmann::ordered_json::object();
    for (const auto& [name, value] : v.binding.vars()) {
      switch (value.type()) {
        case Value::Type::Text: binding[name] = value.as_text(); break;
        case Value::Type::Integer: binding[name] = value.as_integer(); break;
        case Value::Type::Float: binding[name] = value.as_float(); break;
        case Value::Type::Boolean: binding[name] = value.as_boolean(); break;
      }
    }
    jv["binding"] = std::move(binding);
    jv["message"] = v.message;
    vs.push_back(std::move(jv));
  }
  out["violations"] = std::move(vs);
  return out.dump(2) + "\n";
}

}  // namespace lsc
