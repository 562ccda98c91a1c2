#include "lsc/oracle.hpp"

#include <algorithm>

#include "lsc/errors.hpp"

// Deliberately self-contained: this file re-derives pattern satisfaction
// from the AST with its own constraint evaluation, so that a defect in the
// compiler or session cannot hide in the cross-check.

namespace lsc {

namespace {

struct OracleMatcher {
  const PredicateRegistry& preds;

  std::optional<Binding> operator()(const EventConstraint& c, const Event& e,
                                    const Binding& env) const {
    if (e.kind != c.kind) return std::nullopt;
    Binding theta = env;
    for (const auto& fc : c.fields) {
      auto v = event_get(e, fc.field);
      if (!v) return std::nullopt;
      if (!check_field(fc, *v, theta)) return std::nullopt;
    }
    return theta;
  }

  bool check_field(const FieldConstraint& fc, const Value& v, Binding& theta) const {
    const double eps = preds.float_epsilon();
    if (const auto* lit = std::get_if<LiteralMatcher>(&fc.matcher))
      return constraint_equal(v, lit->value, eps);
    if (const auto* b = std::get_if<BindMatcher>(&fc.matcher)) {
      if (const Value* bound = theta.find(b->var))
        return constraint_equal(*bound, v, eps);
      auto ext = theta.extended(b->var, v, eps);
      theta = std::move(*ext);
      return true;
    }
    if (const auto* cmp = std::get_if<CompareMatcher>(&fc.matcher)) {
      if (cmp->op == CompareOp::Ne) return !constraint_equal(v, cmp->rhs, eps);
      auto ord = numeric_compare(v, cmp->rhs);
      if (!ord) return false;
      switch (cmp->op) {
        case CompareOp::Lt: return *ord < 0;
        case CompareOp::Le: return *ord <= 0;
        case CompareOp::Gt: return *ord > 0;
        case CompareOp::Ge: return *ord >= 0;
        case CompareOp::Ne: return false;
      }
      return false;
    }
    if (const auto* re = std::get_if<RegexMatcher>(&fc.matcher))
      return v.is_text() && std::regex_match(v.as_text(), *re->compiled);
    const auto& pm = std::get<PredicateMatcher>(fc.matcher);
    const auto* entry = preds.find(pm.name);
    if (!entry) throw PredicateError(pm.name, "not registered");
    std::vector<Value> args;
    args.push_back(v);
    for (const auto& arg : pm.args) {
      if (const auto* lit = std::get_if<Value>(&arg)) {
        args.push_back(*lit);
      } else {
        const Value* bound = theta.find(std::get<VarRef>(arg).var);
        if (!bound)
          throw PredicateError(pm.name, "variable '" +
                                            std::get<VarRef>(arg).var +
                                            "' is not bound");
        args.push_back(*bound);
      }
    }
    try {
      return entry->fn(args);
    } catch (const std::exception& ex) {
      throw PredicateError(pm.name, ex.what());
    }
  }
};

struct PendingForbid {
  const ConsequenceNode* node;
  std::string path;
  std::int64_t window_start;
  Binding env;
};

struct EvalResult {
  bool failed = false;                       // a Require inside never matched
  std::optional<std::int64_t> completed_at;  // empty = completed immediately
  std::int64_t next_lo = 0;
  Binding exported;
};

class Evaluator {
 public:
  Evaluator(const Log& log, const Pattern& pattern, const OracleMatcher& matcher,
            std::vector<Violation>& out)
      : log_(log), pattern_(pattern), matcher_(matcher), out_(out) {}

  // Evaluates a consequence subtree starting at position lo under env.
  EvalResult eval(const ConsequenceNode& n, const std::string& path,
                  std::int64_t lo, const Binding& env, std::int64_t trigger_idx) {
    switch (n.type) {
      case ConsequenceNode::Type::Require:
        return eval_require(n, path, lo, env, trigger_idx);
      case ConsequenceNode::Type::Forbid: {
        // Window closure is the parent's business; standalone forbids
        // (root or unordered child) run to end of log.
        emit_forbid(n, path, lo, end_of_log(), env, trigger_idx);
        EvalResult r;
        r.next_lo = lo;
        r.exported = env;
        return r;
      }
      case ConsequenceNode::Type::Ordered:
        return eval_ordered(n, path, lo, env, trigger_idx);
      case ConsequenceNode::Type::Unordered:
        return eval_unordered(n, path, lo, env, trigger_idx);
    }
    return {};
  }

  std::int64_t end_of_log() const {
    return static_cast<std::int64_t>(log_.events.size());
  }

 private:
  EvalResult eval_require(const ConsequenceNode& n, const std::string& path,
                          std::int64_t lo, const Binding& env,
                          std::int64_t trigger_idx) {
    for (std::int64_t j = lo; j < end_of_log(); ++j) {
      if (auto theta = matcher_(n.constraint, log_.events[j], env)) {
        EvalResult r;
        r.completed_at = j;
        r.next_lo = j + 1;
        r.exported = std::move(*theta);
        return r;
      }
    }
    Violation v;
    v.pattern = pattern_.name;
    v.kind = ViolationKind::MissingEvent;
    v.trigger_index = trigger_idx;
    v.binding = env;
    v.obligation_origin = path;
    v.trigger_time_us = trigger_time_us_;
    v.message = "required event " + constraint_to_string(n.constraint) +
                " never occurred after index " + std::to_string(trigger_idx) +
                " under " + env.to_display();
    out_.push_back(std::move(v));
    EvalResult r;
    r.failed = true;
    return r;
  }

  // First match in [start, close) is a violation; the watch then retires.
  void emit_forbid(const ConsequenceNode& n, const std::string& path,
                   std::int64_t start, std::int64_t close, const Binding& env,
                   std::int64_t trigger_idx) {
    for (std::int64_t j = start; j < close; ++j) {
      if (matcher_(n.constraint, log_.events[j], env)) {
        Violation v;
        v.pattern = pattern_.name;
        v.kind = ViolationKind::ForbiddenEvent;
        v.trigger_index = trigger_idx;
        v.binding = env;
        v.obligation_origin = path;
        v.offending_index = j;
        v.trigger_time_us = trigger_time_us_;
        v.offending_time_us = log_.events[static_cast<std::size_t>(j)].time_us;
        v.message = "forbidden event " + constraint_to_string(n.constraint) +
                    " matched at index " + std::to_string(j) + " under " +
                    env.to_display();
        out_.push_back(std::move(v));
        return;
      }
    }
  }

  EvalResult eval_ordered(const ConsequenceNode& n, const std::string& path,
                          std::int64_t lo, const Binding& env,
                          std::int64_t trigger_idx) {
    std::int64_t cur_lo = lo;
    Binding cur = env;
    std::optional<std::int64_t> last_at;
    std::vector<PendingForbid> pending;

    auto flush_pending = [&](std::int64_t close) {
      for (const auto& pf : pending)
        emit_forbid(*pf.node, pf.path, pf.window_start, close, pf.env, trigger_idx);
      pending.clear();
    };

    for (std::size_t i = 0; i < n.children.size(); ++i) {
      const ConsequenceNode& child = n.children[i];
      std::string child_path = path + "." + std::to_string(i);
      if (child.type == ConsequenceNode::Type::Forbid) {
        pending.push_back(PendingForbid{&child, child_path, cur_lo, cur});
        continue;
      }
      EvalResult r = eval(child, child_path, cur_lo, cur, trigger_idx);
      if (r.failed) {
        // The chain never advances: pending windows extend to end of log
        // and later siblings are never activated.
        flush_pending(end_of_log());
        EvalResult fail;
        fail.failed = true;
        return fail;
      }
      if (r.completed_at) {
        flush_pending(*r.completed_at);
        last_at = r.completed_at;
        cur_lo = r.next_lo;
      }
      cur = r.exported;
    }
    flush_pending(end_of_log());
    EvalResult r;
    r.completed_at = last_at;
    r.next_lo = cur_lo;
    r.exported = cur;
    return r;
  }

  EvalResult eval_unordered(const ConsequenceNode& n, const std::string& path,
                            std::int64_t lo, const Binding& env,
                            std::int64_t trigger_idx) {
    bool any_failed = false;
    std::optional<std::int64_t> last_at;
    std::int64_t next_lo = lo;
    for (std::size_t i = 0; i < n.children.size(); ++i) {
      EvalResult r = eval(n.children[i], path + "." + std::to_string(i), lo, env,
                          trigger_idx);
      if (r.failed) {
        any_failed = true;
        continue;
      }
      if (r.completed_at && (!last_at || *r.completed_at > *last_at))
        last_at = r.completed_at;
      next_lo = std::max(next_lo, r.next_lo);
    }
    EvalResult r;
    if (any_failed) {
      r.failed = true;
      return r;
    }
    r.completed_at = last_at;
    r.next_lo = next_lo;
    r.exported = env;  // sibling bindings never escape an unordered scope
    return r;
  }

 public:
  std::int64_t trigger_time_us_ = 0;

 private:
  const Log& log_;
  const Pattern& pattern_;
  const OracleMatcher& matcher_;
  std::vector<Violation>& out_;
};

}  // namespace

LogTooLarge::LogTooLarge(std::size_t size, std::size_t bound)
    : Error("log of " + std::to_string(size) +
            " events exceeds the oracle bound of " + std::to_string(bound)) {}

Report oracle_check(const Spec& spec, const Log& log,
                    const PredicateRegistry& predicates, std::size_t max_events) {
  if (log.events.size() > max_events)
    throw LogTooLarge(log.events.size(), max_events);

  OracleMatcher matcher{predicates};
  Report report;
  report.source_id = log.source_id;

  for (const auto& pattern : spec.patterns) {
    PatternStats stats;
    stats.pattern = pattern.name;
    std::vector<Violation> pattern_violations;
    for (std::int64_t i = 0; i < static_cast<std::int64_t>(log.events.size());
         ++i) {
      const Event& e = log.events[static_cast<std::size_t>(i)];
      auto theta0 = matcher(pattern.trigger, e, Binding{});
      if (!theta0) continue;
      stats.triggers++;
      std::vector<Violation> instance_violations;
      Evaluator ev(log, pattern, matcher, instance_violations);
      ev.trigger_time_us_ = e.time_us;
      ev.eval(pattern.consequence, "c", i + 1, *theta0, i);
      if (instance_violations.empty()) stats.satisfied++;
      else stats.violated++;
      for (auto& v : instance_violations)
        pattern_violations.push_back(std::move(v));
    }
    report.patterns.push_back(stats);
    for (auto& v : pattern_violations) report.violations.push_back(std::move(v));
  }
  return report;
}

}  // namespace lsc
