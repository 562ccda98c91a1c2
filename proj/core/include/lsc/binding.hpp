#pragma once

#include <map>
#include <optional>
#include <string>

#include "lsc/value.hpp"

namespace lsc {

// Variable environment captured while matching. Immutable in spirit:
// extension returns a new Binding; a conflicting extension is a match
// failure, never an overwrite.
class Binding {
 public:
  Binding() = default;

  bool contains(const std::string& var) const { return vars_.count(var) > 0; }

  const Value* find(const std::string& var) const {
    auto it = vars_.find(var);
    return it == vars_.end() ? nullptr : &it->second;
  }

  // Empty result on conflict (existing value differs under `epsilon`).
  std::optional<Binding> extended(const std::string& var, Value v,
                                  double epsilon = 0.0) const {
    if (const Value* existing = find(var)) {
      if (!constraint_equal(*existing, v, epsilon)) return std::nullopt;
      return *this;
    }
    Binding out = *this;
    out.vars_.emplace(var, std::move(v));
    return out;
  }

  const std::map<std::string, Value>& vars() const { return vars_; }
  std::size_t size() const { return vars_.size(); }
  bool empty() const { return vars_.empty(); }

  bool operator==(const Binding&) const = default;

  std::string to_display() const {
    std::string out = "{";
    bool first = true;
    for (const auto& [name, value] : vars_) {
      if (!first) out += ", ";
      first = false;
      out += name + ": " + value.to_literal();
    }
    out += "}";
    return out;
  }

 private:
  std::map<std::string, Value> vars_;
};

}  // namespace lsc
