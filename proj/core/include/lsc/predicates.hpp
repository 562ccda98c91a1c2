#pragma once

#include <functional>
#include <map>
#include <span>
#include <string>

#include "lsc/value.hpp"

namespace lsc {

// Host-supplied predicates plus match-time configuration. A predicate of
// arity k is called with the constrained field's value first, followed by
// the k-1 arguments written in the spec. Predicates must be pure.
class PredicateRegistry {
 public:
  using Fn = std::function<bool(std::span<const Value>)>;

  struct Entry {
    std::size_t arity = 1;  // including the implicit field value
    Fn fn;
  };

  void add(std::string name, std::size_t arity, Fn fn) {
    entries_[std::move(name)] = Entry{arity, std::move(fn)};
  }

  const Entry* find(const std::string& name) const {
    auto it = entries_.find(name);
    return it == entries_.end() ? nullptr : &it->second;
  }

  // Epsilon for float comparisons in constraints; 0 = exact.
  double float_epsilon() const { return float_epsilon_; }
  void set_float_epsilon(double eps) { float_epsilon_ = eps; }

 private:
  std::map<std::string, Entry> entries_;
  double float_epsilon_ = 0.0;
};

}  // namespace lsc
