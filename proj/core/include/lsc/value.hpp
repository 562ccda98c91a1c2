#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>

namespace lsc {

// A single field value: text, 64-bit integer, 64-bit float, or boolean.
// No nesting; structured input is flattened to dotted names at ingestion.
class Value {
 public:
  enum class Type { Text, Integer, Float, Boolean };

  Value() : data_(std::int64_t{0}) {}

  static Value text(std::string s) { return Value(std::move(s)); }
  static Value integer(std::int64_t i) { return Value(i); }
  static Value real(double d) { return Value(d); }
  static Value boolean(bool b) { return Value(b); }

  Type type() const { return static_cast<Type>(data_.index()); }
  bool is_text() const { return type() == Type::Text; }
  bool is_integer() const { return type() == Type::Integer; }
  bool is_float() const { return type() == Type::Float; }
  bool is_boolean() const { return type() == Type::Boolean; }
  bool is_numeric() const { return is_integer() || is_float(); }

  const std::string& as_text() const { return std::get<std::string>(data_); }
  std::int64_t as_integer() const { return std::get<std::int64_t>(data_); }
  double as_float() const { return std::get<double>(data_); }
  bool as_boolean() const { return std::get<bool>(data_); }

  // Storage equality: exact for text/integer/boolean, bitwise for floats.
  bool operator==(const Value& other) const;
  bool operator!=(const Value& other) const { return !(*this == other); }

  // Total order (type rank, then value); used for canonical sets.
  bool operator<(const Value& other) const;

  // Source-literal style rendering: strings quoted, floats keep a '.'.
  std::string to_literal() const;
  // Unquoted rendering for messages.
  std::string to_display() const;

 private:
  explicit Value(std::string s) : data_(std::move(s)) {}
  explicit Value(std::int64_t i) : data_(i) {}
  explicit Value(double d) : data_(d) {}
  explicit Value(bool b) : data_(b) {}

  std::variant<std::string, std::int64_t, double, bool> data_;
};

// Equality as used inside constraint matching: numerics compare across
// int/float with |a-b| <= epsilon (default 0 = exact); text/boolean exact.
bool constraint_equal(const Value& a, const Value& b, double epsilon = 0.0);

// Numeric three-way comparison, empty when either side is not numeric.
std::optional<int> numeric_compare(const Value& a, const Value& b);

}  // namespace lsc
