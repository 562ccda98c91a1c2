#include "lsc/value.hpp"

#include <bit>
#include <cmath>
#include <cstdio>

namespace lsc {

namespace {

bool float_bits_equal(double a, double b) {
  return std::bit_cast<std::uint64_t>(a) == std::bit_cast<std::uint64_t>(b);
}

std::string format_double(double d) {
  char buf[64];
  // Shortest representation that round-trips a double.
  std::snprintf(buf, sizeof(buf), "%.17g", d);
  double parsed = 0.0;
  std::sscanf(buf, "%lf", &parsed);
  for (int prec = 1; prec < 17; ++prec) {
    char shorter[64];
    std::snprintf(shorter, sizeof(shorter), "%.*g", prec, d);
    std::sscanf(shorter, "%lf", &parsed);
    if (parsed == d) {
      std::snprintf(buf, sizeof(buf), "%.*g", prec, d);
      break;
    }
  }
  std::string s(buf);
  // Force a float-looking literal so it re-lexes as a float, not an integer.
  if (s.find_first_of(".eE") == std::string::npos &&
      s.find_first_of("nN") == std::string::npos) {
    s += ".0";
  }
  return s;
}

std::string quote_text(const std::string& s) {
  std::string out;
  out.reserve(s.size() + 2);
  out += '"';
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      case '\r': out += "\\r"; break;
      default: out += c;
    }
  }
  out += '"';
  return out;
}

}  // namespace

bool Value::operator==(const Value& other) const {
  if (type() != other.type()) return false;
  if (is_float()) return float_bits_equal(as_float(), other.as_float());
  return data_ == other.data_;
}

bool Value::operator<(const Value& other) const {
  if (type() != other.type()) return type() < other.type();
  switch (type()) {
    case Type::Text: return as_text() < other.as_text();
    case Type::Integer: return as_integer() < other.as_integer();
    case Type::Float: {
      double a = as_float(), b = other.as_float();
      if (a != b) return a < b;
      return std::bit_cast<std::uint64_t>(a) < std::bit_cast<std::uint64_t>(b);
    }
    case Type::Boolean: return as_boolean() < other.as_boolean();
  }
  return false;
}

std::string Value::to_literal() const {
  switch (type()) {
    case Type::Text: return quote_text(as_text());
    case Type::Integer: return std::to_string(as_integer());
    case Type::Float: return format_double(as_float());
    case Type::Boolean: return as_boolean() ? "true" : "false";
  }
  return {};
}

std::string Value::to_display() const {
  if (is_text()) return as_text();
  return to_literal();
}

bool constraint_equal(const Value& a, const Value& b, double epsilon) {
  if (a.is_numeric() && b.is_numeric()) {
    long double x = a.is_integer() ? static_cast<long double>(a.as_integer())
                                   : static_cast<long double>(a.as_float());
    long double y = b.is_integer() ? static_cast<long double>(b.as_integer())
                                   : static_cast<long double>(b.as_float());
    if (std::isnan(static_cast<double>(x)) || std::isnan(static_cast<double>(y)))
      return false;
    return std::fabsl(x - y) <= static_cast<long double>(epsilon);
  }
  if (a.type() != b.type()) return false;
  return a == b;
}

std::optional<int> numeric_compare(const Value& a, const Value& b) {
  if (!a.is_numeric() || !b.is_numeric()) return std::nullopt;
  if (a.is_integer() && b.is_integer()) {
    auto x = a.as_integer(), y = b.as_integer();
    return x < y ? -1 : (x > y ? 1 : 0);
  }
  long double x = a.is_integer() ? static_cast<long double>(a.as_integer())
                                 : static_cast<long double>(a.as_float());
  long double y = b.is_integer() ? static_cast<long double>(b.as_integer())
                                 : static_cast<long double>(b.as_float());
  if (std::isnan(static_cast<double>(x)) || std::isnan(static_cast<double>(y)))
    return std::nullopt;
  return x < y ? -1 : (x > y ? 1 : 0);
}

}  // namespace lsc
