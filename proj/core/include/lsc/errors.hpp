#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace lsc {

// Base for every error raised by the toolkit. Subclasses carry a code enum
// plus the fields tests need to assert on; what() is always human-readable.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

class IngestError : public Error {
 public:
  enum class Code { MalformedLine, UnknownKind, MissingTime };

  IngestError(Code code, std::int64_t line_no, std::string detail);

  Code code() const { return code_; }
  std::int64_t line_no() const { return line_no_; }
  const std::string& detail() const { return detail_; }

 private:
  Code code_;
  std::int64_t line_no_;
  std::string detail_;
};

class AlignError : public Error {
 public:
  enum class Code { InsufficientAnchors, BadAnchorOrder };

  AlignError(Code code, std::string detail);

  Code code() const { return code_; }

 private:
  Code code_;
};

class SpecError : public Error {
 public:
  enum class Code { Syntax, UnboundVariable, DuplicateField, DuplicatePattern };

  // Syntax errors carry a position and what was expected there.
  static SpecError syntax(int line, int col, const std::string& expected);
  static SpecError unbound_variable(const std::string& pattern, const std::string& var);
  static SpecError duplicate_field(int line, int col, const std::string& field);
  static SpecError duplicate_pattern(const std::string& name);

  Code code() const { return code_; }
  int line() const { return line_; }
  int col() const { return col_; }
  const std::string& pattern() const { return pattern_; }
  const std::string& var() const { return var_; }

 private:
  SpecError(Code code, std::string msg) : Error(std::move(msg)), code_(code) {}

  Code code_;
  int line_ = 0;
  int col_ = 0;
  std::string pattern_;
  std::string var_;
};

class CompileError : public Error {
 public:
  enum class Code { UnknownPredicate, ArityMismatch };

  static CompileError unknown_predicate(const std::string& name);
  static CompileError arity_mismatch(const std::string& name, std::size_t expected,
                                     std::size_t got);

  Code code() const { return code_; }
  const std::string& name() const { return name_; }

 private:
  CompileError(Code code, std::string msg) : Error(std::move(msg)), code_(code) {}

  Code code_;
  std::string name_;
};

// A user predicate raised during evaluation; surfaced, never swallowed.
class PredicateError : public Error {
 public:
  PredicateError(const std::string& name, const std::string& cause);

  const std::string& name() const { return name_; }

 private:
  std::string name_;
};

class LogTooLarge : public Error {
 public:
  LogTooLarge(std::size_t size, std::size_t bound);
};

// Learner model / equality-config files.
class ModelError : public Error {
 public:
  explicit ModelError(const std::string& msg) : Error(msg) {}
};

}  // namespace lsc
