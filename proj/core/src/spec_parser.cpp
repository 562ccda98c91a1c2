#include <cctype>
#include <cstdlib>
#include <set>
#include <string>

#include "lsc/errors.hpp"
#include "lsc/spec.hpp"

namespace lsc {

namespace {

constexpr int kMaxNestingDepth = 256;

enum class Tok {
  Ident,     // also keywords: pattern, not, matches, true, false, KIND names
  Integer,
  Float,
  String,
  Colon,
  Comma,
  LBrace,
  RBrace,
  LBracket,
  RBracket,
  LParen,
  RParen,
  Arrow,     // =>
  CmpLt, CmpLe, CmpGt, CmpGe, CmpNe,
  End,
};

struct Token {
  Tok type = Tok::End;
  std::string text;
  std::int64_t int_value = 0;
  double float_value = 0.0;
  int line = 1;
  int col = 1;
};

bool is_ident_start(char c) {
  return std::isalpha(static_cast<unsigned char>(c)) || c == '_';
}
bool is_ident_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.';
}

class Lexer {
 public:
  explicit Lexer(std::string_view src) : src_(src) { advance(); }

  const Token& peek() const { return cur_; }

  Token take() {
    Token t = cur_;
    advance();
    return t;
  }

  [[noreturn]] void fail(const std::string& expected) const {
    throw SpecError::syntax(cur_.line, cur_.col, expected);
  }

 private:
  void advance() {
    skip_trivia();
    cur_ = Token{};
    cur_.line = line_;
    cur_.col = col_;
    if (pos_ >= src_.size()) {
      cur_.type = Tok::End;
      return;
    }
    char c = src_[pos_];
    if (is_ident_start(c)) {
      std::size_t start = pos_;
      while (pos_ < src_.size() && is_ident_char(src_[pos_])) bump();
      cur_.type = Tok::Ident;
      cur_.text = std::string(src_.substr(start, pos_ - start));
      return;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '-' || c == '+') {
      lex_number();
      return;
    }
    if (c == '"') {
      lex_string();
      return;
    }
    switch (c) {
      case ':': bump(); cur_.type = Tok::Colon; return;
      case ',': bump(); cur_.type = Tok::Comma; return;
      case '{': bump(); cur_.type = Tok::LBrace; return;
      case '}': bump(); cur_.type = Tok::RBrace; return;
      case '[': bump(); cur_.type = Tok::LBracket; return;
      case ']': bump(); cur_.type = Tok::RBracket; return;
      case '(': bump(); cur_.type = Tok::LParen; return;
      case ')': bump(); cur_.type = Tok::RParen; return;
      case '=':
        bump();
        if (pos_ < src_.size() && src_[pos_] == '>') {
          bump();
          cur_.type = Tok::Arrow;
          return;
        }
        throw SpecError::syntax(cur_.line, cur_.col, "'=>'");
      case '<':
        bump();
        if (pos_ < src_.size() && src_[pos_] == '=') { bump(); cur_.type = Tok::CmpLe; }
        else cur_.type = Tok::CmpLt;
        return;
      case '>':
        bump();
        if (pos_ < src_.size() && src_[pos_] == '=') { bump(); cur_.type = Tok::CmpGe; }
        else cur_.type = Tok::CmpGt;
        return;
      case '!':
        bump();
        if (pos_ < src_.size() && src_[pos_] == '=') { bump(); cur_.type = Tok::CmpNe; return; }
        throw SpecError::syntax(cur_.line, cur_.col, "'!='");
      default:
        throw SpecError::syntax(line_, col_, "a token");
    }
  }

  void lex_number() {
    int line = line_, col = col_;
    std::size_t start = pos_;
    if (src_[pos_] == '-' || src_[pos_] == '+') bump();
    std::size_t digits_start = pos_;
    while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) bump();
    if (pos_ == digits_start) throw SpecError::syntax(line, col, "a number");
    bool is_float = false;
    if (pos_ < src_.size() && src_[pos_] == '.') {
      is_float = true;
      bump();
      std::size_t frac_start = pos_;
      while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) bump();
      if (pos_ == frac_start) throw SpecError::syntax(line_, col_, "digits after '.'");
    }
    if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
      is_float = true;
      bump();
      if (pos_ < src_.size() && (src_[pos_] == '-' || src_[pos_] == '+')) bump();
      std::size_t exp_start = pos_;
      while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) bump();
      if (pos_ == exp_start) throw SpecError::syntax(line_, col_, "exponent digits");
    }
    std::string text(src_.substr(start, pos_ - start));
    cur_.line = line;
    cur_.col = col;
    cur_.text = text;
    if (is_float) {
      cur_.type = Tok::Float;
      cur_.float_value = std::strtod(text.c_str(), nullptr);
    } else {
      errno = 0;
      char* end = nullptr;
      long long v = std::strtoll(text.c_str(), &end, 10);
      if (errno == ERANGE) throw SpecError::syntax(line, col, "an integer in range");
      cur_.type = Tok::Integer;
      cur_.int_value = v;
    }
  }

  void lex_string() {
    int line = line_, col = col_;
    bump();  // opening quote
    std::string out;
    while (true) {
      if (pos_ >= src_.size())
        throw SpecError::syntax(line, col, "a closing '\"'");
      char c = src_[pos_];
      if (c == '\n')
        throw SpecError::syntax(line_, col_, "a closing '\"' before end of line");
      if (c == '"') {
        bump();
        break;
      }
      if (c == '\\') {
        bump();
        if (pos_ >= src_.size()) throw SpecError::syntax(line_, col_, "an escape");
        char esc = src_[pos_];
        switch (esc) {
          case '"': out += '"'; break;
          case '\\': out += '\\'; break;
          case 'n': out += '\n'; break;
          case 't': out += '\t'; break;
          case 'r': out += '\r'; break;
          default:
            throw SpecError::syntax(line_, col_, "a valid escape (\\\" \\\\ \\n \\t \\r)");
        }
        bump();
        continue;
      }
      out += c;
      bump();
    }
    cur_.line = line;
    cur_.col = col;
    cur_.type = Tok::String;
    cur_.text = std::move(out);
  }

  void skip_trivia() {
    while (pos_ < src_.size()) {
      char c = src_[pos_];
      if (c == '#') {
        while (pos_ < src_.size() && src_[pos_] != '\n') bump();
      } else if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
        bump();
      } else {
        break;
      }
    }
  }

  void bump() {
    if (src_[pos_] == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    ++pos_;
  }

  std::string_view src_;
  std::size_t pos_ = 0;
  int line_ = 1;
  int col_ = 1;
  Token cur_;
};

bool is_lower_ident(const std::string& s) {
  if (s.empty() || !std::islower(static_cast<unsigned char>(s[0]))) return false;
  for (char c : s)
    if (!(std::islower(static_cast<unsigned char>(c)) ||
          std::isdigit(static_cast<unsigned char>(c)) || c == '_'))
      return false;
  return true;
}

class Parser {
 public:
  explicit Parser(std::string_view src) : lex_(src) {}

  Spec parse() {
    Spec spec;
    std::set<std::string> names;
    while (lex_.peek().type != Tok::End) {
      Pattern p = parse_pattern();
      if (!names.insert(p.name).second)
        throw SpecError::duplicate_pattern(p.name);
      spec.patterns.push_back(std::move(p));
    }
    for (const auto& p : spec.patterns) check_bindings(p);
    return spec;
  }

 private:
  Pattern parse_pattern() {
    Token kw = expect(Tok::Ident, "'pattern'");
    if (kw.text != "pattern")
      throw SpecError::syntax(kw.line, kw.col, "'pattern'");
    Token name = expect(Tok::Ident, "a pattern name");
    expect(Tok::Colon, "':'");
    Pattern p;
    p.name = name.text;
    p.trigger = parse_event_constraint();
    expect(Tok::Arrow, "'=>'");
    p.consequence = parse_node(0);
    return p;
  }

  ConsequenceNode parse_node(int depth) {
    if (depth > kMaxNestingDepth)
      lex_.fail("shallower nesting");
    const Token& t = lex_.peek();
    if (t.type == Tok::LBrace) {
      lex_.take();
      auto kids = parse_node_list(Tok::RBrace, depth);
      return ConsequenceNode::unordered(std::move(kids));
    }
    if (t.type == Tok::LBracket) {
      lex_.take();
      auto kids = parse_node_list(Tok::RBracket, depth);
      return ConsequenceNode::ordered(std::move(kids));
    }
    if (t.type == Tok::Ident && t.text == "not") {
      lex_.take();
      const Token& next = lex_.peek();
      if (next.type != Tok::Ident || !kind_from_name(next.text))
        throw SpecError::syntax(next.line, next.col,
                                "an event kind after 'not' (negation is leaf-only)");
      return ConsequenceNode::forbid(parse_event_constraint());
    }
    return ConsequenceNode::require(parse_event_constraint());
  }

  std::vector<ConsequenceNode> parse_node_list(Tok closer, int depth) {
    std::vector<ConsequenceNode> kids;
    kids.push_back(parse_node(depth + 1));
    while (lex_.peek().type == Tok::Comma) {
      lex_.take();
      kids.push_back(parse_node(depth + 1));
    }
    expect(closer, closer == Tok::RBrace ? "'}' or ','" : "']' or ','");
    return kids;
  }

  EventConstraint parse_event_constraint() {
    Token kind_tok = expect(Tok::Ident, "an event kind");
    auto kind = kind_from_name(kind_tok.text);
    if (!kind || *kind == EventKind::Meta)
      throw SpecError::syntax(kind_tok.line, kind_tok.col,
                              "one of COMMAND, PRODUCT, CHANNEL, CHANGE, EVR");
    EventConstraint ec;
    ec.kind = *kind;
    expect(Tok::LBrace, "'{'");
    if (lex_.peek().type == Tok::RBrace) {
      lex_.take();
      return ec;
    }
    std::set<std::string> seen;
    while (true) {
      Token field = expect(Tok::Ident, "a field name");
      if (!seen.insert(field.text).second)
        throw SpecError::duplicate_field(field.line, field.col, field.text);
      expect(Tok::Colon, "':'");
      FieldConstraint fc;
      fc.field = field.text;
      fc.matcher = parse_matcher();
      ec.fields.push_back(std::move(fc));
      if (lex_.peek().type == Tok::Comma) {
        lex_.take();
        continue;
      }
      expect(Tok::RBrace, "'}' or ','");
      break;
    }
    return ec;
  }

  Matcher parse_matcher() {
    const Token& t = lex_.peek();
    switch (t.type) {
      case Tok::String: {
        Token s = lex_.take();
        return LiteralMatcher{Value::text(s.text)};
      }
      case Tok::Integer: {
        Token n = lex_.take();
        return LiteralMatcher{Value::integer(n.int_value)};
      }
      case Tok::Float: {
        Token n = lex_.take();
        return LiteralMatcher{Value::real(n.float_value)};
      }
      case Tok::CmpLt: return parse_compare(CompareOp::Lt);
      case Tok::CmpLe: return parse_compare(CompareOp::Le);
      case Tok::CmpGt: return parse_compare(CompareOp::Gt);
      case Tok::CmpGe: return parse_compare(CompareOp::Ge);
      case Tok::CmpNe: return parse_compare(CompareOp::Ne);
      case Tok::Ident: {
        if (t.text == "true" || t.text == "false") {
          Token b = lex_.take();
          return LiteralMatcher{Value::boolean(b.text == "true")};
        }
        if (t.text == "matches") {
          Token kw = lex_.take();
          Token pat = expect(Tok::String, "a regex string after 'matches'");
          try {
            return RegexMatcher::make(pat.text);
          } catch (const std::regex_error&) {
            throw SpecError::syntax(pat.line, pat.col, "a valid regular expression");
          }
        }
        Token ident = lex_.take();
        if (lex_.peek().type == Tok::LParen) {
          lex_.take();
          return parse_predicate_call(ident);
        }
        if (!is_lower_ident(ident.text))
          throw SpecError::syntax(ident.line, ident.col,
                                  "a lowercase variable name");
        return BindMatcher{ident.text};
      }
      default:
        throw SpecError::syntax(t.line, t.col, "a matcher");
    }
  }

  Matcher parse_compare(CompareOp op) {
    lex_.take();
    const Token& t = lex_.peek();
    Value rhs;
    switch (t.type) {
      case Tok::Integer: rhs = Value::integer(lex_.take().int_value); break;
      case Tok::Float: rhs = Value::real(lex_.take().float_value); break;
      case Tok::String: rhs = Value::text(lex_.take().text); break;
      case Tok::Ident:
        if (t.text == "true" || t.text == "false") {
          rhs = Value::boolean(lex_.take().text == "true");
          break;
        }
        [[fallthrough]];
      default:
        throw SpecError::syntax(t.line, t.col, "a literal after a comparison operator");
    }
    return CompareMatcher{op, std::move(rhs)};
  }

  Matcher parse_predicate_call(const Token& name) {
    PredicateMatcher pm;
    pm.name = name.text;
    if (lex_.peek().type == Tok::RParen) {
      lex_.take();
      return pm;
    }
    while (true) {
      const Token& t = lex_.peek();
      switch (t.type) {
        case Tok::String: pm.args.emplace_back(Value::text(lex_.take().text)); break;
        case Tok::Integer: pm.args.emplace_back(Value::integer(lex_.take().int_value)); break;
        case Tok::Float: pm.args.emplace_back(Value::real(lex_.take().float_value)); break;
        case Tok::Ident: {
          if (t.text == "true" || t.text == "false") {
            pm.args.emplace_back(Value::boolean(lex_.take().text == "true"));
            break;
          }
          Token var = lex_.take();
          if (!is_lower_ident(var.text))
            throw SpecError::syntax(var.line, var.col, "a lowercase variable name");
          pm.args.emplace_back(VarRef{var.text});
          break;
        }
        default:
          throw SpecError::syntax(t.line, t.col, "a literal or variable argument");
      }
      if (lex_.peek().type == Tok::Comma) {
        lex_.take();
        continue;
      }
      expect(Tok::RParen, "')' or ','");
      break;
    }
    return pm;
  }

  Token expect(Tok type, const std::string& what) {
    if (lex_.peek().type != type) lex_.fail(what);
    return lex_.take();
  }

  // ---- binding analysis ----------------------------------------------

  // Binders live in the trigger and in Require constraints; every other
  // bare identifier (Forbid fields, predicate arguments) must already be
  // bound along its ordered path. Unordered children see only the scope
  // entry set and cannot export bindings to siblings or successors.
  void check_bindings(const Pattern& p) {
    std::set<std::string> bound;
    bind_constraint(p, p.trigger, true, bound);
    check_node(p, p.consequence, bound);
  }

  void bind_constraint(const Pattern& p, const EventConstraint& c, bool can_bind,
                       std::set<std::string>& bound) {
    for (const auto& fc : c.fields) {
      if (const auto* b = std::get_if<BindMatcher>(&fc.matcher)) {
        if (!bound.count(b->var)) {
          if (!can_bind) throw SpecError::unbound_variable(p.name, b->var);
          bound.insert(b->var);
        }
      } else if (const auto* pc = std::get_if<PredicateMatcher>(&fc.matcher)) {
        for (const auto& arg : pc->args) {
          if (const auto* v = std::get_if<VarRef>(&arg)) {
            if (!bound.count(v->var))
              throw SpecError::unbound_variable(p.name, v->var);
          }
        }
      }
    }
  }

  std::set<std::string> check_node(const Pattern& p, const ConsequenceNode& n,
                                   const std::set<std::string>& entry) {
    std::set<std::string> bound = entry;
    switch (n.type) {
      case ConsequenceNode::Type::Require:
        bind_constraint(p, n.constraint, true, bound);
        return bound;
      case ConsequenceNode::Type::Forbid:
        bind_constraint(p, n.constraint, false, bound);
        return bound;
      case ConsequenceNode::Type::Ordered:
        for (const auto& child : n.children) bound = check_node(p, child, bound);
        return bound;
      case ConsequenceNode::Type::Unordered:
        for (const auto& child : n.children) check_node(p, child, bound);
        return bound;  // sibling bindings do not escape the scope
    }
    return bound;
  }

  Lexer lex_;
};

}  // namespace

SpecError SpecError::syntax(int line, int col, const std::string& expected) {
  SpecError e(Code::Syntax, "syntax error at " + std::to_string(line) + ":" +
                                std::to_string(col) + ": expected " + expected);
  e.line_ = line;
  e.col_ = col;
  return e;
}

SpecError SpecError::unbound_variable(const std::string& pattern,
                                      const std::string& var) {
  SpecError e(Code::UnboundVariable,
              "pattern " + pattern + ": variable '" + var + "' is never bound");
  e.pattern_ = pattern;
  e.var_ = var;
  return e;
}

SpecError SpecError::duplicate_field(int line, int col, const std::string& field) {
  SpecError e(Code::DuplicateField, "duplicate field constraint '" + field +
                                        "' at " + std::to_string(line) + ":" +
                                        std::to_string(col));
  e.line_ = line;
  e.col_ = col;
  return e;
}

SpecError SpecError::duplicate_pattern(const std::string& name) {
  SpecError e(Code::DuplicatePattern, "duplicate pattern name '" + name + "'");
  e.pattern_ = name;
  return e;
}

RegexMatcher RegexMatcher::make(std::string pattern) {
  RegexMatcher m;
  m.compiled = std::make_shared<const std::regex>(pattern);
  m.pattern = std::move(pattern);
  return m;
}

ConsequenceNode ConsequenceNode::require(EventConstraint c) {
  ConsequenceNode n;
  n.type = Type::Require;
  n.constraint = std::move(c);
  return n;
}

ConsequenceNode ConsequenceNode::forbid(EventConstraint c) {
  ConsequenceNode n;
  n.type = Type::Forbid;
  n.constraint = std::move(c);
  return n;
}

ConsequenceNode ConsequenceNode::ordered(std::vector<ConsequenceNode> kids) {
  ConsequenceNode n;
  n.type = Type::Ordered;
  n.children = std::move(kids);
  return n;
}

ConsequenceNode ConsequenceNode::unordered(std::vector<ConsequenceNode> kids) {
  ConsequenceNode n;
  n.type = Type::Unordered;
  n.children = std::move(kids);
  return n;
}

Spec parse_spec(std::string_view text) { return Parser(text).parse(); }

}  // namespace lsc
