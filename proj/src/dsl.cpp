#include "guidescore/dsl.hpp"

#include <unicode/normalizer2.h>
#include <unicode/unistr.h>

#include <algorithm>
#include <array>
#include <charconv>
#include <set>
#include <system_error>

#include "guidescore/error.hpp"

namespace guidescore::dsl {

namespace {

constexpr std::array<std::pair<std::string_view, Unit>, 7> kUnits{{
    {"mg", Unit::mg},
    {"g", Unit::g},
    {"ml", Unit::ml},
    {"days", Unit::days},
    {"months", Unit::months},
    {"years", Unit::years},
    {"doses", Unit::doses},
}};

struct FunctionSpec {
  std::string_view name;
  std::size_t arity;
};

constexpr std::array<FunctionSpec, 6> kFunctions{{
    {"exists", 1},
    {"value", 1},
    {"patient", 1},
    {"context", 1},
    {"formulary", 1},
    {"jurisdiction", 0},
}};

const FunctionSpec* find_function(std::string_view name) {
  for (const auto& f : kFunctions) {
    if (f.name == name) return &f;
  }
  return nullptr;
}

bool is_keyword(std::string_view s) {
  return s == "and" || s == "or" || s == "not" || s == "true" || s == "false";
}

bool ident_start(char c) { return (c >= 'a' && c <= 'z') || c == '_'; }
bool ident_char(char c) { return ident_start(c) || (c >= '0' && c <= '9') || c == '.'; }
bool is_digit(char c) { return c >= '0' && c <= '9'; }

// ---------------------------------------------------------------------------
// Lexer

enum class Tok { ident, number, string, lparen, rparen, comma, cmp, kw_and, kw_or, kw_not, kw_true, kw_false, eof };

struct Token {
  Tok kind = Tok::eof;
  std::string text;  // identifier name, decoded string, number spelling
  std::size_t offset = 0;
  CompareOp op = CompareOp::eq;
};

std::string describe(const Token& t) {
  switch (t.kind) {
    case Tok::eof: return "end of input";
    case Tok::string: return "string";
    case Tok::number: return "number '" + t.text + "'";
    default: return "'" + t.text + "'";
  }
}

std::vector<Token> lex(std::string_view src) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < src.size()) {
    const char c = src[i];
    if (c == ' ' || c == '\t' || c == '\n' || c == '\r') {
      ++i;
      continue;
    }
    Token t;
    t.offset = i;
    if (ident_start(c)) {
      std::size_t j = i;
      while (j < src.size() && ident_char(src[j])) ++j;
      t.text = std::string(src.substr(i, j - i));
      if (t.text == "and") t.kind = Tok::kw_and;
      else if (t.text == "or") t.kind = Tok::kw_or;
      else if (t.text == "not") t.kind = Tok::kw_not;
      else if (t.text == "true") t.kind = Tok::kw_true;
      else if (t.text == "false") t.kind = Tok::kw_false;
      else t.kind = Tok::ident;
      i = j;
    } else if (is_digit(c) || (c == '-' && i + 1 < src.size() && is_digit(src[i + 1]))) {
      std::size_t j = i + 1;
      while (j < src.size() && is_digit(src[j])) ++j;
      if (j < src.size() && src[j] == '.') {
        ++j;
        if (j >= src.size() || !is_digit(src[j])) {
          throw Error(ErrorCode::parse, "malformed number: expected digit after '.'", j);
        }
        while (j < src.size() && is_digit(src[j])) ++j;
      }
      t.kind = Tok::number;
      t.text = std::string(src.substr(i, j - i));
      i = j;
    } else if (c == '"') {
      std::size_t j = i + 1;
      std::string decoded;
      bool closed = false;
      while (j < src.size()) {
        const char d = src[j];
        if (d == '"') {
          closed = true;
          ++j;
          break;
        }
        if (d == '\\') {
          if (j + 1 >= src.size()) break;
          switch (src[j + 1]) {
            case '"': decoded += '"'; break;
            case '\\': decoded += '\\'; break;
            case 'n': decoded += '\n'; break;
            case 't': decoded += '\t'; break;
            case 'r': decoded += '\r'; break;
            default:
              throw Error(ErrorCode::parse, "unknown escape sequence in string", j);
          }
          j += 2;
          continue;
        }
        decoded += d;
        ++j;
      }
      if (!closed) throw Error(ErrorCode::parse, "unterminated string literal", i);
      t.kind = Tok::string;
      t.text = std::move(decoded);
      i = j;
    } else if (c == '(') {
      t.kind = Tok::lparen;
      t.text = "(";
      ++i;
    } else if (c == ')') {
      t.kind = Tok::rparen;
      t.text = ")";
      ++i;
    } else if (c == ',') {
      t.kind = Tok::comma;
      t.text = ",";
      ++i;
    } else if (c == '=' || c == '!' || c == '<' || c == '>') {
      const bool eq_next = i + 1 < src.size() && src[i + 1] == '=';
      t.kind = Tok::cmp;
      if (c == '=' || c == '!') {
        if (!eq_next) {
          throw Error(ErrorCode::parse, std::string("expected '=' after '") + c + "'", i + 1);
        }
        t.op = c == '=' ? CompareOp::eq : CompareOp::ne;
      } else if (c == '<') {
        t.op = eq_next ? CompareOp::le : CompareOp::lt;
      } else {
        t.op = eq_next ? CompareOp::ge : CompareOp::gt;
      }
      t.text = std::string(src.substr(i, eq_next ? 2 : 1));
      i += eq_next ? 2 : 1;
    } else {
      throw Error(ErrorCode::parse, std::string("unexpected character '") + c + "'", i);
    }
    out.push_back(std::move(t));
  }
  Token end;
  end.kind = Tok::eof;
  end.offset = src.size();
  out.push_back(end);
  return out;
}

// ---------------------------------------------------------------------------
// Parser

bool is_connective(const Expression& e) {
  const auto& v = e.node().v;
  return std::holds_alternative<NotNode>(v) || std::holds_alternative<AndNode>(v) ||
         std::holds_alternative<OrNode>(v);
}

class Parser {
 public:
  explicit Parser(std::string_view src) : tokens_(lex(src)) {}

  Expression parse() {
    Expression e = parse_or();
    if (peek().kind != Tok::eof) fail(continuation_with("end of input"));
    return e;
  }

 private:
  const Token& peek() const { return tokens_[pos_]; }
  Token take() { return tokens_[pos_++]; }

  std::set<std::string> continuation_with(std::string extra) const {
    std::set<std::string> s = continuation_;
    s.insert(std::move(extra));
    return s;
  }

  // At end of input the dangling construct is reported at its last token.
  [[noreturn]] void fail(const std::set<std::string>& expected) const {
    const Token& t = peek();
    std::size_t offset = t.offset;
    if (t.kind == Tok::eof && pos_ > 0) offset = tokens_[pos_ - 1].offset;
    std::string msg = "expected one of {";
    bool first = true;
    for (const auto& e : expected) {
      if (!first) msg += ", ";
      msg += e;
      first = false;
    }
    msg += "}, found " + describe(t);
    throw Error(ErrorCode::parse, msg, offset);
  }

  Expression parse_or() {
    Expression lhs = parse_and();
    while (peek().kind == Tok::kw_or) {
      take();
      lhs = Expression::disj(lhs, parse_and());
    }
    return lhs;
  }

  Expression parse_and() {
    Expression lhs = parse_unary();
    while (peek().kind == Tok::kw_and) {
      take();
      lhs = Expression::conj(lhs, parse_unary());
    }
    return lhs;
  }

  Expression parse_unary() {
    if (peek().kind == Tok::kw_not) {
      take();
      return Expression::negate(parse_unary());
    }
    return parse_cmp();
  }

  Expression parse_cmp() {
    const std::size_t lhs_offset = peek().offset;
    Expression lhs = parse_operand();
    if (peek().kind != Tok::cmp) {
      continuation_ = {"comparison operator", "and", "or"};
      return lhs;
    }
    const CompareOp op = take().op;
    const std::size_t rhs_offset = peek().offset;
    Expression rhs = parse_operand();
    if (is_connective(lhs)) {
      throw Error(ErrorCode::parse, "comparison operand cannot be a boolean connective", lhs_offset);
    }
    if (is_connective(rhs)) {
      throw Error(ErrorCode::parse, "comparison operand cannot be a boolean connective", rhs_offset);
    }
    continuation_ = {"and", "or"};
    return Expression::compare(op, std::move(lhs), std::move(rhs));
  }

  Expression parse_operand() {
    static const std::set<std::string> kOperandStart{"number", "string", "true", "false", "identifier", "("};
    const Token& t = peek();
    switch (t.kind) {
      case Tok::number: {
        Token num = take();
        double value = 0.0;
        const char* first = num.text.data();
        const char* last = first + num.text.size();
        auto [ptr, ec] = std::from_chars(first, last, value);
        if (ec != std::errc{} || ptr != last) {
          throw Error(ErrorCode::parse, "number out of range", num.offset);
        }
        Unit unit = Unit::none;
        if (peek().kind == Tok::ident) {
          if (auto u = unit_from_name(peek().text)) {
            unit = *u;
            take();
          }
        }
        return Expression::literal(Quantity{value, unit});
      }
      case Tok::string: return Expression::literal(take().text);
      case Tok::kw_true: take(); return Expression::literal(true);
      case Tok::kw_false: take(); return Expression::literal(false);
      case Tok::ident: return parse_call();
      case Tok::lparen: {
        take();
        Expression inner = parse_or();
        if (peek().kind != Tok::rparen) fail(continuation_with(")"));
        take();
        continuation_ = {"comparison operator", "and", "or"};
        return inner;
      }
      default: fail(kOperandStart);
    }
  }

  Expression parse_call() {
    Token name = take();
    const FunctionSpec* spec = find_function(name.text);
    if (spec == nullptr) {
      throw Error(ErrorCode::unknown_func, "unknown function '" + name.text + "'", name.offset);
    }
    if (peek().kind != Tok::lparen) fail({"("});
    take();
    std::vector<std::string> args;
    if (peek().kind != Tok::rparen) {
      while (true) {
        if (peek().kind != Tok::ident && peek().kind != Tok::string) fail({"identifier", "string"});
        args.push_back(take().text);
        if (peek().kind == Tok::comma) {
          take();
          continue;
        }
        if (peek().kind != Tok::rparen) fail({",", ")"});
        break;
      }
    }
    take();
    if (args.size() != spec->arity) {
      throw Error(ErrorCode::parse,
                  "function '" + name.text + "' takes " + std::to_string(spec->arity) + " argument(s), got " +
                      std::to_string(args.size()),
                  name.offset);
    }
    return Expression::call(name.text, std::move(args));
  }

  std::vector<Token> tokens_;
  std::size_t pos_ = 0;
  std::set<std::string> continuation_{"comparison operator", "and", "or"};
};

// ---------------------------------------------------------------------------
// Formatter

enum Prec { kOr = 1, kAnd = 2, kNot = 3, kCmp = 4, kAtom = 5 };

int precedence(const Expression& e) {
  return std::visit(
      [](const auto& n) -> int {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, OrNode>) return kOr;
        else if constexpr (std::is_same_v<T, AndNode>) return kAnd;
        else if constexpr (std::is_same_v<T, NotNode>) return kNot;
        else if constexpr (std::is_same_v<T, CompareNode>) return kCmp;
        else return kAtom;
      },
      e.node().v);
}

std::string quote(std::string_view s) {
  std::string out = "\"";
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

std::string format_number(double v) {
  std::array<char, 400> buf{};
  auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v, std::chars_format::fixed);
  return std::string(buf.data(), res.ptr);
}

void emit(const Expression& e, std::string& out);

void emit_child(const Expression& child, bool parens, std::string& out) {
  if (parens) out += '(';
  emit(child, out);
  if (parens) out += ')';
}

void emit(const Expression& e, std::string& out) {
  std::visit(
      [&](const auto& n) {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, LiteralNode>) {
          if (const auto* b = std::get_if<bool>(&n.value)) {
            out += *b ? "true" : "false";
          } else if (const auto* q = std::get_if<Quantity>(&n.value)) {
            out += format_number(q->value);
            if (q->unit != Unit::none) {
              out += ' ';
              out += unit_name(q->unit);
            }
          } else {
            out += quote(std::get<std::string>(n.value));
          }
        } else if constexpr (std::is_same_v<T, CallNode>) {
          out += n.name;
          out += '(';
          for (std::size_t i = 0; i < n.args.size(); ++i) {
            if (i) out += ", ";
            const auto& a = n.args[i];
            if (is_identifier(a) && !is_keyword(a)) out += a;
            else out += quote(a);
          }
          out += ')';
        } else if constexpr (std::is_same_v<T, CompareNode>) {
          emit_child(n.lhs, precedence(n.lhs) <= kCmp, out);
          out += ' ';
          out += compare_op_text(n.op);
          out += ' ';
          emit_child(n.rhs, precedence(n.rhs) <= kCmp, out);
        } else if constexpr (std::is_same_v<T, NotNode>) {
          out += "not ";
          emit_child(n.operand, precedence(n.operand) < kNot, out);
        } else if constexpr (std::is_same_v<T, AndNode>) {
          emit_child(n.lhs, precedence(n.lhs) < kAnd, out);
          out += " and ";
          emit_child(n.rhs, precedence(n.rhs) <= kAnd, out);
        } else {
          emit_child(n.lhs, precedence(n.lhs) < kOr, out);
          out += " or ";
          emit_child(n.rhs, precedence(n.rhs) <= kOr, out);
        }
      },
      e.node().v);
}

// ---------------------------------------------------------------------------
// Evaluator

std::string_view value_kind(const Value& v) {
  if (std::holds_alternative<bool>(v)) return "boolean";
  if (std::holds_alternative<Quantity>(v)) return "number";
  return "text";
}

template <typename T>
bool ordered(CompareOp op, const T& a, const T& b) {
  switch (op) {
    case CompareOp::eq: return a == b;
    case CompareOp::ne: return a != b;
    case CompareOp::lt: return a < b;
    case CompareOp::le: return a <= b;
    case CompareOp::gt: return a > b;
    case CompareOp::ge: return a >= b;
  }
  return false;
}

bool is_equality(CompareOp op) { return op == CompareOp::eq || op == CompareOp::ne; }

TriState compare_values(CompareOp op, const Value& a, const Value& b) {
  if (a.index() != b.index()) {
    throw Error(ErrorCode::type, "cannot compare " + std::string(value_kind(a)) + " with " +
                                     std::string(value_kind(b)));
  }
  if (const auto* qa = std::get_if<Quantity>(&a)) {
    const auto& qb = std::get<Quantity>(b);
    if (qa->unit != qb.unit) {
      auto show = [](Unit u) { return u == Unit::none ? std::string("unitless") : std::string(unit_name(u)); };
      throw Error(ErrorCode::unit, "cannot compare " + show(qa->unit) + " with " + show(qb.unit));
    }
    return tri_from_bool(ordered(op, qa->value, qb.value));
  }
  if (!is_equality(op)) {
    throw Error(ErrorCode::type, "operator " + std::string(compare_op_text(op)) + " is not defined on " +
                                     std::string(value_kind(a)));
  }
  bool eq;
  if (const auto* ba = std::get_if<bool>(&a)) eq = *ba == std::get<bool>(b);
  else eq = text_equal(std::get<std::string>(a), std::get<std::string>(b));
  return tri_from_bool(op == CompareOp::eq ? eq : !eq);
}

template <typename Map>
std::optional<Value> lookup(const Map& m, const std::string& key) {
  auto it = m.find(key);
  if (it == m.end()) return std::nullopt;
  return it->second;
}

class Evaluator {
 public:
  explicit Evaluator(const EvaluationEnv& env) : env_(env) {}

  TriState truth(const Expression& e) const {
    return std::visit(
        [&](const auto& n) -> TriState {
          using T = std::decay_t<decltype(n)>;
          if constexpr (std::is_same_v<T, LiteralNode>) {
            return as_truth(n.value);
          } else if constexpr (std::is_same_v<T, CallNode>) {
            auto v = call(n);
            return v ? as_truth(*v) : TriState::unknown;
          } else if constexpr (std::is_same_v<T, CompareNode>) {
            // Both sides are evaluated so type errors never hide behind a gap.
            auto a = operand(n.lhs);
            auto b = operand(n.rhs);
            if (!a || !b) return TriState::unknown;
            return compare_values(n.op, *a, *b);
          } else if constexpr (std::is_same_v<T, NotNode>) {
            return tri_not(truth(n.operand));
          } else if constexpr (std::is_same_v<T, AndNode>) {
            const TriState a = truth(n.lhs);
            return tri_and(a, truth(n.rhs));
          } else {
            const TriState a = truth(n.lhs);
            return tri_or(a, truth(n.rhs));
          }
        },
        e.node().v);
  }

 private:
  static TriState as_truth(const Value& v) {
    if (const auto* b = std::get_if<bool>(&v)) return tri_from_bool(*b);
    throw Error(ErrorCode::type, std::string(value_kind(v)) + " used where a boolean is required");
  }

  std::optional<Value> operand(const Expression& e) const {
    if (const auto* lit = std::get_if<LiteralNode>(&e.node().v)) return lit->value;
    if (const auto* c = std::get_if<CallNode>(&e.node().v)) return call(*c);
    const TriState t = truth(e);
    if (t == TriState::unknown) return std::nullopt;
    return Value{t == TriState::true_};
  }

  std::optional<Value> call(const CallNode& c) const {
    const std::string& name = c.name;
    if (name == "jurisdiction") {
      if (env_.jurisdiction.empty()) return std::nullopt;
      return Value{env_.jurisdiction};
    }
    const std::string& key = c.args.at(0);
    if (name == "exists") return Value{env_.assertions.count(key) > 0};
    if (name == "value") return lookup(env_.assertions, key);
    if (name == "patient") return lookup(env_.patient, key);
    if (name == "context") return lookup(env_.context, key);
    if (name == "formulary") {
      auto it = env_.formulary.find(key);
      if (it == env_.formulary.end()) return std::nullopt;
      return Value{std::string(formulary_status_name(it->second))};
    }
    throw Error(ErrorCode::unknown_func, "unknown function '" + name + "'");
  }

  const EvaluationEnv& env_;
};

bool nodes_equal(const Node& a, const Node& b) {
  if (a.v.index() != b.v.index()) return false;
  return std::visit(
      [&](const auto& x) -> bool {
        using T = std::decay_t<decltype(x)>;
        const auto& y = std::get<T>(b.v);
        if constexpr (std::is_same_v<T, LiteralNode>) return x.value == y.value;
        else if constexpr (std::is_same_v<T, CallNode>) return x.name == y.name && x.args == y.args;
        else if constexpr (std::is_same_v<T, CompareNode>) return x.op == y.op && x.lhs == y.lhs && x.rhs == y.rhs;
        else if constexpr (std::is_same_v<T, NotNode>) return x.operand == y.operand;
        else return x.lhs == y.lhs && x.rhs == y.rhs;
      },
      a.v);
}

std::shared_ptr<const Node> make(auto&& alt) {
  return std::make_shared<const Node>(Node{std::forward<decltype(alt)>(alt)});
}

}  // namespace

// ---------------------------------------------------------------------------

std::string_view unit_name(Unit unit) noexcept {
  for (const auto& [name, u] : kUnits) {
    if (u == unit) return name;
  }
  return "";
}

std::optional<Unit> unit_from_name(std::string_view name) noexcept {
  for (const auto& [n, u] : kUnits) {
    if (n == name) return u;
  }
  return std::nullopt;
}

std::string_view tristate_name(TriState t) noexcept {
  switch (t) {
    case TriState::true_: return "TRUE";
    case TriState::false_: return "FALSE";
    case TriState::unknown: return "UNKNOWN";
  }
  return "UNKNOWN";
}

TriState tri_not(TriState a) noexcept {
  if (a == TriState::unknown) return a;
  return a == TriState::true_ ? TriState::false_ : TriState::true_;
}

TriState tri_and(TriState a, TriState b) noexcept {
  if (a == TriState::false_ || b == TriState::false_) return TriState::false_;
  if (a == TriState::unknown || b == TriState::unknown) return TriState::unknown;
  return TriState::true_;
}

TriState tri_or(TriState a, TriState b) noexcept {
  if (a == TriState::true_ || b == TriState::true_) return TriState::true_;
  if (a == TriState::unknown || b == TriState::unknown) return TriState::unknown;
  return TriState::false_;
}

std::string_view compare_op_text(CompareOp op) noexcept {
  switch (op) {
    case CompareOp::eq: return "==";
    case CompareOp::ne: return "!=";
    case CompareOp::lt: return "<";
    case CompareOp::le: return "<=";
    case CompareOp::gt: return ">";
    case CompareOp::ge: return ">=";
  }
  return "==";
}

std::string_view formulary_status_name(FormularyStatus s) noexcept {
  switch (s) {
    case FormularyStatus::available: return "available";
    case FormularyStatus::shortage: return "shortage";
    case FormularyStatus::unavailable: return "unavailable";
  }
  return "available";
}

std::optional<FormularyStatus> formulary_status_from_name(std::string_view name) noexcept {
  if (name == "available") return FormularyStatus::available;
  if (name == "shortage") return FormularyStatus::shortage;
  if (name == "unavailable") return FormularyStatus::unavailable;
  return std::nullopt;
}

EvaluationEnv EvaluationEnv::overlaid(const EvaluationEnv& delta) const {
  EvaluationEnv out = *this;
  for (const auto& [k, v] : delta.assertions) out.assertions.insert_or_assign(k, v);
  for (const auto& [k, v] : delta.patient) out.patient.insert_or_assign(k, v);
  for (const auto& [k, v] : delta.context) out.context.insert_or_assign(k, v);
  for (const auto& [k, v] : delta.formulary) out.formulary.insert_or_assign(k, v);
  if (!delta.jurisdiction.empty()) out.jurisdiction = delta.jurisdiction;
  return out;
}

bool EvaluationEnv::empty() const {
  return assertions.empty() && patient.empty() && context.empty() && formulary.empty() && jurisdiction.empty();
}

Expression Expression::literal(Value v) { return Expression(make(LiteralNode{std::move(v)})); }

Expression Expression::call(std::string name, std::vector<std::string> args) {
  return Expression(make(CallNode{std::move(name), std::move(args)}));
}

Expression Expression::compare(CompareOp op, Expression lhs, Expression rhs) {
  return Expression(make(CompareNode{op, std::move(lhs), std::move(rhs)}));
}

Expression Expression::negate(Expression operand) { return Expression(make(NotNode{std::move(operand)})); }

Expression Expression::conj(Expression lhs, Expression rhs) {
  return Expression(make(AndNode{std::move(lhs), std::move(rhs)}));
}

Expression Expression::disj(Expression lhs, Expression rhs) {
  return Expression(make(OrNode{std::move(lhs), std::move(rhs)}));
}

bool operator==(const Expression& a, const Expression& b) {
  if (a.root_ == b.root_) return true;
  if (!a.root_ || !b.root_) return false;
  return nodes_equal(*a.root_, *b.root_);
}

bool is_known_function(std::string_view name) noexcept { return find_function(name) != nullptr; }

Expression parse_expression(std::string_view text) { return Parser(text).parse(); }

std::string format_expression(const Expression& expr) {
  std::string out;
  emit(expr, out);
  return out;
}

TriState evaluate_expression(const Expression& expr, const EvaluationEnv& env) {
  return Evaluator(env).truth(expr);
}

std::string nfc(std::string_view text) {
  if (std::all_of(text.begin(), text.end(), [](char c) { return static_cast<unsigned char>(c) < 0x80; })) {
    return std::string(text);
  }
  UErrorCode status = U_ZERO_ERROR;
  const icu::Normalizer2* norm = icu::Normalizer2::getNFCInstance(status);
  if (U_FAILURE(status)) return std::string(text);
  icu::UnicodeString in = icu::UnicodeString::fromUTF8(icu::StringPiece(text.data(), static_cast<int32_t>(text.size())));
  icu::UnicodeString normalized = norm->normalize(in, status);
  if (U_FAILURE(status)) return std::string(text);
  std::string out;
  normalized.toUTF8String(out);
  return out;
}

bool text_equal(std::string_view a, std::string_view b) { return a == b || nfc(a) == nfc(b); }

bool is_identifier(std::string_view text) noexcept {
  if (text.empty() || !ident_start(text.front())) return false;
  return std::all_of(text.begin(), text.end(), ident_char);
}

}  // namespace guidescore::dsl
