#pragma once

// Predicate language for clause applicability, satisfaction and override
// preconditions.
//
//   expr    := or
//   or      := and ("or" and)*
//   and     := unary ("and" unary)*
//   unary   := "not" unary | cmp
//   cmp     := operand (CMPOP operand)?
//   operand := literal | call | "(" expr ")"
//   call    := IDENT "(" (arg ("," arg)*)? ")"
//   literal := NUMBER UNIT? | STRING | "true" | "false"
//
// Evaluation is three-valued (Kleene). A missing fact yields Unknown rather
// than False, except exists() which is always decided.

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace guidescore::dsl {

enum class Unit { none, mg, g, ml, days, months, years, doses };

std::string_view unit_name(Unit unit) noexcept;
std::optional<Unit> unit_from_name(std::string_view name) noexcept;

struct Quantity {
  double value = 0.0;
  Unit unit = Unit::none;
  friend bool operator==(const Quantity&, const Quantity&) = default;
};

using Value = std::variant<bool, Quantity, std::string>;

enum class TriState { false_, true_, unknown };

std::string_view tristate_name(TriState t) noexcept;
TriState tri_not(TriState a) noexcept;
TriState tri_and(TriState a, TriState b) noexcept;
TriState tri_or(TriState a, TriState b) noexcept;
inline TriState tri_from_bool(bool b) noexcept { return b ? TriState::true_ : TriState::false_; }

enum class CompareOp { eq, ne, lt, le, gt, ge };
std::string_view compare_op_text(CompareOp op) noexcept;

enum class FormularyStatus { available, shortage, unavailable };
std::string_view formulary_status_name(FormularyStatus s) noexcept;
std::optional<FormularyStatus> formulary_status_from_name(std::string_view name) noexcept;

// Facts an expression can consult. Keys are dotted identifiers.
struct EvaluationEnv {
  std::map<std::string, Value> assertions;
  std::map<std::string, Value> patient;
  std::map<std::string, Value> context;
  std::map<std::string, FormularyStatus> formulary;
  std::string jurisdiction;

  // Entries of `delta` replace same-keyed entries here; a nonempty
  // delta jurisdiction replaces ours.
  EvaluationEnv overlaid(const EvaluationEnv& delta) const;
  bool empty() const;
  friend bool operator==(const EvaluationEnv&, const EvaluationEnv&) = default;
};

struct Node;

// Immutable expression tree; copies share structure.
class Expression {
 public:
  Expression() = default;
  explicit Expression(std::shared_ptr<const Node> root) : root_(std::move(root)) {}

  const Node& node() const { return *root_; }
  bool valid() const { return root_ != nullptr; }

  static Expression literal(Value v);
  static Expression call(std::string name, std::vector<std::string> args);
  static Expression compare(CompareOp op, Expression lhs, Expression rhs);
  static Expression negate(Expression operand);
  static Expression conj(Expression lhs, Expression rhs);
  static Expression disj(Expression lhs, Expression rhs);

  friend bool operator==(const Expression& a, const Expression& b);

 private:
  std::shared_ptr<const Node> root_;
};

struct LiteralNode {
  Value value;
};
struct CallNode {
  std::string name;
  std::vector<std::string> args;
};
struct CompareNode {
  CompareOp op;
  Expression lhs;
  Expression rhs;
};
struct NotNode {
  Expression operand;
};
struct AndNode {
  Expression lhs;
  Expression rhs;
};
struct OrNode {
  Expression lhs;
  Expression rhs;
};

struct Node {
  std::variant<LiteralNode, CallNode, CompareNode, NotNode, AndNode, OrNode> v;
};

// Functions the language knows about, with their fixed arity.
bool is_known_function(std::string_view name) noexcept;

// Throws Error{parse} with the failing byte offset and the expected-token set
// in the message, or Error{unknown_func}.
Expression parse_expression(std::string_view text);

// Canonical text: single spaces, only the parentheses precedence requires.
std::string format_expression(const Expression& expr);

// Throws Error{unit} or Error{type} on ill-typed comparisons; never otherwise.
TriState evaluate_expression(const Expression& expr, const EvaluationEnv& env);

// Exact, case-sensitive comparison after NFC normalisation.
bool text_equal(std::string_view a, std::string_view b);
std::string nfc(std::string_view text);

bool is_identifier(std::string_view text) noexcept;

}  // namespace guidescore::dsl
