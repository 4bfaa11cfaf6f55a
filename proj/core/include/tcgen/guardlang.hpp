#pragma once

// Guard expression language: parsing, typing and evaluation of the relational
// predicates and assignment actions attached to state-machine transitions.
//
// Grammar (full EBNF in docs/grammar.md):
//
//   guard   := arith relop arith
//   action  := ident ":=" arith
//   arith   := term (("+" | "-") term)*
//   term    := factor (("*" | "/") factor)*
//   factor  := "-" factor | primary
//   primary := number | ident | "(" arith ")"
//
// A guard holds exactly one relational operator, at the root. There are no
// boolean connectives; compound conditions must be modeled as separate
// transitions. Integer division truncates toward zero. Real literals are
// 64-bit binary floating point and comparisons are exact on the represented
// values.

#include <cstdint>
#include <map>
#include <memory>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>

namespace tcgen::guardlang {

// ---------------------------------------------------------------------------
// Numeric values
// ---------------------------------------------------------------------------

enum class NumKind { Integer, Real };

/// A number that is exactly an int64 or exactly a double. All-integer
/// arithmetic stays in int64 (overflow-checked); anything mixed promotes
/// to double.
class Value {
public:
    Value() = default;

    static Value integer(std::int64_t v) {
        Value r;
        r.kind_ = NumKind::Integer;
        r.int_ = v;
        return r;
    }
    static Value real(double v) {
        Value r;
        r.kind_ = NumKind::Real;
        r.real_ = v;
        return r;
    }

    NumKind kind() const { return kind_; }
    bool is_integer() const { return kind_ == NumKind::Integer; }

    std::int64_t as_integer() const {
        if (kind_ != NumKind::Integer) throw std::logic_error("Value is not an integer");
        return int_;
    }
    /// Widening read; exact for integers up to 2^53.
    double as_real() const { return is_integer() ? static_cast<double>(int_) : real_; }

private:
    NumKind kind_ = NumKind::Integer;
    std::int64_t int_ = 0;
    double real_ = 0.0;
};

/// Raised by Value arithmetic; evaluation wraps it into EvalError with the
/// offending node's source offset.
class ArithmeticError : public std::runtime_error {
public:
    enum class Code { DivideByZero, Overflow };

    ArithmeticError(Code code, const std::string& what)
        : std::runtime_error(what), code_(code) {}
    Code code() const { return code_; }

private:
    Code code_;
};

Value v_add(const Value& a, const Value& b);
Value v_sub(const Value& a, const Value& b);
Value v_mul(const Value& a, const Value& b);
Value v_div(const Value& a, const Value& b);  // integer division truncates toward zero
Value v_neg(const Value& a);
Value v_abs(const Value& a);

/// Numeric three-way comparison: -1, 0 or 1. Both integers compare exactly
/// in int64; otherwise both sides are compared as double, with no epsilon.
int v_compare(const Value& a, const Value& b);

bool v_equal(const Value& a, const Value& b);

// ---------------------------------------------------------------------------
// AST
// ---------------------------------------------------------------------------

enum class RelOp { Lt, Le, Gt, Ge, Eq, Ne };
enum class BinOp { Add, Sub, Mul, Div };

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

/// Immutable arithmetic expression node. `offset` is the 0-based byte offset
/// of the node's first token in the source text.
struct Expr {
    enum class Kind { IntLiteral, RealLiteral, Variable, Binary, Negate };

    Kind kind = Kind::IntLiteral;
    std::size_t offset = 0;

    std::int64_t int_value = 0;  // IntLiteral
    double real_value = 0.0;     // RealLiteral
    std::string name;            // Variable
    BinOp op = BinOp::Add;       // Binary
    ExprPtr lhs;                 // Binary, Negate
    ExprPtr rhs;                 // Binary
};

/// Relational predicate (E1 op E2); exactly one relational operator, at the
/// root.
struct GuardExpr {
    RelOp op = RelOp::Lt;
    ExprPtr lhs;
    ExprPtr rhs;
    std::size_t op_offset = 0;
};

/// Assignment action `target := expr`.
struct ActionStmt {
    std::string target;
    ExprPtr expr;
    std::size_t offset = 0;
};

/// Variable bindings for evaluation. Ordered so iteration (and hence
/// serialization) is deterministic.
using Env = std::map<std::string, Value>;

// Structural equality, ignoring source offsets.
bool equal(const Expr& a, const Expr& b);
bool equal(const ExprPtr& a, const ExprPtr& b);
bool equal(const GuardExpr& a, const GuardExpr& b);
bool equal(const ActionStmt& a, const ActionStmt& b);

void collect_variables(const Expr& e, std::set<std::string>& out);
void collect_variables(const GuardExpr& g, std::set<std::string>& out);

/// Result type of an expression given the declared kinds of its variables.
/// Every referenced variable must be present in `kinds`.
NumKind infer_kind(const Expr& e, const std::map<std::string, NumKind>& kinds);

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

/// Syntax error; `offset` is the 0-based byte offset into the source text.
class ParseError : public std::runtime_error {
public:
    ParseError(std::size_t offset, const std::string& message);
    std::size_t offset() const { return offset_; }

private:
    std::size_t offset_;
};

/// Evaluation error (division by zero, unbound variable, integer overflow);
/// `offset` locates the offending AST node in its source text.
class EvalError : public std::runtime_error {
public:
    EvalError(std::size_t offset, const std::string& message);
    std::size_t offset() const { return offset_; }

private:
    std::size_t offset_;
};

// ---------------------------------------------------------------------------
// Operations
// ---------------------------------------------------------------------------

GuardExpr parse_guard(std::string_view text);
ActionStmt parse_action(std::string_view text);

Value eval_arith(const Expr& e, const Env& env);
inline Value eval_arith(const ExprPtr& e, const Env& env) { return eval_arith(*e, env); }

/// Whether `op` holds given a three-way comparison of its sides.
bool relop_holds(RelOp op, int comparison);

bool eval_guard(const GuardExpr& g, const Env& env);

/// Pretty-printers. Printing then reparsing yields a structurally identical
/// AST; parentheses are emitted wherever the tree shape requires them.
std::string to_string(const Expr& e);
std::string to_string(const GuardExpr& g);
std::string to_string(const ActionStmt& a);
std::string_view to_string(RelOp op);
std::string_view to_string(BinOp op);

}  // namespace tcgen::guardlang
