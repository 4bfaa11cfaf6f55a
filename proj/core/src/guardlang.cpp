#include "tcgen/guardlang.hpp"

#include <cassert>
#include <cctype>
#include <charconv>
#include <cmath>
#include <sstream>

namespace tcgen::guardlang {

// ---------------------------------------------------------------------------
// Value arithmetic
// ---------------------------------------------------------------------------

namespace {

[[noreturn]] void throw_overflow() {
    throw ArithmeticError(ArithmeticError::Code::Overflow, "integer overflow");
}

[[noreturn]] void throw_div_zero() {
    throw ArithmeticError(ArithmeticError::Code::DivideByZero, "division by zero");
}

}  // namespace

Value v_add(const Value& a, const Value& b) {
    if (a.is_integer() && b.is_integer()) {
        std::int64_t out;
        if (__builtin_add_overflow(a.as_integer(), b.as_integer(), &out)) throw_overflow();
        return Value::integer(out);
    }
    return Value::real(a.as_real() + b.as_real());
}

Value v_sub(const Value& a, const Value& b) {
    if (a.is_integer() && b.is_integer()) {
        std::int64_t out;
        if (__builtin_sub_overflow(a.as_integer(), b.as_integer(), &out)) throw_overflow();
        return Value::integer(out);
    }
    return Value::real(a.as_real() - b.as_real());
}

Value v_mul(const Value& a, const Value& b) {
    if (a.is_integer() && b.is_integer()) {
        std::int64_t out;
        if (__builtin_mul_overflow(a.as_integer(), b.as_integer(), &out)) throw_overflow();
        return Value::integer(out);
    }
    return Value::real(a.as_real() * b.as_real());
}

Value v_div(const Value& a, const Value& b) {
    if (a.is_integer() && b.is_integer()) {
        std::int64_t d = b.as_integer();
        if (d == 0) throw_div_zero();
        std::int64_t n = a.as_integer();
        if (n == INT64_MIN && d == -1) throw_overflow();
        return Value::integer(n / d);  // C++ division truncates toward zero
    }
    double d = b.as_real();
    if (d == 0.0) throw_div_zero();
    return Value::real(a.as_real() / d);
}

Value v_neg(const Value& a) {
    if (a.is_integer()) {
        if (a.as_integer() == INT64_MIN) throw_overflow();
        return Value::integer(-a.as_integer());
    }
    return Value::real(-a.as_real());
}

Value v_abs(const Value& a) {
    return v_compare(a, Value::integer(0)) < 0 ? v_neg(a) : a;
}

int v_compare(const Value& a, const Value& b) {
    if (a.is_integer() && b.is_integer()) {
        std::int64_t x = a.as_integer(), y = b.as_integer();
        return x < y ? -1 : (x > y ? 1 : 0);
    }
    double x = a.as_real(), y = b.as_real();
    return x < y ? -1 : (x > y ? 1 : 0);
}

bool v_equal(const Value& a, const Value& b) { return v_compare(a, b) == 0; }

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

namespace {

std::string at_offset(const std::string& message, std::size_t offset) {
    std::ostringstream os;
    os << message << " at offset " << offset;
    return os.str();
}

}  // namespace

ParseError::ParseError(std::size_t offset, const std::string& message)
    : std::runtime_error(at_offset(message, offset)), offset_(offset) {}

EvalError::EvalError(std::size_t offset, const std::string& message)
    : std::runtime_error(at_offset(message, offset)), offset_(offset) {}

// ---------------------------------------------------------------------------
// Lexer + recursive-descent parser
// ---------------------------------------------------------------------------

namespace {

struct Token {
    enum class Kind {
        IntNumber,
        RealNumber,
        Ident,
        Plus,
        Minus,
        Star,
        Slash,
        LParen,
        RParen,
        Lt,
        Le,
        Gt,
        Ge,
        EqEq,
        Ne,
        Assign,  // :=
        End,
    };

    Kind kind = Kind::End;
    std::size_t offset = 0;
    std::int64_t int_value = 0;
    double real_value = 0.0;
    std::string text;
};

class Lexer {
public:
    explicit Lexer(std::string_view src) : src_(src) {}

    Token next() {
        skip_ws();
        Token t;
        t.offset = pos_;
        if (pos_ >= src_.size()) {
            t.kind = Token::Kind::End;
            return t;
        }
        char c = src_[pos_];
        if (std::isdigit(static_cast<unsigned char>(c))) return lex_number();
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return lex_ident();
        switch (c) {
            case '+': ++pos_; t.kind = Token::Kind::Plus; return t;
            case '-': ++pos_; t.kind = Token::Kind::Minus; return t;
            case '*': ++pos_; t.kind = Token::Kind::Star; return t;
            case '/': ++pos_; t.kind = Token::Kind::Slash; return t;
            case '(': ++pos_; t.kind = Token::Kind::LParen; return t;
            case ')': ++pos_; t.kind = Token::Kind::RParen; return t;
            case '<':
                ++pos_;
                if (peek() == '=') { ++pos_; t.kind = Token::Kind::Le; }
                else t.kind = Token::Kind::Lt;
                return t;
            case '>':
                ++pos_;
                if (peek() == '=') { ++pos_; t.kind = Token::Kind::Ge; }
                else t.kind = Token::Kind::Gt;
                return t;
            case '=':
                ++pos_;
                if (peek() == '=') { ++pos_; t.kind = Token::Kind::EqEq; return t; }
                throw ParseError(t.offset, "unknown operator '='; did you mean '=='");
            case '!':
                ++pos_;
                if (peek() == '=') { ++pos_; t.kind = Token::Kind::Ne; return t; }
                throw ParseError(t.offset, "unknown operator '!'; did you mean '!='");
            case ':':
                ++pos_;
                if (peek() == '=') { ++pos_; t.kind = Token::Kind::Assign; return t; }
                throw ParseError(t.offset, "unknown operator ':'; did you mean ':='");
            default:
                throw ParseError(t.offset, std::string("unexpected character '") + c + "'");
        }
    }

private:
    char peek() const { return pos_ < src_.size() ? src_[pos_] : '\0'; }

    void skip_ws() {
        while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
    }

    Token lex_number() {
        Token t;
        t.offset = pos_;
        std::size_t start = pos_;
        while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
        bool is_real = false;
        if (peek() == '.') {
            ++pos_;
            if (!std::isdigit(static_cast<unsigned char>(peek())))
                throw ParseError(pos_, "expected digit after decimal point");
            while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
            is_real = true;
        }
        if (peek() == 'e' || peek() == 'E') {
            ++pos_;
            if (peek() == '+' || peek() == '-') ++pos_;
            if (!std::isdigit(static_cast<unsigned char>(peek())))
                throw ParseError(pos_, "expected digit in exponent");
            while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
            is_real = true;
        }
        std::string_view text = src_.substr(start, pos_ - start);
        if (is_real) {
            t.kind = Token::Kind::RealNumber;
            auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), t.real_value);
            if (ec != std::errc{} || ptr != text.data() + text.size())
                throw ParseError(start, "malformed real literal");
        } else {
            t.kind = Token::Kind::IntNumber;
            auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), t.int_value);
            if (ec == std::errc::result_out_of_range)
                throw ParseError(start, "integer literal out of range");
            if (ec != std::errc{} || ptr != text.data() + text.size())
                throw ParseError(start, "malformed integer literal");
        }
        return t;
    }

    Token lex_ident() {
        Token t;
        t.offset = pos_;
        std::size_t start = pos_;
        while (pos_ < src_.size() &&
               (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
            ++pos_;
        t.kind = Token::Kind::Ident;
        t.text = std::string(src_.substr(start, pos_ - start));
        return t;
    }

    std::string_view src_;
    std::size_t pos_ = 0;
};

class Parser {
public:
    explicit Parser(std::string_view src) : lexer_(src), tok_(lexer_.next()) {}

    GuardExpr parse_guard() {
        ExprPtr lhs = parse_arith();
        std::size_t op_offset = tok_.offset;
        RelOp op = expect_relop();
        ExprPtr rhs = parse_arith();
        expect_end();
        return GuardExpr{op, std::move(lhs), std::move(rhs), op_offset};
    }

    ActionStmt parse_action() {
        if (tok_.kind != Token::Kind::Ident)
            throw ParseError(tok_.offset, "expected variable name on the left of ':='");
        ActionStmt a;
        a.target = tok_.text;
        a.offset = tok_.offset;
        advance();
        if (tok_.kind != Token::Kind::Assign)
            throw ParseError(tok_.offset, "expected ':='");
        advance();
        a.expr = parse_arith();
        expect_end();
        return a;
    }

private:
    void advance() { tok_ = lexer_.next(); }

    void expect_end() {
        if (tok_.kind == Token::Kind::End) return;
        if (is_relop(tok_.kind))
            throw ParseError(tok_.offset, "only one relational operator is allowed");
        throw ParseError(tok_.offset, "trailing input");
    }

    static bool is_relop(Token::Kind k) {
        switch (k) {
            case Token::Kind::Lt:
            case Token::Kind::Le:
            case Token::Kind::Gt:
            case Token::Kind::Ge:
            case Token::Kind::EqEq:
            case Token::Kind::Ne:
                return true;
            default:
                return false;
        }
    }

    RelOp expect_relop() {
        RelOp op;
        switch (tok_.kind) {
            case Token::Kind::Lt: op = RelOp::Lt; break;
            case Token::Kind::Le: op = RelOp::Le; break;
            case Token::Kind::Gt: op = RelOp::Gt; break;
            case Token::Kind::Ge: op = RelOp::Ge; break;
            case Token::Kind::EqEq: op = RelOp::Eq; break;
            case Token::Kind::Ne: op = RelOp::Ne; break;
            default:
                throw ParseError(tok_.offset, "expected relational operator");
        }
        advance();
        return op;
    }

    ExprPtr parse_arith() {
        ExprPtr lhs = parse_term();
        while (tok_.kind == Token::Kind::Plus || tok_.kind == Token::Kind::Minus) {
            BinOp op = tok_.kind == Token::Kind::Plus ? BinOp::Add : BinOp::Sub;
            std::size_t off = tok_.offset;
            advance();
            ExprPtr rhs = parse_term();
            lhs = make_binary(op, std::move(lhs), std::move(rhs), off);
        }
        return lhs;
    }

    ExprPtr parse_term() {
        ExprPtr lhs = parse_factor();
        while (tok_.kind == Token::Kind::Star || tok_.kind == Token::Kind::Slash) {
            BinOp op = tok_.kind == Token::Kind::Star ? BinOp::Mul : BinOp::Div;
            std::size_t off = tok_.offset;
            advance();
            ExprPtr rhs = parse_factor();
            lhs = make_binary(op, std::move(lhs), std::move(rhs), off);
        }
        return lhs;
    }

    ExprPtr parse_factor() {
        if (tok_.kind == Token::Kind::Minus) {
            auto node = std::make_shared<Expr>();
            node->kind = Expr::Kind::Negate;
            node->offset = tok_.offset;
            advance();
            node->lhs = parse_factor();
            return node;
        }
        return parse_primary();
    }

    ExprPtr parse_primary() {
        auto node = std::make_shared<Expr>();
        node->offset = tok_.offset;
        switch (tok_.kind) {
            case Token::Kind::IntNumber:
                node->kind = Expr::Kind::IntLiteral;
                node->int_value = tok_.int_value;
                advance();
                return node;
            case Token::Kind::RealNumber:
                node->kind = Expr::Kind::RealLiteral;
                node->real_value = tok_.real_value;
                advance();
                return node;
            case Token::Kind::Ident:
                node->kind = Expr::Kind::Variable;
                node->name = tok_.text;
                advance();
                return node;
            case Token::Kind::LParen: {
                advance();
                ExprPtr inner = parse_arith();
                if (tok_.kind != Token::Kind::RParen)
                    throw ParseError(tok_.offset, "expected ')'");
                advance();
                return inner;
            }
            default:
                throw ParseError(tok_.offset, "expected expression");
        }
    }

    static ExprPtr make_binary(BinOp op, ExprPtr lhs, ExprPtr rhs, std::size_t off) {
        auto node = std::make_shared<Expr>();
        node->kind = Expr::Kind::Binary;
        node->op = op;
        node->offset = off;
        node->lhs = std::move(lhs);
        node->rhs = std::move(rhs);
        return node;
    }

    Lexer lexer_;
    Token tok_;
};

}  // namespace

GuardExpr parse_guard(std::string_view text) {
    if (text.empty()) throw ParseError(0, "empty guard");
    return Parser(text).parse_guard();
}

ActionStmt parse_action(std::string_view text) {
    if (text.empty()) throw ParseError(0, "empty action");
    return Parser(text).parse_action();
}

// ---------------------------------------------------------------------------
// Evaluation
// ---------------------------------------------------------------------------

Value eval_arith(const Expr& e, const Env& env) {
    switch (e.kind) {
        case Expr::Kind::IntLiteral:
            return Value::integer(e.int_value);
        case Expr::Kind::RealLiteral:
            return Value::real(e.real_value);
        case Expr::Kind::Variable: {
            auto it = env.find(e.name);
            if (it == env.end())
                throw EvalError(e.offset, "unbound variable '" + e.name + "'");
            return it->second;
        }
        case Expr::Kind::Negate: {
            Value v = eval_arith(*e.lhs, env);
            try {
                return v_neg(v);
            } catch (const ArithmeticError& err) {
                throw EvalError(e.offset, err.what());
            }
        }
        case Expr::Kind::Binary: {
            Value a = eval_arith(*e.lhs, env);
            Value b = eval_arith(*e.rhs, env);
            try {
                switch (e.op) {
                    case BinOp::Add: return v_add(a, b);
                    case BinOp::Sub: return v_sub(a, b);
                    case BinOp::Mul: return v_mul(a, b);
                    case BinOp::Div: return v_div(a, b);
                }
            } catch (const ArithmeticError& err) {
                throw EvalError(e.offset, err.what());
            }
        }
    }
    throw std::logic_error("corrupt expression node");
}

bool relop_holds(RelOp op, int c) {
    switch (op) {
        case RelOp::Lt: return c < 0;
        case RelOp::Le: return c <= 0;
        case RelOp::Gt: return c > 0;
        case RelOp::Ge: return c >= 0;
        case RelOp::Eq: return c == 0;
        case RelOp::Ne: return c != 0;
    }
    throw std::logic_error("corrupt relational operator");
}

bool eval_guard(const GuardExpr& g, const Env& env) {
    Value a = eval_arith(*g.lhs, env);
    Value b = eval_arith(*g.rhs, env);
    return relop_holds(g.op, v_compare(a, b));
}

// ---------------------------------------------------------------------------
// Structural equality / inspection
// ---------------------------------------------------------------------------

bool equal(const Expr& a, const Expr& b) {
    if (a.kind != b.kind) return false;
    switch (a.kind) {
        case Expr::Kind::IntLiteral:
            return a.int_value == b.int_value;
        case Expr::Kind::RealLiteral:
            return a.real_value == b.real_value;
        case Expr::Kind::Variable:
            return a.name == b.name;
        case Expr::Kind::Negate:
            return equal(*a.lhs, *b.lhs);
        case Expr::Kind::Binary:
            return a.op == b.op && equal(*a.lhs, *b.lhs) && equal(*a.rhs, *b.rhs);
    }
    return false;
}

bool equal(const ExprPtr& a, const ExprPtr& b) {
    if (!a || !b) return !a && !b;
    return equal(*a, *b);
}

bool equal(const GuardExpr& a, const GuardExpr& b) {
    return a.op == b.op && equal(a.lhs, b.lhs) && equal(a.rhs, b.rhs);
}

bool equal(const ActionStmt& a, const ActionStmt& b) {
    return a.target == b.target && equal(a.expr, b.expr);
}

void collect_variables(const Expr& e, std::set<std::string>& out) {
    switch (e.kind) {
        case Expr::Kind::Variable:
            out.insert(e.name);
            break;
        case Expr::Kind::Negate:
            collect_variables(*e.lhs, out);
            break;
        case Expr::Kind::Binary:
            collect_variables(*e.lhs, out);
            collect_variables(*e.rhs, out);
            break;
        default:
            break;
    }
}

void collect_variables(const GuardExpr& g, std::set<std::string>& out) {
    collect_variables(*g.lhs, out);
    collect_variables(*g.rhs, out);
}

NumKind infer_kind(const Expr& e, const std::map<std::string, NumKind>& kinds) {
    switch (e.kind) {
        case Expr::Kind::IntLiteral:
            return NumKind::Integer;
        case Expr::Kind::RealLiteral:
            return NumKind::Real;
        case Expr::Kind::Variable: {
            auto it = kinds.find(e.name);
            if (it == kinds.end())
                throw std::logic_error("infer_kind: undeclared variable '" + e.name + "'");
            return it->second;
        }
        case Expr::Kind::Negate:
            return infer_kind(*e.lhs, kinds);
        case Expr::Kind::Binary: {
            NumKind a = infer_kind(*e.lhs, kinds);
            NumKind b = infer_kind(*e.rhs, kinds);
            return (a == NumKind::Real || b == NumKind::Real) ? NumKind::Real : NumKind::Integer;
        }
    }
    throw std::logic_error("corrupt expression node");
}

// ---------------------------------------------------------------------------
// Printing
// ---------------------------------------------------------------------------

std::string_view to_string(RelOp op) {
    switch (op) {
        case RelOp::Lt: return "<";
        case RelOp::Le: return "<=";
        case RelOp::Gt: return ">";
        case RelOp::Ge: return ">=";
        case RelOp::Eq: return "==";
        case RelOp::Ne: return "!=";
    }
    return "?";
}

std::string_view to_string(BinOp op) {
    switch (op) {
        case BinOp::Add: return "+";
        case BinOp::Sub: return "-";
        case BinOp::Mul: return "*";
        case BinOp::Div: return "/";
    }
    return "?";
}

namespace {

int precedence(const Expr& e) {
    switch (e.kind) {
        case Expr::Kind::Binary:
            return (e.op == BinOp::Add || e.op == BinOp::Sub) ? 1 : 2;
        case Expr::Kind::Negate:
            return 3;
        default:
            return 4;
    }
}

std::string format_real(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    assert(ec == std::errc{});
    std::string s(buf, ptr);
    // An integral-valued real must still read back as a real literal.
    if (s.find_first_of(".eE") == std::string::npos) s += ".0";
    return s;
}

// Parenthesizes so that reparsing reproduces the exact tree shape: a right
// operand at equal precedence always gets parens (the grammar is
// left-associative), a child at lower precedence always does.
void print(const Expr& e, std::string& out, int parent_prec, bool right_operand) {
    int prec = precedence(e);
    bool parens = prec < parent_prec || (prec == parent_prec && right_operand);
    if (parens) out += '(';
    switch (e.kind) {
        case Expr::Kind::IntLiteral:
            out += std::to_string(e.int_value);
            break;
        case Expr::Kind::RealLiteral:
            out += format_real(e.real_value);
            break;
        case Expr::Kind::Variable:
            out += e.name;
            break;
        case Expr::Kind::Negate:
            out += '-';
            print(*e.lhs, out, prec, false);
            break;
        case Expr::Kind::Binary:
            print(*e.lhs, out, prec, false);
            out += ' ';
            out += to_string(e.op);
            out += ' ';
            print(*e.rhs, out, prec, true);
            break;
    }
    if (parens) out += ')';
}

}  // namespace

std::string to_string(const Expr& e) {
    std::string out;
    print(e, out, 0, false);
    return out;
}

std::string to_string(const GuardExpr& g) {
    std::string out = to_string(*g.lhs);
    out += ' ';
    out += to_string(g.op);
    out += ' ';
    out += to_string(*g.rhs);
    return out;
}

std::string to_string(const ActionStmt& a) {
    std::string out = a.target;
    out += " := ";
    out += to_string(*a.expr);
    return out;
}

}  // namespace tcgen::guardlang
