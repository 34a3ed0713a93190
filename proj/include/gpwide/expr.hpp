#pragma once

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <memory>
#include <stdexcept>
#include <string>
#include <string_view>

namespace gpwide {

/// Error emitted while parsing an expression; carries the byte offset of the
/// offending token in the source string.
class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& what, std::size_t position)
        : std::runtime_error(what + " (at position " + std::to_string(position) + ")"),
          position_(position) {}
    std::size_t position() const { return position_; }

private:
    std::size_t position_;
};

/// Error emitted when an expression evaluates to a non-finite value or hits a
/// domain fault (division by zero, sqrt of a negative number).
class EvalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class UnaryOp { Neg, Exp, Sin, Cos, Sqrt, Abs };
enum class BinaryOp { Add, Sub, Mul, Div, Pow, Min, Max };

struct ExprNode;
using ExprPtr = std::shared_ptr<const ExprNode>;

struct ExprNode {
    enum class Kind { Number, Var, Unary, Binary };
    Kind kind;
    double number = 0.0;
    char var = '\0';  // one of 't', 'x', 's'
    UnaryOp uop = UnaryOp::Neg;
    BinaryOp bop = BinaryOp::Add;
    ExprPtr a;
    ExprPtr b;
};

namespace detail {

inline ExprPtr make_number(double v) {
    auto n = std::make_shared<ExprNode>();
    n->kind = ExprNode::Kind::Number;
    n->number = v;
    return n;
}

inline ExprPtr make_var(char c) {
    auto n = std::make_shared<ExprNode>();
    n->kind = ExprNode::Kind::Var;
    n->var = c;
    return n;
}

inline ExprPtr make_unary(UnaryOp op, ExprPtr a) {
    auto n = std::make_shared<ExprNode>();
    n->kind = ExprNode::Kind::Unary;
    n->uop = op;
    n->a = std::move(a);
    return n;
}

inline ExprPtr make_binary(BinaryOp op, ExprPtr a, ExprPtr b) {
    auto n = std::make_shared<ExprNode>();
    n->kind = ExprNode::Kind::Binary;
    n->bop = op;
    n->a = std::move(a);
    n->b = std::move(b);
    return n;
}

inline bool tree_equal(const ExprNode* a, const ExprNode* b) {
    if (a == b) return true;
    if (a == nullptr || b == nullptr) return false;
    if (a->kind != b->kind) return false;
    switch (a->kind) {
        case ExprNode::Kind::Number:
            return a->number == b->number;
        case ExprNode::Kind::Var:
            return a->var == b->var;
        case ExprNode::Kind::Unary:
            return a->uop == b->uop && tree_equal(a->a.get(), b->a.get());
        case ExprNode::Kind::Binary:
            return a->bop == b->bop && tree_equal(a->a.get(), b->a.get()) &&
                   tree_equal(a->b.get(), b->b.get());
    }
    return false;
}

inline double check_finite(double v, const char* what) {
    if (!std::isfinite(v)) throw EvalError(std::string("non-finite result in ") + what);
    return v;
}

inline bool tree_references(const ExprNode& n, char var) {
    switch (n.kind) {
        case ExprNode::Kind::Number: return false;
        case ExprNode::Kind::Var: return n.var == var;
        case ExprNode::Kind::Unary: return tree_references(*n.a, var);
        case ExprNode::Kind::Binary:
            return tree_references(*n.a, var) || tree_references(*n.b, var);
    }
    return false;
}

inline double eval_node(const ExprNode& n, double t, double x, double s) {
    switch (n.kind) {
        case ExprNode::Kind::Number:
            return n.number;
        case ExprNode::Kind::Var:
            return n.var == 't' ? t : (n.var == 'x' ? x : s);
        case ExprNode::Kind::Unary: {
            const double a = eval_node(*n.a, t, x, s);
            switch (n.uop) {
                case UnaryOp::Neg: return -a;
                case UnaryOp::Exp: return check_finite(std::exp(a), "exp");
                case UnaryOp::Sin: return std::sin(a);
                case UnaryOp::Cos: return std::cos(a);
                case UnaryOp::Sqrt:
                    if (a < 0.0) throw EvalError("sqrt of negative value");
                    return std::sqrt(a);
                case UnaryOp::Abs: return std::fabs(a);
            }
            break;
        }
        case ExprNode::Kind::Binary: {
            const double a = eval_node(*n.a, t, x, s);
            const double b = eval_node(*n.b, t, x, s);
            switch (n.bop) {
                case BinaryOp::Add: return check_finite(a + b, "+");
                case BinaryOp::Sub: return check_finite(a - b, "-");
                case BinaryOp::Mul: return check_finite(a * b, "*");
                case BinaryOp::Div:
                    if (b == 0.0) throw EvalError("division by zero");
                    return check_finite(a / b, "/");
                case BinaryOp::Pow: return check_finite(std::pow(a, b), "^");
                case BinaryOp::Min: return std::fmin(a, b);
                case BinaryOp::Max: return std::fmax(a, b);
            }
            break;
        }
    }
    throw EvalError("malformed expression node");
}

// Precedence levels used by the printer: additive 1, multiplicative 2,
// unary minus 3, power 4, atoms 5.
inline int node_level(const ExprNode& n) {
    switch (n.kind) {
        case ExprNode::Kind::Number:
            return n.number < 0.0 ? 3 : 5;
        case ExprNode::Kind::Var:
            return 5;
        case ExprNode::Kind::Unary:
            return n.uop == UnaryOp::Neg ? 3 : 5;
        case ExprNode::Kind::Binary:
            switch (n.bop) {
                case BinaryOp::Add:
                case BinaryOp::Sub: return 1;
                case BinaryOp::Mul:
                case BinaryOp::Div: return 2;
                case BinaryOp::Pow: return 4;
                case BinaryOp::Min:
                case BinaryOp::Max: return 5;
            }
    }
    return 5;
}

inline std::string format_number(double v) {
    char buf[40];
    const int len = std::snprintf(buf, sizeof buf, "%.17g", v);
    return std::string(buf, buf + len);
}

inline void print_node(const ExprNode& n, std::string& out);

inline void print_child(const ExprNode& child, int min_level, std::string& out) {
    if (node_level(child) < min_level) {
        out += '(';
        print_node(child, out);
        out += ')';
    } else {
        print_node(child, out);
    }
}

inline void print_node(const ExprNode& n, std::string& out) {
    switch (n.kind) {
        case ExprNode::Kind::Number:
            out += format_number(n.number);
            return;
        case ExprNode::Kind::Var:
            out += n.var;
            return;
        case ExprNode::Kind::Unary:
            switch (n.uop) {
                case UnaryOp::Neg:
                    out += '-';
                    // the operand must reparse as a whole unary: an atom only,
                    // since "-x^2" binds the minus into the power's base and
                    // "--x" would not re-lex
                    print_child(*n.a, 5, out);
                    return;
                case UnaryOp::Exp: out += "exp"; break;
                case UnaryOp::Sin: out += "sin"; break;
                case UnaryOp::Cos: out += "cos"; break;
                case UnaryOp::Sqrt: out += "sqrt"; break;
                case UnaryOp::Abs: out += "abs"; break;
            }
            out += '(';
            print_node(*n.a, out);
            out += ')';
            return;
        case ExprNode::Kind::Binary:
            switch (n.bop) {
                case BinaryOp::Add:
                    print_child(*n.a, 1, out);
                    out += '+';
                    print_child(*n.b, 2, out);
                    return;
                case BinaryOp::Sub:
                    print_child(*n.a, 1, out);
                    out += '-';
                    print_child(*n.b, 2, out);
                    return;
                case BinaryOp::Mul:
                    print_child(*n.a, 2, out);
                    out += '*';
                    print_child(*n.b, 3, out);
                    return;
                case BinaryOp::Div:
                    print_child(*n.a, 2, out);
                    out += '/';
                    print_child(*n.b, 3, out);
                    return;
                case BinaryOp::Pow: {
                    // grammar: pow := unary ('^' pow)?  — the base must be a
                    // complete unary (minus chain or atom), never a bare pow
                    const int la = node_level(*n.a);
                    if (la < 3 || la == 4) {
                        out += '(';
                        print_node(*n.a, out);
                        out += ')';
                    } else {
                        print_node(*n.a, out);
                    }
                    out += '^';
                    print_child(*n.b, 3, out);
                    return;
                }
                case BinaryOp::Min:
                    out += "min(";
                    print_node(*n.a, out);
                    out += ',';
                    print_node(*n.b, out);
                    out += ')';
                    return;
                case BinaryOp::Max:
                    out += "max(";
                    print_node(*n.a, out);
                    out += ',';
                    print_node(*n.b, out);
                    out += ')';
                    return;
            }
    }
}

class Parser {
public:
    Parser(std::string_view src, std::string_view allowed_vars)
        : src_(src), allowed_(allowed_vars) {}

    ExprPtr parse() {
        if (src_.empty()) throw ParseError("empty expression", 0);
        ExprPtr e = parse_expr();
        skip_ws();
        if (pos_ != src_.size()) throw ParseError("unexpected trailing input", pos_);
        return e;
    }

private:
    std::string_view src_;
    std::string_view allowed_;
    std::size_t pos_ = 0;

    void skip_ws() {
        while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
    }

    bool consume(char c) {
        skip_ws();
        if (pos_ < src_.size() && src_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    char peek() {
        skip_ws();
        return pos_ < src_.size() ? src_[pos_] : '\0';
    }

    // expr := term (('+'|'-') term)*
    ExprPtr parse_expr() {
        ExprPtr e = parse_term();
        for (;;) {
            if (consume('+'))
                e = make_binary(BinaryOp::Add, e, parse_term());
            else if (consume('-'))
                e = make_binary(BinaryOp::Sub, e, parse_term());
            else
                return e;
        }
    }

    // term := pow (('*'|'/') pow)*
    ExprPtr parse_term() {
        ExprPtr e = parse_pow();
        for (;;) {
            if (consume('*'))
                e = make_binary(BinaryOp::Mul, e, parse_pow());
            else if (consume('/'))
                e = make_binary(BinaryOp::Div, e, parse_pow());
            else
                return e;
        }
    }

    // pow := unary ('^' pow)?   (right associative)
    ExprPtr parse_pow() {
        ExprPtr base = parse_unary();
        if (consume('^')) return make_binary(BinaryOp::Pow, base, parse_pow());
        return base;
    }

    // unary := '-' unary | atom
    ExprPtr parse_unary() {
        if (consume('-')) return make_unary(UnaryOp::Neg, parse_unary());
        return parse_atom();
    }

    ExprPtr parse_atom() {
        skip_ws();
        if (pos_ >= src_.size()) throw ParseError("unexpected end of expression", pos_);
        const char c = src_[pos_];
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
        if (std::isalpha(static_cast<unsigned char>(c))) return parse_ident();
        if (c == '(') {
            ++pos_;
            ExprPtr e = parse_expr();
            if (!consume(')')) throw ParseError("expected ')'", pos_);
            return e;
        }
        throw ParseError(std::string("unexpected character '") + c + "'", pos_);
    }

    ExprPtr parse_number() {
        const std::size_t start = pos_;
        while (pos_ < src_.size() && (std::isdigit(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '.'))
            ++pos_;
        if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
            std::size_t e = pos_ + 1;
            if (e < src_.size() && (src_[e] == '+' || src_[e] == '-')) ++e;
            if (e < src_.size() && std::isdigit(static_cast<unsigned char>(src_[e]))) {
                pos_ = e;
                while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
            }
        }
        double value = 0.0;
        const auto [ptr, ec] = std::from_chars(src_.data() + start, src_.data() + pos_, value);
        if (ec != std::errc() || ptr != src_.data() + pos_)
            throw ParseError("malformed number", start);
        return make_number(value);
    }

    ExprPtr parse_ident() {
        const std::size_t start = pos_;
        while (pos_ < src_.size() && std::isalpha(static_cast<unsigned char>(src_[pos_]))) ++pos_;
        const std::string_view name = src_.substr(start, pos_ - start);
        if (name.size() == 1 && (name[0] == 't' || name[0] == 'x' || name[0] == 's')) {
            if (allowed_.find(name[0]) == std::string_view::npos)
                throw ParseError(std::string("undeclared variable '") + name[0] + "'", start);
            return make_var(name[0]);
        }
        UnaryOp uop;
        bool is_unary = true;
        if (name == "exp") uop = UnaryOp::Exp;
        else if (name == "sin") uop = UnaryOp::Sin;
        else if (name == "cos") uop = UnaryOp::Cos;
        else if (name == "sqrt") uop = UnaryOp::Sqrt;
        else if (name == "abs") uop = UnaryOp::Abs;
        else is_unary = false;
        if (is_unary) {
            if (!consume('(')) throw ParseError("expected '(' after function name", pos_);
            ExprPtr a = parse_expr();
            if (!consume(')')) throw ParseError("expected ')'", pos_);
            return make_unary(uop, a);
        }
        if (name == "min" || name == "max") {
            if (!consume('(')) throw ParseError("expected '(' after function name", pos_);
            ExprPtr a = parse_expr();
            if (!consume(',')) throw ParseError("expected ',' in min/max", pos_);
            ExprPtr b = parse_expr();
            if (!consume(')')) throw ParseError("expected ')'", pos_);
            return make_binary(name == "min" ? BinaryOp::Min : BinaryOp::Max, a, b);
        }
        throw ParseError("unknown identifier '" + std::string(name) + "'", start);
    }
};

}  // namespace detail

/// A parsed scalar coefficient expression over a declared subset of the
/// variables {t, x, s}. Immutable; copies share the tree.
class CoefficientExpr {
public:
    CoefficientExpr() : root_(detail::make_number(0.0)) {}

    /// Parses `src` against the grammar
    ///   expr := term (('+'|'-') term)*; term := pow (('*'|'/') pow)*;
    ///   pow := unary ('^' pow)?; unary := '-' unary | atom;
    ///   atom := number | 't' | 'x' | 's' | ident '(' expr (',' expr)* ')' | '(' expr ')'
    /// with idents exp, sin, cos, sqrt, abs, min, max. Referencing a variable
    /// not in `allowed_vars` is a parse-time error.
    static CoefficientExpr parse(std::string_view src, std::string_view allowed_vars) {
        detail::Parser p(src, allowed_vars);
        return CoefficientExpr(p.parse(), std::string(allowed_vars));
    }

    static CoefficientExpr number(double v) { return CoefficientExpr(detail::make_number(v), ""); }
    static CoefficientExpr variable(char c) {
        return CoefficientExpr(detail::make_var(c), std::string(1, c));
    }
    static CoefficientExpr unary(UnaryOp op, const CoefficientExpr& a) {
        return CoefficientExpr(detail::make_unary(op, a.root_), a.vars_);
    }
    static CoefficientExpr binary(BinaryOp op, const CoefficientExpr& a, const CoefficientExpr& b) {
        std::string vars = a.vars_;
        for (char c : b.vars_)
            if (vars.find(c) == std::string::npos) vars += c;
        return CoefficientExpr(detail::make_binary(op, a.root_, b.root_), vars);
    }

    double operator()(double t = 0.0, double x = 0.0, double s = 0.0) const {
        return detail::eval_node(*root_, t, x, s);
    }

    /// Canonical text form; parse(to_string()) reproduces the same tree.
    std::string to_string() const {
        std::string out;
        detail::print_node(*root_, out);
        return out;
    }

    bool is_literal_zero() const {
        return root_->kind == ExprNode::Kind::Number && root_->number == 0.0;
    }
    bool is_literal_constant(double v) const {
        return root_->kind == ExprNode::Kind::Number && root_->number == v;
    }
    bool references(char var) const { return detail::tree_references(*root_, var); }

    friend bool operator==(const CoefficientExpr& a, const CoefficientExpr& b) {
        return detail::tree_equal(a.root_.get(), b.root_.get());
    }

    const ExprNode& root() const { return *root_; }

private:
    CoefficientExpr(ExprPtr root, std::string vars)
        : root_(std::move(root)), vars_(std::move(vars)) {}

    ExprPtr root_;
    std::string vars_;  // variables the tree may reference
};

/// eval with an explicit point value; convenience for (t, x) coefficients.
inline double eval_coefficient(const CoefficientExpr& e, double t, double x, double s) {
    return e(t, x, s);
}

}  // namespace gpwide
