#include "regrisk/expression.hpp"

#include "regrisk/error.hpp"
#include "regrisk/special_functions.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <numbers>
#include <vector>

namespace regrisk {

struct Expression::Node {
    enum class Op { Const, Var, Neg, Add, Sub, Mul, Div, Pow, Exp, Log, Sqrt, Erf, Phi, CapPhi };
    Op op = Op::Const;
    double value = 0.0;
    std::shared_ptr<const Node> lhs, rhs;

    double eval(double y) const {
        switch (op) {
        case Op::Const: return value;
        case Op::Var: return y;
        case Op::Neg: return -lhs->eval(y);
        case Op::Add: return lhs->eval(y) + rhs->eval(y);
        case Op::Sub: return lhs->eval(y) - rhs->eval(y);
        case Op::Mul: return lhs->eval(y) * rhs->eval(y);
        case Op::Div: return lhs->eval(y) / rhs->eval(y);
        case Op::Pow: {
            const double b = lhs->eval(y);
            const double e = rhs->eval(y);
            if (e == std::round(e) && std::abs(e) < 64) {
                double r = 1.0;
                for (int i = 0; i < std::abs(static_cast<int>(e)); ++i) r *= b;
                return e < 0 ? 1.0 / r : r;
            }
            return std::pow(b, e);
        }
        case Op::Exp: return std::exp(lhs->eval(y));
        case Op::Log: return std::log(lhs->eval(y));
        case Op::Sqrt: return std::sqrt(lhs->eval(y));
        case Op::Erf: return std::erf(lhs->eval(y));
        case Op::Phi: return normal_pdf(lhs->eval(y));
        case Op::CapPhi: return normal_cdf(lhs->eval(y));
        }
        return 0.0;
    }
};

namespace {

using NodePtr = std::shared_ptr<const Expression::Node>;
using Op = Expression::Node::Op;

NodePtr make(Op op, NodePtr a = nullptr, NodePtr b = nullptr, double v = 0.0) {
    auto n = std::make_shared<Expression::Node>();
    n->op = op;
    n->lhs = std::move(a);
    n->rhs = std::move(b);
    n->value = v;
    return n;
}

class Parser {
public:
    Parser(const std::string& s, int line, int col0) : s_(s), line_(line), col0_(col0) {}

    NodePtr parse_all() {
        NodePtr e = expr();
        skip();
        if (pos_ < s_.size()) fail("unexpected '" + std::string(1, s_[pos_]) + "'");
        return e;
    }

private:
    [[noreturn]] void fail(const std::string& msg) const {
        throw ParseError(msg, line_, col0_ + static_cast<int>(pos_) + 1);
    }

    void skip() {
        while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    }

    bool accept(char c) {
        skip();
        if (pos_ < s_.size() && s_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    NodePtr expr() {
        NodePtr lhs = term();
        for (;;) {
            if (accept('+')) lhs = make(Op::Add, lhs, term());
            else if (accept('-')) lhs = make(Op::Sub, lhs, term());
            else return lhs;
        }
    }

    NodePtr term() {
        NodePtr lhs = unary();
        for (;;) {
            if (accept('*')) lhs = make(Op::Mul, lhs, unary());
            else if (accept('/')) lhs = make(Op::Div, lhs, unary());
            else return lhs;
        }
    }

    NodePtr unary() {
        if (accept('-')) return make(Op::Neg, unary());
        if (accept('+')) return unary();
        return power();
    }

    NodePtr power() {
        NodePtr base = primary();
        if (accept('^')) return make(Op::Pow, base, unary());
        return base;
    }

    NodePtr primary() {
        skip();
        if (pos_ >= s_.size()) fail("unexpected end of expression");
        const char c = s_[pos_];
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
            const char* begin = s_.c_str() + pos_;
            char* end = nullptr;
            const double v = std::strtod(begin, &end);
            if (end == begin) fail("malformed number");
            pos_ += static_cast<std::size_t>(end - begin);
            return make(Op::Const, nullptr, nullptr, v);
        }
        if (c == '(') {
            ++pos_;
            NodePtr e = expr();
            if (!accept(')')) fail("expected ')'");
            return e;
        }
        if (std::isalpha(static_cast<unsigned char>(c))) {
            const std::size_t start = pos_;
            while (pos_ < s_.size() && std::isalnum(static_cast<unsigned char>(s_[pos_]))) ++pos_;
            const std::string name = s_.substr(start, pos_ - start);
            if (name == "y") return make(Op::Var);
            if (name == "pi") return make(Op::Const, nullptr, nullptr, std::numbers::pi);
            Op op;
            if (name == "exp") op = Op::Exp;
            else if (name == "log") op = Op::Log;
            else if (name == "sqrt") op = Op::Sqrt;
            else if (name == "erf") op = Op::Erf;
            else if (name == "phi") op = Op::Phi;
            else if (name == "Phi") op = Op::CapPhi;
            else {
                pos_ = start;
                fail("unknown identifier '" + name + "'");
            }
            if (!accept('(')) fail("expected '(' after " + name);
            NodePtr arg = expr();
            if (!accept(')')) fail("expected ')'");
            return make(op, arg);
        }
        fail("unexpected '" + std::string(1, c) + "'");
    }

    const std::string& s_;
    std::size_t pos_ = 0;
    int line_;
    int col0_;
};

}  // namespace

Expression Expression::parse(const std::string& text, int line, int column_offset) {
    Parser p(text, line, column_offset);
    return Expression(p.parse_all());
}

double Expression::operator()(double y) const { return root_->eval(y); }

}  // namespace regrisk
