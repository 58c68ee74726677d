#include "nodal/expression.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <utility>
#include <vector>

#include "nodal/errors.hpp"

namespace nodal {

struct Expression::Node {
    enum class Kind { num, var, add, sub, mul, div, neg, pow, cot, tan };
    Kind kind;
    double value = 0.0;
    std::shared_ptr<const Node> lhs, rhs;
};

namespace {

using NodePtr = std::shared_ptr<const Expression::Node>;
using Kind = Expression::Node::Kind;

NodePtr make(Kind k, NodePtr l = nullptr, NodePtr r = nullptr, double v = 0.0) {
    auto n = std::make_shared<Expression::Node>();
    n->kind = k;
    n->value = v;
    n->lhs = std::move(l);
    n->rhs = std::move(r);
    return n;
}

class Parser {
public:
    explicit Parser(std::string_view s) : s_(s) {}

    NodePtr run() {
        NodePtr e = expr();
        skip_ws();
        if (pos_ != s_.size()) fail("unexpected trailing input");
        return e;
    }

private:
    std::string_view s_;
    size_t pos_ = 0;

    [[noreturn]] void fail(const std::string& what) const {
        throw InvalidSpecError("expression parse error at position " + std::to_string(pos_) +
                               ": " + what + " in \"" + std::string(s_) + "\"");
    }

    void skip_ws() {
        while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    }

    bool eat(char c) {
        skip_ws();
        if (pos_ < s_.size() && s_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    char peek() {
        skip_ws();
        return pos_ < s_.size() ? s_[pos_] : '\0';
    }

    NodePtr expr() {
        NodePtr lhs = term();
        for (;;) {
            if (eat('+')) lhs = make(Kind::add, lhs, term());
            else if (eat('-')) lhs = make(Kind::sub, lhs, term());
            else return lhs;
        }
    }

    NodePtr term() {
        NodePtr lhs = unary();
        for (;;) {
            if (eat('*')) lhs = make(Kind::mul, lhs, unary());
            else if (eat('/')) lhs = make(Kind::div, lhs, unary());
            else return lhs;
        }
    }

    NodePtr unary() {
        if (eat('-')) return make(Kind::neg, unary());
        return power();
    }

    NodePtr power() {
        NodePtr base = primary();
        if (eat('^')) {
            // right-associative; exponent may itself be signed
            NodePtr e = eat('-') ? make(Kind::neg, power()) : power();
            return make(Kind::pow, base, e);
        }
        return base;
    }

    NodePtr primary() {
        skip_ws();
        if (pos_ >= s_.size()) fail("unexpected end of input");
        char c = s_[pos_];
        if (c == '(') {
            ++pos_;
            NodePtr e = expr();
            if (!eat(')')) fail("expected ')'");
            return e;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
        if (std::isalpha(static_cast<unsigned char>(c))) return word();
        fail("unexpected character");
    }

    NodePtr number() {
        const char* begin = s_.data() + pos_;
        char* end = nullptr;
        double v = std::strtod(begin, &end);
        if (end == begin) fail("malformed number");
        pos_ += static_cast<size_t>(end - begin);
        return make(Kind::num, nullptr, nullptr, v);
    }

    NodePtr word() {
        size_t start = pos_;
        while (pos_ < s_.size() && std::isalpha(static_cast<unsigned char>(s_[pos_]))) ++pos_;
        std::string_view w = s_.substr(start, pos_ - start);
        if (w == "t") return make(Kind::var);
        if (w == "pi") return make(Kind::num, nullptr, nullptr, M_PI);
        Kind fk;
        if (w == "cot") fk = Kind::cot;
        else if (w == "tan") fk = Kind::tan;
        else {
            pos_ = start;
            fail("unknown identifier \"" + std::string(w) + "\"");
        }
        if (!eat('(')) fail("expected '(' after function name");
        NodePtr arg = expr();
        if (!eat(')')) fail("expected ')'");
        return make(fk, arg);
    }
};

double eval_node(const Expression::Node& n, double t) {
    using K = Kind;
    switch (n.kind) {
        case K::num: return n.value;
        case K::var: return t;
        case K::add: return eval_node(*n.lhs, t) + eval_node(*n.rhs, t);
        case K::sub: return eval_node(*n.lhs, t) - eval_node(*n.rhs, t);
        case K::mul: return eval_node(*n.lhs, t) * eval_node(*n.rhs, t);
        case K::div: return eval_node(*n.lhs, t) / eval_node(*n.rhs, t);
        case K::neg: return -eval_node(*n.lhs, t);
        case K::pow: return std::pow(eval_node(*n.lhs, t), eval_node(*n.rhs, t));
        case K::cot: return 1.0 / std::tan(eval_node(*n.lhs, t));
        case K::tan: return std::tan(eval_node(*n.lhs, t));
    }
    return 0.0;
}

}  // namespace

Expression Expression::parse(std::string_view text) {
    Expression e;
    e.node_ = Parser(text).run();
    e.text_ = std::string(text);
    return e;
}

double Expression::eval(double t) const {
    if (!node_) throw InvalidSpecError("empty expression");
    return eval_node(*node_, t);
}

}  // namespace nodal
