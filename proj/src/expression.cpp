#include "homs/expression.hpp"

#include <cctype>
#include <cmath>
#include <numbers>

#include "homs/error.hpp"
#include "homs/io.hpp"

namespace homs {

struct ScalarField::Node {
    enum class Op { number, x, y, t, add, sub, mul, div, pow, neg, call };
    Op op = Op::number;
    double value = 0.0;
    double (*fn)(double) = nullptr;
    std::shared_ptr<const Node> lhs;
    std::shared_ptr<const Node> rhs;

    double eval(double x, double y, double t) const {
        switch (op) {
        case Op::number: return value;
        case Op::x: return x;
        case Op::y: return y;
        case Op::t: return t;
        case Op::add: return lhs->eval(x, y, t) + rhs->eval(x, y, t);
        case Op::sub: return lhs->eval(x, y, t) - rhs->eval(x, y, t);
        case Op::mul: return lhs->eval(x, y, t) * rhs->eval(x, y, t);
        case Op::div: return lhs->eval(x, y, t) / rhs->eval(x, y, t);
        case Op::pow: return std::pow(lhs->eval(x, y, t), rhs->eval(x, y, t));
        case Op::neg: return -lhs->eval(x, y, t);
        case Op::call: return fn(lhs->eval(x, y, t));
        }
        return 0.0;
    }

    bool depends_on_variables() const {
        if (op == Op::x || op == Op::y || op == Op::t) return true;
        return (lhs && lhs->depends_on_variables()) || (rhs && rhs->depends_on_variables());
    }
};

namespace {

using NodePtr = std::shared_ptr<const ScalarField::Node>;
using Op = ScalarField::Node::Op;

NodePtr make(Op op, NodePtr lhs = nullptr, NodePtr rhs = nullptr) {
    auto n = std::make_shared<ScalarField::Node>();
    n->op = op;
    n->lhs = std::move(lhs);
    n->rhs = std::move(rhs);
    return n;
}

// expr   := term (('+'|'-') term)*
// term   := unary (('*'|'/') unary)*
// unary  := '-' unary | '+' unary | power
// power  := atom ('^' unary)?
// atom   := number | name | name '(' expr ')' | '(' expr ')'
class Parser {
public:
    explicit Parser(const std::string& text) : s_(text) {}

    NodePtr parse() {
        NodePtr n = expr();
        skip();
        if (pos_ != s_.size()) fail("unexpected character");
        return n;
    }

private:
    [[noreturn]] void fail(const std::string& what) const {
        throw InvalidArgument("expression '" + s_ + "': " + what + " at position " + std::to_string(pos_));
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
        NodePtr n = term();
        while (true) {
            if (accept('+')) n = make(Op::add, n, term());
            else if (accept('-')) n = make(Op::sub, n, term());
            else return n;
        }
    }

    NodePtr term() {
        NodePtr n = unary();
        while (true) {
            if (accept('*')) n = make(Op::mul, n, unary());
            else if (accept('/')) n = make(Op::div, n, unary());
            else return n;
        }
    }

    NodePtr unary() {
        if (accept('-')) return make(Op::neg, unary());
        if (accept('+')) return unary();
        return power();
    }

    NodePtr power() {
        NodePtr base = atom();
        if (accept('^')) return make(Op::pow, base, unary());
        return base;
    }

    NodePtr atom() {
        skip();
        if (pos_ >= s_.size()) fail("unexpected end");
        if (accept('(')) {
            NodePtr n = expr();
            if (!accept(')')) fail("missing ')'");
            return n;
        }
        const char c = s_[pos_];
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
        if (std::isalpha(static_cast<unsigned char>(c))) return name();
        fail("unexpected character");
    }

    NodePtr number() {
        const std::size_t start = pos_;
        while (pos_ < s_.size() && (std::isdigit(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '.')) ++pos_;
        if (pos_ < s_.size() && (s_[pos_] == 'e' || s_[pos_] == 'E')) {
            std::size_t p = pos_ + 1;
            if (p < s_.size() && (s_[p] == '+' || s_[p] == '-')) ++p;
            if (p < s_.size() && std::isdigit(static_cast<unsigned char>(s_[p]))) {
                pos_ = p;
                while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
            }
        }
        auto n = std::make_shared<ScalarField::Node>();
        try {
            n->value = parse_double(s_.substr(start, pos_ - start));
        } catch (const InvalidArgument&) {
            pos_ = start;
            fail("malformed number");
        }
        return n;
    }

    NodePtr name() {
        const std::size_t start = pos_;
        while (pos_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_')) ++pos_;
        const std::string id = s_.substr(start, pos_ - start);
        if (id == "x") return make(Op::x);
        if (id == "y") return make(Op::y);
        if (id == "t") return make(Op::t);
        if (id == "pi") {
            auto n = std::make_shared<ScalarField::Node>();
            n->value = std::numbers::pi;
            return n;
        }
        double (*fn)(double) = nullptr;
        if (id == "sin") fn = [](double v) { return std::sin(v); };
        else if (id == "cos") fn = [](double v) { return std::cos(v); };
        else if (id == "tan") fn = [](double v) { return std::tan(v); };
        else if (id == "exp") fn = [](double v) { return std::exp(v); };
        else if (id == "log") fn = [](double v) { return std::log(v); };
        else if (id == "sqrt") fn = [](double v) { return std::sqrt(v); };
        else if (id == "abs") fn = [](double v) { return std::abs(v); };
        else if (id == "tanh") fn = [](double v) { return std::tanh(v); };
        else {
            pos_ = start;
            fail("unknown name '" + id + "'");
        }
        if (!accept('(')) fail("expected '(' after " + id);
        auto n = std::make_shared<ScalarField::Node>();
        n->op = Op::call;
        n->fn = fn;
        n->lhs = expr();
        if (!accept(')')) fail("missing ')'");
        return n;
    }

    std::string s_;
    std::size_t pos_ = 0;
};

}  // namespace

ScalarField::ScalarField(double constant) : text_(format_double(constant)), constant_(true), value_(constant) {}

ScalarField ScalarField::parse(const std::string& text) {
    ScalarField f;
    f.text_ = trim(text);
    f.root_ = Parser(f.text_).parse();
    f.constant_ = !f.root_->depends_on_variables();
    f.value_ = f.root_->eval(0.0, 0.0, 0.0);
    if (f.constant_) f.root_.reset();
    return f;
}

double ScalarField::operator()(double x, double y, double t) const {
    return constant_ ? value_ : root_->eval(x, y, t);
}

}  // namespace homs
