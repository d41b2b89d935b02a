#pragma once

// Small arithmetic expression language for manufactured problems given in a
// config file: numbers, x, y, named constants, + - * / ^, parentheses and the
// usual elementary functions.

#include <cctype>
#include <cmath>
#include <map>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

namespace nipg {

class ExpressionError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class Expression {
public:
    Expression() = default;

    /// Parse `text`; identifiers other than x and y must appear in `constants`.
    static Expression parse(const std::string& text, const std::map<std::string, double>& constants = {}) {
        Parser p{text, 0, constants};
        Expression e;
        e.root_ = p.expr();
        p.skip();
        if (p.pos != text.size())
            throw ExpressionError("expression: unexpected '" + text.substr(p.pos) + "' in '" + text + "'");
        e.text_ = text;
        return e;
    }

    double operator()(double x, double y) const {
        if (!root_) throw ExpressionError("expression: empty");
        return root_->eval(x, y);
    }

    const std::string& text() const { return text_; }

private:
    struct Node {
        virtual ~Node() = default;
        virtual double eval(double x, double y) const = 0;
    };
    using NodePtr = std::shared_ptr<const Node>;

    struct Constant : Node {
        double v;
        explicit Constant(double v) : v(v) {}
        double eval(double, double) const override { return v; }
    };
    struct VarX : Node {
        double eval(double x, double) const override { return x; }
    };
    struct VarY : Node {
        double eval(double, double y) const override { return y; }
    };
    struct Unary : Node {
        double (*fn)(double);
        NodePtr arg;
        Unary(double (*f)(double), NodePtr a) : fn(f), arg(std::move(a)) {}
        double eval(double x, double y) const override { return fn(arg->eval(x, y)); }
    };
    struct Binary : Node {
        char op;
        NodePtr l, r;
        Binary(char o, NodePtr a, NodePtr b) : op(o), l(std::move(a)), r(std::move(b)) {}
        double eval(double x, double y) const override {
            const double a = l->eval(x, y), b = r->eval(x, y);
            switch (op) {
            case '+': return a + b;
            case '-': return a - b;
            case '*': return a * b;
            case '/': return a / b;
            default: return std::pow(a, b);
            }
        }
    };

    struct Parser {
        const std::string& s;
        std::size_t pos;
        const std::map<std::string, double>& constants;

        void skip() {
            while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
        }
        bool accept(char c) {
            skip();
            if (pos < s.size() && s[pos] == c) {
                ++pos;
                return true;
            }
            return false;
        }
        [[noreturn]] void fail(const std::string& what) const {
            throw ExpressionError("expression: " + what + " at position " + std::to_string(pos) + " in '" + s + "'");
        }

        NodePtr expr() {
            NodePtr n = term();
            for (;;) {
                if (accept('+')) n = std::make_shared<Binary>('+', n, term());
                else if (accept('-')) n = std::make_shared<Binary>('-', n, term());
                else return n;
            }
        }
        NodePtr term() {
            NodePtr n = unary();
            for (;;) {
                if (accept('*')) n = std::make_shared<Binary>('*', n, unary());
                else if (accept('/')) n = std::make_shared<Binary>('/', n, unary());
                else return n;
            }
        }
        NodePtr unary() {
            if (accept('-')) return std::make_shared<Binary>('-', std::make_shared<Constant>(0.0), unary());
            if (accept('+')) return unary();
            return power();
        }
        NodePtr power() {
            NodePtr base = primary();
            if (accept('^')) return std::make_shared<Binary>('^', base, unary());
            return base;
        }
        NodePtr primary() {
            skip();
            if (pos >= s.size()) fail("unexpected end");
            if (accept('(')) {
                NodePtr n = expr();
                if (!accept(')')) fail("missing ')'");
                return n;
            }
            const char c = s[pos];
            if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
                std::size_t used = 0;
                double v = 0.0;
                try {
                    v = std::stod(s.substr(pos), &used);
                } catch (const std::exception&) {
                    fail("bad number");
                }
                pos += used;
                return std::make_shared<Constant>(v);
            }
            if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
                const std::size_t start = pos;
                while (pos < s.size() && (std::isalnum(static_cast<unsigned char>(s[pos])) || s[pos] == '_')) ++pos;
                const std::string id = s.substr(start, pos - start);
                if (accept('(')) {
                    NodePtr arg = expr();
                    if (!accept(')')) fail("missing ')' after argument of " + id);
                    return std::make_shared<Unary>(function(id), arg);
                }
                if (id == "x") return std::make_shared<VarX>();
                if (id == "y") return std::make_shared<VarY>();
                if (id == "pi") return std::make_shared<Constant>(3.14159265358979323846);
                if (auto it = constants.find(id); it != constants.end()) return std::make_shared<Constant>(it->second);
                fail("unknown identifier '" + id + "'");
            }
            fail(std::string("unexpected character '") + c + "'");
        }
        double (*function(const std::string& id) const)(double) {
            static const std::map<std::string, double (*)(double)> table{
                {"sin", [](double v) { return std::sin(v); }},   {"cos", [](double v) { return std::cos(v); }},
                {"tan", [](double v) { return std::tan(v); }},   {"exp", [](double v) { return std::exp(v); }},
                {"log", [](double v) { return std::log(v); }},   {"sqrt", [](double v) { return std::sqrt(v); }},
                {"abs", [](double v) { return std::abs(v); }},   {"sinh", [](double v) { return std::sinh(v); }},
                {"cosh", [](double v) { return std::cosh(v); }}, {"tanh", [](double v) { return std::tanh(v); }},
            };
            auto it = table.find(id);
            if (it == table.end()) fail("unknown function '" + id + "'");
            return it->second;
        }
    };

    NodePtr root_;
    std::string text_;
};

}  // namespace nipg
