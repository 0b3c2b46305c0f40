#pragma once

// Small expression language for the applied field B0(x1, x2):
//
//   expr    = term { ("+" | "-") term }
//   term    = unary { "*" unary }
//   unary   = [ "+" | "-" ] power
//   power   = primary [ "^" integer ]
//   primary = number | "x1" | "x2" | "(" expr ")"
//
// Evaluation carries first derivatives (dual numbers), so |grad B0| is exact.

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <memory>
#include <string>
#include <utility>

#include "glzero/error.hpp"

namespace glzero::expr {

/// Value with its gradient in (x1, x2).
struct Dual {
    double v = 0.0, d1 = 0.0, d2 = 0.0;

    double grad_norm() const { return std::hypot(d1, d2); }
};

inline Dual operator+(Dual a, Dual b) { return {a.v + b.v, a.d1 + b.d1, a.d2 + b.d2}; }
inline Dual operator-(Dual a, Dual b) { return {a.v - b.v, a.d1 - b.d1, a.d2 - b.d2}; }
inline Dual operator-(Dual a) { return {-a.v, -a.d1, -a.d2}; }
inline Dual operator*(Dual a, Dual b) { return {a.v * b.v, a.d1 * b.v + a.v * b.d1, a.d2 * b.v + a.v * b.d2}; }

inline Dual power(Dual a, int n) {
    Dual r{1.0, 0.0, 0.0};
    for (int k = 0; k < n; ++k) r = r * a;
    return r;
}

class Expr {
public:
    enum class Op { Const, X1, X2, Add, Sub, Mul, Neg, Pow };

    static std::shared_ptr<const Expr> make(Op op, double c = 0.0, std::shared_ptr<const Expr> l = {},
                                            std::shared_ptr<const Expr> r = {}, int n = 0) {
        auto e = std::make_shared<Expr>();
        e->op_ = op;
        e->c_ = c;
        e->l_ = std::move(l);
        e->r_ = std::move(r);
        e->n_ = n;
        return e;
    }

    Dual eval(double x1, double x2) const {
        switch (op_) {
            case Op::Const: return {c_, 0.0, 0.0};
            case Op::X1: return {x1, 1.0, 0.0};
            case Op::X2: return {x2, 0.0, 1.0};
            case Op::Add: return l_->eval(x1, x2) + r_->eval(x1, x2);
            case Op::Sub: return l_->eval(x1, x2) - r_->eval(x1, x2);
            case Op::Mul: return l_->eval(x1, x2) * r_->eval(x1, x2);
            case Op::Neg: return -l_->eval(x1, x2);
            case Op::Pow: return power(l_->eval(x1, x2), n_);
        }
        return {};
    }

private:
    Op op_ = Op::Const;
    double c_ = 0.0;
    std::shared_ptr<const Expr> l_, r_;
    int n_ = 0;
};

class Parser {
public:
    explicit Parser(std::string text) : s_(std::move(text)) {}

    std::shared_ptr<const Expr> parse() {
        auto e = expr();
        skip();
        if (pos_ != s_.size()) fail("unexpected '" + std::string(1, s_[pos_]) + "'");
        return e;
    }

private:
    using P = std::shared_ptr<const Expr>;
    using Op = Expr::Op;

    std::string s_;
    std::size_t pos_ = 0;

    [[noreturn]] void fail(const std::string& msg) const {
        throw ValidationError("B0 expression: " + msg + " at column " + std::to_string(pos_ + 1) + " in \"" + s_ + "\"");
    }

    void skip() {
        while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    }

    bool eat(char c) {
        skip();
        if (pos_ < s_.size() && s_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    P expr() {
        P e = term();
        for (;;) {
            if (eat('+')) e = Expr::make(Op::Add, 0.0, e, term());
            else if (eat('-')) e = Expr::make(Op::Sub, 0.0, e, term());
            else return e;
        }
    }

    P term() {
        P e = unary();
        while (eat('*')) e = Expr::make(Op::Mul, 0.0, e, unary());
        return e;
    }

    P unary() {
        if (eat('-')) return Expr::make(Op::Neg, 0.0, power_());
        eat('+');
        return power_();
    }

    P power_() {
        P base = primary();
        if (!eat('^')) return base;
        skip();
        const std::size_t start = pos_;
        while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
        if (start == pos_) fail("expected a non-negative integer exponent");
        if (pos_ - start > 3) fail("exponent too large");
        return Expr::make(Op::Pow, 0.0, base, {}, std::stoi(s_.substr(start, pos_ - start)));
    }

    P primary() {
        skip();
        if (pos_ >= s_.size()) fail("unexpected end of input");
        if (eat('(')) {
            P e = expr();
            if (!eat(')')) fail("expected ')'");
            return e;
        }
        if (s_.compare(pos_, 2, "x1") == 0) {
            pos_ += 2;
            return Expr::make(Op::X1);
        }
        if (s_.compare(pos_, 2, "x2") == 0) {
            pos_ += 2;
            return Expr::make(Op::X2);
        }
        const char c = s_[pos_];
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
            const std::size_t start = pos_;
            auto digits = [&] {
                const std::size_t d0 = pos_;
                while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
                return pos_ - d0;
            };
            std::size_t nd = digits();
            if (pos_ < s_.size() && s_[pos_] == '.') {
                ++pos_;
                nd += digits();
            }
            if (nd == 0) fail("bad number");
            if (pos_ < s_.size() && (s_[pos_] == 'e' || s_[pos_] == 'E')) {
                ++pos_;
                if (pos_ < s_.size() && (s_[pos_] == '+' || s_[pos_] == '-')) ++pos_;
                if (digits() == 0) fail("bad exponent");
            }
            const double v = std::strtod(s_.substr(start, pos_ - start).c_str(), nullptr);
            if (!std::isfinite(v)) fail("number out of range");
            return Expr::make(Op::Const, v);
        }
        fail("unexpected '" + std::string(1, c) + "'");
    }
};

inline std::shared_ptr<const Expr> parse(const std::string& text) { return Parser(text).parse(); }

} // namespace glzero::expr
