#pragma once

#include <cctype>
#include <optional>
#include <string>
#include <utility>

#include "poismod/cartan.hpp"
#include "poismod/multivector.hpp"

namespace poismod {

// Grammar:
//   expr   := ['-'] term (('+' | '-') term)*
//   term   := factor ('*' factor)*
//   factor := atom ('^' int)? | atom '^^' factor
//   atom   := rational | 'h' | var | 'D'var | 'd'var | '(' expr ')'
//
// Values are typed: scalars, multivector fields (D-basis) and differential
// forms (d-basis). Mixing kinds under '+' or '^^' is an error; '*' allows
// scalar times anything.

class parse_error : public std::runtime_error {
  public:
    parse_error(std::string msg, const std::string& src, std::size_t pos)
        : std::runtime_error(msg + "\n  " + src + "\n  " + std::string(pos, ' ') + "^"),
          position(pos) {}
    std::size_t position;
};

enum class ValueKind { scalar, vector, form };

struct ParsedValue {
    ValueKind kind = ValueKind::scalar;
    Scalar s;
    PolyVector v;
    DiffForm f;

    bool is_zero_scalar() const { return kind == ValueKind::scalar && s.is_zero(); }
};

namespace detail {

class ExprParser {
  public:
    ExprParser(std::string src, const CoordinateRing* ring, int order)
        : src_(std::move(src)), ring_(ring), order_(order) {}

    ParsedValue parse() {
        skip_ws();
        ParsedValue v = parse_expr();
        skip_ws();
        if (pos_ != src_.size()) fail("unexpected trailing input", pos_);
        return v;
    }

  private:
    std::string src_;
    const CoordinateRing* ring_;
    int order_;
    std::size_t pos_ = 0;

    [[noreturn]] void fail(const std::string& msg, std::size_t at) const {
        throw parse_error(msg, src_, at);
    }

    void skip_ws() {
        while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
    }
    bool eat(char c) {
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

    static const char* kind_name(ValueKind k) {
        switch (k) {
            case ValueKind::scalar: return "scalar";
            case ValueKind::vector: return "multivector";
            default: return "form";
        }
    }

    ParsedValue add(ParsedValue a, ParsedValue b, bool subtract, std::size_t at) {
        if (b.is_zero_scalar()) return a;
        if (a.is_zero_scalar()) {
            if (subtract) return negate(std::move(b));
            return b;
        }
        if (a.kind != b.kind)
            fail(std::string("cannot add ") + kind_name(a.kind) + " and " + kind_name(b.kind), at);
        Rational sgn = subtract ? Rational(-1) : Rational(1);
        switch (a.kind) {
            case ValueKind::scalar: a.s = a.s + b.s.scaled(sgn); break;
            case ValueKind::vector: a.v = a.v + b.v.scaled(sgn); break;
            case ValueKind::form: a.f = a.f + b.f.scaled(sgn); break;
        }
        return a;
    }

    static ParsedValue negate(ParsedValue a) {
        switch (a.kind) {
            case ValueKind::scalar: a.s = a.s.scaled(Rational(-1)); break;
            case ValueKind::vector: a.v = a.v.scaled(Rational(-1)); break;
            case ValueKind::form: a.f = a.f.scaled(Rational(-1)); break;
        }
        return a;
    }

    ParsedValue mul(ParsedValue a, ParsedValue b, std::size_t at) {
        if (b.kind == ValueKind::scalar && a.kind != ValueKind::scalar) std::swap(a, b);
        if (a.kind != ValueKind::scalar)
            fail(std::string("cannot multiply ") + kind_name(a.kind) + " by " + kind_name(b.kind) +
                     " with '*', use '^^' for the wedge product",
                 at);
        switch (b.kind) {
            case ValueKind::scalar: b.s = a.s * b.s; break;
            case ValueKind::vector: b.v = a.s * b.v; break;
            case ValueKind::form: b.f = a.s * b.f; break;
        }
        return b;
    }

    ParsedValue wedge_vals(ParsedValue a, ParsedValue b, std::size_t at) {
        if (a.kind == ValueKind::vector && b.kind == ValueKind::vector) {
            a.v = wedge(a.v, b.v);
            return a;
        }
        if (a.kind == ValueKind::form && b.kind == ValueKind::form) {
            a.f = wedge(a.f, b.f);
            return a;
        }
        fail(std::string("cannot wedge ") + kind_name(a.kind) + " with " + kind_name(b.kind), at);
    }

    ParsedValue power(ParsedValue a, long long n, std::size_t at) {
        if (a.kind != ValueKind::scalar)
            fail("'^' takes an integer power of a scalar; use '^^' to wedge", at);
        if (n == 0) {
            a.s = scalar_one(ring_, order_);
            return a;
        }
        Scalar base = a.s;
        if (n < 0) {
            if (!scalar_is_unit(a.s)) fail("negative power of a non-invertible scalar", at);
            base = unit_inverse(a.s);
            n = -n;
        }
        Scalar acc = base;
        for (long long i = 1; i < n; ++i) acc = acc * base;
        a.s = acc;
        return a;
    }

    ParsedValue parse_expr() {
        std::size_t at = pos_;
        bool lead_neg = eat('-');
        ParsedValue acc = parse_term();
        if (lead_neg) acc = negate(std::move(acc));
        for (;;) {
            skip_ws();
            at = pos_;
            if (eat('+'))
                acc = add(std::move(acc), parse_term(), false, at);
            else if (peek() == '-') {
                ++pos_;
                acc = add(std::move(acc), parse_term(), true, at);
            } else
                break;
        }
        return acc;
    }

    ParsedValue parse_term() {
        std::size_t at = pos_;
        ParsedValue acc = parse_factor();
        for (;;) {
            skip_ws();
            at = pos_;
            if (pos_ < src_.size() && src_[pos_] == '*') {
                ++pos_;
                acc = mul(std::move(acc), parse_factor(), at);
            } else
                break;
        }
        return acc;
    }

    ParsedValue parse_factor() {
        ParsedValue a = parse_atom();
        skip_ws();
        std::size_t at = pos_;
        if (pos_ + 1 < src_.size() && src_[pos_] == '^' && src_[pos_ + 1] == '^') {
            pos_ += 2;
            return wedge_vals(std::move(a), parse_factor(), at);
        }
        if (pos_ < src_.size() && src_[pos_] == '^') {
            ++pos_;
            return power(std::move(a), parse_int(), at);
        }
        return a;
    }

    long long parse_int() {
        skip_ws();
        std::size_t at = pos_;
        bool neg = eat('-');
        skip_ws();
        if (pos_ >= src_.size() || !std::isdigit(static_cast<unsigned char>(src_[pos_])))
            fail("expected an integer exponent", at);
        long long n = 0;
        while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_])))
            n = n * 10 + (src_[pos_++] - '0');
        return neg ? -n : n;
    }

    ParsedValue parse_atom() {
        skip_ws();
        std::size_t at = pos_;
        if (pos_ >= src_.size()) fail("expected an expression", at);
        char c = src_[pos_];
        if (std::isdigit(static_cast<unsigned char>(c))) return parse_rational();
        if (c == '(') {
            ++pos_;
            ParsedValue inner = parse_expr();
            if (!eat(')')) fail("expected ')'", pos_);
            return inner;
        }
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return parse_ident();
        fail(std::string("unexpected character '") + c + "'", at);
    }

    ParsedValue parse_rational() {
        std::size_t at = pos_;
        auto digits = [&]() {
            std::string out;
            while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_])))
                out += src_[pos_++];
            return out;
        };
        std::string num = digits();
        std::string den;
        if (pos_ < src_.size() && src_[pos_] == '/') {
            ++pos_;
            den = digits();
            if (den.empty()) fail("expected a denominator after '/'", pos_);
        }
        if (!den.empty() && Rational(den) == 0) fail("division by zero", at);
        Rational q(num + (den.empty() ? "" : "/" + den));
        ParsedValue v;
        v.kind = ValueKind::scalar;
        v.s = scalar_constant(ring_, q, order_);
        return v;
    }

    std::optional<int> var_index(const std::string& name) const {
        for (int i = 0; i < ring_->dim(); ++i)
            if (ring_->variables[i] == name) return i;
        return std::nullopt;
    }

    ParsedValue parse_ident() {
        std::size_t at = pos_;
        std::string name;
        while (pos_ < src_.size() &&
               (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
            name += src_[pos_++];

        ParsedValue v;
        if (name == "h") {
            v.kind = ValueKind::scalar;
            v.s = scalar_h(ring_, order_);
            return v;
        }
        if (auto i = var_index(name)) {
            v.kind = ValueKind::scalar;
            v.s = scalar_poly(Poly::variable(ring_, *i), order_);
            return v;
        }
        if (name.size() > 1 && name[0] == 'D') {
            if (auto i = var_index(name.substr(1))) {
                v.kind = ValueKind::vector;
                v.v = basis_vector(ring_, *i, order_);
                return v;
            }
        }
        if (name.size() > 1 && name[0] == 'd') {
            if (auto i = var_index(name.substr(1))) {
                v.kind = ValueKind::form;
                v.f = basis_form(ring_, *i, order_);
                return v;
            }
        }
        fail("unknown name '" + name + "'", at);
    }
};

}  // namespace detail

inline ParsedValue parse_value(const std::string& src, const CoordinateRing* ring, int order) {
    return detail::ExprParser(src, ring, order).parse();
}

inline Scalar parse_scalar(const std::string& src, const CoordinateRing* ring, int order) {
    ParsedValue v = parse_value(src, ring, order);
    if (v.kind != ValueKind::scalar)
        throw parse_error("expected a scalar expression", src, 0);
    return v.s;
}

inline PolyVector parse_vector(const std::string& src, const CoordinateRing* ring, int order) {
    ParsedValue v = parse_value(src, ring, order);
    if (v.is_zero_scalar()) return PolyVector(order);
    if (v.kind != ValueKind::vector)
        throw parse_error("expected a multivector expression", src, 0);
    return v.v;
}

inline DiffForm parse_form(const std::string& src, const CoordinateRing* ring, int order) {
    ParsedValue v = parse_value(src, ring, order);
    if (v.is_zero_scalar()) return DiffForm(order);
    if (v.kind != ValueKind::form)
        throw parse_error("expected a differential form expression", src, 0);
    return v.f;
}

}  // namespace poismod
