#pragma once

#include <vector>

#include "poismod/ring.hpp"

namespace poismod {

inline constexpr int kDefaultOrder = 3;

// Truncated formal power series in h ("hbar"): order N means the value is
// known modulo h^{N+1}. Combining two series keeps min(orders); a
// default-constructed T is the zero coefficient.
template <class T>
class HSeries {
public:
    HSeries() : order_(0), c_(1) {}
    explicit HSeries(int order) : order_(order), c_(order + 1) {
        if (order < 0) throw ring_error("negative truncation order");
    }
    // Embeds exact (classical) data: known to every order.
    HSeries(int order, T constant_term) : HSeries(order) { c_[0] = std::move(constant_term); }

    int order() const { return order_; }
    const T& at(int i) const { return c_[i]; }
    T& at(int i) { return c_[i]; }

    bool is_zero() const {
        for (const auto& x : c_)
            if (!x.is_zero()) return false;
        return true;
    }
    // Lowest h-power with a nonzero coefficient, or order+1 when zero.
    int valuation() const {
        for (int i = 0; i <= order_; ++i)
            if (!c_[i].is_zero()) return i;
        return order_ + 1;
    }

    HSeries truncated(int m) const {
        HSeries r(std::min(m, order_));
        for (int i = 0; i <= r.order_; ++i) r.c_[i] = c_[i];
        return r;
    }
    // Declares knowledge at a higher order; valid only for exact data whose
    // tail is genuinely zero (classical embeddings).
    HSeries extended_exact(int m) const {
        if (m <= order_) return truncated(m);
        HSeries r(m);
        for (int i = 0; i <= order_; ++i) r.c_[i] = c_[i];
        return r;
    }

    HSeries operator+(const HSeries& o) const {
        HSeries r(std::min(order_, o.order_));
        for (int i = 0; i <= r.order_; ++i) r.c_[i] = c_[i] + o.c_[i];
        return r;
    }
    HSeries operator-(const HSeries& o) const {
        HSeries r(std::min(order_, o.order_));
        for (int i = 0; i <= r.order_; ++i) r.c_[i] = c_[i] - o.c_[i];
        return r;
    }
    HSeries operator-() const {
        HSeries r(order_);
        for (int i = 0; i <= order_; ++i) r.c_[i] = -c_[i];
        return r;
    }
    HSeries scaled(const Rational& q) const {
        HSeries r(order_);
        for (int i = 0; i <= order_; ++i) r.c_[i] = c_[i].scaled(q);
        return r;
    }
    // Multiplication by h^k: a value mod h^{N+1} shifts to one mod h^{N+k+1}.
    HSeries shifted_up(int k) const {
        HSeries r(order_ + k);
        for (int i = 0; i <= order_; ++i) r.c_[i + k] = c_[i];
        return r;
    }
    // Exact division by h^k; the low coefficients must vanish.
    HSeries shifted_down(int k) const {
        for (int i = 0; i < k && i <= order_; ++i)
            if (!c_[i].is_zero()) throw ring_error("series not divisible by h^k");
        if (order_ < k) throw ring_error("series order too small for h-division");
        HSeries r(order_ - k);
        for (int i = 0; i <= r.order_; ++i) r.c_[i] = c_[i + k];
        return r;
    }

    bool operator==(const HSeries& o) const { return order_ == o.order_ && c_ == o.c_; }

private:
    int order_;
    std::vector<T> c_;
};

// c_m = sum_{i+j=m} f(a_i, b_j), truncated at min of the operand orders.
template <class A, class B, class F>
auto hseries_combine(const HSeries<A>& a, const HSeries<B>& b, F&& f) {
    using C = decltype(f(a.at(0), b.at(0)));
    HSeries<C> r(std::min(a.order(), b.order()));
    for (int i = 0; i <= r.order(); ++i)
        for (int j = 0; i + j <= r.order(); ++j) {
            if (a.at(i).is_zero() || b.at(j).is_zero()) continue;
            r.at(i + j) = r.at(i + j) + f(a.at(i), b.at(j));
        }
    return r;
}

template <class T, class F>
HSeries<T> hseries_map(const HSeries<T>& a, F&& f) {
    HSeries<T> r(a.order());
    for (int i = 0; i <= a.order(); ++i) r.at(i) = f(a.at(i));
    return r;
}

template <class A, class B>
bool equal_mod(const HSeries<A>& a, const HSeries<B>& b, int m) {
    if (m > a.order() || m > b.order())
        throw ring_error("equal_mod beyond the known truncation order");
    for (int i = 0; i <= m; ++i)
        if (!(a.at(i) - b.at(i)).is_zero()) return false;
    return true;
}

using Scalar = HSeries<Poly>;

inline Scalar operator*(const Scalar& a, const Scalar& b) {
    return hseries_combine(a, b, [](const Poly& x, const Poly& y) { return x * y; });
}

inline Scalar scalar_constant(const CoordinateRing* r, Rational c, int order) {
    return Scalar(order, Poly::constant(r, std::move(c)));
}
inline Scalar scalar_one(const CoordinateRing* r, int order) {
    return scalar_constant(r, 1, order);
}
inline Scalar scalar_poly(Poly p, int order) { return Scalar(order, std::move(p)); }
// The formal parameter itself, h * 1.
inline Scalar scalar_h(const CoordinateRing* r, int order) {
    Scalar s(order);
    if (order >= 1) s.at(1) = Poly::constant(r, 1);
    return s;
}

inline Scalar derivative(const Scalar& f, int var) {
    return hseries_map(f, [var](const Poly& p) { return p.derivative(var); });
}

inline bool scalar_is_unit(const Scalar& f) { return f.at(0).is_unit(); }

// Order-by-order inverse of a unit series: g0 = f0^{-1},
// g_m = -f0^{-1} * sum_{j<m} f_{m-j} g_j.
inline Scalar unit_inverse(const Scalar& f) {
    const Poly inv0 = f.at(0).unit_inverse();
    Scalar g(f.order());
    g.at(0) = inv0;
    for (int m = 1; m <= f.order(); ++m) {
        Poly acc;
        for (int j = 0; j < m; ++j) acc = acc + f.at(m - j) * g.at(j);
        g.at(m) = -(inv0 * acc);
    }
    return g;
}

// exp of a series with zero constant term; the sum truncates by itself.
inline Scalar exp_series(const Scalar& f) {
    if (!f.at(0).is_zero()) throw ring_error("exp needs a series divisible by h");
    Scalar r = scalar_one(f.at(0).ring(), f.order());
    Scalar power = r;
    for (int k = 1; k <= f.order(); ++k) {
        power = power * f;
        r = r + power.scaled(Rational(1) / factorial(k));
    }
    return r;
}

}  // namespace poismod
