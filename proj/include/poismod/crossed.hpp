#pragma once

#include "poismod/lift.hpp"

namespace poismod {

// Element of A_h[t, t^{-1}] twisted by phi = exp(D): finitely many t^n
// terms with h-series coefficients, multiplied by (a t^n)(b t^m) =
// a * phi^n(b) t^{n+m}.
struct CrossedElement {
    const StarProduct* prod = nullptr;
    const StarDerivation* gen = nullptr;  // generator of phi
    std::map<int, Scalar> terms;

    bool is_zero() const {
        for (const auto& [n, a] : terms)
            if (!a.is_zero()) return false;
        return true;
    }
    CrossedElement cleaned() const {
        CrossedElement r{prod, gen, {}};
        for (const auto& [n, a] : terms)
            if (!a.is_zero()) r.terms.emplace(n, a);
        return r;
    }
};

inline CrossedElement crossed_scalar(const StarProduct& prod, const StarDerivation& gen,
                                     const Scalar& a, int n = 0) {
    CrossedElement e{&prod, &gen, {}};
    if (!a.is_zero()) e.terms.emplace(n, a);
    return e;
}

inline CrossedElement crossed_t_power(const StarProduct& prod, const StarDerivation& gen, int n,
                                      int order) {
    return crossed_scalar(prod, gen, scalar_one(prod.structure().ring, order), n);
}

inline CrossedElement operator+(const CrossedElement& x, const CrossedElement& y) {
    if (x.prod != y.prod || x.gen != y.gen) throw ring_mismatch_error();
    CrossedElement r = x;
    for (const auto& [n, a] : y.terms) {
        auto it = r.terms.find(n);
        if (it == r.terms.end())
            r.terms.emplace(n, a);
        else
            it->second = it->second + a;
    }
    return r.cleaned();
}

inline CrossedElement operator-(const CrossedElement& x) {
    CrossedElement r = x;
    for (auto& [n, a] : r.terms) a = -a;
    return r;
}

inline CrossedElement operator-(const CrossedElement& x, const CrossedElement& y) {
    return x + (-y);
}

inline CrossedElement crossed_multiply(const CrossedElement& x, const CrossedElement& y) {
    if (x.prod != y.prod || x.gen != y.gen) throw ring_mismatch_error();
    CrossedElement r{x.prod, x.gen, {}};
    for (const auto& [n, a] : x.terms)
        for (const auto& [m, b] : y.terms) {
            Scalar twisted = (n == 0) ? b : exp_apply(x.gen->map, b, n);
            Scalar prod_ab = x.prod->star(a, twisted);
            auto it = r.terms.find(n + m);
            if (it == r.terms.end())
                r.terms.emplace(n + m, prod_ab);
            else
                it->second = it->second + prod_ab;
        }
    return r.cleaned();
}

// Euler derivation t d/dt: counts the t-power.
inline CrossedElement euler(const CrossedElement& x) {
    CrossedElement r{x.prod, x.gen, {}};
    for (const auto& [n, a] : x.terms)
        if (n != 0) r.terms.emplace(n, a.scaled(n));
    return r.cleaned();
}

inline bool crossed_equal(const CrossedElement& x, const CrossedElement& y) {
    return (x - y).is_zero();
}

// (x y - y x) must vanish at h^0; the h^1 coefficients per t-power are the
// semiclassical bracket of the classical symbols.
inline std::map<int, Poly> semiclassical_bracket(const CrossedElement& x,
                                                 const CrossedElement& y) {
    CrossedElement c = crossed_multiply(x, y) - crossed_multiply(y, x);
    std::map<int, Poly> out;
    for (const auto& [n, a] : c.terms) {
        if (!a.at(0).is_zero()) throw ring_error("commutator does not vanish at h^0");
        if (!a.shifted_down(1).at(0).is_zero()) out.emplace(n, a.shifted_down(1).at(0));
    }
    return out;
}

}  // namespace poismod
