#pragma once

#include <functional>

#include "poismod/star.hpp"

namespace poismod {

struct precondition_error : ring_error {
    explicit precondition_error(const std::string& what) : ring_error(what) {}
};

// A C[[h]]-linear operator on the star algebra together with the vector
// field it reduces to modulo h.
struct StarDerivation {
    const StarProduct* prod = nullptr;
    PolyVector classical;
    std::function<Scalar(const Scalar&)> map;

    Scalar operator()(const Scalar& a) const { return map(a); }
};

inline StarDerivation derivation_from_field(const StarProduct& prod, const PolyVector& w) {
    StarDerivation d;
    d.prod = &prod;
    d.classical = w;
    d.map = [&prod, w](const Scalar& a) { return apply_vector(w, a); };
    return d;
}

// a -> (g * a - a * g) / h; the commutator always vanishes at h^0, and the
// division costs one order of knowledge.
inline StarDerivation inner_derivation(const StarProduct& prod, const Scalar& g) {
    StarDerivation d;
    d.prod = &prod;
    d.classical = -hamiltonian_field(prod.structure(), g);
    d.map = [&prod, g](const Scalar& a) { return prod.commutator(g, a).shifted_down(1); };
    return d;
}

inline StarDerivation derivation_bracket(const StarDerivation& a, const StarDerivation& b) {
    StarDerivation d;
    d.prod = a.prod;
    d.classical = schouten(a.classical, b.classical);
    auto fa = a.map, fb = b.map;
    d.map = [fa, fb](const Scalar& x) { return fa(fb(x)) - fb(fa(x)); };
    return d;
}

inline StarDerivation derivation_sum(const StarDerivation& a, const StarDerivation& b) {
    StarDerivation d;
    d.prod = a.prod;
    d.classical = a.classical + b.classical;
    auto fa = a.map, fb = b.map;
    d.map = [fa, fb](const Scalar& x) { return fa(x) + fb(x); };
    return d;
}

inline Scalar leibniz_defect(const StarDerivation& d, const Scalar& a, const Scalar& b) {
    return d(d.prod->star(a, b)) - d.prod->star(d(a), b) - d.prod->star(a, d(b));
}

namespace detail {

// Deterministic probe polynomials: all monomials of low degree plus a few
// seeded dense ones. Exactness on these is the certification bank.
inline std::vector<Poly> probe_bank(const CoordinateRing& ring) {
    std::vector<Poly> bank;
    for (const Expo& e : monomials_of_weight(ring, 0, 1)) bank.push_back(Poly::monomial(&ring, e, 1));
    for (int w = 1; w <= 3; ++w)
        for (const Expo& e : monomials_of_weight(ring, w, 1))
            bank.push_back(Poly::monomial(&ring, e, 1));
    std::mt19937_64 rng(0xC0FFEEull);
    std::uniform_int_distribution<int> coeff(-3, 3);
    for (int k = 0; k < 3; ++k) {
        Poly p;
        for (const Expo& e : monomials_of_weight(ring, 2, 1))
            p = p + Poly::monomial(&ring, e, coeff(rng));
        bank.push_back(p + Poly::constant(&ring, coeff(rng)));
    }
    return bank;
}

}  // namespace detail

struct QuantDerivation {
    StarDerivation D;
    bool certified = false;
    int corrections = 0;  // number of h-orders where a correction was solved
    Obstruction obstruction;
};

// phi = exp(n D); requires D to vanish at h^0 so the series terminates at
// the truncation order.
inline Scalar exp_apply(const std::function<Scalar(const Scalar&)>& map, const Scalar& a, int n) {
    Scalar result = a;
    Scalar cur = a;
    Rational fact = 1;
    for (int k = 1; k <= a.order() + 1; ++k) {
        cur = map(cur).scaled(n);
        if (!cur.is_zero() && cur.valuation() < k)
            throw ring_error("exp needs a derivation that vanishes at h^0");
        if (cur.is_zero() || cur.valuation() > cur.order()) break;
        fact *= k;
        result = result + cur.scaled(Rational(1) / fact);
    }
    return result;
}

// Quantizes a Poisson vector field. Strategies, in order: the plain action
// of w (exact when the star coefficients are w-invariant); symmetric
// second-order symbol corrections solved from the Leibniz defect on
// coordinate pairs; and, when -w is a log-Hamiltonian field f^{-1}[pi,f],
// the operator logarithm of conjugation by f, which is a star derivation
// whenever the product is associative at this order.
inline QuantDerivation quantized_derivation(const StarProduct& prod, const PolyVector& w,
                                            int weight_bound = 8, int box = 3) {
    const PoissonStructure& ps = prod.structure();
    const CoordinateRing& ring = *ps.ring;
    if (!schouten(ps.pi, w).is_zero())
        throw precondition_error("field is not Poisson for this structure");
    int N = prod.max_order();

    QuantDerivation result;
    result.D = derivation_from_field(prod, w);

    auto bank = detail::probe_bank(ring);
    auto first_defect = [&](const StarDerivation& d) -> int {
        int worst = N + 1;
        for (size_t i = 0; i < bank.size(); ++i)
            for (size_t j = i; j < bank.size(); ++j) {
                Scalar def = leibniz_defect(d, scalar_poly(bank[i], N), scalar_poly(bank[j], N));
                if (def.is_zero()) continue;
                worst = std::min(worst, def.valuation());
                if (worst <= 1) return worst;
            }
        return worst;
    };

    bool symbol_failed = false;
    for (int round = 0; round <= N && !symbol_failed; ++round) {
        int m = first_defect(result.D);
        if (m > N) {
            result.certified = true;
            return result;
        }
        // defect(a,b) at order m should be sym^{kl} d_k a d_l b; read the
        // symbol off coordinate pairs and subtract h^m * (1/2) sym^{kl} d_k d_l.
        int d = ring.dim();
        std::vector<std::vector<Poly>> sym(d, std::vector<Poly>(d));
        for (int k = 0; k < d; ++k)
            for (int l = 0; l < d; ++l) {
                Scalar def = leibniz_defect(result.D, scalar_poly(Poly::variable(&ring, k), N),
                                            scalar_poly(Poly::variable(&ring, l), N));
                if (def.valuation() >= m + 1) continue;
                sym[k][l] = def.at(m);
            }
        StarDerivation prev = result.D;
        StarDerivation next = prev;
        next.map = [prev, sym, m, d](const Scalar& a) {
            Scalar corr(a.order());
            for (int k = 0; k < d; ++k)
                for (int l = 0; l < d; ++l) {
                    if (sym[k][l].is_zero()) continue;
                    corr = corr + (scalar_poly(sym[k][l], a.order()) *
                                   derivative(derivative(a, k), l))
                                      .scaled(Rational(1, 2));
                }
            if (corr.is_zero()) return prev.map(a);
            return prev.map(a) + corr.shifted_up(m).truncated(a.order());
        };
        if (first_defect(next) <= m) {
            symbol_failed = true;
        } else {
            result.D = next;
            ++result.corrections;
        }
    }

    auto dec = log_hamiltonian_decompose(ps, -w, box, weight_bound);
    if (dec.f) {
        Scalar F = dec.f->truncated(std::min(dec.f->order(), N)).extended_exact(N);
        Scalar Finv = star_unit_inverse(F, prod, N);
        const StarProduct* pp = &prod;
        auto conj = [pp, F, Finv](const Scalar& a) { return pp->star(pp->star(F, a), Finv); };
        StarDerivation d;
        d.prod = &prod;
        d.classical = w;
        d.map = [conj](const Scalar& a) {
            // operator log: sum (-1)^{k+1}/k (conj - id)^k
            Scalar cur = conj(a) - a;
            Scalar acc = cur;
            for (int k = 2; k <= a.order() && !cur.is_zero(); ++k) {
                cur = conj(cur) - cur;
                if (cur.is_zero()) break;
                acc = acc + cur.scaled(Rational((k % 2) ? 1 : -1, k));
            }
            return acc;
        };
        bool classical_ok = true;
        for (int i = 0; i < ring.dim() && classical_ok; ++i) {
            Scalar a = scalar_poly(Poly::variable(&ring, i), N);
            Scalar diff = d.map(a) - apply_vector(w, a);
            classical_ok = diff.is_zero() || diff.valuation() >= 2;
        }
        if (classical_ok && first_defect(d) > N) {
            result.D = d;
            result.certified = true;
            result.corrections = -1;  // marker: conjugation-log construction
            return result;
        }
    }
    result.obstruction = {2, 0,
                          "Leibniz defect is not a symmetric symbol and the field is not "
                          "log-Hamiltonian within the search box",
                          false};
    return result;
}

struct StarAutomorphism {
    std::function<Scalar(const Scalar&)> apply;
    Scalar operator()(const Scalar& a) const { return apply(a); }
};

inline StarAutomorphism exp_derivation(const StarDerivation& D, int n = 1) {
    auto map = D.map;
    return StarAutomorphism{[map, n](const Scalar& a) { return exp_apply(map, a, n); }};
}

}  // namespace poismod
