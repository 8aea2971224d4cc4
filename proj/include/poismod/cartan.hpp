#pragma once

#include <string>
#include <tuple>

#include "poismod/multivector.hpp"

namespace poismod {

// Contraction of a basis wedge e_A into dx^M. i_{e_A} composes the single
// contractions with the leftmost factor outermost, so the largest index acts
// first; a single i_{d/dx_j} removes dx_j with sign (-1)^{position}.
inline FormLayer contract(const VecLayer& g, const FormLayer& a) {
    FormLayer r(std::max(a.grade() - g.grade(), 0));
    if (a.grade() < g.grade()) return r;
    for (const auto& [A, p] : g.components())
        for (const auto& [M, q] : a.components()) {
            if ((A & M) != A) continue;
            Mask cur = M;
            int sign = 1;
            for (int i = kMaxVars - 1; i >= 0; --i) {
                Mask bit = Mask(1) << i;
                if (!(A & bit)) continue;
                if (mask_position(cur, i) % 2) sign = -sign;
                cur &= ~bit;
            }
            r.add(cur, (p * q).scaled(sign));
        }
    return r;
}

inline FormLayer de_rham(const FormLayer& a) {
    FormLayer r(a.grade() + 1);
    for (const auto& [M, p] : a.components())
        for (int j = 0; j < kMaxVars; ++j) {
            Poly dp = p.derivative(j);
            if (dp.is_zero()) continue;
            Mask bit = Mask(1) << j;
            int s = merge_sign(bit, M);
            if (s == 0) continue;
            r.add(M | bit, dp.scaled(s));
        }
    return r;
}

inline DiffForm contract(const PolyVector& g, const DiffForm& a) {
    return hseries_combine(g, a, [](const VecLayer& x, const FormLayer& y) { return contract(x, y); });
}

inline DiffForm de_rham(const DiffForm& a) {
    return hseries_map(a, [](const FormLayer& l) { return de_rham(l); });
}

// L_g = d i_g - (-1)^k i_g d for a k-vector g (the operator i_g has degree
// -k); k = 1 gives the classical Cartan formula.
inline DiffForm lie_derivative(const PolyVector& g, const DiffForm& a) {
    int k = series_grade(g);
    DiffForm left = de_rham(contract(g, a));
    DiffForm right = contract(g, de_rham(a));
    return (k % 2 == 0) ? left - right : left + right;
}

namespace detail {

inline std::string poly_key(const Poly& p) {
    std::string s;
    for (const auto& [m, c] : p.terms()) {
        for (int i = 0; i < kMaxVars; ++i) s += std::to_string(m.e[i]) + ",";
        s += to_string(c) + ";";
    }
    return s;
}

struct SchoutenMemo {
    std::map<std::tuple<Mask, Mask, std::string, std::string>, VecLayer> cache;
};

// [p e_A, q e_B] by structural recursion on the wedge decomposition:
// the generator cases, then the graded Leibniz rule in the second slot,
// then graded antisymmetry to shrink the first slot.
inline VecLayer sn_bracket(Mask A, const Poly& p, Mask B, const Poly& q, SchoutenMemo& memo) {
    int kA = mask_arity(A), kB = mask_arity(B);
    if (kA == 0 && kB == 0) return VecLayer(0);

    auto key = std::make_tuple(A, B, poly_key(p), poly_key(q));
    if (auto it = memo.cache.find(key); it != memo.cache.end()) return it->second;

    VecLayer r(std::max(kA + kB - 1, 0));
    if (kA == 0 && kB == 1) {
        // [f, q d_b] = -q d_b(f)
        r.add(0u, -(q * p.derivative(std::countr_zero(B))));
    } else if (kA == 1 && kB == 0) {
        r.add(0u, p * q.derivative(std::countr_zero(A)));
    } else if (kA == 1 && kB == 1) {
        r.add(B, p * q.derivative(std::countr_zero(A)));
        r.add(A, -(q * p.derivative(std::countr_zero(B))));
    } else if (kB >= 2) {
        // [g1, (q d_b1) ^ e_B'] = [g1, q d_b1] ^ e_B'
        //                        + (-1)^{|g1|} (q d_b1) ^ [g1, e_B']
        const CoordinateRing* ring = p.ring() ? p.ring() : q.ring();
        Mask b1 = B & -B;
        Mask rest = B & ~b1;
        Poly one = Poly::constant(ring, 1);
        VecLayer t1 = wedge(sn_bracket(A, p, b1, q, memo), VecLayer(mask_arity(rest), rest, one));
        VecLayer t2 = wedge(VecLayer(1, b1, q), sn_bracket(A, p, rest, one, memo));
        r = t1 + ((kA - 1) % 2 ? t2.scaled(-1) : t2);
    } else {
        // kA >= 2, kB <= 1: [g1,g2] = -(-1)^{|g1||g2|} [g2,g1]
        int e = (kA - 1) * (kB - 1);
        r = sn_bracket(B, q, A, p, memo).scaled(e % 2 ? 1 : -1);
    }
    memo.cache.emplace(std::move(key), r);
    return r;
}

}  // namespace detail

inline VecLayer schouten(const VecLayer& a, const VecLayer& b, detail::SchoutenMemo& memo) {
    VecLayer r(std::max(a.grade() + b.grade() - 1, 0));
    for (const auto& [A, p] : a.components())
        for (const auto& [B, q] : b.components()) r = r + detail::sn_bracket(A, p, B, q, memo);
    return r;
}

inline PolyVector schouten(const PolyVector& a, const PolyVector& b) {
    detail::SchoutenMemo memo;
    return hseries_combine(
        a, b, [&memo](const VecLayer& x, const VecLayer& y) { return schouten(x, y, memo); });
}

inline PolyVector schouten(const PolyVector& a, const Scalar& f) {
    return schouten(a, vector_from_scalar(f));
}

// w(f) for a vector field w.
inline Scalar apply_vector(const PolyVector& w, const Scalar& f) {
    return scalar_from_vector(schouten(w, vector_from_scalar(f)));
}

}  // namespace poismod
