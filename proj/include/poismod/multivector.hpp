#pragma once

#include <bit>
#include <map>

#include "poismod/series.hpp"

namespace poismod {

// Basis wedges of distinct generators are keyed by index bitmasks; bit i set
// means the factor with variable index i is present, factors ordered by
// increasing index.
using Mask = unsigned;

inline int mask_arity(Mask m) { return std::popcount(m); }

// Parity of sorting the concatenation (A..., B...) into increasing order;
// 0 when the factors overlap (the wedge vanishes).
inline int merge_sign(Mask a, Mask b) {
    if (a & b) return 0;
    int swaps = 0;
    for (Mask bb = b; bb; bb &= bb - 1) {
        Mask bit = bb & -bb;
        swaps += std::popcount(a & ~(bit - 1));
    }
    return (swaps % 2) ? -1 : 1;
}

// Position of index i inside mask m (number of set bits below it).
inline int mask_position(Mask m, int i) { return std::popcount(m & ((Mask(1) << i) - 1)); }

struct VecTag {};
struct FormTag {};

// One h-order of a homogeneous multivector (VecTag) or exterior form
// (FormTag): grade tag plus mask -> polynomial coefficient, canonical (no
// zero coefficients stored, empty map = zero).
template <class Tag>
class GradedLayer {
public:
    GradedLayer() = default;
    explicit GradedLayer(int grade) : grade_(grade) {}
    GradedLayer(int grade, Mask m, Poly p) : grade_(grade) { add(m, std::move(p)); }

    static GradedLayer from_poly(Poly p) {
        GradedLayer l(0);
        l.add(0u, std::move(p));
        return l;
    }

    int grade() const { return grade_; }
    bool is_zero() const { return comp_.empty(); }
    const std::map<Mask, Poly>& components() const { return comp_; }
    Poly component(Mask m) const {
        auto it = comp_.find(m);
        return it == comp_.end() ? Poly() : it->second;
    }
    const CoordinateRing* ring() const {
        for (const auto& [m, p] : comp_)
            if (p.ring()) return p.ring();
        return nullptr;
    }

    void add(Mask m, const Poly& p) {
        if (p.is_zero()) return;
        if (mask_arity(m) != grade_) throw ring_error("component arity does not match grade");
        auto [it, fresh] = comp_.try_emplace(m, p);
        if (!fresh) {
            it->second = it->second + p;
            if (it->second.is_zero()) comp_.erase(it);
        }
    }

    GradedLayer operator+(const GradedLayer& o) const {
        if (is_zero()) return o;
        if (o.is_zero()) return *this;
        if (grade_ != o.grade_) throw ring_error("grade mismatch in sum");
        GradedLayer r = *this;
        for (const auto& [m, p] : o.comp_) r.add(m, p);
        return r;
    }
    GradedLayer operator-(const GradedLayer& o) const { return *this + (-o); }
    GradedLayer operator-() const {
        GradedLayer r = *this;
        for (auto& [m, p] : r.comp_) p = -p;
        return r;
    }
    GradedLayer scaled(const Rational& q) const {
        GradedLayer r(grade_);
        if (q == 0) return r;
        for (const auto& [m, p] : comp_) r.comp_[m] = p.scaled(q);
        return r;
    }
    GradedLayer times(const Poly& f) const {
        GradedLayer r(grade_);
        for (const auto& [m, p] : comp_) r.add(m, p * f);
        return r;
    }
    bool operator==(const GradedLayer& o) const {
        if (is_zero() || o.is_zero()) return is_zero() && o.is_zero();
        return grade_ == o.grade_ && comp_ == o.comp_;
    }

    // Weight of a term c x^alpha e_A is wt(alpha) - |A| for multivectors
    // (each generator slot counts -1) and wt(alpha) + |A| for forms.
    std::map<int, GradedLayer> weight_slices() const {
        int off = std::is_same_v<Tag, VecTag> ? -grade_ : grade_;
        std::map<int, GradedLayer> out;
        for (const auto& [m, p] : comp_)
            for (const auto& [mono, c] : p.terms()) {
                auto [it, fresh] = out.try_emplace(mono.weight() + off, grade_);
                it->second.add(m, Poly::monomial(p.ring(), mono, c));
            }
        return out;
    }
    bool is_weight_homogeneous(int* weight_out = nullptr) const {
        auto s = weight_slices();
        if (s.size() > 1) return false;
        if (weight_out && !s.empty()) *weight_out = s.begin()->first;
        return true;
    }

private:
    int grade_ = 0;
    std::map<Mask, Poly> comp_;
};

using VecLayer = GradedLayer<VecTag>;
using FormLayer = GradedLayer<FormTag>;

template <class Tag>
GradedLayer<Tag> wedge(const GradedLayer<Tag>& a, const GradedLayer<Tag>& b) {
    GradedLayer<Tag> r(a.grade() + b.grade());
    for (const auto& [ma, pa] : a.components())
        for (const auto& [mb, pb] : b.components()) {
            int s = merge_sign(ma, mb);
            if (s == 0) continue;
            r.add(ma | mb, (pa * pb).scaled(s));
        }
    return r;
}

// h-series of layers: the working representation of multivectors and forms.
using PolyVector = HSeries<VecLayer>;
using DiffForm = HSeries<FormLayer>;

inline PolyVector basis_vector(const CoordinateRing* r, int i, int order = kDefaultOrder) {
    return PolyVector(order, VecLayer(1, Mask(1) << i, Poly::constant(r, 1)));
}
inline DiffForm basis_form(const CoordinateRing* r, int i, int order = kDefaultOrder) {
    return DiffForm(order, FormLayer(1, Mask(1) << i, Poly::constant(r, 1)));
}

inline PolyVector wedge(const PolyVector& a, const PolyVector& b) {
    return hseries_combine(a, b, [](const VecLayer& x, const VecLayer& y) { return wedge(x, y); });
}
inline DiffForm wedge(const DiffForm& a, const DiffForm& b) {
    return hseries_combine(a, b, [](const FormLayer& x, const FormLayer& y) { return wedge(x, y); });
}

template <class Tag>
HSeries<GradedLayer<Tag>> operator*(const Scalar& f, const HSeries<GradedLayer<Tag>>& v) {
    return hseries_combine(f, v, [](const Poly& p, const GradedLayer<Tag>& l) { return l.times(p); });
}

inline PolyVector vector_from_scalar(const Scalar& f) {
    PolyVector r(f.order());
    for (int i = 0; i <= f.order(); ++i)
        if (!f.at(i).is_zero()) r.at(i) = VecLayer::from_poly(f.at(i));
    return r;
}

inline Scalar scalar_from_vector(const PolyVector& v) {
    Scalar r(v.order());
    for (int i = 0; i <= v.order(); ++i) {
        if (v.at(i).is_zero()) continue;
        if (v.at(i).grade() != 0) throw ring_error("multivector of positive arity is not a function");
        r.at(i) = v.at(i).component(0u);
    }
    return r;
}

inline int series_grade(const PolyVector& v) {
    for (int i = 0; i <= v.order(); ++i)
        if (!v.at(i).is_zero()) return v.at(i).grade();
    return 0;
}
inline int series_grade(const DiffForm& v) {
    for (int i = 0; i <= v.order(); ++i)
        if (!v.at(i).is_zero()) return v.at(i).grade();
    return 0;
}

}  // namespace poismod
