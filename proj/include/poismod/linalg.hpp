#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "poismod/multivector.hpp"

namespace poismod {

using Matrix = std::vector<std::vector<Rational>>;

// In-place reduced row echelon form; returns pivot column indices.
// Deterministic: first nonzero pivot, columns scanned left to right.
inline std::vector<int> rref(Matrix& m) {
    std::vector<int> pivots;
    if (m.empty()) return pivots;
    size_t rows = m.size(), cols = m[0].size();
    size_t r = 0;
    for (size_t c = 0; c < cols && r < rows; ++c) {
        size_t sel = r;
        while (sel < rows && m[sel][c] == 0) ++sel;
        if (sel == rows) continue;
        std::swap(m[r], m[sel]);
        Rational inv = Rational(1) / m[r][c];
        for (size_t j = c; j < cols; ++j) m[r][j] *= inv;
        for (size_t i = 0; i < rows; ++i) {
            if (i == r || m[i][c] == 0) continue;
            Rational f = m[i][c];
            for (size_t j = c; j < cols; ++j) m[i][j] -= f * m[r][j];
        }
        pivots.push_back(static_cast<int>(c));
        ++r;
    }
    return pivots;
}

// Solves A x = b exactly; free variables are set to zero (canonical choice).
inline std::optional<std::vector<Rational>> solve(const Matrix& a, const std::vector<Rational>& b) {
    size_t rows = a.size();
    size_t cols = rows ? a[0].size() : 0;
    Matrix aug(rows, std::vector<Rational>(cols + 1));
    for (size_t i = 0; i < rows; ++i) {
        for (size_t j = 0; j < cols; ++j) aug[i][j] = a[i][j];
        aug[i][cols] = b[i];
    }
    auto pivots = rref(aug);
    if (!pivots.empty() && pivots.back() == static_cast<int>(cols)) return std::nullopt;
    std::vector<Rational> x(cols, 0);
    for (size_t k = 0; k < pivots.size(); ++k) x[pivots[k]] = aug[k][cols];
    return x;
}

inline std::vector<std::vector<Rational>> kernel_basis(const Matrix& a) {
    size_t rows = a.size();
    size_t cols = rows ? a[0].size() : 0;
    Matrix m = a;
    auto pivots = rref(m);
    std::vector<bool> is_pivot(cols, false);
    for (int p : pivots) is_pivot[p] = true;
    std::vector<std::vector<Rational>> basis;
    for (size_t f = 0; f < cols; ++f) {
        if (is_pivot[f]) continue;
        std::vector<Rational> v(cols, 0);
        v[f] = 1;
        for (size_t k = 0; k < pivots.size(); ++k) v[pivots[k]] = -m[k][f];
        basis.push_back(std::move(v));
    }
    return basis;
}

inline size_t rank(Matrix a) { return rref(a).size(); }

// Monomials of the given weight. Exponents of invertible variables range in
// [-box, box]; non-invertible exponents are nonnegative and bounded by the
// weight budget plus what the invertible ones can compensate, so polynomial
// rings get the complete slice independent of the box.
inline std::vector<Expo> monomials_of_weight(const CoordinateRing& ring, int weight, int box) {
    int d = ring.dim();
    int n_inv = 0;
    for (int i = 0; i < d; ++i)
        if (ring.invertible[i]) ++n_inv;
    int pos_cap = std::max(weight, 0) + box * n_inv;
    std::vector<Expo> out;
    Expo cur;
    std::function<void(int, int)> rec = [&](int i, int rem) {
        if (i == d) {
            if (rem == 0) out.push_back(cur);
            return;
        }
        int lo = ring.invertible[i] ? -box : 0;
        int hi = ring.invertible[i] ? box : pos_cap;
        for (int e = lo; e <= hi; ++e) {
            cur.e[i] = e;
            rec(i + 1, rem - e);
        }
        cur.e[i] = 0;
    };
    rec(0, weight);
    return out;
}

// Basis of the weight slice of grade-k multivectors (or forms): pairs
// (mask, monomial). Multivector terms weigh wt(mono) - k, form terms
// wt(mono) + k.
template <class Tag>
struct SliceBasis {
    int grade = 0;
    std::vector<std::pair<Mask, Expo>> elems;

    GradedLayer<Tag> element(const CoordinateRing* ring, size_t i) const {
        return GradedLayer<Tag>(grade, elems[i].first,
                                Poly::monomial(ring, elems[i].second, 1));
    }
    GradedLayer<Tag> combination(const CoordinateRing* ring,
                                 const std::vector<Rational>& coeff) const {
        GradedLayer<Tag> r(grade);
        for (size_t i = 0; i < elems.size(); ++i)
            if (coeff[i] != 0)
                r.add(elems[i].first, Poly::monomial(ring, elems[i].second, coeff[i]));
        return r;
    }
};

template <class Tag>
SliceBasis<Tag> slice_basis(const CoordinateRing& ring, int grade, int weight, int box) {
    SliceBasis<Tag> b;
    b.grade = grade;
    int off = std::is_same_v<Tag, VecTag> ? grade : -grade;
    int d = ring.dim();
    for (Mask m = 0; m < (Mask(1) << d); ++m) {
        if (mask_arity(m) != grade) continue;
        for (const Expo& mono : monomials_of_weight(ring, weight + off, box))
            b.elems.emplace_back(m, mono);
    }
    return b;
}

// Dense coordinates of a layer in the row space spanned by (mask, monomial)
// pairs; rows are discovered on the fly so the target slice never needs
// explicit enumeration.
template <class Tag>
struct RowIndex {
    std::map<std::pair<Mask, Expo>, int> index;
    std::vector<std::pair<Mask, Expo>> rows;

    int row_of(Mask m, const Expo& mono) {
        auto [it, fresh] = index.try_emplace({m, mono}, static_cast<int>(rows.size()));
        if (fresh) rows.push_back({m, mono});
        return it->second;
    }
    void scatter(const GradedLayer<Tag>& l, std::vector<std::map<int, Rational>>& cols, int col) {
        for (const auto& [m, p] : l.components())
            for (const auto& [mono, c] : p.terms()) cols[col][row_of(m, mono)] = c;
    }
};

// Solves sum_j x_j * images[j] = target exactly in the layer coordinates.
template <class Tag>
std::optional<std::vector<Rational>> solve_layer_system(
    const std::vector<GradedLayer<Tag>>& images, const GradedLayer<Tag>& target) {
    RowIndex<Tag> rows;
    std::vector<std::map<int, Rational>> cols(images.size() + 1);
    for (size_t j = 0; j < images.size(); ++j) rows.scatter(images[j], cols, static_cast<int>(j));
    rows.scatter(target, cols, static_cast<int>(images.size()));
    size_t nr = rows.rows.size(), nc = images.size();
    if (nr == 0) return std::vector<Rational>(nc, 0);
    Matrix a(nr, std::vector<Rational>(nc, 0));
    std::vector<Rational> b(nr, 0);
    for (size_t j = 0; j < nc; ++j)
        for (const auto& [r, v] : cols[j]) a[r][j] = v;
    for (const auto& [r, v] : cols[nc]) b[r] = v;
    return solve(a, b);
}

}  // namespace poismod
