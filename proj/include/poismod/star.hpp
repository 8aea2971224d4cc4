#pragma once

#include <memory>
#include <random>
#include <string>

#include "poismod/poisson.hpp"

namespace poismod {

struct wrong_provider_error : ring_error {
    explicit wrong_provider_error(const std::string& what) : ring_error(what) {}
};
struct unsupported_order_error : ring_error {
    explicit unsupported_order_error(const std::string& what) : ring_error(what) {}
};

// Full h-series pairing pi(da, db) = sum_{i<j} pi^{ij} (d_i a d_j b - d_j a d_i b).
inline Scalar poisson_pairing(const PolyVector& pi, const Scalar& a, const Scalar& b) {
    int N = std::min({pi.order(), a.order(), b.order()});
    Scalar acc(N);
    for (int m = 0; m <= pi.order(); ++m) {
        const VecLayer& layer = pi.at(m);
        if (layer.is_zero() || layer.grade() != 2) continue;
        Scalar part(N);
        for (const auto& [mask, coeff] : layer.components()) {
            int i = 0;
            while (!(mask & (Mask(1) << i))) ++i;
            int j = i + 1;
            while (!(mask & (Mask(1) << j))) ++j;
            Scalar cross = derivative(a, i) * derivative(b, j) - derivative(a, j) * derivative(b, i);
            part = part + scalar_poly(coeff, N) * cross;
        }
        if (m > 0) part = part.shifted_up(m).truncated(N);
        acc = acc + part;
    }
    return acc;
}

// Leading-order pairing pi_1(da, db) on plain polynomials.
inline Poly leading_pairing(const PoissonStructure& ps, const Poly& a, const Poly& b) {
    Poly acc;
    for (const auto& [mask, coeff] : ps.leading().components()) {
        int i = 0;
        while (!(mask & (Mask(1) << i))) ++i;
        int j = i + 1;
        while (!(mask & (Mask(1) << j))) ++j;
        acc = acc + coeff * (a.derivative(i) * b.derivative(j) - a.derivative(j) * b.derivative(i));
    }
    return acc;
}

class StarProduct {
public:
    virtual ~StarProduct() = default;
    virtual Scalar star(const Scalar& a, const Scalar& b) const = 0;
    virtual const PoissonStructure& structure() const = 0;
    virtual int max_order() const = 0;
    virtual std::string name() const = 0;

    Scalar star(const Scalar& a, const Scalar& b, const Scalar& c) const {
        return star(star(a, b), c);
    }
    Scalar commutator(const Scalar& a, const Scalar& b) const { return star(a, b) - star(b, a); }
};

// Constant-coefficient exponential star product: associative at every
// truncation order because the untruncated series is associative.
class MoyalStar : public StarProduct {
public:
    MoyalStar(PoissonStructure ps, int N) : ps_(std::move(ps)), order_(N) {
        ps_.require_certified();
        if (ps_.order() < order_)
            throw unsupported_order_error("structure truncated below the requested order");
        const CoordinateRing& ring = *ps_.ring;
        for (int m = 0; m <= ps_.order(); ++m)
            for (const auto& [mask, coeff] : ps_.pi.at(m).components())
                if (!coeff.is_zero() && coeff.total_degree() != 0)
                    throw wrong_provider_error("Moyal provider needs constant coefficients");
        // antisymmetric entry table theta[i][j] = {x_i, x_j} as an h-series
        int d = ring.dim();
        theta_.assign(d, std::vector<Scalar>(d, Scalar(order_)));
        for (int m = 1; m <= std::min(ps_.order(), order_); ++m)
            for (const auto& [mask, coeff] : ps_.pi.at(m).components()) {
                int i = 0;
                while (!(mask & (Mask(1) << i))) ++i;
                int j = i + 1;
                while (!(mask & (Mask(1) << j))) ++j;
                Rational c = coeff.is_zero() ? Rational(0) : coeff.terms().begin()->second;
                theta_[i][j].at(m) = theta_[i][j].at(m) + Poly::constant(&ring, c);
                theta_[j][i].at(m) = theta_[j][i].at(m) - Poly::constant(&ring, c);
            }
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j)
                if (!theta_[i][j].is_zero()) entries_.emplace_back(i, j);
    }

    Scalar star(const Scalar& a, const Scalar& b) const override {
        Scalar aa = a.truncated(std::min(a.order(), order_)).extended_exact(order_);
        Scalar bb = b.truncated(std::min(b.order(), order_)).extended_exact(order_);
        Scalar acc(order_);
        Rational half(1, 2);
        // sum over sequences of theta entries; every entry carries at least h^1
        std::function<void(int, const Scalar&, const Scalar&, const Scalar&, Rational)> rec =
            [&](int depth, const Scalar& tp, const Scalar& da, const Scalar& db, Rational c) {
                acc = acc + (tp * da * db).scaled(c);
                if (depth >= order_) return;
                if (da.is_zero() || db.is_zero()) return;
                for (auto [i, j] : entries_) {
                    Scalar tp2 = tp * theta_[i][j];
                    if (tp2.is_zero()) continue;
                    rec(depth + 1, tp2, derivative(da, i), derivative(db, j),
                        c * half / (depth + 1));
                }
            };
        rec(0, scalar_one(ps_.ring, order_), aa, bb, 1);
        return acc;
    }

    const PoissonStructure& structure() const override { return ps_; }
    int max_order() const override { return order_; }
    std::string name() const override { return "moyal"; }

private:
    PoissonStructure ps_;
    int order_;
    std::vector<std::vector<Scalar>> theta_;
    std::vector<std::pair<int, int>> entries_;
};

// Second-order star product for arbitrary certified pi: the h^2 coefficient
// is the standard one fixed by associativity mod h^3. Constant structures
// fall back to the exponential formula and then support any order.
class Universal2Star : public StarProduct {
public:
    Universal2Star(PoissonStructure ps, int N) : ps_(std::move(ps)), order_(N) {
        ps_.require_certified();
        if (ps_.order() < order_)
            throw unsupported_order_error("structure truncated below the requested order");
        bool constant = true;
        for (int m = 0; m <= ps_.order() && constant; ++m)
            for (const auto& [mask, coeff] : ps_.pi.at(m).components())
                if (!coeff.is_zero() && coeff.total_degree() != 0) constant = false;
        if (constant)
            moyal_ = std::make_unique<MoyalStar>(ps_, N);
        else if (N > 2)
            throw unsupported_order_error("universal2 supports order <= 2 for non-constant pi");
    }

    Scalar star(const Scalar& a, const Scalar& b) const override {
        if (moyal_) return moyal_->star(a, b);
        const CoordinateRing& ring = *ps_.ring;
        int d = ring.dim();
        Scalar aa = a.truncated(std::min(a.order(), order_)).extended_exact(order_);
        Scalar bb = b.truncated(std::min(b.order(), order_)).extended_exact(order_);
        Scalar acc = aa * bb + poisson_pairing(ps_.pi, aa, bb).scaled(Rational(1, 2));
        if (order_ < 2) return acc.truncated(order_);

        // full antisymmetric matrix of pi_1
        std::vector<std::vector<Poly>> p(d, std::vector<Poly>(d, Poly()));
        for (const auto& [mask, coeff] : ps_.leading().components()) {
            int i = 0;
            while (!(mask & (Mask(1) << i))) ++i;
            int j = i + 1;
            while (!(mask & (Mask(1) << j))) ++j;
            p[i][j] = coeff;
            p[j][i] = -coeff;
        }
        Scalar b2(order_ - 2);
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j) {
                if (p[i][j].is_zero()) continue;
                Scalar pij = scalar_poly(p[i][j], order_ - 2);
                for (int k = 0; k < d; ++k)
                    for (int l = 0; l < d; ++l) {
                        if (!p[k][l].is_zero()) {
                            Scalar t1 = derivative(derivative(aa, i), k).truncated(order_ - 2) *
                                        derivative(derivative(bb, j), l).truncated(order_ - 2);
                            b2 = b2 + (pij * scalar_poly(p[k][l], order_ - 2) * t1)
                                          .scaled(Rational(1, 8));
                        }
                        Poly dp = p[k][l].derivative(j);
                        if (!dp.is_zero()) {
                            Scalar t2 =
                                derivative(derivative(aa, i), k).truncated(order_ - 2) *
                                    derivative(bb, l).truncated(order_ - 2) -
                                derivative(aa, k).truncated(order_ - 2) *
                                    derivative(derivative(bb, i), l).truncated(order_ - 2);
                            b2 = b2 + (pij * scalar_poly(dp, order_ - 2) * t2)
                                          .scaled(Rational(1, 12));
                        }
                    }
            }
        return acc + b2.shifted_up(2);
    }

    const PoissonStructure& structure() const override { return ps_; }
    int max_order() const override { return order_; }
    std::string name() const override { return "universal2"; }

private:
    PoissonStructure ps_;
    int order_;
    std::unique_ptr<MoyalStar> moyal_;
};

// Two-sided star inverse of a series whose h^0 part is a ring unit,
// computed order by order against the left equation f * g = 1.
inline Scalar star_unit_inverse(const Scalar& f, const StarProduct& prod, int N) {
    const CoordinateRing* ring = prod.structure().ring;
    Scalar fx = f.truncated(std::min(f.order(), N)).extended_exact(N);
    if (!fx.at(0).is_unit()) throw not_a_unit_error("star inverse");
    Poly inv0 = fx.at(0).unit_inverse();
    Scalar g(N, inv0);
    for (int m = 1; m <= N; ++m) {
        Scalar r = prod.star(fx, g) - scalar_one(ring, N);
        g.at(m) = -(r.at(m) * inv0);
    }
    if (!(prod.star(fx, g) == scalar_one(ring, N)) || !(prod.star(g, fx) == scalar_one(ring, N)))
        throw ring_error("star inverse failed the two-sided check");
    return g;
}

}  // namespace poismod
