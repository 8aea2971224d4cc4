#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <optional>
#include <random>

#include "poismod/crossed.hpp"
#include "poismod/parser.hpp"
#include "poismod/render.hpp"
#include "test_support.hpp"

using namespace poismod;

namespace {

PoissonStructure certified(const CoordinateRing* ring, const std::string& src, int order) {
    PoissonStructure ps = make_poisson(ring, parse_vector(src, ring, order));
    REQUIRE(jacobi_check(ps).ok);
    return ps;
}

// Searches a scalar g = h*p whose inner derivation matches E at order h^1 on
// the generators; used as the witness that a defect is inner.
std::optional<Scalar> inner_witness(const StarProduct& prod,
                                    const std::function<Scalar(const Scalar&)>& E) {
    const PoissonStructure& ps = prod.structure();
    const CoordinateRing& ring = *ps.ring;
    int N = prod.max_order();

    PolyVector field(N);
    field.at(1) = VecLayer(1);
    for (int i = 0; i < ring.dim(); ++i) {
        Scalar e = E(scalar_poly(Poly::variable(&ring, i), N));
        if (e.is_zero()) continue;
        if (e.valuation() < 1) return std::nullopt;
        if (!e.at(1).is_zero()) field.at(1).add(Mask(1) << i, e.at(1));
    }
    for (int sign : {1, -1}) {
        HamiltonianSolve sol =
            solve_hamiltonian(ps, sign > 0 ? field : -field, 8, 3);
        if (!sol.f) continue;
        Scalar g = scalar_h(&ring, N) * *sol.f;
        StarDerivation inner = inner_derivation(prod, g);
        bool ok = true;
        for (int i = 0; i < ring.dim() && ok; ++i) {
            Scalar diff = E(scalar_poly(Poly::variable(&ring, i), N)) -
                          inner(scalar_poly(Poly::variable(&ring, i), N));
            ok = diff.is_zero() || diff.valuation() >= 2;
        }
        if (ok) return g;
    }
    return std::nullopt;
}

}  // namespace

TEST_CASE("Moyal star product basics") {
    CoordinateRing ring({"x", "y"});
    MoyalStar prod(certified(&ring, "h*Dx^^Dy", 4), 4);

    Scalar x = parse_scalar("x", &ring, 4), y = parse_scalar("y", &ring, 4);
    CHECK(prod.star(x, y) == parse_scalar("x*y + 1/2*h", &ring, 4));
    CHECK(prod.star(y, x) == parse_scalar("x*y - 1/2*h", &ring, 4));
    CHECK(prod.commutator(x, y) == parse_scalar("h", &ring, 4));
    CHECK(prod.star(x, x) == parse_scalar("x^2", &ring, 4));

    Scalar one = scalar_one(&ring, 4);
    CHECK(prod.star(one, parse_scalar("x^2*y + 3", &ring, 4)) ==
          parse_scalar("x^2*y + 3", &ring, 4));
    CHECK(prod.name() == "moyal");
    CHECK(prod.max_order() == 4);
}

TEST_CASE("Moyal star product is associative at the truncation order") {
    CoordinateRing ring({"x", "y"});
    std::mt19937_64 rng(101);

    MoyalStar plain(certified(&ring, "h*Dx^^Dy", 4), 4);
    MoyalStar corrected(certified(&ring, "h*Dx^^Dy + 3*h^2*Dx^^Dy", 4), 4);
    for (const StarProduct* prod : {(const StarProduct*)&plain, (const StarProduct*)&corrected}) {
        for (int it = 0; it < 8; ++it) {
            Scalar a = testutil::random_scalar(ring, rng, 4, 2, 2);
            Scalar b = testutil::random_scalar(ring, rng, 4, 2, 2);
            Scalar c = testutil::random_scalar(ring, rng, 4, 2, 2);
            CHECK(prod->star(prod->star(a, b), c) == prod->star(a, prod->star(b, c)));
            CHECK(prod->star(a + b, c) == prod->star(a, c) + prod->star(b, c));

            // semiclassical limit: commutator = h * pairing + O(h^2)
            Scalar comm = prod->commutator(a, b);
            CHECK(comm.at(0).is_zero());
            CHECK(comm.at(1) == leading_pairing(prod->structure(), a.at(0), b.at(0)));
        }
    }
}

TEST_CASE("star provider guards") {
    CoordinateRing ring({"x", "y"});
    PoissonStructure axb = certified(&ring, "h*y*Dx^^Dy", 4);
    CHECK_THROWS_AS(MoyalStar(axb, 2), wrong_provider_error);
    CHECK_THROWS_AS(MoyalStar(certified(&ring, "h*Dx^^Dy", 2), 4), unsupported_order_error);
    CHECK_THROWS_AS(Universal2Star(axb, 3), unsupported_order_error);

    PoissonStructure uncert = make_poisson(&ring, parse_vector("h*Dx^^Dy", &ring, 2));
    CHECK_THROWS_AS(MoyalStar(uncert, 2), uncertified_error);
}

TEST_CASE("universal second-order star product") {
    CoordinateRing ring({"x", "y"});
    std::mt19937_64 rng(102);

    Universal2Star axb(certified(&ring, "h*y*Dx^^Dy", 2), 2);
    Universal2Star quad(certified(&ring, "h*x*y*Dx^^Dy", 2), 2);
    CoordinateRing space({"x", "y", "z"});
    Universal2Star so3(certified(&space, "h*(z*Dx^^Dy + x*Dy^^Dz + y*Dz^^Dx)", 2), 2);

    for (int it = 0; it < 8; ++it) {
        Scalar a = testutil::random_scalar(ring, rng, 2, 2, 2);
        Scalar b = testutil::random_scalar(ring, rng, 2, 2, 2);
        Scalar c = testutil::random_scalar(ring, rng, 2, 2, 2);
        for (const StarProduct* prod : {(const StarProduct*)&axb, (const StarProduct*)&quad}) {
            CHECK(prod->star(prod->star(a, b), c) == prod->star(a, prod->star(b, c)));
            CHECK(prod->star(a, b).at(0) == (a * b).at(0));
            Scalar comm = prod->commutator(a, b);
            CHECK(comm.at(0).is_zero());
            CHECK(comm.at(1) == leading_pairing(prod->structure(), a.at(0), b.at(0)));
        }
        Scalar sa = testutil::random_scalar(space, rng, 2, 2, 2);
        Scalar sb = testutil::random_scalar(space, rng, 2, 2, 2);
        Scalar sc = testutil::random_scalar(space, rng, 2, 2, 2);
        CHECK(so3.star(so3.star(sa, sb), sc) == so3.star(sa, so3.star(sb, sc)));
    }

    // constant structures delegate to the exponential formula at any order
    MoyalStar moyal(certified(&ring, "h*Dx^^Dy", 4), 4);
    Universal2Star fallback(certified(&ring, "h*Dx^^Dy", 4), 4);
    CHECK(fallback.name() == "universal2");
    for (int it = 0; it < 6; ++it) {
        Scalar a = testutil::random_scalar(ring, rng, 4, 2, 2);
        Scalar b = testutil::random_scalar(ring, rng, 4, 2, 2);
        CHECK(fallback.star(a, b) == moyal.star(a, b));
    }
}

TEST_CASE("star inverses of units") {
    CoordinateRing ring({"x", "y"});
    MoyalStar prod(certified(&ring, "h*Dx^^Dy", 2), 2);
    Scalar f = parse_scalar("2 + h*x", &ring, 2);
    Scalar g = star_unit_inverse(f, prod, 2);
    CHECK(g == parse_scalar("1/2 - 1/4*h*x + 1/8*h^2*x^2", &ring, 2));
    CHECK(prod.star(f, g) == scalar_one(&ring, 2));
    CHECK(prod.star(g, f) == scalar_one(&ring, 2));

    CHECK_THROWS_AS(star_unit_inverse(parse_scalar("x", &ring, 2), prod, 2), not_a_unit_error);

    std::mt19937_64 rng(103);
    CoordinateRing lring({"x", "y"}, {"x"});
    MoyalStar lprod(certified(&lring, "h*Dx^^Dy", 3), 3);
    for (int it = 0; it < 8; ++it) {
        Expo e;
        e.e[0] = int(rng() % 5) - 2;
        Scalar f2 = scalar_poly(Poly::monomial(&lring, e, int(rng() % 2) ? 1 : -2), 3) +
                    scalar_h(&lring, 3) * testutil::random_scalar(lring, rng, 2, 2, 1);
        Scalar g2 = star_unit_inverse(f2, lprod, 3);
        CHECK(lprod.star(f2, g2) == scalar_one(&lring, 3));
        CHECK(lprod.star(g2, f2) == scalar_one(&lring, 3));
    }
}

TEST_CASE("quantized derivation by the plain field action") {
    CoordinateRing ring({"x", "y"});
    Universal2Star prod(certified(&ring, "h*y*Dx^^Dy", 2), 2);

    // the modular field acts as a star derivation without corrections
    PolyVector w = parse_vector("-h*Dx", &ring, 2);
    QuantDerivation q = quantized_derivation(prod, w);
    CHECK(q.certified);
    CHECK(q.corrections == 0);

    std::mt19937_64 rng(104);
    for (int it = 0; it < 6; ++it) {
        Scalar a = testutil::random_scalar(ring, rng, 2, 2, 2);
        Scalar b = testutil::random_scalar(ring, rng, 2, 2, 2);
        CHECK(leibniz_defect(q.D, a, b).is_zero());
        CHECK(q.D(a) == apply_vector(w, a));
    }

    CHECK_THROWS_AS(quantized_derivation(prod, parse_vector("h*x*Dx", &ring, 2)),
                    precondition_error);
}

TEST_CASE("quantized derivation by the logarithm of a conjugation") {
    CoordinateRing ring({"x", "y"}, {"x"});
    MoyalStar prod(certified(&ring, "h*Dx^^Dy", 3), 3);

    PolyVector w = parse_vector("h*x^-1*Dy", &ring, 3);
    QuantDerivation q = quantized_derivation(prod, w);
    REQUIRE(q.certified);
    CHECK(q.corrections == -1);

    std::mt19937_64 rng(105);
    for (int it = 0; it < 6; ++it) {
        Scalar a = testutil::random_scalar(ring, rng, 3, 2, 2);
        Scalar b = testutil::random_scalar(ring, rng, 3, 2, 2);
        CHECK(leibniz_defect(q.D, a, b).is_zero());
    }
    for (int i = 0; i < 2; ++i) {
        Scalar xi = scalar_poly(Poly::variable(&ring, i), 3);
        Scalar diff = q.D(xi) - apply_vector(w, xi);
        CHECK((diff.is_zero() || diff.valuation() >= 2));
    }

    // an uncorrectable field on a polynomial ring reports an obstruction
    CoordinateRing poly_ring({"x", "y"});
    MoyalStar pprod(certified(&poly_ring, "h*Dx^^Dy", 4), 4);
    QuantDerivation bad = quantized_derivation(pprod, parse_vector("h*x^2*Dy", &poly_ring, 4));
    CHECK_FALSE(bad.certified);
    CHECK_FALSE(bad.obstruction.reason.empty());
}

TEST_CASE("inner derivations and the witness solve") {
    CoordinateRing ring({"x", "y"});
    MoyalStar prod(certified(&ring, "h*Dx^^Dy", 3), 3);
    std::mt19937_64 rng(106);

    // inner derivations satisfy Leibniz identically
    Scalar g0 = scalar_h(&ring, 3) * parse_scalar("x^2 + 3*y", &ring, 3);
    StarDerivation ad = inner_derivation(prod, g0);
    for (int it = 0; it < 5; ++it) {
        Scalar a = testutil::random_scalar(ring, rng, 3, 2, 2);
        Scalar b = testutil::random_scalar(ring, rng, 3, 2, 2);
        CHECK(leibniz_defect(ad, a, b).is_zero());
    }

    // the witness search recovers a generator for a manufactured inner defect
    std::optional<Scalar> wit = inner_witness(prod, ad.map);
    REQUIRE(wit.has_value());
    for (int i = 0; i < 2; ++i) {
        Scalar xi = scalar_poly(Poly::variable(&ring, i), 3);
        Scalar diff = ad(xi) - inner_derivation(prod, *wit)(xi);
        CHECK((diff.is_zero() || diff.valuation() >= 2));
    }
}

TEST_CASE("brackets of quantized derivations match the field bracket up to inner terms") {
    CoordinateRing ring({"x", "y"}, {"x"});
    MoyalStar prod(certified(&ring, "h*Dx^^Dy", 3), 3);

    QuantDerivation d1 = quantized_derivation(prod, parse_vector("h*x^-1*Dy", &ring, 3));
    QuantDerivation d2 = quantized_derivation(prod, parse_vector("h*Dx", &ring, 3));
    REQUIRE(d1.certified);
    REQUIRE(d2.certified);

    PolyVector wb = schouten(d1.D.classical, d2.D.classical);
    QuantDerivation d3 = quantized_derivation(prod, wb);
    REQUIRE(d3.certified);

    StarDerivation lhs = derivation_bracket(d1.D, d2.D);
    auto defect = [&](const Scalar& a) { return lhs(a) - d3.D(a); };
    for (int i = 0; i < 2; ++i) {
        Scalar e = defect(scalar_poly(Poly::variable(&ring, i), 3));
        CHECK((e.is_zero() || e.valuation() >= 1));
    }
    std::optional<Scalar> wit = inner_witness(prod, defect);
    REQUIRE(wit.has_value());
    for (int i = 0; i < 2; ++i) {
        Scalar xi = scalar_poly(Poly::variable(&ring, i), 3);
        Scalar diff = defect(xi) - inner_derivation(prod, *wit)(xi);
        CHECK((diff.is_zero() || diff.valuation() >= 2));
    }
}

TEST_CASE("exponentials of certified derivations are star automorphisms") {
    CoordinateRing ring({"x", "y"});
    Universal2Star prod(certified(&ring, "h*y*Dx^^Dy", 2), 2);
    QuantDerivation q = quantized_derivation(prod, parse_vector("-h*Dx", &ring, 2));
    REQUIRE(q.certified);

    StarAutomorphism nu = exp_derivation(q.D);
    StarAutomorphism nu_inv = exp_derivation(q.D, -1);
    CHECK(nu(parse_scalar("x", &ring, 2)) == parse_scalar("x - h", &ring, 2));
    CHECK(nu(parse_scalar("y", &ring, 2)) == parse_scalar("y", &ring, 2));

    std::mt19937_64 rng(107);
    for (int it = 0; it < 6; ++it) {
        Scalar a = testutil::random_scalar(ring, rng, 2, 2, 2);
        Scalar b = testutil::random_scalar(ring, rng, 2, 2, 2);
        CHECK(nu(prod.star(a, b)) == prod.star(nu(a), nu(b)));
        CHECK(nu_inv(nu(a)) == a);
    }
}

TEST_CASE("lifting a classical unit to a star conjugation") {
    CoordinateRing ring({"x", "y"}, {"x"});
    MoyalStar prod(certified(&ring, "h*Dx^^Dy", 3), 3);

    LiftResult trivial = lift_log_hamiltonian(prod, Poly::constant(&ring, 1), 3);
    REQUIRE(trivial.lifted.has_value());
    CHECK(*trivial.lifted == scalar_one(&ring, 3));
    CHECK(trivial.field.is_zero());

    LiftResult lift = lift_log_hamiltonian(prod, Poly::variable(&ring, 0), 3);
    REQUIRE(lift.lifted.has_value());
    CHECK(render(lift.field) == "h*x^-1*Dy");
    CHECK(lift.derivation.certified);
    CHECK(lift.lifted->at(0) == Poly::variable(&ring, 0));

    // exp(D) really is conjugation by the lifted unit
    StarAutomorphism phi = exp_derivation(lift.derivation.D);
    Scalar Finv = star_unit_inverse(*lift.lifted, prod, 3);
    for (int i = 0; i < 2; ++i) {
        Scalar xi = scalar_poly(Poly::variable(&ring, i), 3);
        CHECK(phi(xi) == prod.star(prod.star(*lift.lifted, xi), Finv));
    }

    Expo e2;
    e2.e[0] = 2;
    LiftResult square = lift_log_hamiltonian(prod, Poly::monomial(&ring, e2, 1), 3);
    REQUIRE(square.lifted.has_value());
    CHECK(square.lifted->at(0) == Poly::monomial(&ring, e2, 1));

    CHECK_THROWS_AS(lift_log_hamiltonian(prod, parse_scalar("x + 1", &ring, 0).at(0), 3),
                    not_a_unit_error);
}

TEST_CASE("modular automorphism candidates") {
    CoordinateRing ring({"x", "y"});
    MoyalStar sympl(certified(&ring, "h*Dx^^Dy", 4), 4);
    AutomorphismReport id_rep =
        modular_automorphism_candidate(sympl, parse_form("dx^^dy", &ring, 4));
    REQUIRE(id_rep.derivation.certified);
    CHECK(id_rep.modular.field.is_zero());
    CHECK(id_rep.automorphism_law);
    CHECK(id_rep.nu(parse_scalar("x^2*y", &ring, 4)) == parse_scalar("x^2*y", &ring, 4));

    Universal2Star axb(certified(&ring, "h*y*Dx^^Dy", 2), 2);
    AutomorphismReport rep = modular_automorphism_candidate(axb, parse_form("dx^^dy", &ring, 2));
    REQUIRE(rep.derivation.certified);
    CHECK(rep.automorphism_law);
    CHECK(rep.nu(parse_scalar("x", &ring, 2)) == parse_scalar("x - h", &ring, 2));
    CHECK(rep.nu(parse_scalar("y", &ring, 2)) == parse_scalar("y", &ring, 2));
}

TEST_CASE("volume rescaling twists the modular automorphism by an inner one") {
    CoordinateRing ring({"x", "y"}, {"y"});
    Universal2Star prod(certified(&ring, "h*y*Dx^^Dy", 2), 2);

    Expo e;
    e.e[1] = 2;
    TwistComparison tw = modular_twist_by_unit(prod, parse_form("dx^^dy", &ring, 2),
                                               Poly::monomial(&ring, e, 1));
    CHECK(tw.difference == parse_vector("-2*h*Dx", &ring, 2));
    CHECK(tw.diff_derivation.certified);
    REQUIRE(tw.inner.unit.has_value());
    CHECK(render(*tw.inner.unit) == "y^2");
}

TEST_CASE("crossed product by the modular automorphism") {
    CoordinateRing ring({"x", "y"});
    Universal2Star prod(certified(&ring, "h*y*Dx^^Dy", 2), 2);
    QuantDerivation gen = quantized_derivation(prod, parse_vector("-h*Dx", &ring, 2));
    REQUIRE(gen.certified);

    CrossedElement one = crossed_t_power(prod, gen.D, 0, 2);
    CrossedElement t = crossed_t_power(prod, gen.D, 1, 2);
    CrossedElement tinv = crossed_t_power(prod, gen.D, -1, 2);
    CrossedElement xg = crossed_scalar(prod, gen.D, parse_scalar("x", &ring, 2));
    CrossedElement yg = crossed_scalar(prod, gen.D, parse_scalar("y", &ring, 2));

    CHECK(crossed_equal(crossed_multiply(one, xg), xg));
    CHECK(crossed_equal(crossed_multiply(xg, one), xg));
    CHECK(crossed_equal(crossed_multiply(t, tinv), one));
    CHECK(crossed_equal(crossed_multiply(tinv, t), one));

    // t a t^{-1} = phi(a)
    CrossedElement conj = crossed_multiply(crossed_multiply(t, xg), tinv);
    CHECK(crossed_equal(conj, crossed_scalar(prod, gen.D, parse_scalar("x - h", &ring, 2))));
    CrossedElement conj_y = crossed_multiply(crossed_multiply(t, yg), tinv);
    CHECK(crossed_equal(conj_y, yg));

    // semiclassical shadow: {t, x} = -t, {t, y} = 0, {x, y} = y
    std::map<int, Poly> tx = semiclassical_bracket(t, xg);
    REQUIRE(tx.size() == 1);
    CHECK(tx.begin()->first == 1);
    CHECK(tx.begin()->second == Poly::constant(&ring, -1));
    CHECK(semiclassical_bracket(t, yg).empty());
    std::map<int, Poly> xy = semiclassical_bracket(xg, yg);
    REQUIRE(xy.size() == 1);
    CHECK(xy.begin()->first == 0);
    CHECK(xy.begin()->second == Poly::variable(&ring, 1));

    // Euler counting derivation
    CHECK(crossed_equal(euler(t), t));
    CHECK(euler(xg).is_zero());
    std::mt19937_64 rng(108);
    for (int it = 0; it < 5; ++it) {
        CrossedElement a = crossed_scalar(prod, gen.D, testutil::random_scalar(ring, rng, 2, 2, 1),
                                          int(rng() % 3) - 1);
        CrossedElement b = crossed_scalar(prod, gen.D, testutil::random_scalar(ring, rng, 2, 2, 1),
                                          int(rng() % 3) - 1);
        CrossedElement c = crossed_scalar(prod, gen.D, testutil::random_scalar(ring, rng, 2, 2, 1),
                                          int(rng() % 3) - 1);
        CHECK(crossed_equal(crossed_multiply(crossed_multiply(a, b), c),
                            crossed_multiply(a, crossed_multiply(b, c))));
        CHECK(crossed_equal(euler(crossed_multiply(a, b)),
                            crossed_multiply(euler(a), b) + crossed_multiply(a, euler(b))));
    }
}

TEST_CASE("crossed product with a trivial twist stays commutative in t") {
    CoordinateRing ring({"x", "y"});
    MoyalStar prod(certified(&ring, "h*Dx^^Dy", 2), 2);
    QuantDerivation gen = quantized_derivation(prod, PolyVector(2));
    REQUIRE(gen.certified);

    CrossedElement t = crossed_t_power(prod, gen.D, 1, 2);
    CrossedElement xg = crossed_scalar(prod, gen.D, parse_scalar("x", &ring, 2));
    CHECK(semiclassical_bracket(t, xg).empty());
    CHECK(semiclassical_bracket(t, crossed_scalar(prod, gen.D, parse_scalar("y", &ring, 2)))
              .empty());

    Universal2Star other(certified(&ring, "h*y*Dx^^Dy", 2), 2);
    QuantDerivation gen2 = quantized_derivation(other, parse_vector("-h*Dx", &ring, 2));
    CrossedElement foreign = crossed_scalar(other, gen2.D, parse_scalar("x", &ring, 2));
    CHECK_THROWS_AS(crossed_multiply(t, foreign), ring_mismatch_error);
}
