#pragma once

#include <string>
#include <vector>

#include "poismod/crossed.hpp"
#include "poismod/lift.hpp"
#include "poismod/parser.hpp"
#include "poismod/render.hpp"

namespace poismod {

struct ExampleOutcome {
    std::string name;
    bool passed = false;
    std::string detail;
};

namespace detail {

inline void note(std::string& out, const std::string& line) {
    if (!out.empty()) out += "; ";
    out += line;
}

}  // namespace detail

// Constant symplectic structure on the plane: trivial modular class, flat
// volume is already invariant, star commutator is exactly h.
inline ExampleOutcome example_symplectic_plane() {
    ExampleOutcome out{"symplectic-plane", true, ""};
    CoordinateRing ring({"x", "y"});
    auto ps = make_poisson(&ring, parse_vector("h*Dx^^Dy", &ring, 2));
    if (!jacobi_check(ps).ok) return {out.name, false, "jacobi check failed"};

    auto omega = parse_form("dx^^dy", &ring, 2);
    auto mod = modular_field(ps, omega);
    bool v_zero = mod.field.is_zero() && mod.poisson_check;
    detail::note(out.detail, "modular field = " + render(mod.field));

    auto wit = unimodularity_witness(ps, omega.at(0), 2, 8, 3);
    bool wit_ok = wit.omega.has_value();
    detail::note(out.detail, wit_ok ? "invariant volume found" : "no invariant volume");

    auto hp0 = hp_cohomology(ps, 0, 0, 3, 3);
    bool casimirs_const = true;
    for (const auto& s : hp0.slices)
        if (s.dim != (s.weight == 0 ? 1 : 0)) casimirs_const = false;
    detail::note(out.detail, "Casimirs = constants");

    MoyalStar star(ps, 2);
    Scalar x = parse_scalar("x", &ring, 2), y = parse_scalar("y", &ring, 2);
    bool comm_ok = star.commutator(x, y) == parse_scalar("h", &ring, 2);
    detail::note(out.detail, "[x, y]_star = h");

    out.passed = v_zero && wit_ok && casimirs_const && comm_ok;
    return out;
}

// Linear structure pi = h y Dx^^Dy on Q[x,y]: nonzero modular class. The
// modular field is Poisson but not Hamiltonian, and no h-corrected volume
// exists; both failures carry exhaustive certificates.
inline ExampleOutcome example_axb_polynomial() {
    ExampleOutcome out{"axb-polynomial", true, ""};
    CoordinateRing ring({"x", "y"});
    auto ps = make_poisson(&ring, parse_vector("h*y*Dx^^Dy", &ring, 3));
    if (!jacobi_check(ps).ok) return {out.name, false, "jacobi check failed"};

    auto omega = parse_form("dx^^dy", &ring, 3);
    auto mod = modular_field(ps, omega);
    bool v_ok = render(mod.field) == "-h*Dx" && mod.poisson_check;
    detail::note(out.detail, "modular field = " + render(mod.field));

    auto ham = solve_hamiltonian(ps, mod.field, 6, 3);
    bool not_ham = !ham.f && ham.obstruction.exhaustive;
    detail::note(out.detail, "not Hamiltonian (weight slices to 6, exhaustive)");

    auto dec = log_hamiltonian_decompose(ps, mod.field, 3, 6);
    bool not_logham = !dec.f && dec.obstruction.exhaustive;
    detail::note(out.detail, "not log-Hamiltonian on the polynomial ring");

    auto wit = unimodularity_witness(ps, omega.at(0), 3, 8, 3);
    bool no_wit = !wit.omega && wit.obstruction.order == 1;
    detail::note(out.detail, "no invariant volume, obstructed at order 1");

    auto hp0 = hp_cohomology(ps, 0, 0, 6, 3);
    bool casimirs_const = true;
    for (const auto& s : hp0.slices)
        if (s.dim != (s.weight == 0 ? 1 : 0)) casimirs_const = false;
    bool class_nonzero = hp1_class_nonzero(ps, mod.field, 6, 3);
    detail::note(out.detail, "HP0 = constants, HP1 class of the modular field nonzero");

    out.passed = v_ok && not_ham && not_logham && no_wit && casimirs_const && class_nonzero;
    return out;
}

// Same linear structure with y inverted: the modular class dies. The
// decomposition f = y^-1 and the corrected volume y^-1 dx^^dy appear, and
// the two certificates agree.
inline ExampleOutcome example_axb_laurent() {
    ExampleOutcome out{"axb-laurent", true, ""};
    CoordinateRing ring({"x", "y"}, {"y"});
    auto ps = make_poisson(&ring, parse_vector("h*y*Dx^^Dy", &ring, 3));
    if (!jacobi_check(ps).ok) return {out.name, false, "jacobi check failed"};

    auto omega = parse_form("dx^^dy", &ring, 3);
    auto mod = modular_field(ps, omega);

    auto dec = log_hamiltonian_decompose(ps, mod.field, 3, 6);
    bool dec_ok = dec.f && render(*dec.f) == "y^-1";
    detail::note(out.detail, "modular field = log-Hamiltonian field of y^-1");
    if (dec_ok) {
        auto back = log_hamiltonian_field(ps, *dec.f);
        dec_ok = back == mod.field;
    }

    auto wit = unimodularity_witness(ps, parse_form("y^-1*dx^^dy", &ring, 3).at(0), 3, 8, 3);
    bool wit_ok = wit.omega && koszul_differential(ps, *wit.omega).is_zero();
    detail::note(out.detail, "invariant volume y^-1*dx^^dy");

    bool agree = dec.f.has_value() == wit.omega.has_value();
    detail::note(out.detail, "decomposition and witness agree");

    out.passed = dec_ok && wit_ok && agree;
    return out;
}

// Crossed product of the ax+b quantization by the modular automorphism,
// plus the dimension-3 extension pi + h t Dx^^Dt with its invariant volume.
inline ExampleOutcome example_crossed_modular() {
    ExampleOutcome out{"crossed-modular", true, ""};
    CoordinateRing ring({"x", "y"});
    auto ps = make_poisson(&ring, parse_vector("h*y*Dx^^Dy", &ring, 2));
    if (!jacobi_check(ps).ok) return {out.name, false, "jacobi check failed"};
    Universal2Star star(ps, 2);

    auto omega = parse_form("dx^^dy", &ring, 2);
    auto rep = modular_automorphism_candidate(star, omega);
    bool auto_ok = rep.derivation.certified && rep.automorphism_law;
    detail::note(out.detail, "exp(D_v) certified, automorphism law holds");

    Scalar x = parse_scalar("x", &ring, 2), y = parse_scalar("y", &ring, 2);
    bool exp_ok = rep.nu(x) == parse_scalar("x - h", &ring, 2) && rep.nu(y) == y;
    detail::note(out.detail, "exp(D_v): x -> x - h, y -> y");

    StarAutomorphism phi = rep.nu;
    const StarDerivation& gen = rep.derivation.D;
    auto a = crossed_scalar(star, gen, parse_scalar("x + y", &ring, 2), 0);
    auto t = crossed_t_power(star, gen, 1, 2);
    auto tinv = crossed_t_power(star, gen, -1, 2);
    bool conj_ok = crossed_equal(
        crossed_multiply(crossed_multiply(t, a), tinv),
        crossed_scalar(star, gen, phi(parse_scalar("x + y", &ring, 2)), 0));
    detail::note(out.detail, "t a t^-1 = phi(a)");

    auto e1 = crossed_multiply(a, t);
    auto e2 = crossed_multiply(t, a);
    bool euler_ok = crossed_equal(euler(crossed_multiply(e1, e2)),
                                  crossed_multiply(euler(e1), e2) +
                                      crossed_multiply(e1, euler(e2)));
    detail::note(out.detail, "Euler field is a derivation");

    // semiclassical brackets on generator pairs: {t,x} = -t, {t,y} = 0,
    // {x,y} = y, matching pi + t Dt ^^ v at order h
    auto xg = crossed_scalar(star, gen, x, 0);
    auto yg = crossed_scalar(star, gen, y, 0);
    auto br_tx = semiclassical_bracket(t, xg);
    auto br_ty = semiclassical_bracket(t, yg);
    auto br_xy = semiclassical_bracket(xg, yg);
    Poly minus_one = Poly::constant(&ring, -1);
    bool sc_ok = br_tx.size() == 1 && br_tx.count(1) && br_tx.at(1) == minus_one &&
                 br_ty.empty() && br_xy.size() == 1 && br_xy.count(0) &&
                 br_xy.at(0) == Poly::variable(&ring, 1);
    detail::note(out.detail, "semiclassical brackets: {t,x} = -t, {t,y} = 0, {x,y} = y");

    // extension: pi_t on Q[x,y,t,t^-1] with volume t^-2 dt^^dx^^dy
    CoordinateRing ext({"x", "y", "t"}, {"t"});
    auto pst = make_poisson(&ext, parse_vector("h*y*Dx^^Dy + h*t*Dx^^Dt", &ext, 2));
    bool ext_ok = jacobi_check(pst).ok;
    auto vol = parse_form("t^-2*dt^^dx^^dy", &ext, 2);
    ext_ok = ext_ok && koszul_differential(pst, vol).is_zero();
    detail::note(out.detail, "extended structure preserves t^-2*dt^^dx^^dy");

    out.passed = auto_ok && exp_ok && conj_ok && euler_ok && sc_ok && ext_ok;
    return out;
}

inline std::vector<ExampleOutcome> run_example_bank() {
    return {example_symplectic_plane(), example_axb_polynomial(), example_axb_laurent(),
            example_crossed_modular()};
}

}  // namespace poismod
