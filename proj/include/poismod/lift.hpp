#pragma once

#include <set>

#include "poismod/derivation.hpp"

namespace poismod {

struct ConjugationResult {
    std::optional<Scalar> unit;  // F with psi(a) * F = F * a on generators
    Obstruction obstruction;
};

// Order-by-order solve of psi(a) * F = F * a for all ring generators a,
// starting from a prescribed classical unit F_0. The unknown order-m
// coefficient u enters the order m+1 residual through
// psi_1(a) u + pi_1(da, du), so each step is one joint linear solve.
inline ConjugationResult solve_conjugation(const StarProduct& prod,
                                           const std::function<Scalar(const Scalar&)>& psi,
                                           const Poly& f0, int N, int weight_bound, int box) {
    const PoissonStructure& ps = prod.structure();
    const CoordinateRing& ring = *ps.ring;
    if (!f0.is_unit()) throw not_a_unit_error("conjugation base");
    int d = ring.dim();
    int s0 = detail::leading_weight(ps);

    std::vector<Scalar> psi_gen(d, Scalar(N));
    std::vector<Poly> psi1(d);
    for (int i = 0; i < d; ++i) {
        psi_gen[i] = psi(scalar_poly(Poly::variable(&ring, i), N));
        if (!(psi_gen[i].at(0) == Poly::variable(&ring, i)))
            throw precondition_error("map does not reduce to the identity at h^0");
        psi1[i] = psi_gen[i].at(1);
    }

    Scalar F(N, f0);
    auto residual = [&](int i) {
        return prod.star(psi_gen[i], F) - prod.star(F, scalar_poly(Poly::variable(&ring, i), N));
    };
    for (int i = 0; i < d; ++i) {
        Scalar r = residual(i);
        if (!r.is_zero() && r.valuation() <= 1)
            return {std::nullopt, {1, 0, "order-1 consistency fails for this base unit", false}};
    }

    for (int m = 1; m < N; ++m) {
        std::vector<Poly> rhs(d);
        bool all_zero = true;
        for (int i = 0; i < d; ++i) {
            Scalar r = residual(i);
            if (!r.is_zero() && r.valuation() <= m)
                return {std::nullopt, {m, 0, "unexpected residual below the current order", false}};
            rhs[i] = -r.at(m + 1);
            if (!rhs[i].is_zero()) all_zero = false;
        }
        if (all_zero) continue;

        // candidate monomials for u, keyed off the residual weights
        std::set<int> weights;
        for (int i = 0; i < d; ++i)
            for (const auto& [w, slice] : rhs[i].weight_slices()) weights.insert(w - s0 - 1);
        std::vector<Expo> candidates;
        for (int w : weights) {
            if (std::abs(w) > weight_bound)
                return {std::nullopt,
                        {m + 1, w, "candidate weight exceeds the weight bound", false}};
            for (const Expo& e : monomials_of_weight(ring, w, box)) candidates.push_back(e);
        }

        // rows keyed by (generator, monomial) over images and targets
        std::map<std::pair<int, Expo>, size_t> row_of;
        auto row = [&](int i, const Expo& e) {
            auto key = std::make_pair(i, e);
            auto it = row_of.find(key);
            if (it != row_of.end()) return it->second;
            row_of.emplace(key, row_of.size());
            return row_of.size() - 1;
        };
        std::vector<std::map<size_t, Rational>> cols(candidates.size());
        for (size_t j = 0; j < candidates.size(); ++j) {
            Poly u = Poly::monomial(&ring, candidates[j], 1);
            for (int i = 0; i < d; ++i) {
                Poly img = psi1[i] * u + leading_pairing(ps, Poly::variable(&ring, i), u);
                for (const auto& [e, c] : img.terms()) cols[j][row(i, e)] = c;
            }
        }
        std::map<size_t, Rational> tgt;
        for (int i = 0; i < d; ++i)
            for (const auto& [e, c] : rhs[i].terms()) tgt[row(i, e)] = c;

        size_t nr = row_of.size(), nc = candidates.size();
        Matrix A(nr, std::vector<Rational>(nc, 0));
        std::vector<Rational> b(nr, 0);
        for (size_t j = 0; j < nc; ++j)
            for (const auto& [r, c] : cols[j]) A[r][j] = c;
        for (const auto& [r, c] : tgt) b[r] = c;
        auto sol = solve(A, b);
        if (!sol)
            return {std::nullopt,
                    {m + 1, 0, "no correction matches the residual in the weight window",
                     false}};
        Poly u;
        for (size_t j = 0; j < nc; ++j)
            if (!(*sol)[j].is_zero()) u = u + Poly::monomial(&ring, candidates[j], (*sol)[j]);
        F.at(m) = u;
    }

    for (int i = 0; i < d; ++i)
        if (!residual(i).is_zero())
            return {std::nullopt, {N, 0, "final verification failed", false}};
    return {F, {}};
}

// Enumerates monomial base units within the exponent box until the order-1
// consistency check passes, then runs the full solve.
inline ConjugationResult conjugation_with_unit_search(
    const StarProduct& prod, const std::function<Scalar(const Scalar&)>& psi, int N,
    int weight_bound, int box) {
    const CoordinateRing& ring = *prod.structure().ring;
    std::vector<int> inv_vars;
    for (int i = 0; i < ring.dim(); ++i)
        if (ring.invertible[i]) inv_vars.push_back(i);

    ConjugationResult last{std::nullopt,
                           {1, 0, "no base unit in the exponent box passes order 1", false}};
    Expo alpha;
    std::function<bool(size_t)> rec = [&](size_t i) -> bool {
        if (i == inv_vars.size()) {
            Poly cand = Poly::monomial(&ring, alpha, 1);
            ConjugationResult r = solve_conjugation(prod, psi, cand, N, weight_bound, box);
            if (r.unit) {
                last = r;
                return true;
            }
            if (r.obstruction.order > 1) last = r;  // got past the consistency check
            return false;
        }
        for (int e = -box; e <= box; ++e) {
            alpha.e[inv_vars[i]] = e;
            if (rec(i + 1)) return true;
        }
        alpha.e[inv_vars[i]] = 0;
        return false;
    };
    rec(0);
    return last;
}

struct LiftResult {
    std::optional<Scalar> lifted;  // f-tilde with exp(D_w)(a) = f * a * f^{-1}
    PolyVector field;              // w = -f^{-1} [pi, f]
    QuantDerivation derivation;
    Obstruction obstruction;
};

inline LiftResult lift_log_hamiltonian(const StarProduct& prod, const Poly& f, int N,
                                       int weight_bound = 8, int box = 3) {
    const PoissonStructure& ps = prod.structure();
    if (!f.is_unit()) throw not_a_unit_error("lift base");
    LiftResult out;
    out.field = -log_hamiltonian_field(ps, scalar_poly(f, std::min(N, ps.order())));
    out.derivation = quantized_derivation(prod, out.field);
    if (!out.derivation.certified) {
        out.obstruction = out.derivation.obstruction;
        return out;
    }
    StarAutomorphism phi = exp_derivation(out.derivation.D);
    auto conj = solve_conjugation(prod, phi.apply, f, N, weight_bound, box);
    out.lifted = conj.unit;
    out.obstruction = conj.obstruction;
    return out;
}

struct AutomorphismReport {
    ModularReport modular;       // classical field v and its bracket check
    QuantDerivation derivation;  // certified quantization D_v (when certified)
    StarAutomorphism nu;         // exp(D_v); valid only when derivation.certified
    bool automorphism_law = false;  // nu(a*b) = nu(a)*nu(b) over the probe bank
};

// Candidate modular automorphism exp(D_v) for the volume omega. The caller
// must check derivation.certified before using nu.
inline AutomorphismReport modular_automorphism_candidate(const StarProduct& prod,
                                                         const DiffForm& omega,
                                                         int weight_bound = 8, int box = 3) {
    AutomorphismReport rep;
    rep.modular = modular_field(prod.structure(), omega);
    rep.derivation = quantized_derivation(prod, rep.modular.field, weight_bound, box);
    if (!rep.derivation.certified) return rep;
    rep.nu = exp_derivation(rep.derivation.D);

    const CoordinateRing& ring = *prod.structure().ring;
    const int N = prod.max_order();
    auto bank = detail::probe_bank(ring);
    rep.automorphism_law = true;
    for (size_t i = 0; i < bank.size() && rep.automorphism_law; ++i)
        for (size_t j = i; j < bank.size(); ++j) {
            Scalar a = scalar_poly(bank[i], N), b = scalar_poly(bank[j], N);
            if (!(rep.nu(prod.star(a, b)) == prod.star(rep.nu(a), rep.nu(b)))) {
                rep.automorphism_law = false;
                break;
            }
        }
    return rep;
}

struct TwistComparison {
    PolyVector difference;            // modular field of f*omega minus that of omega
    QuantDerivation diff_derivation;  // quantization of the difference field
    ConjugationResult inner;          // unit conjugation matching the twist
};

// Rescaling the volume by a unit f shifts the modular field by a
// log-Hamiltonian term, so the two candidate automorphisms differ by an
// inner one. Produces the conjugating unit as the witness.
inline TwistComparison modular_twist_by_unit(const StarProduct& prod, const DiffForm& omega,
                                             const Poly& f, int weight_bound = 8, int box = 3) {
    const PoissonStructure& ps = prod.structure();
    if (!f.is_unit()) throw not_a_unit_error("volume rescaling factor");
    const int N = prod.max_order();

    ModularReport base = modular_field(ps, omega);
    DiffForm scaled_omega = scalar_poly(f, omega.order()) * omega;
    ModularReport twisted = modular_field(ps, scaled_omega);

    TwistComparison out;
    out.difference = twisted.field - base.field;
    QuantDerivation d_base = quantized_derivation(prod, base.field, weight_bound, box);
    out.diff_derivation = quantized_derivation(prod, out.difference, weight_bound, box);
    if (!d_base.certified || !out.diff_derivation.certified) {
        out.inner.obstruction = {0, 0, "component derivation not certified", false};
        return out;
    }

    StarDerivation d_sum = derivation_sum(d_base.D, out.diff_derivation.D);
    StarAutomorphism forward = exp_derivation(d_sum);
    StarAutomorphism back = exp_derivation(d_base.D, -1);
    auto psi = [forward, back](const Scalar& a) { return forward(back(a)); };
    out.inner = conjugation_with_unit_search(prod, psi, N, weight_bound, box);
    return out;
}

}  // namespace poismod
