#pragma once

#include <optional>
#include <string>

#include "poismod/cartan.hpp"
#include "poismod/linalg.hpp"

namespace poismod {

struct uncertified_error : ring_error {
    uncertified_error() : ring_error("Poisson structure has not passed the Jacobi check") {}
};
struct malformed_deformation_error : ring_error {
    malformed_deformation_error() : ring_error("bivector series must vanish at h^0") {}
};

// pi = h pi_1 + h^2 pi_2 + ...; certified is set by jacobi_check.
struct PoissonStructure {
    const CoordinateRing* ring = nullptr;
    PolyVector pi;
    bool certified = false;

    int order() const { return pi.order(); }
    const VecLayer& leading() const { return pi.at(1); }
    void require_certified() const {
        if (!certified) throw uncertified_error();
    }
};

inline PoissonStructure make_poisson(const CoordinateRing* ring, PolyVector pi) {
    if (!pi.at(0).is_zero()) throw malformed_deformation_error();
    if (pi.order() < 1) throw ring_error("deformation needs order >= 1");
    for (int i = 1; i <= pi.order(); ++i)
        if (!pi.at(i).is_zero() && pi.at(i).grade() != 2)
            throw ring_error("Poisson candidate must be a bivector");
    return PoissonStructure{ring, std::move(pi), false};
}

struct JacobiCertificate {
    bool ok = false;
    int violation_order = -1;  // first h-power with nonzero [pi,pi]
    VecLayer violation;        // that trivector coefficient
};

inline JacobiCertificate jacobi_check(PoissonStructure& ps) {
    PolyVector bracket = schouten(ps.pi, ps.pi);
    JacobiCertificate cert;
    for (int m = 0; m <= bracket.order(); ++m) {
        if (bracket.at(m).is_zero()) continue;
        cert.violation_order = m;
        cert.violation = bracket.at(m);
        return cert;
    }
    cert.ok = true;
    ps.certified = true;
    return cert;
}

inline PolyVector lichnerowicz(const PoissonStructure& ps, const PolyVector& g) {
    ps.require_certified();
    return schouten(ps.pi, g);
}

inline DiffForm koszul_differential(const PoissonStructure& ps, const DiffForm& a) {
    ps.require_certified();
    return lie_derivative(ps.pi, a);
}

inline PolyVector hamiltonian_field(const PoissonStructure& ps, const Scalar& f) {
    ps.require_certified();
    return schouten(ps.pi, f);
}

// f^{-1} [pi, f] for a unit series f.
inline PolyVector log_hamiltonian_field(const PoissonStructure& ps, const Scalar& f) {
    if (!scalar_is_unit(f)) throw not_a_unit_error("log-Hamiltonian base");
    return unit_inverse(f) * hamiltonian_field(ps, f);
}

inline Mask full_mask(const CoordinateRing& r) { return (Mask(1) << r.dim()) - 1; }

inline bool is_volume(const CoordinateRing& r, const FormLayer& w0) {
    if (w0.grade() != r.dim()) return false;
    if (w0.components().size() != 1) return false;
    return w0.component(full_mask(r)).is_unit();
}

struct ModularReport {
    PolyVector field;          // v with i_v omega = L_pi omega
    bool poisson_check = true;  // [pi, v] = 0, always rechecked
};

// Unique v with i_v omega = L_pi omega, solved order by order; omega may
// carry h-corrections but its h^0 layer must be a unit volume.
inline ModularReport modular_field(const PoissonStructure& ps, const DiffForm& omega) {
    ps.require_certified();
    const CoordinateRing& ring = *ps.ring;
    if (!is_volume(ring, omega.at(0)))
        throw not_a_unit_error("volume coefficient (top degree, unit leading term)");
    int N = std::min(ps.order(), omega.order());
    Mask full = full_mask(ring);
    Poly ginv = omega.at(0).component(full).unit_inverse();

    DiffForm eta = lie_derivative(ps.pi, omega);
    PolyVector v(N);
    for (int m = 1; m <= N; ++m) {
        FormLayer rhs = eta.at(m);
        for (int b = 1; b < m; ++b) rhs = rhs - contract(v.at(m - b), omega.at(b));
        VecLayer vm(1);
        for (int j = 0; j < ring.dim(); ++j) {
            Poly comp = rhs.component(full & ~(Mask(1) << j));
            if (comp.is_zero()) continue;
            int sign = (j % 2) ? -1 : 1;
            vm.add(Mask(1) << j, (comp * ginv).scaled(sign));
        }
        v.at(m) = vm;
    }
    ModularReport rep;
    rep.field = v;
    rep.poisson_check = schouten(ps.pi, v).is_zero();
    return rep;
}

namespace detail {

inline VecLayer bracket_layers(const VecLayer& a, const VecLayer& b) {
    SchoutenMemo memo;
    return schouten(a, b, memo);
}

inline FormLayer lie_layer(const VecLayer& g, const FormLayer& a) {
    FormLayer left = de_rham(contract(g, a));
    FormLayer right = contract(g, de_rham(a));
    return (g.grade() % 2 == 0) ? left - right : left + right;
}

inline int leading_weight(const PoissonStructure& ps) {
    int w = 0;
    if (ps.leading().is_zero())
        throw unsupported_structure_error("leading bivector pi_1 is zero");
    if (!ps.leading().is_weight_homogeneous(&w))
        throw unsupported_structure_error("pi_1 is not weight-homogeneous");
    return w;
}

inline bool ring_has_laurent(const CoordinateRing& r) {
    for (bool b : r.invertible)
        if (b) return true;
    return false;
}

}  // namespace detail

struct Obstruction {
    int order = -1;   // h-power where the solve failed
    int weight = 0;   // weight slice of the residual
    std::string reason;
    bool exhaustive = false;  // true: certified nonexistence, not just "not found"
};

struct HamiltonianSolve {
    std::optional<Scalar> f;
    Obstruction obstruction;
};

// Solves [pi, f] = w order by order; each h-order is an exact linear solve
// on weight slices, with the slice map fixed by the weight of pi_1.
inline HamiltonianSolve solve_hamiltonian(const PoissonStructure& ps, const PolyVector& w,
                                          int weight_bound, int box) {
    ps.require_certified();
    const CoordinateRing& ring = *ps.ring;
    int s0 = detail::leading_weight(ps);
    bool exhaustive = !detail::ring_has_laurent(ring);
    int N = std::min(ps.order(), w.order());
    if (!w.at(0).is_zero())
        return {std::nullopt, {0, 0, "target has an h^0 term", true}};

    Scalar f(N);
    for (int m = 1; m <= N; ++m) {
        VecLayer rhs = w.at(m);
        for (int a = 2; a <= m; ++a)
            rhs = rhs - detail::bracket_layers(ps.pi.at(a), VecLayer::from_poly(f.at(m - a)));
        Poly sol;
        for (const auto& [u, slice] : rhs.weight_slices()) {
            int src = u - s0;
            if (std::abs(src) > weight_bound)
                return {std::nullopt,
                        {m, u, "source slice weight exceeds the weight bound", false}};
            auto basis = slice_basis<VecTag>(ring, 0, src, box);
            std::vector<VecLayer> images;
            images.reserve(basis.elems.size());
            for (size_t j = 0; j < basis.elems.size(); ++j)
                images.push_back(
                    detail::bracket_layers(ps.leading(), basis.element(&ring, j)));
            auto coeff = solve_layer_system(images, slice);
            if (!coeff)
                return {std::nullopt,
                        {m, u, "no Hamiltonian preimage in this weight slice", exhaustive}};
            sol = sol + basis.combination(&ring, *coeff).component(0u);
        }
        f.at(m - 1) = sol;
    }
    return {f, {}};
}

struct DecomposeResult {
    std::optional<Scalar> f;  // unit with f^{-1}[pi,f] = v
    Obstruction obstruction;
};

// Searches a monomial unit f0 = x^alpha matching the leading order, then
// reduces the h-tail to a Hamiltonian solve for g and returns f0 * exp(g).
inline DecomposeResult log_hamiltonian_decompose(const PoissonStructure& ps, const PolyVector& v,
                                                 int box, int weight_bound) {
    ps.require_certified();
    const CoordinateRing& ring = *ps.ring;
    int N = std::min(ps.order(), v.order());
    if (!v.at(0).is_zero())
        return {std::nullopt, {0, 0, "field has an h^0 term", true}};
    bool exhaustive = !detail::ring_has_laurent(ring);

    std::vector<int> inv_vars;
    for (int i = 0; i < ring.dim(); ++i)
        if (ring.invertible[i]) inv_vars.push_back(i);

    std::optional<Poly> f0;
    Expo alpha;
    std::function<bool(size_t)> try_alpha = [&](size_t i) -> bool {
        if (i == inv_vars.size()) {
            Poly cand = Poly::monomial(&ring, alpha, 1);
            VecLayer lead =
                detail::bracket_layers(ps.leading(), VecLayer::from_poly(cand))
                    .times(cand.unit_inverse());
            if (lead == v.at(1)) {
                f0 = cand;
                return true;
            }
            return false;
        }
        for (int e = -box; e <= box; ++e) {
            alpha.e[inv_vars[i]] = e;
            if (try_alpha(i + 1)) return true;
        }
        alpha.e[inv_vars[i]] = 0;
        return false;
    };
    if (!try_alpha(0))
        return {std::nullopt,
                {1, 0, "leading term is not the log-derivative of a monomial unit within the exponent box",
                 exhaustive}};

    Scalar f0s(N, *f0);
    PolyVector residual = v - log_hamiltonian_field(ps, f0s);
    HamiltonianSolve tail = solve_hamiltonian(ps, residual, weight_bound, box);
    if (!tail.f) {
        tail.obstruction.reason = "h-tail: " + tail.obstruction.reason;
        return {std::nullopt, tail.obstruction};
    }
    Scalar f = f0s * exp_series(*tail.f - Scalar(tail.f->order(), tail.f->at(0)));
    if (!equal_mod(log_hamiltonian_field(ps, f), v, N))
        return {std::nullopt, {N, 0, "tail solve left a residual", false}};
    return {f, {}};
}

struct WitnessResult {
    std::optional<DiffForm> omega;  // h-corrected volume with L_pi omega = 0
    Obstruction obstruction;
    FormLayer residual;
};

// Order-by-order solve of L_pi(omega0 + h omega1 + ...) = 0 with omega0
// fixed; order 1 is a pure residual check, higher orders are slice solves.
inline WitnessResult unimodularity_witness(const PoissonStructure& ps, const FormLayer& omega0,
                                           int N, int weight_bound, int box) {
    ps.require_certified();
    const CoordinateRing& ring = *ps.ring;
    if (!is_volume(ring, omega0)) throw not_a_unit_error("volume coefficient");
    int s0 = detail::leading_weight(ps);
    bool exhaustive = !detail::ring_has_laurent(ring);
    N = std::min(N, ps.order());
    int d = ring.dim();

    DiffForm omega(N);
    omega.at(0) = omega0;
    for (int m = 1; m <= N; ++m) {
        // order-m part of L_pi omega, with the unknown omega_{m-1} moved left
        FormLayer rhs(d - 1);
        for (int a = 2; a <= m; ++a)
            rhs = rhs - detail::lie_layer(ps.pi.at(a), omega.at(m - a));
        if (m == 1) {
            FormLayer res = detail::lie_layer(ps.leading(), omega0);
            if (!res.is_zero())
                return {std::nullopt,
                        {1, 0, "L_pi does not vanish on the given volume at order 1", true},
                        res};
            continue;
        }
        FormLayer sol(d);
        for (const auto& [u, slice] : rhs.weight_slices()) {
            int src = u - s0;
            if (std::abs(src) > weight_bound)
                return {std::nullopt, {m, u, "source slice weight exceeds the weight bound", false},
                        slice};
            auto basis = slice_basis<FormTag>(ring, d, src, box);
            std::vector<FormLayer> images;
            images.reserve(basis.elems.size());
            for (size_t j = 0; j < basis.elems.size(); ++j)
                images.push_back(detail::lie_layer(ps.leading(), basis.element(&ring, j)));
            auto coeff = solve_layer_system(images, slice);
            if (!coeff)
                return {std::nullopt,
                        {m, u, "no order-" + std::to_string(m) + " correction in this slice",
                         exhaustive},
                        slice};
            sol = sol + basis.combination(&ring, *coeff);
        }
        omega.at(m - 1) = sol;  // the order-m equation determines omega_{m-1}
    }
    if (!lie_derivative(ps.pi, omega).is_zero())
        return {std::nullopt, {N, 0, "residual after final order", false}, FormLayer(d - 1)};
    return {omega, {}, FormLayer(d - 1)};
}

namespace detail {

// Coordinate chart for one weight slice, extended on demand so that images
// falling outside the seeded basis still get coordinates.
template <typename Tag>
struct SliceCoords {
    std::vector<std::pair<Mask, Expo>> elems;
    std::map<std::pair<Mask, Expo>, size_t> index;

    explicit SliceCoords(const SliceBasis<Tag>& seed) {
        for (const auto& el : seed.elems) {
            index.emplace(el, elems.size());
            elems.push_back(el);
        }
    }
    size_t coord(Mask m, const Expo& e) {
        auto key = std::make_pair(m, e);
        auto it = index.find(key);
        if (it != index.end()) return it->second;
        index.emplace(key, elems.size());
        elems.push_back(key);
        return elems.size() - 1;
    }
    std::vector<Rational> coords_of(const GradedLayer<Tag>& layer) {
        std::vector<Rational> out(elems.size(), 0);
        for (const auto& [mask, poly] : layer.components())
            for (const auto& [expo, coeff] : poly.terms()) {
                size_t j = coord(mask, expo);
                if (j >= out.size()) out.resize(j + 1, 0);
                out[j] = coeff;
            }
        out.resize(elems.size(), 0);
        return out;
    }
};

// Reduced row space with incremental insertion; insert returns the reduced
// vector (zero when it was already in the span).
struct RowSpace {
    std::vector<std::vector<Rational>> rows;  // each normalized, pivot leading 1
    std::vector<size_t> pivots;

    std::vector<Rational> reduce(std::vector<Rational> v) const {
        for (size_t r = 0; r < rows.size(); ++r) {
            size_t p = pivots[r];
            if (p < v.size() && !v[p].is_zero()) {
                Rational c = v[p];
                for (size_t j = 0; j < rows[r].size() && j < v.size(); ++j)
                    v[j] -= c * rows[r][j];
            }
        }
        return v;
    }
    bool insert(std::vector<Rational> v) {
        v = reduce(std::move(v));
        size_t p = v.size();
        for (size_t j = 0; j < v.size(); ++j)
            if (!v[j].is_zero()) { p = j; break; }
        if (p == v.size()) return false;
        Rational inv = Rational(1) / v[p];
        for (auto& x : v) x *= inv;
        rows.push_back(std::move(v));
        pivots.push_back(p);
        return true;
    }
};

}  // namespace detail

struct HPEntry {
    int weight = 0;
    int dim = 0;
};

template <typename Tag>
struct HPSlice : HPEntry {
    std::vector<GradedLayer<Tag>> representatives;
};

template <typename Tag>
struct HPReport {
    int degree = 0;
    int weight_lo = 0, weight_hi = 0;
    bool exhaustive = true;  // false when Laurent slices are box-truncated
    std::vector<HPSlice<Tag>> slices;
};

namespace detail {

// ker(map on degree-k slice at weight w) / im(map from degree k_src at
// weight w - s0), all at leading h-order.
template <typename Tag, typename Map>
HPSlice<Tag> hp_slice(const CoordinateRing& ring, const Map& map, int k, int k_src, int w, int s0,
                      int box) {
    HPSlice<Tag> out;
    out.weight = w;
    auto basis = slice_basis<Tag>(ring, k, w, box);
    std::vector<GradedLayer<Tag>> images;
    images.reserve(basis.elems.size());
    for (size_t j = 0; j < basis.elems.size(); ++j) images.push_back(map(basis.element(&ring, j)));

    // kernel in source coordinates; the map sends degree k to 2k - k_src
    SliceCoords<Tag> target_coords(slice_basis<Tag>(ring, 2 * k - k_src, w + s0, box));
    for (const auto& img : images) target_coords.coords_of(img);  // warm the chart
    // at least one row, so the kernel keeps its column count when the map is 0
    Matrix A(std::max<size_t>(target_coords.elems.size(), 1),
             std::vector<Rational>(basis.elems.size(), 0));
    for (size_t j = 0; j < images.size(); ++j) {
        auto col = target_coords.coords_of(images[j]);
        for (size_t i = 0; i < col.size(); ++i)
            if (!col[i].is_zero()) A[i][j] = col[i];
    }
    auto kernel = kernel_basis(A);

    // image rowspace from the lower slice, in the same source coordinates
    SliceCoords<Tag> source_coords(basis);
    RowSpace rowspace;
    auto src_basis = slice_basis<Tag>(ring, k_src, w - s0, box);
    for (size_t j = 0; j < src_basis.elems.size(); ++j) {
        auto img = map(src_basis.element(&ring, j));
        rowspace.insert(source_coords.coords_of(img));
    }

    for (auto& kv : kernel) {
        kv.resize(source_coords.elems.size(), 0);
        auto residue = rowspace.reduce(kv);
        bool zero = true;
        for (const auto& x : residue)
            if (!x.is_zero()) { zero = false; break; }
        if (zero) continue;
        // normalize: leading coefficient 1, then remember it in the rowspace
        size_t p = 0;
        while (residue[p].is_zero()) ++p;
        Rational inv = Rational(1) / residue[p];
        GradedLayer<Tag> rep(k);
        for (size_t j = 0; j < residue.size(); ++j) {
            if (residue[j].is_zero()) continue;
            auto [mask, expo] = source_coords.elems[j];
            rep.add(mask, Poly::monomial(&ring, expo, residue[j] * inv));
        }
        out.representatives.push_back(rep);
        rowspace.insert(residue);
        ++out.dim;
    }
    return out;
}

}  // namespace detail

// Leading-order Poisson cohomology in degrees 0 and 1, per weight slice.
inline HPReport<VecTag> hp_cohomology(const PoissonStructure& ps, int k, int weight_lo,
                                      int weight_hi, int box) {
    ps.require_certified();
    if (k != 0 && k != 1) throw unsupported_structure_error("hp_cohomology supports k in {0,1}");
    const CoordinateRing& ring = *ps.ring;
    int s0 = detail::leading_weight(ps);
    HPReport<VecTag> rep;
    rep.degree = k;
    rep.weight_lo = weight_lo;
    rep.weight_hi = weight_hi;
    rep.exhaustive = !detail::ring_has_laurent(ring);
    auto diff = [&](const VecLayer& g) { return detail::bracket_layers(ps.leading(), g); };
    for (int w = weight_lo; w <= weight_hi; ++w)
        rep.slices.push_back(detail::hp_slice<VecTag>(ring, diff, k, k - 1, w, s0, box));
    return rep;
}

// Leading-order Poisson homology of (forms, L_pi1) in one form degree.
inline HPReport<FormTag> hp_homology(const PoissonStructure& ps, int k, int weight_lo,
                                     int weight_hi, int box) {
    ps.require_certified();
    const CoordinateRing& ring = *ps.ring;
    if (k < 0 || k > ring.dim()) throw unsupported_structure_error("form degree out of range");
    int s0 = detail::leading_weight(ps);
    HPReport<FormTag> rep;
    rep.degree = k;
    rep.weight_lo = weight_lo;
    rep.weight_hi = weight_hi;
    rep.exhaustive = !detail::ring_has_laurent(ring);
    auto diff = [&](const FormLayer& a) { return detail::lie_layer(ps.leading(), a); };
    for (int w = weight_lo; w <= weight_hi; ++w)
        rep.slices.push_back(detail::hp_slice<FormTag>(ring, diff, k, k + 1, w, s0, box));
    return rep;
}

// Class test used for the modular class: nonzero iff v is a leading-order
// cocycle that is not a Hamiltonian field.
inline bool hp1_class_nonzero(const PoissonStructure& ps, const PolyVector& v, int weight_bound,
                              int box) {
    ps.require_certified();
    if (v.is_zero()) return false;
    if (!schouten(ps.pi, v).is_zero())
        throw unsupported_structure_error("class test needs a Poisson vector field");
    return !solve_hamiltonian(ps, v, weight_bound, box).f.has_value();
}

}  // namespace poismod
