#pragma once

#include <sstream>
#include <string>

#include "poismod/multivector.hpp"

namespace poismod {

// Renderers produce strings the expression parser accepts back, with
// deterministic term order (map order of exponents and masks).

inline std::string render(const Rational& q) {
    std::ostringstream os;
    os << q;
    return os.str();
}

namespace detail {

// One monomial as a '*'-joined product; empty string for the constant 1.
inline std::string render_expo(const CoordinateRing& ring, const Expo& e) {
    std::string out;
    for (int i = 0; i < ring.dim(); ++i) {
        if (e.e[i] == 0) continue;
        if (!out.empty()) out += "*";
        out += ring.variables[i];
        if (e.e[i] != 1) out += "^" + std::to_string(e.e[i]);
    }
    return out;
}

// Signed addend list -> "a + b - c" with the leading sign folded in.
inline std::string join_addends(const std::vector<std::string>& parts) {
    if (parts.empty()) return "0";
    std::string out;
    for (const auto& p : parts) {
        bool neg = !p.empty() && p[0] == '-';
        std::string body = neg ? p.substr(1) : p;
        if (out.empty())
            out = neg ? "-" + body : body;
        else
            out += (neg ? " - " : " + ") + body;
    }
    return out;
}

}  // namespace detail

inline std::string render(const Poly& p) {
    if (p.is_zero()) return "0";
    std::vector<std::string> parts;
    for (const auto& [e, c] : p.terms()) {
        // constants built without a ring reference still render
        std::string mono = p.ring() ? detail::render_expo(*p.ring(), e) : std::string();
        std::string coeff = render(c);
        if (mono.empty())
            parts.push_back(coeff);
        else if (c == 1)
            parts.push_back(mono);
        else if (c == -1)
            parts.push_back("-" + mono);
        else
            parts.push_back(coeff + "*" + mono);
    }
    return detail::join_addends(parts);
}

namespace detail {

inline std::string render_mask(const CoordinateRing& ring, Mask m, const char* prefix) {
    std::string out;
    for (int i = 0; i < ring.dim(); ++i) {
        if (!(m & (Mask(1) << i))) continue;
        if (!out.empty()) out += "^^";
        out += prefix + ring.variables[i];
    }
    return out;
}

template <class Tag>
std::string render_layer(const GradedLayer<Tag>& layer, const char* prefix) {
    if (layer.is_zero()) return "0";
    std::vector<std::string> parts;
    for (const auto& [mask, poly] : layer.components()) {
        std::string basis = render_mask(*layer.ring(), mask, prefix);
        if (basis.empty()) {
            parts.push_back(render(poly));
            continue;
        }
        std::string c = render(poly);
        bool multi = poly.terms().size() > 1;
        if (c == "1")
            parts.push_back(basis);
        else if (c == "-1")
            parts.push_back("-" + basis);
        else
            parts.push_back((multi ? "(" + c + ")" : c) + "*" + basis);
    }
    return join_addends(parts);
}

template <class T, class Fn>
std::string render_series(const HSeries<T>& s, Fn&& coeff_str) {
    std::vector<std::string> parts;
    for (int m = 0; m <= s.order(); ++m) {
        std::string c = coeff_str(s.at(m));
        if (c == "0") continue;
        if (m == 0) {
            parts.push_back(c);
            continue;
        }
        std::string h = (m == 1) ? "h" : "h^" + std::to_string(m);
        if (c.find(' ') != std::string::npos) {
            // multi-term coefficient: keep its signs inside the parentheses
            parts.push_back(h + "*(" + c + ")");
            continue;
        }
        bool neg = c[0] == '-';
        if (neg) c = c.substr(1);
        parts.push_back((neg ? "-" : "") + h + (c == "1" ? "" : "*" + c));
    }
    return join_addends(parts);
}

}  // namespace detail

inline std::string render(const VecLayer& l) { return detail::render_layer(l, "D"); }
inline std::string render(const FormLayer& l) { return detail::render_layer(l, "d"); }

inline std::string render(const Scalar& s) {
    return detail::render_series(s, [](const Poly& p) { return render(p); });
}
inline std::string render(const PolyVector& v) {
    return detail::render_series(v, [](const VecLayer& l) { return render(l); });
}
inline std::string render(const DiffForm& f) {
    return detail::render_series(f, [](const FormLayer& l) { return render(l); });
}

}  // namespace poismod
