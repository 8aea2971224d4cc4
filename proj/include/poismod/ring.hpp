#pragma once

#include <algorithm>
#include <array>
#include <compare>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "poismod/rational.hpp"

namespace poismod {

struct ring_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct ring_mismatch_error : ring_error {
    ring_mismatch_error() : ring_error("operands belong to different coordinate rings") {}
};
struct unknown_variable_error : ring_error {
    explicit unknown_variable_error(const std::string& v)
        : ring_error("unknown variable: " + v) {}
};
struct not_a_unit_error : ring_error {
    explicit not_a_unit_error(const std::string& what) : ring_error("not a unit: " + what) {}
};
struct unsupported_structure_error : ring_error {
    using ring_error::ring_error;
};

inline constexpr int kMaxVars = 8;

// Multivariate (Laurent) polynomial ring over Q. Negative exponents are
// permitted exactly in the variables listed as invertible.
struct CoordinateRing {
    std::vector<std::string> variables;
    std::vector<bool> invertible;  // parallel to variables

    CoordinateRing() = default;
    CoordinateRing(std::vector<std::string> vars, std::vector<std::string> inv_names = {})
        : variables(std::move(vars)), invertible(variables.size(), false) {
        if (variables.size() > static_cast<size_t>(kMaxVars))
            throw ring_error("at most 8 variables supported");
        for (size_t i = 0; i < variables.size(); ++i)
            for (size_t j = i + 1; j < variables.size(); ++j)
                if (variables[i] == variables[j])
                    throw ring_error("duplicate variable: " + variables[i]);
        for (const auto& n : inv_names) invertible[index(n)] = true;
    }

    int dim() const { return static_cast<int>(variables.size()); }

    int index(const std::string& name) const {
        for (size_t i = 0; i < variables.size(); ++i)
            if (variables[i] == name) return static_cast<int>(i);
        throw unknown_variable_error(name);
    }

    bool operator==(const CoordinateRing& o) const {
        return variables == o.variables && invertible == o.invertible;
    }
};

// Dense exponent vector; entries beyond the ring dimension stay zero.
struct Expo {
    std::array<int, kMaxVars> e{};

    auto operator<=>(const Expo&) const = default;

    int weight() const {
        int s = 0;
        for (int v : e) s += v;
        return s;
    }
    bool is_zero() const {
        return std::all_of(e.begin(), e.end(), [](int v) { return v == 0; });
    }
    Expo plus(const Expo& o) const {
        Expo r;
        for (int i = 0; i < kMaxVars; ++i) r.e[i] = e[i] + o.e[i];
        return r;
    }
    Expo negated() const {
        Expo r;
        for (int i = 0; i < kMaxVars; ++i) r.e[i] = -e[i];
        return r;
    }
};

// Canonical-form polynomial: the term map never stores a zero coefficient,
// and a null ring pointer is the shared representation of zero.
class Poly {
public:
    Poly() = default;

    static Poly zero() { return Poly(); }
    static Poly constant(const CoordinateRing* r, Rational c) {
        Poly p;
        p.ring_ = r;
        if (c != 0) p.terms_[Expo{}] = std::move(c);
        return p;
    }
    static Poly monomial(const CoordinateRing* r, const Expo& m, Rational c) {
        Poly p;
        p.ring_ = r;
        p.check_exponents(m);
        if (c != 0) p.terms_[m] = std::move(c);
        return p;
    }
    static Poly variable(const CoordinateRing* r, int i) {
        Expo m;
        m.e[i] = 1;
        return monomial(r, m, 1);
    }

    const CoordinateRing* ring() const { return ring_; }
    const std::map<Expo, Rational>& terms() const { return terms_; }
    bool is_zero() const { return terms_.empty(); }

    bool is_constant() const {
        return terms_.empty() || (terms_.size() == 1 && terms_.begin()->first.is_zero());
    }
    Rational constant_value() const {
        if (terms_.empty()) return 0;
        auto it = terms_.find(Expo{});
        return it == terms_.end() ? Rational(0) : it->second;
    }

    // Units of a (Laurent) polynomial ring: c * monomial supported on
    // invertible variables, c != 0.
    bool is_unit() const {
        if (terms_.size() != 1) return false;
        const Expo& m = terms_.begin()->first;
        for (int i = 0; i < kMaxVars; ++i)
            if (m.e[i] != 0 && (!ring_ || !ring_->invertible[i])) return false;
        return true;
    }
    Poly unit_inverse() const {
        if (!is_unit()) throw not_a_unit_error(describe_leading());
        const auto& [m, c] = *terms_.begin();
        return monomial(ring_, m.negated(), Rational(1) / c);
    }

    Poly operator-() const {
        Poly r = *this;
        for (auto& [m, c] : r.terms_) c = -c;
        return r;
    }
    Poly operator+(const Poly& o) const {
        Poly r = *this;
        r.merge_ring(o);
        for (const auto& [m, c] : o.terms_) r.add_term(m, c);
        return r;
    }
    Poly operator-(const Poly& o) const {
        Poly r = *this;
        r.merge_ring(o);
        for (const auto& [m, c] : o.terms_) r.add_term(m, -c);
        return r;
    }
    Poly operator*(const Poly& o) const {
        Poly r;
        r.ring_ = ring_;
        r.merge_ring(o);
        for (const auto& [m1, c1] : terms_)
            for (const auto& [m2, c2] : o.terms_) r.add_term(m1.plus(m2), c1 * c2);
        return r;
    }
    Poly scaled(const Rational& c) const {
        Poly r;
        if (c == 0) return r;
        r.ring_ = ring_;
        for (const auto& [m, co] : terms_) r.terms_[m] = co * c;
        return r;
    }
    bool operator==(const Poly& o) const { return terms_ == o.terms_; }

    Poly derivative(int var) const {
        Poly r;
        r.ring_ = ring_;
        for (const auto& [m, c] : terms_) {
            if (m.e[var] == 0) continue;
            Expo d = m;
            d.e[var] -= 1;
            r.add_term(d, c * m.e[var]);
        }
        return r;
    }

    int total_degree() const {
        int d = 0;
        for (const auto& [m, c] : terms_) d = std::max(d, m.weight());
        return d;
    }

    // Splits into weight-homogeneous parts, deg(x_i) = deg(x_i^-1 per sign) = exponent sum.
    std::map<int, Poly> weight_slices() const {
        std::map<int, Poly> out;
        for (const auto& [m, c] : terms_) {
            Poly& p = out[m.weight()];
            p.ring_ = ring_;
            p.terms_[m] = c;
        }
        return out;
    }
    bool is_weight_homogeneous(int* weight_out = nullptr) const {
        bool first = true;
        int w = 0;
        for (const auto& [m, c] : terms_) {
            if (first) {
                w = m.weight();
                first = false;
            } else if (m.weight() != w) {
                return false;
            }
        }
        if (weight_out) *weight_out = w;
        return true;
    }

private:
    std::string describe_leading() const {
        if (terms_.empty()) return "0";
        if (terms_.size() > 1) return "leading coefficient has several terms";
        std::string s = to_string(terms_.begin()->second);
        for (int i = 0; i < kMaxVars; ++i)
            if (int p = terms_.begin()->first.e[i]; p != 0)
                s += "*" + (ring_ ? ring_->variables[i] : std::string("#") + std::to_string(i)) +
                     "^" + std::to_string(p);
        return s;
    }
    void check_exponents(const Expo& m) const {
        for (int i = 0; i < kMaxVars; ++i) {
            if (m.e[i] == 0) continue;
            if (!ring_ || i >= ring_->dim())
                throw ring_error("exponent on variable outside the ring");
            if (m.e[i] < 0 && !ring_->invertible[i])
                throw ring_error("negative exponent in non-invertible variable " +
                                 ring_->variables[i]);
        }
    }
    void merge_ring(const Poly& o) {
        if (ring_ && o.ring_ && ring_ != o.ring_ && !(*ring_ == *o.ring_))
            throw ring_mismatch_error();
        if (!ring_) ring_ = o.ring_;
    }
    void add_term(const Expo& m, const Rational& c) {
        if (c == 0) return;
        check_exponents(m);
        auto [it, fresh] = terms_.try_emplace(m, c);
        if (!fresh) {
            it->second += c;
            if (it->second == 0) terms_.erase(it);
        }
    }

    const CoordinateRing* ring_ = nullptr;
    std::map<Expo, Rational> terms_;
};

}  // namespace poismod
