// Command line front end: ring declarations and expressions in, deterministic
// text or JSON reports out. Exit codes: 0 clean verdict, 1 an obstruction or
// violation was found, 2 usage or input errors.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <memory>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "poismod/crossed.hpp"
#include "poismod/examples.hpp"
#include "poismod/lift.hpp"
#include "poismod/parser.hpp"
#include "poismod/render.hpp"

using json = nlohmann::ordered_json;
using namespace poismod;

namespace {

struct Session {
    std::string ring_decl = "x,y";
    std::string invertible;
    int order = -1;  // resolved per command
    int weight_bound = 8;
    int box = 3;
    std::string format = "text";
    unsigned long long seed = 1;
    std::string config_path;
    int samples = 25;

    std::unique_ptr<CoordinateRing> ring;

    int resolved_order(int fallback) const { return order >= 0 ? order : fallback; }

    void build_ring() {
        auto split = [](const std::string& s) {
            std::vector<std::string> out;
            std::string cur;
            for (char c : s) {
                if (c == ',') {
                    if (!cur.empty()) out.push_back(cur);
                    cur.clear();
                } else if (!std::isspace(static_cast<unsigned char>(c)))
                    cur += c;
            }
            if (!cur.empty()) out.push_back(cur);
            return out;
        };
        auto vars = split(ring_decl);
        for (const auto& v : vars)
            if (v == "h") throw CLI::ValidationError("--ring", "'h' names the formal parameter");
        ring = std::make_unique<CoordinateRing>(vars, split(invertible));
    }
};

// key = value lines; '#' comments; quotes around values optional.
void apply_config_file(const std::string& path, std::vector<std::string>& argv_extra) {
    std::ifstream in(path);
    if (!in) throw CLI::ValidationError("--config", "cannot open " + path);
    std::string line;
    while (std::getline(in, line)) {
        auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        auto eq = line.find('=');
        if (eq == std::string::npos) continue;
        auto trim = [](std::string s) {
            size_t a = s.find_first_not_of(" \t\"");
            size_t b = s.find_last_not_of(" \t\"");
            return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
        };
        std::string key = trim(line.substr(0, eq)), val = trim(line.substr(eq + 1));
        if (key.empty()) continue;
        argv_extra.push_back("--" + key);
        argv_extra.push_back(val);
    }
}

void print_text(const json& j, std::ostream& os, int indent) {
    std::string pad(indent, ' ');
    if (j.is_object()) {
        size_t width = 0;
        for (auto& [k, v] : j.items()) width = std::max(width, k.size());
        for (auto& [k, v] : j.items()) {
            if (v.is_object() || (v.is_array() && !v.empty())) {
                os << pad << k << ":\n";
                print_text(v, os, indent + 2);
            } else
                os << pad << k << std::string(width - k.size(), ' ') << " = "
                   << (v.is_string() ? v.get<std::string>() : v.dump()) << "\n";
        }
    } else if (j.is_array()) {
        for (auto& v : j) {
            if (v.is_object() || v.is_array()) {
                os << pad << "-\n";
                print_text(v, os, indent + 2);
            } else
                os << pad << "- " << (v.is_string() ? v.get<std::string>() : v.dump()) << "\n";
        }
    } else
        os << pad << (j.is_string() ? j.get<std::string>() : j.dump()) << "\n";
}

int emit(const Session& s, json& rep, int code) {
    rep["exit"] = code;
    if (s.format == "json")
        std::cout << rep.dump(2) << "\n";
    else
        print_text(rep, std::cout, 0);
    return code;
}

json header(const Session& s, const std::string& command) {
    json j;
    j["schema"] = 1;
    j["command"] = command;
    j["ring"] = s.ring_decl;
    if (!s.invertible.empty()) j["invertible"] = s.invertible;
    return j;
}

json obstruction_json(const Obstruction& o) {
    json j;
    j["order"] = o.order;
    j["weight"] = o.weight;
    j["reason"] = o.reason;
    j["exhaustive"] = o.exhaustive;
    return j;
}

// Certify or report the violation; returns false when Jacobi fails.
bool certify(PoissonStructure& ps, json& rep) {
    auto cert = jacobi_check(ps);
    rep["jacobi"] = cert.ok;
    if (!cert.ok) {
        json v;
        v["order"] = cert.violation_order;
        v["layer"] = render(cert.violation);
        rep["violation"] = v;
    }
    return cert.ok;
}

std::unique_ptr<StarProduct> make_provider(const std::string& name, const PoissonStructure& ps,
                                           int order) {
    if (name == "moyal") return std::make_unique<MoyalStar>(ps, order);
    if (name == "universal2") return std::make_unique<Universal2Star>(ps, order);
    throw CLI::ValidationError("--provider", "unknown provider " + name);
}

Poly random_poly(const CoordinateRing& ring, std::mt19937_64& rng, int max_deg, int n_terms) {
    std::uniform_int_distribution<int> coeff(-3, 3), expo(0, max_deg);
    Poly p;
    for (int t = 0; t < n_terms; ++t) {
        Expo e;
        int budget = max_deg;
        for (int i = 0; i < ring.dim(); ++i) {
            e.e[i] = std::min(expo(rng), budget);
            budget -= e.e[i];
        }
        int c = coeff(rng);
        if (c == 0) c = 1;
        p = p + Poly::monomial(&ring, e, c);
    }
    return p;
}

int cmd_jacobi(Session& s, const std::string& pi_src) {
    s.build_ring();
    int N = s.resolved_order(kDefaultOrder);
    json rep = header(s, "jacobi");
    rep["order"] = N;
    auto ps = make_poisson(s.ring.get(), parse_vector(pi_src, s.ring.get(), N));
    rep["pi"] = render(ps.pi);
    bool ok = certify(ps, rep);
    return emit(s, rep, ok ? 0 : 1);
}

int cmd_modular(Session& s, const std::string& pi_src, const std::string& omega_src) {
    s.build_ring();
    int N = s.resolved_order(kDefaultOrder);
    json rep = header(s, "modular");
    rep["order"] = N;
    auto ps = make_poisson(s.ring.get(), parse_vector(pi_src, s.ring.get(), N));
    rep["pi"] = render(ps.pi);
    if (!certify(ps, rep)) return emit(s, rep, 1);

    auto omega = parse_form(omega_src, s.ring.get(), N);
    rep["volume"] = render(omega);
    auto mod = modular_field(ps, omega);
    rep["modular_field"] = render(mod.field);
    rep["poisson_check"] = mod.poisson_check;

    auto dec = log_hamiltonian_decompose(ps, mod.field, s.box, s.weight_bound);
    rep["class_trivial"] = dec.f.has_value();
    if (dec.f)
        rep["log_ham_witness"] = render(*dec.f);
    else
        rep["obstruction"] = obstruction_json(dec.obstruction);
    return emit(s, rep, dec.f ? 0 : 1);
}

int cmd_unimodular(Session& s, const std::string& pi_src, const std::string& omega_src) {
    s.build_ring();
    int N = s.resolved_order(kDefaultOrder);
    json rep = header(s, "unimodular");
    rep["order"] = N;
    auto ps = make_poisson(s.ring.get(), parse_vector(pi_src, s.ring.get(), N));
    rep["pi"] = render(ps.pi);
    if (!certify(ps, rep)) return emit(s, rep, 1);

    auto omega = parse_form(omega_src, s.ring.get(), N);
    auto wit = unimodularity_witness(ps, omega.at(0), N, s.weight_bound, s.box);
    rep["witness_found"] = wit.omega.has_value();
    if (wit.omega) {
        rep["invariant_volume"] = render(*wit.omega);
        rep["lie_derivative_zero"] = koszul_differential(ps, *wit.omega).is_zero();
    } else {
        rep["obstruction"] = obstruction_json(wit.obstruction);
        rep["residual"] = render(wit.residual);
    }
    return emit(s, rep, wit.omega ? 0 : 1);
}

int cmd_logham(Session& s, const std::string& pi_src, const std::string& field_src) {
    s.build_ring();
    int N = s.resolved_order(kDefaultOrder);
    json rep = header(s, "logham");
    rep["order"] = N;
    auto ps = make_poisson(s.ring.get(), parse_vector(pi_src, s.ring.get(), N));
    if (!certify(ps, rep)) return emit(s, rep, 1);

    auto v = parse_vector(field_src, s.ring.get(), N);
    rep["field"] = render(v);
    auto dec = log_hamiltonian_decompose(ps, v, s.box, s.weight_bound);
    rep["decomposed"] = dec.f.has_value();
    if (dec.f) {
        rep["unit"] = render(*dec.f);
        rep["check"] = log_hamiltonian_field(ps, *dec.f) == v;
    } else
        rep["obstruction"] = obstruction_json(dec.obstruction);
    return emit(s, rep, dec.f ? 0 : 1);
}

int cmd_hamiltonian(Session& s, const std::string& pi_src, const std::string& field_src) {
    s.build_ring();
    int N = s.resolved_order(kDefaultOrder);
    json rep = header(s, "hamiltonian");
    rep["order"] = N;
    auto ps = make_poisson(s.ring.get(), parse_vector(pi_src, s.ring.get(), N));
    if (!certify(ps, rep)) return emit(s, rep, 1);

    auto w = parse_vector(field_src, s.ring.get(), N);
    rep["field"] = render(w);
    auto sol = solve_hamiltonian(ps, w, s.weight_bound, s.box);
    rep["solved"] = sol.f.has_value();
    if (sol.f) {
        rep["f"] = render(*sol.f);
        rep["check"] = hamiltonian_field(ps, *sol.f) == w;
    } else
        rep["obstruction"] = obstruction_json(sol.obstruction);
    return emit(s, rep, sol.f ? 0 : 1);
}

int cmd_hp(Session& s, const std::string& pi_src, const std::string& what, int degree, int wlo,
           int whi) {
    s.build_ring();
    int N = s.resolved_order(kDefaultOrder);
    json rep = header(s, "hp");
    rep["space"] = what;
    rep["degree"] = degree;
    auto ps = make_poisson(s.ring.get(), parse_vector(pi_src, s.ring.get(), N));
    if (!certify(ps, rep)) return emit(s, rep, 1);

    auto fill = [&](const auto& report) {
        rep["weight_lo"] = report.weight_lo;
        rep["weight_hi"] = report.weight_hi;
        rep["exhaustive"] = report.exhaustive;
        json slices = json::array();
        for (const auto& sl : report.slices) {
            json e;
            e["weight"] = sl.weight;
            e["dim"] = sl.dim;
            json reps = json::array();
            for (const auto& r : sl.representatives) reps.push_back(render(r));
            e["representatives"] = reps;
            slices.push_back(e);
        }
        rep["slices"] = slices;
    };
    if (what == "cohomology")
        fill(hp_cohomology(ps, degree, wlo, whi, s.box));
    else if (what == "homology")
        fill(hp_homology(ps, degree, wlo, whi, s.box));
    else
        throw CLI::ValidationError("--space", "expected cohomology or homology");
    return emit(s, rep, 0);
}

int cmd_star(Session& s, const std::string& provider, const std::string& pi_src,
             const std::string& lhs, const std::string& rhs) {
    s.build_ring();
    int N = s.resolved_order(provider == "moyal" ? 4 : 2);
    json rep = header(s, "star");
    rep["provider"] = provider;
    rep["order"] = N;
    rep["seed"] = s.seed;
    auto ps = make_poisson(s.ring.get(), parse_vector(pi_src, s.ring.get(), N));
    if (!certify(ps, rep)) return emit(s, rep, 1);
    auto prod = make_provider(provider, ps, N);

    Scalar a = parse_scalar(lhs, s.ring.get(), N), b = parse_scalar(rhs, s.ring.get(), N);
    rep["lhs"] = render(a);
    rep["rhs"] = render(b);
    rep["product"] = render(prod->star(a, b));
    rep["commutator"] = render(prod->commutator(a, b));

    std::mt19937_64 rng(s.seed);
    int assoc_fail = 0, semi_fail = 0;
    for (int i = 0; i < s.samples; ++i) {
        Scalar u = scalar_poly(random_poly(*s.ring, rng, 3, 2), N);
        Scalar v = scalar_poly(random_poly(*s.ring, rng, 3, 2), N);
        Scalar w = scalar_poly(random_poly(*s.ring, rng, 3, 2), N);
        if (!(prod->star(prod->star(u, v), w) == prod->star(u, prod->star(v, w)))) ++assoc_fail;
        Scalar comm = prod->commutator(u, v);
        Poly lead = leading_pairing(ps, u.at(0), v.at(0));
        if (!(comm.at(0).is_zero() && comm.at(1) == lead)) ++semi_fail;
    }
    json checks = json::array();
    json c1;
    c1["law"] = "associativity";
    c1["samples"] = s.samples;
    c1["status"] = assoc_fail == 0 ? "pass" : "fail";
    checks.push_back(c1);
    json c2;
    c2["law"] = "semiclassical commutator";
    c2["samples"] = s.samples;
    c2["status"] = semi_fail == 0 ? "pass" : "fail";
    checks.push_back(c2);
    rep["checks"] = checks;
    return emit(s, rep, (assoc_fail || semi_fail) ? 1 : 0);
}

int cmd_derivation(Session& s, const std::string& provider, const std::string& pi_src,
                   const std::string& field_src) {
    s.build_ring();
    int N = s.resolved_order(provider == "moyal" ? 4 : 2);
    json rep = header(s, "derivation");
    rep["provider"] = provider;
    rep["order"] = N;
    auto ps = make_poisson(s.ring.get(), parse_vector(pi_src, s.ring.get(), N));
    if (!certify(ps, rep)) return emit(s, rep, 1);
    auto prod = make_provider(provider, ps, N);

    auto w = parse_vector(field_src, s.ring.get(), N);
    rep["field"] = render(w);
    auto D = quantized_derivation(*prod, w, s.weight_bound, s.box);
    rep["certified"] = D.certified;
    rep["correction_orders"] = D.corrections;
    if (!D.certified) {
        rep["obstruction"] = obstruction_json(D.obstruction);
        return emit(s, rep, 1);
    }
    json images;
    for (int i = 0; i < s.ring->dim(); ++i) {
        Scalar xi = scalar_poly(Poly::variable(s.ring.get(), i), N);
        images["D(" + s.ring->variables[i] + ")"] = render(D.D(xi));
    }
    rep["generator_images"] = images;
    return emit(s, rep, 0);
}

int cmd_lift(Session& s, const std::string& provider, const std::string& pi_src,
             const std::string& base_src) {
    s.build_ring();
    int N = s.resolved_order(provider == "moyal" ? 4 : 2);
    json rep = header(s, "lift");
    rep["provider"] = provider;
    rep["order"] = N;
    auto ps = make_poisson(s.ring.get(), parse_vector(pi_src, s.ring.get(), N));
    if (!certify(ps, rep)) return emit(s, rep, 1);
    auto prod = make_provider(provider, ps, N);

    Poly f = parse_scalar(base_src, s.ring.get(), 0).at(0);
    rep["base_unit"] = render(f);
    auto lift = lift_log_hamiltonian(*prod, f, N, s.weight_bound, s.box);
    rep["field"] = render(lift.field);
    rep["lifted_found"] = lift.lifted.has_value();
    if (!lift.lifted) {
        rep["obstruction"] = obstruction_json(lift.obstruction);
        return emit(s, rep, 1);
    }
    rep["lifted"] = render(*lift.lifted);
    // conjugation identity on generators
    StarAutomorphism phi = exp_derivation(lift.derivation.D);
    Scalar F = *lift.lifted, Finv = star_unit_inverse(F, *prod, N);
    bool ok = true;
    for (int i = 0; i < s.ring->dim(); ++i) {
        Scalar xi = scalar_poly(Poly::variable(s.ring.get(), i), N);
        ok = ok && phi(xi) == prod->star(prod->star(F, xi), Finv);
    }
    rep["conjugation_verified"] = ok;
    return emit(s, rep, ok ? 0 : 1);
}

int cmd_crossed(Session& s, const std::string& provider, const std::string& pi_src,
                const std::string& omega_src, const std::string& lhs, int lhs_tpow,
                const std::string& rhs, int rhs_tpow) {
    s.build_ring();
    int N = s.resolved_order(provider == "moyal" ? 4 : 2);
    json rep = header(s, "crossed");
    rep["provider"] = provider;
    rep["order"] = N;
    rep["seed"] = s.seed;
    auto ps = make_poisson(s.ring.get(), parse_vector(pi_src, s.ring.get(), N));
    if (!certify(ps, rep)) return emit(s, rep, 1);
    auto prod = make_provider(provider, ps, N);

    auto omega = parse_form(omega_src, s.ring.get(), N);
    auto mod = modular_field(ps, omega);
    rep["modular_field"] = render(mod.field);
    auto D = quantized_derivation(*prod, mod.field, s.weight_bound, s.box);
    rep["derivation_certified"] = D.certified;
    if (!D.certified) {
        rep["obstruction"] = obstruction_json(D.obstruction);
        return emit(s, rep, 1);
    }

    auto rend = [&](const CrossedElement& e) {
        if (e.terms.empty()) return std::string("0");
        std::string out;
        for (const auto& [n, a] : e.terms) {
            if (!out.empty()) out += " + ";
            out += "(" + render(a) + ")";
            if (n != 0) out += "*t^" + std::to_string(n);
        }
        return out;
    };

    Scalar A = parse_scalar(lhs, s.ring.get(), N), B = parse_scalar(rhs, s.ring.get(), N);
    auto ea = crossed_scalar(*prod, D.D, A, lhs_tpow);
    auto eb = crossed_scalar(*prod, D.D, B, rhs_tpow);
    rep["lhs"] = rend(ea);
    rep["rhs"] = rend(eb);
    rep["product"] = rend(crossed_multiply(ea, eb));

    // property suite
    StarAutomorphism phi = exp_derivation(D.D);
    auto t = crossed_t_power(*prod, D.D, 1, N);
    auto tinv = crossed_t_power(*prod, D.D, -1, N);
    bool tconj = true;
    for (int i = 0; i < s.ring->dim(); ++i) {
        Scalar xi = scalar_poly(Poly::variable(s.ring.get(), i), N);
        tconj = tconj && crossed_equal(
                             crossed_multiply(crossed_multiply(t, crossed_scalar(*prod, D.D, xi)),
                                              tinv),
                             crossed_scalar(*prod, D.D, phi(xi)));
    }
    rep["t_conjugation"] = tconj;

    std::mt19937_64 rng(s.seed);
    std::uniform_int_distribution<int> tp(-2, 2);
    int assoc_fail = 0, euler_fail = 0;
    for (int i = 0; i < s.samples; ++i) {
        auto e1 = crossed_scalar(*prod, D.D, scalar_poly(random_poly(*s.ring, rng, 2, 2), N),
                                 tp(rng));
        auto e2 = crossed_scalar(*prod, D.D, scalar_poly(random_poly(*s.ring, rng, 2, 2), N),
                                 tp(rng));
        auto e3 = crossed_scalar(*prod, D.D, scalar_poly(random_poly(*s.ring, rng, 2, 2), N),
                                 tp(rng));
        if (!crossed_equal(crossed_multiply(crossed_multiply(e1, e2), e3),
                           crossed_multiply(e1, crossed_multiply(e2, e3))))
            ++assoc_fail;
        if (!crossed_equal(euler(crossed_multiply(e1, e2)),
                           crossed_multiply(euler(e1), e2) + crossed_multiply(e1, euler(e2))))
            ++euler_fail;
    }
    json checks = json::array();
    json c1;
    c1["law"] = "associativity";
    c1["samples"] = s.samples;
    c1["status"] = assoc_fail == 0 ? "pass" : "fail";
    checks.push_back(c1);
    json c2;
    c2["law"] = "euler derivation";
    c2["samples"] = s.samples;
    c2["status"] = euler_fail == 0 ? "pass" : "fail";
    checks.push_back(c2);
    rep["checks"] = checks;

    bool ok = tconj && !assoc_fail && !euler_fail;
    return emit(s, rep, ok ? 0 : 1);
}

int cmd_examples(Session& s, bool run_all, const std::string& name, bool list_only) {
    json rep = header(s, "examples");
    rep.erase("ring");  // bank declares its own rings
    auto bank = run_example_bank();
    if (list_only) {
        json names = json::array();
        for (const auto& r : bank) names.push_back(r.name);
        rep["available"] = names;
        return emit(s, rep, 0);
    }
    json results = json::array();
    bool all_ok = true;
    for (const auto& r : bank) {
        if (!run_all && r.name != name) continue;
        json e;
        e["name"] = r.name;
        e["status"] = r.passed ? "pass" : "fail";
        e["detail"] = r.detail;
        results.push_back(e);
        all_ok = all_ok && r.passed;
    }
    if (results.empty()) throw CLI::ValidationError("--name", "no such example " + name);
    rep["results"] = results;
    return emit(s, rep, all_ok ? 0 : 1);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"exact Poisson calculus and truncated deformation quantization"};
    app.require_subcommand(1);

    Session s;
    if (const char* env = std::getenv("POISSON_SEED")) s.seed = std::strtoull(env, nullptr, 10);

    // --config injects defaults; explicit flags override because CLI11 sees
    // them later in the rewritten argument list.
    std::vector<std::string> args(argv + 1, argv + argc);
    for (size_t i = 0; i + 1 < args.size(); ++i)
        if (args[i] == "--config") {
            std::vector<std::string> pre;
            try {
                apply_config_file(args[i + 1], pre);
            } catch (const CLI::Error& e) {
                std::cerr << e.what() << "\n";
                return 2;
            }
            std::vector<std::string> merged;
            merged.push_back(args[0]);  // subcommand first
            merged.insert(merged.end(), pre.begin(), pre.end());
            for (size_t j = 1; j < args.size(); ++j) {
                if (j == i || j == i + 1) continue;
                merged.push_back(args[j]);
            }
            args = merged;
            break;
        }

    // take_last lets an explicit flag override the same key injected from
    // --config, which the prescan places earlier in the argument list.
    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--ring", s.ring_decl, "comma separated variables")->take_last();
        sub->add_option("--invertible", s.invertible, "comma separated Laurent variables")
            ->take_last();
        sub->add_option("--order", s.order, "h truncation order")->take_last();
        sub->add_option("--weight-bound", s.weight_bound, "max weight slice for solvers")
            ->take_last();
        sub->add_option("--exponent-box", s.box, "monomial exponent box for searches")
            ->take_last();
        sub->add_option("--format", s.format, "text or json")
            ->check(CLI::IsMember({"text", "json"}))
            ->take_last();
        sub->add_option("--seed", s.seed, "seed for randomized checks")->take_last();
        sub->add_option("--samples", s.samples, "sample count for randomized checks")
            ->take_last();
        sub->add_option("--config", s.config_path, "config file with key = value lines");
    };

    std::string pi_src, omega_src = "dx^^dy", field_src, lhs = "x", rhs = "y";
    std::string provider = "moyal", space = "cohomology", base_src = "x", name;
    int degree = 0, wlo = 0, whi = 6, lhs_tpow = 0, rhs_tpow = 1;
    bool run_all = false;

    auto* jac = app.add_subcommand("jacobi", "certify [pi,pi] = 0");
    add_common(jac);
    jac->add_option("--pi", pi_src, "bivector series")->required()->take_last();

    auto* mod = app.add_subcommand("modular", "modular field and class triviality");
    add_common(mod);
    mod->add_option("--pi", pi_src)->required();
    mod->add_option("--omega", omega_src, "volume form");

    auto* uni = app.add_subcommand("unimodular", "search an h-corrected invariant volume");
    add_common(uni);
    uni->add_option("--pi", pi_src)->required();
    uni->add_option("--omega", omega_src, "leading volume");

    auto* log = app.add_subcommand("logham", "decompose a field as f^-1 [pi, f]");
    add_common(log);
    log->add_option("--pi", pi_src)->required();
    log->add_option("--field", field_src, "vector field series")->required();

    auto* ham = app.add_subcommand("hamiltonian", "solve [pi, f] = w");
    add_common(ham);
    ham->add_option("--pi", pi_src)->required();
    ham->add_option("--field", field_src, "target vector field")->required();

    auto* hp = app.add_subcommand("hp", "leading-order Poisson (co)homology slices");
    add_common(hp);
    hp->add_option("--pi", pi_src)->required();
    hp->add_option("--space", space, "cohomology or homology");
    hp->add_option("--degree", degree, "multivector or form degree");
    hp->add_option("--weight-lo", wlo);
    hp->add_option("--weight-hi", whi);

    auto* star = app.add_subcommand("star", "star products and certification");
    add_common(star);
    star->add_option("--provider", provider, "moyal or universal2");
    star->add_option("--pi", pi_src)->required();
    star->add_option("--lhs", lhs);
    star->add_option("--rhs", rhs);

    auto* der = app.add_subcommand("derivation", "quantize a Poisson vector field");
    add_common(der);
    der->add_option("--provider", provider);
    der->add_option("--pi", pi_src)->required();
    der->add_option("--field", field_src)->required();

    auto* lift = app.add_subcommand("lift", "conjugation unit for a log-Hamiltonian flow");
    add_common(lift);
    lift->add_option("--provider", provider);
    lift->add_option("--pi", pi_src)->required();
    lift->add_option("--base", base_src, "classical unit, e.g. a monomial");

    auto* cro = app.add_subcommand("crossed", "crossed product by the modular automorphism");
    add_common(cro);
    cro->add_option("--provider", provider);
    cro->add_option("--pi", pi_src)->required();
    cro->add_option("--omega", omega_src);
    cro->add_option("--lhs", lhs);
    cro->add_option("--lhs-tpow", lhs_tpow);
    cro->add_option("--rhs", rhs);
    cro->add_option("--rhs-tpow", rhs_tpow);

    auto* ex = app.add_subcommand("examples", "built-in example bank");
    add_common(ex);
    auto* ex_run = ex->add_subcommand("run", "run bank entries");
    add_common(ex_run);
    ex_run->add_flag("--all", run_all, "run every entry");
    ex_run->add_option("--name", name, "run one entry");
    auto* ex_list = ex->add_subcommand("list", "list entry names");
    add_common(ex_list);

    try {
        app.parse(std::vector<std::string>(args.rbegin(), args.rend()));
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (*jac) return cmd_jacobi(s, pi_src);
        if (*mod) return cmd_modular(s, pi_src, omega_src);
        if (*uni) return cmd_unimodular(s, pi_src, omega_src);
        if (*log) return cmd_logham(s, pi_src, field_src);
        if (*ham) return cmd_hamiltonian(s, pi_src, field_src);
        if (*hp) return cmd_hp(s, pi_src, space, degree, wlo, whi);
        if (*star) return cmd_star(s, provider, pi_src, lhs, rhs);
        if (*der) return cmd_derivation(s, provider, pi_src, field_src);
        if (*lift) return cmd_lift(s, provider, pi_src, base_src);
        if (*cro) return cmd_crossed(s, provider, pi_src, omega_src, lhs, lhs_tpow, rhs, rhs_tpow);
        if (*ex) {
            if (*ex_list) return cmd_examples(s, false, "", true);
            if (!run_all && name.empty()) {
                std::cerr << "examples: pass run --all, run --name NAME, or list\n";
                return 2;
            }
            return cmd_examples(s, run_all, name, false);
        }
    } catch (const parse_error& e) {
        std::cerr << "parse error: " << e.what() << "\n";
        return 2;
    } catch (const CLI::Error& e) {
        std::cerr << e.what() << "\n";
        return 2;
    } catch (const ring_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 2;
}
