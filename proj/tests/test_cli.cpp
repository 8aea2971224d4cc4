#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <string>
#include <sys/wait.h>
#include <vector>

#include <json.hpp>

#include "poismod/parser.hpp"
#include "poismod/render.hpp"
#include "test_support.hpp"

// Two layers under test: the expression grammar and renderer in-process, and
// the installed binary end to end through popen. POISMOD_CLI_PATH points at
// the built executable.

#ifndef POISMOD_CLI_PATH
#error "POISMOD_CLI_PATH must point at the cli binary"
#endif

using namespace poismod;
using nlohmann::json;

namespace {

struct RunResult {
    int code = -1;
    std::string out;
};

// stderr folds into the captured stream so diagnostics are assertable
RunResult run_cli(const std::string& args, const std::string& env = "") {
    std::string cmd;
    if (!env.empty()) cmd += env + " ";
    cmd += std::string("\"") + POISMOD_CLI_PATH + "\" " + args + " 2>&1";
    FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    RunResult r;
    char buf[4096];
    size_t n = 0;
    while ((n = fread(buf, 1, sizeof buf, pipe)) > 0) r.out.append(buf, n);
    int status = pclose(pipe);
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return r;
}

json jout(const RunResult& r) { return json::parse(r.out); }

bool contains(const std::string& hay, const std::string& needle) {
    return hay.find(needle) != std::string::npos;
}

template <class Tag>
GradedLayer<Tag> random_laurent_layer(const CoordinateRing& ring, std::mt19937_64& rng,
                                      int grade) {
    GradedLayer<Tag> l(grade);
    std::vector<Mask> masks;
    for (Mask m = 0; m < (Mask(1) << ring.dim()); ++m)
        if (mask_arity(m) == grade) masks.push_back(m);
    std::uniform_int_distribution<size_t> pick(0, masks.size() - 1);
    for (int k = 0; k < 2; ++k)
        l.add(masks[pick(rng)], testutil::random_poly(ring, rng, 2, 2, true));
    return l;
}

}  // namespace

TEST_CASE("parser reads scalars, rationals and powers") {
    CoordinateRing r({"x", "y"}, {});
    Poly px = Poly::variable(&r, 0), py = Poly::variable(&r, 1);

    CHECK(parse_scalar("3", &r, 2) == scalar_constant(&r, Rational(3), 2));
    CHECK(parse_scalar("5/10", &r, 0).at(0) == Poly::constant(&r, Rational(1, 2)));
    CHECK(parse_scalar("x^0", &r, 1) == scalar_one(&r, 1));
    CHECK(parse_scalar("(x + y)^2", &r, 0) == parse_scalar("x^2 + 2*x*y + y^2", &r, 0));

    // '*' binds looser than '^'
    Expo cube;
    cube.e[0] = 3;
    CHECK(parse_scalar("2*x^3", &r, 0).at(0) == Poly::monomial(&r, cube, 2));
    CHECK(parse_scalar("-x^2", &r, 0).at(0) == Poly::constant(&r, -1) * px * px);

    Scalar series(3);
    series.at(1) = Poly::constant(&r, -1) * (px + py);
    series.at(2) = px;
    CHECK(parse_scalar("h^2*x - h*(x + y)", &r, 3) == series);
}

TEST_CASE("parser builds multivectors and forms with canonical wedges") {
    CoordinateRing r3({"x", "y", "z"}, {});
    Poly one3 = Poly::constant(&r3, 1);

    CHECK(parse_vector("Dx^^Dy^^Dz", &r3, 0) == PolyVector(0, VecLayer(3, Mask(7), one3)));
    // cyclic reordering is an even permutation
    CHECK(parse_vector("Dz^^Dx^^Dy", &r3, 0) == parse_vector("Dx^^Dy^^Dz", &r3, 0));
    CHECK(parse_vector("Dy^^Dx", &r3, 0) == parse_vector("-Dx^^Dy", &r3, 0));

    CoordinateRing r({"x", "y"}, {});
    Poly px = Poly::variable(&r, 0), py = Poly::variable(&r, 1);
    FormLayer rot(1);
    rot.add(Mask(1), Poly::constant(&r, -1) * py);
    rot.add(Mask(2), px);
    CHECK(parse_form("x*dy - y*dx", &r, 0) == DiffForm(0, rot));
    CHECK(parse_form("dx^^dy", &r, 0) == DiffForm(0, FormLayer(2, Mask(3), Poly::constant(&r, 1))));
    CHECK(parse_vector("x*Dx^^Dy", &r, 0) == PolyVector(0, VecLayer(2, Mask(3), px)));
}

TEST_CASE("parser diagnostics carry positions and a caret") {
    CoordinateRing r({"x", "y"}, {});

    auto expect_fail = [&](const std::string& src, const std::string& msg, std::size_t pos) {
        CAPTURE(src);
        try {
            parse_value(src, &r, 2);
            FAIL_CHECK("no diagnostic for: ", src);
        } catch (const parse_error& e) {
            CHECK(e.position == pos);
            std::string w = e.what();
            CHECK(w.rfind(msg, 0) == 0);
            CHECK(contains(w, "\n  " + src + "\n"));
            CHECK(w.back() == '^');
        }
    };

    expect_fail("x + qq", "unknown name 'qq'", 4);
    expect_fail("x + Dx", "cannot add scalar and multivector", 2);
    expect_fail("Dx*Dy", "cannot multiply multivector by multivector", 2);
    expect_fail("Dx^^dy", "cannot wedge multivector with form", 2);
    expect_fail("Dx^2", "'^' takes an integer power of a scalar", 2);
    expect_fail("y^-1", "negative power of a non-invertible scalar", 1);
    expect_fail("h^-1", "negative power of a non-invertible scalar", 1);
    expect_fail("3/0", "division by zero", 0);
    expect_fail("1/x", "expected a denominator after '/'", 2);
    expect_fail("x y", "unexpected trailing input", 2);
    expect_fail("(x + y", "expected ')'", 6);
    expect_fail("x^z", "expected an integer exponent", 2);
    expect_fail("", "expected an expression", 0);
    expect_fail("x +", "expected an expression", 3);
    expect_fail("x + $", "unexpected character '$'", 4);
}

TEST_CASE("kind coercion accepts zero and rejects mismatches") {
    CoordinateRing r({"x", "y"}, {});

    PolyVector zv = parse_vector("0", &r, 2);
    CHECK(zv.is_zero());
    CHECK(zv.order() == 2);
    CHECK(parse_form("x - x", &r, 1).is_zero());

    CHECK_THROWS_AS(parse_scalar("Dx", &r, 1), parse_error);
    CHECK_THROWS_AS(parse_vector("x", &r, 1), parse_error);
    CHECK_THROWS_AS(parse_form("x*y", &r, 1), parse_error);
}

TEST_CASE("renderer output is canonical and parses back") {
    CoordinateRing r({"x", "y", "t"}, {"t"});

    // masks render in ascending variable order with the permutation sign folded in
    CHECK(render(parse_form("t^-2*dt^^dx^^dy", &r, 0)) == "t^-2*dx^^dy^^dt");
    CHECK(render(parse_vector("Dy^^Dx", &r, 0)) == "-Dx^^Dy");

    // terms render in exponent order, constants first
    CHECK(render(parse_scalar("x - 3", &r, 0)) == "-3 + x");
    CHECK(render(parse_scalar("t^-2*y + 3", &r, 0)) == "3 + y*t^-2");
    CHECK(render(parse_scalar("(2*t)^-1", &r, 0)) == "1/2*t^-1");
    CHECK(render(parse_scalar("x*y + h*1/2", &r, 1)) == "x*y + h*1/2");
    CHECK(render(parse_scalar("h*(x + y)", &r, 1)) == "h*(y + x)");

    // a multi-term h-coefficient keeps its own signs inside the parentheses
    Scalar s = parse_scalar("2 - h^2*(7 + x)", &r, 2);
    CHECK(render(s) == "2 + h^2*(-7 - x)");
    CHECK(parse_scalar(render(s), &r, 2) == s);

    CHECK(render(parse_vector("-h*Dx", &r, 2)) == "-h*Dx");
    CHECK(render(Scalar(3)) == "0");
}

TEST_CASE("parse after render is the identity on random values") {
    CoordinateRing poly({"x", "y", "z"}, {});
    CoordinateRing laur({"x", "y"}, {"y"});
    std::mt19937_64 rng(20250825);

    for (int it = 0; it < 40; ++it) {
        Scalar s = testutil::random_scalar(poly, rng, 2, 3, 3);
        CHECK(parse_scalar(render(s), &poly, 2) == s);

        PolyVector v(2);
        DiffForm f(2);
        for (int m = 0; m <= 2; ++m) {
            int grade = 1 + (m + it) % 2;
            v.at(m) = testutil::random_layer<VecTag>(poly, rng, grade, 2, 2);
            f.at(m) = testutil::random_layer<FormTag>(poly, rng, grade, 2, 2);
        }
        CHECK(parse_vector(render(v), &poly, 2) == v);
        CHECK(parse_form(render(f), &poly, 2) == f);

        Scalar ls(1);
        ls.at(0) = testutil::random_poly(laur, rng, 2, 2, true);
        ls.at(1) = testutil::random_poly(laur, rng, 2, 2, true);
        CHECK(parse_scalar(render(ls), &laur, 1) == ls);

        PolyVector lv(1);
        lv.at(0) = random_laurent_layer<VecTag>(laur, rng, 1);
        lv.at(1) = random_laurent_layer<VecTag>(laur, rng, 2);
        CHECK(parse_vector(render(lv), &laur, 1) == lv);

        DiffForm lf(1);
        lf.at(0) = random_laurent_layer<FormTag>(laur, rng, 2);
        lf.at(1) = random_laurent_layer<FormTag>(laur, rng, 1);
        CHECK(parse_form(render(lf), &laur, 1) == lf);
    }
}

TEST_CASE("cli jacobi certifies and reports violations") {
    auto ok = run_cli("jacobi --pi \"h*Dx^^Dy\" --format json");
    CHECK(ok.code == 0);
    json j = jout(ok);
    CHECK(j["schema"] == 1);
    CHECK(j["command"] == "jacobi");
    CHECK(j["ring"] == "x,y");
    CHECK(j["order"] == 3);
    CHECK(j["pi"] == "h*Dx^^Dy");
    CHECK(j["jacobi"] == true);
    CHECK(j["exit"] == 0);

    auto ord = run_cli("jacobi --pi \"h*Dx^^Dy\" --order 2 --format json");
    CHECK(jout(ord)["order"] == 2);

    auto bad = run_cli(
        "jacobi --ring x,y,z --pi \"h*(z*Dx^^Dy + x*Dy^^Dz + x*Dz^^Dx)\" --format json");
    CHECK(bad.code == 1);
    json b = jout(bad);
    CHECK(b["jacobi"] == false);
    CHECK(b["violation"]["order"] == 2);
    CHECK(b["violation"]["layer"] != "0");
    CHECK(b["exit"] == 1);

    // default format is aligned text
    auto text = run_cli("jacobi --pi \"h*Dx^^Dy\"");
    CHECK(text.code == 0);
    CHECK(contains(text.out, "command = jacobi"));
    CHECK(contains(text.out, "pi      = h*Dx^^Dy"));
    CHECK(contains(text.out, "jacobi  = true"));
}

TEST_CASE("cli modular verdicts and log-hamiltonian decomposition") {
    auto poly = run_cli("modular --pi \"h*y*Dx^^Dy\" --format json");
    CHECK(poly.code == 1);
    json p = jout(poly);
    CHECK(p["modular_field"] == "-h*Dx");
    CHECK(p["class_trivial"] == false);
    CHECK(p["obstruction"]["exhaustive"] == true);

    auto laur = run_cli("modular --invertible y --pi \"h*y*Dx^^Dy\" --format json");
    CHECK(laur.code == 0);
    json l = jout(laur);
    CHECK(l["invertible"] == "y");
    CHECK(l["class_trivial"] == true);
    CHECK(l["log_ham_witness"] == "y^-1");

    auto sympl = run_cli("modular --pi \"h*Dx^^Dy\" --format json");
    CHECK(sympl.code == 0);
    CHECK(jout(sympl)["modular_field"] == "0");

    // a degenerate volume is an input error, not a verdict
    auto dgn = run_cli("modular --pi \"h*Dx^^Dy\" --omega \"x*dx^^dy\"");
    CHECK(dgn.code == 2);
    CHECK(contains(dgn.out, "error:"));

    auto dec = run_cli("logham --invertible y --pi \"h*y*Dx^^Dy\" --field \"-h*Dx\" --format json");
    CHECK(dec.code == 0);
    json d = jout(dec);
    CHECK(d["decomposed"] == true);
    CHECK(d["unit"] == "y^-1");
    CHECK(d["check"] == true);

    auto stuck = run_cli("logham --pi \"h*y*Dx^^Dy\" --field \"-h*Dx\" --format json");
    CHECK(stuck.code == 1);
    json s = jout(stuck);
    CHECK(s["decomposed"] == false);
    CHECK(s["obstruction"]["exhaustive"] == true);
}

TEST_CASE("cli hamiltonian solve, unimodularity and hp slices") {
    auto ham = run_cli("hamiltonian --pi \"h*Dx^^Dy\" --field \"h*(x*Dx - y*Dy)\" --format json");
    CHECK(ham.code == 0);
    json h = jout(ham);
    CHECK(h["solved"] == true);
    CHECK(h["f"] == "x*y");
    CHECK(h["check"] == true);

    auto euler = run_cli("hamiltonian --pi \"h*Dx^^Dy\" --field \"h*(x*Dx + y*Dy)\" --format json");
    CHECK(euler.code == 1);
    json e = jout(euler);
    CHECK(e["solved"] == false);
    CHECK(e["obstruction"]["order"] == 1);
    CHECK(e["obstruction"]["exhaustive"] == true);

    auto uni = run_cli("unimodular --pi \"h*y*Dx^^Dy\" --format json");
    CHECK(uni.code == 1);
    json u = jout(uni);
    CHECK(u["witness_found"] == false);
    CHECK(u["residual"] == "-dy");

    auto uok = run_cli("unimodular --pi \"h*Dx^^Dy\" --format json");
    CHECK(uok.code == 0);
    json v = jout(uok);
    CHECK(v["invariant_volume"] == "dx^^dy");
    CHECK(v["lie_derivative_zero"] == true);

    auto hp1 = run_cli(
        "hp --pi \"h*y*Dx^^Dy\" --degree 1 --weight-lo -1 --weight-hi 0 --format json");
    CHECK(hp1.code == 0);
    json c = jout(hp1);
    CHECK(c["exhaustive"] == true);
    CHECK(c["slices"][0]["weight"] == -1);
    CHECK(c["slices"][0]["dim"] == 1);
    CHECK(c["slices"][0]["representatives"][0] == "Dx");
    CHECK(c["slices"][1]["weight"] == 0);
    CHECK(c["slices"][1]["dim"] == 0);

    auto hom = run_cli(
        "hp --pi \"h*Dx^^Dy\" --space homology --degree 2 --weight-lo 0 --weight-hi 3 "
        "--format json");
    CHECK(hom.code == 0);
    json m = jout(hom);
    for (int w = 0; w <= 3; ++w) CHECK(m["slices"][w]["dim"] == (w == 2 ? 1 : 0));
    CHECK(m["slices"][2]["representatives"][0] == "dx^^dy");

    auto deg2 = run_cli("hp --pi \"h*Dx^^Dy\" --degree 2");
    CHECK(deg2.code == 2);
    CHECK(contains(deg2.out, "error:"));
}

TEST_CASE("cli star products are deterministic and seeded") {
    std::string base = "star --pi \"h*Dx^^Dy\" --samples 5 --format json";
    auto moyal = run_cli(base);
    CHECK(moyal.code == 0);
    json j = jout(moyal);
    CHECK(j["provider"] == "moyal");
    CHECK(j["order"] == 4);
    CHECK(j["seed"] == 1);
    CHECK(j["product"] == "x*y + h*1/2");
    CHECK(j["commutator"] == "h");
    CHECK(j["checks"][0]["status"] == "pass");
    CHECK(j["checks"][1]["status"] == "pass");

    // byte-for-byte reproducibility
    auto again = run_cli(base);
    CHECK(again.out == moyal.out);

    CHECK(jout(run_cli(base, "POISSON_SEED=7"))["seed"] == 7);
    CHECK(jout(run_cli(base + " --seed 3", "POISSON_SEED=7"))["seed"] == 3);

    auto u2 = run_cli("star --provider universal2 --pi \"h*y*Dx^^Dy\" --samples 5 --format json");
    CHECK(u2.code == 0);
    json k = jout(u2);
    CHECK(k["order"] == 2);
    CHECK(k["product"] == "x*y + h*1/2*y");
    CHECK(k["commutator"] == "h*y");
    CHECK(k["checks"][0]["status"] == "pass");

    // provider guards surface as input errors
    auto wrong = run_cli("star --provider moyal --pi \"h*y*Dx^^Dy\"");
    CHECK(wrong.code == 2);
    CHECK(contains(wrong.out, "error:"));
    auto deep = run_cli("star --provider universal2 --order 3 --pi \"h*y*Dx^^Dy\"");
    CHECK(deep.code == 2);
    CHECK(contains(deep.out, "error:"));
}

TEST_CASE("cli derivation, lift and crossed product") {
    auto plain = run_cli(
        "derivation --provider universal2 --pi \"h*y*Dx^^Dy\" --field \"-h*Dx\" --format json");
    CHECK(plain.code == 0);
    json p = jout(plain);
    CHECK(p["certified"] == true);
    CHECK(p["correction_orders"] == 0);
    CHECK(p["generator_images"]["D(x)"] == "-h");
    CHECK(p["generator_images"]["D(y)"] == "0");

    auto conj = run_cli(
        "derivation --invertible x --pi \"h*Dx^^Dy\" --field \"h*x^-1*Dy\" --format json");
    CHECK(conj.code == 0);
    json c = jout(conj);
    CHECK(c["certified"] == true);
    CHECK(c["correction_orders"] == -1);

    auto notp = run_cli(
        "derivation --provider universal2 --pi \"h*y*Dx^^Dy\" --field \"h*x*Dx\"");
    CHECK(notp.code == 2);
    CHECK(contains(notp.out, "error:"));

    auto lift = run_cli("lift --invertible x --pi \"h*Dx^^Dy\" --base x --format json");
    CHECK(lift.code == 0);
    json l = jout(lift);
    CHECK(l["field"] == "h*x^-1*Dy");
    CHECK(l["lifted"] == "x");
    CHECK(l["conjugation_verified"] == true);

    auto nl = run_cli("lift --pi \"h*Dx^^Dy\" --base \"x + 1\"");
    CHECK(nl.code == 2);
    CHECK(contains(nl.out, "error:"));

    auto cro = run_cli(
        "crossed --provider universal2 --pi \"h*y*Dx^^Dy\" --samples 4 --format json");
    CHECK(cro.code == 0);
    json x = jout(cro);
    CHECK(x["modular_field"] == "-h*Dx");
    CHECK(x["derivation_certified"] == true);
    CHECK(x["lhs"] == "(x)");
    CHECK(x["rhs"] == "(y)*t^1");
    CHECK(x["product"] == "(x*y + h*1/2*y)*t^1");
    CHECK(x["t_conjugation"] == true);
    CHECK(x["checks"][0]["status"] == "pass");
    CHECK(x["checks"][1]["status"] == "pass");
}

TEST_CASE("cli examples bank and config files") {
    auto list = run_cli("examples list --format json");
    CHECK(list.code == 0);
    json names = jout(list)["available"];
    REQUIRE(names.size() == 4);
    CHECK(names[0] == "symplectic-plane");
    CHECK(names[1] == "axb-polynomial");
    CHECK(names[2] == "axb-laurent");
    CHECK(names[3] == "crossed-modular");

    auto all = run_cli("examples run --all --format json");
    CHECK(all.code == 0);
    for (const auto& e : jout(all)["results"]) CHECK(e["status"] == "pass");

    auto one = run_cli("examples run --name axb-laurent --format json");
    CHECK(one.code == 0);
    CHECK(jout(one)["results"][0]["name"] == "axb-laurent");

    auto noarg = run_cli("examples run");
    CHECK(noarg.code == 2);
    CHECK(contains(noarg.out, "pass run --all"));
    CHECK(run_cli("examples run --name nope").code == 2);

    std::string cfg = "/tmp/poismod_cli_test_cfg.txt";
    {
        std::ofstream f(cfg);
        f << "# session defaults\n";
        f << "order = 2\n";
        f << "format = \"json\"\n";
        f << "samples = 3\n";
    }
    auto viacfg = run_cli("jacobi --pi \"h*Dx^^Dy\" --config " + cfg);
    CHECK(viacfg.code == 0);
    CHECK(jout(viacfg)["order"] == 2);

    // explicit flags beat config values
    auto overrode = run_cli("jacobi --pi \"h*Dx^^Dy\" --config " + cfg + " --order 3");
    CHECK(jout(overrode)["order"] == 3);

    auto missing = run_cli("jacobi --pi \"h*Dx^^Dy\" --config /tmp/poismod_no_such_cfg");
    CHECK(missing.code == 2);
    CHECK(contains(missing.out, "cannot open"));
    std::remove(cfg.c_str());
}

TEST_CASE("cli usage and input errors exit 2") {
    CHECK(run_cli("").code == 2);
    CHECK(run_cli("jacobi").code == 2);
    CHECK(run_cli("jacobi --pi \"h*Dx^^Dy\" --bogus 1").code == 2);
    CHECK(run_cli("jacobi --pi \"h*Dx^^Dy\" --format yaml").code == 2);
    CHECK(run_cli("hp --pi \"h*Dx^^Dy\" --space middle").code == 2);

    auto diag = run_cli("jacobi --pi \"x + qq\"");
    CHECK(diag.code == 2);
    CHECK(contains(diag.out, "parse error: unknown name 'qq'"));
    CHECK(contains(diag.out, "^"));

    CHECK(run_cli("jacobi --pi x").code == 2);
    CHECK(run_cli("jacobi --pi \"Dx^^Dy\"").code == 2);
    CHECK(run_cli("jacobi --pi \"h*Dx\"").code == 2);

    auto reserved = run_cli("jacobi --ring h,x --pi \"h*Dh^^Dx\"");
    CHECK(reserved.code == 2);
    CHECK(contains(reserved.out, "'h' names the formal parameter"));
}
