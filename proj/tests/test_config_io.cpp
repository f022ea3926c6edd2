#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "exmeas/commands.hpp"
#include "exmeas/config.hpp"
#include "exmeas/errors.hpp"
#include "exmeas/io.hpp"

using namespace exmeas;

namespace {

const std::string kDataDir = EXMEAS_TEST_DATA_DIR;

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

struct TempPath {
    std::string path;
    explicit TempPath(const std::string& name) : path("/tmp/exmeas_test_" + name) {}
    ~TempPath() {
        std::remove(path.c_str());
        std::remove((path + ".summary.json").c_str());
    }
};

}  // namespace

TEST_CASE("config parsing: counter-example file") {
    ModelConfig cfg = load_model_config(kDataDir + "/counterexample.cfg");
    CHECK(cfg.mode == ModelConfig::Mode::Kallenberg);
    CHECK(cfg.g == "ind(x,0,1)*ind(mod(floor(y),2),0,0)");
    CHECK(cfg.truncation.mark_cap == 20.0);
    KallenbergRep rep = build_kallenberg(cfg);
    CHECK(rep.g(0.5, 2.5) == 1.0);
    CHECK(rep.g(0.5, 1.5) == 0.0);
    CHECK(!rep.f);
    CHECK(!rep.l);
}

TEST_CASE("config parsing: multigraphex families") {
    ModelConfig cfg = parse_model_config(
        "[model]\n"
        "mode = multigraphex\n"
        "W = poisson_pmf(mean=\"exp(-x-y)\")\n"
        "S = prefix(expr=\"2*ind(v,0,1)*ind(k,1,1)\", kmax=2, tail=0.25)\n"
        "I = 0, 0.5, 0.125\n"
        "I_tail = 0.001\n"
        "[truncation]\n"
        "mark_cap = 15\n"
        "max_latent_points = 500\n",
        "inline");
    Multigraphex mg = build_multigraphex(cfg);
    REQUIRE(mg.W);
    CHECK(mg.W->mean_multiplicity(1.0, 1.0) == doctest::Approx(std::exp(-2.0)));
    REQUIRE(mg.S);
    CHECK(mg.S->value(0.5, 1) == doctest::Approx(2.0));
    CHECK(mg.S->value(2.0, 1) == doctest::Approx(0.0));
    CHECK(mg.S->tail_bound() == 0.25);
    CHECK(mg.I.weights.size() == 3);
    CHECK(mg.I.mean_mass() == doctest::Approx(0.5 + 2 * 0.125));
    CHECK(cfg.truncation.max_latent_points == 500);
}

TEST_CASE("config errors: syntax, arity, mode mismatches") {
    CHECK_THROWS_AS(load_model_config("/nonexistent/path.cfg"), ConfigError);
    CHECK_THROWS_AS(parse_model_config("[model]\n", "x"), ConfigError);  // no mode
    CHECK_THROWS_AS(parse_model_config("mode = kallenberg\n", "x"), ConfigError);
    CHECK_THROWS_AS(
        parse_model_config("[model]\nmode = kallenberg\ng = \"ind(v,0,1)\"\n", "x"),
        ConfigError);  // v not allowed in g
    CHECK_THROWS_AS(
        parse_model_config("[model]\nmode = kallenberg\nf = \"1/(1+x\"\n", "x"),
        ConfigError);  // parse error
    CHECK_THROWS_AS(
        parse_model_config("[model]\nmode = kallenberg\nW = poisson_pmf(mean=\"1\")\n", "x"),
        ConfigError);  // W in kallenberg mode
    CHECK_THROWS_AS(
        parse_model_config("[model]\nmode = multigraphex\ng = \"ind(x,0,1)\"\n", "x"),
        ConfigError);  // g in multigraphex mode
    CHECK_THROWS_AS(parse_model_config("[model]\nmode = multigraphex\nbogus = 1\n", "x"),
                    ConfigError);
}

TEST_CASE("formatting helpers") {
    CHECK(fmt_shortest(1.0) == "1");
    CHECK(fmt_shortest(0.5) == "0.5");
    CHECK(fmt_real17(1.0) == "1");
    // 17 significant digits round-trip the bit pattern.
    double v = 0.1 + 0.2;
    CHECK(fmt_real17(v) == "0.30000000000000004");
}

TEST_CASE("atoms TSV layout") {
    AdjacencyMeasureWindow w;
    w.window = 2.0;
    w.atoms = {{0.5, 1.0, 2.0}, {1.0, 0.5, 2.0}};
    std::ostringstream os;
    write_atoms_tsv(os, w, 42, 7.5);
    CHECK(os.str() ==
          "# exmeas-atoms v1 window=2 seed=42 mark_cap=7.5\n"
          "0.5\t1\t2\n"
          "1\t0.5\t2\n");
}

TEST_CASE("cmd_sample: zero config writes a header-only file and returns 0") {
    TempPath out("zero.tsv");
    SampleArgs args;
    args.config_path = kDataDir + "/zero_kallenberg.cfg";
    args.window = 1.0;
    args.seed = 5;
    args.out_path = out.path;
    std::ostringstream sink, err;
    CHECK(cmd_sample(args, sink, err) == 0);
    CHECK(slurp(out.path) == "# exmeas-atoms v1 window=1 seed=5 mark_cap=10\n");
    CHECK(slurp(out.path + ".summary.json").find("\"total_mass\": 0.0") != std::string::npos);
}

TEST_CASE("cmd_sample: same config and seed is byte-identical; seeds differ") {
    TempPath out1("a.tsv"), out2("b.tsv"), out3("c.tsv");
    SampleArgs args;
    args.config_path = kDataDir + "/poisson_family.cfg";
    args.window = 1.5;
    args.seed = 99;
    std::ostringstream sink, err;
    args.out_path = out1.path;
    REQUIRE(cmd_sample(args, sink, err) == 0);
    args.out_path = out2.path;
    REQUIRE(cmd_sample(args, sink, err) == 0);
    CHECK(slurp(out1.path) == slurp(out2.path));
    CHECK(slurp(out1.path + ".summary.json") == slurp(out2.path + ".summary.json"));
    args.seed = 100;
    args.out_path = out3.path;
    REQUIRE(cmd_sample(args, sink, err) == 0);
    CHECK(slurp(out1.path) != slurp(out3.path));
}

TEST_CASE("cmd_sample exit codes: config error 2, resource cap 3") {
    std::ostringstream sink, err;
    SampleArgs bad;
    bad.config_path = "/nonexistent.cfg";
    CHECK(cmd_sample(bad, sink, err) == 2);

    SampleArgs ce;
    ce.config_path = kDataDir + "/counterexample_small_caps.cfg";
    std::ostringstream err2;
    CHECK(cmd_sample(ce, sink, err2) == 3);
    CHECK(err2.str().find("condition (ii)") != std::string::npos);
}

TEST_CASE("cmd_certify exit codes and JSON output") {
    std::ostringstream out, err;
    CertifyArgs zero;
    zero.config_path = kDataDir + "/zero_kallenberg.cfg";
    CHECK(cmd_certify(zero, out, err) == 0);

    CertifyArgs ce;
    ce.config_path = kDataDir + "/counterexample.cfg";
    ce.json = true;
    std::ostringstream json_out;
    CHECK(cmd_certify(ce, json_out, err) == 4);
    CHECK(json_out.str().find("\"(ii)\"") != std::string::npos);
    CHECK(json_out.str().find("violated") != std::string::npos);
    CHECK(json_out.str().find("NotLocallyFinite") != std::string::npos);

    CertifyArgs pf;
    pf.config_path = kDataDir + "/poisson_family.cfg";
    std::ostringstream table;
    CHECK(cmd_certify(pf, table, err) == 0);
    CHECK(table.str().find("(b)") != std::string::npos);
}

TEST_CASE("cmd_certify: unresolvable tails exit 5 (Inconclusive)") {
    CertifyArgs args;
    args.config_path = kDataDir + "/slow_convergent.cfg";
    std::ostringstream out, err;
    CHECK(cmd_certify(args, out, err) == 5);
    CHECK(out.str().find("Inconclusive") != std::string::npos);

    // The same gate keeps cmd_verify from sampling.
    VerifyArgs verify;
    verify.config_path = kDataDir + "/slow_convergent.cfg";
    verify.samples = 10;
    std::ostringstream vout, verr;
    CHECK(cmd_verify(verify, vout, verr) == 5);
}

TEST_CASE("cmd_demo: single zero cap and reproducibility") {
    DemoArgs args;
    args.mark_caps = {0.0};
    args.samples = 5;
    std::ostringstream out, err;
    CHECK(cmd_demo(args, out, err) == 0);
    CHECK(out.str().find("0,0,0") != std::string::npos);

    DemoArgs fixed;
    fixed.mark_caps = {4.0, 8.0};
    fixed.samples = 40;
    fixed.seed = 7;
    std::ostringstream run1, run2;
    CHECK(cmd_demo(fixed, run1, err) == 0);
    CHECK(cmd_demo(fixed, run2, err) == 0);
    CHECK(run1.str() == run2.str());
}

TEST_CASE("cmd_verify: gate failure on the counter-example, pass on dust") {
    std::ostringstream out, err;
    VerifyArgs gate;
    gate.config_path = kDataDir + "/counterexample.cfg";
    gate.samples = 50;
    CHECK(cmd_verify(gate, out, err) == 4);

    VerifyArgs dust;
    dust.config_path = kDataDir + "/dust_only.cfg";
    dust.samples = 400;
    std::ostringstream out2;
    CHECK(cmd_verify(dust, out2, err) == 0);
    CHECK(out2.str().find("LocallyFinite") != std::string::npos);
}
