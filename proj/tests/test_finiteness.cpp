#include <doctest.h>

#include <cmath>

#include "exmeas/errors.hpp"
#include "exmeas/finiteness.hpp"
#include "exmeas/harness.hpp"
#include "exmeas/sampler.hpp"

using namespace exmeas;

TEST_CASE("psi values and the sandwich inequality") {
    CHECK(psi(0.0) == 0.0);
    CHECK(psi(std::log(2.0)) == doctest::Approx(0.5));
    CHECK_THROWS_AS(psi(-0.1), NegativeValueError);

    RandomStream rs = RngKey(11).stream();
    bool sandwich_ok = true;
    for (int i = 0; i < 100000; ++i) {
        double x = rs.next_uniform(1e-12, 100.0);
        double p = psi(x);
        double hat = std::min(x, 1.0);
        // 1 - e^{-x} rounds to 1.0 in double precision past x ~ 37, so the
        // comparison is <= rather than strict.
        sandwich_ok = sandwich_ok && p >= 0.5 * hat && p <= hat;
    }
    CHECK(sandwich_ok);
}

TEST_CASE("linear classifier on the worked examples") {
    CertifyConfig cfg;
    CHECK(poisson_linear_classify([](double x) { return std::exp(-x); }, cfg).result ==
          Classification::FiniteAS);
    CHECK(poisson_linear_classify([](double x) { return 1.0 / (1.0 + x); }, cfg).result ==
          Classification::InfiniteAS);
    CHECK(poisson_linear_classify([](double) { return 0.0; }, cfg).result ==
          Classification::FiniteAS);
}

TEST_CASE("quadratic classifier on the worked examples") {
    CertifyConfig cfg;
    CHECK(poisson_quadratic_classify([](double, double) { return 0.0; }, cfg).result ==
          Classification::FiniteAS);

    // Unit box: clauses evaluate to (0, 0, 1, 1) in closed form.
    QuadraticClassifyResult box = poisson_quadratic_classify(
        [](double x, double y) { return (x <= 1.0 && y <= 1.0) ? 1.0 : 0.0; }, cfg);
    CHECK(box.result == Classification::FiniteAS);
    REQUIRE(box.clauses.size() == 4);
    CHECK(box.clauses[0].estimate == doctest::Approx(0.0));
    CHECK(box.clauses[1].estimate == doctest::Approx(0.0));
    CHECK(box.clauses[2].estimate == doctest::Approx(1.0).epsilon(1e-3));
    CHECK(box.clauses[3].estimate == doctest::Approx(1.0).epsilon(1e-3));

    // Half-strip: the first marginal is infinite on [0,1].
    QuadraticClassifyResult strip = poisson_quadratic_classify(
        [](double x, double) { return x <= 1.0 ? 1.0 : 0.0; }, cfg);
    CHECK(strip.result == Classification::InfiniteAS);
    CHECK(strip.clauses[0].status == ConditionStatus::Violated);
}

TEST_CASE("certify_kallenberg: all-zero representation is locally finite") {
    Verdict v = certify_kallenberg(KallenbergRep{});
    CHECK(v.status == FinitenessStatus::LocallyFinite);
    CHECK(v.evidence.size() == 6);
}

TEST_CASE("certify_kallenberg: the counter-example violates condition (ii)") {
    KallenbergRep rep;
    rep.g = counterexample_star_kernel();
    rep.g_prime = rep.g;
    Verdict v = certify_kallenberg(rep);
    CHECK(v.status == FinitenessStatus::NotLocallyFinite);
    const ConditionEvidence* c2 = v.find("(ii)");
    REQUIRE(c2 != nullptr);
    CHECK(c2->status == ConditionStatus::Violated);
    CHECK(c2->witness.find("g1") != std::string::npos);
    // The infinity set is [0,1]: measure ~ 1 at every cutoff.
    REQUIRE(c2->cutoff_measures.size() == 6);
    for (auto [cutoff, measure] : c2->cutoff_measures) {
        CHECK(measure >= 0.99);
        CHECK(measure <= 1.01);
    }
    // (iii) is only defined once (ii) holds.
    CHECK(v.find("(iii)")->status == ConditionStatus::Skipped);
}

TEST_CASE("certify_kallenberg: indicator edge kernel is locally finite") {
    KallenbergRep rep;
    rep.f = [](double x, double y, double) { return (x <= 1.0 && y <= 1.0) ? 1.0 : 0.0; };
    rep.f_symmetric = true;
    Verdict v = certify_kallenberg(rep);
    CHECK(v.status == FinitenessStatus::LocallyFinite);
    CHECK(v.find("(iv)")->estimate == doctest::Approx(0.0));
    CHECK(v.find("(v)")->estimate == doctest::Approx(1.0).epsilon(1e-3));
    CHECK(v.find("(vi)")->estimate == doctest::Approx(1.0).epsilon(1e-3));
}

TEST_CASE("correction soundness: an infinite star marginal never certifies finite") {
    // Variants of the counter-example with scaled supports; each has an
    // infinite first marginal on a positive-measure set.
    for (double stretch : {1.0, 0.5, 2.0}) {
        KallenbergRep rep;
        rep.g = [stretch](double x, double y) {
            if (x > stretch) return 0.0;
            return std::fmod(std::floor(y), 2.0) == 0.0 ? 1.0 : 0.0;
        };
        Verdict v = certify_kallenberg(rep);
        CHECK(v.status != FinitenessStatus::LocallyFinite);
    }
}

TEST_CASE("certify_multigraphex: zero and Poisson-family models") {
    CHECK(certify_multigraphex(Multigraphex{}).status == FinitenessStatus::LocallyFinite);

    Multigraphex mg;
    mg.W = std::make_shared<PoissonWKernel>(
        [](double x, double y) { return std::exp(-x - y); });
    Verdict v = certify_multigraphex(mg);
    CHECK(v.status == FinitenessStatus::LocallyFinite);
    // Independent coarse Riemann oracle for (b): iint (1 - exp(-exp(-x-y))).
    double oracle = 0.0;
    const int grid = 600;
    const double span = 30.0, h = span / grid;
    for (int i = 0; i < grid; ++i)
        for (int j = 0; j < grid; ++j) {
            double x = (i + 0.5) * h, y = (j + 0.5) * h;
            oracle += (1.0 - std::exp(-std::exp(-x - y))) * h * h;
        }
    CHECK(v.find("(b)")->estimate == doctest::Approx(oracle).epsilon(1e-3));
    CHECK(v.find("(b)")->estimate <= 1.0);
    CHECK(v.find("(c)")->estimate == doctest::Approx(0.3983).epsilon(1e-3));
}

TEST_CASE("certify_multigraphex: x-slab edge probability violates (a)") {
    // 1 - W(x,y,0) = ind(x,0,1) ignoring y: mu_W is infinite on [0,1].
    Multigraphex mg;
    mg.W = std::make_shared<TableWKernel>(
        [](double x, double, double k) { return (k == 1.0 && x <= 1.0) ? 1.0 : 0.0; }, 1);
    Verdict v = certify_multigraphex(mg);
    CHECK(v.status == FinitenessStatus::NotLocallyFinite);
    const ConditionEvidence* a = v.find("(a)");
    REQUIRE(a != nullptr);
    CHECK(a->status == ConditionStatus::Violated);
    CHECK(a->estimate == doctest::Approx(1.0).epsilon(1e-2));
}

TEST_CASE("marginal symmetry for a symmetric edge kernel") {
    KallenbergRep rep;
    rep.f = [](double x, double y, double) { return std::exp(-x - y); };
    rep.f_symmetric = true;
    Marginals m = make_marginals(rep);
    RandomStream rs = RngKey(12).stream();
    for (int i = 0; i < 100; ++i) {
        double x = rs.next_uniform(0.0, 4.0);
        quad::IntegralEstimate f1 = m.f1(x);
        quad::IntegralEstimate f2 = m.f2(x);
        REQUIRE(f1.converged());
        REQUIRE(f2.converged());
        CHECK(f1.value == doctest::Approx(f2.value).epsilon(1e-3));
        CHECK(f1.value == doctest::Approx(std::exp(-x)).epsilon(1e-3));
    }
    CHECK(m.f_hat3(0.3, 0.4) == doctest::Approx(std::exp(-0.7)).epsilon(1e-6));
}

TEST_CASE("multigraphex marginal mu_W matches the nested-integral oracle") {
    // mu_W(x) = int (1 - exp(-exp(-x-y))) dy; frozen values from independent
    // adaptive quadrature of the same integrand.
    Multigraphex mg;
    mg.W = std::make_shared<PoissonWKernel>(
        [](double x, double y) { return std::exp(-x - y); });
    Marginals m = make_marginals(mg);
    struct Probe {
        double x, expected;
    };
    for (Probe p : {Probe{0.0, 0.7965995992970537}, Probe{1.0, 0.33663146166986346},
                    Probe{2.5, 0.08043077200862885}}) {
        quad::IntegralEstimate est = m.mu_W(p.x);
        REQUIRE(est.converged());
        CHECK(est.value == doctest::Approx(p.expected).epsilon(1e-5));
    }
}

TEST_CASE("summability oracle on the worked examples") {
    RngKey key(2025);

    // Z_j = point mass at 2^-j (j from 0): sum of E[1 ^ Z] = 2.
    std::vector<DiscreteDist> geometric;
    for (int j = 0; j < 256; ++j)
        geometric.push_back({{{std::pow(2.0, -j), 1.0}}});
    SummabilityReport geo = summability_oracle(geometric, 200, key.child(1));
    CHECK(geo.predicted == quad::Verdict::Converged);
    CHECK(geo.expectation_partials.back() == doctest::Approx(2.0).epsilon(1e-9));
    CHECK(geo.empirical_mean.back() == doctest::Approx(2.0).epsilon(1e-9));

    // Z_j ~ Bernoulli(1/j): sum E[1 ^ Z] = harmonic series.
    std::vector<DiscreteDist> bernoulli;
    for (int j = 1; j <= 4096; ++j)
        bernoulli.push_back({{{1.0, 1.0 / j}, {0.0, 1.0 - 1.0 / j}}});
    SummabilityReport ber = summability_oracle(bernoulli, 200, key.child(2));
    CHECK(ber.predicted == quad::Verdict::Diverging);
    // Empirical partial sums keep growing with the term count.
    CHECK(ber.empirical_mean.back() > ber.empirical_mean[ber.empirical_mean.size() / 2]);

    // Z_j = 0: converges trivially.
    std::vector<DiscreteDist> zero(32, DiscreteDist{{{0.0, 1.0}}});
    SummabilityReport z = summability_oracle(zero, 50, key.child(3));
    CHECK(z.predicted == quad::Verdict::Converged);
    CHECK(z.empirical_mean.back() == 0.0);
}

TEST_CASE("sampling consistency: certified models stay flat, the counter-example grows") {
    // Locally finite battery: mean window mass must not trend with the cap.
    const std::vector<double> caps{10.0, 20.0, 40.0, 80.0};
    RngKey key(6021);

    KallenbergRep finite;
    finite.g = [](double x, double y) { return (x <= 1.0 && y <= 1.0) ? 1.0 : 0.0; };
    finite.g_prime = finite.g;
    REQUIRE(certify_kallenberg(finite).status == FinitenessStatus::LocallyFinite);
    GrowthResult flat = star_mass_growth(
        [&](double x, double y) { return finite.g(x, y); }, caps, 500, key.child(1));
    // Slope z-test against zero: reuse the per-cap standard errors.
    double se2 = 0.0, den = 0.0, tbar = 0.0;
    for (const GrowthRow& r : flat.rows) tbar += r.mark_cap / flat.rows.size();
    for (const GrowthRow& r : flat.rows) {
        den += (r.mark_cap - tbar) * (r.mark_cap - tbar);
        se2 += (r.mark_cap - tbar) * (r.mark_cap - tbar) * r.std_error * r.std_error;
    }
    double slope_se = std::sqrt(se2) / den;
    CHECK(std::abs(flat.slope) <= 2.575 * slope_se);  // alpha = 0.01
    for (const GrowthRow& r : flat.rows)
        CHECK(std::abs(r.mean_mass - 1.0) <= 3.0 * r.std_error);

    GrowthResult growing = counterexample_demo(caps, 500, key.child(2));
    double gse2 = 0.0;
    for (const GrowthRow& r : growing.rows)
        gse2 += (r.mark_cap - tbar) * (r.mark_cap - tbar) * r.std_error * r.std_error;
    double gslope_se = std::sqrt(gse2) / den;
    CHECK(growing.slope > 2.575 * gslope_se);  // significantly positive
    CHECK(growing.slope == doctest::Approx(0.5).epsilon(0.15));
}
