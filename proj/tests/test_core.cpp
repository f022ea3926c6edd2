#include <doctest.h>

#include <cmath>

#include "exmeas/config.hpp"
#include "exmeas/core.hpp"
#include "exmeas/dsl.hpp"
#include "exmeas/errors.hpp"
#include "exmeas/rng.hpp"

using namespace exmeas;

TEST_CASE("merge_atoms") {
    CHECK(merge_atoms({}).empty());

    auto merged = merge_atoms({{1, 2, 1}, {1, 2, 2}});
    REQUIRE(merged.size() == 1);
    CHECK(merged[0].weight == 3.0);

    auto distinct = merge_atoms({{1, 2, 1}, {2, 1, 1}});
    CHECK(distinct.size() == 2);

    // Total mass is preserved.
    auto mixed = merge_atoms({{3, 4, 2}, {1, 1, 1}, {3, 4, 0.5}, {0, 2, 3}});
    double total = 0.0;
    for (const Atom& a : mixed) total += a.weight;
    CHECK(total == doctest::Approx(6.5));
    CHECK(mixed.size() == 3);
}

TEST_CASE("window_mass") {
    AdjacencyMeasureWindow empty;
    empty.window = 1.0;
    CHECK(window_mass(empty) == 0.0);

    AdjacencyMeasureWindow w;
    w.window = 1.0;
    w.diag_mass = std::sqrt(2.0);  // beta = 1 on a unit window
    w.plane_mass = 1.0;            // gamma = 1
    CHECK(window_mass(w) == doctest::Approx(std::sqrt(2.0) + 1.0).epsilon(1e-12));
    CHECK(window_mass(w) == doctest::Approx(2.41421356).epsilon(1e-6));

    AdjacencyMeasureWindow atoms;
    atoms.window = 1.0;
    atoms.atoms = {{0.1, 0.2, 3}, {0.5, 0.6, 2}};
    CHECK(window_mass(atoms) == doctest::Approx(5.0));
}

TEST_CASE("mass additivity over disjoint atom sets") {
    RandomStream rs = RngKey(8).stream();
    AdjacencyMeasureWindow a, b, u;
    a.window = b.window = u.window = 1.0;
    for (int i = 0; i < 50; ++i) {
        Atom atom{rs.next_uniform(), rs.next_uniform(), 1.0 + (rs.next_u64() % 3)};
        if (i % 2) {
            a.atoms.push_back(atom);
        } else {
            b.atoms.push_back(atom);
        }
        u.atoms.push_back(atom);
    }
    CHECK(window_mass(u) == doctest::Approx(window_mass(a) + window_mass(b)));
}

TEST_CASE("mass_in_rect handles atoms and continuous parts") {
    AdjacencyMeasureWindow w;
    w.window = 2.0;
    w.atoms = {{0.5, 0.5, 2}, {1.5, 0.5, 1}};
    w.diag_mass = 2.0 * std::sqrt(2.0);         // beta = 1, s = 2
    w.plane_mass = 4.0;                         // gamma = 1
    w.line_masses = {{0.5, LineOrientation::Row, 2.0}};

    // Full window recovers everything.
    CHECK(w.mass_in_rect(0, 2, 0, 2) == doctest::Approx(window_mass(w)));
    // [0,1]^2: one atom of weight 2, half the diagonal, a quarter of the
    // plane, half of the row line at x = 0.5.
    CHECK(w.mass_in_rect(0, 1, 0, 1) ==
          doctest::Approx(2.0 + std::sqrt(2.0) + 1.0 + 1.0));
    // A rectangle missing the line coordinate.
    CHECK(w.mass_in_rect(1, 2, 0, 1) == doctest::Approx(1.0 + 1.0));
}

TEST_CASE("Poisson W kernel row sums stay within 1e-9 plus the tail bound") {
    auto mean = [](double x, double y) { return std::exp(-x - y); };
    PoissonWKernel W(mean);
    RandomStream rs = RngKey(55).stream();
    for (int probe = 0; probe < 1000; ++probe) {
        double x = rs.next_uniform(0.0, 5.0);
        double y = rs.next_uniform(0.0, 5.0);
        const std::int64_t kmax = 40;
        double row = W.prefix_row_sum(x, y, kmax);
        double tail = W.tail_bound(x, y, kmax);
        CHECK(std::abs(row + tail - 1.0) <= 1e-9);
        CHECK(std::abs(row - 1.0) <= 1e-9 + tail);
    }
    CHECK(W.mean_multiplicity(1.0, 2.0) == doctest::Approx(std::exp(-3.0)));
    CHECK(W.edge_prob(0.0, 0.0) == doctest::Approx(1.0 - std::exp(-1.0)));
}

TEST_CASE("table W kernel normalizes slot zero and rejects bad remainders") {
    dsl::Expr pmf = dsl::parse_or_throw("0.3*ind(k,2,2)");
    TableWKernel W(
        [&pmf](double x, double y, double k) {
            return pmf.eval(dsl::Env::with_xy(x, y).set('k', k));
        },
        3);
    CHECK(W.pmf(0.5, 0.5, 0) == doctest::Approx(0.7));
    CHECK(W.pmf(0.5, 0.5, 2) == doctest::Approx(0.3));
    CHECK(W.pmf(0.5, 0.5, 1) == doctest::Approx(0.0));
    CHECK(W.edge_prob(0.5, 0.5) == doctest::Approx(0.3));
    CHECK(W.mean_multiplicity(0.5, 0.5) == doctest::Approx(0.6));
    CHECK(W.sample(0.5, 0.5, 0.69) == 0);
    CHECK(W.sample(0.5, 0.5, 0.71) == 2);

    // Slot zero is the normalizing remainder, so prefix row sums are exact.
    RandomStream rs = RngKey(19).stream();
    for (int probe = 0; probe < 100; ++probe) {
        double x = rs.next_uniform(0.0, 4.0), y = rs.next_uniform(0.0, 4.0);
        CHECK(std::abs(W.prefix_row_sum(x, y, 3) - 1.0) <= 1e-12);
    }

    dsl::Expr over = dsl::parse_or_throw("0.8");
    TableWKernel bad(
        [&over](double x, double y, double k) {
            return over.eval(dsl::Env::with_xy(x, y).set('k', k));
        },
        2);
    CHECK_THROWS_AS(bad.pmf(0.1, 0.1, 0), NegativeValueError);
}

TEST_CASE("verdict assembly enforces the structural invariants") {
    ConditionEvidence ok;
    ok.id = "(i)";
    ok.status = ConditionStatus::Satisfied;
    ConditionEvidence bad;
    bad.id = "(ii)";
    bad.status = ConditionStatus::Violated;
    bad.witness = "marginal infinite on a unit-measure set";
    ConditionEvidence open;
    open.id = "(iii)";
    open.status = ConditionStatus::Inconclusive;

    CHECK(make_verdict({ok}).status == FinitenessStatus::LocallyFinite);
    CHECK(make_verdict({ok, bad}).status == FinitenessStatus::NotLocallyFinite);
    CHECK(make_verdict({ok, open}).status == FinitenessStatus::Inconclusive);

    ConditionEvidence no_witness;
    no_witness.id = "(ii)";
    no_witness.status = ConditionStatus::Violated;
    CHECK_THROWS_AS(make_verdict({no_witness}), Error);
}
