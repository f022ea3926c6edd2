#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "exmeas/errors.hpp"
#include "exmeas/harness.hpp"
#include "exmeas/poisson.hpp"
#include "exmeas/rng.hpp"

using namespace exmeas;

TEST_CASE("fixed key reproduces the identical point list") {
    RngKey key(123);
    MarkedPoints a = sample_unit_pp(key.child(1, 7), 2.0, 3.0);
    MarkedPoints b = sample_unit_pp(key.child(1, 7), 2.0, 3.0);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].position == b[i].position);
        CHECK(a[i].mark == b[i].mark);
    }
    for (const MarkedPoint& p : a) {
        CHECK(p.position >= 0.0);
        CHECK(p.position <= 2.0);
        CHECK(p.mark >= 0.0);
        CHECK(p.mark <= 3.0);
    }
}

TEST_CASE("sibling paths differ; draws look independent (chi-square)") {
    RngKey key(99);
    CHECK(key.child(3, 0).derive() != key.child(3, 1).derive());
    CHECK(key.child(3, 0).derive() != key.child(4, 0).derive());
    // 4x4 contingency table over 1e4 paired draws; margins estimated, df 9.
    RandomStream a = key.child(3, 0).stream();
    RandomStream b = key.child(3, 1).stream();
    const int n = 10000;
    int counts[4][4] = {};
    int row[4] = {}, col[4] = {};
    for (int i = 0; i < n; ++i) {
        int ra = std::min(3, static_cast<int>(a.next_uniform() * 4.0));
        int rb = std::min(3, static_cast<int>(b.next_uniform() * 4.0));
        ++counts[ra][rb];
        ++row[ra];
        ++col[rb];
    }
    double chi2 = 0.0;
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) {
            double expected = static_cast<double>(row[i]) * col[j] / n;
            chi2 += (counts[i][j] - expected) * (counts[i][j] - expected) / expected;
        }
    CHECK(chi2 < 21.666);  // chi-square(9) critical value at alpha = 0.01
}

TEST_CASE("vanishing area gives an empty list") {
    CHECK(sample_unit_pp(RngKey(5), 1.0, 1e-12).empty());
    CHECK(sample_triple_pp(RngKey(5), 1.0, 0.0).empty());
}

TEST_CASE("resource guard rejects absurd boxes") {
    CHECK_THROWS_AS(sample_unit_pp(RngKey(1), 1e6, 1e6), ResourceLimitError);
    CHECK_THROWS_AS(sample_triple_pp(RngKey(1), 1e5, 1e5), ResourceLimitError);
}

TEST_CASE("Poisson mean over 1e4 draws matches s*T within 3 sigma") {
    // Monte Carlo oracle: counts are Poisson(s*T), so the sample mean lies
    // within 3*sqrt(mean/n) of s*T for all but ~0.3% of seeds.
    RngKey key(2024);
    const int n = 10000;
    double total = 0.0;
    for (int i = 0; i < n; ++i)
        total += static_cast<double>(sample_unit_pp(key.child(2, i), 2.0, 3.0).size());
    double mean = total / n;
    CHECK(std::abs(mean - 6.0) <= 3.0 * std::sqrt(6.0 / n));

    double total3 = 0.0;
    for (int i = 0; i < n; ++i)
        total3 += static_cast<double>(sample_triple_pp(key.child(3, i), 1.0, 2.0).size());
    double mean3 = total3 / n;
    CHECK(std::abs(mean3 - 2.0) <= 3.0 * std::sqrt(2.0 / n));
}

TEST_CASE("Poisson sampler is exact across the inversion/rejection boundary") {
    // Means and variances on both sides of the mean-30 switch.
    RngKey key(77);
    for (double mean : {25.0, 40.0}) {
        RandomStream rs = key.child(9, static_cast<std::uint64_t>(mean)).stream();
        const int n = 20000;
        double sum = 0.0, sumsq = 0.0;
        for (int i = 0; i < n; ++i) {
            double k = static_cast<double>(rs.next_poisson(mean));
            sum += k;
            sumsq += k * k;
        }
        double m = sum / n;
        double var = sumsq / n - m * m;
        CHECK(std::abs(m - mean) <= 4.0 * std::sqrt(mean / n));
        CHECK(std::abs(var - mean) <= 0.1 * mean);
    }
}

TEST_CASE("inverse_cdf examples") {
    std::vector<double> half{0.5, 0.5};
    CHECK(inverse_cdf(half, 0.25) == 0);
    CHECK(inverse_cdf(half, 0.75) == 1);
    CHECK(inverse_cdf(half, 0.5) == 1);  // half-open tie rule

    std::vector<double> w{0.3, 0.7};
    CHECK(inverse_cdf(w, 0.5) == 1);
    CHECK(!inverse_cdf(w, 1.5).has_value());  // beyond the total: no atom

    std::vector<double> neg{0.3, -0.1};
    CHECK_THROWS_AS(inverse_cdf(neg, 0.9), NegativeValueError);
}

TEST_CASE("inverse_cdf frequencies match the weights (multinomial oracle)") {
    std::vector<double> w{0.2, 0.3, 0.5};
    RandomStream rs = RngKey(31).stream();
    const int n = 100000;
    int counts[3] = {};
    for (int i = 0; i < n; ++i) {
        auto r = inverse_cdf(w, rs.next_uniform());
        REQUIRE(r.has_value());
        ++counts[*r];
    }
    for (int k = 0; k < 3; ++k) {
        double expected = w[static_cast<std::size_t>(k)] * n;
        double sigma = std::sqrt(expected * (1.0 - w[static_cast<std::size_t>(k)]));
        CHECK(std::abs(counts[k] - expected) <= 3.0 * sigma);
    }
}

TEST_CASE("inverse_cdf is monotone in u") {
    std::vector<double> w{0.1, 0.0, 0.4, 0.2};
    double prev = -1.0;
    for (double u = 0.0; u < 0.7; u += 0.001) {
        auto r = inverse_cdf(w, u);
        REQUIRE(r.has_value());
        CHECK(static_cast<double>(*r) >= prev);
        prev = static_cast<double>(*r);
    }
}

TEST_CASE("restriction coupling: filtered big box matches direct small box in law") {
    // Not an exact coupling claim; a rank test on counts at alpha = 0.01.
    RngKey key(404);
    const int n = 2000;
    std::vector<double> filtered, direct;
    for (int i = 0; i < n; ++i) {
        MarkedPoints big = sample_unit_pp(key.child(1, i), 2.0, 4.0);
        double count = 0.0;
        for (const MarkedPoint& p : big)
            if (p.position <= 1.5 && p.mark <= 2.0) count += 1.0;
        filtered.push_back(count);
        direct.push_back(static_cast<double>(sample_unit_pp(key.child(2, i), 1.5, 2.0).size()));
    }
    TestReport r = rank_two_sample(filtered, direct, 0.01, "restriction coupling");
    CHECK(!r.reject);
}
