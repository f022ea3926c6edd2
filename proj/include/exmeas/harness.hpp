#pragma once

#include <functional>
#include <string>
#include <vector>

#include "exmeas/core.hpp"
#include "exmeas/rng.hpp"
#include "exmeas/sampler.hpp"

namespace exmeas {

// Outcome of one statistical check. Reproducible under a fixed key; the
// decision is always consistent with (p_value, alpha), and degenerate
// (a.s. constant) statistics pass by convention with the marker set instead
// of emitting NaN p-values.
struct TestReport {
    std::string name;
    double statistic = 0.0;
    std::string null_ref;  // reference null distribution, e.g. "normal(0,1), two-sided"
    double p_value = 1.0;
    std::vector<long> sample_sizes;
    double alpha = 0.01;
    bool reject = false;
    bool degenerate = false;
    std::string note;
};

// A window sampler bound to everything but the replica key.
using WindowSampler = std::function<AdjacencyMeasureWindow(const RngKey&)>;

WindowSampler bind_sampler(Multigraphex mg, double s, TruncationConfig tc);
WindowSampler bind_sampler(KallenbergRep rep, double s, TruncationConfig tc);

// Deliberately non-exchangeable control: vertex intensity doubled on [0, a).
WindowSampler bind_skewed_sampler(Multigraphex mg, double s, double a, TruncationConfig tc);

// Two-component mixture: a fair coin per replica picks which multigraphex
// generates the window (a non-extreme configuration).
WindowSampler bind_mixture_sampler(Multigraphex a, Multigraphex b, double s,
                                   TruncationConfig tc);

// Exact multiset symmetry of the atom set under coordinate swap.
bool test_symmetry(const AdjacencyMeasureWindow& w);

// Distribution invariance under the interval swap [0,a) <-> [a,2a): compares
// rectangle masses of independent batches via rank tests over a fixed
// battery of four rectangle pairs (Bonferroni-combined decision). Windows
// must cover [0, 2a].
TestReport test_exchangeability(const WindowSampler& sampler, double a, int n_per_side,
                                double alpha, const RngKey& key);

// Extremality check: correlation between the masses of [0,r)^2 and [r,r')^2
// over independent replicas, z-tested against zero.
TestReport test_block_independence(const WindowSampler& sampler, double r, double rp, int n,
                                   double alpha, const RngKey& key);

// First-moment agreement of the multigraphex sampler with its quadrature
// prediction, part by part (off-diagonal pairs, loops, stars, dust).
TestReport campbell_check(const Multigraphex& mg, double s, double T, int n,
                          const RngKey& key);

// Mark-cap growth law of the built-in counter-example star kernel: mean
// one-orientation star mass in [0,1]^2 versus the cap T, with an LSQ slope
// (expected 1/2). Also usable with any replacement kernel.
struct GrowthRow {
    double mark_cap = 0.0;
    double mean_mass = 0.0;
    double std_error = 0.0;
};
struct GrowthResult {
    std::vector<GrowthRow> rows;
    double slope = 0.0;
};
GrowthResult star_mass_growth(const std::function<double(double, double)>& g,
                              const std::vector<double>& mark_caps, int n, const RngKey& key);
GrowthResult counterexample_demo(const std::vector<double>& mark_caps, int n,
                                 const RngKey& key);

// The counter-example star kernel as a parsed expression:
// x in [0,1], y in [0,1] u [2,3] u [4,5] u ...
std::function<double(double, double)> counterexample_star_kernel();
const char* counterexample_star_expression();

// Rank and correlation primitives (exposed for tests).
TestReport rank_two_sample(const std::vector<double>& a, const std::vector<double>& b,
                           double alpha, const std::string& name);
TestReport correlation_ztest(const std::vector<double>& a, const std::vector<double>& b,
                             double alpha, const std::string& name);
double lsq_slope(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace exmeas
