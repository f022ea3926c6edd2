#pragma once

#include <functional>
#include <utility>
#include <vector>

#include "exmeas/core.hpp"
#include "exmeas/quadrature.hpp"
#include "exmeas/rng.hpp"

namespace exmeas {

// psi(x) = 1 - e^{-x}; satisfies (1 ^ x)/2 <= psi(x) <= 1 ^ x for x > 0.
// Throws NegativeValueError for negative input.
double psi(double x);

struct CertifyConfig {
    double tol_1d = 1e-6;        // plain half-line integrals
    double tol_nested = 1e-4;    // integrals whose integrand is itself an integral
    double tol_z = 1e-7;         // z-sections feeding outer integrals
    double measure_tol = 1e-4;   // "measure zero" cutoff for superlevel limits
    std::vector<double> cutoffs = {1e1, 1e2, 1e3, 1e4, 1e5, 1e6};
};

// Hatted marginal functionals of a representation, exposed for tests and
// diagnostics: f1/f2 the outer marginals of the hatted edge kernel, g1/g1'
// the star marginals, f_hat3 the z-section, mu_W the multigraphex analogue.
// Marginals may be infinite; their evaluators return a quadrature estimate.
struct Marginals {
    std::function<quad::IntegralEstimate(double)> f1, f2, g1, g1p;
    std::function<double(double, double)> f_hat3;  // in [0, 1]
    std::function<quad::IntegralEstimate(double)> mu_W;
};
Marginals make_marginals(const KallenbergRep& rep, const CertifyConfig& cfg = {});
Marginals make_marginals(const Multigraphex& mg, const CertifyConfig& cfg = {});

enum class Classification { FiniteAS, InfiniteAS, Inconclusive };
const char* to_string(Classification c);

// Almost-sure finiteness of sum_j phi(x_j) over a unit-rate Poisson process:
// finite iff the half-line integral of min(phi, 1) converges.
struct LinearClassifyResult {
    Classification result;
    quad::IntegralEstimate integral;  // of the hatted function
};
LinearClassifyResult poisson_linear_classify(const std::function<double(double)>& phi,
                                             const CertifyConfig& cfg = {});

// Almost-sure finiteness of sum_{i,j} h(x_i, x_j): the four-clause criterion
// on the hatted kernel (marginal infinity sets, superlevel measures at 1,
// the indicator-restricted plane integral, the diagonal integral).
struct QuadraticClassifyResult {
    Classification result;
    std::vector<ConditionEvidence> clauses;
};
QuadraticClassifyResult poisson_quadratic_classify(
    const std::function<double(double, double)>& h, const CertifyConfig& cfg = {});

// Local-finiteness certification of a function-tuple representation via the
// six conditions: (i) integrable line/dust hats, (ii) the star marginals are
// finite almost everywhere -- the condition whose absence the built-in
// counter-example exploits, (iii) integrable hatted star marginals,
// (iv)-(vi) the edge-kernel clauses through the z-section. Condition (iii)
// is only evaluated once (ii) holds, mirroring the order in which the
// quantities are well defined.
Verdict certify_kallenberg(const KallenbergRep& rep, const CertifyConfig& cfg = {});

// Multigraphex integrability: the star-sum hat is integrable, (a) mu_W is
// finite a.e. with integrable excursions above 1, (b) the restricted edge
// probability integral is finite, (c) the diagonal edge probability is
// integrable; plus the structural l1 check on I.
Verdict certify_multigraphex(const Multigraphex& mg, const CertifyConfig& cfg = {});

// A finitely supported distribution on nonnegative rationals (values kept as
// doubles), for the series-convergence oracle.
struct DiscreteDist {
    std::vector<std::pair<double, double>> outcomes;  // (value, probability)

    double mean_min_one() const;  // E[1 ^ Z]
    double sample(RandomStream& rs) const;
};

// Convergence oracle for a series of independent nonnegative terms: the
// series converges a.s. iff sum_j E[1 ^ Z_j] does. Prediction comes from the
// doubling-schedule policy on the expectation partial sums; the empirical
// side samples the partial sums for cross-validation.
struct SummabilityReport {
    quad::Verdict predicted;                  // Converged = converges
    std::vector<double> expectation_partials; // at term counts 1, 2, 4, 8, ...
    std::vector<double> empirical_mean;       // sampled partial sums at the same marks
    std::vector<double> empirical_sd;
};
SummabilityReport summability_oracle(const std::vector<DiscreteDist>& terms, int n_samples,
                                     const RngKey& key);

}  // namespace exmeas
