#pragma once

#include <functional>
#include <string>
#include <vector>

namespace exmeas::quad {

using Fn1 = std::function<double(double)>;
using Fn2 = std::function<double(double, double)>;

enum class Verdict { Converged, Diverging, Inconclusive };

struct IntegralEstimate {
    double value = 0.0;
    double error = 0.0;
    Verdict verdict = Verdict::Inconclusive;
    long evaluations = 0;
    std::string note;

    bool converged() const { return verdict == Verdict::Converged; }
    bool diverging() const { return verdict == Verdict::Diverging; }
};

struct Options {
    double tol = 1e-6;                   // absolute tolerance for Converged
    double divergence_threshold = 1e6;   // M_div: partial integrals past this are divergent
    int min_doublings = 6;               // never declare convergence before [0, 2^min]
    int max_doublings = 60;              // schedule exhaustion
    long block_budget = 4000;            // refinement evaluations per dyadic block
    bool probe = false;                  // coarse blocks (threshold decisions, divergence probing)

    Options with_tol(double t) const {
        Options o = *this;
        o.tol = t;
        return o;
    }
    Options as_probe() const {
        Options o = *this;
        o.probe = true;
        return o;
    }
};

// Globally adaptive Gauss-Kronrod 7-15 on a finite interval. Refines the
// worst panel first, stops at tol or when the evaluation budget runs out
// (the returned error then reports the shortfall). Throws NegativeValueError
// if the integrand probes negative; EvalError propagates to the caller.
IntegralEstimate integrate_finite(const Fn1& f, double a, double b, double tol,
                                  long budget = 4000);

// Integral over [0, 1] (used for the z-sections of three-argument kernels).
IntegralEstimate integrate_unit(const Fn1& f, double tol);

// Half-line integral with an explicit convergence/divergence verdict.
// Dyadic blocks [0,1], [1,2], ..., [2^m, 2^{m+1}] are integrated adaptively;
// the tail beyond the last block is probed on the compactified variable
// x = t/(1-t). Converged when successive doublings change the estimate by
// less than tol (and the tail probe agrees); Diverging when the partial
// integral exceeds divergence_threshold while still growing, or when the
// schedule is exhausted with non-decaying increments (catches 1/(1+x)-style
// logarithmic divergence that can never reach the threshold numerically).
// Inconclusive otherwise. Eval errors from f land in Inconclusive with the
// reason in note.
IntegralEstimate integrate_halfline(const Fn1& f, const Options& opts = {});

// Nested half-line integral over the positive quadrant (outer x, inner y).
// A diverging inner integral at an outer node makes the whole integral
// Diverging with the witness recorded in note.
IntegralEstimate integrate_plane(const Fn2& f, const Options& opts = {});

// Early-exit partial-integral comparison against a threshold: decides
// whether the (monotone) half-line integral of f exceeds c without
// computing it accurately. Yes as soon as the running partial clears c with
// margin, No when the integral converges below c, Unknown on boundary fuzz
// or schedule exhaustion.
enum class Exceeds { Yes, No, Unknown };
struct ThresholdDecision {
    Exceeds result = Exceeds::Unknown;
    double value = 0.0;  // partial (Yes) or converged value (No)
    long evaluations = 0;
};
ThresholdDecision exceeds_threshold(const Fn1& f, double c, const Options& opts = {});

// Lebesgue measure of the superlevel set {x >= 0 : phi(x) > c}. Jumps of the
// indicator are localized by adaptive bisection of the straddling panels.
IntegralEstimate measure_of_superlevel(const Fn1& phi, double c, const Options& opts = {});

// As above, but the caller decides pointwise membership (used when phi is
// itself an inner integral). Unknown decisions poison the estimate to
// Inconclusive.
IntegralEstimate measure_where(const std::function<Exceeds(double)>& member,
                               const Options& opts = {});

// Shared doubling-schedule policy: classifies a nondecreasing partial-sum
// sequence (partials[m] = value after m+1 doublings) the same way the
// half-line integrator does. Used by the summability oracle.
Verdict classify_partial_sums(const std::vector<double>& partials, const Options& opts = {});

}  // namespace exmeas::quad
