#include "exmeas/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>

#include "exmeas/errors.hpp"

namespace exmeas::quad {

namespace {

// Gauss-Kronrod 7-15 nodes and weights on [-1, 1] (QUADPACK dqk15).
constexpr double kNodes[8] = {
    0.991455371120813, 0.949107912342759, 0.864864423359769, 0.741531185599394,
    0.586087235467691, 0.405845151377397, 0.207784955007898, 0.000000000000000,
};
constexpr double kKronrod[8] = {
    0.022935322010529, 0.063092092629979, 0.104790010322250, 0.140653259715525,
    0.169004726639267, 0.190350578064785, 0.204432940075298, 0.209482141084728,
};
constexpr double kGauss[4] = {
    0.129484966168870, 0.279705391489277, 0.381830050505119, 0.417959183673469,
};

struct Kahan {
    double sum = 0.0;
    double carry = 0.0;
    void add(double v) {
        double y = v - carry;
        double t = sum + y;
        carry = (t - sum) - y;
        sum = t;
    }
};

struct PanelEval {
    double value;
    double error;
};

// One GK15 pass over [a, b]. Nonnegativity is enforced here: values below
// -1e-12 raise, tiny negative rounding is clamped to zero.
PanelEval gk15(const Fn1& f, double a, double b, long& evals) {
    const double half = 0.5 * (b - a);
    const double mid = 0.5 * (a + b);
    double kron = 0.0, gauss = 0.0;
    for (int i = 0; i < 8; ++i) {
        double offsets[2] = {-kNodes[i], kNodes[i]};
        int reps = (i == 7) ? 1 : 2;
        for (int r = 0; r < reps; ++r) {
            double x = mid + half * offsets[r];
            double v = f(x);
            ++evals;
            if (!std::isfinite(v))
                throw EvalError("integrand evaluated non-finite at x=" + std::to_string(x));
            if (v < 0.0) {
                if (v < -1e-12) throw NegativeValueError("negative integrand detected");
                v = 0.0;
            }
            kron += kKronrod[i] * v;
            if (i % 2 == 1) gauss += kGauss[i / 2] * v;
        }
    }
    kron *= half;
    gauss *= half;
    double err = std::abs(kron - gauss);
    // QUADPACK-style sharpening of the raw difference.
    if (err > 0.0) err = std::min(err, std::pow(200.0 * err, 1.5));
    return {kron, err};
}

struct Panel {
    double a, b, value, error;
    bool operator<(const Panel& other) const { return error < other.error; }
};

}  // namespace

IntegralEstimate integrate_finite(const Fn1& f, double a, double b, double tol, long budget) {
    IntegralEstimate out;
    if (!(b > a)) {
        out.verdict = Verdict::Converged;
        return out;
    }
    long evals = 0;
    std::priority_queue<Panel> heap;
    const int initial = 4;
    double total = 0.0, total_err = 0.0;
    for (int i = 0; i < initial; ++i) {
        double pa = a + (b - a) * i / initial;
        double pb = a + (b - a) * (i + 1) / initial;
        PanelEval pe = gk15(f, pa, pb, evals);
        heap.push({pa, pb, pe.value, pe.error});
        total += pe.value;
        total_err += pe.error;
    }
    const double min_width = (b - a) * 1e-14;
    while (total_err > tol && evals < budget) {
        Panel worst = heap.top();
        if (worst.b - worst.a < min_width) break;  // jump localized to rounding width
        heap.pop();
        double m = 0.5 * (worst.a + worst.b);
        PanelEval left = gk15(f, worst.a, m, evals);
        PanelEval right = gk15(f, m, worst.b, evals);
        total += left.value + right.value - worst.value;
        total_err += left.error + right.error - worst.error;
        heap.push({worst.a, m, left.value, left.error});
        heap.push({m, worst.b, right.value, right.error});
    }
    out.value = std::max(total, 0.0);
    out.error = total_err;
    out.evaluations = evals;
    out.verdict = total_err <= tol ? Verdict::Converged : Verdict::Inconclusive;
    return out;
}

IntegralEstimate integrate_unit(const Fn1& f, double tol) {
    return integrate_finite(f, 0.0, 1.0, tol, 4000);
}

namespace {

// Tail probe for [X, infinity) on the compactified variable x = t/(1-t).
// Returns an estimate (value + error, conservative) or +infinity when the
// transformed integrand misbehaves, signaling "keep doubling".
double tail_probe(const Fn1& f, double X, long& evals) {
    const double t0 = X / (1.0 + X);
    const double t1 = 1.0 - 1e-13;
    if (t0 >= t1) return 0.0;
    bool bad = false;
    Fn1 g = [&](double t) {
        double om = 1.0 - t;
        double x = t / om;
        double v = f(x) / (om * om);
        if (!std::isfinite(v)) {
            bad = true;
            return 0.0;
        }
        return v;
    };
    IntegralEstimate est;
    try {
        est = integrate_finite(g, t0, t1, 1e-12, 600);
    } catch (const NegativeValueError&) {
        throw;
    }
    evals += est.evaluations;
    if (bad) return HUGE_VAL;
    if (est.error > 0.1 * est.value + 1e-9) return est.value + est.error;  // rough but usable
    return est.value + est.error;
}

struct HalflineState {
    std::vector<double> increments;
    std::vector<double> partials;
    Kahan partial;
    Kahan quad_err;
    long evals = 0;
};

double block_left(int m) { return m == 0 ? 0.0 : std::ldexp(1.0, m - 1); }
double block_right(int m) { return std::ldexp(1.0, m); }

// Decay exponent p of the increments across the trailing doublings
// (inc_m ~ m^p). Constant increments (p ~ 0) are the signature of
// logarithmic divergence; p <= -1 looks summable and is left alone.
// NaN when the window is unusable (zero increments).
double increment_decay_exponent(const std::vector<double>& incs) {
    const int last = static_cast<int>(incs.size()) - 1;
    const int back = std::max(0, last - 16);
    if (back == last || incs[static_cast<std::size_t>(back)] <= 0.0 ||
        incs[static_cast<std::size_t>(last)] <= 0.0)
        return std::numeric_limits<double>::quiet_NaN();
    return std::log(incs[static_cast<std::size_t>(last)] /
                    incs[static_cast<std::size_t>(back)]) /
           std::log((last + 1.0) / (back + 1.0));
}

}  // namespace

// Block m covers [0,1] for m=0 and [2^{m-1}, 2^m] afterwards, so after block
// m the partial integral covers [0, 2^m].
IntegralEstimate integrate_halfline(const Fn1& f, const Options& opts) {
    IntegralEstimate out;
    HalflineState st;
    const double tol = opts.tol;

    try {
        for (int m = 0; m <= opts.max_doublings; ++m) {
            const double a = block_left(m);
            const double b = block_right(m);
            const double block_tol = opts.probe ? std::max(tol, 1e-3) * 0.25
                                                : tol * 0.5 / ((m + 2.0) * (m + 2.0));
            const long block_budget = opts.probe ? 120 : opts.block_budget;
            IntegralEstimate blk = integrate_finite(f, a, b, block_tol, block_budget);
            st.evals += blk.evaluations;
            st.partial.add(blk.value);
            st.quad_err.add(blk.error);
            st.increments.push_back(blk.value);
            st.partials.push_back(st.partial.sum);

            // Partial integrals of a nonnegative integrand are nondecreasing
            // along the schedule (positive GK weights); checked every run.
            if (m > 0 && st.partials[static_cast<std::size_t>(m)] <
                             st.partials[static_cast<std::size_t>(m) - 1] - 1e-12)
                throw Error("internal: partial integrals decreased on the doubling schedule");

            // Fast divergence: past the threshold and still growing.
            if (st.partial.sum > opts.divergence_threshold && m >= 2 &&
                st.increments[m] > tol && st.increments[m - 1] > tol &&
                st.increments[m - 2] > tol) {
                out.value = st.partial.sum;
                out.error = st.quad_err.sum;
                out.verdict = Verdict::Diverging;
                out.evaluations = st.evals;
                out.note = "partial integral exceeded divergence threshold at [0, 2^" +
                           std::to_string(m) + "]";
                return out;
            }

            // Convergence: two quiet doublings plus a quiet tail probe.
            if (m >= opts.min_doublings && st.increments[m] <= 0.25 * tol &&
                st.increments[m - 1] <= 0.25 * tol) {
                double tail = tail_probe(f, b, st.evals);
                if (tail <= 0.25 * tol && st.quad_err.sum <= 0.5 * tol) {
                    out.value = st.partial.sum;
                    out.error = st.quad_err.sum + st.increments[m] + tail;
                    out.verdict = Verdict::Converged;
                    out.evaluations = st.evals;
                    return out;
                }
            }
        }
    } catch (const EvalError& e) {
        out.verdict = Verdict::Inconclusive;
        out.value = st.partial.sum;
        out.error = HUGE_VAL;
        out.evaluations = st.evals;
        out.note = std::string("integrand evaluation failed: ") + e.what();
        return out;
    }

    // Schedule exhausted. Non-decaying increments mean the tail is not
    // summable (Cauchy condensation view): a decay exponent near zero is the
    // log-divergence signature, while anything at or below -1 could still be
    // summable and stays Inconclusive.
    const int last = static_cast<int>(st.increments.size()) - 1;
    const double p = increment_decay_exponent(st.increments);
    if (st.increments[static_cast<std::size_t>(last)] > tol && !std::isnan(p) && p > -0.8) {
        out.verdict = Verdict::Diverging;
        out.note = "increments not decaying after " + std::to_string(last + 1) +
                   " doublings (decay exponent " + std::to_string(p) + ")";
    } else {
        out.verdict = Verdict::Inconclusive;
        out.note = "doubling schedule exhausted without convergence";
    }
    out.value = st.partial.sum;
    out.error = HUGE_VAL;
    out.evaluations = st.evals;
    return out;
}

Verdict classify_partial_sums(const std::vector<double>& partials, const Options& opts) {
    if (partials.empty()) return Verdict::Inconclusive;
    std::vector<double> inc(partials.size());
    inc[0] = partials[0];
    for (std::size_t i = 1; i < partials.size(); ++i) inc[i] = partials[i] - partials[i - 1];
    const int last = static_cast<int>(inc.size()) - 1;
    if (partials.back() > opts.divergence_threshold && last >= 2 && inc[last] > opts.tol &&
        inc[last - 1] > opts.tol && inc[last - 2] > opts.tol)
        return Verdict::Diverging;
    if (last >= 1 && inc[last] <= 0.25 * opts.tol && inc[last - 1] <= 0.25 * opts.tol)
        return Verdict::Converged;
    const double p = increment_decay_exponent(inc);
    if (inc[static_cast<std::size_t>(last)] > opts.tol && !std::isnan(p) && p > -0.8)
        return Verdict::Diverging;
    return Verdict::Inconclusive;
}

IntegralEstimate integrate_plane(const Fn2& f, const Options& opts) {
    Options inner_opts = opts;
    inner_opts.tol = std::max(opts.tol * 0.05, 1e-9);

    bool inner_diverged = false;
    bool inner_inconclusive = false;
    double witness_x = 0.0;
    std::string inner_note;
    long inner_evals = 0;

    Fn1 outer = [&](double x) {
        if (inner_diverged) return 0.0;  // short-circuit once doomed
        IntegralEstimate inner = integrate_halfline([&, x](double y) { return f(x, y); },
                                                    inner_opts);
        inner_evals += inner.evaluations;
        if (inner.diverging()) {
            inner_diverged = true;
            witness_x = x;
            inner_note = inner.note;
            return 0.0;
        }
        if (!inner.converged()) {
            inner_inconclusive = true;
            inner_note = inner.note;
        }
        return inner.value;
    };

    IntegralEstimate est = integrate_halfline(outer, opts);
    est.evaluations += inner_evals;
    if (inner_diverged) {
        est.verdict = Verdict::Diverging;
        est.error = HUGE_VAL;
        est.note = "inner integral diverges near x=" + std::to_string(witness_x) +
                   (inner_note.empty() ? "" : " (" + inner_note + ")");
    } else if (inner_inconclusive && est.verdict == Verdict::Converged) {
        est.verdict = Verdict::Inconclusive;
        est.note = "inner integral inconclusive: " + inner_note;
    }
    return est;
}

ThresholdDecision exceeds_threshold(const Fn1& f, double c, const Options& opts) {
    ThresholdDecision out;
    Options probe = opts.as_probe();
    // Coarse accuracy proportional to the threshold; decisions near the
    // boundary are fuzzy by policy (superlevel boundaries have measure zero).
    const double ctol = std::max(1e-6, 1e-3 * std::max(std::abs(c), 1.0));
    probe.tol = ctol;

    Kahan partial;
    Kahan quad_err;
    std::vector<double> incs;
    try {
        for (int m = 0; m <= probe.max_doublings; ++m) {
            IntegralEstimate blk =
                integrate_finite(f, block_left(m), block_right(m), 0.25 * ctol, 120);
            out.evaluations += blk.evaluations;
            partial.add(blk.value);
            quad_err.add(blk.error);
            incs.push_back(blk.value);

            if (partial.sum > c + std::max(4.0 * quad_err.sum, 1e-9 * std::max(1.0, c)) +
                                  0.02 * std::abs(c)) {
                out.result = Exceeds::Yes;
                out.value = partial.sum;
                return out;
            }
            if (m >= probe.min_doublings && incs[m] <= 0.25 * ctol &&
                incs[m - 1] <= 0.25 * ctol) {
                double tail = tail_probe(f, block_right(m), out.evaluations);
                if (tail <= 0.25 * ctol) {
                    double value = partial.sum;
                    double band = std::max(4.0 * (quad_err.sum + tail),
                                           1e-9 * std::max(1.0, std::abs(c)));
                    out.value = value;
                    out.result = value > c + band ? Exceeds::Yes : Exceeds::No;
                    return out;
                }
            }
        }
    } catch (const EvalError&) {
        out.result = Exceeds::Unknown;
        return out;
    }
    // Exhausted: a still-growing partial that never cleared c is Unknown
    // unless increments show divergence, which forces Yes for any finite c.
    const int last = static_cast<int>(incs.size()) - 1;
    const double p = increment_decay_exponent(incs);
    if (incs[static_cast<std::size_t>(last)] > probe.tol && !std::isnan(p) && p > -0.8) {
        out.result = Exceeds::Yes;
        out.value = partial.sum;
    }
    return out;
}

IntegralEstimate measure_of_superlevel(const Fn1& phi, double c, const Options& opts) {
    return measure_where(
        [&](double x) { return phi(x) > c ? Exceeds::Yes : Exceeds::No; }, opts);
}

IntegralEstimate measure_where(const std::function<Exceeds(double)>& member,
                               const Options& opts) {
    bool unknown = false;
    Fn1 indicator = [&](double x) {
        switch (member(x)) {
            case Exceeds::Yes: return 1.0;
            case Exceeds::No: return 0.0;
            default: unknown = true; return 0.0;
        }
    };
    Options mopts = opts;
    mopts.tol = std::max(opts.tol, 1e-4);  // indicator integrals: measure accuracy
    IntegralEstimate est = integrate_halfline(indicator, mopts);
    if (unknown && est.verdict != Verdict::Diverging) {
        est.verdict = Verdict::Inconclusive;
        est.note = "pointwise membership undecided somewhere";
    }
    return est;
}

}  // namespace exmeas::quad
