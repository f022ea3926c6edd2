#include "exmeas/finiteness.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <limits>
#include <unordered_map>

#include "exmeas/errors.hpp"
#include "exmeas/sampler.hpp"

namespace exmeas {

using quad::Exceeds;
using quad::IntegralEstimate;
using quad::Options;

double psi(double x) {
    if (x < 0.0) throw NegativeValueError("psi requires a nonnegative argument");
    return -std::expm1(-x);
}

const char* to_string(Classification c) {
    switch (c) {
        case Classification::FiniteAS: return "FiniteAS";
        case Classification::InfiniteAS: return "InfiniteAS";
        default: return "Inconclusive";
    }
}

namespace {

using Fn1 = std::function<double(double)>;
using Fn2 = std::function<double(double, double)>;

double hat(double v) { return std::min(v, 1.0); }

Options opts_1d(const CertifyConfig& cfg) {
    Options o;
    o.tol = cfg.tol_1d;
    return o;
}

Options opts_nested(const CertifyConfig& cfg) {
    Options o;
    o.tol = cfg.tol_nested;
    return o;
}

// min(integral of phi over the half-line, cap), with an exact early exit:
// partial integrals are monotone, so once the partial clears the cap the
// capped value is known. ok turns false when the schedule is exhausted with
// the partial still below the cap and not converged.
double capped_halfline(const Fn1& phi, double cap, const Options& base, long& evals, bool& ok) {
    IntegralEstimate est;
    Options o = base;
    o.divergence_threshold = cap;  // reuse the fast-divergence exit at the cap
    est = quad::integrate_halfline(phi, o);
    evals += est.evaluations;
    if (est.diverging()) return cap;
    if (est.converged()) return std::min(est.value, cap);
    // Inconclusive: could still be above the cap already.
    if (est.value >= cap) return cap;
    ok = false;
    return std::min(est.value, cap);
}

// ---------------------------------------------------------------------------
// Infinity-set scans

struct InfinityScan {
    std::vector<std::pair<double, double>> measures;  // (cutoff, measure)
    ConditionStatus status = ConditionStatus::Inconclusive;
    double limit = 0.0;
    std::string witness;
    long evaluations = 0;
};

// Measures of {x : marginal(x) > c} along escalating cutoffs, with monotone
// bracketing; "measure zero at infinity" iff the limiting measure vanishes,
// "violated" when the measures stabilize above the tolerance and a probe
// point certifies inner divergence.
InfinityScan scan_infinity_set(
    const std::function<quad::ThresholdDecision(double, double)>& decide,
    const std::function<IntegralEstimate(double)>& full_integral, const std::string& name,
    const CertifyConfig& cfg) {
    InfinityScan out;
    Options mopts;
    mopts.tol = cfg.measure_tol;

    double yes_probe = std::numeric_limits<double>::quiet_NaN();
    std::vector<IntegralEstimate> ests;
    for (double c : cfg.cutoffs) {
        auto member = [&](double x) {
            quad::ThresholdDecision d = decide(x, c);
            out.evaluations += d.evaluations;
            if (d.result == Exceeds::Yes) yes_probe = x;
            return d.result;
        };
        IntegralEstimate est = quad::measure_where(member, mopts);
        out.evaluations += est.evaluations;
        ests.push_back(est);
        out.measures.emplace_back(c, est.value);
        // Monotone bracketing: superlevel measures shrink as c grows.
        if (ests.size() >= 2 && est.converged() && ests[ests.size() - 2].converged() &&
            est.value > ests[ests.size() - 2].value + 10.0 * cfg.measure_tol) {
            out.status = ConditionStatus::Inconclusive;
            out.witness = "superlevel measures are not monotone in the cutoff";
            return out;
        }
    }

    const IntegralEstimate& last = ests.back();
    const IntegralEstimate& prev = ests[ests.size() - 2];
    out.limit = last.value;
    if (last.converged() && last.value <= cfg.measure_tol) {
        out.status = ConditionStatus::Satisfied;
        return out;
    }
    const bool stabilized = last.converged() && prev.converged() &&
                            std::abs(last.value - prev.value) <=
                                0.1 * last.value + cfg.measure_tol &&
                            last.value > cfg.measure_tol;
    if (stabilized && !std::isnan(yes_probe)) {
        IntegralEstimate probe = full_integral(yes_probe);
        out.evaluations += probe.evaluations;
        if (probe.diverging()) {
            out.status = ConditionStatus::Violated;
            char buf[160];
            std::snprintf(buf, sizeof(buf),
                          "lambda{%s > %.0e} ~= %.4g at every cutoff; %s diverges at x=%.6g",
                          name.c_str(), cfg.cutoffs.back(), last.value, name.c_str(),
                          yes_probe);
            out.witness = buf;
            return out;
        }
    }
    out.status = ConditionStatus::Inconclusive;
    out.witness = "superlevel measure of " + name + " did not resolve";
    return out;
}

// Memoized threshold decisions keyed on the probe coordinate's bits.
struct DecisionCache {
    std::unordered_map<std::uint64_t, Exceeds> map;
    Exceeds* find(double x) {
        auto it = map.find(std::bit_cast<std::uint64_t>(x));
        return it == map.end() ? nullptr : &it->second;
    }
    void put(double x, Exceeds e) { map.emplace(std::bit_cast<std::uint64_t>(x), e); }
};

// ---------------------------------------------------------------------------
// Pair-kernel clause engine (shared by the quadratic classifier and the
// edge-kernel conditions of the representation certifier)

struct PairClauses {
    ConditionEvidence infinity;    // marginals finite a.e.
    ConditionEvidence superlevel;  // lambda{h_i > 1} < infinity
    ConditionEvidence restricted;  // restricted plane integral finite
    ConditionEvidence diagonal;    // diagonal integral finite
    Classification combined() const;
};

Classification PairClauses::combined() const {
    ConditionStatus worst = ConditionStatus::Satisfied;
    for (const ConditionEvidence* e : {&infinity, &superlevel, &restricted, &diagonal}) {
        if (e->status == ConditionStatus::Violated) return Classification::InfiniteAS;
        if (e->status != ConditionStatus::Satisfied) worst = ConditionStatus::Inconclusive;
    }
    return worst == ConditionStatus::Satisfied ? Classification::FiniteAS
                                               : Classification::Inconclusive;
}

// hhat must already be hatted (values in [0, 1]).
PairClauses pair_kernel_clauses(const Fn2& hhat, const CertifyConfig& cfg) {
    PairClauses out;
    const Options o1 = opts_nested(cfg);

    auto marginal_decide = [&](bool first, double x, double c) {
        Fn1 section = first ? Fn1([&hhat, x](double y) { return hhat(x, y); })
                            : Fn1([&hhat, x](double y) { return hhat(y, x); });
        return quad::exceeds_threshold(section, c);
    };
    auto marginal_full = [&](bool first, double x) {
        Fn1 section = first ? Fn1([&hhat, x](double y) { return hhat(x, y); })
                            : Fn1([&hhat, x](double y) { return hhat(y, x); });
        return quad::integrate_halfline(section, o1);
    };

    // Marginals finite a.e. (escalating cutoffs on both slots).
    {
        InfinityScan s1 = scan_infinity_set(
            [&](double x, double c) { return marginal_decide(true, x, c); },
            [&](double x) { return marginal_full(true, x); }, "h1", cfg);
        InfinityScan s2 = scan_infinity_set(
            [&](double x, double c) { return marginal_decide(false, x, c); },
            [&](double x) { return marginal_full(false, x); }, "h2", cfg);
        ConditionEvidence& e = out.infinity;
        e.description = "marginals are finite almost everywhere";
        e.evaluations = s1.evaluations + s2.evaluations;
        e.estimate = std::max(s1.limit, s2.limit);
        e.cutoff_measures = s1.limit >= s2.limit ? s1.measures : s2.measures;
        if (s1.status == ConditionStatus::Violated || s2.status == ConditionStatus::Violated) {
            e.status = ConditionStatus::Violated;
            e.witness = s1.status == ConditionStatus::Violated ? s1.witness : s2.witness;
            e.cutoff_measures =
                s1.status == ConditionStatus::Violated ? s1.measures : s2.measures;
        } else if (s1.status == ConditionStatus::Satisfied &&
                   s2.status == ConditionStatus::Satisfied) {
            e.status = ConditionStatus::Satisfied;
        } else {
            e.status = ConditionStatus::Inconclusive;
            e.witness = s1.status != ConditionStatus::Satisfied ? s1.witness : s2.witness;
        }
    }

    // Superlevel measures at 1 are finite.
    {
        ConditionEvidence& e = out.superlevel;
        e.description = "measure of {marginal > 1} is finite";
        double total = 0.0, err = 0.0;
        bool ok = true, violated = false;
        for (bool first : {true, false}) {
            DecisionCache cache;
            IntegralEstimate m = quad::measure_where(
                [&](double x) {
                    if (Exceeds* hit = cache.find(x)) return *hit;
                    Exceeds d = marginal_decide(first, x, 1.0).result;
                    cache.put(x, d);
                    return d;
                },
                Options{}.with_tol(cfg.measure_tol));
            e.evaluations += m.evaluations;
            if (m.diverging()) {
                violated = true;
                e.witness = std::string("measure of {") + (first ? "h1" : "h2") +
                            " > 1} is infinite";
            } else if (!m.converged()) {
                ok = false;
            }
            total += m.value;
            err += m.error;
        }
        e.estimate = total;
        e.error = err;
        e.status = violated ? ConditionStatus::Violated
                            : (ok ? ConditionStatus::Satisfied : ConditionStatus::Inconclusive);
    }

    // Restricted plane integral: hhat over {h1(x) <= 1, h2(y) <= 1}.
    {
        ConditionEvidence& e = out.restricted;
        e.description = "plane integral restricted to small marginals";
        DecisionCache cache1, cache2;
        auto below_one = [&](bool first, double t) {
            DecisionCache& cache = first ? cache1 : cache2;
            if (Exceeds* hit = cache.find(t)) return *hit;
            Exceeds d = marginal_decide(first, t, 1.0).result;
            cache.put(t, d);
            return d;
        };
        bool undecided = false;
        IntegralEstimate est = quad::integrate_plane(
            [&](double x, double y) {
                Exceeds ex = below_one(true, x);
                if (ex == Exceeds::Yes) return 0.0;
                Exceeds ey = below_one(false, y);
                if (ey == Exceeds::Yes) return 0.0;
                if (ex == Exceeds::Unknown || ey == Exceeds::Unknown) undecided = true;
                return hhat(x, y);
            },
            opts_nested(cfg));
        e.estimate = est.value;
        e.error = est.error;
        e.evaluations = est.evaluations;
        if (est.diverging()) {
            e.status = ConditionStatus::Violated;
            e.witness = "restricted plane integral diverges: " + est.note;
        } else if (est.converged() && !undecided) {
            e.status = ConditionStatus::Satisfied;
        } else {
            e.status = ConditionStatus::Inconclusive;
            e.witness = est.note;
        }
    }

    // Diagonal integral.
    {
        ConditionEvidence& e = out.diagonal;
        e.description = "diagonal integral of the hatted kernel";
        IntegralEstimate est =
            quad::integrate_halfline([&](double x) { return hhat(x, x); }, opts_nested(cfg));
        e.estimate = est.value;
        e.error = est.error;
        e.evaluations = est.evaluations;
        if (est.diverging()) {
            e.status = ConditionStatus::Violated;
            e.witness = "diagonal integral diverges";
        } else if (est.converged()) {
            e.status = ConditionStatus::Satisfied;
        } else {
            e.status = ConditionStatus::Inconclusive;
            e.witness = est.note;
        }
    }

    return out;
}

ConditionEvidence trivial_evidence(std::string id, std::string description) {
    ConditionEvidence e;
    e.id = std::move(id);
    e.description = std::move(description) + " (slot absent)";
    e.status = ConditionStatus::Satisfied;
    return e;
}

}  // namespace

// ---------------------------------------------------------------------------
// Marginals

Marginals make_marginals(const KallenbergRep& rep, const CertifyConfig& cfg) {
    Marginals m;
    const double tol_z = cfg.tol_z;
    auto f = rep.f;
    m.f_hat3 = [f, tol_z](double x, double y) {
        if (!f) return 0.0;
        IntegralEstimate est =
            quad::integrate_unit([&](double z) { return hat(f(x, y, z)); }, tol_z);
        return std::clamp(est.value, 0.0, 1.0);
    };
    auto fh3 = m.f_hat3;
    Options nested = opts_nested(cfg);
    m.f1 = [fh3, nested](double x) {
        return quad::integrate_halfline([&](double y) { return fh3(x, y); }, nested);
    };
    m.f2 = [fh3, nested](double y) {
        return quad::integrate_halfline([&](double x) { return fh3(x, y); }, nested);
    };
    Options o1 = opts_1d(cfg);
    auto g = rep.g;
    m.g1 = [g, o1](double x) {
        if (!g) return IntegralEstimate{0.0, 0.0, quad::Verdict::Converged, 0, ""};
        return quad::integrate_halfline([&](double y) { return hat(g(x, y)); }, o1);
    };
    auto gp = rep.g_prime;
    m.g1p = [gp, o1](double x) {
        if (!gp) return IntegralEstimate{0.0, 0.0, quad::Verdict::Converged, 0, ""};
        return quad::integrate_halfline([&](double y) { return hat(gp(x, y)); }, o1);
    };
    m.mu_W = [](double) { return IntegralEstimate{0.0, 0.0, quad::Verdict::Converged, 0, ""}; };
    return m;
}

Marginals make_marginals(const Multigraphex& mg, const CertifyConfig& cfg) {
    Marginals m;
    Options o1 = opts_1d(cfg);
    auto W = mg.W;
    m.mu_W = [W, o1](double x) {
        if (!W) return IntegralEstimate{0.0, 0.0, quad::Verdict::Converged, 0, ""};
        return quad::integrate_halfline([&](double y) { return W->edge_prob(x, y); }, o1);
    };
    m.f_hat3 = [W](double x, double y) { return W ? W->edge_prob(x, y) : 0.0; };
    m.f1 = [](double) { return IntegralEstimate{}; };
    m.f2 = m.f1;
    m.g1 = m.f1;
    m.g1p = m.f1;
    return m;
}

// ---------------------------------------------------------------------------
// Poisson-integral classifiers

LinearClassifyResult poisson_linear_classify(const Fn1& phi, const CertifyConfig& cfg) {
    LinearClassifyResult out;
    out.integral = quad::integrate_halfline([&](double x) { return hat(phi(x)); }, opts_1d(cfg));
    switch (out.integral.verdict) {
        case quad::Verdict::Converged: out.result = Classification::FiniteAS; break;
        case quad::Verdict::Diverging: out.result = Classification::InfiniteAS; break;
        default: out.result = Classification::Inconclusive; break;
    }
    return out;
}

QuadraticClassifyResult poisson_quadratic_classify(const Fn2& h, const CertifyConfig& cfg) {
    PairClauses clauses = pair_kernel_clauses(
        [&h](double x, double y) { return hat(h(x, y)); }, cfg);
    QuadraticClassifyResult out;
    out.result = clauses.combined();
    clauses.infinity.id = "(i)";
    clauses.superlevel.id = "(ii)";
    clauses.restricted.id = "(iii)";
    clauses.diagonal.id = "(iv)";
    out.clauses = {clauses.infinity, clauses.superlevel, clauses.restricted, clauses.diagonal};
    return out;
}

// ---------------------------------------------------------------------------
// Representation certifier

exmeas::Verdict certify_kallenberg(const KallenbergRep& rep, const CertifyConfig& cfg) {
    std::vector<ConditionEvidence> evidence;

    // (i) hatted line and dust kernels are jointly integrable.
    {
        ConditionEvidence e;
        e.id = "(i)";
        e.description = "integral of the hatted dust and line kernels";
        if (!rep.l && !rep.l_prime && !rep.h && !rep.h_prime) {
            e.status = ConditionStatus::Satisfied;
            e.description += " (slots absent)";
        } else {
            IntegralEstimate est = quad::integrate_halfline(
                [&](double x) {
                    double sum = 0.0;
                    if (rep.l) sum += hat(rep.l(x));
                    if (rep.l_prime) sum += hat(rep.l_prime(x));
                    if (rep.h) sum += hat(rep.h(x));
                    if (rep.h_prime) sum += hat(rep.h_prime(x));
                    return sum;
                },
                opts_1d(cfg));
            e.estimate = est.value;
            e.error = est.error;
            e.evaluations = est.evaluations;
            if (est.diverging()) {
                e.status = ConditionStatus::Violated;
                e.witness = "dust/line hat integral diverges: " + est.note;
            } else if (est.converged()) {
                e.status = ConditionStatus::Satisfied;
            } else {
                e.status = ConditionStatus::Inconclusive;
                e.witness = est.note;
            }
        }
        evidence.push_back(std::move(e));
    }

    // (ii) the star marginals are finite almost everywhere. This is checked
    // before (iii) because the hatted marginals there are only defined a.e.
    // once (ii) holds.
    bool cond2_ok = true;
    {
        ConditionEvidence e;
        e.id = "(ii)";
        e.description = "star marginals finite almost everywhere";
        if (!rep.g && !rep.g_prime) {
            e.status = ConditionStatus::Satisfied;
            e.description += " (slots absent)";
        } else {
            auto scan_slot = [&](const Fn2& g, const char* name) {
                return scan_infinity_set(
                    [&](double x, double c) {
                        return quad::exceeds_threshold(
                            [&](double y) { return hat(g(x, y)); }, c);
                    },
                    [&](double x) {
                        return quad::integrate_halfline(
                            [&](double y) { return hat(g(x, y)); }, opts_1d(cfg));
                    },
                    name, cfg);
            };
            InfinityScan sg = rep.g ? scan_slot(rep.g, "g1") : InfinityScan{{},
                ConditionStatus::Satisfied, 0.0, "", 0};
            InfinityScan sgp = rep.g_prime ? scan_slot(rep.g_prime, "g1'") : InfinityScan{{},
                ConditionStatus::Satisfied, 0.0, "", 0};
            e.evaluations = sg.evaluations + sgp.evaluations;
            e.estimate = std::max(sg.limit, sgp.limit);
            if (sg.status == ConditionStatus::Violated ||
                sgp.status == ConditionStatus::Violated) {
                e.status = ConditionStatus::Violated;
                const InfinityScan& bad = sg.status == ConditionStatus::Violated ? sg : sgp;
                e.witness = bad.witness;
                e.cutoff_measures = bad.measures;
            } else if (sg.status == ConditionStatus::Satisfied &&
                       sgp.status == ConditionStatus::Satisfied) {
                e.status = ConditionStatus::Satisfied;
                e.cutoff_measures = sg.measures.empty() ? sgp.measures : sg.measures;
            } else {
                e.status = ConditionStatus::Inconclusive;
                e.witness = sg.status != ConditionStatus::Satisfied ? sg.witness : sgp.witness;
                e.cutoff_measures = sg.measures.empty() ? sgp.measures : sg.measures;
            }
        }
        cond2_ok = e.status == ConditionStatus::Satisfied;
        evidence.push_back(std::move(e));
    }

    // (iii) hatted star marginals are integrable. Skipped while (ii) is
    // unresolved or violated.
    {
        ConditionEvidence e;
        e.id = "(iii)";
        e.description = "integral of the hatted star marginals";
        if (!rep.g && !rep.g_prime) {
            e.status = ConditionStatus::Satisfied;
            e.description += " (slots absent)";
        } else if (!cond2_ok) {
            e.status = ConditionStatus::Skipped;
            e.witness = "not evaluated: the marginals are not a.e. finite (condition (ii))";
        } else {
            bool inner_ok = true;
            long inner_evals = 0;
            Options inner = opts_1d(cfg);
            auto g1hat = [&](const Fn2& g, double x) {
                if (!g) return 0.0;
                return capped_halfline([&](double y) { return hat(g(x, y)); }, 1.0, inner,
                                       inner_evals, inner_ok);
            };
            IntegralEstimate est = quad::integrate_halfline(
                [&](double x) { return g1hat(rep.g, x) + g1hat(rep.g_prime, x); },
                opts_nested(cfg));
            e.estimate = est.value;
            e.error = est.error;
            e.evaluations = est.evaluations + inner_evals;
            if (est.diverging()) {
                e.status = ConditionStatus::Violated;
                e.witness = "hatted star marginal integral diverges";
            } else if (est.converged() && inner_ok) {
                e.status = ConditionStatus::Satisfied;
            } else {
                e.status = ConditionStatus::Inconclusive;
                e.witness = est.note;
            }
        }
        evidence.push_back(std::move(e));
    }

    // (iv)-(vi) via the pair-kernel clauses on the z-section of the hatted
    // edge kernel.
    if (!rep.f) {
        evidence.push_back(trivial_evidence("(iv)", "edge marginals finite a.e. and small"));
        evidence.push_back(trivial_evidence("(v)", "restricted edge integral"));
        evidence.push_back(trivial_evidence("(vi)", "diagonal edge integral"));
    } else {
        Marginals m = make_marginals(rep, cfg);
        PairClauses clauses = pair_kernel_clauses(m.f_hat3, cfg);

        ConditionEvidence e4;
        e4.id = "(iv)";
        e4.description = "edge marginals finite a.e. with integrable excursions above 1";
        e4.evaluations = clauses.infinity.evaluations + clauses.superlevel.evaluations;
        e4.estimate = std::max(clauses.infinity.estimate, clauses.superlevel.estimate);
        e4.cutoff_measures = clauses.infinity.cutoff_measures;
        if (clauses.infinity.status == ConditionStatus::Violated ||
            clauses.superlevel.status == ConditionStatus::Violated) {
            e4.status = ConditionStatus::Violated;
            e4.witness = clauses.infinity.status == ConditionStatus::Violated
                             ? clauses.infinity.witness
                             : clauses.superlevel.witness;
        } else if (clauses.infinity.status == ConditionStatus::Satisfied &&
                   clauses.superlevel.status == ConditionStatus::Satisfied) {
            e4.status = ConditionStatus::Satisfied;
        } else {
            e4.status = ConditionStatus::Inconclusive;
            e4.witness = clauses.infinity.status != ConditionStatus::Satisfied
                             ? clauses.infinity.witness
                             : clauses.superlevel.witness;
        }
        evidence.push_back(std::move(e4));

        clauses.restricted.id = "(v)";
        clauses.restricted.description = "restricted triple integral of the hatted edge kernel";
        evidence.push_back(clauses.restricted);

        clauses.diagonal.id = "(vi)";
        clauses.diagonal.description = "diagonal integral of the hatted edge kernel";
        evidence.push_back(clauses.diagonal);
    }

    return make_verdict(std::move(evidence));
}

// ---------------------------------------------------------------------------
// Multigraphex certifier

exmeas::Verdict certify_multigraphex(const Multigraphex& mg, const CertifyConfig& cfg) {
    std::vector<ConditionEvidence> evidence;

    // Star-sum hat is integrable.
    {
        ConditionEvidence e;
        e.id = "S";
        e.description = "integral of min(star mass above slot zero, 1)";
        if (!mg.S) {
            e.status = ConditionStatus::Satisfied;
            e.description += " (no star intensity)";
        } else {
            IntegralEstimate est = quad::integrate_halfline(
                [&](double v) { return hat(mg.S->sum_from_one(v) + mg.S->tail_bound()); },
                opts_1d(cfg));
            e.estimate = est.value;
            e.error = est.error;
            e.evaluations = est.evaluations;
            if (est.diverging()) {
                e.status = ConditionStatus::Violated;
                e.witness = "star-sum hat integral diverges";
            } else if (est.converged()) {
                e.status = ConditionStatus::Satisfied;
            } else {
                e.status = ConditionStatus::Inconclusive;
                e.witness = est.note;
            }
        }
        evidence.push_back(std::move(e));
    }

    const auto& W = mg.W;
    auto mu_decide = [&](double x, double c) {
        return quad::exceeds_threshold([&](double y) { return W->edge_prob(x, y); }, c);
    };
    auto mu_full = [&](double x) {
        return quad::integrate_halfline([&](double y) { return W->edge_prob(x, y); },
                                        opts_1d(cfg));
    };

    // (a) mu_W finite a.e. and measure of {mu_W > 1} finite.
    {
        ConditionEvidence e;
        e.id = "(a)";
        e.description = "mu_W finite a.e.; measure of {mu_W > 1} finite";
        if (!W) {
            e.status = ConditionStatus::Satisfied;
            e.description += " (no edge kernel)";
        } else {
            InfinityScan scan = scan_infinity_set(mu_decide, mu_full, "mu_W", cfg);
            e.evaluations = scan.evaluations;
            e.estimate = scan.limit;
            e.cutoff_measures = scan.measures;
            DecisionCache cache;
            IntegralEstimate above1 = quad::measure_where(
                [&](double x) {
                    if (Exceeds* hit = cache.find(x)) return *hit;
                    Exceeds d = mu_decide(x, 1.0).result;
                    cache.put(x, d);
                    return d;
                },
                Options{}.with_tol(cfg.measure_tol));
            e.evaluations += above1.evaluations;
            if (scan.status == ConditionStatus::Violated) {
                e.status = ConditionStatus::Violated;
                e.witness = scan.witness;
            } else if (above1.diverging()) {
                e.status = ConditionStatus::Violated;
                e.witness = "measure of {mu_W > 1} is infinite";
            } else if (scan.status == ConditionStatus::Satisfied && above1.converged()) {
                e.status = ConditionStatus::Satisfied;
                e.estimate = std::max(scan.limit, 0.0);
            } else {
                e.status = ConditionStatus::Inconclusive;
                e.witness = scan.witness.empty() ? above1.note : scan.witness;
            }
        }
        evidence.push_back(std::move(e));
    }

    // (b) edge probability integrable over {mu_W(x) <= 1, mu_W(y) <= 1}.
    {
        ConditionEvidence e;
        e.id = "(b)";
        e.description = "edge probability integral restricted to small mu_W";
        if (!W) {
            e.status = ConditionStatus::Satisfied;
            e.description += " (no edge kernel)";
        } else {
            DecisionCache cache;
            auto small_mu = [&](double t) {
                if (Exceeds* hit = cache.find(t)) return *hit;
                Exceeds d = mu_decide(t, 1.0).result;
                cache.put(t, d);
                return d;
            };
            bool undecided = false;
            IntegralEstimate est = quad::integrate_plane(
                [&](double x, double y) {
                    Exceeds ex = small_mu(x);
                    if (ex == Exceeds::Yes) return 0.0;
                    Exceeds ey = small_mu(y);
                    if (ey == Exceeds::Yes) return 0.0;
                    if (ex == Exceeds::Unknown || ey == Exceeds::Unknown) undecided = true;
                    return W->edge_prob(x, y);
                },
                opts_nested(cfg));
            e.estimate = est.value;
            e.error = est.error;
            e.evaluations = est.evaluations;
            if (est.diverging()) {
                e.status = ConditionStatus::Violated;
                e.witness = "restricted edge probability integral diverges: " + est.note;
            } else if (est.converged() && !undecided) {
                e.status = ConditionStatus::Satisfied;
            } else {
                e.status = ConditionStatus::Inconclusive;
                e.witness = est.note;
            }
        }
        evidence.push_back(std::move(e));
    }

    // (c) diagonal edge probability integrable.
    {
        ConditionEvidence e;
        e.id = "(c)";
        e.description = "diagonal edge probability integral";
        if (!W) {
            e.status = ConditionStatus::Satisfied;
            e.description += " (no edge kernel)";
        } else {
            IntegralEstimate est = quad::integrate_halfline(
                [&](double x) { return W->edge_prob(x, x); }, opts_1d(cfg));
            e.estimate = est.value;
            e.error = est.error;
            e.evaluations = est.evaluations;
            if (est.diverging()) {
                e.status = ConditionStatus::Violated;
                e.witness = "diagonal edge probability integral diverges";
            } else if (est.converged()) {
                e.status = ConditionStatus::Satisfied;
            } else {
                e.status = ConditionStatus::Inconclusive;
                e.witness = est.note;
            }
        }
        evidence.push_back(std::move(e));
    }

    // I in l1: structural, by the finite-prefix-plus-tail representation.
    {
        ConditionEvidence e;
        e.id = "I";
        e.description = "dust intensity is summable (finite prefix plus declared tail)";
        e.estimate = mg.I.total() + mg.I.tail_bound;
        e.status = ConditionStatus::Satisfied;
        evidence.push_back(std::move(e));
    }

    return make_verdict(std::move(evidence));
}

// ---------------------------------------------------------------------------
// Summability oracle

double DiscreteDist::mean_min_one() const {
    double sum = 0.0, total_p = 0.0;
    for (const auto& [v, p] : outcomes) {
        if (p < 0.0 || v < 0.0)
            throw NegativeValueError("discrete distribution needs nonnegative values/probs");
        sum += p * std::min(v, 1.0);
        total_p += p;
    }
    if (std::abs(total_p - 1.0) > 1e-9)
        throw ConfigError("discrete distribution probabilities must sum to 1");
    return sum;
}

double DiscreteDist::sample(RandomStream& rs) const {
    double u = rs.next_uniform();
    double cum = 0.0;
    for (const auto& [v, p] : outcomes) {
        cum += p;
        if (u < cum) return v;
    }
    return outcomes.empty() ? 0.0 : outcomes.back().first;
}

SummabilityReport summability_oracle(const std::vector<DiscreteDist>& terms, int n_samples,
                                     const RngKey& key) {
    SummabilityReport out;
    std::vector<std::size_t> marks;
    for (std::size_t m = 1; m <= terms.size(); m *= 2) marks.push_back(m);
    if (marks.empty() || marks.back() != terms.size()) marks.push_back(terms.size());

    // Predicted side: partial sums of E[1 ^ Z_j] on the doubling schedule.
    {
        double sum = 0.0;
        std::size_t next = 0;
        for (std::size_t j = 0; j < terms.size(); ++j) {
            sum += terms[j].mean_min_one();
            if (next < marks.size() && j + 1 == marks[next]) {
                out.expectation_partials.push_back(sum);
                ++next;
            }
        }
        out.predicted = quad::classify_partial_sums(out.expectation_partials);
    }

    // Empirical side: sampled partial sums at the same marks.
    out.empirical_mean.assign(marks.size(), 0.0);
    out.empirical_sd.assign(marks.size(), 0.0);
    std::vector<double> sums(marks.size() * static_cast<std::size_t>(n_samples), 0.0);
    for (int r = 0; r < n_samples; ++r) {
        RandomStream rs = key.child(kReplica, static_cast<std::uint64_t>(r)).stream();
        double sum = 0.0;
        std::size_t next = 0;
        for (std::size_t j = 0; j < terms.size(); ++j) {
            sum += terms[j].sample(rs);
            if (next < marks.size() && j + 1 == marks[next]) {
                sums[next * static_cast<std::size_t>(n_samples) + static_cast<std::size_t>(r)] =
                    sum;
                ++next;
            }
        }
    }
    for (std::size_t m = 0; m < marks.size(); ++m) {
        double mean = 0.0;
        for (int r = 0; r < n_samples; ++r)
            mean += sums[m * static_cast<std::size_t>(n_samples) + static_cast<std::size_t>(r)];
        mean /= n_samples;
        double var = 0.0;
        for (int r = 0; r < n_samples; ++r) {
            double d =
                sums[m * static_cast<std::size_t>(n_samples) + static_cast<std::size_t>(r)] -
                mean;
            var += d * d;
        }
        out.empirical_mean[m] = mean;
        out.empirical_sd[m] = n_samples > 1 ? std::sqrt(var / (n_samples - 1)) : 0.0;
    }
    return out;
}

}  // namespace exmeas
