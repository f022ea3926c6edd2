#include "exmeas/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <memory>
#include <numeric>

#include "exmeas/dsl.hpp"
#include "exmeas/errors.hpp"
#include "exmeas/parallel.hpp"
#include "exmeas/poisson.hpp"
#include "exmeas/quadrature.hpp"

namespace exmeas {

namespace {

double normal_two_sided_p(double z) { return std::erfc(std::abs(z) / std::sqrt(2.0)); }

struct MeanSd {
    double mean = 0.0;
    double sd = 0.0;
};

MeanSd mean_sd(const std::vector<double>& xs) {
    MeanSd out;
    if (xs.empty()) return out;
    double sum = 0.0, carry = 0.0;
    for (double x : xs) {  // compensated
        double y = x - carry;
        double t = sum + y;
        carry = (t - sum) - y;
        sum = t;
    }
    out.mean = sum / static_cast<double>(xs.size());
    double var = 0.0;
    for (double x : xs) var += (x - out.mean) * (x - out.mean);
    out.sd = xs.size() > 1 ? std::sqrt(var / static_cast<double>(xs.size() - 1)) : 0.0;
    return out;
}

std::vector<double> collect_parallel(int n, const std::function<double(const RngKey&)>& stat,
                                     const RngKey& key) {
    std::vector<double> out(static_cast<std::size_t>(n));
    parallel_for_index(static_cast<std::size_t>(n), [&](std::size_t i) {
        out[i] = stat(key.child(kReplica, i));
    });
    return out;
}

}  // namespace

WindowSampler bind_sampler(Multigraphex mg, double s, TruncationConfig tc) {
    return [mg = std::move(mg), s, tc](const RngKey& k) {
        return sample_multigraphex(mg, s, tc, k);
    };
}

WindowSampler bind_sampler(KallenbergRep rep, double s, TruncationConfig tc) {
    return [rep = std::move(rep), s, tc](const RngKey& k) {
        return sample_kallenberg(rep, s, tc, k);
    };
}

WindowSampler bind_skewed_sampler(Multigraphex mg, double s, double a, TruncationConfig tc) {
    // Adds a second independent vertex process on [0, a), which doubles the
    // vertex intensity there and breaks joint exchangeability.
    return [mg = std::move(mg), s, a, tc](const RngKey& k) {
        AdjacencyMeasureWindow base = sample_multigraphex(mg, s, tc, k);
        MarkedPoints extra = sample_unit_pp(k.child(kSkewExtra), a, tc.mark_cap);
        std::vector<Atom> atoms = base.atoms;
        if (mg.W) {
            RandomStream rs = k.child(kSkewExtra, 1).stream();
            for (std::size_t i = 0; i < extra.size(); ++i) {
                for (std::size_t j = 0; j < i; ++j) {
                    std::int64_t mult =
                        mg.W->sample(extra[i].mark, extra[j].mark, rs.next_uniform());
                    if (mult >= 1) {
                        double w = static_cast<double>(mult);
                        atoms.push_back({extra[i].position, extra[j].position, w});
                        atoms.push_back({extra[j].position, extra[i].position, w});
                        base.parts.edge_offdiag += 2.0 * w;
                    }
                }
                // Cross edges against the base process are intentionally
                // omitted; the mass shift on [0,a)^2 is already decisive.
            }
        }
        base.atoms = merge_atoms(std::move(atoms));
        return base;
    };
}

WindowSampler bind_mixture_sampler(Multigraphex a, Multigraphex b, double s,
                                   TruncationConfig tc) {
    return [a = std::move(a), b = std::move(b), s, tc](const RngKey& k) {
        double coin = k.child(kMixtureCoin).stream().next_uniform();
        const Multigraphex& pick = coin < 0.5 ? a : b;
        return sample_multigraphex(pick, s, tc, k);
    };
}

bool test_symmetry(const AdjacencyMeasureWindow& w) {
    std::vector<Atom> swapped;
    swapped.reserve(w.atoms.size());
    for (const Atom& a : w.atoms) swapped.push_back({a.y, a.x, a.weight});
    swapped = merge_atoms(std::move(swapped));
    if (swapped.size() != w.atoms.size()) return false;
    for (std::size_t i = 0; i < swapped.size(); ++i) {
        const Atom& a = w.atoms[i];
        const Atom& b = swapped[i];
        if (a.x != b.x || a.y != b.y || a.weight != b.weight) return false;
    }
    return true;
}

// ---------------------------------------------------------------------------
// Rank / correlation primitives

TestReport rank_two_sample(const std::vector<double>& a, const std::vector<double>& b,
                           double alpha, const std::string& name) {
    TestReport r;
    r.name = name;
    r.alpha = alpha;
    r.sample_sizes = {static_cast<long>(a.size()), static_cast<long>(b.size())};
    r.null_ref = "Mann-Whitney U, normal approximation with tie correction, two-sided";

    const std::size_t n1 = a.size(), n2 = b.size();
    if (n1 == 0 || n2 == 0) {
        r.degenerate = true;
        r.note = "empty sample";
        return r;
    }
    std::vector<std::pair<double, int>> pooled;
    pooled.reserve(n1 + n2);
    for (double x : a) pooled.emplace_back(x, 0);
    for (double x : b) pooled.emplace_back(x, 1);
    std::sort(pooled.begin(), pooled.end());
    if (pooled.front().first == pooled.back().first) {
        r.degenerate = true;
        r.p_value = 1.0;
        r.note = "all pooled values identical; pass by convention";
        return r;
    }

    // Mid-ranks with tie correction.
    const std::size_t n = n1 + n2;
    std::vector<double> ranks(n);
    double tie_term = 0.0;
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && pooled[j + 1].first == pooled[i].first) ++j;
        double mid = 0.5 * (static_cast<double>(i + 1) + static_cast<double>(j + 1));
        for (std::size_t t = i; t <= j; ++t) ranks[t] = mid;
        double ties = static_cast<double>(j - i + 1);
        tie_term += ties * (ties * ties - 1.0);
        i = j + 1;
    }
    double rank_sum_a = 0.0;
    for (std::size_t t = 0; t < n; ++t)
        if (pooled[t].second == 0) rank_sum_a += ranks[t];
    const double u = rank_sum_a - static_cast<double>(n1) * (n1 + 1.0) / 2.0;
    const double mean_u = static_cast<double>(n1) * static_cast<double>(n2) / 2.0;
    const double nn = static_cast<double>(n);
    double var_u = static_cast<double>(n1) * static_cast<double>(n2) / 12.0 *
                   ((nn + 1.0) - tie_term / (nn * (nn - 1.0)));
    if (var_u <= 0.0) {
        r.degenerate = true;
        r.p_value = 1.0;
        r.note = "zero rank variance; pass by convention";
        return r;
    }
    const double z = (u - mean_u) / std::sqrt(var_u);
    r.statistic = z;
    r.p_value = normal_two_sided_p(z);
    r.reject = r.p_value < alpha;
    return r;
}

TestReport correlation_ztest(const std::vector<double>& a, const std::vector<double>& b,
                             double alpha, const std::string& name) {
    TestReport r;
    r.name = name;
    r.alpha = alpha;
    r.sample_sizes = {static_cast<long>(a.size())};
    r.null_ref = "corr * sqrt(n) against normal(0,1), two-sided";
    if (a.size() != b.size() || a.size() < 3) throw ConfigError("correlation needs paired samples");
    MeanSd ma = mean_sd(a), mb = mean_sd(b);
    if (ma.sd == 0.0 || mb.sd == 0.0) {
        r.degenerate = true;
        r.p_value = 1.0;
        r.note = "degenerate: a block mass is a.s. constant; pass by convention";
        return r;
    }
    double cov = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) cov += (a[i] - ma.mean) * (b[i] - mb.mean);
    cov /= static_cast<double>(a.size() - 1);
    const double corr = cov / (ma.sd * mb.sd);
    const double z = corr * std::sqrt(static_cast<double>(a.size()));
    r.statistic = corr;
    r.p_value = normal_two_sided_p(z);
    r.reject = r.p_value < alpha;
    return r;
}

double lsq_slope(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2) throw ConfigError("slope needs paired points");
    double mx = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
    double my = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(y.size());
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        num += (x[i] - mx) * (y[i] - my);
        den += (x[i] - mx) * (x[i] - mx);
    }
    if (den == 0.0) throw ConfigError("slope needs distinct x values");
    return num / den;
}

// ---------------------------------------------------------------------------
// Exchangeability

TestReport test_exchangeability(const WindowSampler& sampler, double a, int n_per_side,
                                double alpha, const RngKey& key) {
    struct Rect {
        double ax, bx, ay, by;
    };
    // phi swaps [0,a) and [a,2a); phi is its own inverse.
    auto swap_iv = [a](double lo, double hi) {
        if (hi <= a) return std::pair<double, double>{lo + a, hi + a};
        return std::pair<double, double>{lo - a, hi - a};
    };
    const Rect battery[4] = {
        {0.0, a, 0.0, a},
        {0.0, a, a, 2.0 * a},
        {a, 2.0 * a, a, 2.0 * a},
        {0.0, 0.5 * a, 0.5 * a, a},
    };

    // Independent batches on each side of the comparison.
    std::vector<std::vector<double>> lhs(4), rhs(4);
    for (auto& v : lhs) v.resize(static_cast<std::size_t>(n_per_side));
    for (auto& v : rhs) v.resize(static_cast<std::size_t>(n_per_side));
    parallel_for_index(static_cast<std::size_t>(n_per_side), [&](std::size_t i) {
        AdjacencyMeasureWindow w1 = sampler(key.child(kReplica, 2 * i));
        AdjacencyMeasureWindow w2 = sampler(key.child(kReplica, 2 * i + 1));
        for (int b = 0; b < 4; ++b) {
            const Rect& r = battery[b];
            lhs[static_cast<std::size_t>(b)][i] = w1.mass_in_rect(r.ax, r.bx, r.ay, r.by);
            auto [pax, pbx] = swap_iv(r.ax, r.bx);
            auto [pay, pby] = swap_iv(r.ay, r.by);
            rhs[static_cast<std::size_t>(b)][i] = w2.mass_in_rect(pax, pbx, pay, pby);
        }
    });

    TestReport combined;
    combined.name = "exchangeability (interval swap)";
    combined.alpha = alpha;
    combined.null_ref = "4 rank tests, Bonferroni-combined";
    combined.sample_sizes = {n_per_side, n_per_side};
    combined.p_value = 1.0;
    bool all_degenerate = true;
    for (int b = 0; b < 4; ++b) {
        TestReport t = rank_two_sample(lhs[static_cast<std::size_t>(b)],
                                       rhs[static_cast<std::size_t>(b)], alpha / 4.0,
                                       "rect pair " + std::to_string(b));
        if (!t.degenerate) {
            all_degenerate = false;
            double adj = std::min(1.0, t.p_value * 4.0);  // Bonferroni
            if (adj < combined.p_value) {
                combined.p_value = adj;
                combined.statistic = t.statistic;
                combined.note = "worst rectangle pair: " + std::to_string(b);
            }
        }
    }
    if (all_degenerate) {
        combined.degenerate = true;
        combined.note = "all rectangle masses degenerate; pass by convention";
    }
    combined.reject = !combined.degenerate && combined.p_value < alpha;
    return combined;
}

// ---------------------------------------------------------------------------
// Block independence

TestReport test_block_independence(const WindowSampler& sampler, double r, double rp, int n,
                                   double alpha, const RngKey& key) {
    std::vector<double> block1(static_cast<std::size_t>(n)), block2(static_cast<std::size_t>(n));
    parallel_for_index(static_cast<std::size_t>(n), [&](std::size_t i) {
        AdjacencyMeasureWindow w = sampler(key.child(kReplica, i));
        block1[i] = w.mass_in_rect(0.0, r, 0.0, r);
        block2[i] = w.mass_in_rect(r, rp, r, rp);
    });
    TestReport t = correlation_ztest(block1, block2, alpha, "block independence");
    t.note += (t.note.empty() ? "" : "; ") + std::string("blocks [0,") + std::to_string(r) +
              ")^2 and [" + std::to_string(r) + "," + std::to_string(rp) + ")^2";
    return t;
}

// ---------------------------------------------------------------------------
// Campbell first-moment check

TestReport campbell_check(const Multigraphex& mg, double s, double T, int n,
                          const RngKey& key) {
    TestReport r;
    r.name = "Campbell first-moment agreement";
    r.alpha = 0.0;  // deterministic 3-standard-error rule
    r.null_ref = "|empirical mean - prediction| <= 3 SE per part";
    r.sample_sizes = {n};

    // Quadrature predictions, part by part.
    quad::Options o2;
    o2.tol = 1e-5;
    double pred_offdiag = 0.0, pred_loop = 0.0, pred_star = 0.0, pred_dust = 0.0;
    if (mg.W) {
        quad::IntegralEstimate graph = quad::integrate_plane(
            [&](double x, double y) {
                return (x <= T && y <= T) ? mg.W->mean_multiplicity(x, y) : 0.0;
            },
            o2);
        quad::IntegralEstimate loops = quad::integrate_halfline(
            [&](double v) { return v <= T ? mg.W->mean_multiplicity(v, v) : 0.0; }, o2);
        if (!graph.converged() || !loops.converged()) {
            r.degenerate = true;
            r.note = "first moment not quadrature-computable (diverging or inconclusive); "
                     "test skipped: finite a.s. does not imply a finite mean";
            return r;
        }
        pred_offdiag = s * s * graph.value;
        pred_loop = s * loops.value;
    }
    if (mg.S) {
        quad::IntegralEstimate star = quad::integrate_halfline(
            [&](double v) { return v <= T ? mg.S->mean_mark_mass(v) : 0.0; }, o2);
        if (!star.converged()) {
            r.degenerate = true;
            r.note = "star first moment not quadrature-computable; test skipped";
            return r;
        }
        pred_star = 2.0 * s * s * star.value;
    }
    pred_dust = 2.0 * s * s * mg.I.mean_mass();

    // Empirical per-part masses.
    TruncationConfig tc;
    tc.mark_cap = T;
    std::vector<double> offdiag(static_cast<std::size_t>(n)), loops(static_cast<std::size_t>(n)),
        stars(static_cast<std::size_t>(n)), dust(static_cast<std::size_t>(n));
    parallel_for_index(static_cast<std::size_t>(n), [&](std::size_t i) {
        AdjacencyMeasureWindow w = sample_multigraphex(mg, s, tc, key.child(kReplica, i));
        offdiag[i] = w.parts.edge_offdiag;
        loops[i] = w.parts.edge_diag;
        stars[i] = w.parts.star;
        dust[i] = w.parts.dust;
    });

    struct Part {
        const char* name;
        double prediction;
        const std::vector<double>* values;
    };
    const Part parts[4] = {{"graph", pred_offdiag, &offdiag},
                           {"loops", pred_loop, &loops},
                           {"star", pred_star, &stars},
                           {"dust", pred_dust, &dust}};
    double worst = 0.0;
    bool pass = true;
    char line[160];
    for (const Part& p : parts) {
        MeanSd ms = mean_sd(*p.values);
        double se = ms.sd / std::sqrt(static_cast<double>(n));
        double dev = std::abs(ms.mean - p.prediction);
        if (se == 0.0) {
            if (dev > 1e-12) pass = false;
        } else {
            double zscore = dev / se;
            worst = std::max(worst, zscore);
            if (zscore > 3.0) pass = false;
        }
        std::snprintf(line, sizeof(line), "%s: mean %.6g vs prediction %.6g (SE %.3g); ",
                      p.name, ms.mean, p.prediction, se);
        r.note += line;
    }
    r.statistic = worst;
    r.p_value = pass ? 1.0 : 0.0;
    r.reject = !pass;
    return r;
}

// ---------------------------------------------------------------------------
// Counter-example growth demo

const char* counterexample_star_expression() {
    return "ind(x,0,1)*ind(mod(floor(y),2),0,0)";
}

std::function<double(double, double)> counterexample_star_kernel() {
    auto expr = std::make_shared<dsl::Expr>(dsl::parse_or_throw(counterexample_star_expression()));
    return [expr](double x, double y) { return expr->eval(dsl::Env::with_xy(x, y)); };
}

GrowthResult star_mass_growth(const std::function<double(double, double)>& g,
                              const std::vector<double>& mark_caps, int n, const RngKey& key) {
    GrowthResult out;
    std::vector<double> xs, ys;
    for (std::size_t t = 0; t < mark_caps.size(); ++t) {
        const double T = mark_caps[t];
        GrowthRow row;
        row.mark_cap = T;
        if (T > 0.0) {
            KallenbergRep rep;
            rep.g = g;
            rep.g_prime = g;
            TruncationConfig tc;
            tc.mark_cap = T;
            RngKey cap_key = key.child(kReplica, t);
            std::vector<double> masses = collect_parallel(
                n,
                [&](const RngKey& k) {
                    AdjacencyMeasureWindow w = sample_kallenberg(rep, 1.0, tc, k);
                    return 0.5 * w.parts.star;  // one orientation
                },
                cap_key);
            MeanSd ms = mean_sd(masses);
            row.mean_mass = ms.mean;
            row.std_error = ms.sd / std::sqrt(static_cast<double>(n));
        }
        out.rows.push_back(row);
        xs.push_back(T);
        ys.push_back(row.mean_mass);
    }
    out.slope = xs.size() >= 2 ? lsq_slope(xs, ys) : 0.0;
    return out;
}

GrowthResult counterexample_demo(const std::vector<double>& mark_caps, int n,
                                 const RngKey& key) {
    return star_mass_growth(counterexample_star_kernel(), mark_caps, n, key);
}

}  // namespace exmeas
