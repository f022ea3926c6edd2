#include "exmeas/sampler.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <string>

#include "exmeas/errors.hpp"
#include "exmeas/parallel.hpp"
#include "exmeas/poisson.hpp"

namespace exmeas {

namespace {

constexpr double kSqrt2 = 1.4142135623730951;

void check_weight(double w, const char* what) {
    if (!std::isfinite(w)) throw EvalError(std::string(what) + " evaluated non-finite");
    if (w < 0.0) throw NegativeValueError(std::string(what) + " probed negative");
}

[[noreturn]] void cap_abort(const std::string& which) {
    throw ResourceLimitError(
        which +
        " cap exceeded; this usually means the model is not locally finite "
        "(run `exmeas certify` and look at condition (ii))");
}

struct AtomBuckets {
    // Per-task atom vectors, concatenated in task order for determinism.
    std::vector<std::vector<Atom>> buckets;
    explicit AtomBuckets(std::size_t n) : buckets(n) {}
    std::vector<Atom> concat() && {
        std::size_t total = 0;
        for (const auto& b : buckets) total += b.size();
        std::vector<Atom> out;
        out.reserve(total);
        for (auto& b : buckets) out.insert(out.end(), b.begin(), b.end());
        return out;
    }
};

void check_window(double s, const TruncationConfig& tc) {
    if (!(s > 0.0) || !std::isfinite(s)) throw ConfigError("window size must be positive");
    if (!(tc.mark_cap >= 0.0) || !std::isfinite(tc.mark_cap))
        throw ConfigError("mark cap must be finite and nonnegative");
}

}  // namespace

AdjacencyMeasureWindow sample_kallenberg(const KallenbergRep& rep, double s,
                                         const TruncationConfig& tc, const RngKey& key) {
    check_window(s, tc);
    const double T = tc.mark_cap;

    AdjacencyMeasureWindow w;
    w.window = s;
    w.diag_mass = rep.beta * kSqrt2 * s;
    w.plane_mass = rep.gamma * s * s;

    MarkedPoints vertices = sample_unit_pp(key.child(kVertexProcess), s, T);
    const std::int64_t n = static_cast<std::int64_t>(vertices.size());
    if (n > tc.max_latent_points) cap_abort("latent vertex");

    std::atomic<std::int64_t> atom_count{0};
    std::atomic<std::int64_t> latent_count{n};
    auto count_atoms = [&](std::int64_t more) {
        if (atom_count.fetch_add(more, std::memory_order_relaxed) + more > tc.max_atoms)
            cap_abort("atom");
    };
    auto count_latent = [&](std::int64_t more) {
        if (latent_count.fetch_add(more, std::memory_order_relaxed) + more >
            tc.max_latent_points)
            cap_abort("latent point");
    };

    std::vector<Atom> atoms;
    PartMasses parts;

    // Edge part: all ordered pairs including i = j, with the uniform keyed on
    // the unordered pair so both orientations see the same zeta.
    if (rep.f) {
        AtomBuckets edge(static_cast<std::size_t>(n));
        std::vector<std::pair<double, double>> part_sums(static_cast<std::size_t>(n), {0, 0});
        parallel_for_index(static_cast<std::size_t>(n), [&](std::size_t i) {
            std::vector<Atom>& out = edge.buckets[i];
            double offdiag = 0.0, diag = 0.0;
            for (std::size_t j = 0; j < static_cast<std::size_t>(n); ++j) {
                double u = key.child(kEdgePair, unordered_pair_code(i, j)).stream().next_uniform();
                double weight = rep.f(vertices[i].mark, vertices[j].mark, u);
                check_weight(weight, "edge kernel");
                if (weight > 0.0) {
                    if (i == j) {
                        out.push_back({vertices[i].position, vertices[i].position, weight});
                        diag += weight;
                    } else {
                        out.push_back({vertices[i].position, vertices[j].position, weight});
                        offdiag += weight;
                    }
                }
            }
            count_atoms(static_cast<std::int64_t>(out.size()));
            part_sums[i] = {offdiag, diag};
        });
        std::vector<Atom> edge_atoms = std::move(edge).concat();
        atoms.insert(atoms.end(), edge_atoms.begin(), edge_atoms.end());
        for (auto& [offdiag, diag] : part_sums) {
            parts.edge_offdiag += offdiag;
            parts.edge_diag += diag;
        }
    }

    // Star part: one marked process per vertex, both orientations.
    if (rep.g || rep.g_prime) {
        AtomBuckets star(static_cast<std::size_t>(n));
        std::vector<double> star_sums(static_cast<std::size_t>(n), 0.0);
        parallel_for_index(static_cast<std::size_t>(n), [&](std::size_t j) {
            MarkedPoints pts = sample_unit_pp(key.child(kStarProcess, j), s, T);
            count_latent(static_cast<std::int64_t>(pts.size()));
            std::vector<Atom>& out = star.buckets[j];
            double sum = 0.0;
            const double theta = vertices[j].position;
            const double v = vertices[j].mark;
            for (const MarkedPoint& p : pts) {
                if (rep.g) {
                    double weight = rep.g(v, p.mark);
                    check_weight(weight, "star kernel");
                    if (weight > 0.0) {
                        out.push_back({theta, p.position, weight});
                        sum += weight;
                    }
                }
                if (rep.g_prime) {
                    double weight = rep.g_prime(v, p.mark);
                    check_weight(weight, "star kernel");
                    if (weight > 0.0) {
                        out.push_back({p.position, theta, weight});
                        sum += weight;
                    }
                }
            }
            count_atoms(static_cast<std::int64_t>(out.size()));
            star_sums[j] = sum;
        });
        std::vector<Atom> star_atoms = std::move(star).concat();
        atoms.insert(atoms.end(), star_atoms.begin(), star_atoms.end());
        for (double v : star_sums) parts.star += v;
    }

    // Dust part: one triple process, both orientations.
    if (rep.l || rep.l_prime) {
        std::vector<TriplePoint> pts = sample_triple_pp(key.child(kDustProcess), s, T);
        count_latent(static_cast<std::int64_t>(pts.size()));
        for (const TriplePoint& p : pts) {
            if (rep.l) {
                double weight = rep.l(p.mark);
                check_weight(weight, "dust kernel");
                if (weight > 0.0) {
                    atoms.push_back({p.x, p.y, weight});
                    parts.dust += weight;
                }
            }
            if (rep.l_prime) {
                double weight = rep.l_prime(p.mark);
                check_weight(weight, "dust kernel");
                if (weight > 0.0) {
                    atoms.push_back({p.y, p.x, weight});
                    parts.dust += weight;
                }
            }
        }
        count_atoms(0);
    }

    // Line masses: h gives rows (fixed first coordinate), h' columns.
    for (std::int64_t j = 0; j < n; ++j) {
        const double theta = vertices[static_cast<std::size_t>(j)].position;
        const double v = vertices[static_cast<std::size_t>(j)].mark;
        if (rep.h) {
            double density = rep.h(v);
            check_weight(density, "line density");
            if (density > 0.0) w.line_masses.push_back({theta, LineOrientation::Row, density * s});
        }
        if (rep.h_prime) {
            double density = rep.h_prime(v);
            check_weight(density, "line density");
            if (density > 0.0)
                w.line_masses.push_back({theta, LineOrientation::Column, density * s});
        }
    }

    w.atoms = merge_atoms(std::move(atoms));
    w.parts = parts;
    return w;
}

AdjacencyMeasureWindow sample_multigraphex(const Multigraphex& mg, double s,
                                           const TruncationConfig& tc, const RngKey& key) {
    check_window(s, tc);
    const double T = tc.mark_cap;

    AdjacencyMeasureWindow w;
    w.window = s;

    MarkedPoints vertices = sample_unit_pp(key.child(kVertexProcess), s, T);
    const std::int64_t n = static_cast<std::int64_t>(vertices.size());
    if (n > tc.max_latent_points) cap_abort("latent vertex");

    std::atomic<std::int64_t> atom_count{0};
    std::atomic<std::int64_t> latent_count{n};
    auto count_atoms = [&](std::int64_t more) {
        if (atom_count.fetch_add(more, std::memory_order_relaxed) + more > tc.max_atoms)
            cap_abort("atom");
    };
    auto count_latent = [&](std::int64_t more) {
        if (latent_count.fetch_add(more, std::memory_order_relaxed) + more >
            tc.max_latent_points)
            cap_abort("latent point");
    };

    std::vector<Atom> atoms;
    PartMasses parts;

    // Graph part: unordered pairs i <= j. W is evaluated once per pair with
    // the lower-index mark first, so the draw is well defined (and the output
    // exactly symmetric) even if a user expression is not symmetric.
    if (mg.W) {
        AtomBuckets edge(static_cast<std::size_t>(n));
        std::vector<std::pair<double, double>> part_sums(static_cast<std::size_t>(n), {0, 0});
        parallel_for_index(static_cast<std::size_t>(n), [&](std::size_t i) {
            std::vector<Atom>& out = edge.buckets[i];
            double offdiag = 0.0, diag = 0.0;
            for (std::size_t j = i; j < static_cast<std::size_t>(n); ++j) {
                double u = key.child(kEdgePair, unordered_pair_code(i, j)).stream().next_uniform();
                std::int64_t mult = mg.W->sample(vertices[i].mark, vertices[j].mark, u);
                if (mult >= 1) {
                    double weight = static_cast<double>(mult);
                    if (i == j) {
                        out.push_back({vertices[i].position, vertices[i].position, weight});
                        diag += weight;
                    } else {
                        out.push_back({vertices[i].position, vertices[j].position, weight});
                        out.push_back({vertices[j].position, vertices[i].position, weight});
                        offdiag += 2.0 * weight;
                    }
                }
            }
            count_atoms(static_cast<std::int64_t>(out.size()));
            part_sums[i] = {offdiag, diag};
        });
        std::vector<Atom> edge_atoms = std::move(edge).concat();
        atoms.insert(atoms.end(), edge_atoms.begin(), edge_atoms.end());
        for (auto& [offdiag, diag] : part_sums) {
            parts.edge_offdiag += offdiag;
            parts.edge_diag += diag;
        }
    }

    // Star part: marks live on [0, sum_k S(v_j, k)], which is finite because
    // S(v_j, .) is summable; the mark cap T plays no role here. Marks
    // classified into the k = 0 slot produce nothing.
    if (mg.S) {
        AtomBuckets star(static_cast<std::size_t>(n));
        std::vector<double> star_sums(static_cast<std::size_t>(n), 0.0);
        parallel_for_index(static_cast<std::size_t>(n), [&](std::size_t j) {
            const double v = vertices[j].mark;
            std::vector<double> row = mg.S->row(v);
            double height = 0.0;
            for (double r : row) height += r;
            if (height <= 0.0) return;
            MarkedPoints pts = sample_unit_pp(key.child(kStarProcess, j), s, height);
            count_latent(static_cast<std::int64_t>(pts.size()));
            std::vector<Atom>& out = star.buckets[j];
            double sum = 0.0;
            const double theta = vertices[j].position;
            for (const MarkedPoint& p : pts) {
                auto r = inverse_cdf(row, p.mark);
                if (r && *r >= 1) {
                    double weight = static_cast<double>(*r);
                    out.push_back({theta, p.position, weight});
                    out.push_back({p.position, theta, weight});
                    sum += 2.0 * weight;
                }
            }
            count_atoms(static_cast<std::int64_t>(out.size()));
            star_sums[j] = sum;
        });
        std::vector<Atom> star_atoms = std::move(star).concat();
        atoms.insert(atoms.end(), star_atoms.begin(), star_atoms.end());
        for (double v : star_sums) parts.star += v;
    }

    // Dust part: triple process with marks on [0, sum_k I(k)].
    if (!mg.I.weights.empty() && !mg.I.is_zero()) {
        const double height = mg.I.total();
        std::vector<TriplePoint> pts = sample_triple_pp(key.child(kDustProcess), s, height);
        count_latent(static_cast<std::int64_t>(pts.size()));
        for (const TriplePoint& p : pts) {
            auto r = inverse_cdf(mg.I.weights, p.mark);
            if (r && *r >= 1) {
                double weight = static_cast<double>(*r);
                atoms.push_back({p.x, p.y, weight});
                atoms.push_back({p.y, p.x, weight});
                parts.dust += 2.0 * weight;
            }
        }
        count_atoms(0);
    }

    w.atoms = merge_atoms(std::move(atoms));
    w.parts = parts;
    return w;
}

// ---------------------------------------------------------------------------
// Truncation error

TruncationError truncation_error(const Multigraphex& mg, double s, double T) {
    TruncationError out;
    quad::Options opts;
    opts.tol = 1e-6;
    double total = 0.0, err = 0.0;

    if (mg.W) {
        quad::IntegralEstimate graph = quad::integrate_plane(
            [&](double x, double y) {
                return std::max(x, y) > T ? mg.W->edge_prob(x, y) : 0.0;
            },
            quad::Options{}.with_tol(1e-5));
        if (graph.diverging()) {
            out.verdict = quad::Verdict::Diverging;
            out.note = "graph-part truncation loss diverges: " + graph.note;
            return out;
        }
        if (!graph.converged()) {
            out.verdict = quad::Verdict::Inconclusive;
            out.note = "graph-part truncation loss inconclusive: " + graph.note;
            return out;
        }
        total += s * s * graph.value;
        err += s * s * graph.error;
    }

    if (mg.S) {
        quad::IntegralEstimate star = quad::integrate_halfline(
            [&](double v) {
                return v > T ? std::min(mg.S->sum_from_one(v), opts.divergence_threshold) : 0.0;
            },
            opts);
        if (star.diverging()) {
            out.verdict = quad::Verdict::Diverging;
            out.note = "star-part truncation loss diverges: " + star.note;
            return out;
        }
        if (!star.converged()) {
            out.verdict = quad::Verdict::Inconclusive;
            out.note = "star-part truncation loss inconclusive: " + star.note;
            return out;
        }
        total += 2.0 * s * s * star.value;
        err += 2.0 * s * s * star.error;
        // Declared l1 tail of S: star marks beyond the stored prefix are
        // never sampled. Expected loss: vertices ~ s*T, tail marks ~ s*tail.
        err += 2.0 * s * s * T * mg.S->tail_bound();
    }

    // Same for the I prefix tail (no vertex factor for dust).
    err += 2.0 * s * s * mg.I.tail_bound;

    out.value = total;
    out.error = err;
    out.verdict = quad::Verdict::Converged;
    return out;
}

TruncationError truncation_error(const KallenbergRep& rep, double s, double T) {
    TruncationError out;
    double total = 0.0, err = 0.0;

    if (rep.f) {
        // z-measure of {f(x,y,z) > 0} plays the role of the edge probability.
        quad::IntegralEstimate graph = quad::integrate_plane(
            [&](double x, double y) {
                if (std::max(x, y) <= T) return 0.0;
                quad::IntegralEstimate pz = quad::integrate_unit(
                    [&](double z) { return rep.f(x, y, z) > 0.0 ? 1.0 : 0.0; }, 1e-6);
                return pz.value;
            },
            quad::Options{}.with_tol(1e-5));
        if (!graph.converged()) {
            out.verdict = graph.verdict;
            out.note = "graph-part truncation loss: " + graph.note;
            return out;
        }
        total += s * s * graph.value;
        err += s * s * graph.error;
    }

    auto star_term = [&](const std::function<double(double, double)>& g,
                         const char* name) -> bool {
        if (!g) return true;
        // Lost star atoms: vertices with mark above T (full mark line), plus
        // marks above T for retained vertices.
        quad::IntegralEstimate high_vertex = quad::integrate_halfline(
            [&](double v) {
                if (v <= T) return 0.0;
                quad::ThresholdDecision d = quad::exceeds_threshold(
                    [&](double chi) { return g(v, chi) > 0.0 ? 1.0 : 0.0; }, 1e6);
                if (d.result == quad::Exceeds::Yes) return 1e6;
                return d.value;
            },
            quad::Options{}.with_tol(1e-5));
        bool mark_tail_divergent = false;
        quad::IntegralEstimate high_mark = quad::integrate_halfline(
            [&](double v) {
                if (v > T || mark_tail_divergent) return 0.0;
                quad::IntegralEstimate tail = quad::integrate_halfline(
                    [&](double chi) { return chi > T && g(v, chi) > 0.0 ? 1.0 : 0.0; },
                    quad::Options{}.with_tol(1e-5));
                if (tail.diverging()) {
                    mark_tail_divergent = true;
                    return 0.0;
                }
                return tail.value;
            },
            quad::Options{}.with_tol(1e-5));
        if (mark_tail_divergent || high_vertex.diverging() || high_mark.diverging()) {
            out.verdict = quad::Verdict::Diverging;
            out.note = std::string(name) + "-part truncation loss has no finite bound";
            return false;
        }
        if (!high_vertex.converged() || !high_mark.converged()) {
            out.verdict = quad::Verdict::Inconclusive;
            out.note = std::string(name) + "-part truncation loss inconclusive";
            return false;
        }
        total += s * s * (high_vertex.value + high_mark.value);
        err += s * s * (high_vertex.error + high_mark.error);
        return true;
    };
    if (!star_term(rep.g, "star")) return out;
    if (!star_term(rep.g_prime, "mirrored star")) return out;

    auto dust_term = [&](const std::function<double(double)>& l) -> bool {
        if (!l) return true;
        quad::IntegralEstimate tail = quad::integrate_halfline(
            [&](double eta) { return eta > T && l(eta) > 0.0 ? 1.0 : 0.0; },
            quad::Options{}.with_tol(1e-5));
        if (!tail.converged()) {
            out.verdict = tail.verdict;
            out.note = "dust-part truncation loss has no finite bound";
            return false;
        }
        total += s * s * tail.value;
        err += s * s * tail.error;
        return true;
    };
    if (!dust_term(rep.l)) return out;
    if (!dust_term(rep.l_prime)) return out;

    // h/h' enter through the vertex marks only.
    auto line_term = [&](const std::function<double(double)>& h) -> bool {
        if (!h) return true;
        quad::IntegralEstimate lost = quad::integrate_halfline(
            [&](double v) { return v > T && h(v) > 0.0 ? 1.0 : 0.0; },
            quad::Options{}.with_tol(1e-5));
        if (!lost.converged()) {
            out.verdict = lost.verdict;
            out.note = "line-part truncation loss has no finite bound";
            return false;
        }
        total += s * lost.value;
        err += s * lost.error;
        return true;
    };
    if (!line_term(rep.h)) return out;
    if (!line_term(rep.h_prime)) return out;

    out.value = total;
    out.error = err;
    out.verdict = quad::Verdict::Converged;
    return out;
}

// ---------------------------------------------------------------------------
// Level-set conversion

namespace {

// Probes a value that must be within 1e-9 of an integer.
std::int64_t required_integer(double v, const char* what) {
    double r = std::round(v);
    if (std::abs(v - r) > 1e-9 || r < 0.0)
        throw ConfigError(std::string(what) +
                          " must be integer-valued and nonnegative (probed " +
                          std::to_string(v) + ")");
    return static_cast<std::int64_t>(r);
}

// Level-set W: W(x,y,k) = lambda{z in [0,1] : f(x,y,z) = k}, with the k = 0
// slot normalized as the remainder.
class LevelSetWKernel final : public WKernel {
public:
    LevelSetWKernel(std::function<double(double, double, double)> f, std::int64_t kmax)
        : f_(std::move(f)), kmax_(kmax) {}

    double pmf(double x, double y, std::int64_t k) const override {
        if (k == 0) {
            double rem = 1.0;
            for (std::int64_t j = 1; j <= kmax_; ++j) rem -= level_measure(x, y, j);
            return std::max(rem, 0.0);
        }
        if (k > kmax_) return 0.0;
        return level_measure(x, y, k);
    }
    double edge_prob(double x, double y) const override {
        double sum = 0.0;
        for (std::int64_t j = 1; j <= kmax_; ++j) sum += level_measure(x, y, j);
        return std::min(sum, 1.0);
    }
    double mean_multiplicity(double x, double y) const override {
        double sum = 0.0;
        for (std::int64_t j = 1; j <= kmax_; ++j)
            sum += static_cast<double>(j) * level_measure(x, y, j);
        return sum;
    }
    std::int64_t sample(double x, double y, double u) const override {
        double cum = pmf(x, y, 0);
        if (u < cum) return 0;
        for (std::int64_t k = 1; k <= kmax_; ++k) {
            cum += level_measure(x, y, k);
            if (u < cum) return k;
        }
        return 0;
    }
    double tail_bound(double, double, std::int64_t) const override { return 0.0; }

private:
    double level_measure(double x, double y, std::int64_t k) const {
        quad::IntegralEstimate est = quad::integrate_unit(
            [&](double z) {
                std::int64_t v = required_integer(f_(x, y, z), "edge kernel");
                return v == k ? 1.0 : 0.0;
            },
            1e-9);
        return std::min(est.value, 1.0);
    }

    std::function<double(double, double, double)> f_;
    std::int64_t kmax_;
};

// Level-set S: S(x, k) = lambda{y : g(x, y) = k} for k >= 1; slot 0 is zero.
class LevelSetStarIntensity final : public StarIntensity {
public:
    LevelSetStarIntensity(std::function<double(double, double)> g, std::int64_t kmax)
        : g_(std::move(g)), kmax_(kmax) {}

    double value(double v, std::int64_t k) const override {
        if (k == 0) return 0.0;
        quad::IntegralEstimate est = quad::integrate_halfline(
            [&](double y) {
                std::int64_t r = required_integer(g_(v, y), "star kernel");
                return r == k ? 1.0 : 0.0;
            },
            quad::Options{}.with_tol(1e-6));
        if (est.diverging())
            throw ConfigError(
                "star level-set measure diverges at vertex mark " + std::to_string(v) +
                "; the model violates the finite-star condition (certifier condition (ii))");
        return est.value;
    }
    std::int64_t kmax() const override { return kmax_; }
    double tail_bound() const override { return 0.0; }

private:
    std::function<double(double, double)> g_;
    std::int64_t kmax_;
};

// Largest integer value seen on a probe grid; bounds the level index range.
std::int64_t probe_max_value(const std::function<double(double)>& f, double lo, double hi,
                             int n, const char* what) {
    std::int64_t vmax = 0;
    for (int i = 0; i <= n; ++i) {
        double x = lo + (hi - lo) * i / n;
        vmax = std::max(vmax, required_integer(f(x), what));
    }
    return vmax;
}

}  // namespace

Multigraphex kallenberg_to_multigraphex(
    const std::function<double(double, double, double)>& f,
    const std::function<double(double, double)>& g, const std::function<double(double)>& l) {
    Multigraphex mg;

    if (f) {
        std::int64_t kmax = 1;
        for (double x : {0.1, 0.9, 3.7, 17.0})
            for (double y : {0.2, 1.3, 8.5})
                kmax = std::max(kmax, probe_max_value([&](double z) { return f(x, y, z); }, 0.0,
                                                      1.0, 257, "edge kernel"));
        mg.W = std::make_shared<LevelSetWKernel>(f, kmax + 1);
    }

    if (g) {
        std::int64_t kmax = 1;
        for (double x : {0.1, 0.9, 3.7, 17.0})
            kmax = std::max(kmax, probe_max_value([&](double y) { return g(x, y); }, 0.0, 64.0,
                                                  1024, "star kernel"));
        mg.S = std::make_shared<LevelSetStarIntensity>(g, kmax + 1);
    }

    if (l) {
        std::int64_t kmax = probe_max_value(l, 0.0, 64.0, 1024, "dust kernel");
        mg.I.weights.assign(static_cast<std::size_t>(kmax + 2), 0.0);
        for (std::int64_t k = 1; k <= kmax + 1; ++k) {
            quad::IntegralEstimate est = quad::integrate_halfline(
                [&](double y) {
                    return required_integer(l(y), "dust kernel") == k ? 1.0 : 0.0;
                },
                quad::Options{}.with_tol(1e-6));
            if (est.diverging())
                throw ConfigError("dust level-set measure diverges; I would leave l1");
            mg.I.weights[static_cast<std::size_t>(k)] = est.value;
        }
    }

    return mg;
}

}  // namespace exmeas
