#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace exmeas {

// ---------------------------------------------------------------------------
// Sampled windows

// A weighted point mass at (x, y). Multigraphex samples carry integer
// weights >= 1 (edge multiplicities); the general sampler may produce
// arbitrary positive real weights.
struct Atom {
    double x = 0.0;
    double y = 0.0;
    double weight = 0.0;
};

enum class LineOrientation : std::uint8_t {
    Row,     // fixed first coordinate: mass spread along {c} x [0, s]
    Column,  // fixed second coordinate: mass spread along [0, s] x {c}
};

struct LineMass {
    double coordinate = 0.0;
    LineOrientation orientation = LineOrientation::Row;
    double mass = 0.0;  // total over the window
};

// Per-part tallies of atom mass, filled by the samplers. edge_offdiag counts
// every off-diagonal pair atom (both mirror orientations), edge_diag the
// loop atoms, star and dust both orientations of their parts.
struct PartMasses {
    double edge_offdiag = 0.0;
    double edge_diag = 0.0;
    double star = 0.0;
    double dust = 0.0;
    double total() const { return edge_offdiag + edge_diag + star + dust; }
};

// The restriction of a sampled measure to [0, s]^2: merged weighted atoms
// plus the continuous contributions (diagonal, planar, per-vertex lines).
// Immutable by convention after the sampler returns it.
struct AdjacencyMeasureWindow {
    double window = 0.0;  // the window is [0, window]^2
    std::vector<Atom> atoms;
    double diag_mass = 0.0;   // beta * sqrt(2) * window
    double plane_mass = 0.0;  // gamma * window^2
    std::vector<LineMass> line_masses;
    PartMasses parts;

    double atom_mass() const;
    // Measure of the rectangle [ax, bx] x [ay, by] intersected with the window.
    double mass_in_rect(double ax, double bx, double ay, double by) const;
};

// Merges atoms at identical (x, y), summing weights (the deterministic tie
// rule for a probability-zero event), and sorts by (x, y).
std::vector<Atom> merge_atoms(std::vector<Atom> atoms);

// Total mass of the window: atom weights + diagonal + planar + line masses.
double window_mass(const AdjacencyMeasureWindow& w);

// ---------------------------------------------------------------------------
// Kallenberg representation

// The function tuple driving the general sampler. Empty std::function means
// the slot is identically zero and the sampler skips that part. All handles
// must return finite nonnegative values pointwise; whether their integrals
// behave is the certifier's question, not a type invariant.
struct KallenbergRep {
    std::function<double(double, double, double)> f;  // edge kernel f(x, y, z)
    bool f_symmetric = false;
    std::function<double(double, double)> g;        // star kernel, orientation (vertex, mark)
    std::function<double(double, double)> g_prime;  // mirrored orientation
    std::function<double(double)> h;                // row line density
    std::function<double(double)> h_prime;          // column line density
    std::function<double(double)> l;                // dust kernel
    std::function<double(double)> l_prime;
    double beta = 0.0;   // diagonal Lebesgue coefficient
    double gamma = 0.0;  // planar Lebesgue coefficient
};

// ---------------------------------------------------------------------------
// Multigraphex (W, S, I)

// Edge multiplicity kernel: a family of probability distributions on
// multiplicities k = 0, 1, 2, ... indexed by (x, y), with sum_k W(x,y,k) = 1.
class WKernel {
public:
    virtual ~WKernel() = default;

    virtual double pmf(double x, double y, std::int64_t k) const = 0;
    // 1 - W(x, y, 0), the edge probability; kept separate for stability.
    virtual double edge_prob(double x, double y) const = 0;
    // sum_k k * W(x, y, k), the mean multiplicity (may be +infinity).
    virtual double mean_multiplicity(double x, double y) const = 0;
    // Inverse CDF at u in [0, 1): the r with cum(r-1) <= u < cum(r).
    virtual std::int64_t sample(double x, double y, double u) const = 0;
    // Prefix row sum for the row-sum invariant check.
    virtual double prefix_row_sum(double x, double y, std::int64_t kmax) const;
    // Declared bound on 1 - prefix_row_sum.
    virtual double tail_bound(double x, double y, std::int64_t kmax) const = 0;
};

// W(x,y,k) = Poisson pmf with mean w(x, y).
class PoissonWKernel final : public WKernel {
public:
    explicit PoissonWKernel(std::function<double(double, double)> mean)
        : mean_(std::move(mean)) {}
    double pmf(double x, double y, std::int64_t k) const override;
    double edge_prob(double x, double y) const override;
    double mean_multiplicity(double x, double y) const override;
    std::int64_t sample(double x, double y, double u) const override;
    double tail_bound(double x, double y, std::int64_t kmax) const override;

private:
    std::function<double(double, double)> mean_;
};

// W(x,y,k) given by a user expression for 1 <= k <= kmax; the k = 0 slot is
// the normalizing remainder 1 - sum_{k>=1}. Negative remainders are rejected
// at evaluation time.
class TableWKernel final : public WKernel {
public:
    TableWKernel(std::function<double(double, double, double)> pmf, std::int64_t kmax);
    double pmf(double x, double y, std::int64_t k) const override;
    double edge_prob(double x, double y) const override;
    double mean_multiplicity(double x, double y) const override;
    std::int64_t sample(double x, double y, double u) const override;
    double tail_bound(double, double, std::int64_t) const override { return 0.0; }
    std::int64_t kmax() const { return kmax_; }

private:
    double slot(double x, double y, std::int64_t k) const;
    std::function<double(double, double, double)> pmf_;
    std::int64_t kmax_;
};

// Star intensity S: R+ -> l1, represented as an explicit finite prefix
// S(v, 0..kmax) plus a declared nonnegative tail bound. The k = 0 slot is
// the "no star" slot; only k >= 1 produces atoms.
class StarIntensity {
public:
    virtual ~StarIntensity() = default;
    virtual double value(double v, std::int64_t k) const = 0;
    virtual std::int64_t kmax() const = 0;
    virtual double tail_bound() const = 0;

    // sum_{k=0..kmax} S(v, k): the star-mark space height for vertex mark v.
    double prefix_total(double v) const;
    // sum_{k>=1} S(v, k) over the prefix.
    double sum_from_one(double v) const;
    // sum_k k * S(v, k) over the prefix (star mass first moment).
    double mean_mark_mass(double v) const;
    std::vector<double> row(double v) const;
};

class ExprStarIntensity final : public StarIntensity {
public:
    ExprStarIntensity(std::function<double(double, double)> s, std::int64_t kmax, double tail)
        : s_(std::move(s)), kmax_(kmax), tail_(tail) {}
    double value(double v, std::int64_t k) const override;
    std::int64_t kmax() const override { return kmax_; }
    double tail_bound() const override { return tail_; }

private:
    std::function<double(double, double)> s_;  // (v, k) -> S(v, k)
    std::int64_t kmax_;
    double tail_;
};

// Dust intensity: an explicit l1 prefix I(0..kmax) plus a tail bound.
struct DustIntensity {
    std::vector<double> weights;  // index k
    double tail_bound = 0.0;

    double total() const;
    double mean_mass() const;  // sum_k k * I(k)
    bool is_zero() const;
};

// The triple (W, S, I). Null W or S mean "identically trivial" (no edges /
// no stars). Immutable after construction; share freely across threads.
struct Multigraphex {
    std::shared_ptr<const WKernel> W;
    std::shared_ptr<const StarIntensity> S;
    DustIntensity I;
};

// ---------------------------------------------------------------------------
// Certification verdicts

enum class FinitenessStatus { LocallyFinite, NotLocallyFinite, Inconclusive };

enum class ConditionStatus { Satisfied, Violated, Inconclusive, Skipped };

struct ConditionEvidence {
    std::string id;           // "(i)".."(vi)", "(a)".."(c)", "S", "I"
    std::string description;  // what was checked
    double estimate = 0.0;    // the defining numeric estimate
    double error = 0.0;
    ConditionStatus status = ConditionStatus::Inconclusive;
    std::string witness;  // non-empty for Violated
    long evaluations = 0;
    // For infinity-set checks: (cutoff c, measure of {marginal > c}) pairs.
    std::vector<std::pair<double, double>> cutoff_measures;
};

struct Verdict {
    FinitenessStatus status = FinitenessStatus::Inconclusive;
    std::vector<ConditionEvidence> evidence;

    const ConditionEvidence* find(const std::string& id) const;
};

// Assembles the overall status from per-condition records and checks the
// structural invariants (a NotLocallyFinite verdict carries a violated
// condition with a witness; LocallyFinite requires every record Satisfied).
Verdict make_verdict(std::vector<ConditionEvidence> evidence);

const char* to_string(FinitenessStatus s);
const char* to_string(ConditionStatus s);

}  // namespace exmeas
