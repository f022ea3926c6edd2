#include "exmeas/core.hpp"

#include <algorithm>
#include <cmath>

#include "exmeas/errors.hpp"

namespace exmeas {

namespace {

double overlap(double lo1, double hi1, double lo2, double hi2) {
    double lo = std::max(lo1, lo2);
    double hi = std::min(hi1, hi2);
    return hi > lo ? hi - lo : 0.0;
}

}  // namespace

double AdjacencyMeasureWindow::atom_mass() const {
    double sum = 0.0;
    for (const Atom& a : atoms) sum += a.weight;
    return sum;
}

double AdjacencyMeasureWindow::mass_in_rect(double ax, double bx, double ay, double by) const {
    double sum = 0.0;
    for (const Atom& a : atoms)
        if (ax <= a.x && a.x <= bx && ay <= a.y && a.y <= by) sum += a.weight;
    const double s = window;
    if (s > 0.0) {
        // Diagonal part: density beta*sqrt(2) per unit diagonal length, i.e.
        // diag_mass / s per unit of lambda(A cap B).
        double diag_overlap = overlap(std::max(ax, ay), std::min(bx, by), 0.0, s);
        sum += diag_mass * diag_overlap / s;
        double wx = overlap(ax, bx, 0.0, s);
        double wy = overlap(ay, by, 0.0, s);
        sum += plane_mass * wx * wy / (s * s);
        for (const LineMass& lm : line_masses) {
            if (lm.orientation == LineOrientation::Row) {
                if (ax <= lm.coordinate && lm.coordinate <= bx) sum += lm.mass * wy / s;
            } else {
                if (ay <= lm.coordinate && lm.coordinate <= by) sum += lm.mass * wx / s;
            }
        }
    }
    return sum;
}

std::vector<Atom> merge_atoms(std::vector<Atom> atoms) {
    std::sort(atoms.begin(), atoms.end(), [](const Atom& a, const Atom& b) {
        if (a.x != b.x) return a.x < b.x;
        if (a.y != b.y) return a.y < b.y;
        return a.weight < b.weight;
    });
    std::vector<Atom> merged;
    merged.reserve(atoms.size());
    for (const Atom& a : atoms) {
        if (!merged.empty() && merged.back().x == a.x && merged.back().y == a.y)
            merged.back().weight += a.weight;
        else
            merged.push_back(a);
    }
    return merged;
}

double window_mass(const AdjacencyMeasureWindow& w) {
    double sum = w.atom_mass() + w.diag_mass + w.plane_mass;
    for (const LineMass& lm : w.line_masses) sum += lm.mass;
    return sum;
}

// ---------------------------------------------------------------------------
// WKernel

double WKernel::prefix_row_sum(double x, double y, std::int64_t kmax) const {
    double sum = 0.0;
    for (std::int64_t k = 0; k <= kmax; ++k) sum += pmf(x, y, k);
    return sum;
}

double PoissonWKernel::pmf(double x, double y, std::int64_t k) const {
    double w = mean_(x, y);
    if (w < 0.0) throw NegativeValueError("Poisson multiplicity mean is negative");
    if (w == 0.0) return k == 0 ? 1.0 : 0.0;
    return std::exp(static_cast<double>(k) * std::log(w) - w -
                    std::lgamma(static_cast<double>(k) + 1.0));
}

double PoissonWKernel::edge_prob(double x, double y) const {
    double w = mean_(x, y);
    if (w < 0.0) throw NegativeValueError("Poisson multiplicity mean is negative");
    return -std::expm1(-w);
}

double PoissonWKernel::mean_multiplicity(double x, double y) const {
    double w = mean_(x, y);
    if (w < 0.0) throw NegativeValueError("Poisson multiplicity mean is negative");
    return w;
}

std::int64_t PoissonWKernel::sample(double x, double y, double u) const {
    double w = mean_(x, y);
    if (w < 0.0) throw NegativeValueError("Poisson multiplicity mean is negative");
    if (w == 0.0) return 0;
    double p = std::exp(-w);
    double cum = p;
    std::int64_t k = 0;
    const std::int64_t cap = static_cast<std::int64_t>(w + 12.0 * std::sqrt(w + 1.0) + 60.0);
    while (u >= cum && k < cap) {
        ++k;
        p *= w / static_cast<double>(k);
        cum += p;
    }
    return k;
}

double PoissonWKernel::tail_bound(double x, double y, std::int64_t kmax) const {
    return std::max(0.0, 1.0 - prefix_row_sum(x, y, kmax));
}

TableWKernel::TableWKernel(std::function<double(double, double, double)> pmf, std::int64_t kmax)
    : pmf_(std::move(pmf)), kmax_(kmax) {
    if (kmax_ < 1) throw ConfigError("table W kernel needs kmax >= 1");
}

double TableWKernel::slot(double x, double y, std::int64_t k) const {
    double p = pmf_(x, y, static_cast<double>(k));
    if (p < 0.0 || p > 1.0 + 1e-12)
        throw NegativeValueError("table W kernel: pmf value outside [0, 1]");
    return p;
}

double TableWKernel::pmf(double x, double y, std::int64_t k) const {
    if (k == 0) {
        double rem = 1.0;
        for (std::int64_t j = 1; j <= kmax_; ++j) rem -= slot(x, y, j);
        if (rem < -1e-9)
            throw NegativeValueError("table W kernel: multiplicity weights exceed 1");
        return std::max(rem, 0.0);
    }
    if (k > kmax_) return 0.0;
    return slot(x, y, k);
}

double TableWKernel::edge_prob(double x, double y) const {
    double sum = 0.0;
    for (std::int64_t j = 1; j <= kmax_; ++j) sum += slot(x, y, j);
    if (sum > 1.0 + 1e-9)
        throw NegativeValueError("table W kernel: multiplicity weights exceed 1");
    return std::min(sum, 1.0);
}

double TableWKernel::mean_multiplicity(double x, double y) const {
    double sum = 0.0;
    for (std::int64_t j = 1; j <= kmax_; ++j) sum += static_cast<double>(j) * slot(x, y, j);
    return sum;
}

std::int64_t TableWKernel::sample(double x, double y, double u) const {
    double cum = pmf(x, y, 0);
    if (u < cum) return 0;
    for (std::int64_t k = 1; k <= kmax_; ++k) {
        cum += slot(x, y, k);
        if (u < cum) return k;
    }
    return 0;  // u beyond total only by rounding; treat as no edge
}

// ---------------------------------------------------------------------------
// StarIntensity / DustIntensity

double StarIntensity::prefix_total(double v) const {
    double sum = 0.0;
    for (std::int64_t k = 0; k <= kmax(); ++k) sum += value(v, k);
    return sum;
}

double StarIntensity::sum_from_one(double v) const {
    double sum = 0.0;
    for (std::int64_t k = 1; k <= kmax(); ++k) sum += value(v, k);
    return sum;
}

double StarIntensity::mean_mark_mass(double v) const {
    double sum = 0.0;
    for (std::int64_t k = 1; k <= kmax(); ++k) sum += static_cast<double>(k) * value(v, k);
    return sum;
}

std::vector<double> StarIntensity::row(double v) const {
    std::vector<double> out(static_cast<std::size_t>(kmax() + 1));
    for (std::int64_t k = 0; k <= kmax(); ++k) out[static_cast<std::size_t>(k)] = value(v, k);
    return out;
}

double ExprStarIntensity::value(double v, std::int64_t k) const {
    double s = s_(v, static_cast<double>(k));
    if (s < 0.0) throw NegativeValueError("star intensity probed negative");
    return s;
}

double DustIntensity::total() const {
    double sum = 0.0;
    for (double w : weights) {
        if (w < 0.0) throw NegativeValueError("dust intensity has a negative weight");
        sum += w;
    }
    return sum;
}

double DustIntensity::mean_mass() const {
    double sum = 0.0;
    for (std::size_t k = 1; k < weights.size(); ++k)
        sum += static_cast<double>(k) * weights[k];
    return sum;
}

bool DustIntensity::is_zero() const {
    for (double w : weights)
        if (w != 0.0) return false;
    return true;
}

// ---------------------------------------------------------------------------
// Verdict

const ConditionEvidence* Verdict::find(const std::string& id) const {
    for (const ConditionEvidence& e : evidence)
        if (e.id == id) return &e;
    return nullptr;
}

Verdict make_verdict(std::vector<ConditionEvidence> evidence) {
    Verdict v;
    v.evidence = std::move(evidence);
    bool any_violated = false;
    bool all_satisfied = true;
    for (const ConditionEvidence& e : v.evidence) {
        if (e.status == ConditionStatus::Violated) {
            any_violated = true;
            if (e.witness.empty())
                throw Error("internal: violated condition " + e.id + " lacks a witness");
        }
        if (e.status != ConditionStatus::Satisfied) all_satisfied = false;
    }
    if (any_violated)
        v.status = FinitenessStatus::NotLocallyFinite;
    else if (all_satisfied)
        v.status = FinitenessStatus::LocallyFinite;
    else
        v.status = FinitenessStatus::Inconclusive;
    return v;
}

const char* to_string(FinitenessStatus s) {
    switch (s) {
        case FinitenessStatus::LocallyFinite: return "LocallyFinite";
        case FinitenessStatus::NotLocallyFinite: return "NotLocallyFinite";
        default: return "Inconclusive";
    }
}

const char* to_string(ConditionStatus s) {
    switch (s) {
        case ConditionStatus::Satisfied: return "satisfied";
        case ConditionStatus::Violated: return "violated";
        case ConditionStatus::Inconclusive: return "inconclusive";
        default: return "skipped";
    }
}

}  // namespace exmeas
