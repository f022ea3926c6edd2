#include "exmeas/rng.hpp"

#include <cmath>

#include "exmeas/errors.hpp"

namespace exmeas {

namespace {

std::uint64_t absorb(std::uint64_t h, std::uint64_t v) {
    return mix64((h ^ v) * 0x2545F4914F6CDD1DULL + 0x9E3779B97F4A7C15ULL);
}

// Sequential inversion; exact for small means where the tests look closely.
std::int64_t poisson_inversion(RandomStream& rs, double mean) {
    double p = std::exp(-mean);
    double cum = p;
    double u = rs.next_uniform();
    std::int64_t k = 0;
    // Cap far out in the tail; for mean <= 30 the bound is unreachable in
    // practice and only guards against rounding residue near u ~ 1.
    const std::int64_t cap = static_cast<std::int64_t>(mean + 12.0 * std::sqrt(mean + 1.0) + 60.0);
    while (u > cum && k < cap) {
        ++k;
        p *= mean / static_cast<double>(k);
        cum += p;
    }
    return k;
}

// Hormann (1993), "The transformed rejection method for generating Poisson
// random variables", algorithm PTRD. Exact for mean >= 10.
std::int64_t poisson_ptrd(RandomStream& rs, double mean) {
    const double b = 0.931 + 2.53 * std::sqrt(mean);
    const double a = -0.059 + 0.02483 * b;
    const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
    const double v_r = 0.9277 - 3.6224 / (b - 2.0);

    for (;;) {
        double u = rs.next_uniform() - 0.5;
        double v = rs.next_uniform();
        double us = 0.5 - std::abs(u);
        double kf = std::floor((2.0 * a / us + b) * u + mean + 0.43);
        if (us >= 0.07 && v <= v_r) return static_cast<std::int64_t>(kf);
        if (kf < 0.0 || (us < 0.013 && v > us)) continue;
        double k = kf;
        double lhs = std::log(v * inv_alpha / (a / (us * us) + b));
        double rhs = k * std::log(mean) - mean - std::lgamma(k + 1.0);
        if (lhs <= rhs) return static_cast<std::int64_t>(kf);
    }
}

}  // namespace

std::int64_t RandomStream::next_poisson(double mean) {
    if (!(mean >= 0.0)) throw NegativeValueError("Poisson mean must be nonnegative");
    if (mean == 0.0) return 0;
    if (mean <= 30.0) return poisson_inversion(*this, mean);
    return poisson_ptrd(*this, mean);
}

std::uint64_t RngKey::derive() const {
    std::uint64_t h = mix64(seed_ + 0x9E3779B97F4A7C15ULL);
    for (const Step& s : path_) {
        h = absorb(h, (static_cast<std::uint64_t>(s.label) << 1) | 1ULL);
        h = absorb(h, s.index);
    }
    return h;
}

}  // namespace exmeas
