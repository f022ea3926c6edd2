#include "exmeas/poisson.hpp"

#include <cmath>
#include <string>

#include "exmeas/errors.hpp"

namespace exmeas {

namespace {

void check_box(double s, double T, double area) {
    if (!(s >= 0.0) || !(T >= 0.0) || !std::isfinite(s) || !std::isfinite(T))
        throw ConfigError("Poisson box sides must be finite and nonnegative");
    if (area > 1e9)
        throw ResourceLimitError("Poisson area " + std::to_string(area) +
                                 " exceeds the 1e9 resource guard");
}

}  // namespace

MarkedPoints sample_unit_pp(const RngKey& key, double s, double T) {
    const double area = s * T;
    check_box(s, T, area);
    RandomStream rs = key.stream();
    const std::int64_t n = rs.next_poisson(area);
    MarkedPoints pts;
    pts.reserve(static_cast<std::size_t>(n));
    for (std::int64_t i = 0; i < n; ++i) {
        double pos = rs.next_uniform(0.0, s);
        double mark = rs.next_uniform(0.0, T);
        pts.push_back({pos, mark});
    }
    return pts;
}

std::vector<TriplePoint> sample_triple_pp(const RngKey& key, double s, double T) {
    const double volume = s * s * T;
    check_box(s, T, volume);
    RandomStream rs = key.stream();
    const std::int64_t n = rs.next_poisson(volume);
    std::vector<TriplePoint> pts;
    pts.reserve(static_cast<std::size_t>(n));
    for (std::int64_t i = 0; i < n; ++i) {
        double x = rs.next_uniform(0.0, s);
        double y = rs.next_uniform(0.0, s);
        double mark = rs.next_uniform(0.0, T);
        pts.push_back({x, y, mark});
    }
    return pts;
}

std::optional<std::int64_t> inverse_cdf(std::span<const double> weights, double u) {
    double cum = 0.0;
    for (std::size_t r = 0; r < weights.size(); ++r) {
        const double w = weights[r];
        if (w < 0.0) throw NegativeValueError("inverse_cdf: negative weight at index " + std::to_string(r));
        cum += w;
        if (u < cum) return static_cast<std::int64_t>(r);
    }
    return std::nullopt;
}

}  // namespace exmeas
