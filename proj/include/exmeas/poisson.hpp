#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "exmeas/rng.hpp"

namespace exmeas {

// A point of a marked Poisson process: position in [0, s], mark in [0, T].
struct MarkedPoint {
    double position;
    double mark;
};
using MarkedPoints = std::vector<MarkedPoint>;

// A point of the dust process on [0, s] x [0, s] x [0, T].
struct TriplePoint {
    double x;
    double y;
    double mark;
};

// Unit-rate Poisson process on [0, s] x [0, T]: draws N ~ Poisson(s*T), then
// N independent uniform points. Pure in (key, s, T). Rejects s*T > 1e9.
MarkedPoints sample_unit_pp(const RngKey& key, double s, double T);

// Unit-rate Poisson process on [0, s]^2 x [0, T] (count ~ Poisson(s^2 * T)).
std::vector<TriplePoint> sample_triple_pp(const RngKey& key, double s, double T);

// Discrete inverse CDF over a nonnegative weight sequence indexed from 0:
// returns the unique r with cum(r-1) <= u < cum(r), half-open so the map is a
// function; nullopt ("no atom") when u >= total. Throws on a negative weight.
std::optional<std::int64_t> inverse_cdf(std::span<const double> weights, double u);

}  // namespace exmeas
