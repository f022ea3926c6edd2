#pragma once

#include "exmeas/core.hpp"
#include "exmeas/quadrature.hpp"
#include "exmeas/rng.hpp"

namespace exmeas {

// Latent marks are unbounded in the representation; simulation caps them at
// mark_cap and truncation_error() quantifies what the cap costs. The cap is
// user-owned on purpose: no default is correct for every model.
struct TruncationConfig {
    double mark_cap = 0.0;                    // T: marks simulated on [0, T]
    std::int64_t max_latent_points = 1000000; // vertices + star/dust points
    std::int64_t max_atoms = 5000000;
};

// Stream labels for the structural positions of the simulation.
enum StreamLabel : std::uint32_t {
    kVertexProcess = 1,
    kEdgePair = 2,
    kStarProcess = 3,
    kDustProcess = 4,
    kReplica = 5,
    kMixtureCoin = 6,
    kSkewExtra = 7,
};

// General window sampler from the function-tuple representation. Edge atoms
// over all ordered pairs (including loops) share the pair-keyed uniform, so
// a symmetric f yields exactly mirrored atoms; star and dust parts emit both
// orientations through g/g' and l/l'; h/h' become per-vertex line masses and
// beta/gamma the diagonal and planar masses. Throws ResourceLimitError when
// a cap trips (often the first symptom of a non-locally-finite model).
AdjacencyMeasureWindow sample_kallenberg(const KallenbergRep& rep, double s,
                                         const TruncationConfig& tc, const RngKey& key);

// Multigraphex window sampler per the (W, S, I) construction: pair draws via
// the inverse CDF of W with unordered-pair uniforms (exactly symmetric
// output), per-vertex star marks on [0, sum_k S(v, k)] classified through
// the inverse CDF of S, dust triples classified through I. Atom weights are
// the integer multiplicities r >= 1.
AdjacencyMeasureWindow sample_multigraphex(const Multigraphex& mg, double s,
                                           const TruncationConfig& tc, const RngKey& key);

// Expected number of atoms in [0, s]^2 lost to the mark cap T, by parts:
// graph pairs with a latent mark above T, stars on vertices with mark above
// T, plus the declared l1 tails of S and I. Diverging quadrature means no
// finite bound exists (the counter-example star part behaves this way).
struct TruncationError {
    double value = 0.0;
    double error = 0.0;
    quad::Verdict verdict = quad::Verdict::Inconclusive;
    std::string note;
};
TruncationError truncation_error(const Multigraphex& mg, double s, double T);
TruncationError truncation_error(const KallenbergRep& rep, double s, double T);

// Level-set conversion of integer-valued (f, g, l) into a multigraphex:
// W(x,y,k) is the z-measure of {f(x,y,z) = k} on [0,1], S(x,k) the y-measure
// of {g(x,y) = k}, I(k) the measure of {l(y) = k}. The k = 0 slots of S and I
// are canonically zero (any value there produces no atoms). Throws
// ConfigError when a probed value is further than 1e-9 from an integer.
Multigraphex kallenberg_to_multigraphex(const std::function<double(double, double, double)>& f,
                                        const std::function<double(double, double)>& g,
                                        const std::function<double(double)>& l);

}  // namespace exmeas
