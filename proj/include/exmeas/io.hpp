#pragma once

#include <cstdint>
#include <ostream>
#include <string>

#include "exmeas/core.hpp"
#include "exmeas/sampler.hpp"

namespace exmeas {

// 17-significant-digit decimal form (value round-trips bit-exactly);
// locale-independent.
std::string fmt_real17(double v);
// Shortest round-trip decimal form, for headers and JSON-adjacent text.
std::string fmt_shortest(double v);

// Atom lines as "x<TAB>y<TAB>mult" under the versioned header
// "# exmeas-atoms v1 window=<s> seed=<n> mark_cap=<T>". Byte-stable for
// fixed inputs.
void write_atoms_tsv(std::ostream& os, const AdjacencyMeasureWindow& w, std::uint64_t seed,
                     double mark_cap);

// Sidecar summary document: totals, continuous masses, per-part masses and
// the truncation-error estimate.
std::string summary_json(const AdjacencyMeasureWindow& w, std::uint64_t seed, double mark_cap,
                         const TruncationError& te);

// Verdict as a JSON document (estimates, statuses, witnesses, cutoffs).
std::string verdict_json(const Verdict& v);

// Human-readable per-condition table.
void print_verdict_table(std::ostream& os, const Verdict& v);

}  // namespace exmeas
