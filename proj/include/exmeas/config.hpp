#pragma once

#include <optional>
#include <string>
#include <vector>

#include "exmeas/core.hpp"
#include "exmeas/sampler.hpp"

namespace exmeas {

// A declared model: a flat key-value file with [model], [truncation] and
// [tolerances] sections. Function slots are expression strings; W may also
// be a built-in family descriptor such as poisson_pmf(mean="exp(-x-y)") or
// table(pmf="0.5*ind(k,1,1)", kmax=2).
struct ModelConfig {
    enum class Mode { Kallenberg, Multigraphex };
    Mode mode = Mode::Kallenberg;

    // Expression strings; empty means the slot is identically zero.
    // Arity contract: f uses x,y,z; g/g' use x,y; h/h'/l/l' use x;
    // W families use x,y (mean) or x,y,k (pmf); S uses v,k.
    std::string f, g, g_prime, h, h_prime, l, l_prime;
    double beta = 0.0;
    double gamma = 0.0;

    struct WSpec {
        enum class Family { None, Poisson, Table };
        Family family = Family::None;
        std::string expr;  // mean (Poisson) or pmf in x,y,k (Table)
        std::int64_t kmax = 0;
    } W;
    struct SSpec {
        std::string expr;  // S(v, k) over the prefix
        std::int64_t kmax = 0;
        double tail = 0.0;
    } S;
    std::vector<double> I;
    double I_tail = 0.0;

    TruncationConfig truncation;
    double tol_1d = 1e-6;
    double tol_2d = 1e-4;
};

// Parses a config file; throws ConfigError with a line reference on any
// syntax, arity, or value problem.
ModelConfig load_model_config(const std::string& path);
ModelConfig parse_model_config(const std::string& text, const std::string& origin);

// Materialize the declared model. Both throw ConfigError if the config is in
// the other mode.
KallenbergRep build_kallenberg(const ModelConfig& cfg);
Multigraphex build_multigraphex(const ModelConfig& cfg);

}  // namespace exmeas
