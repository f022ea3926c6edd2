#pragma once

#include <cstdint>
#include <iostream>
#include <string>
#include <vector>

namespace exmeas {

// CLI entrypoints, callable in-process. Exit-code contract:
//   0 success / certified locally finite / all suites pass
//   2 configuration error
//   3 resource-cap abort while sampling
//   4 certified not locally finite (or the verify gate fails that way)
//   5 certification inconclusive
// Unexpected internal failures return 1.

struct SampleArgs {
    std::string config_path;
    double window = 1.0;
    double mark_cap = -1.0;  // <0: take the config's value
    std::uint64_t seed = 0;
    std::string out_path;  // atoms TSV; sidecar summary at out_path + ".summary.json"
};
int cmd_sample(const SampleArgs& args, std::ostream& out = std::cout,
               std::ostream& err = std::cerr);

struct CertifyArgs {
    std::string config_path;
    double tol = -1.0;  // <0: config tolerances
    bool json = false;
};
int cmd_certify(const CertifyArgs& args, std::ostream& out = std::cout,
                std::ostream& err = std::cerr);

struct DemoArgs {
    std::vector<double> mark_caps = {10.0, 20.0, 40.0, 80.0};
    int samples = 2000;
    std::uint64_t seed = 1;
    std::string csv_path;  // empty: CSV to stdout after the table
};
int cmd_demo(const DemoArgs& args, std::ostream& out = std::cout,
             std::ostream& err = std::cerr);

struct VerifyArgs {
    std::string config_path;
    std::string suite = "all";  // exchangeability | independence | campbell | all
    int samples = 2000;
    std::uint64_t seed = 1;
    double alpha = 0.01;
};
int cmd_verify(const VerifyArgs& args, std::ostream& out = std::cout,
               std::ostream& err = std::cerr);

}  // namespace exmeas
