// exmeas: sample finite windows of jointly exchangeable random measures and
// certify local finiteness numerically.

#include <CLI11.hpp>

#include "exmeas/commands.hpp"

int main(int argc, char** argv) {
    CLI::App app{"sampling and local-finiteness certification for jointly exchangeable "
                 "random measures on the positive quadrant"};
    app.require_subcommand(1);

    exmeas::SampleArgs sample;
    CLI::App* cmd_sample = app.add_subcommand("sample", "sample a window to TSV + JSON summary");
    cmd_sample->add_option("config", sample.config_path, "model config file")->required();
    cmd_sample->add_option("--window", sample.window, "window size s (window is [0,s]^2)")
        ->check(CLI::PositiveNumber);
    cmd_sample->add_option("--mark-cap", sample.mark_cap, "latent mark cap T");
    cmd_sample->add_option("--seed", sample.seed, "root seed");
    cmd_sample->add_option("--out", sample.out_path, "atoms TSV path (default: stdout)");

    exmeas::CertifyArgs certify;
    CLI::App* cmd_certify =
        app.add_subcommand("certify", "run the local-finiteness certifier");
    cmd_certify->add_option("config", certify.config_path, "model config file")->required();
    cmd_certify->add_option("--tol", certify.tol, "override quadrature tolerance");
    cmd_certify->add_flag("--json", certify.json, "machine-readable output");

    exmeas::DemoArgs demo;
    CLI::App* cmd_demo = app.add_subcommand(
        "demo", "growth law of the built-in non-locally-finite star kernel");
    cmd_demo->add_option("--T-list", demo.mark_caps, "mark caps to sweep")->delimiter(',');
    cmd_demo->add_option("--samples", demo.samples, "windows per cap")->check(CLI::PositiveNumber);
    cmd_demo->add_option("--seed", demo.seed, "root seed");
    cmd_demo->add_option("--csv", demo.csv_path, "CSV output path (default: stdout)");

    exmeas::VerifyArgs verify;
    CLI::App* cmd_verify =
        app.add_subcommand("verify", "statistical verification suites (gated by certify)");
    cmd_verify->add_option("config", verify.config_path, "model config file")->required();
    cmd_verify->add_option("--suite", verify.suite,
                           "exchangeability | independence | campbell | all");
    cmd_verify->add_option("--samples", verify.samples, "replicas per suite")
        ->check(CLI::PositiveNumber);
    cmd_verify->add_option("--seed", verify.seed, "root seed");
    cmd_verify->add_option("--alpha", verify.alpha, "test level");

    CLI11_PARSE(app, argc, argv);

    if (cmd_sample->parsed()) return exmeas::cmd_sample(sample);
    if (cmd_certify->parsed()) return exmeas::cmd_certify(certify);
    if (cmd_demo->parsed()) return exmeas::cmd_demo(demo);
    if (cmd_verify->parsed()) return exmeas::cmd_verify(verify);
    return 1;
}
