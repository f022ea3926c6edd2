#include "exmeas/commands.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "exmeas/config.hpp"
#include "exmeas/errors.hpp"
#include "exmeas/finiteness.hpp"
#include "exmeas/harness.hpp"
#include "exmeas/io.hpp"

namespace exmeas {

namespace {

Verdict certify_config(const ModelConfig& cfg) {
    CertifyConfig cc;
    cc.tol_1d = cfg.tol_1d;
    cc.tol_nested = cfg.tol_2d;
    if (cfg.mode == ModelConfig::Mode::Kallenberg)
        return certify_kallenberg(build_kallenberg(cfg), cc);
    return certify_multigraphex(build_multigraphex(cfg), cc);
}

int verdict_exit_code(FinitenessStatus s) {
    switch (s) {
        case FinitenessStatus::LocallyFinite: return 0;
        case FinitenessStatus::NotLocallyFinite: return 4;
        default: return 5;
    }
}

void print_report(std::ostream& out, const TestReport& r) {
    out << (r.reject ? "[REJECT] " : (r.degenerate ? "[DEGEN]  " : "[PASS]   ")) << r.name
        << ": statistic=" << fmt_shortest(r.statistic) << " p=" << fmt_shortest(r.p_value)
        << " alpha=" << fmt_shortest(r.alpha) << " n=";
    for (std::size_t i = 0; i < r.sample_sizes.size(); ++i)
        out << (i ? "/" : "") << r.sample_sizes[i];
    out << " null=" << r.null_ref;
    if (!r.note.empty()) out << "\n         " << r.note;
    out << "\n";
}

}  // namespace

int cmd_sample(const SampleArgs& args, std::ostream& out, std::ostream& err) {
    try {
        ModelConfig cfg = load_model_config(args.config_path);
        TruncationConfig tc = cfg.truncation;
        if (args.mark_cap >= 0.0) tc.mark_cap = args.mark_cap;
        if (tc.mark_cap < 0.0) throw ConfigError("mark cap is required (flag or config)");

        RngKey key(args.seed);
        AdjacencyMeasureWindow w;
        TruncationError te;
        if (cfg.mode == ModelConfig::Mode::Kallenberg) {
            KallenbergRep rep = build_kallenberg(cfg);
            w = sample_kallenberg(rep, args.window, tc, key);
            te = truncation_error(rep, args.window, tc.mark_cap);
        } else {
            Multigraphex mg = build_multigraphex(cfg);
            w = sample_multigraphex(mg, args.window, tc, key);
            te = truncation_error(mg, args.window, tc.mark_cap);
        }

        if (args.out_path.empty()) {
            write_atoms_tsv(out, w, args.seed, tc.mark_cap);
        } else {
            std::ofstream file(args.out_path, std::ios::binary);
            if (!file) throw ConfigError("cannot write to '" + args.out_path + "'");
            write_atoms_tsv(file, w, args.seed, tc.mark_cap);
            std::ofstream summary(args.out_path + ".summary.json", std::ios::binary);
            if (!summary)
                throw ConfigError("cannot write to '" + args.out_path + ".summary.json'");
            summary << summary_json(w, args.seed, tc.mark_cap, te);
        }
        return 0;
    } catch (const ResourceLimitError& e) {
        err << "error: " << e.what() << "\n";
        return 3;
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
}

int cmd_certify(const CertifyArgs& args, std::ostream& out, std::ostream& err) {
    try {
        ModelConfig cfg = load_model_config(args.config_path);
        if (args.tol > 0.0) {
            cfg.tol_1d = args.tol;
            cfg.tol_2d = std::max(args.tol, 1e-6);
        }
        Verdict v = certify_config(cfg);
        if (args.json)
            out << verdict_json(v);
        else
            print_verdict_table(out, v);
        return verdict_exit_code(v.status);
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
}

int cmd_demo(const DemoArgs& args, std::ostream& out, std::ostream& err) {
    try {
        GrowthResult growth =
            counterexample_demo(args.mark_caps, args.samples, RngKey(args.seed));
        out << "counter-example star kernel: " << counterexample_star_expression() << "\n";
        out << "T         mean_mass     stderr\n";
        std::ostringstream csv;
        csv << "T,mean_mass,stderr\n";
        for (const GrowthRow& row : growth.rows) {
            out << fmt_shortest(row.mark_cap) << "\t" << fmt_shortest(row.mean_mass) << "\t"
                << fmt_shortest(row.std_error) << "\n";
            csv << fmt_shortest(row.mark_cap) << "," << fmt_shortest(row.mean_mass) << ","
                << fmt_shortest(row.std_error) << "\n";
        }
        out << "fitted slope: " << fmt_shortest(growth.slope)
            << " (one-orientation growth is T/2 for this kernel)\n";
        if (args.csv_path.empty()) {
            out << csv.str();
        } else {
            std::ofstream file(args.csv_path, std::ios::binary);
            if (!file) throw ConfigError("cannot write to '" + args.csv_path + "'");
            file << csv.str();
        }
        return 0;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
}

int cmd_verify(const VerifyArgs& args, std::ostream& out, std::ostream& err) {
    try {
        ModelConfig cfg = load_model_config(args.config_path);
        const bool want_exch = args.suite == "exchangeability" || args.suite == "all";
        const bool want_indep = args.suite == "independence" || args.suite == "all";
        const bool want_campbell = args.suite == "campbell" || args.suite == "all";
        if (!want_exch && !want_indep && !want_campbell)
            throw ConfigError("unknown suite '" + args.suite + "'");

        // Certification gate before any sampling suite.
        Verdict v = certify_config(cfg);
        out << "certification gate: " << to_string(v.status) << "\n";
        if (v.status != FinitenessStatus::LocallyFinite) {
            print_verdict_table(out, v);
            err << "error: certification gate failed; refusing to run sampling suites\n";
            return verdict_exit_code(v.status);
        }

        if (cfg.mode != ModelConfig::Mode::Multigraphex)
            throw ConfigError("verify suites target multigraphex configs");
        Multigraphex mg = build_multigraphex(cfg);
        TruncationConfig tc = cfg.truncation;
        if (tc.mark_cap <= 0.0) throw ConfigError("verify needs a positive mark_cap");

        RngKey key(args.seed);
        bool all_pass = true;
        if (want_exch) {
            const double a = 1.0;
            TestReport r = test_exchangeability(bind_sampler(mg, 2.0 * a, tc), a,
                                                args.samples, args.alpha, key.child(1));
            print_report(out, r);
            all_pass = all_pass && !r.reject;
        }
        if (want_indep) {
            TestReport r = test_block_independence(bind_sampler(mg, 2.0, tc), 1.0, 2.0,
                                                   args.samples, args.alpha, key.child(2));
            print_report(out, r);
            all_pass = all_pass && !r.reject;
        }
        if (want_campbell) {
            TestReport r = campbell_check(mg, 1.0, tc.mark_cap, args.samples, key.child(3));
            print_report(out, r);
            all_pass = all_pass && !r.reject;
        }
        return all_pass ? 0 : 1;
    } catch (const ResourceLimitError& e) {
        err << "error: " << e.what() << "\n";
        return 3;
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
}

}  // namespace exmeas
