#include "exmeas/io.hpp"

#include <charconv>
#include <cmath>
#include <iomanip>

#include <json.hpp>

namespace exmeas {

std::string fmt_real17(double v) {
    char buf[48];
    auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 17);
    return std::string(buf, res.ptr);
}

std::string fmt_shortest(double v) {
    char buf[48];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

void write_atoms_tsv(std::ostream& os, const AdjacencyMeasureWindow& w, std::uint64_t seed,
                     double mark_cap) {
    os << "# exmeas-atoms v1 window=" << fmt_shortest(w.window) << " seed=" << seed
       << " mark_cap=" << fmt_shortest(mark_cap) << "\n";
    for (const Atom& a : w.atoms)
        os << fmt_real17(a.x) << '\t' << fmt_real17(a.y) << '\t' << fmt_real17(a.weight)
           << '\n';
}

namespace {

const char* verdict_name(quad::Verdict v) {
    switch (v) {
        case quad::Verdict::Converged: return "converged";
        case quad::Verdict::Diverging: return "diverging";
        default: return "inconclusive";
    }
}

}  // namespace

std::string summary_json(const AdjacencyMeasureWindow& w, std::uint64_t seed, double mark_cap,
                         const TruncationError& te) {
    nlohmann::json j;
    j["format"] = "exmeas-summary v1";
    j["window"] = w.window;
    j["seed"] = seed;
    j["mark_cap"] = mark_cap;
    j["atom_count"] = w.atoms.size();
    j["atom_mass"] = w.atom_mass();
    j["diag_mass"] = w.diag_mass;
    j["plane_mass"] = w.plane_mass;
    double line_total = 0.0;
    for (const LineMass& lm : w.line_masses) line_total += lm.mass;
    j["line_mass"] = line_total;
    j["total_mass"] = window_mass(w);
    j["parts"] = {{"edge_offdiag", w.parts.edge_offdiag},
                  {"edge_diag", w.parts.edge_diag},
                  {"star", w.parts.star},
                  {"dust", w.parts.dust}};
    j["truncation_error"] = {
        {"value", te.value}, {"error", te.error}, {"verdict", verdict_name(te.verdict)}};
    if (!te.note.empty()) j["truncation_error"]["note"] = te.note;
    return j.dump(2) + "\n";
}

std::string verdict_json(const Verdict& v) {
    nlohmann::json j;
    j["status"] = to_string(v.status);
    j["conditions"] = nlohmann::json::array();
    for (const ConditionEvidence& e : v.evidence) {
        nlohmann::json c;
        c["id"] = e.id;
        c["description"] = e.description;
        c["status"] = to_string(e.status);
        if (std::isfinite(e.estimate)) c["estimate"] = e.estimate;
        if (std::isfinite(e.error)) c["error"] = e.error;
        if (!e.witness.empty()) c["witness"] = e.witness;
        if (!e.cutoff_measures.empty()) {
            nlohmann::json scan = nlohmann::json::array();
            for (auto [cutoff, measure] : e.cutoff_measures)
                scan.push_back({{"cutoff", cutoff}, {"measure", measure}});
            c["superlevel_scan"] = scan;
        }
        j["conditions"].push_back(c);
    }
    return j.dump(2) + "\n";
}

void print_verdict_table(std::ostream& os, const Verdict& v) {
    os << "condition  status        estimate      detail\n";
    for (const ConditionEvidence& e : v.evidence) {
        os << std::left << std::setw(11) << e.id << std::setw(14) << to_string(e.status)
           << std::setw(14) << fmt_shortest(e.estimate);
        os << e.description;
        if (!e.witness.empty()) os << " -- " << e.witness;
        if (!e.cutoff_measures.empty()) {
            os << " [scan:";
            for (auto [cutoff, measure] : e.cutoff_measures)
                os << " " << fmt_shortest(cutoff) << "->" << fmt_shortest(measure);
            os << "]";
        }
        os << "\n";
    }
    os << "verdict: " << to_string(v.status) << "\n";
}

}  // namespace exmeas
