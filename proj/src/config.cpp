#include "exmeas/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <memory>
#include <sstream>

#include "exmeas/dsl.hpp"
#include "exmeas/errors.hpp"

namespace exmeas {

namespace {

std::string trim(std::string_view sv) {
    std::size_t b = sv.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return "";
    std::size_t e = sv.find_last_not_of(" \t\r");
    return std::string(sv.substr(b, e - b + 1));
}

std::string strip_quotes(std::string s) {
    if (s.size() >= 2 && s.front() == '"' && s.back() == '"')
        return s.substr(1, s.size() - 2);
    return s;
}

double parse_double(const std::string& s, const std::string& where) {
    double v = 0.0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size())
        throw ConfigError(where + ": expected a number, got '" + s + "'");
    return v;
}

std::int64_t parse_int(const std::string& s, const std::string& where) {
    std::int64_t v = 0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size())
        throw ConfigError(where + ": expected an integer, got '" + s + "'");
    return v;
}

// Validates that an expression parses and only uses the allowed variables.
dsl::Expr checked_expr(const std::string& text, const std::string& slot,
                       std::string_view allowed) {
    auto parsed = dsl::parse(text);
    if (auto* err = std::get_if<dsl::ParseError>(&parsed))
        throw ConfigError(slot + ": parse error at offset " + std::to_string(err->position) +
                          ": " + err->message);
    dsl::Expr expr = std::get<dsl::Expr>(std::move(parsed));
    for (char v : expr.free_vars()) {
        if (allowed.find(v) == std::string_view::npos)
            throw ConfigError(slot + ": variable '" + std::string(1, v) +
                              "' is not available in this slot (allowed: " +
                              std::string(allowed) + ")");
    }
    return expr;
}

// Family descriptor: name(arg="...", arg=value, ...)
struct Descriptor {
    std::string name;
    std::vector<std::pair<std::string, std::string>> args;
};

std::optional<Descriptor> parse_descriptor(const std::string& text) {
    std::size_t open = text.find('(');
    if (open == std::string::npos || text.back() != ')') return std::nullopt;
    Descriptor d;
    d.name = trim(text.substr(0, open));
    if (d.name.empty() || !std::all_of(d.name.begin(), d.name.end(), [](char c) {
            return (c >= 'a' && c <= 'z') || c == '_';
        }))
        return std::nullopt;
    std::string inner = text.substr(open + 1, text.size() - open - 2);
    // Split on commas outside quotes.
    std::vector<std::string> parts;
    std::string cur;
    bool in_quote = false;
    for (char c : inner) {
        if (c == '"') in_quote = !in_quote;
        if (c == ',' && !in_quote) {
            parts.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    if (!trim(cur).empty()) parts.push_back(cur);
    for (const std::string& p : parts) {
        std::size_t eq = p.find('=');
        if (eq == std::string::npos) return std::nullopt;
        d.args.emplace_back(trim(p.substr(0, eq)), strip_quotes(trim(p.substr(eq + 1))));
    }
    return d;
}

std::vector<double> parse_list(const std::string& text, const std::string& where) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        std::string t = trim(item);
        if (!t.empty()) out.push_back(parse_double(t, where));
    }
    return out;
}

std::function<double(double, double)> bind_xy(const std::string& text, const std::string& slot) {
    auto e = std::make_shared<dsl::Expr>(checked_expr(text, slot, "xy"));
    return [e](double x, double y) { return e->eval(dsl::Env::with_xy(x, y)); };
}

std::function<double(double)> bind_x(const std::string& text, const std::string& slot) {
    auto e = std::make_shared<dsl::Expr>(checked_expr(text, slot, "x"));
    return [e](double x) { return e->eval(dsl::Env::with_x(x)); };
}

bool nonzero(const std::string& s) {
    if (s.empty()) return false;
    auto parsed = dsl::parse(s);
    if (auto* expr = std::get_if<dsl::Expr>(&parsed)) return !expr->is_zero_literal();
    return true;  // leave the error for checked_expr to report
}

}  // namespace

ModelConfig parse_model_config(const std::string& text, const std::string& origin) {
    ModelConfig cfg;
    bool mode_seen = false;
    std::string section;
    std::istringstream in(text);
    std::string raw;
    int lineno = 0;
    while (std::getline(in, raw)) {
        ++lineno;
        std::string line = trim(raw);
        if (line.empty() || line[0] == '#' || line[0] == ';') continue;
        const std::string where = origin + ":" + std::to_string(lineno);
        if (line.front() == '[') {
            if (line.back() != ']') throw ConfigError(where + ": unterminated section header");
            section = trim(line.substr(1, line.size() - 2));
            if (section != "model" && section != "truncation" && section != "tolerances")
                throw ConfigError(where + ": unknown section [" + section + "]");
            continue;
        }
        std::size_t eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError(where + ": expected key = value");
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        if (section == "model") {
            if (key == "mode") {
                if (value == "kallenberg")
                    cfg.mode = ModelConfig::Mode::Kallenberg;
                else if (value == "multigraphex")
                    cfg.mode = ModelConfig::Mode::Multigraphex;
                else
                    throw ConfigError(where + ": mode must be kallenberg or multigraphex");
                mode_seen = true;
            } else if (key == "f") {
                cfg.f = strip_quotes(value);
            } else if (key == "g") {
                cfg.g = strip_quotes(value);
            } else if (key == "g_prime") {
                cfg.g_prime = strip_quotes(value);
            } else if (key == "h") {
                cfg.h = strip_quotes(value);
            } else if (key == "h_prime") {
                cfg.h_prime = strip_quotes(value);
            } else if (key == "l") {
                cfg.l = strip_quotes(value);
            } else if (key == "l_prime") {
                cfg.l_prime = strip_quotes(value);
            } else if (key == "beta") {
                cfg.beta = parse_double(value, where);
            } else if (key == "gamma") {
                cfg.gamma = parse_double(value, where);
            } else if (key == "W") {
                auto d = parse_descriptor(value);
                if (!d) throw ConfigError(where + ": W must be poisson_pmf(...) or table(...)");
                if (d->name == "poisson_pmf") {
                    cfg.W.family = ModelConfig::WSpec::Family::Poisson;
                    for (auto& [k, v] : d->args) {
                        if (k == "mean")
                            cfg.W.expr = v;
                        else
                            throw ConfigError(where + ": poisson_pmf takes only mean=...");
                    }
                    if (cfg.W.expr.empty())
                        throw ConfigError(where + ": poisson_pmf needs mean=\"...\"");
                } else if (d->name == "table") {
                    cfg.W.family = ModelConfig::WSpec::Family::Table;
                    for (auto& [k, v] : d->args) {
                        if (k == "pmf")
                            cfg.W.expr = v;
                        else if (k == "kmax")
                            cfg.W.kmax = parse_int(v, where);
                        else
                            throw ConfigError(where + ": table takes pmf=... and kmax=...");
                    }
                    if (cfg.W.expr.empty() || cfg.W.kmax < 1)
                        throw ConfigError(where + ": table needs pmf=\"...\" and kmax >= 1");
                } else {
                    throw ConfigError(where + ": unknown W family '" + d->name + "'");
                }
            } else if (key == "S") {
                auto d = parse_descriptor(value);
                if (d && d->name == "prefix") {
                    for (auto& [k, v] : d->args) {
                        if (k == "expr")
                            cfg.S.expr = v;
                        else if (k == "kmax")
                            cfg.S.kmax = parse_int(v, where);
                        else if (k == "tail")
                            cfg.S.tail = parse_double(v, where);
                        else
                            throw ConfigError(where + ": prefix takes expr=, kmax=, tail=");
                    }
                } else {
                    cfg.S.expr = strip_quotes(value);
                }
            } else if (key == "S_kmax") {
                cfg.S.kmax = parse_int(value, where);
            } else if (key == "S_tail") {
                cfg.S.tail = parse_double(value, where);
            } else if (key == "I") {
                cfg.I = parse_list(value, where);
            } else if (key == "I_tail") {
                cfg.I_tail = parse_double(value, where);
            } else {
                throw ConfigError(where + ": unknown [model] key '" + key + "'");
            }
        } else if (section == "truncation") {
            if (key == "mark_cap")
                cfg.truncation.mark_cap = parse_double(value, where);
            else if (key == "max_latent_points")
                cfg.truncation.max_latent_points = parse_int(value, where);
            else if (key == "max_atoms")
                cfg.truncation.max_atoms = parse_int(value, where);
            else
                throw ConfigError(where + ": unknown [truncation] key '" + key + "'");
        } else if (section == "tolerances") {
            if (key == "tol_1d")
                cfg.tol_1d = parse_double(value, where);
            else if (key == "tol_2d")
                cfg.tol_2d = parse_double(value, where);
            else
                throw ConfigError(where + ": unknown [tolerances] key '" + key + "'");
        } else {
            throw ConfigError(where + ": key outside any section");
        }
    }
    if (!mode_seen) throw ConfigError(origin + ": missing mode under [model]");

    // Arity validation happens eagerly so a bad config fails before sampling.
    if (cfg.mode == ModelConfig::Mode::Kallenberg) {
        if (nonzero(cfg.f)) checked_expr(cfg.f, "f", "xyz");
        for (auto [text, name] : {std::pair{&cfg.g, "g"}, {&cfg.g_prime, "g_prime"}})
            if (nonzero(*text)) checked_expr(*text, name, "xy");
        for (auto [text, name] : {std::pair{&cfg.h, "h"}, {&cfg.h_prime, "h_prime"},
                                  {&cfg.l, "l"}, {&cfg.l_prime, "l_prime"}})
            if (nonzero(*text)) checked_expr(*text, name, "x");
        if (cfg.W.family != ModelConfig::WSpec::Family::None || !cfg.S.expr.empty() ||
            !cfg.I.empty())
            throw ConfigError(origin + ": W/S/I belong to multigraphex mode");
    } else {
        if (cfg.W.family == ModelConfig::WSpec::Family::Poisson)
            checked_expr(cfg.W.expr, "W mean", "xy");
        if (cfg.W.family == ModelConfig::WSpec::Family::Table)
            checked_expr(cfg.W.expr, "W pmf", "xyk");
        if (nonzero(cfg.S.expr)) {
            checked_expr(cfg.S.expr, "S", "vk");
            if (cfg.S.kmax < 0) throw ConfigError(origin + ": S_kmax must be >= 0");
        }
        if (nonzero(cfg.f) || nonzero(cfg.g) || nonzero(cfg.l))
            throw ConfigError(origin + ": f/g/l belong to kallenberg mode");
    }
    if (cfg.beta < 0 || cfg.gamma < 0) throw ConfigError(origin + ": beta/gamma must be >= 0");
    for (double w : cfg.I)
        if (w < 0) throw ConfigError(origin + ": I entries must be >= 0");
    return cfg;
}

ModelConfig load_model_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_model_config(ss.str(), path);
}

KallenbergRep build_kallenberg(const ModelConfig& cfg) {
    if (cfg.mode != ModelConfig::Mode::Kallenberg)
        throw ConfigError("config is not in kallenberg mode");
    KallenbergRep rep;
    if (nonzero(cfg.f)) {
        auto e = std::make_shared<dsl::Expr>(checked_expr(cfg.f, "f", "xyz"));
        rep.f = [e](double x, double y, double z) {
            return e->eval(dsl::Env::with_xyz(x, y, z));
        };
    }
    if (nonzero(cfg.g)) rep.g = bind_xy(cfg.g, "g");
    if (nonzero(cfg.g_prime)) rep.g_prime = bind_xy(cfg.g_prime, "g_prime");
    if (nonzero(cfg.h)) rep.h = bind_x(cfg.h, "h");
    if (nonzero(cfg.h_prime)) rep.h_prime = bind_x(cfg.h_prime, "h_prime");
    if (nonzero(cfg.l)) rep.l = bind_x(cfg.l, "l");
    if (nonzero(cfg.l_prime)) rep.l_prime = bind_x(cfg.l_prime, "l_prime");
    rep.beta = cfg.beta;
    rep.gamma = cfg.gamma;
    return rep;
}

Multigraphex build_multigraphex(const ModelConfig& cfg) {
    if (cfg.mode != ModelConfig::Mode::Multigraphex)
        throw ConfigError("config is not in multigraphex mode");
    Multigraphex mg;
    if (cfg.W.family == ModelConfig::WSpec::Family::Poisson) {
        mg.W = std::make_shared<PoissonWKernel>(bind_xy(cfg.W.expr, "W mean"));
    } else if (cfg.W.family == ModelConfig::WSpec::Family::Table) {
        auto e = std::make_shared<dsl::Expr>(checked_expr(cfg.W.expr, "W pmf", "xyk"));
        mg.W = std::make_shared<TableWKernel>(
            [e](double x, double y, double k) {
                return e->eval(dsl::Env::with_xy(x, y).set('k', k));
            },
            cfg.W.kmax);
    }
    if (nonzero(cfg.S.expr)) {
        auto e = std::make_shared<dsl::Expr>(checked_expr(cfg.S.expr, "S", "vk"));
        mg.S = std::make_shared<ExprStarIntensity>(
            [e](double v, double k) { return e->eval(dsl::Env{}.set('v', v).set('k', k)); },
            cfg.S.kmax, cfg.S.tail);
    }
    mg.I.weights = cfg.I;
    mg.I.tail_bound = cfg.I_tail;
    return mg;
}

}  // namespace exmeas
