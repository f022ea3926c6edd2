#include "exmeas/dsl.hpp"

#include <charconv>
#include <cmath>
#include <cstring>
#include <map>

#include "exmeas/errors.hpp"

namespace exmeas::dsl {

namespace {

int var_index(char c) {
    for (int i = 0; i < 5; ++i)
        if (kVarNames[i] == c) return i;
    return -1;
}

struct FuncInfo {
    Op op;
    int arity;  // -1: variadic odd >= 1 (piecewise)
};

const std::map<std::string, FuncInfo, std::less<>>& func_table() {
    static const std::map<std::string, FuncInfo, std::less<>> table = {
        {"exp", {Op::Exp, 1}},   {"log", {Op::Log, 1}},     {"abs", {Op::Abs, 1}},
        {"floor", {Op::Floor, 1}}, {"mod", {Op::Mod, 2}},   {"min", {Op::Min, 2}},
        {"max", {Op::Max, 2}},   {"ind", {Op::Ind, 3}},     {"piecewise", {Op::Piecewise, -1}},
    };
    return table;
}

const char* func_name(Op op) {
    switch (op) {
        case Op::Exp: return "exp";
        case Op::Log: return "log";
        case Op::Abs: return "abs";
        case Op::Floor: return "floor";
        case Op::Mod: return "mod";
        case Op::Min: return "min";
        case Op::Max: return "max";
        case Op::Ind: return "ind";
        case Op::Piecewise: return "piecewise";
        default: return "?";
    }
}

// Printing levels mirror the grammar: a child prints bare iff its level is at
// least what the surrounding production requires.
int print_level(Op op) {
    switch (op) {
        case Op::Add:
        case Op::Sub: return 0;
        case Op::Mul:
        case Op::Div: return 1;
        case Op::Pow: return 2;
        case Op::Neg: return 3;
        default: return 4;
    }
}

std::string format_number(double v) {
    char buf[40];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

[[noreturn]] void domain_error(const std::string& what) { throw EvalError("domain error: " + what); }

}  // namespace

Env& Env::set(char name, double v) {
    int i = var_index(name);
    if (i < 0) throw EvalError(std::string("unknown variable '") + name + "'");
    value[static_cast<std::size_t>(i)] = v;
    bound[static_cast<std::size_t>(i)] = true;
    return *this;
}

double Expr::eval(const Env& env) const {
    if (root_ < 0) throw EvalError("empty expression");
    return eval_node(root_, env);
}

double Expr::eval_node(std::int32_t idx, const Env& env) const {
    const Node& n = nodes_[static_cast<std::size_t>(idx)];
    auto arg = [&](int i) { return args_[static_cast<std::size_t>(n.args_at + i)]; };
    switch (n.op) {
        case Op::Number: return n.number;
        case Op::Var: {
            if (!env.bound[n.var])
                throw EvalError(std::string("unbound variable '") + kVarNames[n.var] + "'");
            return env.value[n.var];
        }
        case Op::Neg: return -eval_node(arg(0), env);
        case Op::Add: return eval_node(arg(0), env) + eval_node(arg(1), env);
        case Op::Sub: return eval_node(arg(0), env) - eval_node(arg(1), env);
        case Op::Mul: return eval_node(arg(0), env) * eval_node(arg(1), env);
        case Op::Div: {
            double a = eval_node(arg(0), env), b = eval_node(arg(1), env);
            if (b == 0.0) domain_error("division by zero");
            return a / b;
        }
        case Op::Pow: {
            double a = eval_node(arg(0), env), b = eval_node(arg(1), env);
            double r = std::pow(a, b);
            if (std::isnan(r)) domain_error("pow produced NaN");
            return r;
        }
        case Op::Exp: return std::exp(eval_node(arg(0), env));
        case Op::Log: {
            double a = eval_node(arg(0), env);
            if (a <= 0.0) domain_error("log of nonpositive value");
            return std::log(a);
        }
        case Op::Abs: return std::abs(eval_node(arg(0), env));
        case Op::Floor: return std::floor(eval_node(arg(0), env));
        case Op::Mod: {
            double a = eval_node(arg(0), env), b = eval_node(arg(1), env);
            if (b == 0.0) domain_error("mod by zero");
            return a - b * std::floor(a / b);
        }
        case Op::Min: return std::min(eval_node(arg(0), env), eval_node(arg(1), env));
        case Op::Max: return std::max(eval_node(arg(0), env), eval_node(arg(1), env));
        case Op::Ind: {
            double e = eval_node(arg(0), env);
            double a = eval_node(arg(1), env);
            double b = eval_node(arg(2), env);
            return (a <= e && e <= b) ? 1.0 : 0.0;
        }
        case Op::Piecewise: {
            std::int32_t m = n.n_args;
            for (std::int32_t i = 0; i + 1 < m; i += 2) {
                if (eval_node(arg(i), env) != 0.0) return eval_node(arg(i + 1), env);
            }
            return eval_node(arg(m - 1), env);
        }
    }
    throw EvalError("corrupt expression node");
}

void Expr::print_node(std::int32_t idx, int min_level, std::string& out) const {
    const Node& n = nodes_[static_cast<std::size_t>(idx)];
    auto arg = [&](int i) { return args_[static_cast<std::size_t>(n.args_at + i)]; };
    const int level = print_level(n.op);
    const bool parens = level < min_level;
    if (parens) out.push_back('(');
    switch (n.op) {
        case Op::Number: out += format_number(n.number); break;
        case Op::Var: out.push_back(kVarNames[n.var]); break;
        case Op::Neg:
            out.push_back('-');
            print_node(arg(0), 3, out);
            break;
        case Op::Add:
        case Op::Sub:
            print_node(arg(0), 0, out);
            out.push_back(n.op == Op::Add ? '+' : '-');
            print_node(arg(1), 1, out);
            break;
        case Op::Mul:
        case Op::Div:
            print_node(arg(0), 1, out);
            out.push_back(n.op == Op::Mul ? '*' : '/');
            print_node(arg(1), 2, out);
            break;
        case Op::Pow:
            print_node(arg(0), 3, out);
            out.push_back('^');
            print_node(arg(1), 2, out);
            break;
        default: {
            out += func_name(n.op);
            out.push_back('(');
            for (std::int32_t i = 0; i < n.n_args; ++i) {
                if (i) out.push_back(',');
                print_node(arg(i), 0, out);
            }
            out.push_back(')');
            break;
        }
    }
    if (parens) out.push_back(')');
}

std::string Expr::pretty_print() const {
    std::string out;
    if (root_ >= 0) print_node(root_, 0, out);
    return out;
}

bool Expr::equal_node(std::int32_t a, const Expr& other, std::int32_t b) const {
    const Node& na = nodes_[static_cast<std::size_t>(a)];
    const Node& nb = other.nodes_[static_cast<std::size_t>(b)];
    if (na.op != nb.op || na.n_args != nb.n_args) return false;
    if (na.op == Op::Number) {
        // Bit comparison; to_chars round-trips exactly so this is stable.
        return std::memcmp(&na.number, &nb.number, sizeof(double)) == 0;
    }
    if (na.op == Op::Var) return na.var == nb.var;
    for (std::int32_t i = 0; i < na.n_args; ++i) {
        if (!equal_node(args_[static_cast<std::size_t>(na.args_at + i)], other,
                        other.args_[static_cast<std::size_t>(nb.args_at + i)]))
            return false;
    }
    return true;
}

bool Expr::structurally_equal(const Expr& other) const {
    if ((root_ < 0) != (other.root_ < 0)) return false;
    if (root_ < 0) return true;
    return equal_node(root_, other, other.root_);
}

std::vector<char> Expr::free_vars() const {
    std::array<bool, 5> seen{};
    for (const Node& n : nodes_)
        if (n.op == Op::Var) seen[n.var] = true;
    std::vector<char> out;
    for (int i = 0; i < 5; ++i)
        if (seen[static_cast<std::size_t>(i)]) out.push_back(kVarNames[i]);
    return out;
}

bool Expr::is_zero_literal() const {
    if (root_ < 0) return true;
    const Node& n = nodes_[static_cast<std::size_t>(root_)];
    return n.op == Op::Number && n.number == 0.0;
}

// ---------------------------------------------------------------------------
// Parser

class Parser {
public:
    explicit Parser(std::string_view text) : text_(text) {}

    std::variant<Expr, ParseError> run() {
        skip_ws();
        std::int32_t root = parse_expr();
        if (failed_) return error_;
        skip_ws();
        if (pos_ != text_.size()) {
            fail(pos_, "unexpected trailing input");
            return error_;
        }
        expr_.root_ = root;
        return std::move(expr_);
    }

private:
    std::string_view text_;
    std::size_t pos_ = 0;
    Expr expr_;
    bool failed_ = false;
    ParseError error_{};

    void fail(std::size_t at, std::string msg) {
        if (!failed_) {
            failed_ = true;
            error_.position = at;
            error_.message = std::move(msg);
        }
    }

    void skip_ws() {
        while (pos_ < text_.size() && (text_[pos_] == ' ' || text_[pos_] == '\t' ||
                                       text_[pos_] == '\n' || text_[pos_] == '\r'))
            ++pos_;
    }

    bool eat(char c) {
        skip_ws();
        if (pos_ < text_.size() && text_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    char peek() {
        skip_ws();
        return pos_ < text_.size() ? text_[pos_] : '\0';
    }

    std::int32_t add_node(Op op, std::initializer_list<std::int32_t> children, double number = 0.0,
                          std::uint8_t var = 0) {
        Expr::Node n;
        n.op = op;
        n.number = number;
        n.var = var;
        n.args_at = static_cast<std::int32_t>(expr_.args_.size());
        n.n_args = static_cast<std::int32_t>(children.size());
        for (std::int32_t c : children) expr_.args_.push_back(c);
        expr_.nodes_.push_back(n);
        return static_cast<std::int32_t>(expr_.nodes_.size() - 1);
    }

    std::int32_t add_node(Op op, const std::vector<std::int32_t>& children) {
        Expr::Node n;
        n.op = op;
        n.args_at = static_cast<std::int32_t>(expr_.args_.size());
        n.n_args = static_cast<std::int32_t>(children.size());
        for (std::int32_t c : children) expr_.args_.push_back(c);
        expr_.nodes_.push_back(n);
        return static_cast<std::int32_t>(expr_.nodes_.size() - 1);
    }

    std::int32_t parse_expr() {
        std::int32_t lhs = parse_term();
        if (failed_) return -1;
        for (;;) {
            char c = peek();
            if (c != '+' && c != '-') return lhs;
            ++pos_;
            std::int32_t rhs = parse_term();
            if (failed_) return -1;
            lhs = add_node(c == '+' ? Op::Add : Op::Sub, {lhs, rhs});
        }
    }

    std::int32_t parse_term() {
        std::int32_t lhs = parse_factor();
        if (failed_) return -1;
        for (;;) {
            char c = peek();
            if (c != '*' && c != '/') return lhs;
            ++pos_;
            std::int32_t rhs = parse_factor();
            if (failed_) return -1;
            lhs = add_node(c == '*' ? Op::Mul : Op::Div, {lhs, rhs});
        }
    }

    std::int32_t parse_factor() {
        std::int32_t base = parse_unary();
        if (failed_) return -1;
        if (peek() == '^') {
            ++pos_;
            std::int32_t exponent = parse_factor();  // right-associative
            if (failed_) return -1;
            return add_node(Op::Pow, {base, exponent});
        }
        return base;
    }

    std::int32_t parse_unary() {
        if (peek() == '-') {
            ++pos_;
            std::int32_t inner = parse_unary();
            if (failed_) return -1;
            return add_node(Op::Neg, {inner});
        }
        return parse_atom();
    }

    std::int32_t parse_atom() {
        skip_ws();
        if (pos_ >= text_.size()) {
            fail(pos_, "unexpected end of input");
            return -1;
        }
        char c = text_[pos_];
        if (c == '(') {
            ++pos_;
            std::int32_t inner = parse_expr();
            if (failed_) return -1;
            if (!eat(')')) {
                fail(pos_, "expected ')'");
                return -1;
            }
            return inner;
        }
        if ((c >= '0' && c <= '9') || c == '.') return parse_number();
        if (c >= 'a' && c <= 'z') return parse_identifier();
        fail(pos_, std::string("unexpected character '") + c + "'");
        return -1;
    }

    std::int32_t parse_number() {
        std::size_t start = pos_;
        while (pos_ < text_.size() && text_[pos_] >= '0' && text_[pos_] <= '9') ++pos_;
        if (pos_ < text_.size() && text_[pos_] == '.') {
            ++pos_;
            while (pos_ < text_.size() && text_[pos_] >= '0' && text_[pos_] <= '9') ++pos_;
        }
        if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
            std::size_t mark = pos_;
            ++pos_;
            if (pos_ < text_.size() && (text_[pos_] == '+' || text_[pos_] == '-')) ++pos_;
            if (pos_ < text_.size() && text_[pos_] >= '0' && text_[pos_] <= '9') {
                while (pos_ < text_.size() && text_[pos_] >= '0' && text_[pos_] <= '9') ++pos_;
            } else {
                pos_ = mark;  // "e" belonged to something else; not a valid exponent
            }
        }
        double value = 0.0;
        auto res = std::from_chars(text_.data() + start, text_.data() + pos_, value);
        if (res.ec != std::errc() || res.ptr != text_.data() + pos_) {
            fail(start, "malformed number");
            return -1;
        }
        return add_node(Op::Number, {}, value);
    }

    std::int32_t parse_identifier() {
        std::size_t start = pos_;
        while (pos_ < text_.size() && text_[pos_] >= 'a' && text_[pos_] <= 'z') ++pos_;
        std::string_view name = text_.substr(start, pos_ - start);
        if (name.size() == 1) {
            int vi = var_index(name[0]);
            if (vi >= 0 && peek() != '(')
                return add_node(Op::Var, {}, 0.0, static_cast<std::uint8_t>(vi));
        }
        auto it = func_table().find(name);
        if (it == func_table().end()) {
            fail(start, "unknown identifier '" + std::string(name) + "'");
            return -1;
        }
        if (!eat('(')) {
            fail(pos_, "expected '(' after function name");
            return -1;
        }
        std::vector<std::int32_t> args;
        args.push_back(parse_expr());
        if (failed_) return -1;
        while (eat(',')) {
            args.push_back(parse_expr());
            if (failed_) return -1;
        }
        if (!eat(')')) {
            fail(pos_, "expected ')'");
            return -1;
        }
        const FuncInfo& info = it->second;
        if (info.arity >= 0 && static_cast<int>(args.size()) != info.arity) {
            fail(start, std::string(name) + " expects " + std::to_string(info.arity) +
                            " argument(s), got " + std::to_string(args.size()));
            return -1;
        }
        if (info.arity < 0 && args.size() % 2 != 1) {
            fail(start, "piecewise expects an odd argument count: (cond, value)... default");
            return -1;
        }
        return add_node(info.op, args);
    }
};

std::variant<Expr, ParseError> parse(std::string_view text) { return Parser(text).run(); }

Expr parse_or_throw(std::string_view text) {
    auto result = parse(text);
    if (auto* err = std::get_if<ParseError>(&result))
        throw EvalError("parse error at offset " + std::to_string(err->position) + ": " +
                        err->message);
    return std::get<Expr>(std::move(result));
}

}  // namespace exmeas::dsl
