#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace exmeas::dsl {

// Variable slots, in declaration order. Index into Env::value.
inline constexpr char kVarNames[5] = {'x', 'y', 'z', 'k', 'v'};

struct Env {
    std::array<double, 5> value{};
    std::array<bool, 5> bound{};

    Env& set(char name, double v);
    static Env with_x(double x) { return Env{}.set('x', x); }
    static Env with_xy(double x, double y) { return Env{}.set('x', x).set('y', y); }
    static Env with_xyz(double x, double y, double z) {
        return Env{}.set('x', x).set('y', y).set('z', z);
    }
};

enum class Op : std::uint8_t {
    Number,
    Var,
    Neg,
    Add,
    Sub,
    Mul,
    Div,
    Pow,
    Exp,
    Log,
    Abs,
    Floor,
    Mod,
    Min,
    Max,
    Ind,        // ind(e, a, b) = 1 if a <= e <= b (closed interval), else 0
    Piecewise,  // piecewise(c1, e1, ..., cn, en, default): first ci != 0 wins
};

// Immutable expression tree stored as an index-based arena. Parsed literals
// are always nonnegative (a leading minus parses as a Neg node), which is
// what makes pretty_print . parse the structural identity.
class Expr {
public:
    // eval is a pure function of (expression, environment); throws EvalError
    // on unbound variables and domain errors (log <= 0, x/0, NaN results).
    double eval(const Env& env) const;

    // Prints a string that reparses to a structurally identical tree.
    std::string pretty_print() const;

    bool structurally_equal(const Expr& other) const;

    // The set of variables occurring in the tree (subset of "xyzkv").
    std::vector<char> free_vars() const;

    // True when the tree is the literal 0 (used to skip dead model slots).
    bool is_zero_literal() const;

    bool empty() const { return nodes_.empty(); }

private:
    struct Node {
        Op op;
        double number = 0.0;       // Op::Number
        std::uint8_t var = 0;      // Op::Var: index into kVarNames
        std::int32_t args_at = 0;  // offset into args_
        std::int32_t n_args = 0;
    };

    double eval_node(std::int32_t idx, const Env& env) const;
    void print_node(std::int32_t idx, int min_level, std::string& out) const;
    bool equal_node(std::int32_t a, const Expr& other, std::int32_t b) const;

    std::vector<Node> nodes_;
    std::vector<std::int32_t> args_;
    std::int32_t root_ = -1;

    friend class Parser;
    friend class Builder;
};

struct ParseError {
    std::size_t position;  // byte offset of the first offending character
    std::string message;
};

// Recursive-descent parser for the grammar
//   expr   := term (("+"|"-") term)*
//   term   := factor (("*"|"/") factor)*
//   factor := unary ("^" factor)?
//   unary  := "-" unary | atom
//   atom   := number | var | func "(" expr ("," expr)* ")" | "(" expr ")"
//   var    := "x"|"y"|"z"|"k"|"v"
//   func   := exp|log|abs|floor|mod|min|max|ind|piecewise
std::variant<Expr, ParseError> parse(std::string_view text);

// Convenience wrapper; throws EvalError carrying the ParseError message.
Expr parse_or_throw(std::string_view text);

}  // namespace exmeas::dsl
