// Small expression language for scalar coefficient functions of one
// variable `y`: drift, diffusion coefficient, path integrands.
//
// Grammar:
//   expr   := term (('+'|'-') term)*
//   term   := factor (('*'|'/') factor)*
//   factor := atom ['^' exponent]          (exponent must fold to a constant)
//   atom   := number | 'y' | '(' expr ')' | func '(' expr [',' expr] ')'
//   func   := exp | log | sqrt | abs | min | max
// Unary minus is allowed before a factor; whitespace is ignored.
#pragma once

#include <cstdint>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

namespace perpint {

struct ParseError : std::runtime_error {
    ParseError(const std::string& what, std::size_t offset, std::string expected)
        : std::runtime_error(what), offset(offset), expected(std::move(expected)) {}
    std::size_t offset;    // 0-based position in the source text
    std::string expected;
};

struct EvalDomainError : std::domain_error {
    using std::domain_error::domain_error;
};

enum class NodeKind : std::uint8_t {
    Num, Var, Add, Sub, Mul, Div, Pow, Neg,
    Exp, Log, Sqrt, Abs, Min, Max,
};

struct Node {
    NodeKind kind;
    double value = 0.0;   // Num: the literal; Pow: the constant exponent
    std::shared_ptr<const Node> a, b;
};

using NodePtr = std::shared_ptr<const Node>;

// Postfix program for fast evaluation (the tree is kept for printing and
// asymptotic analysis; simulation loops evaluate the compiled form).
struct Instr {
    NodeKind op;
    double imm;
};

class CoefficientExpr {
public:
    CoefficientExpr() = default;

    static CoefficientExpr parse(const std::string& text);

    double eval(double y) const;          // throws EvalDomainError outside the domain
    bool try_eval(double y, double& out) const noexcept;

    std::string pretty_print() const;
    const NodePtr& root() const { return root_; }
    const std::string& source_text() const { return source_; }

    bool structurally_equal(const CoefficientExpr& other) const;
    bool is_literal_zero() const;

    static CoefficientExpr from_root(NodePtr root);

private:
    NodePtr root_;
    std::string source_;
    std::vector<Instr> program_;
    int stack_need_ = 0;

    void compile();
};

// Boundary designator for asymptotic queries: a finite point approached
// from inside the domain, or +infinity.
struct Boundary {
    double point;        // ignored when at_infinity
    bool at_infinity;
    bool from_above;     // finite point approached from the right (y = point + h)

    static Boundary zero() { return {0.0, false, true}; }
    static Boundary finite_above(double p) { return {p, false, true}; }
    static Boundary finite_below(double p) { return {p, false, false}; }
    static Boundary infinity() { return {0.0, true, false}; }
};

// expr(y) ~ leading_coeff * h^exponent with h the local variable:
// h = |y - point| at a finite boundary, h = y at +infinity (so the
// exponent is the usual power of y there).
struct AsymptoticExponent {
    bool has_exponent = false;
    double exponent = 0.0;
    double leading_coeff = 0.0;
    bool exact = false;          // true when derived from the tree, false when fitted
    bool super_growth = false;   // exceeds every power (e.g. exp(1/y) at 0)
    bool super_decay = false;    // vanishes faster than every power
    bool identically_zero = false;
};

AsymptoticExponent exponent_at(const CoefficientExpr& e, const Boundary& boundary);

// Least-squares log-log slope over a geometric ladder of points; used as
// the fallback when the tree is not analyzable, and as an independent
// check on the symbolic route.
AsymptoticExponent fit_exponent(const CoefficientExpr& e, const Boundary& boundary,
                                int k_min = 16, int k_max = 30);

// Tree combinators; used to compose decision integrands out of the
// user-supplied coefficients.
CoefficientExpr expr_const(double c);
CoefficientExpr expr_var();
CoefficientExpr expr_add(const CoefficientExpr& a, const CoefficientExpr& b);
CoefficientExpr expr_sub(const CoefficientExpr& a, const CoefficientExpr& b);
CoefficientExpr expr_mul(const CoefficientExpr& a, const CoefficientExpr& b);
CoefficientExpr expr_div(const CoefficientExpr& a, const CoefficientExpr& b);
CoefficientExpr expr_pow(const CoefficientExpr& a, double k);

}  // namespace perpint
