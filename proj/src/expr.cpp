#include "perpint/expr.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstring>

namespace perpint {

namespace {

NodePtr mk(NodeKind k, NodePtr a = nullptr, NodePtr b = nullptr, double v = 0.0) {
    auto n = std::make_shared<Node>();
    n->kind = k;
    n->value = v;
    n->a = std::move(a);
    n->b = std::move(b);
    return n;
}

NodePtr mk_num(double v) { return mk(NodeKind::Num, nullptr, nullptr, v); }

// ---------------------------------------------------------------------------
// Parser

class Parser {
public:
    explicit Parser(const std::string& s) : src_(s) {}

    NodePtr parse() {
        NodePtr e = expr();
        skip_ws();
        if (pos_ != src_.size())
            fail("unexpected trailing input", "end of input");
        return e;
    }

private:
    const std::string& src_;
    std::size_t pos_ = 0;

    [[noreturn]] void fail(const std::string& msg, std::string expected) {
        throw ParseError(msg + " at offset " + std::to_string(pos_), pos_, std::move(expected));
    }

    void skip_ws() {
        while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
    }

    char peek() {
        skip_ws();
        return pos_ < src_.size() ? src_[pos_] : '\0';
    }

    bool accept(char c) {
        if (peek() == c) { ++pos_; return true; }
        return false;
    }

    void expect(char c) {
        if (!accept(c)) fail(std::string("expected '") + c + "'", std::string(1, c));
    }

    NodePtr expr() {
        NodePtr lhs = term();
        for (;;) {
            if (accept('+')) lhs = mk(NodeKind::Add, lhs, term());
            else if (accept('-')) lhs = mk(NodeKind::Sub, lhs, term());
            else return lhs;
        }
    }

    NodePtr term() {
        NodePtr lhs = factor();
        for (;;) {
            if (accept('*')) lhs = mk(NodeKind::Mul, lhs, factor());
            else if (accept('/')) lhs = mk(NodeKind::Div, lhs, factor());
            else return lhs;
        }
    }

    NodePtr factor() {
        if (accept('-')) {
            NodePtr f = factor();
            if (f->kind == NodeKind::Num) return mk_num(-f->value);
            return mk(NodeKind::Neg, f);
        }
        NodePtr base = atom();
        if (accept('^')) {
            NodePtr e = factor();
            double k;
            if (!fold_const(e, k))
                fail("exponent must be a constant", "constant exponent");
            return mk(NodeKind::Pow, base, nullptr, k);
        }
        return base;
    }

    // Constant-folds an exponent subtree; '^' with a non-constant exponent is
    // rejected so that symbolic exponent extraction stays decidable.
    static bool fold_const(const NodePtr& n, double& out) {
        double a, b;
        switch (n->kind) {
            case NodeKind::Num: out = n->value; return true;
            case NodeKind::Neg:
                if (!fold_const(n->a, a)) return false;
                out = -a; return true;
            case NodeKind::Add: case NodeKind::Sub:
            case NodeKind::Mul: case NodeKind::Div:
                if (!fold_const(n->a, a) || !fold_const(n->b, b)) return false;
                switch (n->kind) {
                    case NodeKind::Add: out = a + b; break;
                    case NodeKind::Sub: out = a - b; break;
                    case NodeKind::Mul: out = a * b; break;
                    default: out = a / b; break;
                }
                return true;
            case NodeKind::Pow:
                if (!fold_const(n->a, a)) return false;
                out = std::pow(a, n->value); return true;
            case NodeKind::Sqrt:
                if (!fold_const(n->a, a)) return false;
                out = std::sqrt(a); return true;
            default: return false;
        }
    }

    NodePtr atom() {
        char c = peek();
        if (c == '(') {
            ++pos_;
            NodePtr e = expr();
            expect(')');
            return e;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
        if (std::isalpha(static_cast<unsigned char>(c))) return identifier();
        fail("syntax error", "number, 'y', '(' or function");
    }

    NodePtr number() {
        const char* begin = src_.data() + pos_;
        const char* end = src_.data() + src_.size();
        double v;
        auto [ptr, ec] = std::from_chars(begin, end, v);
        if (ec != std::errc())
            fail("malformed number", "number");
        pos_ += static_cast<std::size_t>(ptr - begin);
        return mk_num(v);
    }

    NodePtr identifier() {
        std::size_t start = pos_;
        while (pos_ < src_.size() && std::isalpha(static_cast<unsigned char>(src_[pos_]))) ++pos_;
        std::string name = src_.substr(start, pos_ - start);
        if (name == "y") return mk(NodeKind::Var);

        static const struct { const char* name; NodeKind kind; int arity; } funcs[] = {
            {"exp", NodeKind::Exp, 1}, {"log", NodeKind::Log, 1},
            {"sqrt", NodeKind::Sqrt, 1}, {"abs", NodeKind::Abs, 1},
            {"min", NodeKind::Min, 2}, {"max", NodeKind::Max, 2},
        };
        for (const auto& f : funcs) {
            if (name == f.name) {
                expect('(');
                NodePtr a = expr();
                NodePtr b;
                if (f.arity == 2) {
                    if (!accept(',')) {
                        pos_ = start;
                        fail("function '" + name + "' takes 2 arguments", "','");
                    }
                    b = expr();
                } else if (peek() == ',') {
                    pos_ = start;
                    fail("function '" + name + "' takes 1 argument", "')'");
                }
                expect(')');
                return mk(f.kind, a, b);
            }
        }
        pos_ = start;
        fail("unknown identifier '" + name + "'", "'y' or function name");
    }
};

// ---------------------------------------------------------------------------
// Printing

std::string fmt_double(double v) {
    std::array<char, 40> buf;
    auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    return std::string(buf.data(), ptr);
}

// precedence levels: 1 add/sub, 2 mul/div, 3 neg, 4 pow, 5 atom
int prec(const Node& n) {
    switch (n.kind) {
        case NodeKind::Add: case NodeKind::Sub: return 1;
        case NodeKind::Mul: case NodeKind::Div: return 2;
        case NodeKind::Neg: return 3;
        case NodeKind::Pow: return 4;
        case NodeKind::Num: return n.value < 0 ? 3 : 5;
        default: return 5;
    }
}

void print_node(const Node& n, std::string& out, int min_prec) {
    const bool parens = prec(n) < min_prec;
    if (parens) out += '(';
    switch (n.kind) {
        case NodeKind::Num: out += fmt_double(n.value); break;
        case NodeKind::Var: out += 'y'; break;
        case NodeKind::Add:
            print_node(*n.a, out, 1); out += " + "; print_node(*n.b, out, 2);
            break;
        case NodeKind::Sub:
            print_node(*n.a, out, 1); out += " - "; print_node(*n.b, out, 2);
            break;
        case NodeKind::Mul:
            print_node(*n.a, out, 2); out += '*'; print_node(*n.b, out, 3);
            break;
        case NodeKind::Div:
            print_node(*n.a, out, 2); out += '/'; print_node(*n.b, out, 3);
            break;
        case NodeKind::Neg:
            out += '-'; print_node(*n.a, out, 5);
            break;
        case NodeKind::Pow: {
            print_node(*n.a, out, 5);
            out += '^';
            if (n.value < 0) { out += '('; out += fmt_double(n.value); out += ')'; }
            else out += fmt_double(n.value);
            break;
        }
        case NodeKind::Exp: out += "exp("; print_node(*n.a, out, 0); out += ')'; break;
        case NodeKind::Log: out += "log("; print_node(*n.a, out, 0); out += ')'; break;
        case NodeKind::Sqrt: out += "sqrt("; print_node(*n.a, out, 0); out += ')'; break;
        case NodeKind::Abs: out += "abs("; print_node(*n.a, out, 0); out += ')'; break;
        case NodeKind::Min:
            out += "min("; print_node(*n.a, out, 0); out += ", ";
            print_node(*n.b, out, 0); out += ')';
            break;
        case NodeKind::Max:
            out += "max("; print_node(*n.a, out, 0); out += ", ";
            print_node(*n.b, out, 0); out += ')';
            break;
    }
    if (parens) out += ')';
}

bool node_equal(const Node& x, const Node& y) {
    if (x.kind != y.kind) return false;
    if (x.kind == NodeKind::Num || x.kind == NodeKind::Pow) {
        if (std::memcmp(&x.value, &y.value, sizeof(double)) != 0) return false;
    }
    if (!!x.a != !!y.a || !!x.b != !!y.b) return false;
    if (x.a && !node_equal(*x.a, *y.a)) return false;
    if (x.b && !node_equal(*x.b, *y.b)) return false;
    return true;
}

void compile_node(const Node& n, std::vector<Instr>& prog) {
    if (n.a) compile_node(*n.a, prog);
    if (n.b) compile_node(*n.b, prog);
    prog.push_back({n.kind, n.value});
}

}  // namespace

// ---------------------------------------------------------------------------
// CoefficientExpr

CoefficientExpr CoefficientExpr::parse(const std::string& text) {
    if (text.empty()) throw ParseError("empty expression", 0, "expression");
    CoefficientExpr e;
    e.root_ = Parser(text).parse();
    e.source_ = text;
    e.compile();
    return e;
}

void CoefficientExpr::compile() {
    program_.clear();
    compile_node(*root_, program_);
    int depth = 0, maxd = 0;
    for (const auto& ins : program_) {
        switch (ins.op) {
            case NodeKind::Num: case NodeKind::Var: ++depth; break;
            case NodeKind::Add: case NodeKind::Sub: case NodeKind::Mul:
            case NodeKind::Div: case NodeKind::Min: case NodeKind::Max: --depth; break;
            default: break;  // unary: depth unchanged
        }
        maxd = std::max(maxd, depth);
    }
    stack_need_ = maxd;
    if (stack_need_ > 64)
        throw ParseError("expression too deep", 0, "shallower expression");
}

bool CoefficientExpr::try_eval(double y, double& out) const noexcept {
    double stack[64];
    int sp = 0;
    for (const auto& ins : program_) {
        switch (ins.op) {
            case NodeKind::Num: stack[sp++] = ins.imm; break;
            case NodeKind::Var: stack[sp++] = y; break;
            case NodeKind::Add: --sp; stack[sp - 1] += stack[sp]; break;
            case NodeKind::Sub: --sp; stack[sp - 1] -= stack[sp]; break;
            case NodeKind::Mul: --sp; stack[sp - 1] *= stack[sp]; break;
            case NodeKind::Div:
                --sp;
                if (stack[sp] == 0.0) return false;
                stack[sp - 1] /= stack[sp];
                break;
            case NodeKind::Pow: {
                double& x = stack[sp - 1];
                const double k = ins.imm;
                if (x < 0.0 && k != std::nearbyint(k)) return false;
                if (x == 0.0 && k < 0.0) return false;
                x = std::pow(x, k);
                break;
            }
            case NodeKind::Neg: stack[sp - 1] = -stack[sp - 1]; break;
            case NodeKind::Exp: stack[sp - 1] = std::exp(stack[sp - 1]); break;
            case NodeKind::Log:
                if (stack[sp - 1] <= 0.0) return false;
                stack[sp - 1] = std::log(stack[sp - 1]);
                break;
            case NodeKind::Sqrt:
                if (stack[sp - 1] < 0.0) return false;
                stack[sp - 1] = std::sqrt(stack[sp - 1]);
                break;
            case NodeKind::Abs: stack[sp - 1] = std::fabs(stack[sp - 1]); break;
            case NodeKind::Min: --sp; stack[sp - 1] = std::fmin(stack[sp - 1], stack[sp]); break;
            case NodeKind::Max: --sp; stack[sp - 1] = std::fmax(stack[sp - 1], stack[sp]); break;
        }
    }
    out = stack[0];
    return std::isfinite(out);
}

double CoefficientExpr::eval(double y) const {
    double v;
    if (!try_eval(y, v))
        throw EvalDomainError("domain error evaluating '" + source_ + "' at y=" + fmt_double(y));
    return v;
}

std::string CoefficientExpr::pretty_print() const {
    std::string out;
    print_node(*root_, out, 0);
    return out;
}

bool CoefficientExpr::structurally_equal(const CoefficientExpr& other) const {
    return node_equal(*root_, *other.root_);
}

bool CoefficientExpr::is_literal_zero() const {
    return root_->kind == NodeKind::Num && root_->value == 0.0;
}

CoefficientExpr CoefficientExpr::from_root(NodePtr root) {
    CoefficientExpr e;
    e.root_ = std::move(root);
    e.compile();
    std::string out;
    print_node(*e.root_, out, 0);
    e.source_ = out;
    return e;
}

CoefficientExpr expr_const(double c) { return CoefficientExpr::from_root(mk_num(c)); }
CoefficientExpr expr_var() { return CoefficientExpr::from_root(mk(NodeKind::Var)); }

CoefficientExpr expr_add(const CoefficientExpr& a, const CoefficientExpr& b) {
    return CoefficientExpr::from_root(mk(NodeKind::Add, a.root(), b.root()));
}
CoefficientExpr expr_sub(const CoefficientExpr& a, const CoefficientExpr& b) {
    return CoefficientExpr::from_root(mk(NodeKind::Sub, a.root(), b.root()));
}
CoefficientExpr expr_mul(const CoefficientExpr& a, const CoefficientExpr& b) {
    return CoefficientExpr::from_root(mk(NodeKind::Mul, a.root(), b.root()));
}
CoefficientExpr expr_div(const CoefficientExpr& a, const CoefficientExpr& b) {
    return CoefficientExpr::from_root(mk(NodeKind::Div, a.root(), b.root()));
}
CoefficientExpr expr_pow(const CoefficientExpr& a, double k) {
    return CoefficientExpr::from_root(mk(NodeKind::Pow, a.root(), nullptr, k));
}

// ---------------------------------------------------------------------------
// Symbolic asymptotics: short generalized power series in the local
// variable h -> 0+ (h = |y - point|, or h = 1/y at infinity).

namespace {

constexpr int kMaxTerms = 10;
constexpr double kExpWindow = 16.0;
constexpr double kExpTol = 1e-9;

struct Term { double p, c; };

struct Asym {
    enum Kind { Ser, SuperG, SuperD, Zero, Unknown } kind;
    std::vector<Term> t;  // sorted by exponent, only for Ser

    static Asym unknown() { return {Unknown, {}}; }
    static Asym zero() { return {Zero, {}}; }
    static Asym super_g() { return {SuperG, {}}; }
    static Asym super_d() { return {SuperD, {}}; }
    static Asym one() { return {Ser, {{0.0, 1.0}}}; }
    static Asym series(std::vector<Term> t) {
        if (t.empty()) return zero();
        return {Ser, std::move(t)};
    }
};

void normalize(std::vector<Term>& t) {
    std::sort(t.begin(), t.end(), [](const Term& a, const Term& b) { return a.p < b.p; });
    std::vector<Term> out;
    for (const auto& term : t) {
        if (!out.empty() && std::fabs(out.back().p - term.p) < kExpTol) {
            double sum = out.back().c + term.c;
            // exact-looking cancellation: drop the term entirely
            if (std::fabs(sum) <= 1e-9 * (std::fabs(out.back().c) + std::fabs(term.c)))
                out.pop_back();
            else
                out.back().c = sum;
        } else if (term.c != 0.0) {
            out.push_back(term);
        }
    }
    if (!out.empty()) {
        const double lead = out.front().p;
        while (!out.empty() && (out.back().p > lead + kExpWindow ||
                                out.size() > kMaxTerms))
            out.pop_back();
    }
    t = std::move(out);
}

Asym a_add(const Asym& x, const Asym& y) {
    if (x.kind == Asym::Unknown || y.kind == Asym::Unknown) return Asym::unknown();
    if (x.kind == Asym::Zero) return y;
    if (y.kind == Asym::Zero) return x;
    if (x.kind == Asym::SuperG || y.kind == Asym::SuperG) {
        if (x.kind == Asym::SuperG && y.kind == Asym::SuperG) return Asym::unknown();
        return Asym::super_g();
    }
    if (x.kind == Asym::SuperD) return y;
    if (y.kind == Asym::SuperD) return x;
    std::vector<Term> t = x.t;
    t.insert(t.end(), y.t.begin(), y.t.end());
    normalize(t);
    return Asym::series(std::move(t));
}

Asym a_neg(const Asym& x) {
    if (x.kind != Asym::Ser) return x;
    Asym r = x;
    for (auto& term : r.t) term.c = -term.c;
    return r;
}

Asym a_mul(const Asym& x, const Asym& y) {
    if (x.kind == Asym::Unknown || y.kind == Asym::Unknown) return Asym::unknown();
    if (x.kind == Asym::Zero || y.kind == Asym::Zero) return Asym::zero();
    if (x.kind == Asym::SuperG)
        return y.kind == Asym::SuperD ? Asym::unknown() : Asym::super_g();
    if (y.kind == Asym::SuperG)
        return x.kind == Asym::SuperD ? Asym::unknown() : Asym::super_g();
    if (x.kind == Asym::SuperD || y.kind == Asym::SuperD) return Asym::super_d();
    std::vector<Term> t;
    for (const auto& a : x.t)
        for (const auto& b : y.t)
            t.push_back({a.p + b.p, a.c * b.c});
    normalize(t);
    return Asym::series(std::move(t));
}

// log(1 + u) for a series u with strictly positive leading exponent
bool log1p_series(const Asym& u, Asym& out) {
    if (u.kind == Asym::Zero) { out = Asym::zero(); return true; }
    if (u.kind != Asym::Ser || u.t.front().p <= kExpTol) return false;
    Asym acc = Asym::zero();
    Asym upow = Asym::one();
    double sign = 1.0;
    for (int n = 1; n <= 6; ++n) {
        upow = a_mul(upow, u);
        Asym termn = upow;
        for (auto& term : termn.t) term.c *= sign / n;
        acc = a_add(acc, termn);
        sign = -sign;
    }
    out = acc;
    return true;
}

// exp(u) for a series u with strictly positive leading exponent
Asym exp_pos_series(const Asym& u) {
    Asym acc = Asym::one();
    Asym upow = Asym::one();
    double fact = 1.0;
    for (int n = 1; n <= 6; ++n) {
        upow = a_mul(upow, u);
        fact *= n;
        Asym termn = upow;
        for (auto& term : termn.t) term.c /= fact;
        acc = a_add(acc, termn);
    }
    return acc;
}

Asym a_pow(const Asym& x, double k);

Asym a_inv(const Asym& x) { return a_pow(x, -1.0); }

Asym a_div(const Asym& x, const Asym& y) {
    if (y.kind == Asym::Zero) return Asym::unknown();
    return a_mul(x, a_inv(y));
}

Asym a_pow(const Asym& x, double k) {
    if (k == 0.0) return Asym::one();
    switch (x.kind) {
        case Asym::Unknown: return Asym::unknown();
        case Asym::Zero: return k > 0 ? Asym::zero() : Asym::unknown();
        case Asym::SuperG: return k > 0 ? Asym::super_g() : Asym::super_d();
        case Asym::SuperD: return k > 0 ? Asym::super_d() : Asym::super_g();
        case Asym::Ser: break;
    }
    const Term lead = x.t.front();
    const bool integral = (k == std::nearbyint(k));
    if (lead.c < 0 && !integral) return Asym::unknown();
    // x = lead * (1 + u); x^k = lead^k * exp(k log(1+u))
    Asym u = Asym::zero();
    for (std::size_t i = 1; i < x.t.size(); ++i)
        u = a_add(u, Asym::series({{x.t[i].p - lead.p, x.t[i].c / lead.c}}));
    Asym lg;
    if (!log1p_series(u, lg)) {
        if (u.kind == Asym::Zero) lg = Asym::zero();
        else return Asym::unknown();
    }
    for (auto& term : lg.t) term.c *= k;
    Asym rest = exp_pos_series(lg);
    const double ck = std::pow(lead.c, k);
    Asym head = Asym::series({{lead.p * k, ck}});
    return a_mul(head, rest);
}

Asym a_exp(const Asym& x) {
    switch (x.kind) {
        case Asym::Unknown: case Asym::SuperG: return Asym::unknown();
        case Asym::Zero: case Asym::SuperD: return Asym::one();
        case Asym::Ser: break;
    }
    // split negative, constant and positive exponent parts
    double cst = 0.0;
    const Term* neg = nullptr;
    Asym pos = Asym::zero();
    for (const auto& term : x.t) {
        if (term.p < -kExpTol) {
            if (!neg) neg = &term;  // leading negative term dominates
        } else if (std::fabs(term.p) <= kExpTol) {
            cst = term.c;
        } else {
            pos = a_add(pos, Asym::series({{term.p, term.c}}));
        }
    }
    if (neg) return neg->c > 0 ? Asym::super_g() : Asym::super_d();
    Asym rest = exp_pos_series(pos);
    for (auto& term : rest.t) term.c *= std::exp(cst);
    return rest;
}

Asym a_log(const Asym& x) {
    if (x.kind != Asym::Ser) return Asym::unknown();
    const Term lead = x.t.front();
    if (std::fabs(lead.p) > kExpTol || lead.c <= 0) return Asym::unknown();
    Asym u = Asym::zero();
    for (std::size_t i = 1; i < x.t.size(); ++i)
        u = a_add(u, Asym::series({{x.t[i].p, x.t[i].c / lead.c}}));
    Asym lg;
    if (!log1p_series(u, lg)) {
        if (u.kind == Asym::Zero) lg = Asym::zero();
        else return Asym::unknown();
    }
    return a_add(Asym::series({{0.0, std::log(lead.c)}}), lg);
}

Asym a_abs(const Asym& x) {
    if (x.kind != Asym::Ser) return x;
    return x.t.front().c < 0 ? a_neg(x) : x;
}

// limiting value class of a series as h -> 0+: -inf / finite / +inf
int limit_class(const Asym& x, double& finite_value) {
    const Term lead = x.t.front();
    if (lead.p < -kExpTol) return lead.c > 0 ? 2 : -2;
    if (lead.p > kExpTol) { finite_value = 0.0; return 0; }
    finite_value = lead.c;
    return 0;
}

Asym a_minmax(const Asym& x, const Asym& y, bool want_min) {
    auto lift = [](const Asym& a) { return a.kind == Asym::Zero ? Asym::series({{0.0, 0.0}}) : a; };
    if ((x.kind != Asym::Ser && x.kind != Asym::Zero) ||
        (y.kind != Asym::Ser && y.kind != Asym::Zero))
        return Asym::unknown();
    if (x.kind == Asym::Zero && y.kind == Asym::Zero) return Asym::zero();
    Asym xs = lift(x), ys = lift(y);
    double vx = 0, vy = 0;
    int cx = xs.t.empty() ? 0 : limit_class(xs, vx);
    int cy = ys.t.empty() ? 0 : limit_class(ys, vy);
    if (xs.t.empty()) { cx = 0; vx = 0; }
    if (ys.t.empty()) { cy = 0; vy = 0; }
    double keyx = cx == 0 ? vx : (cx > 0 ? 1e308 : -1e308);
    double keyy = cy == 0 ? vy : (cy > 0 ? 1e308 : -1e308);
    if (keyx != keyy)
        return (want_min == (keyx < keyy)) ? x : y;
    // equal limits: only resolvable when both tend to the same finite value 0
    if (cx == 0 && cy == 0 && vx == 0.0 && vy == 0.0 && !xs.t.empty() && !ys.t.empty()) {
        const Term lx = xs.t.front(), ly = ys.t.front();
        if (lx.c > 0 && ly.c > 0)
            return (want_min == (lx.p > ly.p)) ? x : y;
        if (lx.c < 0 && ly.c < 0)
            return (want_min == (lx.p < ly.p)) ? x : y;
        if (lx.c * ly.c < 0)
            return (want_min == (lx.c < ly.c)) ? x : y;
    }
    return Asym::unknown();
}

Asym analyze(const Node& n, const Asym& var) {
    switch (n.kind) {
        case NodeKind::Num:
            return n.value == 0.0 ? Asym::zero() : Asym::series({{0.0, n.value}});
        case NodeKind::Var: return var;
        case NodeKind::Add: return a_add(analyze(*n.a, var), analyze(*n.b, var));
        case NodeKind::Sub: return a_add(analyze(*n.a, var), a_neg(analyze(*n.b, var)));
        case NodeKind::Mul: return a_mul(analyze(*n.a, var), analyze(*n.b, var));
        case NodeKind::Div: return a_div(analyze(*n.a, var), analyze(*n.b, var));
        case NodeKind::Pow: return a_pow(analyze(*n.a, var), n.value);
        case NodeKind::Neg: return a_neg(analyze(*n.a, var));
        case NodeKind::Exp: return a_exp(analyze(*n.a, var));
        case NodeKind::Log: return a_log(analyze(*n.a, var));
        case NodeKind::Sqrt: return a_pow(analyze(*n.a, var), 0.5);
        case NodeKind::Abs: return a_abs(analyze(*n.a, var));
        case NodeKind::Min: return a_minmax(analyze(*n.a, var), analyze(*n.b, var), true);
        case NodeKind::Max: return a_minmax(analyze(*n.a, var), analyze(*n.b, var), false);
    }
    return Asym::unknown();
}

Asym var_series(const Boundary& b) {
    if (b.at_infinity) return Asym::series({{-1.0, 1.0}});
    const double sgn = b.from_above ? 1.0 : -1.0;
    if (b.point == 0.0) return Asym::series({{1.0, sgn}});
    return Asym::series({{0.0, b.point}, {1.0, sgn}});
}

}  // namespace

AsymptoticExponent exponent_at(const CoefficientExpr& e, const Boundary& boundary) {
    const Asym a = analyze(*e.root(), var_series(boundary));
    AsymptoticExponent r;
    switch (a.kind) {
        case Asym::Zero:
            r.identically_zero = true;
            r.exact = true;
            return r;
        case Asym::SuperG:
            r.super_growth = true;
            r.exact = true;
            return r;
        case Asym::SuperD:
            r.super_decay = true;
            r.exact = true;
            return r;
        case Asym::Ser: {
            const double p = a.t.front().p;
            r.has_exponent = true;
            r.exponent = boundary.at_infinity ? -p : p;
            r.leading_coeff = a.t.front().c;
            r.exact = true;
            return r;
        }
        case Asym::Unknown:
            break;
    }
    return fit_exponent(e, boundary);
}

AsymptoticExponent fit_exponent(const CoefficientExpr& e, const Boundary& boundary,
                                int k_min, int k_max) {
    AsymptoticExponent r;
    std::vector<double> lh, lv;
    int sign = 0;
    for (int k = k_min; k <= k_max; ++k) {
        const double h = std::ldexp(1.0, -k);
        double y;
        if (boundary.at_infinity) y = std::ldexp(1.0, k);
        else y = boundary.from_above ? boundary.point + h : boundary.point - h;
        double v;
        if (!e.try_eval(y, v) || v == 0.0) continue;
        const int s = v > 0 ? 1 : -1;
        if (sign == 0) sign = s;
        else if (sign != s) return r;  // oscillating sign: no exponent
        const double x = boundary.at_infinity ? std::log(y) : std::log(h);
        lh.push_back(x);
        lv.push_back(std::log(std::fabs(v)));
    }
    if (lh.size() < 8) return r;
    const std::size_t n = lh.size();
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        sx += lh[i]; sy += lv[i]; sxx += lh[i] * lh[i]; sxy += lh[i] * lv[i];
    }
    const double det = n * sxx - sx * sx;
    const double slope = (n * sxy - sx * sy) / det;
    const double icept = (sy * sxx - sx * sxy) / det;
    double max_resid = 0;
    for (std::size_t i = 0; i < n; ++i)
        max_resid = std::max(max_resid, std::fabs(lv[i] - (icept + slope * lh[i])));
    if (max_resid > 1e-3) return r;
    r.has_exponent = true;
    r.exponent = slope;
    r.leading_coeff = sign * std::exp(icept);
    r.exact = false;
    return r;
}

}  // namespace perpint
