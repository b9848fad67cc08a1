#include "jetfield/expr.hpp"

#include <atomic>
#include <cctype>
#include <charconv>
#include <cmath>
#include <mutex>
#include <numeric>
#include <sstream>
#include <unordered_set>
#include <utility>

namespace jetfield {

enum class Op : std::uint8_t { Const, Var, Add, Sub, Mul, Div, Neg, Pow, Func };
enum class Fn : std::uint8_t { Sin, Cos, Tan, Exp, Ln, Sqrt, Sinh, Cosh, Tanh };

struct ExprNode {
    Op op;
    Fn fn = Fn::Sin;          // meaningful iff op == Func
    double cval = 0.0;        // iff op == Const
    VarId var;                // iff op == Var
    long long pnum = 1;       // iff op == Pow: exponent numerator
    long long pden = 1;       // iff op == Pow: exponent denominator (> 0)
    std::string param;        // iff op == Var with kind Param
    Expr a;                   // first child
    Expr b;                   // second child (binary ops only)
    std::uint64_t id;

    ExprNode() : id(next_id()) {}

    static std::uint64_t next_id() {
        static std::atomic<std::uint64_t> counter{1};
        return counter.fetch_add(1, std::memory_order_relaxed);
    }

    // ExprNode is a friend of Expr; this is the construction path for helpers
    // in this translation unit.
    static Expr wrap(std::shared_ptr<const ExprNode> n) { return Expr(std::move(n)); }
};

namespace {

const char* fn_name(Fn f) {
    switch (f) {
        case Fn::Sin: return "sin";
        case Fn::Cos: return "cos";
        case Fn::Tan: return "tan";
        case Fn::Exp: return "exp";
        case Fn::Ln: return "ln";
        case Fn::Sqrt: return "sqrt";
        case Fn::Sinh: return "sinh";
        case Fn::Cosh: return "cosh";
        case Fn::Tanh: return "tanh";
    }
    return "?";
}

bool is_const(const Expr& e, double v) { return e.is_constant() && e.constant_value() == v; }

std::shared_ptr<ExprNode> new_node(Op op) {
    auto n = std::make_shared<ExprNode>();
    n->op = op;
    return n;
}

}  // namespace

// Out-of-line so ExprNode is complete.
bool Expr::is_constant() const { return node_ && node_->op == Op::Const; }
double Expr::constant_value() const { return node_->cval; }
bool Expr::is_zero() const { return is_constant() && node_->cval == 0.0; }
std::uint64_t Expr::id() const { return node_ ? node_->id : 0; }

Expr Expr::constant(double v) {
    auto n = new_node(Op::Const);
    n->cval = v;
    return Expr(std::move(n));
}

Expr Expr::var(VarId id) {
    auto n = new_node(Op::Var);
    n->var = id;
    return Expr(std::move(n));
}

Expr Expr::param(std::string name) {
    auto n = new_node(Op::Var);
    n->var = VarId{VarKind::Param, 0, 0};
    n->param = std::move(name);
    return Expr(std::move(n));
}

Expr Expr::add(const Expr& a, const Expr& b) {
    if (a.is_constant() && b.is_constant()) return constant(a.constant_value() + b.constant_value());
    if (a.is_zero()) return b;
    if (b.is_zero()) return a;
    auto n = new_node(Op::Add);
    n->a = a;
    n->b = b;
    return Expr(std::move(n));
}

Expr Expr::sub(const Expr& a, const Expr& b) {
    if (a.is_constant() && b.is_constant()) return constant(a.constant_value() - b.constant_value());
    if (b.is_zero()) return a;
    if (a.is_zero()) return neg(b);
    auto n = new_node(Op::Sub);
    n->a = a;
    n->b = b;
    return Expr(std::move(n));
}

Expr Expr::mul(const Expr& a, const Expr& b) {
    if (a.is_constant() && b.is_constant()) return constant(a.constant_value() * b.constant_value());
    if (a.is_zero() || b.is_zero()) return constant(0.0);
    if (is_const(a, 1.0)) return b;
    if (is_const(b, 1.0)) return a;
    auto n = new_node(Op::Mul);
    n->a = a;
    n->b = b;
    return Expr(std::move(n));
}

Expr Expr::div(const Expr& a, const Expr& b) {
    if (a.is_constant() && b.is_constant() && b.constant_value() != 0.0)
        return constant(a.constant_value() / b.constant_value());
    // 0/e -> 0: sound wherever e != 0; points with e == 0 already fail in any
    // sibling expression that divides by e, and samplers reject them.
    if (a.is_zero()) return constant(0.0);
    if (is_const(b, 1.0)) return a;
    auto n = new_node(Op::Div);
    n->a = a;
    n->b = b;
    return Expr(std::move(n));
}

Expr Expr::neg(const Expr& a) {
    if (a.is_constant()) return constant(-a.constant_value());
    if (a.node()->op == Op::Neg) return a.node()->a;
    auto n = new_node(Op::Neg);
    n->a = a;
    return Expr(std::move(n));
}

Expr Expr::pow(const Expr& base, long long num, long long den) {
    if (den == 0) throw JetfieldError("power with zero denominator exponent");
    if (den < 0) {
        num = -num;
        den = -den;
    }
    const long long g = std::gcd(num < 0 ? -num : num, den);
    if (g > 1) {
        num /= g;
        den /= g;
    }
    if (num == 0) return constant(1.0);
    if (num == 1 && den == 1) return base;
    if (base.is_constant() && den == 1 && base.constant_value() != 0.0) {
        const double v = std::pow(base.constant_value(), static_cast<double>(num));
        return constant(v);
    }
    auto n = new_node(Op::Pow);
    n->a = base;
    n->pnum = num;
    n->pden = den;
    return Expr(std::move(n));
}

namespace {
Expr make_fn(Fn f, const Expr& a) {
    if (a.is_constant()) {
        const double v = a.constant_value();
        switch (f) {
            case Fn::Sin: return Expr::constant(std::sin(v));
            case Fn::Cos: return Expr::constant(std::cos(v));
            case Fn::Tan: return Expr::constant(std::tan(v));
            case Fn::Exp: return Expr::constant(std::exp(v));
            case Fn::Sinh: return Expr::constant(std::sinh(v));
            case Fn::Cosh: return Expr::constant(std::cosh(v));
            case Fn::Tanh: return Expr::constant(std::tanh(v));
            case Fn::Ln:
                if (v > 0.0) return Expr::constant(std::log(v));
                break;  // keep the node; evaluation reports the domain error
            case Fn::Sqrt:
                if (v >= 0.0) return Expr::constant(std::sqrt(v));
                break;
        }
    }
    auto n = new_node(Op::Func);
    n->fn = f;
    n->a = a;
    return ExprNode::wrap(std::move(n));
}
}  // namespace

Expr Expr::sin(const Expr& a) { return make_fn(Fn::Sin, a); }
Expr Expr::cos(const Expr& a) { return make_fn(Fn::Cos, a); }
Expr Expr::tan(const Expr& a) { return make_fn(Fn::Tan, a); }
Expr Expr::exp(const Expr& a) { return make_fn(Fn::Exp, a); }
Expr Expr::ln(const Expr& a) { return make_fn(Fn::Ln, a); }
Expr Expr::sqrt(const Expr& a) { return make_fn(Fn::Sqrt, a); }
Expr Expr::sinh(const Expr& a) { return make_fn(Fn::Sinh, a); }
Expr Expr::cosh(const Expr& a) { return make_fn(Fn::Cosh, a); }
Expr Expr::tanh(const Expr& a) { return make_fn(Fn::Tanh, a); }

// ---------------------------------------------------------------------------
// Differentiation
// ---------------------------------------------------------------------------

namespace {

struct DiffKey {
    std::uint64_t id;
    std::uint32_t var;
    bool operator==(const DiffKey&) const = default;
};

struct DiffKeyHash {
    size_t operator()(const DiffKey& k) const {
        return std::hash<std::uint64_t>()(k.id * 0x9e3779b97f4a7c15ULL ^ k.var);
    }
};

std::unordered_map<DiffKey, Expr, DiffKeyHash>& diff_cache() {
    static std::unordered_map<DiffKey, Expr, DiffKeyHash> cache;
    return cache;
}

std::mutex& diff_mutex() {
    static std::mutex m;
    return m;
}

Expr diff_node(const Expr& e, VarId v);

Expr diff_cached(const Expr& e, VarId v) {
    const DiffKey key{e.id(), v.code()};
    {
        std::lock_guard<std::mutex> lock(diff_mutex());
        auto it = diff_cache().find(key);
        if (it != diff_cache().end()) return it->second;
    }
    Expr d = diff_node(e, v);
    std::lock_guard<std::mutex> lock(diff_mutex());
    return diff_cache().emplace(key, std::move(d)).first->second;
}

Expr diff_node(const Expr& e, VarId v) {
    const ExprNode* n = e.node();
    switch (n->op) {
        case Op::Const: return Expr::constant(0.0);
        case Op::Var:
            if (n->var.kind == VarKind::Param) return Expr::constant(0.0);
            return Expr::constant(n->var == v ? 1.0 : 0.0);
        case Op::Add: return Expr::add(diff_cached(n->a, v), diff_cached(n->b, v));
        case Op::Sub: return Expr::sub(diff_cached(n->a, v), diff_cached(n->b, v));
        case Op::Mul:
            return Expr::add(Expr::mul(diff_cached(n->a, v), n->b),
                             Expr::mul(n->a, diff_cached(n->b, v)));
        case Op::Div:
            return Expr::div(Expr::sub(Expr::mul(diff_cached(n->a, v), n->b),
                                       Expr::mul(n->a, diff_cached(n->b, v))),
                             Expr::mul(n->b, n->b));
        case Op::Neg: return Expr::neg(diff_cached(n->a, v));
        case Op::Pow: {
            // d(u^q) = q * u^(q-1) * u'
            const Expr du = diff_cached(n->a, v);
            if (du.is_zero()) return Expr::constant(0.0);
            const double q = static_cast<double>(n->pnum) / static_cast<double>(n->pden);
            return Expr::mul(Expr::constant(q),
                             Expr::mul(Expr::pow(n->a, n->pnum - n->pden, n->pden), du));
        }
        case Op::Func: {
            const Expr du = diff_cached(n->a, v);
            if (du.is_zero()) return Expr::constant(0.0);
            const Expr& u = n->a;
            switch (n->fn) {
                case Fn::Sin: return Expr::mul(Expr::cos(u), du);
                case Fn::Cos: return Expr::neg(Expr::mul(Expr::sin(u), du));
                case Fn::Tan: {
                    const Expr c = Expr::cos(u);
                    return Expr::div(du, Expr::mul(c, c));
                }
                case Fn::Exp: return Expr::mul(Expr::exp(u), du);
                case Fn::Ln: return Expr::div(du, u);
                case Fn::Sqrt:
                    return Expr::div(du, Expr::mul(Expr::constant(2.0), Expr::sqrt(u)));
                case Fn::Sinh: return Expr::mul(Expr::cosh(u), du);
                case Fn::Cosh: return Expr::mul(Expr::sinh(u), du);
                case Fn::Tanh: {
                    const Expr c = Expr::cosh(u);
                    return Expr::div(du, Expr::mul(c, c));
                }
            }
            throw JetfieldError("unknown function in diff");
        }
    }
    throw JetfieldError("unknown node in diff");
}

}  // namespace

Expr Expr::diff(VarId v) const {
    if (!node_) throw JetfieldError("diff on empty expression");
    if (v.kind == VarKind::Param) throw JetfieldError("cannot differentiate by a parameter");
    return diff_cached(*this, v);
}

// ---------------------------------------------------------------------------
// Evaluation
// ---------------------------------------------------------------------------

Evaluator::Evaluator(const JetPoint& pt, const Dims& dims, const Params& params)
    : pt_(pt), dims_(dims), params_(params) {
    if (!pt_.matches(dims_))
        throw JetfieldError("jet point shape does not match dimensions (p=" +
                            std::to_string(dims_.p) + ", n=" + std::to_string(dims_.n) + ")");
}

namespace {
[[noreturn]] void eval_domain_error(const std::string& what, const ExprNode* n);
}

double Evaluator::eval(const Expr& e) {
    if (!e.valid()) throw JetfieldError("eval on empty expression");
    return eval_node(e.node());
}

double Evaluator::eval_node(const ExprNode* n) {
    if (n->op == Op::Const) return n->cval;
    auto it = memo_.find(n->id);
    if (it != memo_.end()) return it->second;
    double v = 0.0;
    switch (n->op) {
        case Op::Const: v = n->cval; break;
        case Op::Var:
            switch (n->var.kind) {
                case VarKind::Temporal: v = pt_.t[static_cast<size_t>(n->var.i)]; break;
                case VarKind::Spatial: v = pt_.x[static_cast<size_t>(n->var.i)]; break;
                case VarKind::Vertical:
                    v = pt_.y[static_cast<size_t>(n->var.i)][static_cast<size_t>(n->var.a)];
                    break;
                case VarKind::Param: {
                    auto p = params_.find(n->param);
                    if (p == params_.end())
                        throw EvalError("unbound parameter '" + n->param + "'");
                    v = p->second;
                    break;
                }
            }
            break;
        case Op::Add: v = eval_node(n->a.node()) + eval_node(n->b.node()); break;
        case Op::Sub: v = eval_node(n->a.node()) - eval_node(n->b.node()); break;
        case Op::Mul: v = eval_node(n->a.node()) * eval_node(n->b.node()); break;
        case Op::Div: {
            const double den = eval_node(n->b.node());
            if (den == 0.0) eval_domain_error("division by zero", n);
            v = eval_node(n->a.node()) / den;
            break;
        }
        case Op::Neg: v = -eval_node(n->a.node()); break;
        case Op::Pow: {
            const double base = eval_node(n->a.node());
            if (n->pden == 1) {
                if (base == 0.0 && n->pnum < 0) eval_domain_error("zero base with negative exponent", n);
                long long k = n->pnum < 0 ? -n->pnum : n->pnum;
                if (k <= 16) {
                    double acc = 1.0;
                    for (long long j = 0; j < k; ++j) acc *= base;
                    v = n->pnum < 0 ? 1.0 / acc : acc;
                } else {
                    v = std::pow(base, static_cast<double>(n->pnum));
                }
            } else {
                if (base < 0.0) eval_domain_error("negative base with fractional exponent", n);
                if (base == 0.0 && n->pnum < 0) eval_domain_error("zero base with negative exponent", n);
                v = std::pow(base, static_cast<double>(n->pnum) / static_cast<double>(n->pden));
            }
            break;
        }
        case Op::Func: {
            const double u = eval_node(n->a.node());
            switch (n->fn) {
                case Fn::Sin: v = std::sin(u); break;
                case Fn::Cos: v = std::cos(u); break;
                case Fn::Tan: v = std::tan(u); break;
                case Fn::Exp: v = std::exp(u); break;
                case Fn::Ln:
                    if (u <= 0.0) eval_domain_error("ln of a non-positive value", n);
                    v = std::log(u);
                    break;
                case Fn::Sqrt:
                    if (u < 0.0) eval_domain_error("sqrt of a negative value", n);
                    v = std::sqrt(u);
                    break;
                case Fn::Sinh: v = std::sinh(u); break;
                case Fn::Cosh: v = std::cosh(u); break;
                case Fn::Tanh: v = std::tanh(u); break;
            }
            break;
        }
    }
    memo_.emplace(n->id, v);
    return v;
}

double Expr::eval(const JetPoint& pt, const Params& params) const {
    Dims d{static_cast<int>(pt.t.size()), static_cast<int>(pt.x.size())};
    Evaluator ev(pt, d, params);
    return ev.eval(*this);
}

namespace {

void collect_vars(const ExprNode* n, std::unordered_set<std::uint64_t>& seen,
                  std::unordered_set<std::uint32_t>& codes, std::vector<VarId>& out) {
    if (n == nullptr || !seen.insert(n->id).second) return;
    if (n->op == Op::Var) {
        if (n->var.kind != VarKind::Param && codes.insert(n->var.code()).second) {
            out.push_back(n->var);
        }
        return;
    }
    collect_vars(n->a.node(), seen, codes, out);
    collect_vars(n->b.node(), seen, codes, out);
}

}  // namespace

std::vector<VarId> Expr::coordinate_vars() const {
    std::vector<VarId> out;
    std::unordered_set<std::uint64_t> seen;
    std::unordered_set<std::uint32_t> codes;
    collect_vars(node_.get(), seen, codes, out);
    return out;
}

// ---------------------------------------------------------------------------
// Printing
// ---------------------------------------------------------------------------

namespace {

// Precedence levels: additive 1, multiplicative 2, unary minus 3, power 4,
// atoms 5. A child is parenthesized when its level is below the context's.
int node_prec(const ExprNode* n) {
    switch (n->op) {
        case Op::Add:
        case Op::Sub: return 1;
        case Op::Mul:
        case Op::Div: return 2;
        case Op::Neg: return 3;
        case Op::Pow: return 4;
        default: return 5;
    }
}

void print_node(std::ostringstream& out, const ExprNode* n, int min_prec);

void print_child(std::ostringstream& out, const Expr& e, int min_prec) {
    const ExprNode* n = e.node();
    if (node_prec(n) < min_prec) {
        out << '(';
        print_node(out, n, 0);
        out << ')';
    } else {
        print_node(out, n, 0);
    }
}

void print_node(std::ostringstream& out, const ExprNode* n, int) {
    switch (n->op) {
        case Op::Const: {
            char buf[32];
            auto res = std::to_chars(buf, buf + sizeof(buf), n->cval,
                                     std::chars_format::general, 17);
            out << std::string(buf, res.ptr);
            break;
        }
        case Op::Var:
            switch (n->var.kind) {
                case VarKind::Temporal: out << 't' << (n->var.i + 1); break;
                case VarKind::Spatial: out << 'x' << (n->var.i + 1); break;
                case VarKind::Vertical: out << "y_" << (n->var.i + 1) << '_' << (n->var.a + 1); break;
                case VarKind::Param: out << n->param; break;
            }
            break;
        case Op::Add:
            print_child(out, n->a, 1);
            out << " + ";
            print_child(out, n->b, 2);
            break;
        case Op::Sub:
            print_child(out, n->a, 1);
            out << " - ";
            print_child(out, n->b, 2);
            break;
        case Op::Mul:
            print_child(out, n->a, 2);
            out << '*';
            print_child(out, n->b, 3);
            break;
        case Op::Div:
            print_child(out, n->a, 2);
            out << '/';
            print_child(out, n->b, 5);
            break;
        case Op::Neg:
            out << '-';
            print_child(out, n->a, 3);
            break;
        case Op::Pow:
            print_child(out, n->a, 5);
            out << '^';
            if (n->pden == 1 && n->pnum >= 0) {
                out << n->pnum;
            } else {
                out << '(' << n->pnum;
                if (n->pden != 1) out << '/' << n->pden;
                out << ')';
            }
            break;
        case Op::Func:
            out << fn_name(n->fn) << '(';
            print_node(out, n->a.node(), 0);
            out << ')';
            break;
    }
}

}  // namespace

std::string Expr::to_string() const {
    if (!node_) return "<empty>";
    std::ostringstream out;
    print_node(out, node_.get(), 0);
    return out.str();
}

namespace {
[[noreturn]] void eval_domain_error(const std::string& what, const ExprNode* n) {
    std::ostringstream out;
    print_node(out, n, 0);
    std::string text = out.str();
    if (text.size() > 120) text = text.substr(0, 117) + "...";
    throw EvalError(what + " in subexpression: " + text);
}
}  // namespace

// ---------------------------------------------------------------------------
// Parser
// ---------------------------------------------------------------------------

namespace {

enum class TokKind { Number, Ident, Plus, Minus, Star, Slash, Caret, LParen, RParen, End };

struct Token {
    TokKind kind;
    double num = 0.0;
    bool is_integer = false;
    long long int_value = 0;
    std::string text;
    int line = 1;
    int col = 1;
};

class Lexer {
  public:
    explicit Lexer(const std::string& src) : src_(src) { advance(); }

    const Token& peek() const { return tok_; }
    Token take() {
        Token t = tok_;
        advance();
        return t;
    }

  private:
    void advance() {
        while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) {
            if (src_[pos_] == '\n') {
                ++line_;
                col_ = 1;
            } else {
                ++col_;
            }
            ++pos_;
        }
        tok_ = Token{};
        tok_.line = line_;
        tok_.col = col_;
        if (pos_ >= src_.size()) {
            tok_.kind = TokKind::End;
            return;
        }
        const char c = src_[pos_];
        switch (c) {
            case '+': tok_.kind = TokKind::Plus; bump(); return;
            case '-': tok_.kind = TokKind::Minus; bump(); return;
            case '*': tok_.kind = TokKind::Star; bump(); return;
            case '/': tok_.kind = TokKind::Slash; bump(); return;
            case '^': tok_.kind = TokKind::Caret; bump(); return;
            case '(': tok_.kind = TokKind::LParen; bump(); return;
            case ')': tok_.kind = TokKind::RParen; bump(); return;
            default: break;
        }
        if (std::isdigit(static_cast<unsigned char>(c))) {
            lex_number();
            return;
        }
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            size_t start = pos_;
            while (pos_ < src_.size() &&
                   (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
                bump();
            tok_.kind = TokKind::Ident;
            tok_.text = src_.substr(start, pos_ - start);
            return;
        }
        throw ParseError(std::string("unexpected character '") + c + "'", line_, col_);
    }

    void lex_number() {
        size_t start = pos_;
        bool integral = true;
        while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) bump();
        if (pos_ < src_.size() && src_[pos_] == '.') {
            integral = false;
            bump();
            while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) bump();
        }
        if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
            integral = false;
            bump();
            if (pos_ < src_.size() && (src_[pos_] == '+' || src_[pos_] == '-')) bump();
            if (pos_ >= src_.size() || !std::isdigit(static_cast<unsigned char>(src_[pos_])))
                throw ParseError("malformed exponent in number literal", line_, col_);
            while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) bump();
        }
        tok_.kind = TokKind::Number;
        tok_.text = src_.substr(start, pos_ - start);
        const char* first = tok_.text.data();
        const char* last = first + tok_.text.size();
        auto res = std::from_chars(first, last, tok_.num);
        if (res.ec != std::errc{} || res.ptr != last)
            throw ParseError("malformed number literal '" + tok_.text + "'", tok_.line, tok_.col);
        if (integral) {
            auto ires = std::from_chars(first, last, tok_.int_value);
            tok_.is_integer = (ires.ec == std::errc{} && ires.ptr == last);
        }
    }

    void bump() {
        ++pos_;
        ++col_;
    }

    const std::string& src_;
    size_t pos_ = 0;
    int line_ = 1;
    int col_ = 1;
    Token tok_;
};

bool lookup_fn(const std::string& name, Fn& out) {
    if (name == "sin") out = Fn::Sin;
    else if (name == "cos") out = Fn::Cos;
    else if (name == "tan") out = Fn::Tan;
    else if (name == "exp") out = Fn::Exp;
    else if (name == "ln") out = Fn::Ln;
    else if (name == "sqrt") out = Fn::Sqrt;
    else if (name == "sinh") out = Fn::Sinh;
    else if (name == "cosh") out = Fn::Cosh;
    else if (name == "tanh") out = Fn::Tanh;
    else return false;
    return true;
}

// Classify an identifier as a coordinate variable or a parameter.
// Patterns: t<digits>, x<digits>, y_<digits>_<digits> (1-based indices).
bool classify_var(const std::string& name, const Dims& dims, VarId& out, std::string& err) {
    auto all_digits = [](const std::string& s) {
        if (s.empty() || s.size() > 6) return false;  // six digits is beyond any sane dimension
        for (char c : s)
            if (!std::isdigit(static_cast<unsigned char>(c))) return false;
        return true;
    };
    if (name.size() >= 2 && (name[0] == 't' || name[0] == 'x') && all_digits(name.substr(1))) {
        const int idx = std::stoi(name.substr(1));
        if (name[0] == 't') {
            if (idx < 1 || idx > dims.p) {
                err = "temporal index " + std::to_string(idx) + " out of range for p=" +
                      std::to_string(dims.p);
                return false;
            }
            out = VarId::temporal(idx - 1);
        } else {
            if (idx < 1 || idx > dims.n) {
                err = "spatial index " + std::to_string(idx) + " out of range for n=" +
                      std::to_string(dims.n);
                return false;
            }
            out = VarId::spatial(idx - 1);
        }
        return true;
    }
    if (name.size() >= 5 && name[0] == 'y' && name[1] == '_') {
        const size_t second = name.find('_', 2);
        if (second != std::string::npos && second > 2 && second + 1 < name.size()) {
            const std::string si = name.substr(2, second - 2);
            const std::string sa = name.substr(second + 1);
            if (all_digits(si) && all_digits(sa)) {
                const int i = std::stoi(si);
                const int a = std::stoi(sa);
                if (i < 1 || i > dims.n) {
                    err = "spatial index " + std::to_string(i) + " exceeds n=" +
                          std::to_string(dims.n);
                    return false;
                }
                if (a < 1 || a > dims.p) {
                    err = "temporal index " + std::to_string(a) + " exceeds p=" +
                          std::to_string(dims.p);
                    return false;
                }
                out = VarId::vertical(i - 1, a - 1);
                return true;
            }
        }
    }
    out = VarId{VarKind::Param, 0, 0};
    return true;
}

class Parser {
  public:
    Parser(const std::string& src, const Dims& dims) : lex_(src), dims_(dims) {}

    Expr run() {
        Expr e = parse_expr();
        const Token& t = lex_.peek();
        if (t.kind != TokKind::End)
            throw ParseError("unexpected trailing input '" + describe(t) + "'", t.line, t.col);
        return e;
    }

  private:
    static std::string describe(const Token& t) {
        switch (t.kind) {
            case TokKind::Number: return t.text;
            case TokKind::Ident: return t.text;
            case TokKind::Plus: return "+";
            case TokKind::Minus: return "-";
            case TokKind::Star: return "*";
            case TokKind::Slash: return "/";
            case TokKind::Caret: return "^";
            case TokKind::LParen: return "(";
            case TokKind::RParen: return ")";
            case TokKind::End: return "<end>";
        }
        return "?";
    }

    Expr parse_expr() {
        Expr e = parse_term();
        while (true) {
            const TokKind k = lex_.peek().kind;
            if (k == TokKind::Plus) {
                lex_.take();
                e = Expr::add(e, parse_term());
            } else if (k == TokKind::Minus) {
                lex_.take();
                e = Expr::sub(e, parse_term());
            } else {
                return e;
            }
        }
    }

    Expr parse_term() {
        Expr e = parse_factor();
        while (true) {
            const TokKind k = lex_.peek().kind;
            if (k == TokKind::Star) {
                lex_.take();
                e = Expr::mul(e, parse_factor());
            } else if (k == TokKind::Slash) {
                lex_.take();
                e = Expr::div(e, parse_factor());
            } else {
                return e;
            }
        }
    }

    // factor := base ('^' exponent)?   -- note: per the grammar, a leading
    // minus is part of base, so "-x1^2" parses as (-x1)^2.
    Expr parse_factor() {
        Expr base = parse_base();
        if (lex_.peek().kind == TokKind::Caret) {
            lex_.take();
            long long num = 0, den = 1;
            parse_exponent(num, den);
            return Expr::pow(base, num, den);
        }
        return base;
    }

    void parse_exponent(long long& num, long long& den) {
        bool negate = false;
        if (lex_.peek().kind == TokKind::Minus) {
            lex_.take();
            negate = true;
        }
        if (lex_.peek().kind == TokKind::LParen) {
            Token open = lex_.take();
            if (lex_.peek().kind == TokKind::Minus) {
                lex_.take();
                negate = !negate;
            }
            num = take_integer("exponent numerator");
            if (lex_.peek().kind == TokKind::Slash) {
                lex_.take();
                den = take_integer("exponent denominator");
                if (den == 0)
                    throw ParseError("exponent denominator must be nonzero", open.line, open.col);
            }
            expect(TokKind::RParen, "')' closing the exponent");
        } else {
            num = take_integer("exponent");
        }
        if (negate) num = -num;
    }

    long long take_integer(const std::string& what) {
        const Token& t = lex_.peek();
        if (t.kind != TokKind::Number || !t.is_integer)
            throw ParseError("expected an integer " + what + ", got '" + describe(t) +
                                 "' (exponents must be integers or rationals)",
                             t.line, t.col);
        return lex_.take().int_value;
    }

    void expect(TokKind k, const std::string& what) {
        const Token& t = lex_.peek();
        if (t.kind != k)
            throw ParseError("expected " + what + ", got '" + describe(t) + "'", t.line, t.col);
        lex_.take();
    }

    Expr parse_base() {
        const Token t = lex_.take();
        switch (t.kind) {
            case TokKind::Number: return Expr::constant(t.num);
            case TokKind::Minus: return Expr::neg(parse_base());
            case TokKind::LParen: {
                Expr e = parse_expr();
                expect(TokKind::RParen, "')'");
                return e;
            }
            case TokKind::Ident: {
                Fn f;
                if (lookup_fn(t.text, f)) {
                    if (lex_.peek().kind != TokKind::LParen)
                        throw ParseError("function name '" + t.text +
                                             "' must be followed by '('",
                                         t.line, t.col);
                    lex_.take();
                    Expr arg = parse_expr();
                    expect(TokKind::RParen, "')' closing call to " + t.text);
                    switch (f) {
                        case Fn::Sin: return Expr::sin(arg);
                        case Fn::Cos: return Expr::cos(arg);
                        case Fn::Tan: return Expr::tan(arg);
                        case Fn::Exp: return Expr::exp(arg);
                        case Fn::Ln: return Expr::ln(arg);
                        case Fn::Sqrt: return Expr::sqrt(arg);
                        case Fn::Sinh: return Expr::sinh(arg);
                        case Fn::Cosh: return Expr::cosh(arg);
                        case Fn::Tanh: return Expr::tanh(arg);
                    }
                    throw ParseError("unknown function", t.line, t.col);
                }
                VarId var;
                std::string err;
                if (!classify_var(t.text, dims_, var, err)) throw ParseError(err, t.line, t.col);
                if (var.kind == VarKind::Param) return Expr::param(t.text);
                return Expr::var(var);
            }
            default:
                throw ParseError("expected a number, variable, or '(', got '" + describe(t) + "'",
                                 t.line, t.col);
        }
    }

    Lexer lex_;
    Dims dims_;
};

}  // namespace

Expr parse(const std::string& source, const Dims& dims) {
    validate_dims(dims);
    Parser parser(source, dims);
    return parser.run();
}

}  // namespace jetfield
