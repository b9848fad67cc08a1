#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <unordered_map>

#include "jetfield/core.hpp"

namespace jetfield {

// Variable families a jet-space expression may reference.
//   Temporal  t1..tp      -> kind Temporal, index a
//   Spatial   x1..xn      -> kind Spatial, index i
//   Vertical  y_i_a       -> kind Vertical, indices (i, a)
//   Param     anything else -> named constant bound at evaluation time
enum class VarKind : std::uint8_t { Temporal, Spatial, Vertical, Param };

// Identity of a coordinate variable, packed for cache keys.
// Temporal: a in [0,p); Spatial: i in [0,n); Vertical: (i, a).
struct VarId {
    VarKind kind = VarKind::Param;
    int i = 0;  // spatial index, or the temporal index for kind Temporal
    int a = 0;  // temporal sub-index for kind Vertical

    static VarId temporal(int a) { return {VarKind::Temporal, a, 0}; }
    static VarId spatial(int i) { return {VarKind::Spatial, i, 0}; }
    static VarId vertical(int i, int a) { return {VarKind::Vertical, i, a}; }

    bool operator==(const VarId&) const = default;

    // Compact key; coordinate indices are tiny (p, n <= a few dozen).
    std::uint32_t code() const {
        return (static_cast<std::uint32_t>(kind) << 28) | (static_cast<std::uint32_t>(i) << 14) |
               static_cast<std::uint32_t>(a);
    }
};

struct ExprNode;
using Params = std::map<std::string, double>;

// Immutable expression handle. Copies are cheap (shared pointer); all
// operations are pure and thread-safe. Construction applies light
// simplification only (constant folding, 0/1 identities) -- equality of
// expressions is always decided numerically, never structurally.
class Expr {
  public:
    Expr() = default;  // empty handle; using it in arithmetic is a bug

    // --- leaf factories -------------------------------------------------
    static Expr constant(double v);
    static Expr var(VarId id);
    static Expr param(std::string name);

    // --- composite factories (simplifying) -------------------------------
    static Expr add(const Expr& a, const Expr& b);
    static Expr sub(const Expr& a, const Expr& b);
    static Expr mul(const Expr& a, const Expr& b);
    static Expr div(const Expr& a, const Expr& b);
    static Expr neg(const Expr& a);
    // Exponent is a static rational num/den (den > 0 after normalization).
    static Expr pow(const Expr& base, long long num, long long den = 1);

    static Expr sin(const Expr& a);
    static Expr cos(const Expr& a);
    static Expr tan(const Expr& a);
    static Expr exp(const Expr& a);
    static Expr ln(const Expr& a);
    static Expr sqrt(const Expr& a);
    static Expr sinh(const Expr& a);
    static Expr cosh(const Expr& a);
    static Expr tanh(const Expr& a);

    // --- queries ----------------------------------------------------------
    bool valid() const { return node_ != nullptr; }
    bool is_constant() const;
    double constant_value() const;  // pre: is_constant()
    bool is_zero() const;           // constant 0
    std::uint64_t id() const;

    // Exact symbolic derivative with respect to a coordinate variable.
    // Results are cached globally by (node id, variable), so repeated
    // differentiation of shared subtrees costs nothing.
    Expr diff(VarId v) const;

    // Distinct coordinate variables referenced anywhere in the tree, in
    // first-encounter order. Named parameters are not included.
    std::vector<VarId> coordinate_vars() const;

    // Evaluate at a point. Convenience wrapper around Evaluator for one-off
    // use; prefer Evaluator when evaluating many expressions at one point.
    double eval(const JetPoint& pt, const Params& params = {}) const;

    // Canonical infix rendering; parse(to_string(e)) is evaluation-equivalent
    // to e.
    std::string to_string() const;

    const ExprNode* node() const { return node_.get(); }

  private:
    explicit Expr(std::shared_ptr<const ExprNode> n) : node_(std::move(n)) {}
    std::shared_ptr<const ExprNode> node_;
    friend struct ExprNode;
};

// Operator sugar so geometric formulas read naturally.
inline Expr operator+(const Expr& a, const Expr& b) { return Expr::add(a, b); }
inline Expr operator-(const Expr& a, const Expr& b) { return Expr::sub(a, b); }
inline Expr operator*(const Expr& a, const Expr& b) { return Expr::mul(a, b); }
inline Expr operator/(const Expr& a, const Expr& b) { return Expr::div(a, b); }
inline Expr operator-(const Expr& a) { return Expr::neg(a); }
inline Expr operator+(const Expr& a, double b) { return Expr::add(a, Expr::constant(b)); }
inline Expr operator+(double a, const Expr& b) { return Expr::add(Expr::constant(a), b); }
inline Expr operator-(const Expr& a, double b) { return Expr::sub(a, Expr::constant(b)); }
inline Expr operator-(double a, const Expr& b) { return Expr::sub(Expr::constant(a), b); }
inline Expr operator*(const Expr& a, double b) { return Expr::mul(a, Expr::constant(b)); }
inline Expr operator*(double a, const Expr& b) { return Expr::mul(Expr::constant(a), b); }
inline Expr operator/(const Expr& a, double b) { return Expr::div(a, Expr::constant(b)); }
inline Expr operator/(double a, const Expr& b) { return Expr::div(Expr::constant(a), b); }

// Parse `source` against the expression grammar (see README). Variables are
// validated against `dims`; identifiers that are not coordinate variables or
// function names become named parameters.
Expr parse(const std::string& source, const Dims& dims);

// Evaluates many expressions at one fixed (point, params) pair, memoizing
// shared subtrees by node id. Not thread-safe; use one per thread.
class Evaluator {
  public:
    Evaluator(const JetPoint& pt, const Dims& dims, const Params& params = {});

    double eval(const Expr& e);

    const JetPoint& point() const { return pt_; }
    const Dims& dims() const { return dims_; }

  private:
    double eval_node(const ExprNode* n);

    JetPoint pt_;
    Dims dims_;
    Params params_;
    std::unordered_map<std::uint64_t, double> memo_;
};

}  // namespace jetfield
