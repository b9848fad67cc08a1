#pragma once

#include <initializer_list>
#include <span>
#include <vector>

#include "jetfield/core.hpp"
#include "jetfield/dtensor.hpp"
#include "jetfield/expr.hpp"
#include "jetfield/metric_field.hpp"

namespace jetfield {

// Dense tensor field on the jet space: one expression per component, with
// the same typed-slot layout as DTensor. Value semantics; components are
// shared immutable expression trees, so copies are cheap.
class TensorField {
  public:
    TensorField() = default;
    // Zero-filled field of the given shape.
    TensorField(const Dims& dims, std::vector<IndexSlot> slots);

    static TensorField scalar(const Dims& dims, Expr e);

    const Dims& dims() const { return dims_; }
    const std::vector<IndexSlot>& slots() const { return slots_; }
    int rank() const { return static_cast<int>(slots_.size()); }
    int extent(int slot) const { return slot_extent(dims_, slots_[static_cast<size_t>(slot)].kind); }

    const Expr& at(std::span<const int> idx) const;
    Expr& at(std::span<const int> idx);
    const Expr& at(std::initializer_list<int> idx) const {
        return at(std::span<const int>(idx.begin(), idx.size()));
    }
    Expr& at(std::initializer_list<int> idx) {
        return at(std::span<const int>(idx.begin(), idx.size()));
    }

    // Evaluate every component with a shared evaluator (preferred when
    // several fields are evaluated at the same point).
    DTensor eval(Evaluator& ev) const;
    DTensor eval_at(const JetPoint& pt, const Params& params = {}) const;

  private:
    size_t offset(std::span<const int> idx) const;

    Dims dims_;
    std::vector<IndexSlot> slots_;
    std::vector<Expr> comps_;
};

// Coefficient blocks of an h-normal linear connection on the jet space:
//   H^g_{ab}  temporal block        (the time-metric Christoffel symbols)
//   G^k_{jg}  spatial-temporal block
//   L^k_{ij}  spatial-spatial block
//   C^{i(g)}_{j(k)} spatial-vertical block
// The Berwald connection uses (H, 0, gamma, 0); the canonical metrical
// connection fills all four.
class ConnectionBlocks {
  public:
    ConnectionBlocks() = default;
    ConnectionBlocks(const Dims& dims, std::vector<Expr> H, std::vector<Expr> G,
                     std::vector<Expr> L, std::vector<Expr> C);

    const Expr& H(int g, int a, int b) const;           // H^g_{ab}
    const Expr& G(int k, int j, int g) const;           // G^k_{jg}
    const Expr& L(int k, int i, int j) const;           // L^k_{ij}
    const Expr& C(int i, int j, int k, int g) const;    // C^{i(g)}_{j(k)}
    const Dims& dims() const { return dims_; }

  private:
    Dims dims_;
    std::vector<Expr> H_, G_, L_, C_;
};

// Derivative kinds of the adapted frame: delta/delta t^a, delta/delta x^i,
// and the plain vertical partial d/d y^i_a.
enum class DerivKind : std::uint8_t { Temporal, Spatial, Vertical };

// The fixed geometric context of a model: the two base metrics, the
// conformal factor sigma, the induced nonlinear connection, and the adapted
// derivative operators. All symbolic data is precomputed once.
class JetSpace {
  public:
    JetSpace(MetricField h, MetricField phi, Expr sigma);

    const Dims& dims() const { return dims_; }
    int p() const { return dims_.p; }
    int n() const { return dims_.n; }
    const MetricField& h() const { return h_; }
    const MetricField& phi() const { return phi_; }
    const Expr& sigma() const { return sigma_; }
    const Expr& e2sigma() const { return e2s_; }    // exp(+2 sigma)
    const Expr& em2sigma() const { return em2s_; }  // exp(-2 sigma)

    // Nonlinear connection components.
    //   M^{(i)}_{(a)b} = -H^m_{ba} y^i_m      (temporal part)
    //   N^{(i)}_{(a)j} = gamma^i_{jm} y^m_a   (spatial part)
    const Expr& M(int i, int a, int b) const;
    const Expr& N(int i, int a, int j) const;

    // Adapted directional derivatives of an arbitrary expression:
    //   dt: delta/delta t^a = d/dt^a - M^{(j)}_{(b)a} d/dy^j_b
    //   dx: delta/delta x^i = d/dx^i - N^{(j)}_{(b)i} d/dy^j_b
    //   dy: plain d/dy^i_a
    Expr dt(const Expr& e, int a) const;
    Expr dx(const Expr& e, int i) const;
    Expr dy(const Expr& e, int i, int a) const;
    Expr adapted(const Expr& e, VarId dir) const;

    // First derivatives of sigma in the adapted frame, and derived fields.
    const Expr& sigma_t(int a) const;        // sigma_a = delta sigma/delta t^a
    const Expr& sigma_x(int i) const;        // sigma_i = delta sigma/delta x^i
    const Expr& sigma_y(int i, int a) const; // sigma^{(a)}_{(i)} = d sigma/d y^i_a
    const Expr& sigma_xup(int i) const;      // sigma^i = phi^{im} sigma_m
    const Expr& sigma_yup(int i, int a) const;  // sigma^{ia} = phi^{im} sigma^{(a)}_{(m)}
    const Expr& lambda(int k, int i, int j) const;  // sigma_i d^k_j + sigma_j d^k_i - phi_{ij} sigma^k

    // Berwald connection blocks (H, 0, gamma, 0).
    const ConnectionBlocks& berwald() const { return berwald_; }

  private:
    MetricField h_;
    MetricField phi_;
    Expr sigma_;
    Dims dims_;
    Expr e2s_, em2s_;
    std::vector<Expr> M_, N_;
    std::vector<Expr> st_, sx_, sy_, sxu_, syu_, lam_;
    ConnectionBlocks berwald_;
};

// Covariant derivative of a tensor field with respect to an h-normal
// connection. Appends one lower slot of the derivative kind. The rule is
// one additive correction per slot (+ for upper, - for lower); temporal
// derivatives correct temporal slots through H, Latin slots through G, and
// both halves of a vertical pair; spatial derivatives correct Latin slots
// through L; vertical derivatives correct Latin slots through C. Temporal
// slots receive no spatial or vertical correction (those coefficient blocks
// vanish for every connection used here).
TensorField covderiv(const JetSpace& js, const ConnectionBlocks& cn, const TensorField& T,
                     DerivKind kind);

// Shorthand for the Berwald connection of the space.
TensorField berwald_covderiv(const JetSpace& js, const TensorField& T, DerivKind kind);

// --- numeric per-point facades ----------------------------------------------

// Nonlinear connection as per-point tensors.
//   M: slots (vertical-pair upper, temporal lower)
//   N: slots (vertical-pair upper, spatial lower)
class NonlinearConnection {
  public:
    explicit NonlinearConnection(const JetSpace& js);
    DTensor M_at(const JetPoint& pt, const Params& params = {}) const;
    DTensor N_at(const JetPoint& pt, const Params& params = {}) const;

  private:
    const JetSpace* js_;
    TensorField M_tf_, N_tf_;
};

// The sigma first-derivative family at one point.
struct SigmaDerivs {
    DTensor sigma_t;    // (temporal lower)
    DTensor sigma_x;    // (spatial lower)
    DTensor sigma_y;    // (vertical-pair lower), entry (k,g) = sigma^{(g)}_{(k)}
    DTensor sigma_yup;  // (vertical-pair upper), entry (k,g) = sigma^{kg}
    DTensor lambda;     // (spatial upper, spatial lower, spatial lower)
};

SigmaDerivs sigma_derivs_at(const JetSpace& js, const JetPoint& pt, const Params& params = {});

// Adapted directional derivative of an expression at a point.
double adapted_derivative_at(const JetSpace& js, const Expr& e, VarId dir, const JetPoint& pt,
                             const Params& params = {});

}  // namespace jetfield
