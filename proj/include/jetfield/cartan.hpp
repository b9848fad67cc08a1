#pragma once

#include "jetfield/jetgeom.hpp"

namespace jetfield {

// --- per-point value bundles -------------------------------------------------

// Coefficient blocks of the canonical metrical connection at one point.
struct CartanConnection {
    DTensor H;  // H^g_{ab}            (temporal upper, temporal lower x2)
    DTensor G;  // G^k_{jg}            (spatial upper, spatial lower, temporal lower)
    DTensor L;  // L^k_{ij}            (spatial upper, spatial lower x2)
    DTensor C;  // C^{i(g)}_{j(k)}     (spatial upper, spatial lower, vertical-pair lower (k,g))
};

// The seven torsion component families of the canonical connection.
// Families are keyed by the argument pair that produces them; the value slot
// comes first. R_ts is identically zero for this class of spaces and is kept
// so reductions can be asserted rather than assumed.
struct TorsionSet {
    DTensor T;     // T^m_{aj}                   (S+, T-, S-)
    DTensor P_s;   // P^{m(b)}_{i(j)}            (S+, S-, V-)
    DTensor P_vt;  // P^{(m)(b)}_{(u) a (j)}     (V+, T-, V-)
    DTensor P_vs;  // P^{(m)(b)}_{(u) i (j)}     (V+, S-, V-)
    DTensor S;     // S^{(m)(a)(b)}_{(u)(i)(j)}  (V+, V-, V-)
    DTensor R_tt;  // R^{(m)}_{(u) a b}          (V+, T-, T-)
    DTensor R_ts;  // R^{(m)}_{(u) a j}          (V+, T-, S-), == 0
    DTensor R_ss;  // R^{(m)}_{(u) i j}          (V+, S-, S-)
};

// The seven curvature component families of the canonical connection.
struct CurvatureSet {
    DTensor Ht;    // H^a_{e b g}                (T+, T-, T-, T-)
    DTensor R_tt;  // R^l_{i b g}                (S+, S-, T-, T-)
    DTensor R_ts;  // R^l_{i b k}                (S+, S-, T-, S-)
    DTensor R_ss;  // R^l_{i j k}                (S+, S-, S-, S-)
    DTensor P_t;   // P^{l(g)}_{i b (k)}         (S+, S-, T-, V-)
    DTensor P_s;   // P^{l(g)}_{i j (k)}         (S+, S-, S-, V-)
    DTensor S;     // S^{l(b)(g)}_{i (j)(k)}     (S+, S-, V-, V-)
};

// Second covariant derivatives of sigma (metrically corrected), the raw
// material of every closed-form curvature and Ricci expression.
struct SigmaSecond {
    DTensor phi4;        // phi^{ij}_{kl} = phi^{ij} phi_{kl} - d^i_l d^j_k  (S+,S+,S-,S-)
    DTensor ss;          // sigma_{jk}                                       (S-,S-)
    DTensor sv;          // sigma_{j(k)}^{(g)}                               (S-,V-)
    DTensor vs;          // sigma_{(j)k}^{(b)}                               (V-,S-)
    DTensor vv;          // sigma_{(j)(k)}^{(b)(g)}                          (V-,V-)
    DTensor vv_swapped;  // same core with the quadratic term's Greek pairing
                         // transposed; the vertical curvature families close
                         // over this variant                                 (V-,V-)
    double pair_ss = 0.0;  // <sigma,sigma>      = phi^{rm} sigma_r sigma_m
    DTensor pair_sv;       // <sigma,sigma>^b    = phi^{rm} sigma_r sigma^{(b)}_{(m)}   (T+)
    DTensor pair_vv;       // <sigma,sigma>^{bg} = phi^{rm} sigma^{(b)}_{(r)} sigma^{(g)}_{(m)}  (T+,T+)
};

// Max-abs residuals of the three exchange identities tying the second
// derivatives of sigma to the curvature of phi:
//   spatial/spatial:   sigma_{jk} - sigma_{kj}            + r^m_{ljk} sigma^{(u)}_{(m)} y^l_u = 0
//   spatial/vertical:  sigma_{i(j)}^{(b)} - sigma_{(j)i}^{(b)}                               = 0
//   vertical/vertical: sigma_{(i)(j)}^{(a)(b)} - sigma_{(j)(i)}^{(b)(a)}                     = 0
struct RicciIdentityReport {
    double spatial_spatial = 0.0;
    double spatial_vertical = 0.0;
    double vertical_vertical = 0.0;
};

// --- symbolic field bundles ---------------------------------------------------

struct TorsionFields {
    TensorField T, P_s, P_vt, P_vs, S, R_tt, R_ts, R_ss;
};

struct CurvatureFields {
    TensorField Ht, R_tt, R_ts, R_ss, P_t, P_s, S;
};

struct SigmaSecondFields {
    TensorField phi4, ss, sv, vs, vv, vv_swapped;
    Expr pair_ss;
    TensorField pair_sv, pair_vv;
};

// Alternate closed-form assemblies that differ from the shipped ones in
// exactly one term. Each is a natural-looking variant that fails the
// direct-vs-closed cross-check; the verify layer evaluates them so reports
// can name the distinguishing term instead of asserting it away.
struct ClosedVariantFields {
    TensorField R_tt_opposite_sign;  // closed R^l_{ibg} with the overall sign flipped
    TensorField P_t_extra_term;      // closed P^{l(g)}_{ib(k)} plus sigma_b sigma^{(g)}_{(k)} d^l_i
    TensorField S_unswapped_pairing; // closed S family assembled from the
                                     // untransposed quadratic pairing
};

// Canonical metrical connection of a conformal jet space: coefficient
// blocks, torsion, curvature in both direct (covariant-derivative) and
// closed (sigma-second) form, and the sigma second-derivative family.
// All symbolic fields are built once in the constructor; the *_at methods
// evaluate them at a point with one shared evaluator per call.
class CartanGeometry {
  public:
    explicit CartanGeometry(JetSpace js);

    const JetSpace& space() const { return js_; }
    const ConnectionBlocks& connection() const { return cn_; }

    const TorsionFields& torsion_fields() const { return tor_; }
    const CurvatureFields& curvature_direct_fields() const { return cdir_; }
    const CurvatureFields& curvature_closed_fields() const { return cclo_; }
    const SigmaSecondFields& sigma_second_fields() const { return s2_; }
    const ClosedVariantFields& closed_variants() const { return var_; }

    // The vertical block of the jet-space metric, h^{ab} e^{2 sigma} phi_{ij},
    // as a (V-,V-) field; both the metricity checks and the lowered Liouville
    // field are built from it.
    const TensorField& vertical_metric_field() const { return vmetric_; }

    CartanConnection connection_at(const JetPoint& pt, const Params& params = {}) const;
    TorsionSet torsion_at(const JetPoint& pt, const Params& params = {}) const;
    SigmaSecond sigma_second_at(const JetPoint& pt, const Params& params = {}) const;
    CurvatureSet curvature_direct_at(const JetPoint& pt, const Params& params = {}) const;
    CurvatureSet curvature_closed_at(const JetPoint& pt, const Params& params = {}) const;
    RicciIdentityReport ricci_identity_check(const JetPoint& pt, const Params& params = {}) const;

  private:
    void require_nondegenerate(const JetPoint& pt, const Params& params) const;

    JetSpace js_;
    ConnectionBlocks cn_;
    TensorField H_tf_, G_tf_, L_tf_, C_tf_;  // connection blocks as fields
    TorsionFields tor_;
    SigmaSecondFields s2_;
    CurvatureFields cdir_, cclo_;
    ClosedVariantFields var_;
    TensorField vmetric_;
};

}  // namespace jetfield
