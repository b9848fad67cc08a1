#pragma once

#include <string>
#include <vector>

#include "jetfield/cartan.hpp"

namespace jetfield {

// --- per-point value bundles -------------------------------------------------

// Blocks of the jet-space metric and their inverses at one point.
struct SasakiBlocks {
    DTensor tt;      // h_{ab}                       (T-,T-)
    DTensor ss;      // e^{2 sigma} phi_{ij}         (S-,S-)
    DTensor vv;      // h^{ab} e^{2 sigma} phi_{ij}  (V-,V-)
    DTensor tt_inv;  // h^{ab}                       (T+,T+)
    DTensor ss_inv;  // e^{-2 sigma} phi^{ij}        (S+,S+)
    DTensor vv_inv;  // h_{ab} e^{-2 sigma} phi^{ij} (V+,V+)
};

// The seven nonzero Ricci blocks of the canonical connection, plus the four
// sigma-trace scalars and matrices that drive their closed forms.
struct RicciBlocks {
    DTensor tt;  // R_{ab}                 (T-,T-)
    DTensor st;  // R_{ib}                 (S-,T-)
    DTensor ss;  // R_{ij}                 (S-,S-)
    DTensor vt;  // P^{(a)}_{(i)b}         (V-,T-)
    DTensor vs;  // P^{(a)}_{(i)j}         (V-,S-)
    DTensor sv;  // P^{(a)}_{i(j)}         (S-,V-)
    DTensor vv;  // S^{(b)(g)}_{(j)(k)}    (V-,V-)
    double mean_ss = 0.0;   // <sigma>       = phi^{rs} sigma_{rs}
    DTensor mean_sv;        // <sigma>^a     = phi^{rs} sigma_{r(s)}^{(a)}     (T+)
    DTensor mean_vv;        // <sigma>^{ab}  = phi^{rs} sigma_{(r)(s)}^{(a)(b)} (T+,T+)
    double mean_mean = 0.0; // <<sigma>>     = h_{ab} <sigma>^{ab}
};

// The three additive parts of the scalar curvature.
struct ScalarParts {
    double H = 0.0;   // temporal part, h^{ab} R_{ab}
    double R = 0.0;   // spatial part
    double S = 0.0;   // vertical part
    double Sc = 0.0;  // H + R + S
};

// Stress-energy blocks at one point. The (T,S) and (T,V) blocks are carried
// so a supplied tensor violating the structural zero rows is reported, not
// silently ignored.
struct StressEnergy {
    double K = 1.0;  // gravitational coupling constant
    DTensor tt;      // (T-,T-)
    DTensor st;      // (S-,T-)
    DTensor ss;      // (S-,S-)
    DTensor vt;      // (V-,T-)
    DTensor vs;      // (V-,S-)
    DTensor sv;      // (S-,V-)
    DTensor vv;      // (V-,V-)
    DTensor ts;      // (T-,S-), must vanish
    DTensor tv;      // (T-,V-), must vanish
};

// Max-abs residuals of the nine field-equation rows.
struct EinsteinResiduals {
    bool outside_hypothesis = false;  // block forms stated for p > 2 and n > 2
    double temporal = 0.0;   // H_{ab} - (H/2) h_{ab} - K Tt_{ab}
    double spatial = 0.0;    // r_{ij} - (r/2) phi_{ij} + rho_{ij} - K Tt_{ij}
    double vertical = 0.0;   // S-block + (n-1) <<sigma>> h^{ab} phi_{ij} - K Tt
    double mixed_st = 0.0;   // R_{ib}          - K T_{ib}
    double mixed_vt = 0.0;   // P^{(a)}_{(i)b}  - K T^{(a)}_{(i)b}
    double mixed_vs = 0.0;   // P^{(a)}_{(i)j}  - K T^{(a)}_{(i)j}
    double mixed_sv = 0.0;   // P^{(a)}_{i(j)}  - K T^{(a)}_{i(j)}
    double mixed_ts = 0.0;   // structural zero row: |T_{a i}|
    double mixed_tv = 0.0;   // structural zero row: |T_{a (i,b)}|
};

// One additive term of a conservation law, stored unscaled together with the
// coefficient it enters the sum with, so a single offending term can be
// localized when a total drifts.
struct ConservationTerm {
    std::string name;
    double prefactor = 1.0;
    bool prefactor_finite = true;  // false when the stated coefficient divides by zero
    DTensor value;
};

struct ConservationLaw {
    std::vector<ConservationTerm> terms;  // right-hand side moved left
    bool total_available = false;         // every prefactor finite
    double residual = 0.0;                // max-abs of the prefactor-weighted sum
};

struct ConservationReport {
    bool outside_hypothesis = false;  // laws stated for p > 2 and n > 2
    std::string hypothesis_note;
    ConservationLaw temporal;
    ConservationLaw spatial;
    ConservationLaw vertical;
    // When sigma has no fibre dependence the three divergences decouple; the
    // simple-form residuals are their individual magnitudes.
    bool simple_form_applicable = false;
    double simple_temporal = 0.0;
    double simple_spatial = 0.0;
    double simple_vertical = 0.0;
};

// --- symbolic variant bundle ---------------------------------------------------

// Closed-form Ricci assemblies that differ from the shipped ones in exactly
// one coefficient or term. Each fails the trace-vs-closed cross-check by a
// visible margin on a generic configuration, so reports can name the
// distinguishing piece instead of asserting it away.
struct RicciVariantFields {
    TensorField vt_gradient_product;  // mixed (V,T) block plus sigma^{(a)}_{(i)} sigma_b
    TensorField vv_unit_quadratic;    // vertical block with quadratic coefficient 1 instead of 1-n
    TensorField rho_coefficients;     // rho with trace coefficient -(3-2n) and a doubled
                                      // Ricci-trace term in the fibre contraction
};

// Ricci blocks, scalar curvature, field-equation residuals, and
// conservation-law residuals of a conformal jet space. All symbolic fields
// are built once in the constructor; the *_at methods evaluate them at a
// point with one shared evaluator per call.
class GravityModel {
  public:
    explicit GravityModel(CartanGeometry cg);

    const CartanGeometry& geometry() const { return cg_; }
    const JetSpace& space() const { return cg_.space(); }

    SasakiBlocks metric_blocks_at(const JetPoint& pt, const Params& params = {}) const;

    // Ricci blocks by tracing the directly-computed curvature families
    // (R_{AB} = R^D_{ABD}) and by the closed sigma-trace forms; the two must
    // agree.
    RicciBlocks ricci_from_curvature_at(const JetPoint& pt, const Params& params = {}) const;
    RicciBlocks ricci_closed_at(const JetPoint& pt, const Params& params = {}) const;

    // Mixed Ricci traces with a temporal first argument, R_{aj} and
    // R_{a(j,b)}. They are assembled from the same derivative pattern as the
    // other blocks and vanish identically because the temporal connection
    // row has no spatial or vertical coefficients; exposing them lets the
    // reduction be asserted rather than assumed.
    DTensor mixed_ricci_ts_at(const JetPoint& pt, const Params& params = {}) const;
    DTensor mixed_ricci_tv_at(const JetPoint& pt, const Params& params = {}) const;

    // Componentwise difference between the (S,V) and (V,S) mixed P blocks.
    // The block forms treat them as equal; that holds exactly when sigma has
    // no fibre dependence and is measured, not assumed, otherwise.
    double mixed_p_asymmetry_at(const JetPoint& pt, const Params& params = {}) const;

    ScalarParts scalar_parts_trace_at(const JetPoint& pt, const Params& params = {}) const;
    ScalarParts scalar_parts_closed_at(const JetPoint& pt, const Params& params = {}) const;

    // Correction tensor of the spatial field-equation row, and the
    // one-coefficient variants (see RicciVariantFields).
    DTensor rho_at(const JetPoint& pt, const Params& params = {}) const;
    const RicciVariantFields& ricci_variants() const { return var_; }

    // Stress blocks that satisfy the field equations exactly: each block is
    // the corresponding geometric left side divided by K.
    StressEnergy solve_stress_at(const JetPoint& pt, double K = 1.0,
                                 const Params& params = {}) const;
    EinsteinResiduals einstein_residuals_at(const JetPoint& pt, const StressEnergy& stress,
                                            const Params& params = {}) const;

    ConservationReport conservation_residuals_at(const JetPoint& pt, double K = 1.0,
                                                 const Params& params = {}) const;

    bool sigma_fibre_independent() const { return sigma_fibre_independent_; }

  private:
    void require_nondegenerate(const JetPoint& pt, const Params& params) const;
    RicciBlocks eval_ricci(const TensorField* blocks[7], const JetPoint& pt,
                           const Params& params) const;

    CartanGeometry cg_;

    // metric blocks
    TensorField g_tt_, g_ss_, g_vv_, g_tt_inv_, g_ss_inv_, g_vv_inv_;

    // Ricci blocks, trace path and closed path
    TensorField ric_tt_, ric_st_, ric_ss_, ric_vt_, ric_vs_, ric_sv_, ric_vv_;
    TensorField ric_st_clo_, ric_ss_clo_, ric_vt_clo_, ric_vs_clo_, ric_sv_clo_, ric_vv_clo_;
    TensorField mixed_ts_, mixed_tv_;

    // sigma traces
    Expr mean_ss_, mean_mean_;
    TensorField mean_sv_, mean_vv_;

    // scalar parts: closed forms and trace forms (H has a single form)
    Expr scalar_H_, scalar_R_clo_, scalar_S_clo_, scalar_R_tr_, scalar_S_tr_;

    // field-equation left sides and the rho correction
    TensorField rho_;
    TensorField e1_tt_, e1_ss_, e1_vv_;

    RicciVariantFields var_;

    // conservation machinery: stress blocks at K = 1, raised blocks, traces,
    // and every law term as a field
    TensorField st_tt_, st_ss_, st_vv_;          // Ttilde blocks, K = 1
    Expr st_trace_t_, st_trace_m_, st_trace_v_;  // Tt_T, Tt_M, Tt_v
    TensorField law1_div_, law1_grad_m_, law1_grad_v_, law1_rhs_st_, law1_rhs_vt_;
    TensorField law2_grad_t_, law2_div_, law2_grad_v_, law2_rhs_;
    TensorField law3_grad_t_, law3_grad_m_, law3_div_, law3_rhs_;
    bool sigma_fibre_independent_ = false;
};

// All-zero stress blocks with the right shapes.
StressEnergy vacuum_stress(const Dims& dims, double K = 1.0);

}  // namespace jetfield
