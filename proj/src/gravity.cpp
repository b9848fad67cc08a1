#include "jetfield/gravity.hpp"

#include <cmath>
#include <cstdlib>
#include <stdexcept>
#include <utility>
#include <vector>

namespace jetfield {

namespace {

constexpr IndexSlot TU{SlotKind::Temporal, Variance::Upper};
constexpr IndexSlot TL{SlotKind::Temporal, Variance::Lower};
constexpr IndexSlot SU{SlotKind::Spatial, Variance::Upper};
constexpr IndexSlot SL{SlotKind::Spatial, Variance::Lower};
constexpr IndexSlot VU{SlotKind::VerticalPair, Variance::Upper};
constexpr IndexSlot VL{SlotKind::VerticalPair, Variance::Lower};

bool advance(std::vector<int>& idx, const TensorField& t) {
    for (int s = static_cast<int>(idx.size()) - 1; s >= 0; --s) {
        if (++idx[static_cast<size_t>(s)] < t.extent(s)) {
            return true;
        }
        idx[static_cast<size_t>(s)] = 0;
    }
    return false;
}

// Trace of a field over two slots of the same kind and opposite variance;
// the traced slots are removed.
TensorField field_trace(const TensorField& T, int s1, int s2) {
    if (s1 > s2) std::swap(s1, s2);
    std::vector<IndexSlot> oslots;
    for (int s = 0; s < T.rank(); ++s) {
        if (s != s1 && s != s2) oslots.push_back(T.slots()[static_cast<size_t>(s)]);
    }
    TensorField out(T.dims(), std::move(oslots));
    const int ext = T.extent(s1);

    std::vector<int> oidx(static_cast<size_t>(out.rank()), 0);
    std::vector<int> idx(static_cast<size_t>(T.rank()), 0);
    do {
        int at = 0;
        for (int s = 0; s < T.rank(); ++s) {
            if (s != s1 && s != s2) idx[static_cast<size_t>(s)] = oidx[static_cast<size_t>(at++)];
        }
        Expr e = Expr::constant(0.0);
        for (int m = 0; m < ext; ++m) {
            idx[static_cast<size_t>(s1)] = m;
            idx[static_cast<size_t>(s2)] = m;
            e = e + T.at(idx);
        }
        out.at(oidx) = e;
    } while (advance(oidx, out));
    return out;
}

double inv_or_zero(int denom, bool& finite) {
    finite = denom != 0;
    return finite ? 1.0 / denom : 0.0;
}

}  // namespace

GravityModel::GravityModel(CartanGeometry cg) : cg_(std::move(cg)) {
    const JetSpace& js = cg_.space();
    const Dims& d = js.dims();
    const int p = d.p;
    const int n = d.n;
    const MetricField& h = js.h();
    const MetricField& phi = js.phi();
    const CurvatureFields& cf = cg_.curvature_direct_fields();
    const SigmaSecondFields& s2 = cg_.sigma_second_fields();
    const ConnectionBlocks& cn = cg_.connection();
    const Expr zero = Expr::constant(0.0);
    const Expr half = Expr::constant(0.5);
    auto vp = [&](int i, int a) { return vpair_index(d, i, a); };
    auto yvar = [](int m, int mu) { return Expr::var(VarId::vertical(m, mu)); };

    // --- metric blocks and inverses -------------------------------------------
    g_tt_ = TensorField(d, {TL, TL});
    g_tt_inv_ = TensorField(d, {TU, TU});
    for (int a = 0; a < p; ++a)
        for (int b = 0; b < p; ++b) {
            g_tt_.at({a, b}) = h.component(a, b);
            g_tt_inv_.at({a, b}) = h.inverse(a, b);
        }
    g_ss_ = TensorField(d, {SL, SL});
    g_ss_inv_ = TensorField(d, {SU, SU});
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            g_ss_.at({i, j}) = js.e2sigma() * phi.component(i, j);
            g_ss_inv_.at({i, j}) = js.em2sigma() * phi.inverse(i, j);
        }
    g_vv_ = cg_.vertical_metric_field();
    g_vv_inv_ = TensorField(d, {VU, VU});
    for (int i = 0; i < n; ++i)
        for (int a = 0; a < p; ++a)
            for (int j = 0; j < n; ++j)
                for (int b = 0; b < p; ++b)
                    g_vv_inv_.at({vp(i, a), vp(j, b)}) =
                        h.component(a, b) * js.em2sigma() * phi.inverse(i, j);

    // --- Ricci blocks, trace path: R_{AB} = R^D_{ABD} --------------------------
    ric_tt_ = TensorField(d, {TL, TL});
    for (int a = 0; a < p; ++a)
        for (int b = 0; b < p; ++b) {
            Expr e = zero;
            for (int m = 0; m < p; ++m) e = e + cf.Ht.at({m, a, b, m});
            ric_tt_.at({a, b}) = e;
        }
    ric_st_ = TensorField(d, {SL, TL});
    for (int i = 0; i < n; ++i)
        for (int b = 0; b < p; ++b) {
            Expr e = zero;
            for (int m = 0; m < n; ++m) e = e + cf.R_ts.at({m, i, b, m});
            ric_st_.at({i, b}) = e;
        }
    ric_ss_ = TensorField(d, {SL, SL});
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            Expr e = zero;
            for (int m = 0; m < n; ++m) e = e + cf.R_ss.at({m, i, j, m});
            ric_ss_.at({i, j}) = e;
        }
    ric_vt_ = TensorField(d, {VL, TL});
    for (int i = 0; i < n; ++i)
        for (int a = 0; a < p; ++a)
            for (int b = 0; b < p; ++b) {
                Expr e = zero;
                for (int m = 0; m < n; ++m) e = e + cf.P_t.at({m, i, b, vp(m, a)});
                ric_vt_.at({vp(i, a), b}) = e;
            }
    ric_vs_ = TensorField(d, {VL, SL});
    for (int i = 0; i < n; ++i)
        for (int a = 0; a < p; ++a)
            for (int j = 0; j < n; ++j) {
                Expr e = zero;
                for (int m = 0; m < n; ++m) e = e + cf.P_s.at({m, i, j, vp(m, a)});
                ric_vs_.at({vp(i, a), j}) = e;
            }
    ric_sv_ = TensorField(d, {SL, VL});
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int a = 0; a < p; ++a) {
                Expr e = zero;
                for (int m = 0; m < n; ++m) e = e - cf.P_s.at({m, i, m, vp(j, a)});
                ric_sv_.at({i, vp(j, a)}) = e;
            }
    ric_vv_ = TensorField(d, {VL, VL});
    for (int j = 0; j < n; ++j)
        for (int b = 0; b < p; ++b)
            for (int k = 0; k < n; ++k)
                for (int g = 0; g < p; ++g) {
                    Expr e = zero;
                    for (int m = 0; m < n; ++m) e = e + cf.S.at({m, j, vp(k, g), vp(m, b)});
                    ric_vv_.at({vp(j, b), vp(k, g)}) = e;
                }

    // --- mixed traces with a temporal first argument ---------------------------
    // R_{aj} = -sum_u delta_j H^u_{au} and R_{a(j,b)} = -sum_u d H^u_{au}/dy^j_b:
    // the only curvature family with a temporal value pair lives over two
    // temporal derivative slots, so these traces reduce to stray derivatives
    // of H, which the engine differentiates to zero (h depends on t alone).
    mixed_ts_ = TensorField(d, {TL, SL});
    mixed_tv_ = TensorField(d, {TL, VL});
    for (int a = 0; a < p; ++a) {
        Expr tr = zero;
        for (int u = 0; u < p; ++u) tr = tr + cn.H(u, a, u);
        for (int j = 0; j < n; ++j) mixed_ts_.at({a, j}) = zero - js.dx(tr, j);
        for (int j = 0; j < n; ++j)
            for (int b = 0; b < p; ++b) mixed_tv_.at({a, vp(j, b)}) = zero - js.dy(tr, j, b);
    }

    // --- sigma traces -----------------------------------------------------------
    mean_ss_ = zero;
    for (int r = 0; r < n; ++r)
        for (int s = 0; s < n; ++s) mean_ss_ = mean_ss_ + phi.inverse(r, s) * s2.ss.at({r, s});
    mean_sv_ = TensorField(d, {TU});
    for (int a = 0; a < p; ++a) {
        Expr e = zero;
        for (int r = 0; r < n; ++r)
            for (int s = 0; s < n; ++s) e = e + phi.inverse(r, s) * s2.sv.at({r, vp(s, a)});
        mean_sv_.at({a}) = e;
    }
    mean_vv_ = TensorField(d, {TU, TU});
    for (int a = 0; a < p; ++a)
        for (int b = 0; b < p; ++b) {
            Expr e = zero;
            for (int r = 0; r < n; ++r)
                for (int s = 0; s < n; ++s)
                    e = e + phi.inverse(r, s) * s2.vv.at({vp(r, a), vp(s, b)});
            mean_vv_.at({a, b}) = e;
        }
    mean_mean_ = zero;
    for (int a = 0; a < p; ++a)
        for (int b = 0; b < p; ++b)
            mean_mean_ = mean_mean_ + h.component(a, b) * mean_vv_.at({a, b});

    // --- Ricci blocks, closed path ----------------------------------------------
    const Expr cn1 = Expr::constant(1.0 - n);
    const Expr cn2 = Expr::constant(2.0 - n);

    TensorField sigx_tf(d, {SL});
    for (int i = 0; i < n; ++i) sigx_tf.at({i}) = js.sigma_x(i);
    TensorField sigy_tf(d, {VL});
    for (int i = 0; i < n; ++i)
        for (int a = 0; a < p; ++a) sigy_tf.at({vp(i, a)}) = js.sigma_y(i, a);
    const TensorField sigx_B_T = berwald_covderiv(js, sigx_tf, DerivKind::Temporal);
    const TensorField sigy_B_T = berwald_covderiv(js, sigy_tf, DerivKind::Temporal);

    ric_st_clo_ = TensorField(d, {SL, TL});
    for (int i = 0; i < n; ++i)
        for (int b = 0; b < p; ++b) ric_st_clo_.at({i, b}) = cn1 * sigx_B_T.at({i, b});

    ric_ss_clo_ = TensorField(d, {SL, SL});
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            Expr e = phi.ricci(i, j) + cn2 * s2.ss.at({i, j}) - phi.component(i, j) * mean_ss_;
            for (int m = 0; m < n; ++m)
                for (int mu = 0; mu < p; ++mu)
                    e = e + phi.ricci(m, j) * js.sigma_y(i, mu) * yvar(m, mu);
            for (int s = 0; s < n; ++s)
                for (int m = 0; m < n; ++m)
                    for (int q = 0; q < n; ++q) {
                        const Expr& rc = phi.riemann(s, m, j, q);
                        if (rc.is_zero()) continue;
                        for (int mu = 0; mu < p; ++mu)
                            e = e - phi.component(i, s) * rc * js.sigma_yup(q, mu) * yvar(m, mu);
                    }
            ric_ss_clo_.at({i, j}) = e;
        }

    ric_vt_clo_ = TensorField(d, {VL, TL});
    var_.vt_gradient_product = TensorField(d, {VL, TL});
    for (int i = 0; i < n; ++i)
        for (int a = 0; a < p; ++a)
            for (int b = 0; b < p; ++b) {
                const Expr e = cn1 * sigy_B_T.at({vp(i, a), b});
                ric_vt_clo_.at({vp(i, a), b}) = e;
                var_.vt_gradient_product.at({vp(i, a), b}) =
                    e + js.sigma_y(i, a) * js.sigma_t(b);
            }

    ric_vs_clo_ = TensorField(d, {VL, SL});
    ric_sv_clo_ = TensorField(d, {SL, VL});
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int a = 0; a < p; ++a) {
                const Expr mixed = s2.sv.at({i, vp(j, a)});
                const Expr mixedT = s2.vs.at({vp(i, a), j});
                const Expr tracepart = phi.component(i, j) * mean_sv_.at({a});
                const Expr grad = js.sigma_x(j) * js.sigma_y(i, a) -
                                  js.sigma_x(i) * js.sigma_y(j, a);
                ric_vs_clo_.at({vp(i, a), j}) = mixed + cn1 * mixedT - tracepart + grad;
                ric_sv_clo_.at({i, vp(j, a)}) = cn1 * mixed + mixedT - tracepart - grad;
            }

    ric_vv_clo_ = TensorField(d, {VL, VL});
    var_.vv_unit_quadratic = TensorField(d, {VL, VL});
    for (int j = 0; j < n; ++j)
        for (int b = 0; b < p; ++b)
            for (int k = 0; k < n; ++k)
                for (int g = 0; g < p; ++g) {
                    const Expr base = cn1 * s2.vv.at({vp(j, b), vp(k, g)}) +
                                      s2.vv.at({vp(j, g), vp(k, b)}) -
                                      phi.component(j, k) * mean_vv_.at({b, g});
                    const Expr quad = js.sigma_y(j, b) * js.sigma_y(k, g) -
                                      js.sigma_y(k, b) * js.sigma_y(j, g);
                    ric_vv_clo_.at({vp(j, b), vp(k, g)}) = base + cn1 * quad;
                    var_.vv_unit_quadratic.at({vp(j, b), vp(k, g)}) = base + quad;
                }

    // --- scalar parts -------------------------------------------------------------
    scalar_H_ = zero;
    for (int a = 0; a < p; ++a)
        for (int b = 0; b < p; ++b) scalar_H_ = scalar_H_ + h.inverse(a, b) * ric_tt_.at({a, b});

    Expr spatial_trace = zero;  // phi^{ij} R_{ij}
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            spatial_trace = spatial_trace + phi.inverse(i, j) * ric_ss_.at({i, j});
    scalar_R_tr_ = js.em2sigma() * spatial_trace;

    Expr vertical_trace = zero;  // h_{ab} phi^{jk} S_{(j)(k)}^{(a)(b)}
    for (int a = 0; a < p; ++a)
        for (int b = 0; b < p; ++b)
            for (int j = 0; j < n; ++j)
                for (int k = 0; k < n; ++k)
                    vertical_trace = vertical_trace + h.component(a, b) * phi.inverse(j, k) *
                                                          ric_vv_.at({vp(j, a), vp(k, b)});
    scalar_S_tr_ = js.em2sigma() * vertical_trace;

    Expr fibre_ricci = zero;  // r_{ms} sigma^{s u} y^m_u
    for (int m = 0; m < n; ++m)
        for (int s = 0; s < n; ++s) {
            const Expr& rc = phi.ricci(m, s);
            if (rc.is_zero()) continue;
            for (int mu = 0; mu < p; ++mu)
                fibre_ricci = fibre_ricci + rc * js.sigma_yup(s, mu) * yvar(m, mu);
        }
    scalar_R_clo_ = js.em2sigma() *
                    (phi.scalar() + Expr::constant(2.0 * (1.0 - n)) * mean_ss_ +
                     Expr::constant(2.0) * fibre_ricci);
    scalar_S_clo_ = Expr::constant(2.0 * (1.0 - n)) * js.em2sigma() * mean_mean_;

    // --- rho correction and its coefficient variant -------------------------------
    rho_ = TensorField(d, {SL, SL});
    var_.rho_coefficients = TensorField(d, {SL, SL});
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            Expr e = cn2 * s2.ss.at({i, j}) +
                     Expr::constant(n - 2.0) * mean_ss_ * phi.component(i, j);
            Expr ev = cn2 * s2.ss.at({i, j}) -
                      Expr::constant(3.0 - 2.0 * n) * mean_ss_ * phi.component(i, j);
            for (int m = 0; m < n; ++m)
                for (int q = 0; q < n; ++q) {
                    Expr curv = zero;  // phi_{is} r^s_{mjq}
                    for (int s = 0; s < n; ++s)
                        curv = curv + phi.component(i, s) * phi.riemann(s, m, j, q);
                    const Expr riccis =
                        phi.ricci(m, q) * phi.component(i, j) - phi.ricci(m, j) * phi.component(i, q);
                    const Expr riccis_doubled =
                        Expr::constant(2.0) * phi.ricci(m, q) * phi.component(i, j) -
                        phi.ricci(m, j) * phi.component(i, q);
                    for (int mu = 0; mu < p; ++mu) {
                        const Expr fib = js.sigma_yup(q, mu) * yvar(m, mu);
                        e = e - (curv + riccis) * fib;
                        ev = ev - (curv + riccis_doubled) * fib;
                    }
                }
            rho_.at({i, j}) = e;
            var_.rho_coefficients.at({i, j}) = ev;
        }

    // --- field-equation left sides -------------------------------------------------
    e1_tt_ = TensorField(d, {TL, TL});
    for (int a = 0; a < p; ++a)
        for (int b = 0; b < p; ++b)
            e1_tt_.at({a, b}) = h.ricci(a, b) - half * h.scalar() * h.component(a, b);
    e1_ss_ = TensorField(d, {SL, SL});
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            e1_ss_.at({i, j}) =
                phi.ricci(i, j) - half * phi.scalar() * phi.component(i, j) + rho_.at({i, j});
    e1_vv_ = TensorField(d, {VL, VL});
    for (int j = 0; j < n; ++j)
        for (int b = 0; b < p; ++b)
            for (int k = 0; k < n; ++k)
                for (int g = 0; g < p; ++g)
                    e1_vv_.at({vp(j, b), vp(k, g)}) =
                        ric_vv_.at({vp(j, b), vp(k, g)}) +
                        Expr::constant(n - 1.0) * mean_mean_ * h.inverse(b, g) *
                            phi.component(j, k);

    // --- conservation machinery (stress blocks taken at K = 1) ----------------------
    // K Tt_{ab} = R_{ab} - (H/2) h_{ab}; the spatial and vertical analogues
    // subtract half of their own scalar part times their own metric block.
    st_tt_ = e1_tt_;
    st_ss_ = TensorField(d, {SL, SL});
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            st_ss_.at({i, j}) =
                ric_ss_.at({i, j}) - half * spatial_trace * phi.component(i, j);
    st_vv_ = TensorField(d, {VL, VL});
    for (int j = 0; j < n; ++j)
        for (int b = 0; b < p; ++b)
            for (int k = 0; k < n; ++k)
                for (int g = 0; g < p; ++g)
                    st_vv_.at({vp(j, b), vp(k, g)}) =
                        ric_vv_.at({vp(j, b), vp(k, g)}) -
                        half * vertical_trace * h.inverse(b, g) * phi.component(j, k);

    st_trace_t_ = zero;
    for (int a = 0; a < p; ++a)
        for (int b = 0; b < p; ++b)
            st_trace_t_ = st_trace_t_ + h.inverse(a, b) * st_tt_.at({a, b});
    st_trace_m_ = zero;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            st_trace_m_ = st_trace_m_ + js.em2sigma() * phi.inverse(i, j) * st_ss_.at({i, j});
    st_trace_v_ = zero;
    for (int a = 0; a < p; ++a)
        for (int b = 0; b < p; ++b)
            for (int j = 0; j < n; ++j)
                for (int k = 0; k < n; ++k)
                    st_trace_v_ = st_trace_v_ + h.component(a, b) * js.em2sigma() *
                                                    phi.inverse(j, k) *
                                                    st_vv_.at({vp(j, a), vp(k, b)});

    // Raised stress and Ricci blocks entering the divergences.
    TensorField tt_up(d, {TU, TL});
    for (int a = 0; a < p; ++a)
        for (int b = 0; b < p; ++b) {
            Expr e = zero;
            for (int u = 0; u < p; ++u) e = e + h.inverse(a, u) * st_tt_.at({u, b});
            tt_up.at({a, b}) = e;
        }
    TensorField ss_up(d, {SU, SL});
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            Expr e = zero;
            for (int m = 0; m < n; ++m)
                e = e + js.em2sigma() * phi.inverse(i, m) * st_ss_.at({m, j});
            ss_up.at({i, j}) = e;
        }
    TensorField vv_up(d, {VU, VL});
    for (int i = 0; i < n; ++i)
        for (int a = 0; a < p; ++a)
            for (int j = 0; j < n; ++j)
                for (int b = 0; b < p; ++b) {
                    Expr e = zero;
                    for (int m = 0; m < n; ++m)
                        for (int mu = 0; mu < p; ++mu)
                            e = e + h.component(a, mu) * js.em2sigma() * phi.inverse(m, i) *
                                    st_vv_.at({vp(m, mu), vp(j, b)});
                    vv_up.at({vp(i, a), vp(j, b)}) = e;
                }
    TensorField r_st_up(d, {SU, TL});
    for (int i = 0; i < n; ++i)
        for (int b = 0; b < p; ++b) {
            Expr e = zero;
            for (int m = 0; m < n; ++m)
                e = e + js.em2sigma() * phi.inverse(i, m) * ric_st_.at({m, b});
            r_st_up.at({i, b}) = e;
        }
    TensorField p_vt_up(d, {VU, TL});
    TensorField p_vs_up(d, {VU, SL});
    for (int i = 0; i < n; ++i)
        for (int a = 0; a < p; ++a) {
            for (int b = 0; b < p; ++b) {
                Expr e = zero;
                for (int m = 0; m < n; ++m)
                    for (int mu = 0; mu < p; ++mu)
                        e = e + js.em2sigma() * phi.inverse(i, m) * h.component(a, mu) *
                                ric_vt_.at({vp(m, mu), b});
                p_vt_up.at({vp(i, a), b}) = e;
            }
            for (int j = 0; j < n; ++j) {
                Expr e = zero;
                for (int m = 0; m < n; ++m)
                    for (int mu = 0; mu < p; ++mu)
                        e = e + js.em2sigma() * phi.inverse(i, m) * h.component(a, mu) *
                                ric_vs_.at({vp(m, mu), j});
                p_vs_up.at({vp(i, a), j}) = e;
            }
        }
    TensorField p_sv_up(d, {SU, VL});
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int b = 0; b < p; ++b) {
                Expr e = zero;
                for (int m = 0; m < n; ++m)
                    e = e + js.em2sigma() * phi.inverse(i, m) * ric_sv_.at({m, vp(j, b)});
                p_sv_up.at({i, vp(j, b)}) = e;
            }

    // Law terms: each divergence contracts the value slot of a covariant
    // derivative against the appended derivative slot.
    law1_div_ = field_trace(covderiv(js, cn, tt_up, DerivKind::Temporal), 0, 2);
    law1_grad_m_ =
        covderiv(js, cn, TensorField::scalar(d, st_trace_m_), DerivKind::Temporal);
    law1_grad_v_ =
        covderiv(js, cn, TensorField::scalar(d, st_trace_v_), DerivKind::Temporal);
    law1_rhs_st_ = field_trace(covderiv(js, cn, r_st_up, DerivKind::Spatial), 0, 2);
    law1_rhs_vt_ = field_trace(covderiv(js, cn, p_vt_up, DerivKind::Vertical), 0, 2);

    law2_grad_t_ = covderiv(js, cn, TensorField::scalar(d, st_trace_t_), DerivKind::Spatial);
    law2_div_ = field_trace(covderiv(js, cn, ss_up, DerivKind::Spatial), 0, 2);
    law2_grad_v_ = covderiv(js, cn, TensorField::scalar(d, st_trace_v_), DerivKind::Spatial);
    law2_rhs_ = field_trace(covderiv(js, cn, p_vs_up, DerivKind::Vertical), 0, 2);

    law3_grad_t_ = covderiv(js, cn, TensorField::scalar(d, st_trace_t_), DerivKind::Vertical);
    law3_grad_m_ = covderiv(js, cn, TensorField::scalar(d, st_trace_m_), DerivKind::Vertical);
    law3_div_ = field_trace(covderiv(js, cn, vv_up, DerivKind::Vertical), 0, 2);
    law3_rhs_ = field_trace(covderiv(js, cn, p_sv_up, DerivKind::Spatial), 0, 2);

    sigma_fibre_independent_ = true;
    for (int i = 0; i < n && sigma_fibre_independent_; ++i)
        for (int a = 0; a < p; ++a)
            if (!js.sigma_y(i, a).is_zero()) {
                sigma_fibre_independent_ = false;
                break;
            }
}

void GravityModel::require_nondegenerate(const JetPoint& pt, const Params& params) const {
    cg_.space().h().require_nondegenerate(pt, params);
    cg_.space().phi().require_nondegenerate(pt, params);
}

SasakiBlocks GravityModel::metric_blocks_at(const JetPoint& pt, const Params& params) const {
    require_nondegenerate(pt, params);
    Evaluator ev(pt, cg_.space().dims(), params);
    SasakiBlocks out;
    out.tt = g_tt_.eval(ev);
    out.ss = g_ss_.eval(ev);
    out.vv = g_vv_.eval(ev);
    out.tt_inv = g_tt_inv_.eval(ev);
    out.ss_inv = g_ss_inv_.eval(ev);
    out.vv_inv = g_vv_inv_.eval(ev);
    return out;
}

RicciBlocks GravityModel::eval_ricci(const TensorField* blocks[7], const JetPoint& pt,
                                     const Params& params) const {
    require_nondegenerate(pt, params);
    Evaluator ev(pt, cg_.space().dims(), params);
    RicciBlocks out;
    out.tt = blocks[0]->eval(ev);
    out.st = blocks[1]->eval(ev);
    out.ss = blocks[2]->eval(ev);
    out.vt = blocks[3]->eval(ev);
    out.vs = blocks[4]->eval(ev);
    out.sv = blocks[5]->eval(ev);
    out.vv = blocks[6]->eval(ev);
    out.mean_ss = ev.eval(mean_ss_);
    out.mean_sv = mean_sv_.eval(ev);
    out.mean_vv = mean_vv_.eval(ev);
    out.mean_mean = ev.eval(mean_mean_);
    return out;
}

RicciBlocks GravityModel::ricci_from_curvature_at(const JetPoint& pt,
                                                  const Params& params) const {
    const TensorField* blocks[7] = {&ric_tt_, &ric_st_, &ric_ss_, &ric_vt_,
                                    &ric_vs_, &ric_sv_, &ric_vv_};
    return eval_ricci(blocks, pt, params);
}

RicciBlocks GravityModel::ricci_closed_at(const JetPoint& pt, const Params& params) const {
    const TensorField* blocks[7] = {&ric_tt_,     &ric_st_clo_, &ric_ss_clo_, &ric_vt_clo_,
                                    &ric_vs_clo_, &ric_sv_clo_, &ric_vv_clo_};
    return eval_ricci(blocks, pt, params);
}

DTensor GravityModel::mixed_ricci_ts_at(const JetPoint& pt, const Params& params) const {
    return mixed_ts_.eval_at(pt, params);
}

DTensor GravityModel::mixed_ricci_tv_at(const JetPoint& pt, const Params& params) const {
    return mixed_tv_.eval_at(pt, params);
}

double GravityModel::mixed_p_asymmetry_at(const JetPoint& pt, const Params& params) const {
    require_nondegenerate(pt, params);
    Evaluator ev(pt, cg_.space().dims(), params);
    const DTensor sv = ric_sv_.eval(ev);
    const DTensor vs = ric_vs_.eval(ev);
    const Dims& d = cg_.space().dims();
    double worst = 0.0;
    for (int i = 0; i < d.n; ++i)
        for (int j = 0; j < d.n; ++j)
            for (int a = 0; a < d.p; ++a)
                worst = std::max(worst, std::abs(sv.at({i, vpair_index(d, j, a)}) -
                                                 vs.at({vpair_index(d, i, a), j})));
    return worst;
}

ScalarParts GravityModel::scalar_parts_trace_at(const JetPoint& pt,
                                                const Params& params) const {
    require_nondegenerate(pt, params);
    Evaluator ev(pt, cg_.space().dims(), params);
    ScalarParts out;
    out.H = ev.eval(scalar_H_);
    out.R = ev.eval(scalar_R_tr_);
    out.S = ev.eval(scalar_S_tr_);
    out.Sc = out.H + out.R + out.S;
    return out;
}

ScalarParts GravityModel::scalar_parts_closed_at(const JetPoint& pt,
                                                 const Params& params) const {
    require_nondegenerate(pt, params);
    Evaluator ev(pt, cg_.space().dims(), params);
    ScalarParts out;
    out.H = ev.eval(cg_.space().h().scalar());
    out.R = ev.eval(scalar_R_clo_);
    out.S = ev.eval(scalar_S_clo_);
    out.Sc = out.H + out.R + out.S;
    return out;
}

DTensor GravityModel::rho_at(const JetPoint& pt, const Params& params) const {
    require_nondegenerate(pt, params);
    return rho_.eval_at(pt, params);
}

StressEnergy GravityModel::solve_stress_at(const JetPoint& pt, double K,
                                           const Params& params) const {
    if (K == 0.0) throw std::invalid_argument("gravitational constant K must be nonzero");
    require_nondegenerate(pt, params);
    Evaluator ev(pt, cg_.space().dims(), params);
    const double H = ev.eval(scalar_H_);
    const double R = ev.eval(scalar_R_tr_);
    const double S = ev.eval(scalar_S_tr_);

    StressEnergy out;
    out.K = K;
    // Diagonal rows: K Ttilde = left side, then peel the Ttilde shift off.
    out.tt = add(scale(e1_tt_.eval(ev), 1.0 / K), scale(g_tt_.eval(ev), -(R + S) / (2.0 * K)));
    out.ss = add(scale(e1_ss_.eval(ev), 1.0 / K), scale(g_ss_.eval(ev), -(H + S) / (2.0 * K)));
    out.vv = add(scale(e1_vv_.eval(ev), 1.0 / K), scale(g_vv_.eval(ev), -(H + R) / (2.0 * K)));
    // Mixed rows carry no shift.
    out.st = scale(ric_st_.eval(ev), 1.0 / K);
    out.vt = scale(ric_vt_.eval(ev), 1.0 / K);
    out.vs = scale(ric_vs_.eval(ev), 1.0 / K);
    out.sv = scale(ric_sv_.eval(ev), 1.0 / K);
    const Dims& d = cg_.space().dims();
    out.ts = DTensor(d, {TL, SL});
    out.tv = DTensor(d, {TL, VL});
    return out;
}

EinsteinResiduals GravityModel::einstein_residuals_at(const JetPoint& pt,
                                                      const StressEnergy& stress,
                                                      const Params& params) const {
    const double K = stress.K;
    if (K == 0.0) throw std::invalid_argument("gravitational constant K must be nonzero");
    require_nondegenerate(pt, params);
    const Dims& d = cg_.space().dims();
    Evaluator ev(pt, d, params);
    const double H = ev.eval(scalar_H_);
    const double R = ev.eval(scalar_R_tr_);
    const double S = ev.eval(scalar_S_tr_);

    EinsteinResiduals out;
    out.outside_hypothesis = d.p <= 2 || d.n <= 2;

    const DTensor tt_shift = scale(g_tt_.eval(ev), (R + S) / (2.0 * K));
    const DTensor ss_shift = scale(g_ss_.eval(ev), (H + S) / (2.0 * K));
    const DTensor vv_shift = scale(g_vv_.eval(ev), (H + R) / (2.0 * K));
    out.temporal =
        max_abs_diff(e1_tt_.eval(ev), scale(add(stress.tt, tt_shift), K));
    out.spatial = max_abs_diff(e1_ss_.eval(ev), scale(add(stress.ss, ss_shift), K));
    out.vertical = max_abs_diff(e1_vv_.eval(ev), scale(add(stress.vv, vv_shift), K));

    out.mixed_st = max_abs_diff(ric_st_.eval(ev), scale(stress.st, K));
    out.mixed_vt = max_abs_diff(ric_vt_.eval(ev), scale(stress.vt, K));
    out.mixed_vs = max_abs_diff(ric_vs_.eval(ev), scale(stress.vs, K));
    out.mixed_sv = max_abs_diff(ric_sv_.eval(ev), scale(stress.sv, K));
    out.mixed_ts = stress.ts.rank() == 0 ? 0.0 : stress.ts.max_abs();
    out.mixed_tv = stress.tv.rank() == 0 ? 0.0 : stress.tv.max_abs();
    return out;
}

ConservationReport GravityModel::conservation_residuals_at(const JetPoint& pt, double K,
                                                           const Params& params) const {
    if (K == 0.0) throw std::invalid_argument("gravitational constant K must be nonzero");
    require_nondegenerate(pt, params);
    const Dims& d = cg_.space().dims();
    const int p = d.p;
    const int n = d.n;
    Evaluator ev(pt, d, params);

    ConservationReport out;
    out.outside_hypothesis = p <= 2 || n <= 2;
    if (out.outside_hypothesis) {
        out.hypothesis_note = "laws stated for p > 2 and n > 2";
        if (p == 2) out.hypothesis_note += "; p = 2 makes the 1/(2-p) coefficient singular";
        if (n == 2) out.hypothesis_note += "; n = 2 makes the 1/(2-n) coefficient singular";
        if (p * n == 2)
            out.hypothesis_note += "; p*n = 2 makes the 1/(2-p*n) coefficient singular";
    }

    bool fin_p = true, fin_n = true, fin_pn = true;
    const double c_p = inv_or_zero(2 - p, fin_p);
    const double c_n = inv_or_zero(2 - n, fin_n);
    const double c_pn = inv_or_zero(2 - p * n, fin_pn);
    const double invK = 1.0 / K;

    auto build_law = [](std::vector<ConservationTerm> terms) {
        ConservationLaw law;
        law.total_available = true;
        for (const ConservationTerm& t : terms) law.total_available &= t.prefactor_finite;
        if (law.total_available) {
            DTensor sum;
            bool first = true;
            for (const ConservationTerm& t : terms) {
                const DTensor scaled = scale(t.value, t.prefactor);
                sum = first ? scaled : add(sum, scaled);
                first = false;
            }
            law.residual = sum.max_abs();
        }
        law.terms = std::move(terms);
        return law;
    };

    out.temporal = build_law({
        {"temporal divergence of raised temporal stress block", invK, true, law1_div_.eval(ev)},
        {"temporal gradient of spatial stress trace", c_n * invK, fin_n, law1_grad_m_.eval(ev)},
        {"temporal gradient of vertical stress trace", c_pn * invK, fin_pn,
         law1_grad_v_.eval(ev)},
        {"spatial divergence of raised mixed spatial-temporal Ricci block", 1.0, true,
         law1_rhs_st_.eval(ev)},
        {"vertical divergence of raised mixed vertical-temporal Ricci block", 1.0, true,
         law1_rhs_vt_.eval(ev)},
    });
    out.spatial = build_law({
        {"spatial gradient of temporal stress trace", c_p * invK, fin_p, law2_grad_t_.eval(ev)},
        {"spatial divergence of raised spatial stress block", invK, true, law2_div_.eval(ev)},
        {"spatial gradient of vertical stress trace", c_pn * invK, fin_pn,
         law2_grad_v_.eval(ev)},
        {"vertical divergence of raised mixed vertical-spatial Ricci block", 1.0, true,
         law2_rhs_.eval(ev)},
    });
    out.vertical = build_law({
        {"vertical gradient of temporal stress trace", c_p * invK, fin_p, law3_grad_t_.eval(ev)},
        {"vertical gradient of spatial stress trace", c_n * invK, fin_n, law3_grad_m_.eval(ev)},
        {"vertical divergence of raised vertical stress block", invK, true, law3_div_.eval(ev)},
        {"spatial divergence of raised mixed spatial-vertical Ricci block", 1.0, true,
         law3_rhs_.eval(ev)},
    });

    out.simple_form_applicable = sigma_fibre_independent_;
    if (out.simple_form_applicable) {
        out.simple_temporal = out.temporal.terms[0].value.max_abs() * invK;
        out.simple_spatial = out.spatial.terms[1].value.max_abs() * invK;
        out.simple_vertical = out.vertical.terms[2].value.max_abs() * invK;
    }
    return out;
}

StressEnergy vacuum_stress(const Dims& dims, double K) {
    StressEnergy out;
    out.K = K;
    out.tt = DTensor(dims, {TL, TL});
    out.st = DTensor(dims, {SL, TL});
    out.ss = DTensor(dims, {SL, SL});
    out.vt = DTensor(dims, {VL, TL});
    out.vs = DTensor(dims, {VL, SL});
    out.sv = DTensor(dims, {SL, VL});
    out.vv = DTensor(dims, {VL, VL});
    out.ts = DTensor(dims, {TL, SL});
    out.tv = DTensor(dims, {TL, VL});
    return out;
}

}  // namespace jetfield
