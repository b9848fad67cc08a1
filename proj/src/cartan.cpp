#include "jetfield/cartan.hpp"

#include <algorithm>
#include <cmath>
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

}  // namespace

CartanGeometry::CartanGeometry(JetSpace js) : js_(std::move(js)) {
    const Dims& d = js_.dims();
    const int p = d.p;
    const int n = d.n;
    const MetricField& h = js_.h();
    const MetricField& phi = js_.phi();
    const Expr zero = Expr::constant(0.0);
    const Expr half = Expr::constant(0.5);
    auto vp = [&](int i, int a) { return vpair_index(d, i, a); };

    // --- connection blocks ---------------------------------------------------
    std::vector<Expr> cH(static_cast<size_t>(p * p * p), zero);
    std::vector<Expr> cG(static_cast<size_t>(n * n * p), zero);
    std::vector<Expr> cL(static_cast<size_t>(n * n * n), zero);
    std::vector<Expr> cC(static_cast<size_t>(n * n * n * p), zero);
    for (int g = 0; g < p; ++g)
        for (int a = 0; a < p; ++a)
            for (int b = 0; b < p; ++b) cH[static_cast<size_t>((g * p + a) * p + b)] = h.christoffel(g, a, b);
    for (int k = 0; k < n; ++k)
        for (int j = 0; j < n; ++j)
            for (int g = 0; g < p; ++g)
                cG[static_cast<size_t>((k * n + j) * p + g)] = (k == j) ? js_.sigma_t(g) : zero;
    for (int k = 0; k < n; ++k)
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                cL[static_cast<size_t>((k * n + i) * n + j)] = phi.christoffel(k, i, j) + js_.lambda(k, i, j);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k)
                for (int g = 0; g < p; ++g) {
                    Expr e = zero;
                    if (i == j) e = e + js_.sigma_y(k, g);
                    if (i == k) e = e + js_.sigma_y(j, g);
                    e = e - phi.component(j, k) * js_.sigma_yup(i, g);
                    cC[static_cast<size_t>(((i * n + j) * n + k) * p + g)] = e;
                }
    cn_ = ConnectionBlocks(d, std::move(cH), std::move(cG), std::move(cL), std::move(cC));

    H_tf_ = TensorField(d, {TU, TL, TL});
    for (int g = 0; g < p; ++g)
        for (int a = 0; a < p; ++a)
            for (int b = 0; b < p; ++b) H_tf_.at({g, a, b}) = cn_.H(g, a, b);
    G_tf_ = TensorField(d, {SU, SL, TL});
    for (int k = 0; k < n; ++k)
        for (int j = 0; j < n; ++j)
            for (int g = 0; g < p; ++g) G_tf_.at({k, j, g}) = cn_.G(k, j, g);
    L_tf_ = TensorField(d, {SU, SL, SL});
    for (int k = 0; k < n; ++k)
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) L_tf_.at({k, i, j}) = cn_.L(k, i, j);
    C_tf_ = TensorField(d, {SU, SL, VL});
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k)
                for (int g = 0; g < p; ++g) C_tf_.at({i, j, vp(k, g)}) = cn_.C(i, j, k, g);

    // --- vertical metric block -----------------------------------------------
    vmetric_ = TensorField(d, {VL, VL});
    for (int i = 0; i < n; ++i)
        for (int a = 0; a < p; ++a)
            for (int j = 0; j < n; ++j)
                for (int b = 0; b < p; ++b)
                    vmetric_.at({vp(i, a), vp(j, b)}) =
                        h.inverse(a, b) * js_.e2sigma() * phi.component(i, j);

    // --- torsion families ----------------------------------------------------
    tor_.T = TensorField(d, {SU, TL, SL});
    for (int m = 0; m < n; ++m)
        for (int a = 0; a < p; ++a)
            for (int j = 0; j < n; ++j)
                if (m == j) tor_.T.at({m, a, j}) = -js_.sigma_t(a);

    tor_.P_s = TensorField(d, {SU, SL, VL});
    for (int m = 0; m < n; ++m)
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                for (int b = 0; b < p; ++b) tor_.P_s.at({m, i, vp(j, b)}) = cn_.C(m, i, j, b);

    tor_.P_vt = TensorField(d, {VU, TL, VL});
    for (int m = 0; m < n; ++m)
        for (int mu = 0; mu < p; ++mu)
            for (int a = 0; a < p; ++a)
                for (int j = 0; j < n; ++j)
                    for (int b = 0; b < p; ++b)
                        if (b == mu && m == j) tor_.P_vt.at({vp(m, mu), a, vp(j, b)}) = -js_.sigma_t(a);

    tor_.P_vs = TensorField(d, {VU, SL, VL});
    for (int m = 0; m < n; ++m)
        for (int mu = 0; mu < p; ++mu)
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j)
                    for (int b = 0; b < p; ++b)
                        if (b == mu) tor_.P_vs.at({vp(m, mu), i, vp(j, b)}) = -js_.lambda(m, i, j);

    tor_.S = TensorField(d, {VU, VL, VL});
    for (int m = 0; m < n; ++m)
        for (int mu = 0; mu < p; ++mu)
            for (int i = 0; i < n; ++i)
                for (int a = 0; a < p; ++a)
                    for (int j = 0; j < n; ++j)
                        for (int b = 0; b < p; ++b) {
                            Expr e = zero;
                            if (a == mu) e = e + cn_.C(m, i, j, b);
                            if (b == mu) e = e - cn_.C(m, i, j, a);
                            tor_.S.at({vp(m, mu), vp(i, a), vp(j, b)}) = e;
                        }

    tor_.R_tt = TensorField(d, {VU, TL, TL});
    for (int m = 0; m < n; ++m)
        for (int mu = 0; mu < p; ++mu)
            for (int a = 0; a < p; ++a)
                for (int b = 0; b < p; ++b) {
                    Expr e = zero;
                    for (int g = 0; g < p; ++g)
                        e = e - h.riemann(g, mu, a, b) * Expr::var(VarId::vertical(m, g));
                    tor_.R_tt.at({vp(m, mu), a, b}) = e;
                }

    tor_.R_ts = TensorField(d, {VU, TL, SL});  // identically zero

    tor_.R_ss = TensorField(d, {VU, SL, SL});
    for (int m = 0; m < n; ++m)
        for (int mu = 0; mu < p; ++mu)
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j) {
                    Expr e = zero;
                    for (int l = 0; l < n; ++l)
                        e = e + phi.riemann(m, l, i, j) * Expr::var(VarId::vertical(l, mu));
                    tor_.R_ss.at({vp(m, mu), i, j}) = e;
                }

    // --- sigma second derivatives ---------------------------------------------
    TensorField sigx_tf(d, {SL});
    for (int i = 0; i < n; ++i) sigx_tf.at({i}) = js_.sigma_x(i);
    TensorField sigy_tf(d, {VL});
    for (int k = 0; k < n; ++k)
        for (int g = 0; g < p; ++g) sigy_tf.at({vp(k, g)}) = js_.sigma_y(k, g);

    const TensorField sigx_B_T = berwald_covderiv(js_, sigx_tf, DerivKind::Temporal);
    const TensorField sigx_B_S = berwald_covderiv(js_, sigx_tf, DerivKind::Spatial);
    const TensorField sigx_B_V = berwald_covderiv(js_, sigx_tf, DerivKind::Vertical);
    const TensorField sigy_B_T = berwald_covderiv(js_, sigy_tf, DerivKind::Temporal);
    const TensorField sigy_B_S = berwald_covderiv(js_, sigy_tf, DerivKind::Spatial);
    const TensorField sigy_B_V = berwald_covderiv(js_, sigy_tf, DerivKind::Vertical);

    s2_.phi4 = TensorField(d, {SU, SU, SL, SL});
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k)
                for (int l = 0; l < n; ++l) {
                    Expr e = phi.inverse(i, j) * phi.component(k, l);
                    if (i == l && j == k) e = e - Expr::constant(1.0);
                    s2_.phi4.at({i, j, k, l}) = e;
                }

    Expr br_ss = zero;
    for (int r = 0; r < n; ++r) br_ss = br_ss + js_.sigma_x(r) * js_.sigma_xup(r);
    std::vector<Expr> br_ss_b(static_cast<size_t>(p), zero);
    for (int g = 0; g < p; ++g) {
        Expr e = zero;
        for (int r = 0; r < n; ++r) e = e + js_.sigma_x(r) * js_.sigma_yup(r, g);
        br_ss_b[static_cast<size_t>(g)] = e;
    }
    std::vector<Expr> br_ss_bg(static_cast<size_t>(p * p), zero);
    for (int b = 0; b < p; ++b)
        for (int g = 0; g < p; ++g) {
            Expr e = zero;
            for (int r = 0; r < n; ++r) e = e + js_.sigma_y(r, b) * js_.sigma_yup(r, g);
            br_ss_bg[static_cast<size_t>(b * p + g)] = e;
        }

    s2_.pair_ss = br_ss;
    s2_.pair_sv = TensorField(d, {TU});
    for (int b = 0; b < p; ++b) s2_.pair_sv.at({b}) = br_ss_b[static_cast<size_t>(b)];
    s2_.pair_vv = TensorField(d, {TU, TU});
    for (int b = 0; b < p; ++b)
        for (int g = 0; g < p; ++g) s2_.pair_vv.at({b, g}) = br_ss_bg[static_cast<size_t>(b * p + g)];

    s2_.ss = TensorField(d, {SL, SL});
    for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k)
            s2_.ss.at({j, k}) = sigx_B_S.at({j, k}) - js_.sigma_x(j) * js_.sigma_x(k) +
                                half * phi.component(j, k) * br_ss;

    s2_.sv = TensorField(d, {SL, VL});
    for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k)
            for (int g = 0; g < p; ++g)
                s2_.sv.at({j, vp(k, g)}) = sigx_B_V.at({j, vp(k, g)}) -
                                           js_.sigma_x(k) * js_.sigma_y(j, g) +
                                           half * phi.component(j, k) * br_ss_b[static_cast<size_t>(g)];

    s2_.vs = TensorField(d, {VL, SL});
    for (int j = 0; j < n; ++j)
        for (int b = 0; b < p; ++b)
            for (int k = 0; k < n; ++k)
                s2_.vs.at({vp(j, b), k}) = sigy_B_S.at({vp(j, b), k}) -
                                           js_.sigma_x(j) * js_.sigma_y(k, b) +
                                           half * phi.component(j, k) * br_ss_b[static_cast<size_t>(b)];

    s2_.vv = TensorField(d, {VL, VL});
    s2_.vv_swapped = TensorField(d, {VL, VL});
    for (int j = 0; j < n; ++j)
        for (int b = 0; b < p; ++b)
            for (int k = 0; k < n; ++k)
                for (int g = 0; g < p; ++g) {
                    const Expr core = sigy_B_V.at({vp(j, b), vp(k, g)}) +
                                      half * phi.component(j, k) *
                                          br_ss_bg[static_cast<size_t>(b * p + g)];
                    s2_.vv.at({vp(j, b), vp(k, g)}) = core - js_.sigma_y(j, b) * js_.sigma_y(k, g);
                    s2_.vv_swapped.at({vp(j, b), vp(k, g)}) =
                        core - js_.sigma_y(j, g) * js_.sigma_y(k, b);
                }

    // --- curvature, direct form ------------------------------------------------
    const TensorField lam_tf = [&] {
        TensorField f(d, {SU, SL, SL});
        for (int l = 0; l < n; ++l)
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j) f.at({l, i, j}) = js_.lambda(l, i, j);
        return f;
    }();
    const TensorField lam_B_S = berwald_covderiv(js_, lam_tf, DerivKind::Spatial);
    const TensorField lam_B_V = berwald_covderiv(js_, lam_tf, DerivKind::Vertical);
    const TensorField C_B_S = berwald_covderiv(js_, C_tf_, DerivKind::Spatial);
    const TensorField C_B_V = berwald_covderiv(js_, C_tf_, DerivKind::Vertical);

    cdir_.Ht = TensorField(d, {TU, TL, TL, TL});
    for (int a = 0; a < p; ++a)
        for (int e = 0; e < p; ++e)
            for (int b = 0; b < p; ++b)
                for (int g = 0; g < p; ++g) cdir_.Ht.at({a, e, b, g}) = h.riemann(a, e, b, g);

    cdir_.R_tt = TensorField(d, {SU, SL, TL, TL});
    for (int l = 0; l < n; ++l)
        for (int i = 0; i < n; ++i)
            for (int b = 0; b < p; ++b)
                for (int g = 0; g < p; ++g) {
                    Expr e = zero;
                    for (int m = 0; m < n; ++m)
                        for (int mu = 0; mu < p; ++mu) {
                            Expr w = cn_.C(l, i, m, mu);
                            if (l == i) w = w - js_.sigma_y(m, mu);
                            e = e + w * tor_.R_tt.at({vp(m, mu), b, g});
                        }
                    cdir_.R_tt.at({l, i, b, g}) = e;
                }

    cdir_.R_ts = TensorField(d, {SU, SL, TL, SL});
    for (int l = 0; l < n; ++l)
        for (int i = 0; i < n; ++i)
            for (int b = 0; b < p; ++b)
                for (int k = 0; k < n; ++k) {
                    Expr e = zero;
                    for (int m = 0; m < n; ++m) {
                        Expr w = phi.component(i, k) * phi.inverse(l, m);
                        if (l == k && m == i) w = w - Expr::constant(1.0);
                        e = e + w * sigx_B_T.at({m, b});
                    }
                    cdir_.R_ts.at({l, i, b, k}) = e;
                }

    cdir_.R_ss = TensorField(d, {SU, SL, SL, SL});
    for (int l = 0; l < n; ++l)
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                for (int k = 0; k < n; ++k) {
                    Expr e = phi.riemann(l, i, j, k) + lam_B_S.at({l, i, j, k}) -
                             lam_B_S.at({l, i, k, j});
                    for (int m = 0; m < n; ++m)
                        e = e + js_.lambda(m, i, j) * js_.lambda(l, m, k) -
                            js_.lambda(m, i, k) * js_.lambda(l, m, j);
                    for (int m = 0; m < n; ++m)
                        for (int mu = 0; mu < p; ++mu)
                            e = e + cn_.C(l, i, m, mu) * tor_.R_ss.at({vp(m, mu), j, k});
                    cdir_.R_ss.at({l, i, j, k}) = e;
                }

    cdir_.P_t = TensorField(d, {SU, SL, TL, VL});
    for (int l = 0; l < n; ++l)
        for (int i = 0; i < n; ++i)
            for (int b = 0; b < p; ++b)
                for (int k = 0; k < n; ++k)
                    for (int g = 0; g < p; ++g) {
                        Expr e = zero;
                        if (l == i) e = e + js_.dy(js_.sigma_t(b), k, g);
                        e = e - js_.dt(cn_.C(l, i, k, g), b);
                        for (int mu = 0; mu < p; ++mu)
                            e = e - cn_.C(l, i, k, mu) * h.christoffel(g, mu, b);
                        cdir_.P_t.at({l, i, b, vp(k, g)}) = e;
                    }

    cdir_.P_s = TensorField(d, {SU, SL, SL, VL});
    for (int l = 0; l < n; ++l)
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                for (int k = 0; k < n; ++k)
                    for (int g = 0; g < p; ++g) {
                        Expr e = lam_B_V.at({l, i, j, vp(k, g)}) - C_B_S.at({l, i, vp(k, g), j});
                        for (int m = 0; m < n; ++m)
                            e = e - js_.lambda(l, j, m) * cn_.C(m, i, k, g) +
                                js_.lambda(m, i, j) * cn_.C(l, m, k, g);
                        cdir_.P_s.at({l, i, j, vp(k, g)}) = e;
                    }

    cdir_.S = TensorField(d, {SU, SL, VL, VL});
    for (int l = 0; l < n; ++l)
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                for (int b = 0; b < p; ++b)
                    for (int k = 0; k < n; ++k)
                        for (int g = 0; g < p; ++g) {
                            Expr e = C_B_V.at({l, i, vp(j, b), vp(k, g)}) -
                                     C_B_V.at({l, i, vp(k, g), vp(j, b)});
                            for (int m = 0; m < n; ++m)
                                e = e + cn_.C(m, i, j, b) * cn_.C(l, m, k, g) -
                                    cn_.C(m, i, k, g) * cn_.C(l, m, j, b);
                            cdir_.S.at({l, i, vp(j, b), vp(k, g)}) = e;
                        }

    // --- curvature, closed form ------------------------------------------------
    cclo_.Ht = cdir_.Ht;

    cclo_.R_tt = TensorField(d, {SU, SL, TL, TL});
    for (int l = 0; l < n; ++l)
        for (int i = 0; i < n; ++i)
            for (int b = 0; b < p; ++b)
                for (int g = 0; g < p; ++g) {
                    Expr e = zero;
                    for (int m = 0; m < n; ++m)
                        for (int r = 0; r < n; ++r)
                            for (int ee = 0; ee < p; ++ee)
                                for (int mu = 0; mu < p; ++mu) {
                                    const Expr& hc = h.riemann(ee, mu, b, g);
                                    if (hc.is_zero()) continue;
                                    e = e + s2_.phi4.at({l, m, i, r}) * hc * js_.sigma_y(m, mu) *
                                            Expr::var(VarId::vertical(r, ee));
                                }
                    cclo_.R_tt.at({l, i, b, g}) = e;
                }

    cclo_.R_ts = TensorField(d, {SU, SL, TL, SL});
    for (int l = 0; l < n; ++l)
        for (int i = 0; i < n; ++i)
            for (int b = 0; b < p; ++b)
                for (int k = 0; k < n; ++k) {
                    Expr e = zero;
                    for (int m = 0; m < n; ++m)
                        e = e + s2_.phi4.at({l, m, i, k}) * sigx_B_T.at({m, b});
                    cclo_.R_ts.at({l, i, b, k}) = e;
                }

    cclo_.R_ss = TensorField(d, {SU, SL, SL, SL});
    for (int l = 0; l < n; ++l)
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                for (int k = 0; k < n; ++k) {
                    Expr e = phi.riemann(l, i, j, k);
                    if (l == j) e = e + s2_.ss.at({i, k});
                    if (l == k) e = e - s2_.ss.at({i, j});
                    for (int s = 0; s < n; ++s)
                        e = e + phi.inverse(l, s) * (phi.component(i, k) * s2_.ss.at({s, j}) -
                                                     phi.component(i, j) * s2_.ss.at({s, k}));
                    for (int m = 0; m < n; ++m)
                        for (int s = 0; s < n; ++s)
                            for (int q = 0; q < n; ++q) {
                                const Expr& rc = phi.riemann(s, q, j, k);
                                if (rc.is_zero()) continue;
                                for (int mu = 0; mu < p; ++mu)
                                    e = e - s2_.phi4.at({m, l, s, i}) * rc * js_.sigma_y(m, mu) *
                                            Expr::var(VarId::vertical(q, mu));
                            }
                    cclo_.R_ss.at({l, i, j, k}) = e;
                }

    cclo_.P_t = TensorField(d, {SU, SL, TL, VL});
    for (int l = 0; l < n; ++l)
        for (int i = 0; i < n; ++i)
            for (int b = 0; b < p; ++b)
                for (int k = 0; k < n; ++k)
                    for (int g = 0; g < p; ++g) {
                        Expr e = zero;
                        for (int m = 0; m < n; ++m)
                            e = e + s2_.phi4.at({l, m, i, k}) * sigy_B_T.at({vp(m, g), b});
                        cclo_.P_t.at({l, i, b, vp(k, g)}) = e;
                    }

    cclo_.P_s = TensorField(d, {SU, SL, SL, VL});
    for (int l = 0; l < n; ++l)
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                for (int k = 0; k < n; ++k)
                    for (int g = 0; g < p; ++g) {
                        Expr e = zero;
                        if (l == j) e = e + s2_.sv.at({i, vp(k, g)});
                        if (l == k) e = e - s2_.vs.at({vp(i, g), j});
                        for (int s = 0; s < n; ++s)
                            e = e - phi.inverse(l, s) *
                                    (phi.component(i, j) * s2_.sv.at({s, vp(k, g)}) -
                                     phi.component(i, k) * s2_.vs.at({vp(s, g), j}));
                        e = e + phi.component(j, k) *
                                (js_.sigma_xup(l) * js_.sigma_y(i, g) -
                                 js_.sigma_x(i) * js_.sigma_yup(l, g));
                        cclo_.P_s.at({l, i, j, vp(k, g)}) = e;
                    }

    // The vertical family closes over the swapped-pairing second derivative;
    // assemble once as a function of the ingredient so the diagnostic variant
    // below can reuse the same shape with the plain one.
    auto assemble_S = [&](const TensorField& t2) {
        TensorField f(d, {SU, SL, VL, VL});
        for (int l = 0; l < n; ++l)
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j)
                    for (int b = 0; b < p; ++b)
                        for (int k = 0; k < n; ++k)
                            for (int g = 0; g < p; ++g) {
                                Expr e = zero;
                                if (l == j) e = e + t2.at({vp(i, b), vp(k, g)});
                                if (l == k) e = e - t2.at({vp(i, g), vp(j, b)});
                                for (int s = 0; s < n; ++s)
                                    e = e - phi.inverse(l, s) *
                                            (phi.component(i, j) * t2.at({vp(s, b), vp(k, g)}) -
                                             phi.component(i, k) * t2.at({vp(s, g), vp(j, b)}));
                                e = e + phi.component(j, k) *
                                        (js_.sigma_yup(l, b) * js_.sigma_y(i, g) -
                                         js_.sigma_yup(l, g) * js_.sigma_y(i, b));
                                f.at({l, i, vp(j, b), vp(k, g)}) = e;
                            }
        return f;
    };
    cclo_.S = assemble_S(s2_.vv_swapped);

    // --- one-term diagnostic variants -------------------------------------------
    var_.R_tt_opposite_sign = TensorField(d, {SU, SL, TL, TL});
    for (int l = 0; l < n; ++l)
        for (int i = 0; i < n; ++i)
            for (int b = 0; b < p; ++b)
                for (int g = 0; g < p; ++g)
                    var_.R_tt_opposite_sign.at({l, i, b, g}) =
                        Expr::constant(-1.0) * cclo_.R_tt.at({l, i, b, g});

    var_.P_t_extra_term = TensorField(d, {SU, SL, TL, VL});
    for (int l = 0; l < n; ++l)
        for (int i = 0; i < n; ++i)
            for (int b = 0; b < p; ++b)
                for (int k = 0; k < n; ++k)
                    for (int g = 0; g < p; ++g) {
                        Expr e = cclo_.P_t.at({l, i, b, vp(k, g)});
                        if (l == i) e = e + js_.sigma_t(b) * js_.sigma_y(k, g);
                        var_.P_t_extra_term.at({l, i, b, vp(k, g)}) = e;
                    }

    var_.S_unswapped_pairing = assemble_S(s2_.vv);
}

void CartanGeometry::require_nondegenerate(const JetPoint& pt, const Params& params) const {
    js_.h().require_nondegenerate(pt, params);
    js_.phi().require_nondegenerate(pt, params);
}

CartanConnection CartanGeometry::connection_at(const JetPoint& pt, const Params& params) const {
    require_nondegenerate(pt, params);
    Evaluator ev(pt, js_.dims(), params);
    return CartanConnection{H_tf_.eval(ev), G_tf_.eval(ev), L_tf_.eval(ev), C_tf_.eval(ev)};
}

TorsionSet CartanGeometry::torsion_at(const JetPoint& pt, const Params& params) const {
    require_nondegenerate(pt, params);
    Evaluator ev(pt, js_.dims(), params);
    return TorsionSet{tor_.T.eval(ev),    tor_.P_s.eval(ev),  tor_.P_vt.eval(ev),
                      tor_.P_vs.eval(ev), tor_.S.eval(ev),    tor_.R_tt.eval(ev),
                      tor_.R_ts.eval(ev), tor_.R_ss.eval(ev)};
}

SigmaSecond CartanGeometry::sigma_second_at(const JetPoint& pt, const Params& params) const {
    require_nondegenerate(pt, params);
    Evaluator ev(pt, js_.dims(), params);
    SigmaSecond out;
    out.phi4 = s2_.phi4.eval(ev);
    out.ss = s2_.ss.eval(ev);
    out.sv = s2_.sv.eval(ev);
    out.vs = s2_.vs.eval(ev);
    out.vv = s2_.vv.eval(ev);
    out.vv_swapped = s2_.vv_swapped.eval(ev);
    out.pair_ss = ev.eval(s2_.pair_ss);
    out.pair_sv = s2_.pair_sv.eval(ev);
    out.pair_vv = s2_.pair_vv.eval(ev);
    return out;
}

namespace {
CurvatureSet eval_curvature(const CurvatureFields& f, Evaluator& ev) {
    return CurvatureSet{f.Ht.eval(ev),   f.R_tt.eval(ev), f.R_ts.eval(ev), f.R_ss.eval(ev),
                        f.P_t.eval(ev),  f.P_s.eval(ev),  f.S.eval(ev)};
}
}  // namespace

CurvatureSet CartanGeometry::curvature_direct_at(const JetPoint& pt, const Params& params) const {
    require_nondegenerate(pt, params);
    Evaluator ev(pt, js_.dims(), params);
    return eval_curvature(cdir_, ev);
}

CurvatureSet CartanGeometry::curvature_closed_at(const JetPoint& pt, const Params& params) const {
    require_nondegenerate(pt, params);
    Evaluator ev(pt, js_.dims(), params);
    return eval_curvature(cclo_, ev);
}

RicciIdentityReport CartanGeometry::ricci_identity_check(const JetPoint& pt,
                                                         const Params& params) const {
    const SigmaSecond s = sigma_second_at(pt, params);
    const Dims& d = js_.dims();
    const int p = d.p;
    const int n = d.n;
    const DTensor rc = riemann_at(js_.phi(), pt, params);
    const SigmaDerivs sd = sigma_derivs_at(js_, pt, params);
    auto vp = [&](int i, int a) { return vpair_index(d, i, a); };

    RicciIdentityReport rep;
    for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k) {
            double r = s.ss.at({j, k}) - s.ss.at({k, j});
            for (int m = 0; m < n; ++m)
                for (int l = 0; l < n; ++l)
                    for (int mu = 0; mu < p; ++mu)
                        r += rc.at({m, l, j, k}) * sd.sigma_y.at({vp(m, mu)}) *
                             pt.y[static_cast<size_t>(l)][static_cast<size_t>(mu)];
            rep.spatial_spatial = std::max(rep.spatial_spatial, std::abs(r));
        }
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int b = 0; b < p; ++b) {
                const double r = s.sv.at({i, vp(j, b)}) - s.vs.at({vp(j, b), i});
                rep.spatial_vertical = std::max(rep.spatial_vertical, std::abs(r));
            }
    for (int i = 0; i < n; ++i)
        for (int a = 0; a < p; ++a)
            for (int j = 0; j < n; ++j)
                for (int b = 0; b < p; ++b) {
                    const double r =
                        s.vv.at({vp(i, a), vp(j, b)}) - s.vv.at({vp(j, b), vp(i, a)});
                    rep.vertical_vertical = std::max(rep.vertical_vertical, std::abs(r));
                }
    return rep;
}

}  // namespace jetfield
