#include "jetfield/electromag.hpp"

#include <algorithm>
#include <cmath>
#include <utility>
#include <vector>

namespace jetfield {

namespace {

constexpr IndexSlot TL{SlotKind::Temporal, Variance::Lower};
constexpr IndexSlot SL{SlotKind::Spatial, Variance::Lower};
constexpr IndexSlot VL{SlotKind::VerticalPair, Variance::Lower};

}  // namespace

ElectromagModel::ElectromagModel(CartanGeometry cg) : cg_(std::move(cg)) {
    const JetSpace& js = cg_.space();
    const Dims& d = js.dims();
    const int p = d.p;
    const int n = d.n;
    const MetricField& h = js.h();
    const MetricField& phi = js.phi();
    const ConnectionBlocks& cn = cg_.connection();
    const TensorField& tor_T = cg_.torsion_fields().T;
    const Expr zero = Expr::constant(0.0);
    const Expr two = Expr::constant(2.0);
    auto vp = [&](int i, int a) { return vpair_index(d, i, a); };
    auto yvar = [](int m, int mu) { return Expr::var(VarId::vertical(m, mu)); };

    // Lowered Liouville field x^{(a)}_{(i)} = e^{2 sigma} h^{am} phi_{is} y^s_m.
    x_tf_ = TensorField(d, {VL});
    for (int i = 0; i < n; ++i) {
        for (int a = 0; a < p; ++a) {
            Expr e = zero;
            for (int mu = 0; mu < p; ++mu) {
                for (int m = 0; m < n; ++m) {
                    e = e + h.inverse(a, mu) * phi.component(i, m) * yvar(m, mu);
                }
            }
            x_tf_.at({vp(i, a)}) = js.e2sigma() * e;
        }
    }

    // Deflections as Cartan covariant derivatives of the Liouville field.
    dbar_cov_ = covderiv(js, cn, x_tf_, DerivKind::Temporal);
    dsp_cov_ = covderiv(js, cn, x_tf_, DerivKind::Spatial);
    dv_cov_ = covderiv(js, cn, x_tf_, DerivKind::Vertical);

    // Closed forms. The orientation of the spatial one is fixed by the
    // covariant-derivative definition; the flipped assembly is kept as a
    // variant for the cross-check report.
    dbar_clo_ = TensorField(d, {VL, TL});
    for (int i = 0; i < n; ++i) {
        for (int a = 0; a < p; ++a) {
            for (int b = 0; b < p; ++b) {
                dbar_clo_.at({vp(i, a), b}) = x_tf_.at({vp(i, a)}) * js.sigma_t(b);
            }
        }
    }

    dsp_clo_ = TensorField(d, {VL, SL});
    var_.spatial_deflection_negated = TensorField(d, {VL, SL});
    for (int i = 0; i < n; ++i) {
        for (int a = 0; a < p; ++a) {
            for (int j = 0; j < n; ++j) {
                Expr e = zero;
                for (int mu = 0; mu < p; ++mu) {
                    for (int m = 0; m < n; ++m) {
                        e = e + h.inverse(a, mu) *
                                    (js.sigma_x(j) * phi.component(i, m) -
                                     js.sigma_x(i) * phi.component(j, m) +
                                     js.sigma_x(m) * phi.component(i, j)) *
                                    yvar(m, mu);
                    }
                }
                e = js.e2sigma() * e;
                dsp_clo_.at({vp(i, a), j}) = e;
                var_.spatial_deflection_negated.at({vp(i, a), j}) = zero - e;
            }
        }
    }

    dv_clo_ = TensorField(d, {VL, VL});
    for (int i = 0; i < n; ++i) {
        for (int a = 0; a < p; ++a) {
            for (int j = 0; j < n; ++j) {
                for (int b = 0; b < p; ++b) {
                    Expr e = zero;
                    for (int mu = 0; mu < p; ++mu) {
                        for (int m = 0; m < n; ++m) {
                            e = e + h.inverse(a, mu) *
                                        (js.sigma_y(j, b) * phi.component(i, m) -
                                         js.sigma_y(i, b) * phi.component(j, m) +
                                         js.sigma_y(m, b) * phi.component(i, j)) *
                                        yvar(m, mu);
                        }
                    }
                    dv_clo_.at({vp(i, a), vp(j, b)}) =
                        js.e2sigma() * (h.inverse(a, b) * phi.component(i, j)) + js.e2sigma() * e;
                }
            }
        }
    }

    // Electromagnetic components, closed forms:
    //   F = x_{(i)} sigma_j - x_{(j)} sigma_i
    //   f = x_{(i)} sigma^{(b)}_{(j)} - x_{(j)} sigma^{(b)}_{(i)}
    F_tf_ = TensorField(d, {VL, SL});
    var_.em_F_negated = TensorField(d, {VL, SL});
    for (int i = 0; i < n; ++i) {
        for (int a = 0; a < p; ++a) {
            for (int j = 0; j < n; ++j) {
                Expr e = x_tf_.at({vp(i, a)}) * js.sigma_x(j) -
                         x_tf_.at({vp(j, a)}) * js.sigma_x(i);
                F_tf_.at({vp(i, a), j}) = e;
                var_.em_F_negated.at({vp(i, a), j}) = zero - e;
            }
        }
    }
    f_tf_ = TensorField(d, {VL, VL});
    for (int i = 0; i < n; ++i) {
        for (int a = 0; a < p; ++a) {
            for (int j = 0; j < n; ++j) {
                for (int b = 0; b < p; ++b) {
                    f_tf_.at({vp(i, a), vp(j, b)}) =
                        x_tf_.at({vp(i, a)}) * js.sigma_y(j, b) -
                        x_tf_.at({vp(j, a)}) * js.sigma_y(i, b);
                }
            }
        }
    }

    // Deflection identity residual fields, built over the
    // covariant-derivative path so they genuinely tie it to the torsion and
    // to the vertical connection block.
    ident_t_ = TensorField(d, {VL, TL});
    for (int i = 0; i < n; ++i) {
        for (int a = 0; a < p; ++a) {
            for (int b = 0; b < p; ++b) {
                Expr e = dbar_cov_.at({vp(i, a), b});
                for (int m = 0; m < n; ++m) {
                    e = e - x_tf_.at({vp(m, a)}) * tor_T.at({m, b, i});
                }
                ident_t_.at({vp(i, a), b}) = e - two * x_tf_.at({vp(i, a)}) * js.sigma_t(b);
            }
        }
    }

    ident_v_ = TensorField(d, {VL, VL});
    for (int i = 0; i < n; ++i) {
        for (int a = 0; a < p; ++a) {
            for (int j = 0; j < n; ++j) {
                for (int b = 0; b < p; ++b) {
                    Expr e = dv_cov_.at({vp(i, a), vp(j, b)});
                    for (int m = 0; m < n; ++m) {
                        e = e + x_tf_.at({vp(m, a)}) * cn.C(m, i, j, b);
                    }
                    e = e - js.e2sigma() * (h.inverse(a, b) * phi.component(i, j));
                    ident_v_.at({vp(i, a), vp(j, b)}) =
                        e - two * x_tf_.at({vp(i, a)}) * js.sigma_y(j, b);
                }
            }
        }
    }

    // Covariant derivatives entering the field equations.
    F_T_ = covderiv(js, cn, F_tf_, DerivKind::Temporal);
    F_S_ = covderiv(js, cn, F_tf_, DerivKind::Spatial);
    F_V_ = covderiv(js, cn, F_tf_, DerivKind::Vertical);
    f_T_ = covderiv(js, cn, f_tf_, DerivKind::Temporal);
    f_S_ = covderiv(js, cn, f_tf_, DerivKind::Spatial);
    f_V_ = covderiv(js, cn, f_tf_, DerivKind::Vertical);

    TensorField sigt_tf(d, {TL});
    for (int b = 0; b < p; ++b) {
        sigt_tf.at({b}) = js.sigma_t(b);
    }
    sigt_S_ = covderiv(js, cn, sigt_tf, DerivKind::Spatial);

    TensorField sigy_tf(d, {VL});
    for (int k = 0; k < n; ++k) {
        for (int g = 0; g < p; ++g) {
            sigy_tf.at({vp(k, g)}) = js.sigma_y(k, g);
        }
    }
    sigy_T_ = covderiv(js, cn, sigy_tf, DerivKind::Temporal);

    // Curvature source of the spatial cycle equation:
    //   x_{(i)} r^s_{mjk} sigma^{(u)}_{(s)} y^m_u.
    m3_rhs_ = TensorField(d, {VL, SL, SL});
    for (int j = 0; j < n; ++j) {
        for (int k = 0; k < n; ++k) {
            Expr inner = zero;
            for (int s = 0; s < n; ++s) {
                for (int m = 0; m < n; ++m) {
                    const Expr& rc = phi.riemann(s, m, j, k);
                    if (rc.is_zero()) continue;
                    for (int mu = 0; mu < p; ++mu) {
                        inner = inner + rc * js.sigma_y(s, mu) * yvar(m, mu);
                    }
                }
            }
            for (int i = 0; i < n; ++i) {
                for (int a = 0; a < p; ++a) {
                    m3_rhs_.at({vp(i, a), j, k}) = x_tf_.at({vp(i, a)}) * inner;
                }
            }
        }
    }

    sigma_spatial_only_ = true;
    for (int b = 0; b < p; ++b) {
        if (!js.sigma_t(b).is_zero()) sigma_spatial_only_ = false;
    }
    for (int k = 0; k < n; ++k) {
        for (int g = 0; g < p; ++g) {
            if (!js.sigma_y(k, g).is_zero()) sigma_spatial_only_ = false;
        }
    }
}

void ElectromagModel::require_nondegenerate(const JetPoint& pt, const Params& params) const {
    cg_.space().h().require_nondegenerate(pt, params);
    cg_.space().phi().require_nondegenerate(pt, params);
}

DeflectionSet ElectromagModel::deflection_from_covd_at(const JetPoint& pt,
                                                       const Params& params) const {
    require_nondegenerate(pt, params);
    Evaluator ev(pt, cg_.space().dims(), params);
    DeflectionSet out;
    out.x = x_tf_.eval(ev);
    out.dbar = dbar_cov_.eval(ev);
    out.dsp = dsp_cov_.eval(ev);
    out.dv = dv_cov_.eval(ev);
    return out;
}

DeflectionSet ElectromagModel::deflection_closed_at(const JetPoint& pt,
                                                    const Params& params) const {
    require_nondegenerate(pt, params);
    Evaluator ev(pt, cg_.space().dims(), params);
    DeflectionSet out;
    out.x = x_tf_.eval(ev);
    out.dbar = dbar_clo_.eval(ev);
    out.dsp = dsp_clo_.eval(ev);
    out.dv = dv_clo_.eval(ev);
    return out;
}

EMForm ElectromagModel::em_form_from_deflection_at(const JetPoint& pt,
                                                   const Params& params) const {
    require_nondegenerate(pt, params);
    const Dims& d = cg_.space().dims();
    Evaluator ev(pt, d, params);
    const DTensor dsp = dsp_cov_.eval(ev);
    const DTensor dv = dv_cov_.eval(ev);
    auto vp = [&](int i, int a) { return vpair_index(d, i, a); };
    EMForm out;
    out.F = DTensor(d, {VL, SL});
    out.f = DTensor(d, {VL, VL});
    for (int i = 0; i < d.n; ++i) {
        for (int a = 0; a < d.p; ++a) {
            for (int j = 0; j < d.n; ++j) {
                out.F.at({vp(i, a), j}) =
                    0.5 * (dsp.at({vp(i, a), j}) - dsp.at({vp(j, a), i}));
                for (int b = 0; b < d.p; ++b) {
                    out.f.at({vp(i, a), vp(j, b)}) =
                        0.5 * (dv.at({vp(i, a), vp(j, b)}) - dv.at({vp(j, a), vp(i, b)}));
                }
            }
        }
    }
    return out;
}

EMForm ElectromagModel::em_form_closed_at(const JetPoint& pt, const Params& params) const {
    require_nondegenerate(pt, params);
    Evaluator ev(pt, cg_.space().dims(), params);
    EMForm out;
    out.F = F_tf_.eval(ev);
    out.f = f_tf_.eval(ev);
    return out;
}

double ElectromagModel::deflection_identity_temporal_at(const JetPoint& pt,
                                                        const Params& params) const {
    require_nondegenerate(pt, params);
    Evaluator ev(pt, cg_.space().dims(), params);
    return ident_t_.eval(ev).max_abs();
}

double ElectromagModel::deflection_identity_vertical_at(const JetPoint& pt,
                                                        const Params& params) const {
    require_nondegenerate(pt, params);
    Evaluator ev(pt, cg_.space().dims(), params);
    return ident_v_.eval(ev).max_abs();
}

MaxwellReport ElectromagModel::maxwell_at(const JetPoint& pt, const Params& params) const {
    require_nondegenerate(pt, params);
    const JetSpace& js = cg_.space();
    const Dims& d = js.dims();
    const int p = d.p;
    const int n = d.n;
    Evaluator ev(pt, d, params);
    auto vp = [&](int i, int a) { return vpair_index(d, i, a); };

    const DTensor x = x_tf_.eval(ev);
    const DTensor F = F_tf_.eval(ev);
    const DTensor f = f_tf_.eval(ev);
    const DTensor F_T = F_T_.eval(ev);
    const DTensor F_S = F_S_.eval(ev);
    const DTensor F_V = F_V_.eval(ev);
    const DTensor f_T = f_T_.eval(ev);
    const DTensor f_S = f_S_.eval(ev);
    const DTensor f_V = f_V_.eval(ev);
    const DTensor sigtS = sigt_S_.eval(ev);
    const DTensor sigyT = sigy_T_.eval(ev);
    const DTensor rhs3 = m3_rhs_.eval(ev);
    std::vector<double> st(static_cast<size_t>(p));
    for (int b = 0; b < p; ++b) {
        st[static_cast<size_t>(b)] = ev.eval(js.sigma_t(b));
    }

    MaxwellReport out;
    double v_redundant = 0.0;
    double v_doubled = 0.0;
    double v_flipped_source = 0.0;
    double v_minus_f = 0.0;

    for (int a = 0; a < p; ++a) {
        for (int i = 0; i < n; ++i) {
            for (int k = 0; k < n; ++k) {
                for (int b = 0; b < p; ++b) {
                    const double lhs = F_T.at({vp(i, a), k, b});
                    const double core = x.at({vp(i, a)}) * sigtS.at({b, k}) -
                                        x.at({vp(k, a)}) * sigtS.at({b, i});
                    out.temporal_F = std::max(out.temporal_F, std::abs(lhs - core));
                    v_redundant = std::max(
                        v_redundant,
                        std::abs(lhs - core -
                                 F.at({vp(i, a), k}) * st[static_cast<size_t>(b)]));
                }
            }
        }
    }

    for (int a = 0; a < p; ++a) {
        for (int g = 0; g < p; ++g) {
            for (int i = 0; i < n; ++i) {
                for (int k = 0; k < n; ++k) {
                    for (int b = 0; b < p; ++b) {
                        const double lhs = f_T.at({vp(i, a), vp(k, g), b});
                        const double fs =
                            f.at({vp(i, a), vp(k, g)}) * st[static_cast<size_t>(b)];
                        const double core = x.at({vp(i, a)}) * sigyT.at({vp(k, g), b}) -
                                            x.at({vp(k, a)}) * sigyT.at({vp(i, g), b});
                        out.temporal_f =
                            std::max(out.temporal_f, std::abs(lhs - fs - core));
                        v_doubled =
                            std::max(v_doubled, std::abs(lhs - 2.0 * fs - core));
                    }
                }
            }
        }
    }

    for (int a = 0; a < p; ++a) {
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < n; ++j) {
                for (int k = 0; k < n; ++k) {
                    double cl = 0.0;
                    double cr = 0.0;
                    int ii = i, jj = j, kk = k;
                    for (int c = 0; c < 3; ++c) {
                        cl += F_S.at({vp(ii, a), jj, kk});
                        cr += rhs3.at({vp(ii, a), jj, kk});
                        const int tmp = ii;
                        ii = jj;
                        jj = kk;
                        kk = tmp;
                    }
                    out.spatial_cycle_F = std::max(out.spatial_cycle_F, std::abs(cl + cr));
                    v_flipped_source = std::max(v_flipped_source, std::abs(cl - cr));
                }
            }
        }
    }

    for (int a = 0; a < p; ++a) {
        for (int g = 0; g < p; ++g) {
            for (int i = 0; i < n; ++i) {
                for (int j = 0; j < n; ++j) {
                    for (int k = 0; k < n; ++k) {
                        double sum_minus = 0.0;
                        double sum_plus = 0.0;
                        int ii = i, jj = j, kk = k;
                        for (int c = 0; c < 3; ++c) {
                            const double Fv = F_V.at({vp(ii, a), jj, vp(kk, g)});
                            const double fsp = f_S.at({vp(ii, a), vp(jj, g), kk});
                            sum_minus += Fv - fsp;
                            sum_plus += Fv + fsp;
                            const int tmp = ii;
                            ii = jj;
                            jj = kk;
                            kk = tmp;
                        }
                        out.mixed_cycle = std::max(out.mixed_cycle, std::abs(sum_plus));
                        v_minus_f = std::max(v_minus_f, std::abs(sum_minus));
                    }
                }
            }
        }
    }

    for (int a = 0; a < p; ++a) {
        for (int b = 0; b < p; ++b) {
            for (int g = 0; g < p; ++g) {
                for (int i = 0; i < n; ++i) {
                    for (int j = 0; j < n; ++j) {
                        for (int k = 0; k < n; ++k) {
                            double s = 0.0;
                            int ii = i, jj = j, kk = k;
                            for (int c = 0; c < 3; ++c) {
                                s += f_V.at({vp(ii, a), vp(jj, b), vp(kk, g)});
                                const int tmp = ii;
                                ii = jj;
                                jj = kk;
                                kk = tmp;
                            }
                            out.vertical_cycle_f =
                                std::max(out.vertical_cycle_f, std::abs(s));
                        }
                    }
                }
            }
        }
    }

    out.variants = {
        {"temporal F equation with a redundant F*sigma_t term", v_redundant},
        {"temporal f equation with the f*sigma_t coefficient doubled", v_doubled},
        {"spatial F cycle with the curvature source sign flipped", v_flipped_source},
        {"mixed cycle with the f term subtracted instead of added", v_minus_f},
    };

    out.reduced_applicable = sigma_spatial_only_;
    if (out.reduced_applicable) {
        out.reduced_temporal = F_T.max_abs();
        for (int a = 0; a < p; ++a) {
            for (int i = 0; i < n; ++i) {
                for (int j = 0; j < n; ++j) {
                    for (int k = 0; k < n; ++k) {
                        double cs = 0.0;
                        int ii = i, jj = j, kk = k;
                        for (int c = 0; c < 3; ++c) {
                            cs += F_S.at({vp(ii, a), jj, kk});
                            const int tmp = ii;
                            ii = jj;
                            jj = kk;
                            kk = tmp;
                        }
                        out.reduced_spatial_cycle =
                            std::max(out.reduced_spatial_cycle, std::abs(cs));
                        for (int g = 0; g < p; ++g) {
                            double cv = 0.0;
                            int i2 = i, j2 = j, k2 = k;
                            for (int c = 0; c < 3; ++c) {
                                cv += F_V.at({vp(i2, a), j2, vp(k2, g)});
                                const int tmp = i2;
                                i2 = j2;
                                j2 = k2;
                                k2 = tmp;
                            }
                            out.reduced_vertical_cycle =
                                std::max(out.reduced_vertical_cycle, std::abs(cv));
                        }
                    }
                }
            }
        }
    }

    return out;
}

}  // namespace jetfield
