#include "jetfield/jetgeom.hpp"

#include <stdexcept>
#include <utility>

namespace jetfield {

namespace {

size_t shape_size(const Dims& d, const std::vector<IndexSlot>& slots) {
    size_t total = 1;
    for (const auto& s : slots) {
        total *= static_cast<size_t>(slot_extent(d, s.kind));
    }
    return total;
}

// Odometer over a multi-index; returns false once all indices wrapped.
bool advance(std::vector<int>& idx, const TensorField& t) {
    for (int s = static_cast<int>(idx.size()) - 1; s >= 0; --s) {
        if (++idx[static_cast<size_t>(s)] < t.extent(s)) {
            return true;
        }
        idx[static_cast<size_t>(s)] = 0;
    }
    return false;
}

}  // namespace

// --- TensorField --------------------------------------------------------------

TensorField::TensorField(const Dims& dims, std::vector<IndexSlot> slots)
    : dims_(dims), slots_(std::move(slots)), comps_(shape_size(dims, slots_), Expr::constant(0.0)) {}

TensorField TensorField::scalar(const Dims& dims, Expr e) {
    TensorField t(dims, {});
    t.comps_[0] = std::move(e);
    return t;
}

size_t TensorField::offset(std::span<const int> idx) const {
    if (idx.size() != slots_.size()) {
        throw JetfieldError("tensor field index rank mismatch");
    }
    size_t off = 0;
    for (size_t s = 0; s < slots_.size(); ++s) {
        const int ext = slot_extent(dims_, slots_[s].kind);
        if (idx[s] < 0 || idx[s] >= ext) {
            throw JetfieldError("tensor field index out of range");
        }
        off = off * static_cast<size_t>(ext) + static_cast<size_t>(idx[s]);
    }
    return off;
}

const Expr& TensorField::at(std::span<const int> idx) const { return comps_[offset(idx)]; }
Expr& TensorField::at(std::span<const int> idx) { return comps_[offset(idx)]; }

DTensor TensorField::eval(Evaluator& ev) const {
    DTensor out(dims_, slots_);
    for (size_t k = 0; k < comps_.size(); ++k) {
        out.data()[k] = ev.eval(comps_[k]);
    }
    return out;
}

DTensor TensorField::eval_at(const JetPoint& pt, const Params& params) const {
    Evaluator ev(pt, dims_, params);
    return eval(ev);
}

// --- ConnectionBlocks ----------------------------------------------------------

ConnectionBlocks::ConnectionBlocks(const Dims& dims, std::vector<Expr> H, std::vector<Expr> G,
                                   std::vector<Expr> L, std::vector<Expr> C)
    : dims_(dims), H_(std::move(H)), G_(std::move(G)), L_(std::move(L)), C_(std::move(C)) {
    const size_t p = static_cast<size_t>(dims.p);
    const size_t n = static_cast<size_t>(dims.n);
    if (H_.size() != p * p * p || G_.size() != n * n * p || L_.size() != n * n * n ||
        C_.size() != n * n * n * p) {
        throw JetfieldError("connection block size mismatch");
    }
}

const Expr& ConnectionBlocks::H(int g, int a, int b) const {
    const int p = dims_.p;
    return H_[static_cast<size_t>((g * p + a) * p + b)];
}

const Expr& ConnectionBlocks::G(int k, int j, int g) const {
    const int n = dims_.n;
    const int p = dims_.p;
    return G_[static_cast<size_t>((k * n + j) * p + g)];
}

const Expr& ConnectionBlocks::L(int k, int i, int j) const {
    const int n = dims_.n;
    return L_[static_cast<size_t>((k * n + i) * n + j)];
}

const Expr& ConnectionBlocks::C(int i, int j, int k, int g) const {
    const int n = dims_.n;
    const int p = dims_.p;
    return C_[static_cast<size_t>(((i * n + j) * n + k) * p + g)];
}

// --- JetSpace ------------------------------------------------------------------

JetSpace::JetSpace(MetricField h, MetricField phi, Expr sigma)
    : h_(std::move(h)), phi_(std::move(phi)), sigma_(std::move(sigma)) {
    if (h_.family() != VarFamily::Temporal || phi_.family() != VarFamily::Spatial) {
        throw JetfieldError("jet space expects a temporal h and a spatial phi");
    }
    if (h_.dims() != phi_.dims()) {
        throw JetfieldError("jet space metrics disagree on dimensions");
    }
    dims_ = h_.dims();
    if (h_.size() != dims_.p || phi_.size() != dims_.n) {
        throw JetfieldError("metric sizes must match the jet dimensions");
    }
    const int p = dims_.p;
    const int n = dims_.n;
    if (!sigma_.valid()) {
        sigma_ = Expr::constant(0.0);
    }

    e2s_ = Expr::exp(2.0 * sigma_);
    em2s_ = Expr::exp(-2.0 * sigma_);

    // M^{(i)}_{(a)b} = -H^m_{ba} y^i_m ; N^{(i)}_{(a)j} = gamma^i_{jm} y^m_a.
    M_.resize(static_cast<size_t>(n * p * p), Expr::constant(0.0));
    for (int i = 0; i < n; ++i) {
        for (int a = 0; a < p; ++a) {
            for (int b = 0; b < p; ++b) {
                Expr s = Expr::constant(0.0);
                for (int m = 0; m < p; ++m) {
                    s = s - h_.christoffel(m, b, a) * Expr::var(VarId::vertical(i, m));
                }
                M_[static_cast<size_t>((i * p + a) * p + b)] = s;
            }
        }
    }
    N_.resize(static_cast<size_t>(n * p * n), Expr::constant(0.0));
    for (int i = 0; i < n; ++i) {
        for (int a = 0; a < p; ++a) {
            for (int j = 0; j < n; ++j) {
                Expr s = Expr::constant(0.0);
                for (int m = 0; m < n; ++m) {
                    s = s + phi_.christoffel(i, j, m) * Expr::var(VarId::vertical(m, a));
                }
                N_[static_cast<size_t>((i * p + a) * n + j)] = s;
            }
        }
    }

    // sigma first derivatives in the adapted frame.
    st_.resize(static_cast<size_t>(p));
    for (int a = 0; a < p; ++a) {
        st_[static_cast<size_t>(a)] = dt(sigma_, a);
    }
    sx_.resize(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) {
        sx_[static_cast<size_t>(i)] = dx(sigma_, i);
    }
    sy_.resize(static_cast<size_t>(n * p));
    for (int i = 0; i < n; ++i) {
        for (int a = 0; a < p; ++a) {
            sy_[static_cast<size_t>(i * p + a)] = sigma_.diff(VarId::vertical(i, a));
        }
    }
    sxu_.resize(static_cast<size_t>(n));
    syu_.resize(static_cast<size_t>(n * p));
    for (int i = 0; i < n; ++i) {
        Expr sx_up = Expr::constant(0.0);
        for (int m = 0; m < n; ++m) {
            sx_up = sx_up + phi_.inverse(i, m) * sx_[static_cast<size_t>(m)];
        }
        sxu_[static_cast<size_t>(i)] = sx_up;
        for (int a = 0; a < p; ++a) {
            Expr sy_up = Expr::constant(0.0);
            for (int m = 0; m < n; ++m) {
                sy_up = sy_up + phi_.inverse(i, m) * sy_[static_cast<size_t>(m * p + a)];
            }
            syu_[static_cast<size_t>(i * p + a)] = sy_up;
        }
    }

    // Lambda^k_{ij} = sigma_i d^k_j + sigma_j d^k_i - phi_{ij} sigma^k.
    lam_.resize(static_cast<size_t>(n * n * n), Expr::constant(0.0));
    for (int k = 0; k < n; ++k) {
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < n; ++j) {
                Expr s = Expr::constant(0.0);
                if (k == j) {
                    s = s + sx_[static_cast<size_t>(i)];
                }
                if (k == i) {
                    s = s + sx_[static_cast<size_t>(j)];
                }
                s = s - phi_.component(i, j) * sxu_[static_cast<size_t>(k)];
                lam_[static_cast<size_t>((k * n + i) * n + j)] = s;
            }
        }
    }

    // Berwald blocks (H, 0, gamma, 0).
    std::vector<Expr> bH(static_cast<size_t>(p * p * p));
    for (int g = 0; g < p; ++g) {
        for (int a = 0; a < p; ++a) {
            for (int b = 0; b < p; ++b) {
                bH[static_cast<size_t>((g * p + a) * p + b)] = h_.christoffel(g, a, b);
            }
        }
    }
    std::vector<Expr> bG(static_cast<size_t>(n * n * p), Expr::constant(0.0));
    std::vector<Expr> bL(static_cast<size_t>(n * n * n));
    for (int k = 0; k < n; ++k) {
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < n; ++j) {
                bL[static_cast<size_t>((k * n + i) * n + j)] = phi_.christoffel(k, i, j);
            }
        }
    }
    std::vector<Expr> bC(static_cast<size_t>(n * n * n * p), Expr::constant(0.0));
    berwald_ = ConnectionBlocks(dims_, std::move(bH), std::move(bG), std::move(bL), std::move(bC));
}

const Expr& JetSpace::M(int i, int a, int b) const {
    return M_[static_cast<size_t>((i * dims_.p + a) * dims_.p + b)];
}

const Expr& JetSpace::N(int i, int a, int j) const {
    return N_[static_cast<size_t>((i * dims_.p + a) * dims_.n + j)];
}

Expr JetSpace::dt(const Expr& e, int a) const {
    Expr r = e.diff(VarId::temporal(a));
    for (int j = 0; j < dims_.n; ++j) {
        for (int b = 0; b < dims_.p; ++b) {
            const Expr& m = M(j, b, a);
            if (m.is_zero()) {
                continue;
            }
            Expr de = e.diff(VarId::vertical(j, b));
            if (de.is_zero()) {
                continue;
            }
            r = r - m * de;
        }
    }
    return r;
}

Expr JetSpace::dx(const Expr& e, int i) const {
    Expr r = e.diff(VarId::spatial(i));
    for (int j = 0; j < dims_.n; ++j) {
        for (int b = 0; b < dims_.p; ++b) {
            const Expr& nn = N(j, b, i);
            if (nn.is_zero()) {
                continue;
            }
            Expr de = e.diff(VarId::vertical(j, b));
            if (de.is_zero()) {
                continue;
            }
            r = r - nn * de;
        }
    }
    return r;
}

Expr JetSpace::dy(const Expr& e, int i, int a) const { return e.diff(VarId::vertical(i, a)); }

Expr JetSpace::adapted(const Expr& e, VarId dir) const {
    switch (dir.kind) {
        case VarKind::Temporal: return dt(e, dir.i);
        case VarKind::Spatial: return dx(e, dir.i);
        case VarKind::Vertical: return dy(e, dir.i, dir.a);
        case VarKind::Param: break;
    }
    throw JetfieldError("adapted derivative direction must be a coordinate");
}

const Expr& JetSpace::sigma_t(int a) const { return st_[static_cast<size_t>(a)]; }
const Expr& JetSpace::sigma_x(int i) const { return sx_[static_cast<size_t>(i)]; }
const Expr& JetSpace::sigma_y(int i, int a) const { return sy_[static_cast<size_t>(i * dims_.p + a)]; }
const Expr& JetSpace::sigma_xup(int i) const { return sxu_[static_cast<size_t>(i)]; }
const Expr& JetSpace::sigma_yup(int i, int a) const {
    return syu_[static_cast<size_t>(i * dims_.p + a)];
}
const Expr& JetSpace::lambda(int k, int i, int j) const {
    const int n = dims_.n;
    return lam_[static_cast<size_t>((k * n + i) * n + j)];
}

// --- covariant derivative -------------------------------------------------------

TensorField covderiv(const JetSpace& js, const ConnectionBlocks& cn, const TensorField& T,
                     DerivKind kind) {
    const Dims& d = js.dims();
    const int p = d.p;
    const int n = d.n;

    const SlotKind nk = kind == DerivKind::Temporal
                            ? SlotKind::Temporal
                            : (kind == DerivKind::Spatial ? SlotKind::Spatial : SlotKind::VerticalPair);
    std::vector<IndexSlot> oslots = T.slots();
    oslots.push_back({nk, Variance::Lower});
    TensorField out(d, oslots);

    const int rank = T.rank();
    const int dext = slot_extent(d, nk);
    std::vector<int> idx(static_cast<size_t>(rank), 0);
    std::vector<int> sub(static_cast<size_t>(rank), 0);
    std::vector<int> oidx(static_cast<size_t>(rank + 1), 0);

    do {
        for (int dd = 0; dd < dext; ++dd) {
            // Directional derivative of the component itself.
            int kk = 0, gg = 0;
            Expr e;
            switch (kind) {
                case DerivKind::Temporal: e = js.dt(T.at(idx), dd); break;
                case DerivKind::Spatial: e = js.dx(T.at(idx), dd); break;
                case DerivKind::Vertical:
                    kk = dd / p;
                    gg = dd % p;
                    e = js.dy(T.at(idx), kk, gg);
                    break;
            }

            // One correction per slot; + for upper indices, - for lower.
            for (int sl = 0; sl < rank; ++sl) {
                const IndexSlot s = T.slots()[static_cast<size_t>(sl)];
                const int cur = idx[static_cast<size_t>(sl)];
                sub = idx;
                auto atsub = [&](int v) -> const Expr& {
                    sub[static_cast<size_t>(sl)] = v;
                    return T.at(sub);
                };
                const bool up = s.variance == Variance::Upper;

                if (kind == DerivKind::Temporal) {
                    const int g = dd;
                    if (s.kind == SlotKind::Temporal) {
                        for (int mu = 0; mu < p; ++mu) {
                            if (up) {
                                e = e + cn.H(cur, mu, g) * atsub(mu);
                            } else {
                                e = e - cn.H(mu, cur, g) * atsub(mu);
                            }
                        }
                    } else if (s.kind == SlotKind::Spatial) {
                        for (int m = 0; m < n; ++m) {
                            if (up) {
                                e = e + cn.G(cur, m, g) * atsub(m);
                            } else {
                                e = e - cn.G(m, cur, g) * atsub(m);
                            }
                        }
                    } else {
                        const int i = cur / p;
                        const int a = cur % p;
                        if (up) {  // components V^{(i)}_{(a)}: Latin up, Greek down
                            for (int m = 0; m < n; ++m) {
                                e = e + cn.G(i, m, g) * atsub(vpair_index(d, m, a));
                            }
                            for (int mu = 0; mu < p; ++mu) {
                                e = e - cn.H(mu, a, g) * atsub(vpair_index(d, i, mu));
                            }
                        } else {  // components W^{(a)}_{(i)}: Greek up, Latin down
                            for (int mu = 0; mu < p; ++mu) {
                                e = e + cn.H(a, mu, g) * atsub(vpair_index(d, i, mu));
                            }
                            for (int m = 0; m < n; ++m) {
                                e = e - cn.G(m, i, g) * atsub(vpair_index(d, m, a));
                            }
                        }
                    }
                } else if (kind == DerivKind::Spatial) {
                    const int k = dd;
                    if (s.kind == SlotKind::Spatial) {
                        for (int m = 0; m < n; ++m) {
                            if (up) {
                                e = e + cn.L(cur, m, k) * atsub(m);
                            } else {
                                e = e - cn.L(m, cur, k) * atsub(m);
                            }
                        }
                    } else if (s.kind == SlotKind::VerticalPair) {
                        const int i = cur / p;
                        const int a = cur % p;
                        for (int m = 0; m < n; ++m) {
                            if (up) {
                                e = e + cn.L(i, m, k) * atsub(vpair_index(d, m, a));
                            } else {
                                e = e - cn.L(m, i, k) * atsub(vpair_index(d, m, a));
                            }
                        }
                    }
                    // temporal slots: the spatial-temporal mixed block vanishes
                } else {
                    if (s.kind == SlotKind::Spatial) {
                        for (int m = 0; m < n; ++m) {
                            if (up) {
                                e = e + cn.C(cur, m, kk, gg) * atsub(m);
                            } else {
                                e = e - cn.C(m, cur, kk, gg) * atsub(m);
                            }
                        }
                    } else if (s.kind == SlotKind::VerticalPair) {
                        const int i = cur / p;
                        const int a = cur % p;
                        for (int m = 0; m < n; ++m) {
                            if (up) {
                                e = e + cn.C(i, m, kk, gg) * atsub(vpair_index(d, m, a));
                            } else {
                                e = e - cn.C(m, i, kk, gg) * atsub(vpair_index(d, m, a));
                            }
                        }
                    }
                    // temporal slots: the vertical-temporal mixed block vanishes
                }
            }

            for (int s = 0; s < rank; ++s) {
                oidx[static_cast<size_t>(s)] = idx[static_cast<size_t>(s)];
            }
            oidx[static_cast<size_t>(rank)] = dd;
            out.at(oidx) = e;
        }
    } while (advance(idx, T));

    return out;
}

TensorField berwald_covderiv(const JetSpace& js, const TensorField& T, DerivKind kind) {
    return covderiv(js, js.berwald(), T, kind);
}

// --- numeric facades -------------------------------------------------------------

NonlinearConnection::NonlinearConnection(const JetSpace& js) : js_(&js) {
    const Dims& d = js.dims();
    M_tf_ = TensorField(d, {{SlotKind::VerticalPair, Variance::Upper},
                            {SlotKind::Temporal, Variance::Lower}});
    N_tf_ = TensorField(d, {{SlotKind::VerticalPair, Variance::Upper},
                            {SlotKind::Spatial, Variance::Lower}});
    for (int i = 0; i < d.n; ++i) {
        for (int a = 0; a < d.p; ++a) {
            for (int b = 0; b < d.p; ++b) {
                M_tf_.at({vpair_index(d, i, a), b}) = js.M(i, a, b);
            }
            for (int j = 0; j < d.n; ++j) {
                N_tf_.at({vpair_index(d, i, a), j}) = js.N(i, a, j);
            }
        }
    }
}

DTensor NonlinearConnection::M_at(const JetPoint& pt, const Params& params) const {
    return M_tf_.eval_at(pt, params);
}

DTensor NonlinearConnection::N_at(const JetPoint& pt, const Params& params) const {
    return N_tf_.eval_at(pt, params);
}

SigmaDerivs sigma_derivs_at(const JetSpace& js, const JetPoint& pt, const Params& params) {
    const Dims& d = js.dims();
    js.phi().require_nondegenerate(pt, params);
    Evaluator ev(pt, d, params);

    SigmaDerivs out;
    out.sigma_t = DTensor(d, {{SlotKind::Temporal, Variance::Lower}});
    out.sigma_x = DTensor(d, {{SlotKind::Spatial, Variance::Lower}});
    out.sigma_y = DTensor(d, {{SlotKind::VerticalPair, Variance::Lower}});
    out.sigma_yup = DTensor(d, {{SlotKind::VerticalPair, Variance::Upper}});
    out.lambda = DTensor(d, {{SlotKind::Spatial, Variance::Upper},
                             {SlotKind::Spatial, Variance::Lower},
                             {SlotKind::Spatial, Variance::Lower}});

    for (int a = 0; a < d.p; ++a) {
        out.sigma_t.at({a}) = ev.eval(js.sigma_t(a));
    }
    for (int i = 0; i < d.n; ++i) {
        out.sigma_x.at({i}) = ev.eval(js.sigma_x(i));
        for (int a = 0; a < d.p; ++a) {
            out.sigma_y.at({vpair_index(d, i, a)}) = ev.eval(js.sigma_y(i, a));
            out.sigma_yup.at({vpair_index(d, i, a)}) = ev.eval(js.sigma_yup(i, a));
        }
        for (int j = 0; j < d.n; ++j) {
            for (int k = 0; k < d.n; ++k) {
                out.lambda.at({k, i, j}) = ev.eval(js.lambda(k, i, j));
            }
        }
    }
    return out;
}

double adapted_derivative_at(const JetSpace& js, const Expr& e, VarId dir, const JetPoint& pt,
                             const Params& params) {
    return js.adapted(e, dir).eval(pt, params);
}

}  // namespace jetfield
