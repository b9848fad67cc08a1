#include "jetfield/metric_field.hpp"

#include <cmath>
#include <string>
#include <utility>

namespace jetfield {

namespace {

Expr minor_det(const std::vector<std::vector<Expr>>& m,
               const std::vector<int>& rows, const std::vector<int>& cols) {
    const std::size_t k = rows.size();
    if (k == 1) {
        return m[rows[0]][cols[0]];
    }
    std::vector<int> sub_rows(rows.begin() + 1, rows.end());
    Expr acc = Expr::constant(0.0);
    for (std::size_t j = 0; j < k; ++j) {
        std::vector<int> sub_cols;
        sub_cols.reserve(k - 1);
        for (std::size_t c = 0; c < k; ++c) {
            if (c != j) {
                sub_cols.push_back(cols[c]);
            }
        }
        Expr term = m[rows[0]][cols[j]] * minor_det(m, sub_rows, sub_cols);
        acc = (j % 2 == 0) ? acc + term : acc - term;
    }
    return acc;
}

Expr cofactor(const std::vector<std::vector<Expr>>& m, int size, int r,
              int c) {
    if (size == 1) {
        return Expr::constant(1.0);
    }
    std::vector<int> rows;
    std::vector<int> cols;
    for (int i = 0; i < size; ++i) {
        if (i != r) {
            rows.push_back(i);
        }
        if (i != c) {
            cols.push_back(i);
        }
    }
    Expr d = minor_det(m, rows, cols);
    return ((r + c) % 2 == 0) ? d : Expr::constant(0.0) - d;
}

}  // namespace

Expr matrix_determinant(const std::vector<std::vector<Expr>>& m) {
    const int k = static_cast<int>(m.size());
    if (k == 0) {
        throw JetfieldError("matrix_determinant: empty matrix");
    }
    for (const auto& row : m) {
        if (static_cast<int>(row.size()) != k) {
            throw JetfieldError("matrix_determinant: matrix is not square");
        }
    }
    std::vector<int> idx(k);
    for (int i = 0; i < k; ++i) {
        idx[i] = i;
    }
    return minor_det(m, idx, idx);
}

MetricField::MetricField(Dims dims, VarFamily family,
                         std::vector<std::vector<Expr>> components)
    : dims_(dims), family_(family) {
    validate_dims(dims_);
    size_ = (family_ == VarFamily::Temporal) ? dims_.p : dims_.n;
    if (static_cast<int>(components.size()) != size_) {
        throw JetfieldError("MetricField: component matrix must be " +
                            std::to_string(size_) + "x" +
                            std::to_string(size_));
    }
    for (const auto& row : components) {
        if (static_cast<int>(row.size()) != size_) {
            throw JetfieldError("MetricField: component matrix must be " +
                                std::to_string(size_) + "x" +
                                std::to_string(size_));
        }
        for (const auto& e : row) {
            if (!e.valid()) {
                throw JetfieldError("MetricField: empty component expression");
            }
        }
    }

    auto var = [&](int c) {
        return (family_ == VarFamily::Temporal) ? VarId::temporal(c)
                                                : VarId::spatial(c);
    };

    g_.reserve(size_ * size_);
    for (int a = 0; a < size_; ++a) {
        for (int b = 0; b < size_; ++b) {
            g_.push_back(components[a][b]);
        }
    }

    det_ = matrix_determinant(components);
    ginv_.reserve(size_ * size_);
    for (int a = 0; a < size_; ++a) {
        for (int b = 0; b < size_; ++b) {
            ginv_.push_back(cofactor(components, size_, b, a) / det_);
        }
    }

    gamma_.reserve(size_ * size_ * size_);
    for (int a = 0; a < size_; ++a) {
        for (int b = 0; b < size_; ++b) {
            for (int c = 0; c < size_; ++c) {
                Expr s = Expr::constant(0.0);
                for (int m = 0; m < size_; ++m) {
                    s = s + ginv_[at2(a, m)] *
                                (g_[at2(m, b)].diff(var(c)) +
                                 g_[at2(m, c)].diff(var(b)) -
                                 g_[at2(b, c)].diff(var(m)));
                }
                gamma_.push_back(s * Expr::constant(0.5));
            }
        }
    }

    riem_.reserve(size_ * size_ * size_ * size_);
    for (int a = 0; a < size_; ++a) {
        for (int b = 0; b < size_; ++b) {
            for (int c = 0; c < size_; ++c) {
                for (int d = 0; d < size_; ++d) {
                    Expr s = gamma_[at3(a, b, c)].diff(var(d)) -
                             gamma_[at3(a, b, d)].diff(var(c));
                    for (int m = 0; m < size_; ++m) {
                        s = s + gamma_[at3(m, b, c)] * gamma_[at3(a, m, d)] -
                            gamma_[at3(m, b, d)] * gamma_[at3(a, m, c)];
                    }
                    riem_.push_back(s);
                }
            }
        }
    }

    ric_.reserve(size_ * size_);
    for (int a = 0; a < size_; ++a) {
        for (int b = 0; b < size_; ++b) {
            Expr s = Expr::constant(0.0);
            for (int m = 0; m < size_; ++m) {
                s = s + riem_[at4(m, a, b, m)];
            }
            ric_.push_back(s);
        }
    }

    scalar_ = Expr::constant(0.0);
    for (int a = 0; a < size_; ++a) {
        for (int b = 0; b < size_; ++b) {
            scalar_ = scalar_ + ginv_[at2(a, b)] * ric_[at2(a, b)];
        }
    }
}

const Expr& MetricField::component(int a, int b) const {
    return g_.at(at2(a, b));
}

const Expr& MetricField::inverse(int a, int b) const {
    return ginv_.at(at2(a, b));
}

const Expr& MetricField::christoffel(int a, int b, int c) const {
    return gamma_.at(at3(a, b, c));
}

const Expr& MetricField::riemann(int a, int b, int c, int d) const {
    return riem_.at(at4(a, b, c, d));
}

const Expr& MetricField::ricci(int a, int b) const {
    return ric_.at(at2(a, b));
}

void MetricField::require_nondegenerate(const JetPoint& pt,
                                        const Params& params) const {
    Evaluator ev(pt, dims_, params);
    const double d = ev.eval(det_);
    if (!(std::fabs(d) > threshold_)) {
        throw DegenerateMetricError(
            "metric determinant " + std::to_string(d) +
            " is within the degeneracy threshold " +
            std::to_string(threshold_));
    }
}

namespace {

SlotKind slot_kind_of(const MetricField& m) {
    return (m.family() == VarFamily::Temporal) ? SlotKind::Temporal
                                               : SlotKind::Spatial;
}

}  // namespace

DTensor metric_at(const MetricField& m, const JetPoint& pt,
                  const Params& params) {
    m.require_nondegenerate(pt, params);
    const SlotKind k = slot_kind_of(m);
    DTensor out(m.dims(), {{k, Variance::Lower}, {k, Variance::Lower}});
    Evaluator ev(pt, m.dims(), params);
    for (int a = 0; a < m.size(); ++a) {
        for (int b = 0; b < m.size(); ++b) {
            out.at({a, b}) = ev.eval(m.component(a, b));
        }
    }
    return out;
}

DTensor inverse_at(const MetricField& m, const JetPoint& pt,
                   const Params& params) {
    m.require_nondegenerate(pt, params);
    const SlotKind k = slot_kind_of(m);
    DTensor out(m.dims(), {{k, Variance::Upper}, {k, Variance::Upper}});
    Evaluator ev(pt, m.dims(), params);
    for (int a = 0; a < m.size(); ++a) {
        for (int b = 0; b < m.size(); ++b) {
            out.at({a, b}) = ev.eval(m.inverse(a, b));
        }
    }
    return out;
}

DTensor christoffel_at(const MetricField& m, const JetPoint& pt,
                       const Params& params) {
    m.require_nondegenerate(pt, params);
    const SlotKind k = slot_kind_of(m);
    DTensor out(m.dims(), {{k, Variance::Upper},
                           {k, Variance::Lower},
                           {k, Variance::Lower}});
    Evaluator ev(pt, m.dims(), params);
    for (int a = 0; a < m.size(); ++a) {
        for (int b = 0; b < m.size(); ++b) {
            for (int c = 0; c < m.size(); ++c) {
                out.at({a, b, c}) = ev.eval(m.christoffel(a, b, c));
            }
        }
    }
    return out;
}

DTensor riemann_at(const MetricField& m, const JetPoint& pt,
                   const Params& params) {
    m.require_nondegenerate(pt, params);
    const SlotKind k = slot_kind_of(m);
    DTensor out(m.dims(), {{k, Variance::Upper},
                           {k, Variance::Lower},
                           {k, Variance::Lower},
                           {k, Variance::Lower}});
    Evaluator ev(pt, m.dims(), params);
    for (int a = 0; a < m.size(); ++a) {
        for (int b = 0; b < m.size(); ++b) {
            for (int c = 0; c < m.size(); ++c) {
                for (int d = 0; d < m.size(); ++d) {
                    out.at({a, b, c, d}) = ev.eval(m.riemann(a, b, c, d));
                }
            }
        }
    }
    return out;
}

DTensor ricci_at(const MetricField& m, const JetPoint& pt,
                 const Params& params) {
    m.require_nondegenerate(pt, params);
    const SlotKind k = slot_kind_of(m);
    DTensor out(m.dims(), {{k, Variance::Lower}, {k, Variance::Lower}});
    Evaluator ev(pt, m.dims(), params);
    for (int a = 0; a < m.size(); ++a) {
        for (int b = 0; b < m.size(); ++b) {
            out.at({a, b}) = ev.eval(m.ricci(a, b));
        }
    }
    return out;
}

double scalar_at(const MetricField& m, const JetPoint& pt,
                 const Params& params) {
    m.require_nondegenerate(pt, params);
    Evaluator ev(pt, m.dims(), params);
    return ev.eval(m.scalar());
}

}  // namespace jetfield
