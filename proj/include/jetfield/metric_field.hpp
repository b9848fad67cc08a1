#pragma once

#include <vector>

#include "jetfield/core.hpp"
#include "jetfield/dtensor.hpp"
#include "jetfield/expr.hpp"

namespace jetfield {

enum class VarFamily { Temporal, Spatial };

// Symbolic semi-Riemannian metric on one factor manifold: h_{ab}(t) over the
// temporal variables or phi_{ij}(x) over the spatial ones. All derived
// objects are precomputed in the constructor as shared expression DAGs:
//
//   inverse      g^{ab} by adjugate / determinant
//   christoffel  G^a_{bc} = g^{am}(d_b g_{mc} + d_c g_{mb} - d_m g_{bc})/2
//   riemann      r^a_{bcd} = d_d G^a_{bc} - d_c G^a_{bd}
//                           + G^m_{bc} G^a_{md} - G^m_{bd} G^a_{mc}
//   ricci        r_{ab} = r^m_{abm}   (trace over the last lower slot)
//   scalar       g^{ab} r_{ab}
//
// The Ricci trace convention makes the unit 2-sphere scalar curvature +2.
class MetricField {
public:
    MetricField(Dims dims, VarFamily family,
                std::vector<std::vector<Expr>> components);

    const Dims& dims() const { return dims_; }
    VarFamily family() const { return family_; }
    int size() const { return size_; }

    const Expr& component(int a, int b) const;
    const Expr& inverse(int a, int b) const;
    const Expr& determinant() const { return det_; }
    const Expr& christoffel(int a, int b, int c) const;  // G^a_{bc}
    const Expr& riemann(int a, int b, int c, int d) const;  // r^a_{bcd}
    const Expr& ricci(int a, int b) const;  // r_{ab}
    const Expr& scalar() const { return scalar_; }

    double degeneracy_threshold() const { return threshold_; }
    void set_degeneracy_threshold(double v) { threshold_ = v; }

    // Throws DegenerateMetricError when |det(g)| <= threshold at pt.
    void require_nondegenerate(const JetPoint& pt,
                               const Params& params = {}) const;

private:
    Dims dims_;
    VarFamily family_;
    int size_ = 0;
    double threshold_ = 1e-8;
    std::vector<Expr> g_;        // size^2
    std::vector<Expr> ginv_;     // size^2
    Expr det_;
    std::vector<Expr> gamma_;    // size^3
    std::vector<Expr> riem_;     // size^4
    std::vector<Expr> ric_;      // size^2
    Expr scalar_;

    int at2(int a, int b) const { return a * size_ + b; }
    int at3(int a, int b, int c) const { return (a * size_ + b) * size_ + c; }
    int at4(int a, int b, int c, int d) const {
        return ((a * size_ + b) * size_ + c) * size_ + d;
    }
};

// Determinant of a square matrix of expressions by cofactor expansion.
Expr matrix_determinant(const std::vector<std::vector<Expr>>& m);

// Numeric evaluation of the stored symbolic objects at a jet point. Every
// operation first checks nondegeneracy and throws DegenerateMetricError if
// |det| is at or below the metric's threshold.
DTensor metric_at(const MetricField& m, const JetPoint& pt,
                  const Params& params = {});
DTensor inverse_at(const MetricField& m, const JetPoint& pt,
                   const Params& params = {});
DTensor christoffel_at(const MetricField& m, const JetPoint& pt,
                       const Params& params = {});
DTensor riemann_at(const MetricField& m, const JetPoint& pt,
                   const Params& params = {});
DTensor ricci_at(const MetricField& m, const JetPoint& pt,
                 const Params& params = {});
double scalar_at(const MetricField& m, const JetPoint& pt,
                 const Params& params = {});

}  // namespace jetfield
