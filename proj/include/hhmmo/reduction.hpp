#pragma once

#include "hhmmo/model_core.hpp"

#include <array>

namespace hhmmo {

struct ReducedState {
    double v, h, n;
};

struct GraphEvaluation {
    double value = 0.0;
    double partial_v = 0.0;
    double partial_h = 0.0;
    double partial_n = 0.0;
    bool negative_radicand = false;  // mu only: odd root of a negative radicand was taken
};

// Second partials of mu, used by the Jacobian of the reduced field.
struct MuHessian {
    double vv, vh, vn, hh, hn, nn;
};

GraphEvaluation mu(double v, double h, double n, const ModelParameters& p);
MuHessian mu_hessian(double v, double h, double n, const ModelParameters& p);
GraphEvaluation nu(double v, double h, const ModelParameters& p);
GraphEvaluation eta(double v, double n, const ModelParameters& p);

// W(v,h,n) = V(v, m_inf(v), h, n) and the partials that drive the fold geometry.
// d_v and d_vv differentiate through m_inf with h, n held fixed.
struct CriticalResidual {
    double value, d_v, d_h, d_n, d_vv;
};

CriticalResidual critical_residual(double v, double h, double n, const ModelParameters& p);

// Fast-time reduced field (U, eps delta_h H, eps delta_n N) with the O(gamma) term dropped.
ReducedState reduced_vector_field(const ReducedState& s, const ModelParameters& p);

// Rows: d(U, eps dh H, eps dn N); columns: d/dv, d/dh, d/dn.
using Jacobian3 = std::array<std::array<double, 3>, 3>;
Jacobian3 reduced_field_jacobian(const ReducedState& s, const ModelParameters& p);

double intermediate_flow_h(double v, double h, const ModelParameters& p);
double intermediate_flow_n(double v, double n, const ModelParameters& p);

double slow_flow_on_Mh(double v, const ModelParameters& p);
double slow_flow_on_Mn(double v, const ModelParameters& p);

// (v', h') on S^a at n = nu(v,h), and (v', n') at h = eta(v,n).
std::array<double, 2> desingularized_flow_h(double v, double h, const ModelParameters& p);
std::array<double, 2> desingularized_flow_n(double v, double n, const ModelParameters& p);

}  // namespace hhmmo
