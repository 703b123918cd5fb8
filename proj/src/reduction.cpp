#include "hhmmo/reduction.hpp"

#include "hhmmo/errors.hpp"

#include <cmath>

namespace hhmmo {

namespace {

constexpr double kDenomTol = 1e-12;

struct MuParts {
    double P, Pv, Pn, Pvn, Pnn;
    double Q, Qv, Qh;
    double R, Rv, Rh, Rn;
    double mu;
};

MuParts mu_parts(double v, double h, double n, const ModelParameters& p) {
    MuParts t{};
    const double n2 = n * n, n3 = n2 * n;
    t.P = p.Ibar - p.gbar_K * (v - p.E_K) * n2 * n2 - p.gbar_L * (v - p.E_L);
    t.Pv = -p.gbar_K * n2 * n2 - p.gbar_L;
    t.Pn = -4.0 * p.gbar_K * (v - p.E_K) * n3;
    t.Pvn = -4.0 * p.gbar_K * n3;
    t.Pnn = -12.0 * p.gbar_K * (v - p.E_K) * n2;
    t.Q = (v - p.E_Na) * h;
    t.Qv = h;
    t.Qh = v - p.E_Na;
    if (std::fabs(t.Q) < kDenomTol) fail(ErrorKind::DegenerateDenominator, "mu: (v - E_Na) h vanishes");
    t.R = t.P / t.Q;
    t.Rv = (t.Pv * t.Q - t.P * t.Qv) / (t.Q * t.Q);
    t.Rh = -t.P * t.Qh / (t.Q * t.Q);
    t.Rn = t.Pn / t.Q;
    t.mu = std::cbrt(t.R);
    return t;
}

}  // namespace

GraphEvaluation mu(double v, double h, double n, const ModelParameters& p) {
    const MuParts t = mu_parts(v, h, n, p);
    GraphEvaluation g;
    g.value = t.mu;
    g.negative_radicand = t.R < 0.0;
    const double d = 3.0 * t.mu * t.mu;
    if (d == 0.0) fail(ErrorKind::DegenerateDenominator, "mu: zero radicand, partials unbounded");
    g.partial_v = t.Rv / d;
    g.partial_h = t.Rh / d;
    g.partial_n = t.Rn / d;
    return g;
}

MuHessian mu_hessian(double v, double h, double n, const ModelParameters& p) {
    const MuParts t = mu_parts(v, h, n, p);
    const double Q = t.Q, Q2 = Q * Q, Q3 = Q2 * Q;
    const double Rvv = -2.0 * t.Pv * t.Qv / Q2 + 2.0 * t.P * t.Qv * t.Qv / Q3;
    const double Rvh = -t.Pv * t.Qh / Q2 - t.P / Q2 + 2.0 * t.P * t.Qh * t.Qv / Q3;
    const double Rvn = t.Pvn / Q - t.Pn * t.Qv / Q2;
    const double Rhh = 2.0 * t.P * t.Qh * t.Qh / Q3;
    const double Rhn = -t.Pn * t.Qh / Q2;
    const double Rnn = t.Pnn / Q;
    const double m2 = t.mu * t.mu;
    if (m2 == 0.0) fail(ErrorKind::DegenerateDenominator, "mu: zero radicand, partials unbounded");
    const double a = 1.0 / (3.0 * m2);
    const double b = 2.0 / (9.0 * m2 * m2 * t.mu);
    return {Rvv * a - b * t.Rv * t.Rv, Rvh * a - b * t.Rv * t.Rh, Rvn * a - b * t.Rv * t.Rn,
            Rhh * a - b * t.Rh * t.Rh, Rhn * a - b * t.Rh * t.Rn, Rnn * a - b * t.Rn * t.Rn};
}

GraphEvaluation nu(double v, double h, const ModelParameters& p) {
    const GateProfile m = gate_profile(GateKind::m, v, p);
    const double m3 = m.inf * m.inf * m.inf;
    const double D = p.gbar_K * (v - p.E_K);
    if (std::fabs(D) < kDenomTol) fail(ErrorKind::DegenerateDenominator, "nu: v at E_K");
    const double num = p.Ibar - (v - p.E_Na) * m3 * h - p.gbar_L * (v - p.E_L);
    const double R = num / D;
    if (R < 0.0) fail(ErrorKind::NegativeRadicand, "nu: slice misses the critical manifold");
    const double num_v = -m3 * h - 3.0 * (v - p.E_Na) * m.inf * m.inf * m.d_inf * h - p.gbar_L;
    const double Rv = (num_v * D - num * p.gbar_K) / (D * D);
    const double Rh = -(v - p.E_Na) * m3 / D;
    GraphEvaluation g;
    g.value = std::sqrt(std::sqrt(R));
    const double d = 4.0 * g.value * g.value * g.value;
    if (d == 0.0) fail(ErrorKind::DegenerateDenominator, "nu: zero radicand, partials unbounded");
    g.partial_v = Rv / d;
    g.partial_h = Rh / d;
    return g;
}

GraphEvaluation eta(double v, double n, const ModelParameters& p) {
    const GateProfile m = gate_profile(GateKind::m, v, p);
    const double m3 = m.inf * m.inf * m.inf;
    const double Q = (v - p.E_Na) * m3;
    if (std::fabs(Q) < kDenomTol) fail(ErrorKind::DegenerateDenominator, "eta: (v - E_Na) m_inf^3 vanishes");
    const double n2 = n * n;
    const double P = p.Ibar - p.gbar_K * (v - p.E_K) * n2 * n2 - p.gbar_L * (v - p.E_L);
    const double Pv = -p.gbar_K * n2 * n2 - p.gbar_L;
    const double Pn = -4.0 * p.gbar_K * (v - p.E_K) * n2 * n;
    const double Qv = m3 + 3.0 * (v - p.E_Na) * m.inf * m.inf * m.d_inf;
    GraphEvaluation g;
    g.value = P / Q;
    g.partial_v = (Pv * Q - P * Qv) / (Q * Q);
    g.partial_n = Pn / Q;
    return g;
}

CriticalResidual critical_residual(double v, double h, double n, const ModelParameters& p) {
    const GateProfile m = gate_profile(GateKind::m, v, p);
    const double x = m.inf, x2 = x * x, x3 = x2 * x;
    const double n2 = n * n;
    const double dv = v - p.E_Na;
    CriticalResidual w{};
    w.value = p.Ibar - dv * x3 * h - p.gbar_K * (v - p.E_K) * n2 * n2 - p.gbar_L * (v - p.E_L);
    w.d_v = -(x3 + 3.0 * dv * x2 * m.d_inf) * h - p.gbar_K * n2 * n2 - p.gbar_L;
    w.d_h = -dv * x3;
    w.d_n = -4.0 * p.gbar_K * (v - p.E_K) * n2 * n;
    w.d_vv = -(6.0 * x2 * m.d_inf + 6.0 * dv * x * m.d_inf * m.d_inf + 3.0 * dv * x2 * m.dd_inf) * h;
    return w;
}

ReducedState reduced_vector_field(const ReducedState& s, const ModelParameters& p) {
    const GraphEvaluation g = mu(s.v, s.h, s.n, p);
    if (std::fabs(g.partial_v) < kDenomTol) fail(ErrorKind::PartialVanishes, "reduced field: d mu / dv vanishes");
    const GateProfile m = gate_profile(GateKind::m, s.v, p);
    const double eh = p.epsilon_mid * p.delta_h * rhs_H(s.v, s.h, p);
    const double en = p.epsilon_mid * p.delta_n * rhs_N(s.v, s.n, p);
    const double U = (m.inf - g.value) / (m.t * g.partial_v) - eh * g.partial_h / g.partial_v -
                     en * g.partial_n / g.partial_v;
    return {U, eh, en};
}

Jacobian3 reduced_field_jacobian(const ReducedState& s, const ModelParameters& p) {
    const GraphEvaluation g = mu(s.v, s.h, s.n, p);
    if (std::fabs(g.partial_v) < kDenomTol) fail(ErrorKind::PartialVanishes, "reduced field: d mu / dv vanishes");
    const MuHessian H2 = mu_hessian(s.v, s.h, s.n, p);
    const GateProfile m = gate_profile(GateKind::m, s.v, p);
    const GateProfile gh = gate_profile(GateKind::h, s.v, p);
    const GateProfile gn = gate_profile(GateKind::n, s.v, p);

    const double mv = g.partial_v;
    const std::array<double, 3> mu_d{g.partial_v, g.partial_h, g.partial_n};
    const std::array<double, 3> mv_d{H2.vv, H2.vh, H2.vn};
    const std::array<double, 3> mh_d{H2.vh, H2.hh, H2.hn};
    const std::array<double, 3> mn_d{H2.vn, H2.hn, H2.nn};

    // Gating fields and their gradients.
    const double H = (gh.inf - s.h) / gh.t;
    const double N = (gn.inf - s.n) / gn.t;
    const std::array<double, 3> H_d{gh.d_inf / gh.t - (gh.inf - s.h) * gh.d_t / (gh.t * gh.t), -1.0 / gh.t, 0.0};
    const std::array<double, 3> N_d{gn.d_inf / gn.t - (gn.inf - s.n) * gn.d_t / (gn.t * gn.t), 0.0, -1.0 / gn.t};

    const double eh = p.epsilon_mid * p.delta_h;
    const double en = p.epsilon_mid * p.delta_n;
    const double A = m.inf - g.value;
    const double B = m.t * mv;

    Jacobian3 J{};
    for (int k = 0; k < 3; ++k) {
        const double A_k = (k == 0 ? m.d_inf : 0.0) - mu_d[k];
        const double B_k = (k == 0 ? m.d_t * mv : 0.0) + m.t * mv_d[k];
        const double ratio_h_k = mh_d[k] / mv - g.partial_h * mv_d[k] / (mv * mv);
        const double ratio_n_k = mn_d[k] / mv - g.partial_n * mv_d[k] / (mv * mv);
        J[0][k] = A_k / B - A * B_k / (B * B) - eh * (H_d[k] * g.partial_h / mv + H * ratio_h_k) -
                  en * (N_d[k] * g.partial_n / mv + N * ratio_n_k);
        J[1][k] = eh * H_d[k];
        J[2][k] = en * N_d[k];
    }
    return J;
}

double intermediate_flow_h(double v, double h, const ModelParameters& p) {
    const double n = nu(v, h, p).value;
    return critical_residual(v, h, n, p).d_n * rhs_N(v, n, p);
}

double intermediate_flow_n(double v, double n, const ModelParameters& p) {
    const double h = eta(v, n, p).value;
    return critical_residual(v, h, n, p).d_h * rhs_H(v, h, p);
}

double slow_flow_on_Mh(double v, const ModelParameters& p) {
    const GateProfile gn = gate_profile(GateKind::n, v, p);
    const double n = gn.inf;
    const double h = eta(v, n, p).value;
    const CriticalResidual w = critical_residual(v, h, n, p);
    const double den = w.d_v + w.d_n * gn.d_inf;
    if (std::fabs(den) < 1e-10) fail(ErrorKind::FoldSingularity, "slow flow on M_h: fold point");
    return w.d_v * w.d_h / den * rhs_H(v, h, p);
}

double slow_flow_on_Mn(double v, const ModelParameters& p) {
    const GateProfile gh = gate_profile(GateKind::h, v, p);
    const double h = gh.inf;
    const double n = nu(v, h, p).value;
    const CriticalResidual w = critical_residual(v, h, n, p);
    const double den = w.d_v + w.d_h * gh.d_inf;
    if (std::fabs(den) < 1e-10) fail(ErrorKind::FoldSingularity, "slow flow on M_n: fold point");
    return w.d_v * w.d_n / den * rhs_N(v, n, p);
}

std::array<double, 2> desingularized_flow_h(double v, double h, const ModelParameters& p) {
    const double n = nu(v, h, p).value;
    const CriticalResidual w = critical_residual(v, h, n, p);
    const double H = rhs_H(v, h, p), N = rhs_N(v, n, p);
    return {p.delta_h * w.d_h * H + p.delta_n * w.d_n * N, -p.delta_h * w.d_v * H};
}

std::array<double, 2> desingularized_flow_n(double v, double n, const ModelParameters& p) {
    const double h = eta(v, n, p).value;
    const CriticalResidual w = critical_residual(v, h, n, p);
    const double H = rhs_H(v, h, p), N = rhs_N(v, n, p);
    return {p.delta_h * w.d_h * H + p.delta_n * w.d_n * N, -p.delta_n * w.d_v * N};
}

}  // namespace hhmmo
