#include "hhmmo/model_core.hpp"

#include <boost/math/tools/minima.hpp>

#include <cmath>
#include <limits>

namespace hhmmo {

namespace {

struct Rate {
    double f, d, dd;  // value and derivatives in mV
};

// s / (1 - exp(-s)) and its first two derivatives. Near s = 0 the closed forms
// cancel catastrophically, so the Bernoulli series takes over.
Rate exprel(double s) {
    Rate r{};
    const double a = std::fabs(s);
    if (a < 1e-4) {
        r.f = 1.0 + s / 2.0 + s * s / 12.0;
    } else {
        r.f = s / -std::expm1(-s);
    }
    if (a < 0.05) {
        const double s2 = s * s;
        r.d = 0.5 + s / 6.0 - s * s2 / 180.0 + s * s2 * s2 / 5040.0;
        r.dd = 1.0 / 6.0 - s2 / 60.0 + s2 * s2 / 1008.0;
    } else {
        const double e = std::exp(-s);
        const double dn = -std::expm1(-s);
        r.d = (dn - s * e) / (dn * dn);
        r.dd = e * (s * (1.0 + e) - 2.0 * dn) / (dn * dn * dn);
    }
    return r;
}

Rate exp_rate(double scale, double shift, double width, double V) {
    const double f = scale * std::exp(-(V + shift) / width);
    return {f, -f / width, f / (width * width)};
}

Rate alpha_rate(GateKind gate, double V) {
    switch (gate) {
        case GateKind::m: {
            const Rate g = exprel((V + 40.0) / 10.0);
            return {g.f, g.d / 10.0, g.dd / 100.0};
        }
        case GateKind::h:
            return exp_rate(0.07, 65.0, 20.0, V);
        case GateKind::n: {
            const Rate g = exprel((V + 55.0) / 10.0);
            return {0.1 * g.f, 0.01 * g.d, 0.001 * g.dd};
        }
    }
    return {};
}

Rate beta_rate(GateKind gate, double V) {
    switch (gate) {
        case GateKind::m:
            return exp_rate(4.0, 65.0, 18.0, V);
        case GateKind::h: {
            const double b = 1.0 / (1.0 + std::exp(-(V + 35.0) / 10.0));
            const double q = b * (1.0 - b);
            return {b, q / 10.0, q * (1.0 - 2.0 * b) / 100.0};
        }
        case GateKind::n:
            return exp_rate(0.125, 65.0, 80.0, V);
    }
    return {};
}

}  // namespace

double alpha(GateKind gate, double v_mV) { return alpha_rate(gate, v_mV).f; }
double beta(GateKind gate, double v_mV) { return beta_rate(gate, v_mV).f; }

double gate_inf(GateKind gate, double v_mV) {
    const double a = alpha(gate, v_mV);
    return a / (a + beta(gate, v_mV));
}

double t_hat(GateKind gate, double v_mV) { return 1.0 / (alpha(gate, v_mV) + beta(gate, v_mV)); }

TimescaleSearch timescale_search(GateKind gate, const ModelParameters& p, int grid_points) {
    const double lo = p.E_K, hi = p.E_Na;
    auto inv_t = [&](double v) { return 1.0 / t_hat(gate, p.k_v * v); };
    const double dv = (hi - lo) / (grid_points - 1);
    int best = 0;
    double best_val = -1.0;
    for (int i = 0; i < grid_points; ++i) {
        const double val = inv_t(lo + i * dv);
        if (val > best_val) {
            best_val = val;
            best = i;
        }
    }
    const double a = lo + std::max(0, best - 1) * dv;
    const double b = lo + std::min(grid_points - 1, best + 1) * dv;
    auto neg = [&](double v) { return -inv_t(v); };
    const auto [v_star, f_star] =
        boost::math::tools::brent_find_minima(neg, a, b, std::numeric_limits<double>::digits);
    TimescaleSearch out;
    out.value = -f_star;
    out.v_at_max = v_star;
    if (best_val > out.value) {
        out.value = best_val;
        out.v_at_max = lo + best * dv;
    }
    const double edge_tol = 1e-6 * (hi - lo);
    out.at_endpoint = out.v_at_max - lo < edge_tol || hi - out.v_at_max < edge_tol;
    return out;
}

double timescale_T(GateKind gate) {
    static const ModelParameters p = ModelParameters::defaults();
    return p.tau(gate);
}

double ModelParameters::tau(GateKind gate) const {
    switch (gate) {
        case GateKind::m: return tau_m;
        case GateKind::h: return tau_h;
        case GateKind::n: return tau_n;
    }
    return 0.0;
}

void ModelParameters::refresh_timescales() {
    tau_m = timescale_search(GateKind::m, *this).value;
    tau_h = timescale_search(GateKind::h, *this).value;
    tau_n = timescale_search(GateKind::n, *this).value;
}

ModelParameters ModelParameters::defaults() {
    ModelParameters p;
    p.gamma = p.small_epsilon() / p.epsilon_mid;
    p.refresh_timescales();
    return p;
}

double t_scaled(GateKind gate, double v_mV, const ModelParameters& p) {
    return p.tau(gate) * t_hat(gate, v_mV);
}

double rescale_current(double I_physical, const ModelParameters& p) {
    return I_physical / p.current_scale();
}

double rescale_current(double I_physical) { return I_physical / 12000.0; }

double physical_current(double Ibar, const ModelParameters& p) { return Ibar * p.current_scale(); }

GateProfile gate_profile(GateKind gate, double v, const ModelParameters& p) {
    const double V = p.k_v * v;
    const Rate a = alpha_rate(gate, V);
    const Rate b = beta_rate(gate, V);
    const double S = a.f + b.f, S1 = a.d + b.d, S2 = a.dd + b.dd;
    const double k = p.k_v, k2 = k * k, T = p.tau(gate);
    GateProfile g{};
    g.inf = a.f / S;
    g.d_inf = k * (a.d * S - a.f * S1) / (S * S);
    g.dd_inf = k2 * ((a.dd * S - a.f * S2) / (S * S) - 2.0 * S1 * (a.d * S - a.f * S1) / (S * S * S));
    g.t = T / S;
    g.d_t = -T * k * S1 / (S * S);
    g.dd_t = T * k2 * (-S2 / (S * S) + 2.0 * S1 * S1 / (S * S * S));
    return g;
}

double rhs_V(double v, double m, double h, double n, const ModelParameters& p) {
    const double n2 = n * n;
    return p.Ibar - (v - p.E_Na) * m * m * m * h - p.gbar_K * (v - p.E_K) * n2 * n2 -
           p.gbar_L * (v - p.E_L);
}

double rhs_gate(GateKind gate, double v, double x, const ModelParameters& p) {
    const double V = p.k_v * v;
    return (gate_inf(gate, V) - x) / t_scaled(gate, V, p);
}

double rhs_M(double v, double m, const ModelParameters& p) { return rhs_gate(GateKind::m, v, m, p); }
double rhs_H(double v, double h, const ModelParameters& p) { return rhs_gate(GateKind::h, v, h, p); }
double rhs_N(double v, double n, const ModelParameters& p) { return rhs_gate(GateKind::n, v, n, p); }

FullState full_vector_field(const FullState& s, const ModelParameters& p) {
    const double ge = p.gamma * p.epsilon_mid;
    return {rhs_V(s.v, s.m, s.h, s.n, p), p.gamma * rhs_M(s.v, s.m, p),
            ge * p.delta_h * rhs_H(s.v, s.h, p), ge * p.delta_n * rhs_N(s.v, s.n, p)};
}

}  // namespace hhmmo
