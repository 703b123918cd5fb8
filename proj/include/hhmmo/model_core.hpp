#pragma once

#include <array>

namespace hhmmo {

enum class GateKind { m, h, n };

// Gating rates take the membrane potential in mV (the shifted textbook forms);
// everything else in the library works with the dimensionless potential v = V / k_v.
double alpha(GateKind gate, double v_mV);
double beta(GateKind gate, double v_mV);
double gate_inf(GateKind gate, double v_mV);
double t_hat(GateKind gate, double v_mV);

struct ModelParameters {
    double gbar_K = 0.3;
    double gbar_L = 0.0025;
    double E_Na = 0.5;
    double E_K = -0.77;
    double E_L = -0.544;
    double Ibar = 0.0;
    double gamma = 0.0;  // filled by defaults(): small_epsilon() / epsilon_mid
    double epsilon_mid = 0.1;
    double delta_h = 0.025;
    double delta_n = 1.0;
    double k_v = 100.0;  // mV
    double k_t = 1.0;    // ms
    double C = 1.0;      // uF/cm^2
    double g_Na = 120.0; // mS/cm^2
    double tau_m = 0.0;
    double tau_h = 0.0;
    double tau_n = 0.0;

    static ModelParameters defaults();

    // Ratio of membrane to channel time scales, C / (k_t g_Na).
    double small_epsilon() const { return C / (k_t * g_Na); }
    double current_scale() const { return k_v * g_Na; }
    double tau(GateKind gate) const;
    // Recomputes tau_m/h/n after the voltage window or k_v changed.
    void refresh_timescales();
};

struct TimescaleSearch {
    double value = 0.0;     // max of 1/t_hat over the window
    double v_at_max = 0.0;  // dimensionless
    bool at_endpoint = false;
};

TimescaleSearch timescale_search(GateKind gate, const ModelParameters& p, int grid_points = 10000);
double timescale_T(GateKind gate);
double t_scaled(GateKind gate, double v_mV, const ModelParameters& p);

double rescale_current(double I_physical, const ModelParameters& p);
double rescale_current(double I_physical);
double physical_current(double Ibar, const ModelParameters& p);

// Steady state x_inf and scaled time constant t_x = T_x * t_hat, with first and second
// derivatives in the dimensionless potential v.
struct GateProfile {
    double inf, d_inf, dd_inf;
    double t, d_t, dd_t;
};

GateProfile gate_profile(GateKind gate, double v, const ModelParameters& p);

struct FullState {
    double v, m, h, n;
};

double rhs_V(double v, double m, double h, double n, const ModelParameters& p);
double rhs_gate(GateKind gate, double v, double x, const ModelParameters& p);
double rhs_M(double v, double m, const ModelParameters& p);
double rhs_H(double v, double h, const ModelParameters& p);
double rhs_N(double v, double n, const ModelParameters& p);

// Fast-time field (V, gamma M, gamma eps delta_h H, gamma eps delta_n N).
FullState full_vector_field(const FullState& s, const ModelParameters& p);

}  // namespace hhmmo
