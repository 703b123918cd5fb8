#include <doctest.h>

#include "hhmmo/geometry.hpp"
#include "hhmmo/reduction.hpp"
#include "oracles.hpp"
#include "test_support.hpp"

#include <boost/numeric/odeint.hpp>

#include <array>
#include <cmath>

using namespace hhmmo;
using hhmmo::testing::at_current;
using hhmmo::testing::error_kind_of;
using hhmmo::testing::rel_err;
using hhmmo::testing::uniform;

namespace {

double m_inf(double v, const ModelParameters& p) { return gate_inf(GateKind::m, p.k_v * v); }

// Relative agreement that tolerates partials which happen to sit near zero.
bool close(double a, double b, double rel) { return std::fabs(a - b) <= rel * std::max(std::fabs(b), 1e-6); }

ReducedState random_interior(const ModelParameters& p) {
    return {uniform(p.E_K + 0.05, p.E_Na - 0.05), uniform(0.05, 0.95), uniform(0.05, 0.95)};
}

// Random point of M2 with feasible nu; returns false if the draw is infeasible.
bool random_on_M2(const ModelParameters& p, ReducedState& out) {
    const double v = uniform(p.E_K + 0.02, p.E_Na - 0.02);
    const double h = uniform(0.02, 0.98);
    try {
        const double n = nu(v, h, p).value;
        if (!(n > 0.0 && n < 1.0)) return false;
        out = {v, h, n};
        return true;
    } catch (const Error&) {
        return false;
    }
}

}  // namespace

TEST_CASE("mu solves the membrane equation") {
    const ModelParameters p = at_current(20.0);
    for (int i = 0; i < 100; ++i) {
        const ReducedState s = random_interior(p);
        const double m = mu(s.v, s.h, s.n, p).value;
        CHECK(std::fabs(rhs_V(s.v, m, s.h, s.n, p)) < 1e-10);
    }
    SUBCASE("zero numerator") {
        const double v = -0.3, h = 0.4, n = 0.5;
        ModelParameters q = p;
        q.Ibar = q.gbar_K * (v - q.E_K) * std::pow(n, 4) + q.gbar_L * (v - q.E_L);
        // The cube root magnifies the rounding residue of the cancelled numerator.
        CHECK(std::pow(std::fabs(mu(v, h, n, q).value), 3) < 1e-16);
    }
    SUBCASE("negative radicand uses the real odd root and is flagged") {
        const GraphEvaluation g = mu(-0.7, 0.5, 0.1, p);
        CHECK(g.negative_radicand);
        CHECK(g.value < 0.0);
        CHECK(std::fabs(rhs_V(-0.7, g.value, 0.5, 0.1, p)) < 1e-10);
    }
    SUBCASE("degenerate denominator") {
        CHECK(error_kind_of([&] { mu(p.E_Na, 0.5, 0.4, p); }) == ErrorKind::DegenerateDenominator);
        CHECK(error_kind_of([&] { mu(-0.3, 0.0, 0.4, p); }) == ErrorKind::DegenerateDenominator);
    }
}

TEST_CASE("mu partials match central differences") {
    const ModelParameters p = at_current(20.0);
    const double v = -0.2, h = 0.5, n = 0.4;
    const GraphEvaluation g = mu(v, h, n, p);
    CHECK(rel_err(g.partial_v, oracle::central_difference([&](double x) { return mu(x, h, n, p).value; }, v, 1e-6)) < 1e-5);
    int checked = 0;
    for (int i = 0; i < 1000; ++i) {
        const ReducedState s = random_interior(p);
        const GraphEvaluation e = mu(s.v, s.h, s.n, p);
        if (std::fabs(e.value) < 1e-2) continue;  // cube root is not differentiable at zero
        ++checked;
        const double fv = oracle::central_difference([&](double x) { return mu(x, s.h, s.n, p).value; }, s.v, 1e-6);
        const double fh = oracle::central_difference([&](double x) { return mu(s.v, x, s.n, p).value; }, s.h, 1e-6);
        const double fn = oracle::central_difference([&](double x) { return mu(s.v, s.h, x, p).value; }, s.n, 1e-6);
        CHECK(close(e.partial_v, fv, 1e-5));
        CHECK(close(e.partial_h, fh, 1e-5));
        CHECK(close(e.partial_n, fn, 1e-5));
        const MuHessian hs = mu_hessian(s.v, s.h, s.n, p);
        const double fvv =
            oracle::central_difference([&](double x) { return mu(x, s.h, s.n, p).partial_v; }, s.v, 1e-6);
        const double fhn =
            oracle::central_difference([&](double x) { return mu(s.v, x, s.n, p).partial_n; }, s.h, 1e-6);
        CHECK(close(hs.vv, fvv, 1e-4));
        CHECK(close(hs.hn, fhn, 1e-4));
    }
    CHECK(checked > 900);
}

TEST_CASE("nu and eta parametrize the critical manifold") {
    const ModelParameters p = at_current(20.0);
    int feasible = 0;
    for (int i = 0; i < 400 && feasible < 100; ++i) {
        ReducedState s{};
        if (!random_on_M2(p, s)) continue;
        ++feasible;
        CHECK(std::fabs(rhs_V(s.v, m_inf(s.v, p), s.h, s.n, p)) < 1e-10);
        const GraphEvaluation e = eta(s.v, s.n, p);
        CHECK(rel_err(e.value, s.h) < 1e-8);
        CHECK(std::fabs(rhs_V(s.v, m_inf(s.v, p), e.value, s.n, p)) < 1e-10);
    }
    CHECK(feasible == 100);

    SUBCASE("partials") {
        int checked = 0;
        for (int i = 0; i < 4000 && checked < 1000; ++i) {
            ReducedState s{};
            if (!random_on_M2(p, s) || s.n < 0.05) continue;
            ++checked;
            const GraphEvaluation g = nu(s.v, s.h, p);
            CHECK(close(g.partial_v, oracle::central_difference([&](double x) { return nu(x, s.h, p).value; }, s.v, 1e-6), 1e-5));
            CHECK(close(g.partial_h, oracle::central_difference([&](double x) { return nu(s.v, x, p).value; }, s.h, 1e-6), 1e-5));
            const GraphEvaluation e = eta(s.v, s.n, p);
            CHECK(close(e.partial_v, oracle::central_difference([&](double x) { return eta(x, s.n, p).value; }, s.v, 1e-6), 1e-5));
            CHECK(close(e.partial_n, oracle::central_difference([&](double x) { return eta(s.v, x, p).value; }, s.n, 1e-6), 1e-5));
        }
        CHECK(checked == 1000);
    }

    SUBCASE("errors") {
        // Near E_Na with h small the leak outweighs the applied current.
        CHECK(error_kind_of([&] { nu(0.4, 0.001, p); }) == ErrorKind::NegativeRadicand);
        CHECK(error_kind_of([&] { eta(p.E_Na, 0.5, p); }) == ErrorKind::DegenerateDenominator);
        CHECK(error_kind_of([&] { nu(p.E_K, 0.5, p); }) == ErrorKind::DegenerateDenominator);
    }

    SUBCASE("critical residual partials") {
        for (int i = 0; i < 100; ++i) {
            const ReducedState s = random_interior(p);
            const CriticalResidual w = critical_residual(s.v, s.h, s.n, p);
            CHECK(w.value == doctest::Approx(oracle::hand_W(s.v, s.h, s.n, p)).epsilon(1e-10));
            CHECK(close(w.d_v, oracle::hand_W_v(s.v, s.h, s.n, p), 1e-6));
            auto Wv = [&](double x) { return critical_residual(x, s.h, s.n, p).d_v; };
            CHECK(close(w.d_vv, oracle::central_difference(Wv, s.v, 1e-6), 1e-5));
        }
    }
}

TEST_CASE("reduced vector field") {
    ModelParameters p = at_current(20.0);

    SUBCASE("singular limit is the layer problem") {
        ModelParameters z = p;
        z.epsilon_mid = 0.0;
        const ReducedState s{-0.6, 0.5, 0.4};
        const ReducedState d = reduced_vector_field(s, z);
        const GraphEvaluation g = mu(s.v, s.h, s.n, z);
        const double t_m = t_scaled(GateKind::m, z.k_v * s.v, z);
        CHECK(d.v == doctest::Approx((m_inf(s.v, z) - g.value) / (t_m * g.partial_v)).epsilon(1e-12));
        CHECK(d.h == 0.0);
        CHECK(d.n == 0.0);
    }

    SUBCASE("U vanishes on M2 in the singular limit") {
        ModelParameters z = p;
        z.epsilon_mid = 0.0;
        int n_checked = 0;
        for (int i = 0; i < 300 && n_checked < 50; ++i) {
            ReducedState s{};
            if (!random_on_M2(z, s)) continue;
            ++n_checked;
            CHECK(std::fabs(reduced_vector_field(s, z).v) < 1e-9);
        }
    }

    SUBCASE("PartialVanishes where d_v mu is zero") {
        // Without potassium and with Ibar = gbar_L (E_Na - E_L), mu^3 = -gbar_L / h for every v.
        ModelParameters z = p;
        z.gbar_K = 0.0;
        z.Ibar = z.gbar_L * (z.E_Na - z.E_L);
        CHECK(std::fabs(mu(-0.3, 0.5, 0.4, z).partial_v) < 1e-12);
        CHECK(error_kind_of([&] { reduced_vector_field({-0.3, 0.5, 0.4}, z); }) == ErrorKind::PartialVanishes);
    }

    SUBCASE("first-order dependence on epsilon") {
        const ReducedState s{-0.62, 0.45, 0.38};
        auto diff = [&](double eps) {
            ModelParameters a = p, b = p;
            a.epsilon_mid = eps;
            b.epsilon_mid = 0.0;
            const ReducedState fa = reduced_vector_field(s, a), fb = reduced_vector_field(s, b);
            return std::sqrt(std::pow(fa.v - fb.v, 2) + std::pow(fa.h - fb.h, 2) + std::pow(fa.n - fb.n, 2));
        };
        const double slope = std::log10(diff(1e-2) / diff(1e-3));
        CHECK(slope == doctest::Approx(1.0).epsilon(0.01));
    }

    SUBCASE("closed-form Jacobian") {
        for (int i = 0; i < 20; ++i) {
            const ReducedState s{uniform(-0.7, -0.1), uniform(0.2, 0.8), uniform(0.2, 0.8)};
            const Jacobian3 J = reduced_field_jacobian(s, p);
            auto col = [&](int k, double step) {
                ReducedState a = s, b = s;
                (k == 0 ? a.v : k == 1 ? a.h : a.n) += step;
                (k == 0 ? b.v : k == 1 ? b.h : b.n) -= step;
                const ReducedState fa = reduced_vector_field(a, p), fb = reduced_vector_field(b, p);
                return std::array<double, 3>{(fa.v - fb.v) / (2 * step), (fa.h - fb.h) / (2 * step),
                                             (fa.n - fb.n) / (2 * step)};
            };
            for (int k = 0; k < 3; ++k) {
                const auto c = col(k, 1e-6);
                for (int r = 0; r < 3; ++r) CHECK(close(J[r][k], c[r], 1e-5));
            }
        }
    }
}

TEST_CASE("4D trajectories stay gamma-close to the graph of mu") {
    // Start on m = mu on the lower attracting sheet and measure the m-defect.
    auto defect = [](double gamma) {
        ModelParameters p = at_current(20.0);
        p.gamma = gamma;
        const ReducedState s{-0.62, 0.45, 0.38};
        FullState x{s.v, mu(s.v, s.h, s.n, p).value, s.h, s.n};
        using State = std::array<double, 4>;
        State y{x.v, x.m, x.h, x.n};
        auto rhs = [&](const State& z, State& dz, double) {
            const FullState d = full_vector_field({z[0], z[1], z[2], z[3]}, p);
            dz = {d.v, d.m, d.h, d.n};
        };
        double worst = 0.0;
        auto obs = [&](const State& z, double) {
            worst = std::max(worst, std::fabs(z[1] - mu(z[0], z[2], z[3], p).value));
        };
        namespace ode = boost::numeric::odeint;
        ode::integrate_const(ode::make_dense_output(1e-12, 1e-12, ode::runge_kutta_dopri5<State>()), rhs, y, 0.0,
                             10.0, 0.01, obs);
        return worst;
    };
    const double d3 = defect(1e-3), d2 = defect(1e-2);
    CHECK(d3 < 5e-3);
    CHECK(d2 < 5e-2);
    const double slope = std::log10(d2 / d3);
    CHECK(slope == doctest::Approx(1.0).epsilon(0.15));
}

TEST_CASE("intermediate flows") {
    const ModelParameters p = at_current(20.0);
    SUBCASE("vanish on M_h and M_n") {
        for (double v : {-0.7, -0.6, -0.5, -0.3, -0.1}) {
            const double n = gate_inf(GateKind::n, p.k_v * v);
            const double h = eta(v, n, p).value;
            CHECK(std::fabs(intermediate_flow_h(v, h, p)) < 1e-12);
            const double hh = gate_inf(GateKind::h, p.k_v * v);
            const double nn = nu(v, hh, p).value;
            CHECK(std::fabs(intermediate_flow_n(v, nn, p)) < 1e-12);
        }
    }
    SUBCASE("sign opposite to the potassium gate rate") {
        for (int i = 0; i < 50; ++i) {
            ReducedState s{};
            if (!random_on_M2(p, s)) continue;
            const double f = intermediate_flow_h(s.v, s.h, p);
            const double N = rhs_N(s.v, s.n, p);
            if (std::fabs(N) > 1e-9) CHECK((f < 0) == (N > 0));
        }
    }
    SUBCASE("value by direct composition") {
        const double v = -0.2, h = 0.55;
        const double n = oracle::hand_nu(v, h, p);
        const double W_n = -4.0 * p.gbar_K * (v - p.E_K) * n * n * n;
        const double N = oracle::hand_full_field({v, 0.0, 0.0, n}, p).n / (p.gamma * p.epsilon_mid * p.delta_n);
        CHECK(intermediate_flow_h(v, h, p) == doctest::Approx(W_n * N).epsilon(1e-9));
        // Frozen value.
        CHECK(intermediate_flow_h(v, h, p) == doctest::Approx(0.10271524905).epsilon(1e-9));
    }
}

TEST_CASE("slow flow on M_h") {
    const ModelParameters p = at_current(20.0);
    const Equilibrium eq = true_equilibrium(p, Regime::h_slow);
    CHECK(std::fabs(slow_flow_on_Mh(eq.point.v, p)) < 1e-12);
    const auto q = folded_singularities(p, Regime::h_slow);
    // Attracting parts of H- (below q-) and H+ (above q+) flow toward the folded singularities.
    for (double v : {-0.72, -0.68, -0.64, -0.6}) {
        REQUIRE(v < q[0].v);
        CHECK(slow_flow_on_Mh(v, p) > 0.0);
    }
    for (double v : {-0.15, -0.1, -0.05, 0.0}) {
        REQUIRE(v > q[1].v);
        CHECK(slow_flow_on_Mh(v, p) < 0.0);
    }
    for (const FoldPoint& f : fold_points_Mh(p))
        CHECK(error_kind_of([&] { slow_flow_on_Mh(f.v, p); }) == ErrorKind::FoldSingularity);
    for (const FoldPoint& f : fold_points_Mn(at_current(20.0, Regime::n_slow)))
        CHECK(error_kind_of([&] { slow_flow_on_Mn(f.v, at_current(20.0, Regime::n_slow)); }) == ErrorKind::FoldSingularity);

    SUBCASE("agrees in sign with the two-dimensional slow system") {
        ModelParameters s = p;
        const double delta = 1e-4;
        for (double v0 : {-0.7, -0.65, -0.1, -0.02}) {
            const double n0 = gate_inf(GateKind::n, s.k_v * v0);
            const double h0 = eta(v0, n0, s).value;
            auto f = [&](double, const oracle::Vec<2>& x) {
                const double n = nu(x[0], x[1], s).value;
                const CriticalResidual w = critical_residual(x[0], x[1], n, s);
                const double H = rhs_H(x[0], x[1], s), N = rhs_N(x[0], n, s);
                return oracle::Vec<2>{-(w.d_n * N + delta * w.d_h * H) / w.d_v, delta * H};
            };
            oracle::Vec<2> x{v0, h0};
            for (int i = 0; i < 20000; ++i) x = oracle::rk4_step<2>(f, 0.0, x, 0.05);
            CHECK((x[0] - v0 > 0) == (slow_flow_on_Mh(v0, s) > 0));
        }
    }
}

TEST_CASE("desingularized flows") {
    const ModelParameters p = at_current(20.0);
    int tested = 0;
    for (int i = 0; i < 2000 && tested < 50; ++i) {
        ReducedState s{};
        if (!random_on_M2(p, s)) continue;
        const CriticalResidual w = critical_residual(s.v, s.h, s.n, p);
        if (w.d_v > -1e-3 || s.n < 0.05) continue;  // attracting sheets only
        if (std::fabs(mu(s.v, s.h, s.n, p).partial_v) < 1e-6) continue;
        ++tested;
        // Slow limit of the reduced field: its (h, n) components, with v' from the
        // tangency constraint W_v v' + W_h h' + W_n n' = 0.
        ModelParameters e = p;
        e.epsilon_mid = 1e-6;
        const ReducedState r = reduced_vector_field(s, e);
        const std::array<double, 3> slow{-(w.d_h * r.h + w.d_n * r.n) / w.d_v, r.h, r.n};
        const auto d = desingularized_flow_h(s.v, s.h, p);
        const GraphEvaluation gnu = nu(s.v, s.h, p);
        const std::array<double, 3> lifted{d[0], d[1], gnu.partial_v * d[0] + gnu.partial_h * d[1]};
        const double ns = std::sqrt(slow[0] * slow[0] + slow[1] * slow[1] + slow[2] * slow[2]);
        const double nl = std::sqrt(lifted[0] * lifted[0] + lifted[1] * lifted[1] + lifted[2] * lifted[2]);
        for (int j = 0; j < 3; ++j) CHECK(std::fabs(slow[j] / ns - lifted[j] / nl) < 1e-6);  // same orientation on S^a
        // Sign of the h-component is the sign of H there.
        CHECK((d[1] > 0) == (rhs_H(s.v, s.h, p) > 0));

        // The n-chart describes the same direction: lift both to (v, h, n).
        const auto dn = desingularized_flow_n(s.v, s.n, p);
        const GraphEvaluation g = nu(s.v, s.h, p);
        const std::array<double, 3> a{d[0], d[1], g.partial_v * d[0] + g.partial_h * d[1]};
        const GraphEvaluation k = eta(s.v, s.n, p);
        const std::array<double, 3> b{dn[0], k.partial_v * dn[0] + k.partial_n * dn[1], dn[1]};
        const double na = std::sqrt(a[0] * a[0] + a[1] * a[1] + a[2] * a[2]);
        const double nb = std::sqrt(b[0] * b[0] + b[1] * b[1] + b[2] * b[2]);
        for (int j = 0; j < 3; ++j) CHECK(std::fabs(a[j] / na - b[j] / nb) < 1e-6);
    }
    CHECK(tested == 50);
}
