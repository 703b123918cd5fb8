#include "commands.hpp"

#include "hhmmo/dynamics.hpp"
#include "hhmmo/errors.hpp"
#include "hhmmo/geometry.hpp"
#include "hhmmo/local_analysis.hpp"
#include "hhmmo/return_map.hpp"
#include "hhmmo/table.hpp"

#include <cmath>
#include <filesystem>
#include <iostream>

namespace hhmmo::cli {

namespace {

std::string out_path(const RunConfig& c, const std::string& file) {
    std::filesystem::create_directories(c.output_dir);
    return (std::filesystem::path(c.output_dir) / file).string();
}

std::string join(const std::vector<int>& xs) {
    std::string s;
    for (std::size_t i = 0; i < xs.size(); ++i) s += (i ? ";" : "") + std::to_string(xs[i]);
    return s;
}

void write_manifold(const RunConfig& c, Regime regime, const std::string& file) {
    const auto [a, b] = analysis_window(c.model);
    TableWriter t(out_path(c, file), file.substr(0, file.size() - 4), 1, {"v", "h", "n", "sheet"});
    for (double v : uniform_grid(a, b, c.geometry_grid_points)) {
        try {
            const ReducedState s = manifold_point(v, regime, c.model);
            t.row({s.v, s.h, s.n, to_string(sheet_of(s.v, s.h, s.n, c.model).label)});
        } catch (const Error&) {
            // no point of the curve at this v (radicand or denominator)
        }
    }
    t.close();
}

void write_pattern(const RunConfig& c, const PatternReport& r, double duration) {
    TableWriter t(out_path(c, "pattern.csv"), "pattern", 1,
                  {"regime", "system", "I_physical", "Ibar", "pattern", "epochs_above", "epochs_below", "lao_count",
                   "sao_counts", "period_estimate", "cycles", "v_split", "duration"});
    t.row({to_string(c.regime), to_string(c.simulation.system), physical_current(c.model.Ibar, c.model), c.model.Ibar,
           to_string(r.pattern), r.epochs_above, r.epochs_below, r.lao_count, join(r.sao_counts), r.period_estimate,
           std::int64_t{r.cycles}, r.v_split, duration});
    t.close();
}

double time_scale(const RunConfig& c) { return c.simulation.system == SystemKind::full4d ? 1.0 : c.model.gamma; }

}  // namespace

void cmd_geometry(const RunConfig& c) {
    const ModelParameters& p = c.model;

    TableWriter fc(out_path(c, "fold_curves.csv"), "fold_curves", 1, {"curve", "v", "h", "n"});
    if (const auto range = fold_curve_range(p)) {
        const FoldCurves curves = fold_curves(p, uniform_grid(range->first, range->second, c.geometry_grid_points));
        for (const FoldPoint& f : curves.points) fc.row({to_string(f.curve), f.v, f.h, f.n});
        if (curves.connection) fc.row({std::string("connection"), curves.connection->v, curves.connection->h, curves.connection->n});
    }
    fc.close();

    write_manifold(c, Regime::h_slow, "manifold_Mh.csv");
    write_manifold(c, Regime::n_slow, "manifold_Mn.csv");

    TableWriter fp(out_path(c, "fold_points.csv"), "fold_points", 1, {"manifold", "curve", "v", "h", "n"});
    for (Regime r : {Regime::h_slow, Regime::n_slow})
        for (const FoldPoint& f : fold_points(r, p))
            fp.row({std::string(r == Regime::h_slow ? "M_h" : "M_n"), to_string(f.curve), f.v, f.h, f.n});
    fp.close();

    const Equilibrium eq = true_equilibrium(p, c.regime);
    TableWriter et(out_path(c, "equilibrium.csv"), "equilibrium", 1, {"regime", "v", "h", "n", "branch", "sheet"});
    et.row({to_string(c.regime), eq.point.v, eq.point.h, eq.point.n, eq.branch, to_string(eq.sheet.label)});
    et.close();

    const auto qs = folded_singularities(p, c.regime);
    TableWriter ft(out_path(c, "folded_singularities.csv"), "folded_singularities", 1,
                   {"regime", "branch", "v", "h", "n"});
    for (const FoldedSingularity& q : qs)
        ft.row({to_string(q.regime), std::string(q.branch == Branch::minus ? "q_minus" : "q_plus"), q.v, q.h, q.n});
    ft.close();

    const SingularCycle cycle = singular_cycle(p, c.regime);
    TableWriter rt(out_path(c, "orbital_relation.csv"), "orbital_relation", 1, {"regime", "relation", "gap"});
    rt.row({to_string(c.regime), to_string(cycle.relation.kind), cycle.relation.gap});
    rt.close();

    TableWriter st(out_path(c, "singular_cycle.csv"), "singular_cycle", 1,
                   {"index", "kind", "v_start", "h_start", "n_start", "v_end", "h_end", "n_end"});
    for (std::size_t i = 0; i < cycle.segments.size(); ++i) {
        const CycleSegment& s = cycle.segments[i];
        st.row({static_cast<std::int64_t>(i), to_string(s.kind), s.start.v, s.start.h, s.start.n, s.end.v, s.end.h,
                s.end.n});
    }
    st.close();
}

void cmd_thresholds(const RunConfig& c) {
    TableWriter t(out_path(c, "thresholds.csv"), "thresholds", 1,
                  {"name", "regime", "status", "Ibar", "I_physical", "bracket_width", "residual"});
    for (ThresholdName name :
         {ThresholdName::I_minus, ThresholdName::I_plus, ThresholdName::I_p, ThresholdName::I_a, ThresholdName::I_r}) {
        const auto bracket = default_threshold_bracket(name, c.regime);
        if (!bracket) {
            t.row({to_string(name), to_string(c.regime), std::string("NOT_FOUND"), std::string(), std::string(),
                   std::string(), std::string()});
            continue;
        }
        const ThresholdReport r =
            find_threshold(name, c.regime, {rescale_current(bracket->first, c.model), rescale_current(bracket->second, c.model)},
                           c.model);
        t.row({to_string(name), to_string(c.regime), std::string("OK"), r.Ibar, physical_current(r.Ibar, c.model),
               r.bracket_width, r.residual});
    }
    t.close();
}

void cmd_simulate(const RunConfig& c) {
    Trajectory traj;
    std::optional<PatternReport> report;
    double duration = 0.0;
    if (c.duration) {
        duration = *c.duration;
        traj = integrate(c.simulation.system, default_initial_state(c.model, c.regime), duration * time_scale(c),
                         c.simulation.rel_tol, c.simulation.abs_tol, c.model);
    } else {
        ClassifiedRun run = simulate_and_classify(c.model, c.regime, c.simulation);
        traj = std::move(run.trajectory);
        report = run.report;
        duration = traj.times.back() / time_scale(c);
    }

    TableWriter t(out_path(c, "trajectory.csv"), "trajectory", 1, {"t", "v", "m", "h", "n"});
    for (std::size_t i = 0; i < traj.times.size() && duration > 0.0; ++i) {
        const FullState& s = traj.states[i];
        t.row({traj.times[i], s.v, s.m, s.h, s.n});
    }
    t.close();
    if (duration == 0.0) {
        std::cerr << "simulate: zero duration, no pattern report\n";
        return;
    }
    if (!report) {
        try {
            report = classify_pattern(traj, c.simulation.classifier);
        } catch (const Error& e) {
            if (e.kind() != ErrorKind::TooShort) throw;
            std::cerr << "simulate: " << e.what() << ", no pattern report\n";
            return;
        }
    }
    write_pattern(c, *report, duration);
}

void cmd_classify(const RunConfig& c) {
    const ClassifiedRun run = simulate_and_classify(c.model, c.regime, c.simulation);
    write_pattern(c, run.report, run.trajectory.times.back() / time_scale(c));
}

void cmd_sweep(const RunConfig& c) {
    const int n_points = static_cast<int>(std::llround((c.sweep.i_max - c.sweep.i_min) / c.sweep.step)) + 1;
    const SweepResult r = sweep_current(c.sweep.i_min, c.sweep.i_min + (n_points - 1) * c.sweep.step, c.regime,
                                        c.model, n_points, c.sweep.resolution, c.sweep.workers, c.simulation);
    TableWriter pt(out_path(c, "sweep_points.csv"), "sweep_points", 1, {"regime", "I_physical", "Ibar", "pattern"});
    for (const SweepPoint& s : r.points)
        pt.row({to_string(c.regime), s.I, rescale_current(s.I, c.model), to_string(s.pattern)});
    pt.close();
    TableWriter bt(out_path(c, "sweep_boundaries.csv"), "sweep_boundaries", 1,
                   {"regime", "I_low", "I_high", "I_estimate", "below", "above"});
    for (const SweepBoundary& b : r.boundaries)
        bt.row({to_string(c.regime), b.I_low, b.I_high, b.estimate(), to_string(b.below), to_string(b.above)});
    bt.close();
}

void cmd_local(const RunConfig& c) {
    const auto [a, b] = analysis_window(c.model);
    const auto grid = uniform_grid(a, b, c.local_grid_points);
    const auto segments = stability_segments(c.model, c.local_epsilon, c.regime, grid);
    auto opt = [](const std::optional<double>& x) -> Cell { return x ? Cell{*x} : Cell{std::string()}; };
    TableWriter st(out_path(c, "stability_segments.csv"), "stability_segments", 1,
                   {"regime", "epsilon", "v_start", "v_end", "kind", "hopf_v", "degenerate_v"});
    for (const StabilitySegment& s : segments)
        st.row({to_string(c.regime), c.local_epsilon, s.v_interval.first, s.v_interval.second, to_string(s.kind),
                opt(s.hopf_v), opt(s.degenerate_v)});
    st.close();

    TableWriter sp(out_path(c, "special_points.csv"), "special_points", 1,
                   {"regime", "epsilon", "type", "v", "trace", "det", "discriminant"});
    auto emit = [&](const std::string& type, double v) {
        const PartialJacobian j = jacobian_partial_at(v, c.local_epsilon, c.model, c.regime);
        sp.row({to_string(c.regime), c.local_epsilon, type, v, j.trace, j.det, j.discriminant});
    };
    for (double v : hopf_points(c.model, c.local_epsilon, c.regime, grid)) emit("hopf", v);
    for (double v : degenerate_nodes(c.model, c.local_epsilon, c.regime, grid)) emit("degenerate_node", v);
    sp.close();
}

}  // namespace hhmmo::cli
