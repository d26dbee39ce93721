#include "sclab/ergodics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "sclab/json_writer.hpp"

namespace sclab {

std::vector<double> EmpiricalMeasure::values() const {
    std::vector<double> v(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) v[i] = samples[i].second;
    return v;
}

EmpiricalMeasure kb_average(Trajectory& traj, const FluxDiffusionModel& model,
                            const NoiseModel& noise_model, const SolverConfig& cfg,
                            const Observable& observable, const std::string& name, double T,
                            const KbOptions& options) {
    EmpiricalMeasure m;
    m.observable_name = name;
    m.window_start = traj.time + options.burn_in_fraction * (T - traj.time);
    m.window_end = T;
    const auto every =
        std::max<std::uint64_t>(1, static_cast<std::uint64_t>(std::floor(options.snapshot_dt / traj.dt)));
    Observer obs;
    obs.every_steps = every;
    obs.callback = [&](const Trajectory& t) {
        if (t.time + 1e-12 >= m.window_start) m.samples.emplace_back(t.time, observable(t.state));
    };
    run(traj, model, noise_model, cfg, T, {obs});
    return m;
}

namespace {

double quantile_linear(const std::vector<double>& sorted, double p) {
    const std::size_t m = sorted.size();
    if (m == 1) return sorted[0];
    const double h = p * static_cast<double>(m - 1);
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, m - 1);
    const double frac = h - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

}  // namespace

double wasserstein1(const EmpiricalMeasure& a, const EmpiricalMeasure& b) {
    std::vector<double> va = a.values();
    std::vector<double> vb = b.values();
    if (va.empty() || vb.empty())
        throw std::invalid_argument("wasserstein1: empty empirical measure");
    std::sort(va.begin(), va.end());
    std::sort(vb.begin(), vb.end());
    if (va.size() == vb.size()) {
        double acc = 0.0;
        for (std::size_t i = 0; i < va.size(); ++i) acc += std::abs(va[i] - vb[i]);
        return acc / static_cast<double>(va.size());
    }
    const std::size_t L = std::max(va.size(), vb.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < L; ++i) {
        const double p = (static_cast<double>(i) + 0.5) / static_cast<double>(L);
        acc += std::abs(quantile_linear(va, p) - quantile_linear(vb, p));
    }
    return acc / static_cast<double>(L);
}

double tightness_diagnostic(Trajectory& traj, const FluxDiffusionModel& model,
                            const NoiseModel& noise_model, const SolverConfig& cfg, double s,
                            double q, double T, double snapshot_dt) {
    if (!(s > 0.0)) throw std::invalid_argument("tightness_diagnostic: s must be positive");
    std::vector<std::pair<double, double>> series;
    const auto every =
        std::max<std::uint64_t>(1, static_cast<std::uint64_t>(std::floor(snapshot_dt / traj.dt)));
    Observer obs;
    obs.every_steps = every;
    obs.callback = [&](const Trajectory& t) {
        series.emplace_back(t.time, sobolev_wsq_norm(t.state, s, q));
    };
    const double t0 = traj.time;
    run(traj, model, noise_model, cfg, T, {obs});
    double integral = 0.0;
    for (std::size_t i = 0; i + 1 < series.size(); ++i)
        integral += 0.5 * (series[i].second + series[i + 1].second) *
                    (series[i + 1].first - series[i].first);
    return integral / (traj.time - t0);
}

CouplingRun coupling_experiment(const Field& u0, const Field& v0,
                                const FluxDiffusionModel& model, const NoiseModel& noise_model,
                                const SolverConfig& cfg, std::uint64_t seed, double T,
                                double kappa_hat, double kappa_tilde, double t_end,
                                double snapshot_dt) {
    Trajectory u = make_trajectory(Field(u0.grid(), {u0.values().begin(), u0.values().end()}),
                                   seed, cfg, model);
    Trajectory v = make_trajectory(Field(v0.grid(), {v0.values().begin(), v0.values().end()}),
                                   seed, cfg, model);
    CouplingRun out;
    out.dt = u.dt;

    auto gap_l1 = [&]() {
        double acc = 0.0;
        auto uu = u.state.values();
        auto vv = v.state.values();
        for (std::size_t i = 0; i < uu.size(); ++i) acc += std::abs(uu[i] - vv[i]);
        return acc * u.state.grid().cell_volume();
    };

    const auto target = static_cast<std::uint64_t>(std::llround(t_end / u.dt));
    const auto every =
        std::max<std::uint64_t>(1, static_cast<std::uint64_t>(std::floor(snapshot_dt / u.dt)));

    double gap = gap_l1();
    out.initial_gap = gap;
    out.l1_gap_history.emplace_back(0.0, gap);
    out.l1_u_history.emplace_back(0.0, l1_norm(u.state));
    out.l1_v_history.emplace_back(0.0, l1_norm(v.state));

    double last_stop = 0.0;  // T_0 = 0; recorded stops begin at T_1 >= T
    double prev_gap = gap;
    while (u.step_count < target) {
        step(u, model, noise_model, cfg);
        step(v, model, noise_model, cfg);
        gap = gap_l1();
        if (gap > prev_gap) ++out.gap_violations;
        prev_gap = gap;
        if (u.step_count % every == 0 || u.step_count == target) {
            out.l1_gap_history.emplace_back(u.time, gap);
            const double lu = l1_norm(u.state);
            const double lv = l1_norm(v.state);
            out.l1_u_history.emplace_back(u.time, lu);
            out.l1_v_history.emplace_back(u.time, lv);
            const bool spaced = u.time >= last_stop + T - 1e-12;
            if (spaced && lu + lv <= 2.0 * kappa_hat) {
                out.stopping_times.push_back(u.time);
                last_stop = u.time;
            }
        }
    }
    out.final_gap = gap;

    const auto window_steps = static_cast<std::uint64_t>(std::llround(T / u.dt));
    int flagged = 0;
    for (double t : out.stopping_times) {
        const auto start = static_cast<std::uint64_t>(std::llround(t / u.dt));
        if (start + window_steps > target) break;
        const double sup =
            window_noise_sup(noise_model, seed, u.dt, {start, start + window_steps});
        const bool flag = sup <= kappa_tilde;
        out.small_noise_flags.push_back(flag);
        if (flag) ++flagged;
    }
    out.flagged_fraction = out.small_noise_flags.empty()
                               ? 0.0
                               : static_cast<double>(flagged) /
                                     static_cast<double>(out.small_noise_flags.size());
    return out;
}

double small_ball_average(const EmpiricalMeasure& series, double t0, double t1) {
    if (!(t1 >= t0)) throw std::invalid_argument("small_ball_average: bad window");
    double acc = 0.0;
    std::size_t n = 0;
    for (const auto& [t, v] : series.samples) {
        if (t < t0 - 1e-12 || t > t1 + 1e-12) continue;
        acc += v;
        ++n;
    }
    if (n == 0) throw std::invalid_argument("small_ball_average: window holds no samples");
    return acc / static_cast<double>(n);
}

std::string coupling_run_to_json(const CouplingRun& run) {
    JsonWriter w;
    w.begin_object();
    w.key("initial_gap").number(run.initial_gap);
    w.key("final_gap").number(run.final_gap);
    w.key("gap_violations").integer(static_cast<long long>(run.gap_violations));
    w.key("dt").number(run.dt);
    w.key("stopping_times").number_array(run.stopping_times);
    w.key("small_noise_flags").begin_array();
    for (bool f : run.small_noise_flags) w.boolean(f);
    w.end_array();
    w.key("flagged_fraction").number(run.flagged_fraction);
    w.key("gap_history").begin_array();
    for (const auto& [t, g] : run.l1_gap_history) {
        w.begin_array().number(t).number(g).end_array();
    }
    w.end_array();
    w.end_object();
    return w.str();
}

std::string empirical_measure_to_json(const EmpiricalMeasure& m) {
    JsonWriter w;
    w.begin_object();
    w.key("observable").string(m.observable_name);
    w.key("window").begin_array().number(m.window_start).number(m.window_end).end_array();
    w.key("samples").begin_array();
    for (const auto& [t, v] : m.samples) {
        w.begin_array().number(t).number(v).end_array();
    }
    w.end_array();
    w.end_object();
    return w.str();
}

}  // namespace sclab
