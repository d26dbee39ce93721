#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <cstring>
#include <numbers>
#include <vector>

#include "sclab/model.hpp"
#include "sclab/noise.hpp"
#include "sclab/solver.hpp"

using namespace sclab;

namespace {

Field riemann_field(const TorusGrid& g, double left, double right) {
    Field f(g);
    const int n = g.cells_per_axis();
    for (int i = 0; i < n; ++i) f[i] = i < n / 2 ? left : right;
    return f;
}

SolverConfig burgers_config(double bound = 2.0) {
    SolverConfig cfg;
    cfg.max_speed_estimate = bound;
    cfg.state_bound = bound;
    cfg.dt_cap = 1e-2;
    return cfg;
}

// Quadrature route to the Engquist-Osher split: int_0^u max(F'(s), 0) ds by
// fine Simpson, independent of the critical-point evaluation.
double eo_positive_oracle(const FluxDiffusionModel& m, double u) {
    const int n = 20001;
    if (u == 0.0) return m.flux(0.0)[0];
    const double h = u / (n - 1);
    auto f = [&](double s) { return std::max(m.flux_jacobian(s)[0], 0.0); };
    double acc = f(0.0) + f(u);
    for (int i = 1; i < n - 1; ++i) acc += f(i * h) * (i % 2 == 1 ? 4.0 : 2.0);
    return m.flux(0.0)[0] + acc * h / 3.0;
}

}  // namespace

TEST_CASE("engquist-osher split parts match the quadrature oracle") {
    const FluxDiffusionModel& burgers = find_model("burgers");
    for (double u : {-1.8, -0.7, -0.1, 0.0, 0.3, 1.1, 2.4}) {
        CHECK(eo_positive_part(burgers, 0, u) ==
              doctest::Approx(eo_positive_oracle(burgers, u)).epsilon(1e-9));
        // closed forms for the convex flux with minimum at 0
        CHECK(eo_positive_part(burgers, 0, u) ==
              doctest::Approx(0.5 * std::max(u, 0.0) * std::max(u, 0.0)).epsilon(1e-14));
        CHECK(eo_negative_part(burgers, 0, u) ==
              doctest::Approx(0.5 * std::min(u, 0.0) * std::min(u, 0.0)).epsilon(1e-14));
    }
}

TEST_CASE("constant state with zero noise is a fixed point") {
    const TorusGrid g(1, 64);
    const FluxDiffusionModel& burgers = find_model("burgers");
    const NoiseModel quiet = make_sigma(g, {});
    Field c(g);
    for (double& v : c.values()) v = 0.7;
    Trajectory traj = make_trajectory(std::move(c), 1, burgers_config(), burgers);
    for (int i = 0; i < 50; ++i) step(traj, burgers, quiet, burgers_config());
    for (double v : traj.state.values()) CHECK(v == 0.7);
}

TEST_CASE("pure noise integrates sigma dW exactly") {
    const TorusGrid g(1, 64);
    FluxDiffusionModel still = find_model("burgers");
    still.flux = [](double) { return Vec2{0.0, 0.0}; };
    still.flux_jacobian = [](double) { return Vec2{0.0, 0.0}; };
    still.flux_critical_points[0].clear();
    const NoiseModel noise = make_sigma(g, {{{1, 0}, 0.5, false}, {{2, 0}, 0.25, true}});
    const Field u0 = random_zero_mean_field(g, 0.5, 3, 4);

    Trajectory traj = make_trajectory(Field(g, {u0.values().begin(), u0.values().end()}), 11,
                                      burgers_config(), still);
    std::vector<double> replica(u0.values().begin(), u0.values().end());
    NoisePath shadow(11, traj.dt);
    for (int s = 0; s < 200; ++s) {
        step(traj, still, noise, burgers_config());
        const double dw = shadow.next_increment();
        for (std::size_t i = 0; i < replica.size(); ++i)
            replica[i] += noise.sigma[i] * dw;
        for (std::size_t i = 0; i < replica.size(); ++i)
            CHECK(traj.state[i] == replica[i]);  // bitwise: same update sequence
    }
    // and against sigma * W(t) within accumulation roundoff
    for (std::size_t i = 0; i < replica.size(); ++i)
        CHECK(traj.state[i] ==
              doctest::Approx(u0[i] + noise.sigma[i] * shadow.running_w()).epsilon(1e-11));
}

TEST_CASE("burgers riemann shock travels at speed 1/2") {
    const TorusGrid g(1, 512);
    const FluxDiffusionModel& burgers = find_model("burgers");
    const NoiseModel quiet = make_sigma(g, {});
    SolverConfig cfg = burgers_config(1.5);
    Trajectory traj = make_trajectory(riemann_field(g, 1.0, 0.0), 1, cfg, burgers);
    run(traj, burgers, quiet, cfg, 0.5);

    // initial jump sits at x = 1/2; Rankine-Hugoniot speed is 1/2
    double front = -1.0;
    for (int i = 256; i < 512; ++i) {
        if (traj.state[i] < 0.5) {
            front = (i + 0.5) * g.spacing();
            break;
        }
    }
    CHECK(front == doctest::Approx(0.75).epsilon(3.5 * g.spacing()));
}

TEST_CASE("lax-friedrichs cross-check reproduces the shock position") {
    const TorusGrid g(1, 512);
    const FluxDiffusionModel& burgers = find_model("burgers");
    const NoiseModel quiet = make_sigma(g, {});
    SolverConfig cfg = burgers_config(1.5);
    cfg.flux_scheme = FluxScheme::lax_friedrichs;
    Trajectory traj = make_trajectory(riemann_field(g, 1.0, 0.0), 1, cfg, burgers);
    run(traj, burgers, quiet, cfg, 0.5);
    double front = -1.0;
    for (int i = 256; i < 512; ++i) {
        if (traj.state[i] < 0.5) {
            front = (i + 0.5) * g.spacing();
            break;
        }
    }
    CHECK(front == doctest::Approx(0.75).epsilon(5.0 * g.spacing()));
}

TEST_CASE("run to the current time is a no-op") {
    const TorusGrid g(1, 64);
    const FluxDiffusionModel& burgers = find_model("burgers");
    const NoiseModel quiet = make_sigma(g, {});
    Trajectory traj = make_trajectory(random_zero_mean_field(g, 0.5, 3, 2), 1,
                                      burgers_config(), burgers);
    run(traj, burgers, quiet, burgers_config(), 0.0);
    CHECK(traj.step_count == 0);
}

TEST_CASE("heat mode decays at the exact rate") {
    const TorusGrid g(1, 256);
    const FluxDiffusionModel& heat = find_model("heat");
    const NoiseModel quiet = make_sigma(g, {});
    SolverConfig cfg;
    cfg.max_speed_estimate = 0.0;  // no transport: dt set by the diffusion cap
    cfg.state_bound = 2.0;
    Field mode(g);
    for (int i = 0; i < 256; ++i) mode[i] = std::cos(2.0 * std::numbers::pi * i / 256.0);
    Trajectory traj = make_trajectory(std::move(mode), 1, cfg, heat);
    run(traj, heat, quiet, cfg, 0.01);
    CHECK(max_abs(traj.state) ==
          doctest::Approx(0.6738254512314336).epsilon(0.01));  // e^{-4 pi^2 t}
}

TEST_CASE("burgers entropy decay: the l1 norm never grows") {
    const TorusGrid g(1, 256);
    const FluxDiffusionModel& burgers = find_model("burgers");
    const NoiseModel quiet = make_sigma(g, {});
    const SolverConfig cfg = burgers_config();
    Field u0(g);
    for (int i = 0; i < 256; ++i) u0[i] = std::sin(2.0 * std::numbers::pi * i / 256.0);
    Trajectory traj = make_trajectory(std::move(u0), 1, cfg, burgers);
    double previous = l1_norm(traj.state);
    for (int s = 0; s < 2000; ++s) {
        step(traj, burgers, quiet, cfg);
        const double now = l1_norm(traj.state);
        CHECK(now <= previous + 1e-14);
        previous = now;
    }
}

TEST_CASE("energy residual vanishes when nothing moves") {
    const TorusGrid g(1, 64);
    FluxDiffusionModel still = find_model("heat");  // F = 0
    still.diffusion = [](double) { return Mat2{{{0.0, 0.0}, {0.0, 0.0}}}; };
    still.diffusion_primitive = [](double) { return Mat2{{{0.0, 0.0}, {0.0, 0.0}}}; };
    const NoiseModel quiet = make_sigma(g, {});
    SolverConfig cfg;
    cfg.max_speed_estimate = 0.0;
    cfg.state_bound = 1.0;
    Trajectory traj = make_trajectory(random_zero_mean_field(g, 0.5, 3, 8), 3, cfg, still);
    for (int i = 0; i < 100; ++i) step(traj, still, quiet, cfg);
    CHECK(energy_balance_residual(traj) == 0.0);
}

TEST_CASE("energy residual: pure noise closes the ito identity") {
    const TorusGrid g(1, 128);
    FluxDiffusionModel still = find_model("heat");
    still.diffusion = [](double) { return Mat2{{{0.0, 0.0}, {0.0, 0.0}}}; };
    still.diffusion_primitive = [](double) { return Mat2{{{0.0, 0.0}, {0.0, 0.0}}}; };
    const NoiseModel noise = make_sigma(g, {{{1, 0}, 0.4, false}, {{3, 0}, 0.2, true}});
    SolverConfig cfg;
    cfg.max_speed_estimate = 0.0;
    cfg.state_bound = 50.0;
    cfg.dt_cap = 1e-4;
    Trajectory traj = make_trajectory(random_zero_mean_field(g, 0.5, 3, 8), 99, cfg, still);
    for (int i = 0; i < 10000; ++i) step(traj, still, noise, cfg);
    const double l2 = l2_norm(traj.state);
    const double scale = std::max(1.0, 0.5 * l2 * l2);
    CHECK(std::abs(energy_balance_residual(traj)) <= 1e-10 * scale);
}

TEST_CASE("solver conserves the mean with zero-mean noise") {
    const TorusGrid g(1, 256);
    const FluxDiffusionModel& burgers = find_model("burgers");
    const NoiseModel noise = make_sigma(g, {{{1, 0}, 0.2, false}, {{2, 0}, 0.1, true}});
    const SolverConfig cfg = burgers_config();
    Trajectory traj = make_trajectory(random_zero_mean_field(g, 0.5, 4, 17), 55, cfg, burgers);
    const double m0 = mean(traj.state);
    for (int i = 0; i < 20000; ++i) step(traj, burgers, noise, cfg);
    CHECK(std::abs(mean(traj.state) - m0) < 1e-12);
}

TEST_CASE("comparison principle: ordered data stay ordered under shared noise") {
    const TorusGrid g(1, 64);
    const NoiseModel noise = make_sigma(g, {{{1, 0}, 0.1, false}});
    for (const char* name : {"burgers", "porous_medium"}) {
        const FluxDiffusionModel& model = find_model(name);
        for (std::uint64_t pair = 0; pair < 50; ++pair) {
            const Field lo = random_zero_mean_field(g, 0.4, 3, 2 * pair);
            Field hi(g, {lo.values().begin(), lo.values().end()});
            const Field bump = random_zero_mean_field(g, 0.3, 3, 2 * pair + 1);
            for (std::size_t i = 0; i < hi.size(); ++i) hi[i] += std::abs(bump[i]);
            SolverConfig cfg = burgers_config();
            Trajectory u = make_trajectory(Field(g, {lo.values().begin(), lo.values().end()}),
                                           pair, cfg, model);
            Trajectory v = make_trajectory(std::move(hi), pair, cfg, model);
            for (int s = 0; s < 60; ++s) {
                step(u, model, noise, cfg);
                step(v, model, noise, cfg);
                for (std::size_t i = 0; i < u.state.size(); ++i)
                    CHECK(u.state[i] <= v.state[i]);
            }
        }
    }
}

TEST_CASE("pathwise l1 contraction under shared noise, per step") {
    const TorusGrid g(1, 128);
    const FluxDiffusionModel& burgers = find_model("burgers");
    const NoiseModel noise = make_sigma(g, {{{1, 0}, 0.15, false}});
    const SolverConfig cfg = burgers_config();
    for (std::uint64_t pair = 0; pair < 10; ++pair) {
        Trajectory u = make_trajectory(random_zero_mean_field(g, 0.5, 4, 100 + pair), pair,
                                       cfg, burgers);
        Trajectory v = make_trajectory(random_zero_mean_field(g, 0.5, 4, 200 + pair), pair,
                                       cfg, burgers);
        auto gap = [&]() {
            double acc = 0.0;
            for (std::size_t i = 0; i < u.state.size(); ++i)
                acc += std::abs(u.state[i] - v.state[i]);
            return acc * g.cell_volume();
        };
        double previous = gap();
        for (int s = 0; s < 400; ++s) {
            step(u, burgers, noise, cfg);
            step(v, burgers, noise, cfg);
            const double now = gap();
            CHECK(now <= previous);
            previous = now;
        }
    }
}

TEST_CASE("deterministic substeps never increase the energy") {
    const TorusGrid g(1, 64);
    const NoiseModel noise = make_sigma(g, {{{2, 0}, 0.2, false}});
    for (const char* name : {"burgers", "heat", "porous_medium"}) {
        const FluxDiffusionModel& model = find_model(name);
        SolverConfig cfg = burgers_config();
        Trajectory traj = make_trajectory(random_zero_mean_field(g, 0.5, 4, 33), 7, cfg, model);
        double previous = traj.ledger.dissipation;
        for (int s = 0; s < 500; ++s) {
            step(traj, model, noise, cfg);
            CHECK(traj.ledger.dissipation >= previous - 1e-12);
            previous = traj.ledger.dissipation;
        }
    }
}

TEST_CASE("identical seed and config reproduce the state bitwise") {
    const TorusGrid g(1, 128);
    const FluxDiffusionModel& burgers = find_model("burgers");
    const NoiseModel noise = make_sigma(g, {{{1, 0}, 0.2, false}});
    const SolverConfig cfg = burgers_config();
    auto final_state = [&]() {
        Trajectory traj =
            make_trajectory(random_zero_mean_field(g, 0.5, 4, 12), 777, cfg, burgers);
        run(traj, burgers, noise, cfg, 1.0);
        return std::vector<double>(traj.state.values().begin(), traj.state.values().end());
    };
    const auto a = final_state();
    const auto b = final_state();
    CHECK(std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0);
}

TEST_CASE("leaving the stability envelope aborts with a diagnostic") {
    const TorusGrid g(1, 64);
    const FluxDiffusionModel& burgers = find_model("burgers");
    const NoiseModel noise = make_sigma(g, {{{1, 0}, 1.0, false}});
    SolverConfig cfg;
    cfg.max_speed_estimate = 2.0;
    cfg.state_bound = 0.02;  // immediately exceeded by the noise kick
    Trajectory traj = make_trajectory(Field(g), 5, cfg, burgers);
    CHECK_THROWS_AS(
        [&] {
            for (int i = 0; i < 1000; ++i) step(traj, burgers, noise, cfg);
        }(),
        SolverError);
}

TEST_CASE("two-dimensional solver conserves mean and keeps order") {
    const TorusGrid g(2, 32);
    const FluxDiffusionModel& model = find_model("burgers2d");
    const NoiseModel noise = make_sigma(g, {{{1, 1}, 0.1, false}});
    SolverConfig cfg;
    cfg.max_speed_estimate = 4.0;  // |F1'| + |F2'| at |u| <= 2
    cfg.state_bound = 2.0;

    Trajectory traj = make_trajectory(random_zero_mean_field(g, 0.5, 2, 3), 9, cfg, model);
    const double m0 = mean(traj.state);
    for (int s = 0; s < 300; ++s) step(traj, model, noise, cfg);
    CHECK(std::abs(mean(traj.state) - m0) < 1e-13);

    const Field lo = random_zero_mean_field(g, 0.4, 2, 21);
    Field hi(g, {lo.values().begin(), lo.values().end()});
    for (double& v : hi.values()) v += 0.2;
    Trajectory u = make_trajectory(Field(g, {lo.values().begin(), lo.values().end()}), 4, cfg,
                                   model);
    Trajectory v = make_trajectory(std::move(hi), 4, cfg, model);
    for (int s = 0; s < 100; ++s) {
        step(u, model, noise, cfg);
        step(v, model, noise, cfg);
        for (std::size_t i = 0; i < u.state.size(); ++i) CHECK(u.state[i] <= v.state[i]);
    }
}
