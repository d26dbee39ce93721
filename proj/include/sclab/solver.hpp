#pragma once

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "sclab/grid.hpp"
#include "sclab/model.hpp"
#include "sclab/noise.hpp"

namespace sclab {

enum class FluxScheme { engquist_osher, lax_friedrichs };

struct SolverConfig {
    double cfl = 0.4;
    FluxScheme flux_scheme = FluxScheme::engquist_osher;
    double dt_cap = 1e-2;
    double max_speed_estimate = 2.0;
    double diffusion_stability_factor = 0.25;
    // |u| envelope assumed by the dt derivation; exceeding it aborts the
    // run rather than silently losing monotonicity.
    double state_bound = 2.0;
};

/// dt = min(cfl dx / max_speed, factor dx^2 / max_diffusion, dt_cap), with
/// the diffusion scan taken over |xi| <= state_bound and summed over axes.
double effective_dt(const SolverConfig& cfg, const TorusGrid& grid,
                    const FluxDiffusionModel& model);

/// Running tallies for the discrete Ito energy identity. ito_input is the
/// realized quadratic-variation sum (1/2)||sigma||^2 sum (dW)^2, which makes
/// the identity exact pathwise and has mean (1/2)||sigma||^2 t.
struct EnergyLedger {
    double dissipation = 0.0;
    double ito_input = 0.0;
    double martingale = 0.0;
    double initial_energy = 0.0;  // (1/2)||u(0)||_{L^2}^2
};

struct Trajectory {
    Field state;
    double time = 0.0;
    std::uint64_t step_count = 0;
    NoisePath noise;
    EnergyLedger ledger;
    double dt = 0.0;

    Trajectory(Field initial, std::uint64_t seed, double dt_value);
};

class SolverError : public std::runtime_error {
public:
    SolverError(const std::string& what, std::uint64_t step, double time, double dt);
    std::uint64_t step;
    double time;
    double dt;
};

Trajectory make_trajectory(Field initial, std::uint64_t seed, const SolverConfig& cfg,
                           const FluxDiffusionModel& model);

/// One operator-split step: monotone conservative flux update, conservative
/// diffusion update through the Kirchhoff primitives, then the additive
/// noise kick. Ledger terms follow the start-of-step state convention.
void step(Trajectory& traj, const FluxDiffusionModel& model, const NoiseModel& noise_model,
          const SolverConfig& cfg);

struct Observer {
    std::uint64_t every_steps = 1;
    std::function<void(const Trajectory&)> callback;
};

/// Steps the trajectory to llround(t_end/dt) total steps (final time within
/// one dt of t_end). Observers fire at step 0, every interval, and at the
/// final step.
void run(Trajectory& traj, const FluxDiffusionModel& model, const NoiseModel& noise_model,
         const SolverConfig& cfg, double t_end, const std::vector<Observer>& observers = {});

/// (1/2)||u(t)||^2 - (1/2)||u(0)||^2 + dissipation - ito_input - martingale.
double energy_balance_residual(const Trajectory& traj);

/// Engquist-Osher split fluxes, exact for piecewise-monotone F via the
/// recorded sign-change points. Exposed for the oracle tests.
double eo_positive_part(const FluxDiffusionModel& model, int axis, double u);
double eo_negative_part(const FluxDiffusionModel& model, int axis, double u);

}  // namespace sclab
