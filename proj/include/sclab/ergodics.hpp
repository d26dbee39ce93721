#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "sclab/grid.hpp"
#include "sclab/model.hpp"
#include "sclab/noise.hpp"
#include "sclab/solver.hpp"

namespace sclab {

/// Time-uniform samples of a scalar observable; the discrete realization of
/// the time-averaged measure pushed through the observable.
struct EmpiricalMeasure {
    std::string observable_name;
    std::vector<std::pair<double, double>> samples;  // (time, value), sorted
    double window_start = 0.0;
    double window_end = 0.0;

    std::vector<double> values() const;
};

using Observable = std::function<double(const Field&)>;

struct KbOptions {
    double snapshot_dt = 0.01;
    double burn_in_fraction = 0.0;
};

/// Runs the trajectory to time T and samples the observable at the snapshot
/// cadence, discarding the leading burn-in fraction of the window.
EmpiricalMeasure kb_average(Trajectory& traj, const FluxDiffusionModel& model,
                            const NoiseModel& noise_model, const SolverConfig& cfg,
                            const Observable& observable, const std::string& name, double T,
                            const KbOptions& options = {});

/// Exact W1 between two one-dimensional empirical measures via sorted-sample
/// coupling; unequal sizes are equalized by linear quantile interpolation.
double wasserstein1(const EmpiricalMeasure& a, const EmpiricalMeasure& b);

/// (1/T) int_0^T ||u(t)||_{W^{s,q}} dt by trapezoid over snapshots.
double tightness_diagnostic(Trajectory& traj, const FluxDiffusionModel& model,
                            const NoiseModel& noise_model, const SolverConfig& cfg, double s,
                            double q, double T, double snapshot_dt = 0.01);

struct CouplingRun {
    std::vector<std::pair<double, double>> l1_gap_history;  // at snapshots
    std::vector<double> stopping_times;
    std::vector<bool> small_noise_flags;  // per stopping-time window
    std::vector<std::pair<double, double>> l1_u_history;
    std::vector<std::pair<double, double>> l1_v_history;
    double initial_gap = 0.0;
    double final_gap = 0.0;
    double flagged_fraction = 0.0;
    std::uint64_t gap_violations = 0;  // per-step exact monotonicity breaches
    double dt = 0.0;
};

/// Two trajectories driven by one noise realization. Records the L1 gap per
/// snapshot (and checks per-step monotonicity exactly), the recursive
/// stopping times into the 2*kappa_hat ball spaced at least T apart, and
/// flags the windows where the anchored noise stays below kappa_tilde.
CouplingRun coupling_experiment(const Field& u0, const Field& v0,
                                const FluxDiffusionModel& model, const NoiseModel& noise_model,
                                const SolverConfig& cfg, std::uint64_t seed, double T,
                                double kappa_hat, double kappa_tilde, double t_end,
                                double snapshot_dt = 0.01);

/// Windowed time-average of a recorded scalar series.
double small_ball_average(const EmpiricalMeasure& series, double t0, double t1);

std::string coupling_run_to_json(const CouplingRun& run);
std::string empirical_measure_to_json(const EmpiricalMeasure& m);

}  // namespace sclab
