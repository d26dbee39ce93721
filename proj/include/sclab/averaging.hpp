#pragma once

#include <complex>
#include <string>
#include <vector>

#include "sclab/grid.hpp"
#include "sclab/kinetic.hpp"
#include "sclab/model.hpp"

namespace sclab {

/// Parameters of the regularizing operators gamma (-Laplace)^alpha + theta I
/// with alpha tied to beta by alpha = (beta - 1)/beta.
struct SemigroupParams {
    double gamma = 0.05;
    double theta = 0.05;
    double beta = 1.5;
    double alpha = 0.0;  // derived

    SemigroupParams(double gamma_, double theta_, double beta_);

    /// Mode weight omega_k = gamma |k|^{2 alpha - 1} + theta |k|^{-1}, k != 0.
    double omega(double k_norm) const;
    /// Decay rate gamma |k|^{2 alpha} + theta (this is omega_k |k|).
    double decay_rate(double k_norm) const;
};

/// Fourier symbol of the semigroup at one (k, xi, t):
/// exp(-(i F'(xi).k + A(xi):k(x)k + gamma|k|^{2 alpha} + theta) t).
std::complex<double> semigroup_mode(const SemigroupParams& params,
                                    const FluxDiffusionModel& model, Vec2 k, double xi,
                                    double t);

/// Time trace of one Fourier mode of the kinetic Duhamel term.
struct ModeTrace {
    std::array<int, 2> freq{0, 0};
    double k_norm = 0.0;
    std::vector<double> times;
    std::vector<std::complex<double>> samples;
    double time_energy = 0.0;  // int_0^T |u0_hat(k,t)|^2 dt, trapezoid
    double chi_energy = 0.0;   // int |chi_hat(xi,k,0)|^2 dxi
};

/// Evolves the kinetic density of zero-mean data under the semigroup and
/// returns the per-mode traces for the half spectrum (k and -k carry the
/// same energy by Hermitian symmetry).
std::vector<ModeTrace> u0_term(const Field& u0, const SemigroupParams& params,
                               const FluxDiffusionModel& model, const XiGrid& xi,
                               double t_end, int t_samples = 256);

struct RatioEntry {
    std::array<int, 2> freq{0, 0};
    double k_norm = 0.0;
    double weighted_energy = 0.0;  // |k|^{1+kappa} omega_k^{1-kappa} * time_energy
    double chi_energy = 0.0;
    double ratio = 0.0;
};

struct RatioReport {
    double kappa = 0.0;
    std::vector<RatioEntry> entries;
    double max_ratio = 0.0;
    double log_slope = 0.0;  // OLS slope of log ratio vs log |k|
    int family_size = 0;

    void merge(const RatioReport& other);
};

/// Per-mode ratio of the weighted time energy to the kinetic energy of the
/// initial data; bounded ratios across k are the discrete expression of the
/// velocity-averaging estimate. kappa should come from a decay fit.
RatioReport verify_u0_estimate(const Field& u0, const SemigroupParams& params,
                               const FluxDiffusionModel& model, const XiGrid& xi, double t_end,
                               double kappa, int t_samples = 256);

std::string ratio_report_to_json(const RatioReport& report);

}  // namespace sclab
