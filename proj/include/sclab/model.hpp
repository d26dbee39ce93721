#pragma once

#include <array>
#include <functional>
#include <string>
#include <vector>

namespace sclab {

using Vec2 = std::array<double, 2>;
using Mat2 = std::array<std::array<double, 2>, 2>;

/// Flux/diffusion pair for  d_t u + div F(u) = div(A(u) grad u) + noise,
/// with derivatives, the primitives used by the conservative diffusion
/// stencil, and the per-axis points where F' changes sign (these make the
/// Engquist-Osher split exact for piecewise-monotone fluxes).
struct FluxDiffusionModel {
    std::string name;
    int dim = 1;

    std::function<Vec2(double)> flux;                  // F
    std::function<Vec2(double)> flux_jacobian;         // F'
    std::function<Vec2(double)> flux_hessian;          // F''
    std::function<Mat2(double)> diffusion;             // A, symmetric PSD
    std::function<Mat2(double)> diffusion_derivative;  // A'
    std::function<Mat2(double)> diffusion_primitive;   // B(u) = int_0^u A

    std::array<std::vector<double>, 2> flux_critical_points;

    // Points where some derivative is discontinuous (e.g. |u| at 0); the
    // finite-difference consistency check skips a neighborhood of these.
    std::vector<double> derivative_kinks;

    // Constants c0, c1 with |F''| <= c0 + c1|xi| and |A'| <= c0 + c1|xi|.
    double growth_c0 = 0.0;
    double growth_c1 = 0.0;

    double max_wave_speed(double state_bound) const;
    double max_diffusion(double state_bound) const;
};

struct DecayReport {
    std::vector<double> samples;  // strictly decreasing, length >= 4
    std::vector<double> values;
    double fitted_exponent = 0.0;
    double fit_residual = 0.0;
};

struct Interval {
    double lo = 0.0;
    double hi = 0.0;
    double length() const { return hi - lo; }
};

struct EtaOptions {
    Interval xi_window{-50.0, 50.0};
    int quadrature_cells = 4096;
    int tau_points = 2001;
    int khat_angles = 64;  // d = 2 only; d = 1 uses {+1, -1}
};

struct EtaResult {
    double value = 0.0;
    double tau_at_sup = 0.0;
    bool sup_on_tau_boundary = false;  // maximizer sat on the search edge
};

/// Nonlinearity-diffusivity integral: sup over (tau, khat) of the midpoint
/// quadrature of  lambda(Acal + lambda) / ((Acal + lambda)^2 +
/// lambda^beta |F'(xi).khat + tau|^2)  over the xi window, where
/// Acal = A(xi) : khat (x) khat. The tau search is a grid scan followed by
/// one golden-section refinement around the best grid point.
EtaResult eta(const FluxDiffusionModel& model, double lambda, double beta,
              const EtaOptions& opts = {});

struct DeltaOptions {
    Interval xi_window{-50.0, 50.0};
    int quadrature_cells = 8192;
    int t_panels = 512;  // 4-point Gauss panels on [0, t_max]
    int khat_angles = 64;
    double t_max = 40.0;
};

/// int_0^{t_max} e^{-t} sup_{tau,khat} L1({xi : |F'(xi).khat + tau| <= eps t}) dt.
/// The sup over tau is exact for the discretized xi set (sorted window scan),
/// so no tau grid is involved.
double delta_nondegeneracy(const FluxDiffusionModel& model, double eps,
                           const DeltaOptions& opts = {});

/// Log-log least squares; fitted_exponent is the slope, fit_residual the
/// RMS log residual.
DecayReport fit_decay_exponent(std::vector<double> samples, std::vector<double> values);

const std::vector<FluxDiffusionModel>& builtin_models();
const FluxDiffusionModel& find_model(const std::string& name);

/// Max relative mismatch between each analytic derivative and a centered
/// difference of its parent, sampled over the window.
double derivative_consistency_error(const FluxDiffusionModel& model, Interval window,
                                    int samples = 257);

std::string decay_report_to_json(const DecayReport& report);

}  // namespace sclab
