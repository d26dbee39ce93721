#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "sclab/grid.hpp"
#include "sclab/model.hpp"
#include "sclab/noise.hpp"
#include "sclab/solver.hpp"

namespace sclab {

/// Uniform midpoint grid in the kinetic variable.
struct XiGrid {
    double xi_min = -2.0;
    double xi_max = 2.0;
    int cells = 256;

    XiGrid(double lo, double hi, int n);
    double spacing() const { return (xi_max - xi_min) / cells; }
    double center(int j) const { return xi_min + (j + 0.5) * spacing(); }
    /// Index of the cell containing xi (clamped to the window).
    int locate(double xi) const;
};

/// chi (signed indicator, values in {-1,0,1}) or the Heaviside variant
/// (values in {0,1}) sampled at the xi midpoints, one row per spatial cell.
struct KineticDensity {
    const TorusGrid* grid = nullptr;
    XiGrid xi{-2.0, 2.0, 256};
    std::vector<signed char> values;  // cell-major: values[cell * xi.cells + j]

    signed char at(std::size_t cell, int j) const { return values[cell * xi.cells + j]; }
};

/// Midpoint-sampled chi(xi, u(x)): 1 on 0 < xi < u, -1 on u < xi < 0.
KineticDensity chi(const Field& field, const XiGrid& xi);

/// Heaviside variant H(u - xi).
KineticDensity chi_heaviside(const Field& field, const XiGrid& xi);

/// Cellwise int eta'(xi) chi^u dxi by midpoint quadrature; equals
/// eta(u) - eta(0) within O(xi spacing) sup|eta'|.
Field representation(const Field& field, const XiGrid& xi,
                     const std::function<double(double)>& eta_prime);

/// ||u - v||_{L^1} assembled from kinetic functions,
/// int (|chi^u| + |chi^v| - 2 chi^u chi^v) dxi per cell.
double l1_from_kinetic(const Field& u, const Field& v, const XiGrid& xi);

/// int chi~^u (1 - chi~^v) dxi per cell, i.e. ||(u - v)_+||_{L^1}.
double positive_part_from_kinetic(const Field& u, const Field& v, const XiGrid& xi);

/// Smooth test function phi(xi, x, t) with the analytic derivatives the
/// weak form needs. Position arguments use the cell-center coordinates.
struct KineticTestFunction {
    std::function<double(double xi, double x, double y, double t)> value;
    std::function<double(double, double, double, double)> dxi;
    std::function<Vec2(double, double, double, double)> grad;    // d/dx_i
    std::function<Mat2(double, double, double, double)> hessian; // d^2/dx_i dx_j
};

/// Per-step record of a run, enough to reassemble every term of the weak
/// kinetic formulation. Deterministic states are reconstructed from the
/// stored noise increments.
struct TrajectoryHistory {
    const TorusGrid* grid = nullptr;
    double dt = 0.0;
    std::vector<double> times;                 // length steps + 1
    std::vector<std::vector<double>> states;   // length steps + 1
    std::vector<double> dissipation;           // per step
    std::vector<double> increments;            // per step
    double last_dissipation = 0.0;             // recorder state

    std::size_t steps() const { return dissipation.size(); }
};

/// Observer wiring: returns an Observer that appends every step to the
/// history (call run() with every_steps = 1).
Observer record_history(TrajectoryHistory& history);

/// Assembles the discrete weak kinetic formulation for one recorded run and
/// returns the signed residual (zero for exact solutions, first order in
/// (dx, dt, xi spacing) for the scheme).
double weak_formulation_residual(const TrajectoryHistory& history,
                                 const FluxDiffusionModel& model,
                                 const NoiseModel& noise_model,
                                 const KineticTestFunction& phi, const XiGrid& xi);

}  // namespace sclab
