#include "sclab/solver.hpp"

#include <algorithm>
#include <cmath>

namespace sclab {

namespace {

// Signed variation of F over [0, u] restricted to pieces where F' has the
// requested sign. Pieces are delimited by the recorded sign-change points,
// so each piece uses only two flux evaluations and the result is exact.
double signed_variation(const FluxDiffusionModel& model, int axis, double u, bool positive) {
    if (u == 0.0) return 0.0;
    const double lo = std::min(0.0, u);
    const double hi = std::max(0.0, u);
    const double sign = u > 0.0 ? 1.0 : -1.0;
    const auto& crit = model.flux_critical_points[axis];
    double acc = 0.0;
    double a = lo;
    auto piece = [&](double p0, double p1) {
        const double mid = 0.5 * (p0 + p1);
        const double slope = model.flux_jacobian(mid)[axis];
        if ((positive && slope > 0.0) || (!positive && slope < 0.0))
            acc += model.flux(p1)[axis] - model.flux(p0)[axis];
    };
    for (double c : crit) {
        if (c <= a || c >= hi) continue;
        piece(a, c);
        a = c;
    }
    piece(a, hi);
    return sign * acc;
}

}  // namespace

double eo_positive_part(const FluxDiffusionModel& model, int axis, double u) {
    return model.flux(0.0)[axis] + signed_variation(model, axis, u, true);
}

double eo_negative_part(const FluxDiffusionModel& model, int axis, double u) {
    return signed_variation(model, axis, u, false);
}

double effective_dt(const SolverConfig& cfg, const TorusGrid& grid,
                    const FluxDiffusionModel& model) {
    const double h = grid.spacing();
    double dt = cfg.dt_cap;
    if (cfg.max_speed_estimate > 0.0) dt = std::min(dt, cfg.cfl * h / cfg.max_speed_estimate);
    const double diff = model.max_diffusion(cfg.state_bound) * model.dim;
    if (diff > 0.0) dt = std::min(dt, cfg.diffusion_stability_factor * h * h / diff);
    if (!(dt > 0.0)) throw std::invalid_argument("effective_dt: non-positive step");
    return dt;
}

Trajectory::Trajectory(Field initial, std::uint64_t seed, double dt_value)
    : state(std::move(initial)), noise(seed, dt_value), dt(dt_value) {}

SolverError::SolverError(const std::string& what, std::uint64_t step_, double time_, double dt_)
    : std::runtime_error(what + " (step " + std::to_string(step_) + ", t = " +
                         std::to_string(time_) + ", dt = " + std::to_string(dt_) + ")"),
      step(step_),
      time(time_),
      dt(dt_) {}

Trajectory make_trajectory(Field initial, std::uint64_t seed, const SolverConfig& cfg,
                           const FluxDiffusionModel& model) {
    const double dt = effective_dt(cfg, initial.grid(), model);
    Trajectory traj(std::move(initial), seed, dt);
    const double l2 = l2_norm(traj.state);
    traj.ledger.initial_energy = 0.5 * l2 * l2;
    return traj;
}

namespace {

void hyperbolic_substep(Field& u, const FluxDiffusionModel& model, const SolverConfig& cfg,
                        double dt, std::vector<double>& flux_buf) {
    const TorusGrid& g = u.grid();
    const int n = g.cells_per_axis();
    const int mask = n - 1;
    const double lambda = dt / g.spacing();
    const bool lf = cfg.flux_scheme == FluxScheme::lax_friedrichs;
    const double alpha = cfg.max_speed_estimate;

    auto interface_flux = [&](int axis, double a, double b) {
        if (lf)
            return 0.5 * (model.flux(a)[axis] + model.flux(b)[axis]) - 0.5 * alpha * (b - a);
        return eo_positive_part(model, axis, a) + eo_negative_part(model, axis, b);
    };

    if (g.dim() == 1) {
        flux_buf.resize(static_cast<std::size_t>(n));
        auto v = u.values();
        for (int i = 0; i < n; ++i)
            flux_buf[i] = interface_flux(0, v[(i - 1) & mask], v[i]);  // flux at i - 1/2
        for (int i = 0; i < n; ++i) v[i] -= lambda * (flux_buf[(i + 1) & mask] - flux_buf[i]);
        return;
    }

    auto v = u.values();
    flux_buf.assign(u.size(), 0.0);
    // x sweep: flux_buf[i] holds the flux through the left face of cell i.
    for (int iy = 0; iy < n; ++iy)
        for (int ix = 0; ix < n; ++ix)
            flux_buf[g.flat_index(ix, iy)] =
                interface_flux(0, v[g.flat_index(ix - 1, iy)], v[g.flat_index(ix, iy)]);
    std::vector<double> divergence(u.size(), 0.0);
    for (int iy = 0; iy < n; ++iy)
        for (int ix = 0; ix < n; ++ix)
            divergence[g.flat_index(ix, iy)] =
                flux_buf[g.flat_index(ix + 1, iy)] - flux_buf[g.flat_index(ix, iy)];
    // y sweep.
    for (int iy = 0; iy < n; ++iy)
        for (int ix = 0; ix < n; ++ix)
            flux_buf[g.flat_index(ix, iy)] =
                interface_flux(1, v[g.flat_index(ix, iy - 1)], v[g.flat_index(ix, iy)]);
    for (int iy = 0; iy < n; ++iy)
        for (int ix = 0; ix < n; ++ix)
            divergence[g.flat_index(ix, iy)] +=
                flux_buf[g.flat_index(ix, iy + 1)] - flux_buf[g.flat_index(ix, iy)];
    for (std::size_t i = 0; i < u.size(); ++i) v[i] -= lambda * divergence[i];
}

bool has_diffusion(const FluxDiffusionModel& model) {
    // Cheap structural probe at a few states; catalog models with A = 0
    // return exactly zero everywhere.
    for (double xi : {-1.7, -0.3, 0.4, 1.9}) {
        const Mat2 a = model.diffusion(xi);
        for (int r = 0; r < model.dim; ++r)
            for (int c = 0; c < model.dim; ++c)
                if (a[r][c] != 0.0) return true;
    }
    return false;
}

void diffusion_substep(Field& u, const FluxDiffusionModel& model, double dt,
                       std::vector<double>& prim_buf) {
    const TorusGrid& g = u.grid();
    const int n = g.cells_per_axis();
    const int mask = n - 1;
    const double mu = dt / (g.spacing() * g.spacing());
    auto v = u.values();

    if (g.dim() == 1) {
        prim_buf.resize(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) prim_buf[i] = model.diffusion_primitive(v[i])[0][0];
        const std::vector<double>& b = prim_buf;
        std::vector<double> lap(n);
        for (int i = 0; i < n; ++i)
            lap[i] = b[(i + 1) & mask] - 2.0 * b[i] + b[(i - 1) & mask];
        for (int i = 0; i < n; ++i) v[i] += mu * lap[i];
        return;
    }

    std::vector<double> bxx(u.size()), byy(u.size()), bxy(u.size());
    for (std::size_t i = 0; i < u.size(); ++i) {
        const Mat2 b = model.diffusion_primitive(v[i]);
        bxx[i] = b[0][0];
        byy[i] = b[1][1];
        bxy[i] = b[0][1];
    }
    std::vector<double> update(u.size(), 0.0);
    for (int iy = 0; iy < n; ++iy) {
        for (int ix = 0; ix < n; ++ix) {
            const std::size_t c = g.flat_index(ix, iy);
            double lap = bxx[g.flat_index(ix + 1, iy)] - 2.0 * bxx[c] + bxx[g.flat_index(ix - 1, iy)];
            lap += byy[g.flat_index(ix, iy + 1)] - 2.0 * byy[c] + byy[g.flat_index(ix, iy - 1)];
            // 2 d_x d_y B_xy with the wide centered stencil.
            lap += 0.5 * (bxy[g.flat_index(ix + 1, iy + 1)] - bxy[g.flat_index(ix + 1, iy - 1)] -
                          bxy[g.flat_index(ix - 1, iy + 1)] + bxy[g.flat_index(ix - 1, iy - 1)]);
            update[c] = lap;
        }
    }
    for (std::size_t i = 0; i < u.size(); ++i) v[i] += mu * update[i];
}

}  // namespace

void step(Trajectory& traj, const FluxDiffusionModel& model, const NoiseModel& noise_model,
          const SolverConfig& cfg) {
    thread_local std::vector<double> flux_buf;
    thread_local std::vector<double> prim_buf;

    Field& u = traj.state;
    const double volume = u.grid().cell_volume();

    double energy_before = 0.0;
    for (double x : u.values()) energy_before += x * x;
    energy_before *= 0.5 * volume;

    double mart_inner = 0.0;
    {
        auto uv = u.values();
        auto sv = noise_model.sigma.values();
        for (std::size_t i = 0; i < uv.size(); ++i) mart_inner += uv[i] * sv[i];
        mart_inner *= volume;
    }

    hyperbolic_substep(u, model, cfg, traj.dt, flux_buf);
    if (has_diffusion(model)) diffusion_substep(u, model, traj.dt, prim_buf);

    double energy_det = 0.0;
    double sup = 0.0;
    for (double x : u.values()) {
        energy_det += x * x;
        sup = std::max(sup, std::abs(x));
    }
    energy_det *= 0.5 * volume;

    if (!std::isfinite(energy_det))
        throw SolverError("solver aborted: non-finite state", traj.step_count, traj.time, traj.dt);
    if (sup > cfg.state_bound)
        throw SolverError("solver aborted: state left the stability envelope |u| <= " +
                              std::to_string(cfg.state_bound),
                          traj.step_count, traj.time, traj.dt);

    const double dw = traj.noise.next_increment();
    {
        auto uv = u.values();
        auto sv = noise_model.sigma.values();
        for (std::size_t i = 0; i < uv.size(); ++i) uv[i] += sv[i] * dw;
    }

    traj.ledger.dissipation += energy_before - energy_det;
    traj.ledger.ito_input += 0.5 * noise_model.l2_norm_sq * dw * dw;
    traj.ledger.martingale += mart_inner * dw;
    traj.time += traj.dt;
    ++traj.step_count;
}

void run(Trajectory& traj, const FluxDiffusionModel& model, const NoiseModel& noise_model,
         const SolverConfig& cfg, double t_end, const std::vector<Observer>& observers) {
    if (t_end + 0.5 * traj.dt < traj.time)
        throw std::invalid_argument("run: t_end precedes the trajectory time");
    const auto target = static_cast<std::uint64_t>(std::llround(t_end / traj.dt));
    for (const auto& obs : observers) obs.callback(traj);
    while (traj.step_count < target) {
        step(traj, model, noise_model, cfg);
        for (const auto& obs : observers)
            if (traj.step_count % obs.every_steps == 0 || traj.step_count == target)
                obs.callback(traj);
    }
}

double energy_balance_residual(const Trajectory& traj) {
    const double l2 = l2_norm(traj.state);
    return 0.5 * l2 * l2 - traj.ledger.initial_energy + traj.ledger.dissipation -
           traj.ledger.ito_input - traj.ledger.martingale;
}

}  // namespace sclab
