#include "sclab/kinetic.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace sclab {

XiGrid::XiGrid(double lo, double hi, int n) : xi_min(lo), xi_max(hi), cells(n) {
    if (!(hi > lo)) throw std::invalid_argument("XiGrid: empty window");
    if (n < 64) throw std::invalid_argument("XiGrid: need at least 64 cells");
}

int XiGrid::locate(double xi) const {
    const int j = static_cast<int>(std::floor((xi - xi_min) / spacing()));
    return std::clamp(j, 0, cells - 1);
}

namespace {

void require_covered(const Field& field, const XiGrid& xi) {
    const double margin = xi.spacing();
    for (double v : field.values()) {
        if (v < xi.xi_min + margin || v > xi.xi_max - margin)
            throw std::invalid_argument("xi window too small for field value " +
                                        std::to_string(v));
    }
    if (0.0 < xi.xi_min || 0.0 > xi.xi_max)
        throw std::invalid_argument("xi window must contain 0");
}

}  // namespace

KineticDensity chi(const Field& field, const XiGrid& xi) {
    require_covered(field, xi);
    KineticDensity d;
    d.grid = &field.grid();
    d.xi = xi;
    d.values.assign(field.size() * static_cast<std::size_t>(xi.cells), 0);
    for (std::size_t c = 0; c < field.size(); ++c) {
        const double u = field[c];
        signed char* row = d.values.data() + c * xi.cells;
        if (u > 0.0) {
            for (int j = 0; j < xi.cells; ++j) {
                const double z = xi.center(j);
                if (z > 0.0 && z < u) row[j] = 1;
            }
        } else if (u < 0.0) {
            for (int j = 0; j < xi.cells; ++j) {
                const double z = xi.center(j);
                if (z > u && z < 0.0) row[j] = -1;
            }
        }
    }
    return d;
}

KineticDensity chi_heaviside(const Field& field, const XiGrid& xi) {
    require_covered(field, xi);
    KineticDensity d;
    d.grid = &field.grid();
    d.xi = xi;
    d.values.assign(field.size() * static_cast<std::size_t>(xi.cells), 0);
    for (std::size_t c = 0; c < field.size(); ++c) {
        const double u = field[c];
        signed char* row = d.values.data() + c * xi.cells;
        for (int j = 0; j < xi.cells; ++j)
            if (u - xi.center(j) >= 0.0) row[j] = 1;
    }
    return d;
}

Field representation(const Field& field, const XiGrid& xi,
                     const std::function<double(double)>& eta_prime) {
    const KineticDensity d = chi(field, xi);
    std::vector<double> out(field.size(), 0.0);
    const double dxi = xi.spacing();
    std::vector<double> eta_vals(xi.cells);
    for (int j = 0; j < xi.cells; ++j) eta_vals[j] = eta_prime(xi.center(j));
    for (std::size_t c = 0; c < field.size(); ++c) {
        double s = 0.0;
        const signed char* row = d.values.data() + c * xi.cells;
        for (int j = 0; j < xi.cells; ++j)
            if (row[j] != 0) s += eta_vals[j] * row[j];
        out[c] = s * dxi;
    }
    return Field(field.grid(), std::move(out));
}

double l1_from_kinetic(const Field& u, const Field& v, const XiGrid& xi) {
    const KineticDensity du = chi(u, xi);
    const KineticDensity dv = chi(v, xi);
    const double dxi = xi.spacing();
    double total = 0.0;
    for (std::size_t c = 0; c < u.size(); ++c) {
        const signed char* ru = du.values.data() + c * xi.cells;
        const signed char* rv = dv.values.data() + c * xi.cells;
        long count = 0;
        for (int j = 0; j < xi.cells; ++j)
            count += std::abs(ru[j]) + std::abs(rv[j]) - 2 * ru[j] * rv[j];
        total += static_cast<double>(count) * dxi;
    }
    return total * u.grid().cell_volume();
}

double positive_part_from_kinetic(const Field& u, const Field& v, const XiGrid& xi) {
    const KineticDensity du = chi_heaviside(u, xi);
    const KineticDensity dv = chi_heaviside(v, xi);
    const double dxi = xi.spacing();
    double total = 0.0;
    for (std::size_t c = 0; c < u.size(); ++c) {
        const signed char* ru = du.values.data() + c * xi.cells;
        const signed char* rv = dv.values.data() + c * xi.cells;
        long count = 0;
        for (int j = 0; j < xi.cells; ++j) count += ru[j] * (1 - rv[j]);
        total += static_cast<double>(count) * dxi;
    }
    return total * u.grid().cell_volume();
}

Observer record_history(TrajectoryHistory& history) {
    Observer obs;
    obs.every_steps = 1;
    obs.callback = [&history](const Trajectory& traj) {
        if (history.times.empty()) {
            history.grid = &traj.state.grid();
            history.dt = traj.dt;
            history.times.push_back(traj.time);
            history.states.emplace_back(traj.state.values().begin(), traj.state.values().end());
            history.last_dissipation = traj.ledger.dissipation;
            return;
        }
        history.times.push_back(traj.time);
        history.states.emplace_back(traj.state.values().begin(), traj.state.values().end());
        history.dissipation.push_back(traj.ledger.dissipation - history.last_dissipation);
        history.last_dissipation = traj.ledger.dissipation;
        history.increments.push_back(traj.noise.increment_at(traj.noise.step_index() - 1));
    };
    return obs;
}

namespace {

// int_a^b g(xi) dxi by composite 4-point Gauss panels sized against the xi
// spacing; effectively exact for the smooth test functions used here.
double interval_integral(double a, double b, double ref_spacing,
                         const std::function<double(double)>& g) {
    if (a == b) return 0.0;
    const double lo = std::min(a, b), hi = std::max(a, b);
    const int panels =
        std::clamp(static_cast<int>(std::ceil((hi - lo) / ref_spacing)), 1, 32);
    static constexpr double gx[4] = {-0.8611363115940526, -0.3399810435848563,
                                     0.3399810435848563, 0.8611363115940526};
    static constexpr double gw[4] = {0.3478548451374538, 0.6521451548625461,
                                     0.6521451548625461, 0.3478548451374538};
    const double w = (hi - lo) / panels;
    double s = 0.0;
    for (int p = 0; p < panels; ++p) {
        const double mid = lo + (p + 0.5) * w;
        for (int q = 0; q < 4; ++q) s += gw[q] * g(mid + 0.5 * w * gx[q]);
    }
    s *= 0.5 * w;
    return a < b ? s : -s;
}

}  // namespace

double weak_formulation_residual(const TrajectoryHistory& history,
                                 const FluxDiffusionModel& model,
                                 const NoiseModel& noise_model,
                                 const KineticTestFunction& phi, const XiGrid& xi) {
    if (history.times.size() < 2)
        throw std::invalid_argument("weak_formulation_residual: history is empty");
    const TorusGrid& g = *history.grid;
    const int n = g.cells_per_axis();
    const double volume = g.cell_volume();
    const double dt = history.dt;
    const std::size_t steps = history.steps();
    const double t_final = history.times.back();

    auto cell_x = [&](std::size_t c) { return (static_cast<double>(c % n) + 0.5) * g.spacing(); };
    auto cell_y = [&](std::size_t c) {
        return g.dim() == 2 ? (static_cast<double>(c / n) + 0.5) * g.spacing() : 0.0;
    };

    // chi^u integrated against a function of xi, cellwise exact interval
    // form: int chi(xi, u) f(xi) dxi = int_0^u f.
    auto chi_pairing = [&](const std::vector<double>& state,
                           const std::function<double(double, std::size_t)>& f) {
        double acc = 0.0;
        for (std::size_t c = 0; c < state.size(); ++c)
            acc += interval_integral(0.0, state[c], xi.spacing(),
                                     [&](double z) { return f(z, c); });
        return acc * volume;
    };

    double lhs = 0.0;
    // -sum_n int chi^{n+1} (phi(t_{n+1}) - phi(t_n)) - int chi^0 phi(0):
    // the discrete pairing that telescopes exactly against the Ito terms.
    for (std::size_t s = 0; s < steps; ++s) {
        const double t0 = history.times[s];
        const double t1 = history.times[s + 1];
        lhs -= chi_pairing(history.states[s + 1], [&](double z, std::size_t c) {
            return phi.value(z, cell_x(c), cell_y(c), t1) - phi.value(z, cell_x(c), cell_y(c), t0);
        });
    }
    lhs -= chi_pairing(history.states[0], [&](double z, std::size_t c) {
        return phi.value(z, cell_x(c), cell_y(c), history.times[0]);
    });
    (void)t_final;  // phi is required to vanish at the final time

    double transport = 0.0, diffusion = 0.0, measure = 0.0, ito = 0.0, martingale = 0.0;
    std::vector<double> det_state(g.cell_count());
    for (std::size_t s = 0; s < steps; ++s) {
        const double t = history.times[s];
        const std::vector<double>& u_old = history.states[s];
        const std::vector<double>& u_new = history.states[s + 1];
        const double dw = history.increments[s];
        auto sv = noise_model.sigma.values();
        for (std::size_t c = 0; c < det_state.size(); ++c) det_state[c] = u_new[c] - sv[c] * dw;

        transport += dt * chi_pairing(u_old, [&](double z, std::size_t c) {
            const Vec2 fp = model.flux_jacobian(z);
            const Vec2 gr = phi.grad(z, cell_x(c), cell_y(c), t);
            return fp[0] * gr[0] + (model.dim == 2 ? fp[1] * gr[1] : 0.0);
        });
        diffusion += dt * chi_pairing(u_old, [&](double z, std::size_t c) {
            const Mat2 a = model.diffusion(z);
            const Mat2 h = phi.hessian(z, cell_x(c), cell_y(c), t);
            double acc = a[0][0] * h[0][0];
            if (model.dim == 2)
                acc += a[1][1] * h[1][1] + 2.0 * a[0][1] * h[0][1];
            return acc;
        });

        // Step dissipation distributed over the swept intervals in
        // proportion to |du|; the mean of phi_xi over a swept interval is
        // the exact difference quotient of phi.
        double total_sweep = 0.0;
        for (std::size_t c = 0; c < det_state.size(); ++c)
            total_sweep += std::abs(det_state[c] - u_old[c]);
        if (total_sweep > 0.0 && history.dissipation[s] != 0.0) {
            const double mass = history.dissipation[s] / total_sweep;
            for (std::size_t c = 0; c < det_state.size(); ++c) {
                const double a = u_old[c], b = det_state[c];
                if (a == b) continue;
                const double avg_phi_xi =
                    (phi.value(b, cell_x(c), cell_y(c), t) - phi.value(a, cell_x(c), cell_y(c), t)) /
                    (b - a);
                measure += mass * std::abs(b - a) * avg_phi_xi;
            }
        }

        double ito_inner = 0.0, mart_inner = 0.0;
        for (std::size_t c = 0; c < det_state.size(); ++c) {
            const double sig = sv[c];
            if (sig == 0.0) continue;
            ito_inner += sig * sig * phi.dxi(det_state[c], cell_x(c), cell_y(c), t);
            mart_inner += sig * phi.value(det_state[c], cell_x(c), cell_y(c), t);
        }
        ito += 0.5 * dw * dw * ito_inner * volume;
        martingale += dw * mart_inner * volume;
    }

    const double rhs = transport + diffusion - measure + ito + martingale;
    return lhs - rhs;
}

}  // namespace sclab
