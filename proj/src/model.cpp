#include "sclab/model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "sclab/json_writer.hpp"

namespace sclab {

namespace {

Vec2 unit_direction(int angle_index, int total, int dim) {
    if (dim == 1) return angle_index == 0 ? Vec2{1.0, 0.0} : Vec2{-1.0, 0.0};
    const double ang = 2.0 * std::numbers::pi * angle_index / total;
    return {std::cos(ang), std::sin(ang)};
}

int direction_count(const FluxDiffusionModel& model, int khat_angles) {
    return model.dim == 1 ? 2 : khat_angles;
}

double golden_section_max(const std::function<double(double)>& f, double lo, double hi,
                          int iterations = 80) {
    constexpr double inv_phi = 0.6180339887498949;
    double a = lo, b = hi;
    double x1 = b - inv_phi * (b - a);
    double x2 = a + inv_phi * (b - a);
    double f1 = f(x1), f2 = f(x2);
    for (int i = 0; i < iterations; ++i) {
        if (f1 < f2) {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = f(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = f(x1);
        }
    }
    return 0.5 * (a + b);
}

}  // namespace

double FluxDiffusionModel::max_wave_speed(double state_bound) const {
    const int samples = 4097;
    double m = 0.0;
    for (int i = 0; i < samples; ++i) {
        const double xi = -state_bound + 2.0 * state_bound * i / (samples - 1);
        const Vec2 fp = flux_jacobian(xi);
        double s = std::abs(fp[0]);
        if (dim == 2) s += std::abs(fp[1]);
        m = std::max(m, s);
    }
    return m;
}

double FluxDiffusionModel::max_diffusion(double state_bound) const {
    const int samples = 4097;
    double m = 0.0;
    for (int i = 0; i < samples; ++i) {
        const double xi = -state_bound + 2.0 * state_bound * i / (samples - 1);
        const Mat2 a = diffusion(xi);
        for (int j = 0; j < dim; ++j) m = std::max(m, std::abs(a[j][j]));
    }
    return m;
}

EtaResult eta(const FluxDiffusionModel& model, double lambda, double beta,
              const EtaOptions& opts) {
    if (!(lambda > 0.0)) throw std::invalid_argument("eta: lambda must be positive");
    if (!(beta > 1.0 && beta < 2.0)) throw std::invalid_argument("eta: beta must lie in (1,2)");
    if (opts.quadrature_cells < 256)
        throw std::invalid_argument("eta: quadrature_cells must be at least 256");
    if (opts.tau_points < 2) throw std::invalid_argument("eta: tau grid is empty");
    if (!(opts.xi_window.length() > 0.0)) throw std::invalid_argument("eta: empty xi window");

    const int q = opts.quadrature_cells;
    const double dxi = opts.xi_window.length() / q;
    const double lam_beta = std::pow(lambda, beta);

    std::vector<double> speed(q), acal(q);
    EtaResult result;
    const int dirs = direction_count(model, opts.khat_angles);
    for (int a = 0; a < dirs; ++a) {
        const Vec2 khat = unit_direction(a, dirs, model.dim);
        double max_speed = 0.0;
        for (int i = 0; i < q; ++i) {
            const double xi = opts.xi_window.lo + (i + 0.5) * dxi;
            const Vec2 fp = model.flux_jacobian(xi);
            speed[i] = fp[0] * khat[0] + (model.dim == 2 ? fp[1] * khat[1] : 0.0);
            const Mat2 am = model.diffusion(xi);
            double proj = am[0][0] * khat[0] * khat[0];
            if (model.dim == 2)
                proj += 2.0 * am[0][1] * khat[0] * khat[1] + am[1][1] * khat[1] * khat[1];
            acal[i] = proj;
            max_speed = std::max(max_speed, std::abs(speed[i]));
        }
        auto integral = [&](double tau) {
            double s = 0.0;
            for (int i = 0; i < q; ++i) {
                const double shifted = speed[i] + tau;
                const double denom_base = acal[i] + lambda;
                s += lambda * denom_base / (denom_base * denom_base + lam_beta * shifted * shifted);
            }
            return s * dxi;
        };
        const double tau_lo = -max_speed - 1.0;
        const double tau_hi = max_speed + 1.0;
        const double dtau = (tau_hi - tau_lo) / (opts.tau_points - 1);
        int best = 0;
        double best_val = -1.0;
        for (int t = 0; t < opts.tau_points; ++t) {
            const double v = integral(tau_lo + t * dtau);
            if (v > best_val) {
                best_val = v;
                best = t;
            }
        }
        const double bracket_lo = tau_lo + std::max(0, best - 1) * dtau;
        const double bracket_hi = tau_lo + std::min(opts.tau_points - 1, best + 1) * dtau;
        const double tau_star = golden_section_max(integral, bracket_lo, bracket_hi);
        const double refined = std::max(best_val, integral(tau_star));
        if (refined > result.value) {
            result.value = refined;
            result.tau_at_sup = tau_star;
            result.sup_on_tau_boundary = (best == 0 || best == opts.tau_points - 1);
        }
    }
    return result;
}

double delta_nondegeneracy(const FluxDiffusionModel& model, double eps,
                           const DeltaOptions& opts) {
    if (!(eps > 0.0)) throw std::invalid_argument("delta_nondegeneracy: eps must be positive");
    if (!(opts.t_max >= 20.0))
        throw std::invalid_argument("delta_nondegeneracy: t_max must be at least 20");

    const int q = opts.quadrature_cells;
    const double dxi = opts.xi_window.length() / q;
    const int dirs = direction_count(model, opts.khat_angles);

    std::vector<std::vector<double>> sorted_speeds(dirs, std::vector<double>(q));
    for (int a = 0; a < dirs; ++a) {
        const Vec2 khat = unit_direction(a, dirs, model.dim);
        auto& row = sorted_speeds[a];
        for (int i = 0; i < q; ++i) {
            const double xi = opts.xi_window.lo + (i + 0.5) * dxi;
            const Vec2 fp = model.flux_jacobian(xi);
            row[i] = fp[0] * khat[0] + (model.dim == 2 ? fp[1] * khat[1] : 0.0);
        }
        std::sort(row.begin(), row.end());
    }

    // Largest count of sorted speeds inside a window of width 2r; this is
    // the exact sup over tau of the midpoint-cell sublevel count.
    auto sup_measure = [&](double r) {
        std::size_t best = 0;
        for (const auto& row : sorted_speeds) {
            std::size_t lo = 0;
            for (std::size_t hi = 0; hi < row.size(); ++hi) {
                while (row[hi] - row[lo] > 2.0 * r) ++lo;
                best = std::max(best, hi - lo + 1);
            }
        }
        return static_cast<double>(best) * dxi;
    };

    // 4-point Gauss-Legendre panels in t.
    static constexpr double gx[4] = {-0.8611363115940526, -0.3399810435848563,
                                     0.3399810435848563, 0.8611363115940526};
    static constexpr double gw[4] = {0.3478548451374538, 0.6521451548625461,
                                     0.6521451548625461, 0.3478548451374538};
    const double panel = opts.t_max / opts.t_panels;
    double total = 0.0;
    for (int p = 0; p < opts.t_panels; ++p) {
        const double mid = (p + 0.5) * panel;
        for (int gp = 0; gp < 4; ++gp) {
            const double t = mid + 0.5 * panel * gx[gp];
            total += 0.5 * panel * gw[gp] * std::exp(-t) * sup_measure(eps * t);
        }
    }
    return total;
}

DecayReport fit_decay_exponent(std::vector<double> samples, std::vector<double> values) {
    if (samples.size() != values.size() || samples.size() < 4)
        throw std::invalid_argument("fit_decay_exponent: need >= 4 matched sample points");
    for (std::size_t i = 0; i + 1 < samples.size(); ++i)
        if (!(samples[i] > samples[i + 1]))
            throw std::invalid_argument("fit_decay_exponent: samples must be strictly decreasing");
    if (!(samples.front() / samples.back() >= 100.0))
        throw std::invalid_argument("fit_decay_exponent: samples must span >= 2 decades");
    for (double v : values)
        if (!(v > 0.0)) throw std::invalid_argument("fit_decay_exponent: values must be positive");

    const std::size_t n = samples.size();
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double x = std::log(samples[i]);
        const double y = std::log(values[i]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    const double denom = n * sxx - sx * sx;
    const double slope = (n * sxy - sx * sy) / denom;
    const double intercept = (sy - slope * sx) / n;
    double rss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double r = std::log(values[i]) - (slope * std::log(samples[i]) + intercept);
        rss += r * r;
    }
    DecayReport report;
    report.samples = std::move(samples);
    report.values = std::move(values);
    report.fitted_exponent = slope;
    report.fit_residual = std::sqrt(rss / n);
    return report;
}

namespace {

Mat2 zero_mat() { return {{{0.0, 0.0}, {0.0, 0.0}}}; }

FluxDiffusionModel make_burgers() {
    FluxDiffusionModel m;
    m.name = "burgers";
    m.dim = 1;
    m.flux = [](double u) { return Vec2{0.5 * u * u, 0.0}; };
    m.flux_jacobian = [](double u) { return Vec2{u, 0.0}; };
    m.flux_hessian = [](double) { return Vec2{1.0, 0.0}; };
    m.diffusion = [](double) { return zero_mat(); };
    m.diffusion_derivative = [](double) { return zero_mat(); };
    m.diffusion_primitive = [](double) { return zero_mat(); };
    m.flux_critical_points[0] = {0.0};
    m.growth_c0 = 1.0;
    return m;
}

FluxDiffusionModel make_advection() {
    FluxDiffusionModel m;
    m.name = "advection";
    m.dim = 1;
    m.flux = [](double u) { return Vec2{u, 0.0}; };
    m.flux_jacobian = [](double) { return Vec2{1.0, 0.0}; };
    m.flux_hessian = [](double) { return Vec2{0.0, 0.0}; };
    m.diffusion = [](double) { return zero_mat(); };
    m.diffusion_derivative = [](double) { return zero_mat(); };
    m.diffusion_primitive = [](double) { return zero_mat(); };
    m.growth_c0 = 0.0;
    return m;
}

FluxDiffusionModel make_heat() {
    FluxDiffusionModel m;
    m.name = "heat";
    m.dim = 1;
    m.flux = [](double) { return Vec2{0.0, 0.0}; };
    m.flux_jacobian = [](double) { return Vec2{0.0, 0.0}; };
    m.flux_hessian = [](double) { return Vec2{0.0, 0.0}; };
    m.diffusion = [](double) {
        Mat2 a = zero_mat();
        a[0][0] = 1.0;
        return a;
    };
    m.diffusion_derivative = [](double) { return zero_mat(); };
    m.diffusion_primitive = [](double u) {
        Mat2 b = zero_mat();
        b[0][0] = u;
        return b;
    };
    m.growth_c0 = 0.0;
    return m;
}

FluxDiffusionModel make_porous_medium() {
    FluxDiffusionModel m;
    m.name = "porous_medium";
    m.dim = 1;
    m.flux = [](double) { return Vec2{0.0, 0.0}; };
    m.flux_jacobian = [](double) { return Vec2{0.0, 0.0}; };
    m.flux_hessian = [](double) { return Vec2{0.0, 0.0}; };
    m.diffusion = [](double u) {
        Mat2 a = zero_mat();
        a[0][0] = std::abs(u);
        return a;
    };
    m.diffusion_derivative = [](double u) {
        Mat2 a = zero_mat();
        a[0][0] = u >= 0.0 ? 1.0 : -1.0;
        return a;
    };
    m.diffusion_primitive = [](double u) {
        Mat2 b = zero_mat();
        b[0][0] = 0.5 * u * std::abs(u);
        return b;
    };
    m.derivative_kinks = {0.0};
    m.growth_c0 = 1.0;
    return m;
}

// 2-d Burgers-type flux with anisotropic degenerate diffusion
// A(u) = diag(cut(u)^2, 0), cut(u) = s * tanh(u/s): smooth, bounded, and
// vanishing at u = 0 so the first axis degenerates there.
FluxDiffusionModel make_burgers2d() {
    constexpr double s = 2.0;
    auto cut = [](double u) { return s * std::tanh(u / s); };
    auto cut_prime = [](double u) {
        const double c = std::cosh(u / s);
        return 1.0 / (c * c);
    };
    FluxDiffusionModel m;
    m.name = "burgers2d";
    m.dim = 2;
    m.flux = [](double u) { return Vec2{0.5 * u * u, 0.5 * u * u}; };
    m.flux_jacobian = [](double u) { return Vec2{u, u}; };
    m.flux_hessian = [](double) { return Vec2{1.0, 1.0}; };
    m.diffusion = [cut](double u) {
        Mat2 a = zero_mat();
        const double c = cut(u);
        a[0][0] = c * c;
        return a;
    };
    m.diffusion_derivative = [cut, cut_prime](double u) {
        Mat2 a = zero_mat();
        a[0][0] = 2.0 * cut(u) * cut_prime(u);
        return a;
    };
    m.diffusion_primitive = [](double u) {
        // int_0^u s^2 tanh^2(z/s) dz = s^2 (u - s tanh(u/s))
        Mat2 b = zero_mat();
        b[0][0] = s * s * (u - s * std::tanh(u / s));
        return b;
    };
    m.flux_critical_points[0] = {0.0};
    m.flux_critical_points[1] = {0.0};
    m.growth_c0 = 2.0 * s;
    m.growth_c1 = 0.0;
    return m;
}

}  // namespace

const std::vector<FluxDiffusionModel>& builtin_models() {
    static const std::vector<FluxDiffusionModel> catalog = {
        make_burgers(), make_burgers2d(), make_advection(), make_porous_medium(), make_heat()};
    return catalog;
}

const FluxDiffusionModel& find_model(const std::string& name) {
    for (const auto& m : builtin_models())
        if (m.name == name) return m;
    std::string keys;
    for (const auto& m : builtin_models()) keys += (keys.empty() ? "" : ", ") + m.name;
    throw std::invalid_argument("unknown model '" + name + "'; valid models: " + keys);
}

double derivative_consistency_error(const FluxDiffusionModel& model, Interval window,
                                    int samples) {
    const double step = window.length() / (samples - 1);
    const double h = step * 0.5;
    double worst = 0.0;
    auto rel = [](double got, double want) {
        return std::abs(got - want) / std::max(1.0, std::abs(want));
    };
    for (int i = 1; i + 1 < samples; ++i) {
        const double xi = window.lo + (i + 0.31) * step;
        bool near_kink = false;
        for (double kink : model.derivative_kinks)
            if (std::abs(xi - kink) < 2.0 * h) near_kink = true;
        if (near_kink) continue;
        for (int axis = 0; axis < model.dim; ++axis) {
            const double fd1 = (model.flux(xi + h)[axis] - model.flux(xi - h)[axis]) / (2 * h);
            worst = std::max(worst, rel(model.flux_jacobian(xi)[axis], fd1));
            const double fd2 =
                (model.flux_jacobian(xi + h)[axis] - model.flux_jacobian(xi - h)[axis]) / (2 * h);
            worst = std::max(worst, rel(model.flux_hessian(xi)[axis], fd2));
        }
        for (int r = 0; r < model.dim; ++r) {
            for (int c = 0; c < model.dim; ++c) {
                const double fd =
                    (model.diffusion(xi + h)[r][c] - model.diffusion(xi - h)[r][c]) / (2 * h);
                worst = std::max(worst, rel(model.diffusion_derivative(xi)[r][c], fd));
                const double fdp =
                    (model.diffusion_primitive(xi + h)[r][c] - model.diffusion_primitive(xi - h)[r][c]) /
                    (2 * h);
                worst = std::max(worst, rel(model.diffusion(xi)[r][c], fdp));
            }
        }
    }
    return worst;
}

std::string decay_report_to_json(const DecayReport& report) {
    JsonWriter w;
    w.begin_object();
    w.key("samples").number_array(report.samples);
    w.key("values").number_array(report.values);
    w.key("exponent").number(report.fitted_exponent);
    w.key("residual").number(report.fit_residual);
    w.end_object();
    return w.str();
}

}  // namespace sclab
