#include "sclab/averaging.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "sclab/json_writer.hpp"

namespace sclab {

SemigroupParams::SemigroupParams(double gamma_, double theta_, double beta_)
    : gamma(gamma_), theta(theta_), beta(beta_) {
    if (!(gamma > 0.0) || !(theta > 0.0))
        throw std::invalid_argument("SemigroupParams: gamma and theta must be positive");
    if (!(beta > 1.0 && beta < 2.0))
        throw std::invalid_argument("SemigroupParams: beta must lie in (1,2)");
    alpha = (beta - 1.0) / beta;
}

double SemigroupParams::omega(double k_norm) const {
    return gamma * std::pow(k_norm, 2.0 * alpha - 1.0) + theta / k_norm;
}

double SemigroupParams::decay_rate(double k_norm) const {
    return gamma * std::pow(k_norm, 2.0 * alpha) + theta;
}

std::complex<double> semigroup_mode(const SemigroupParams& params,
                                    const FluxDiffusionModel& model, Vec2 k, double xi,
                                    double t) {
    const Vec2 fp = model.flux_jacobian(xi);
    const Mat2 a = model.diffusion(xi);
    const double k_norm = std::sqrt(k[0] * k[0] + k[1] * k[1]);
    double a_kk = a[0][0] * k[0] * k[0];
    double f_dot_k = fp[0] * k[0];
    if (model.dim == 2) {
        a_kk += 2.0 * a[0][1] * k[0] * k[1] + a[1][1] * k[1] * k[1];
        f_dot_k += fp[1] * k[1];
    }
    const double decay = (a_kk + params.decay_rate(k_norm)) * t;
    const double phase = -f_dot_k * t;
    return std::exp(-decay) * std::complex<double>(std::cos(phase), std::sin(phase));
}

namespace {

// Spatial transforms of the kinetic density rows: chi_hat[j] holds the full
// spectrum of x -> chi(xi_j, u0(x)).
std::vector<std::vector<std::complex<double>>> chi_rows(const Field& u0, const XiGrid& xi) {
    const KineticDensity d = chi(u0, xi);
    const TorusGrid& g = u0.grid();
    std::vector<std::vector<std::complex<double>>> rows(xi.cells);
    std::vector<std::complex<double>> buf(g.cell_count());
    for (int j = 0; j < xi.cells; ++j) {
        for (std::size_t c = 0; c < g.cell_count(); ++c)
            buf[c] = static_cast<double>(d.at(c, j));
        fft_forward(g, buf);
        rows[j] = buf;
    }
    return rows;
}

struct ModeIndex {
    std::array<int, 2> freq;
    std::size_t flat;
};

// Half spectrum, k = 0 excluded; the conjugate modes duplicate the energy.
std::vector<ModeIndex> half_spectrum(const TorusGrid& g) {
    std::vector<ModeIndex> modes;
    const int n = g.cells_per_axis();
    if (g.dim() == 1) {
        for (int i = 1; i <= n / 2; ++i)
            modes.push_back({{g.frequency(i), 0}, static_cast<std::size_t>(i)});
    } else {
        for (int iy = 0; iy < n; ++iy) {
            for (int ix = 0; ix < n; ++ix) {
                const int nx = g.frequency(ix);
                const int ny = g.frequency(iy);
                if (nx == 0 && ny == 0) continue;
                if (ny < 0 || (ny == 0 && nx < 0)) continue;
                modes.push_back({{nx, ny}, g.flat_index(ix, iy)});
            }
        }
    }
    return modes;
}

}  // namespace

std::vector<ModeTrace> u0_term(const Field& u0, const SemigroupParams& params,
                               const FluxDiffusionModel& model, const XiGrid& xi,
                               double t_end, int t_samples) {
    if (std::abs(mean(u0)) > 1e-10)
        throw std::invalid_argument("u0_term: initial data must have zero mean");
    if (t_samples < 2) throw std::invalid_argument("u0_term: need at least two time samples");

    const TorusGrid& g = u0.grid();
    const auto rows = chi_rows(u0, xi);
    const auto modes = half_spectrum(g);
    const double dxi = xi.spacing();
    const double dt = t_end / (t_samples - 1);

    std::vector<ModeTrace> traces(modes.size());
    std::vector<std::complex<double>> factor(xi.cells), current(xi.cells);
    for (std::size_t m = 0; m < modes.size(); ++m) {
        const auto& mode = modes[m];
        ModeTrace& trace = traces[m];
        trace.freq = mode.freq;
        const Vec2 k{g.wavenumber(mode.freq[0]),
                     g.dim() == 2 ? g.wavenumber(mode.freq[1]) : 0.0};
        trace.k_norm = std::sqrt(k[0] * k[0] + k[1] * k[1]);

        double chi_e = 0.0;
        for (int j = 0; j < xi.cells; ++j) {
            current[j] = rows[j][mode.flat];
            // One-step semigroup factor on the uniform time grid; the
            // incremental product avoids a complex exp per (xi, t).
            factor[j] = semigroup_mode(params, model, k, xi.center(j), dt);
            chi_e += std::norm(current[j]);
        }
        trace.chi_energy = chi_e * dxi;

        trace.times.resize(t_samples);
        trace.samples.resize(t_samples);
        for (int s = 0; s < t_samples; ++s) {
            trace.times[s] = s * dt;
            std::complex<double> sum = 0.0;
            for (int j = 0; j < xi.cells; ++j) sum += current[j];
            trace.samples[s] = sum * dxi;
            if (s + 1 < t_samples)
                for (int j = 0; j < xi.cells; ++j) current[j] *= factor[j];
        }
        double energy = 0.0;
        for (int s = 0; s < t_samples; ++s) {
            const double w = (s == 0 || s == t_samples - 1) ? 0.5 : 1.0;
            energy += w * std::norm(trace.samples[s]);
        }
        trace.time_energy = energy * dt;
    }
    return traces;
}

void RatioReport::merge(const RatioReport& other) {
    family_size += std::max(1, other.family_size);
    for (const auto& e : other.entries) {
        auto it = std::find_if(entries.begin(), entries.end(), [&](const RatioEntry& mine) {
            return mine.freq == e.freq;
        });
        if (it == entries.end()) {
            entries.push_back(e);
        } else if (e.ratio > it->ratio) {
            *it = e;
        }
    }
    max_ratio = 0.0;
    for (const auto& e : entries) max_ratio = std::max(max_ratio, e.ratio);

    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    std::size_t n = 0;
    for (const auto& e : entries) {
        if (e.ratio <= 0.0) continue;
        const double x = std::log(e.k_norm);
        const double y = std::log(e.ratio);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        ++n;
    }
    log_slope = n >= 2 ? (n * sxy - sx * sy) / (n * sxx - sx * sx) : 0.0;
}

RatioReport verify_u0_estimate(const Field& u0, const SemigroupParams& params,
                               const FluxDiffusionModel& model, const XiGrid& xi, double t_end,
                               double kappa, int t_samples) {
    const auto traces = u0_term(u0, params, model, xi, t_end, t_samples);
    RatioReport report;
    report.kappa = kappa;
    report.family_size = 0;
    const double chi_floor = 1e-14;
    for (const auto& t : traces) {
        if (t.chi_energy <= chi_floor) continue;  // absent mode: 0/0 excluded
        RatioEntry e;
        e.freq = t.freq;
        e.k_norm = t.k_norm;
        e.chi_energy = t.chi_energy;
        e.weighted_energy = std::pow(t.k_norm, 1.0 + kappa) *
                            std::pow(params.omega(t.k_norm), 1.0 - kappa) * t.time_energy;
        e.ratio = e.weighted_energy / e.chi_energy;
        report.entries.push_back(e);
    }
    RatioReport merged;
    merged.kappa = kappa;
    merged.merge(report);
    merged.family_size = 1;
    return merged;
}

std::string ratio_report_to_json(const RatioReport& report) {
    JsonWriter w;
    w.begin_object();
    w.key("kappa").number(report.kappa);
    w.key("family_size").integer(report.family_size);
    w.key("max_ratio").number(report.max_ratio);
    w.key("log_slope").number(report.log_slope);
    w.key("modes").begin_array();
    for (const auto& e : report.entries) {
        w.begin_object();
        w.key("k").number(e.k_norm);
        w.key("weighted_energy").number(e.weighted_energy);
        w.key("chi_energy").number(e.chi_energy);
        w.key("ratio").number(e.ratio);
        w.end_object();
    }
    w.end_array();
    w.end_object();
    return w.str();
}

}  // namespace sclab
