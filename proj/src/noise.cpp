#include "sclab/noise.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace sclab {

namespace {

struct Philox4x32 {
    std::array<std::uint32_t, 4> counter;
    std::array<std::uint32_t, 2> key;
};

inline void philox_round(Philox4x32& s) {
    constexpr std::uint64_t m0 = 0xD2511F53ull;
    constexpr std::uint64_t m1 = 0xCD9E8D57ull;
    const std::uint64_t p0 = m0 * s.counter[0];
    const std::uint64_t p1 = m1 * s.counter[2];
    const std::uint32_t hi0 = static_cast<std::uint32_t>(p0 >> 32);
    const std::uint32_t lo0 = static_cast<std::uint32_t>(p0);
    const std::uint32_t hi1 = static_cast<std::uint32_t>(p1 >> 32);
    const std::uint32_t lo1 = static_cast<std::uint32_t>(p1);
    s.counter = {hi1 ^ s.counter[1] ^ s.key[0], lo1, hi0 ^ s.counter[3] ^ s.key[1], lo0};
    s.key[0] += 0x9E3779B9u;
    s.key[1] += 0xBB67AE85u;
}

std::array<std::uint32_t, 4> philox(std::uint64_t seed, std::uint64_t index) {
    Philox4x32 s;
    s.counter = {static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32), 0u,
                 0u};
    s.key = {static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)};
    for (int r = 0; r < 10; ++r) philox_round(s);
    return s.counter;
}

}  // namespace

double gaussian_at(std::uint64_t seed, std::uint64_t index) {
    const auto words = philox(seed, index);
    const std::uint64_t a =
        (static_cast<std::uint64_t>(words[0]) << 32) | static_cast<std::uint64_t>(words[1]);
    const std::uint64_t b =
        (static_cast<std::uint64_t>(words[2]) << 32) | static_cast<std::uint64_t>(words[3]);
    // (0,1] uniforms from the top 53 bits; u1 > 0 keeps the log finite.
    const double u1 = (static_cast<double>(a >> 11) + 1.0) * 0x1p-53;
    const double u2 = static_cast<double>(b >> 11) * 0x1p-53;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

NoiseModel make_sigma(const TorusGrid& grid, const std::vector<SigmaMode>& mode_spec) {
    for (const auto& m : mode_spec) {
        const bool zero_freq = m.freq[0] == 0 && (grid.dim() == 1 || m.freq[1] == 0);
        if (zero_freq)
            throw std::invalid_argument("make_sigma: zero-frequency mode would break the "
                                        "zero-average requirement");
    }
    Field sigma(grid);
    const int n = grid.cells_per_axis();
    const double two_pi = 2.0 * std::numbers::pi;
    for (int iy = 0; iy < (grid.dim() == 2 ? n : 1); ++iy) {
        for (int ix = 0; ix < n; ++ix) {
            double phase_x = two_pi * ix / n;
            double phase_y = two_pi * iy / n;
            double v = 0.0;
            for (const auto& m : mode_spec) {
                const double arg = m.freq[0] * phase_x + (grid.dim() == 2 ? m.freq[1] * phase_y : 0.0);
                v += m.amplitude * (m.sine ? std::sin(arg) : std::cos(arg));
            }
            sigma[grid.flat_index(ix, iy)] = v;
        }
    }

    NoiseModel model{std::move(sigma), mode_spec};
    model.sup_sigma = max_abs(model.sigma);
    model.l2_norm_sq = 0.0;
    for (double v : model.sigma.values()) model.l2_norm_sq += v * v;
    model.l2_norm_sq *= grid.cell_volume();

    // sup |grad sigma| from the exact mode derivatives: the spectral
    // derivative of a finite cosine sum is the analytic one.
    double lip = 0.0;
    for (int iy = 0; iy < (grid.dim() == 2 ? n : 1); ++iy) {
        for (int ix = 0; ix < n; ++ix) {
            double gx = 0.0, gy = 0.0;
            const double phase_x = two_pi * ix / n;
            const double phase_y = two_pi * iy / n;
            for (const auto& m : mode_spec) {
                const double arg =
                    m.freq[0] * phase_x + (grid.dim() == 2 ? m.freq[1] * phase_y : 0.0);
                const double d = m.amplitude * (m.sine ? std::cos(arg) : -std::sin(arg));
                gx += d * grid.wavenumber(m.freq[0]);
                if (grid.dim() == 2) gy += d * grid.wavenumber(m.freq[1]);
            }
            lip = std::max(lip, std::sqrt(gx * gx + gy * gy));
        }
    }
    model.lipschitz_bound = lip;
    return model;
}

NoisePath::NoisePath(std::uint64_t seed, double dt) : seed_(seed), dt_(dt) {
    if (!(dt > 0.0)) throw std::invalid_argument("NoisePath: dt must be positive");
}

double NoisePath::next_increment() {
    const double dw = increment_at(index_);
    ++index_;
    running_w_ += dw;
    return dw;
}

double NoisePath::increment_at(std::uint64_t i) const {
    return std::sqrt(dt_) * gaussian_at(seed_, i);
}

void NoisePath::restore(std::uint64_t index, double running_w) {
    index_ = index;
    running_w_ = running_w;
    anchor_w_ = running_w;
}

double window_noise_sup(const NoiseModel& model, std::uint64_t seed, double dt,
                        StepWindow window) {
    if (window.last_step < window.first_step)
        throw std::invalid_argument("window_noise_sup: window ends before it starts");
    NoisePath replay(seed, dt);
    double w = 0.0;
    double sup = 0.0;
    for (std::uint64_t i = window.first_step; i < window.last_step; ++i) {
        w += replay.increment_at(i);
        sup = std::max(sup, std::abs(w));
    }
    return sup * model.w1inf_factor();
}

EventFrequency small_noise_event_frequency(const NoiseModel& model, std::uint64_t base_seed,
                                           int paths, double dt, double window_length,
                                           double kappa_tilde) {
    if (paths < 100)
        throw std::invalid_argument("small_noise_event_frequency: need at least 100 paths");
    const auto steps = static_cast<std::uint64_t>(std::llround(window_length / dt));
    int hits = 0;
    for (int p = 0; p < paths; ++p) {
        const double sup = window_noise_sup(model, base_seed + static_cast<std::uint64_t>(p),
                                            dt, {0, steps});
        if (sup <= kappa_tilde) ++hits;
    }
    EventFrequency out;
    out.successes = hits;
    out.trials = paths;
    const double n = paths;
    const double phat = hits / n;
    const double z = 1.959963984540054;  // 95%
    const double denom = 1.0 + z * z / n;
    const double centre = (phat + z * z / (2 * n)) / denom;
    const double half = z * std::sqrt(phat * (1 - phat) / n + z * z / (4 * n * n)) / denom;
    out.estimate = phat;
    out.wilson_low = centre - half;
    out.wilson_high = centre + half;
    return out;
}

Field random_zero_mean_field(const TorusGrid& grid, double amplitude, int max_mode,
                             std::uint64_t seed) {
    std::vector<SigmaMode> modes;
    std::uint64_t draw = 0;
    if (grid.dim() == 1) {
        for (int n = 1; n <= max_mode; ++n) {
            modes.push_back({{n, 0}, gaussian_at(seed, draw++), false});
            modes.push_back({{n, 0}, gaussian_at(seed, draw++), true});
        }
    } else {
        for (int ny = -max_mode; ny <= max_mode; ++ny) {
            for (int nx = 1; nx <= max_mode; ++nx) {
                modes.push_back({{nx, ny}, gaussian_at(seed, draw++), false});
                modes.push_back({{nx, ny}, gaussian_at(seed, draw++), true});
            }
        }
        for (int ny = 1; ny <= max_mode; ++ny) {
            modes.push_back({{0, ny}, gaussian_at(seed, draw++), false});
            modes.push_back({{0, ny}, gaussian_at(seed, draw++), true});
        }
    }
    Field f = make_sigma(grid, modes).sigma;
    const double sup = max_abs(f);
    if (sup > 0.0)
        for (double& v : f.values()) v *= amplitude / sup;
    return f;
}

double brownian_sup_probability(double a, double T) {
    if (a <= 0.0) return 0.0;
    const double scale = a / std::sqrt(T);
    auto Phi = [](double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); };
    double sum = Phi(scale) - Phi(-scale);
    for (int k = 1; k < 1000; ++k) {
        const double sign = (k % 2 == 0) ? 1.0 : -1.0;
        const double up = Phi((2 * k + 1) * scale) - Phi((2 * k - 1) * scale);
        const double down = Phi((-2 * k + 1) * scale) - Phi((-2 * k - 1) * scale);
        const double term = sign * (up + down);
        sum += term;
        if (std::abs(term) < 1e-12) break;
    }
    return std::min(1.0, std::max(0.0, sum));
}

}  // namespace sclab
