#include "sclab/grid.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace sclab {

namespace {

bool is_power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

// Iterative radix-2 transform, forward sign convention e^{-2*pi*i*jk/N}.
// Power-of-two lengths only; twiddles come from the grid table.
void fft_pow2(std::span<std::complex<double>> a,
              std::span<const std::complex<double>> twiddle, bool inverse) {
    const std::size_t n = a.size();
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }
    for (std::size_t len = 2; len <= n; len <<= 1) {
        const std::size_t stride = n / len;
        for (std::size_t start = 0; start < n; start += len) {
            for (std::size_t k = 0; k < len / 2; ++k) {
                std::complex<double> w = twiddle[k * stride];
                if (inverse) w = std::conj(w);
                std::complex<double> even = a[start + k];
                std::complex<double> odd = a[start + k + len / 2] * w;
                a[start + k] = even + odd;
                a[start + k + len / 2] = even - odd;
            }
        }
    }
}

}  // namespace

TorusGrid::TorusGrid(int dim, int cells_per_axis, double period)
    : dim_(dim), cells_(cells_per_axis), period_(period) {
    if (dim != 1 && dim != 2) throw std::invalid_argument("TorusGrid: dim must be 1 or 2");
    if (cells_per_axis < 4 || !is_power_of_two(cells_per_axis))
        throw std::invalid_argument("TorusGrid: cells_per_axis must be a power of two >= 4");
    if (!(period > 0.0)) throw std::invalid_argument("TorusGrid: period must be positive");
    spacing_ = period_ / cells_;
    count_ = 1;
    for (int i = 0; i < dim_; ++i) count_ *= static_cast<std::size_t>(cells_);
    cell_volume_ = 1.0;
    for (int i = 0; i < dim_; ++i) cell_volume_ *= spacing_;
    twiddles_.resize(static_cast<std::size_t>(cells_) / 2);
    for (std::size_t k = 0; k < twiddles_.size(); ++k) {
        const double ang = -2.0 * std::numbers::pi * static_cast<double>(k) / cells_;
        twiddles_[k] = {std::cos(ang), std::sin(ang)};
    }
}

int TorusGrid::frequency(int index) const {
    return index <= cells_ / 2 ? index : index - cells_;
}

double TorusGrid::wavenumber(int n) const {
    return 2.0 * std::numbers::pi * static_cast<double>(n) / period_;
}

std::size_t TorusGrid::flat_index(int ix, int iy) const {
    const int mask = cells_ - 1;
    return static_cast<std::size_t>(ix & mask) +
           static_cast<std::size_t>(cells_) * static_cast<std::size_t>(iy & mask) *
               static_cast<std::size_t>(dim_ == 2);
}

Field::Field(const TorusGrid& grid) : grid_(&grid), values_(grid.cell_count(), 0.0) {}

Field::Field(const TorusGrid& grid, std::vector<double> values)
    : grid_(&grid), values_(std::move(values)) {
    if (values_.size() != grid.cell_count())
        throw std::invalid_argument("Field: value count does not match the grid");
}

SpectralField::SpectralField(const TorusGrid& grid, std::vector<std::complex<double>> coeffs)
    : grid_(&grid), coeffs_(std::move(coeffs)) {
    if (coeffs_.size() != grid.cell_count())
        throw std::invalid_argument("SpectralField: coefficient count does not match the grid");
}

double l1_norm(const Field& f) {
    double s = 0.0;
    for (double v : f.values()) s += std::abs(v);
    return s * f.grid().cell_volume();
}

double l2_norm(const Field& f) {
    double s = 0.0;
    for (double v : f.values()) s += v * v;
    return std::sqrt(s * f.grid().cell_volume());
}

double lq_norm(const Field& f, double q) {
    if (!(q >= 1.0)) throw std::invalid_argument("lq_norm: q must be >= 1");
    double s = 0.0;
    for (double v : f.values()) s += std::pow(std::abs(v), q);
    return std::pow(s * f.grid().cell_volume(), 1.0 / q);
}

double mean(const Field& f) {
    double s = 0.0;
    for (double v : f.values()) s += v;
    double volume = 1.0;
    for (int i = 0; i < f.grid().dim(); ++i) volume *= f.grid().period();
    return s * f.grid().cell_volume() / volume;
}

double max_abs(const Field& f) {
    double m = 0.0;
    for (double v : f.values()) m = std::max(m, std::abs(v));
    return m;
}

void fft_forward(const TorusGrid& grid, std::span<std::complex<double>> data) {
    const int n = grid.cells_per_axis();
    if (grid.dim() == 1) {
        fft_pow2(data, grid.twiddles(), false);
    } else {
        std::vector<std::complex<double>> col(n);
        for (int iy = 0; iy < n; ++iy)
            fft_pow2(data.subspan(static_cast<std::size_t>(iy) * n, n), grid.twiddles(), false);
        for (int ix = 0; ix < n; ++ix) {
            for (int iy = 0; iy < n; ++iy) col[iy] = data[grid.flat_index(ix, iy)];
            fft_pow2(col, grid.twiddles(), false);
            for (int iy = 0; iy < n; ++iy) data[grid.flat_index(ix, iy)] = col[iy];
        }
    }
    const double scale = 1.0 / static_cast<double>(grid.cell_count());
    for (auto& c : data) c *= scale;
}

void fft_inverse(const TorusGrid& grid, std::span<std::complex<double>> data) {
    const int n = grid.cells_per_axis();
    if (grid.dim() == 1) {
        fft_pow2(data, grid.twiddles(), true);
    } else {
        std::vector<std::complex<double>> col(n);
        for (int iy = 0; iy < n; ++iy)
            fft_pow2(data.subspan(static_cast<std::size_t>(iy) * n, n), grid.twiddles(), true);
        for (int ix = 0; ix < n; ++ix) {
            for (int iy = 0; iy < n; ++iy) col[iy] = data[grid.flat_index(ix, iy)];
            fft_pow2(col, grid.twiddles(), true);
            for (int iy = 0; iy < n; ++iy) data[grid.flat_index(ix, iy)] = col[iy];
        }
    }
}

SpectralField to_spectral(const Field& f) {
    std::vector<std::complex<double>> data(f.values().begin(), f.values().end());
    fft_forward(f.grid(), data);
    return SpectralField(f.grid(), std::move(data));
}

Field from_spectral(const SpectralField& s) {
    std::vector<std::complex<double>> data(s.coefficients().begin(), s.coefficients().end());
    fft_inverse(s.grid(), data);
    std::vector<double> out(data.size());
    for (std::size_t i = 0; i < data.size(); ++i) out[i] = data[i].real();
    return Field(s.grid(), std::move(out));
}

double sobolev_seminorm(const Field& f, double s) {
    if (!(s >= 0.0)) throw std::invalid_argument("sobolev_seminorm: s must be >= 0");
    const SpectralField sf = to_spectral(f);
    const TorusGrid& g = f.grid();
    const int n = g.cells_per_axis();
    double acc = 0.0;
    if (g.dim() == 1) {
        for (int i = 0; i < n; ++i) {
            const int freq = g.frequency(i);
            if (freq == 0) continue;
            const double k = g.wavenumber(freq);
            acc += std::pow(k * k, s) * std::norm(sf.coefficients()[i]);
        }
    } else {
        for (int iy = 0; iy < n; ++iy) {
            for (int ix = 0; ix < n; ++ix) {
                const int nx = g.frequency(ix);
                const int ny = g.frequency(iy);
                if (nx == 0 && ny == 0) continue;
                const double kx = g.wavenumber(nx);
                const double ky = g.wavenumber(ny);
                acc += std::pow(kx * kx + ky * ky, s) *
                       std::norm(sf.coefficients()[g.flat_index(ix, iy)]);
            }
        }
    }
    return std::sqrt(acc);
}

double sobolev_wsq_norm(const Field& f, double s, double q) {
    const TorusGrid& g = f.grid();
    std::vector<std::complex<double>> data(f.values().begin(), f.values().end());
    fft_forward(g, data);
    const int n = g.cells_per_axis();
    if (g.dim() == 1) {
        for (int i = 0; i < n; ++i) {
            const double k = g.wavenumber(g.frequency(i));
            data[i] *= std::pow(1.0 + k * k, 0.5 * s);
        }
    } else {
        for (int iy = 0; iy < n; ++iy) {
            for (int ix = 0; ix < n; ++ix) {
                const double kx = g.wavenumber(g.frequency(ix));
                const double ky = g.wavenumber(g.frequency(iy));
                data[g.flat_index(ix, iy)] *= std::pow(1.0 + kx * kx + ky * ky, 0.5 * s);
            }
        }
    }
    fft_inverse(g, data);
    double acc = 0.0;
    for (const auto& c : data) acc += std::pow(std::abs(c.real()), q);
    return std::pow(acc * g.cell_volume(), 1.0 / q);
}

Field subtract_mean(const Field& f) {
    const double m = mean(f);
    std::vector<double> out(f.values().begin(), f.values().end());
    for (double& v : out) v -= m;
    return Field(f.grid(), std::move(out));
}

}  // namespace sclab
