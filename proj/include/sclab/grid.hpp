#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace sclab {

/// Uniform periodic grid on the torus, d in {1,2}, power-of-two cells per
/// axis. Spacing times cells reproduces the period exactly because spacing
/// is stored as period/cells and never re-derived.
class TorusGrid {
public:
    TorusGrid(int dim, int cells_per_axis, double period = 1.0);

    int dim() const { return dim_; }
    int cells_per_axis() const { return cells_; }
    double period() const { return period_; }
    double spacing() const { return spacing_; }
    std::size_t cell_count() const { return count_; }

    /// Cell volume h^d.
    double cell_volume() const { return cell_volume_; }

    /// Integer frequency for a transform index along one axis, in
    /// [-N/2+1, N/2].
    int frequency(int index) const;

    /// Physical wavenumber 2*pi*n/period for integer frequency n.
    double wavenumber(int n) const;

    std::size_t flat_index(int ix, int iy = 0) const;

    // Twiddle table for the radix-2 transform, built once per grid.
    std::span<const std::complex<double>> twiddles() const { return twiddles_; }

private:
    int dim_;
    int cells_;
    double period_;
    double spacing_;
    double cell_volume_;
    std::size_t count_;
    std::vector<std::complex<double>> twiddles_;
};

/// Scalar state sampled as cell averages, one value per cell, row-major
/// with the x index fastest.
class Field {
public:
    explicit Field(const TorusGrid& grid);
    Field(const TorusGrid& grid, std::vector<double> values);

    const TorusGrid& grid() const { return *grid_; }
    std::span<double> values() { return values_; }
    std::span<const double> values() const { return values_; }
    double& operator[](std::size_t i) { return values_[i]; }
    double operator[](std::size_t i) const { return values_[i]; }
    std::size_t size() const { return values_.size(); }

private:
    const TorusGrid* grid_;
    std::vector<double> values_;
};

/// Fourier coefficients of a Field, same layout as the Field with the
/// integer frequency recovered via TorusGrid::frequency. Coefficients use
/// the (1/N^d) forward normalization so the k=0 entry is the mean.
class SpectralField {
public:
    SpectralField(const TorusGrid& grid, std::vector<std::complex<double>> coeffs);

    const TorusGrid& grid() const { return *grid_; }
    std::span<std::complex<double>> coefficients() { return coeffs_; }
    std::span<const std::complex<double>> coefficients() const { return coeffs_; }

private:
    const TorusGrid* grid_;
    std::vector<std::complex<double>> coeffs_;
};

double l1_norm(const Field& f);
double l2_norm(const Field& f);
double lq_norm(const Field& f, double q);
double mean(const Field& f);
double max_abs(const Field& f);

SpectralField to_spectral(const Field& f);
Field from_spectral(const SpectralField& s);

/// (sum_{k != 0} |k|^{2s} |u_hat(k)|^2)^{1/2} over physical wavenumbers.
double sobolev_seminorm(const Field& f, double s);

/// Bessel-potential norm ||(I - Laplace)^{s/2} u||_{L^q} on the grid.
double sobolev_wsq_norm(const Field& f, double s, double q);

/// In-place transforms used by the modules that work per spectral row.
void fft_forward(const TorusGrid& grid, std::span<std::complex<double>> data);
void fft_inverse(const TorusGrid& grid, std::span<std::complex<double>> data);

Field subtract_mean(const Field& f);

}  // namespace sclab
