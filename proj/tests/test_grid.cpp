#include <doctest.h>

#include <cmath>
#include <complex>
#include <numbers>

#include "sclab/grid.hpp"
#include "sclab/noise.hpp"

using namespace sclab;

namespace {

Field sine_field(const TorusGrid& g, double amp, int mode) {
    Field f(g);
    const int n = g.cells_per_axis();
    for (int i = 0; i < n; ++i)
        f[i] = amp * std::sin(2.0 * std::numbers::pi * mode * i / n);
    return f;
}

}  // namespace

TEST_CASE("grid construction validates its arguments") {
    CHECK_THROWS_AS(TorusGrid(3, 64), std::invalid_argument);
    CHECK_THROWS_AS(TorusGrid(1, 100), std::invalid_argument);  // not a power of two
    CHECK_THROWS_AS(TorusGrid(1, 2), std::invalid_argument);
    CHECK_THROWS_AS(TorusGrid(1, 64, -1.0), std::invalid_argument);
    const TorusGrid g(2, 64, 2.0);
    CHECK(g.cell_count() == 64 * 64);
    CHECK(g.spacing() * g.cells_per_axis() == g.period());
}

TEST_CASE("l1 norm on closed forms") {
    const TorusGrid g(1, 256);
    CHECK(l1_norm(Field(g)) == 0.0);

    Field ones(g);
    for (double& v : ones.values()) v = 1.0;
    CHECK(l1_norm(ones) == doctest::Approx(1.0).epsilon(1e-14));

    // int_0^1 |sin 2 pi x| dx = 2/pi
    CHECK(l1_norm(sine_field(g, 1.0, 1)) == doctest::Approx(0.6366197723675814).epsilon(1e-3));
}

TEST_CASE("l1 norm is a norm (triangle + homogeneity)") {
    const TorusGrid g(1, 64);
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const Field a = random_zero_mean_field(g, 1.0, 5, seed);
        const Field b = random_zero_mean_field(g, 1.0, 5, seed + 1000);
        Field sum(g);
        for (std::size_t i = 0; i < sum.size(); ++i) sum[i] = a[i] + b[i];
        CHECK(l1_norm(sum) <= l1_norm(a) + l1_norm(b) + 1e-14);
        Field scaled(g);
        for (std::size_t i = 0; i < scaled.size(); ++i) scaled[i] = -2.5 * a[i];
        CHECK(l1_norm(scaled) == doctest::Approx(2.5 * l1_norm(a)).epsilon(1e-13));
    }
}

TEST_CASE("mean of constants, odd modes, and indicators") {
    const TorusGrid g(1, 64);
    Field c(g);
    for (double& v : c.values()) v = -3.25;
    CHECK(mean(c) == doctest::Approx(-3.25).epsilon(1e-15));

    CHECK(std::abs(mean(sine_field(g, 1.0, 1))) < 1e-14);

    Field half(g);
    for (int i = 0; i < 32; ++i) half[i] = 1.0;
    CHECK(mean(half) == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("transform pair: impulse, pure mode, round trip") {
    const TorusGrid g(1, 64);

    Field delta(g);
    delta[0] = 1.0;
    const SpectralField ds = to_spectral(delta);
    for (const auto& coeff : ds.coefficients())
        CHECK(std::abs(coeff) == doctest::Approx(1.0 / 64).epsilon(1e-12));

    Field cosf(g);
    for (int i = 0; i < 64; ++i) cosf[i] = std::cos(2.0 * std::numbers::pi * i / 64.0);
    const SpectralField cs = to_spectral(cosf);
    for (int i = 0; i < 64; ++i) {
        const int freq = g.frequency(i);
        const double mag = std::abs(cs.coefficients()[i]);
        if (freq == 1 || freq == -1)
            CHECK(mag == doctest::Approx(0.5).epsilon(1e-12));
        else
            CHECK(mag < 1e-13);
    }

    const Field random = random_zero_mean_field(g, 1.0, 20, 7);
    const Field back = from_spectral(to_spectral(random));
    for (std::size_t i = 0; i < random.size(); ++i)
        CHECK(back[i] == doctest::Approx(random[i]).epsilon(1e-12));
}

TEST_CASE("hermitian symmetry of real transforms") {
    const TorusGrid g(1, 128);
    const Field f = random_zero_mean_field(g, 1.0, 12, 3);
    const SpectralField s = to_spectral(f);
    for (int i = 1; i < 128; ++i) {
        const std::complex<double> a = s.coefficients()[i];
        const std::complex<double> b = s.coefficients()[(128 - i) % 128];
        CHECK(std::abs(a - std::conj(b)) < 1e-13);
    }
}

TEST_CASE("parseval identity holds for random fields") {
    // sum |u|^2 h^d = P^d sum |u_hat|^2
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        const TorusGrid g(1, 128, 2.0);
        Field f = random_zero_mean_field(g, 1.0, 10, seed);
        f[3] += 0.5;  // nonzero mean exercises the k = 0 coefficient too
        const SpectralField s = to_spectral(f);
        double lhs = 0.0;
        for (double v : f.values()) lhs += v * v;
        lhs *= g.cell_volume();
        double rhs = 0.0;
        for (const auto& co : s.coefficients()) rhs += std::norm(co);
        rhs *= g.period();
        CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
    }
}

TEST_CASE("parseval in two dimensions") {
    const TorusGrid g(2, 32);
    const Field f = random_zero_mean_field(g, 1.0, 4, 11);
    const SpectralField s = to_spectral(f);
    double lhs = 0.0;
    for (double v : f.values()) lhs += v * v;
    lhs *= g.cell_volume();
    double rhs = 0.0;
    for (const auto& co : s.coefficients()) rhs += std::norm(co);
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
}

TEST_CASE("sobolev seminorm closed forms") {
    const TorusGrid g(1, 256);
    Field c(g);
    for (double& v : c.values()) v = 2.0;
    CHECK(sobolev_seminorm(c, 0.7) == 0.0);

    // s = 0 reduces to the L2 norm of the zero-mean part (unit period)
    Field f = random_zero_mean_field(g, 1.0, 8, 5);
    for (double& v : f.values()) v += 0.3;
    CHECK(sobolev_seminorm(f, 0.0) ==
          doctest::Approx(l2_norm(subtract_mean(f))).epsilon(1e-12));

    Field cosf(g);
    for (int i = 0; i < 256; ++i) cosf[i] = std::cos(2.0 * std::numbers::pi * i / 256.0);
    CHECK(sobolev_seminorm(cosf, 1.0) ==
          doctest::Approx(4.442882938158366).epsilon(1e-10));  // 2 pi ||cos||_{L^2}
}

TEST_CASE("zeroing the k = 0 coefficient produces an exactly zero-mean field") {
    const TorusGrid g(1, 64);
    Field f = random_zero_mean_field(g, 1.0, 6, 9);
    for (double& v : f.values()) v += 0.75;
    SpectralField s = to_spectral(f);
    s.coefficients()[0] = 0.0;
    CHECK(std::abs(mean(from_spectral(s))) < 1e-14);
}

TEST_CASE("w^{s,q} norm agrees with the bessel multiplier in the l2 case") {
    const TorusGrid g(1, 128);
    const Field f = random_zero_mean_field(g, 1.0, 10, 21);
    const SpectralField s = to_spectral(f);
    double expect = 0.0;
    for (int i = 0; i < 128; ++i) {
        const double k = g.wavenumber(g.frequency(i));
        expect += std::pow(1.0 + k * k, 1.0) * std::norm(s.coefficients()[i]);
    }
    expect = std::sqrt(expect);  // unit period: the L2 norm needs no extra factor
    CHECK(sobolev_wsq_norm(f, 1.0, 2.0) == doctest::Approx(expect).epsilon(1e-10));
}
