#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <functional>
#include <numbers>

#include "sclab/model.hpp"

using namespace sclab;

namespace {

// Independent route to the eta integrand: Simpson in xi with its own tau
// scan, no code shared with the implementation.
double eta_simpson_oracle(const FluxDiffusionModel& model, double lambda, double beta,
                          Interval window, int points, int tau_points) {
    const double lam_beta = std::pow(lambda, beta);
    auto integral = [&](double tau) {
        auto f = [&](double xi) {
            const double speed = model.flux_jacobian(xi)[0] + tau;
            const double base = model.diffusion(xi)[0][0] + lambda;
            return lambda * base / (base * base + lam_beta * speed * speed);
        };
        const double h = window.length() / (points - 1);
        double s = f(window.lo) + f(window.hi);
        for (int i = 1; i < points - 1; ++i)
            s += f(window.lo + i * h) * (i % 2 == 1 ? 4.0 : 2.0);
        return s * h / 3.0;
    };
    double best = 0.0;
    double speed_max = 0.0;
    for (int i = 0; i < points; ++i) {
        const double xi = window.lo + window.length() * i / (points - 1);
        speed_max = std::max(speed_max, std::abs(model.flux_jacobian(xi)[0]));
    }
    for (int t = 0; t < tau_points; ++t) {
        const double tau = -speed_max - 1.0 + (2.0 * speed_max + 2.0) * t / (tau_points - 1);
        best = std::max(best, integral(tau));
    }
    return best;
}

}  // namespace

TEST_CASE("eta matches the burgers closed form pi lambda^{1 - beta/2}") {
    const FluxDiffusionModel& burgers = find_model("burgers");
    EtaOptions opts;
    opts.xi_window = {-50.0, 50.0};
    opts.quadrature_cells = 1 << 17;
    const double got = eta(burgers, 1e-4, 1.5, opts).value;
    CHECK(got == doctest::Approx(0.3141592653589793).epsilon(0.01));
}

TEST_CASE("eta for a linear flux saturates at the window length") {
    const FluxDiffusionModel& advection = find_model("advection");
    EtaOptions opts;
    opts.xi_window = {-1.0, 1.0};
    opts.quadrature_cells = 4096;
    // at tau = -c the integrand is identically 1: no decay, condition fails
    const EtaResult r = eta(advection, 1e-3, 1.5, opts);
    CHECK(r.value == doctest::Approx(2.0).epsilon(1e-6));
    CHECK(std::abs(r.tau_at_sup + 1.0) < 1e-6);
}

TEST_CASE("eta under uniform ellipticity: bound and independent quadrature") {
    // Burgers transport with A = I
    FluxDiffusionModel m = find_model("burgers");
    m.diffusion = [](double) { return Mat2{{{1.0, 0.0}, {0.0, 0.0}}}; };
    const double lambda = 0.01;
    EtaOptions opts;
    opts.xi_window = {-1.0, 1.0};
    opts.quadrature_cells = 8192;
    const double got = eta(m, lambda, 1.5, opts).value;
    CHECK(got <= lambda * (1.0 + lambda) * 2.0 + 1e-12);
    const double oracle = eta_simpson_oracle(m, lambda, 1.5, {-1.0, 1.0}, 20001, 3001);
    CHECK(got == doctest::Approx(oracle).epsilon(0.005));
}

TEST_CASE("eta is nonincreasing as the xi window shrinks") {
    const FluxDiffusionModel& burgers = find_model("burgers");
    double previous = -1.0;
    for (double half : {2.0, 5.0, 10.0, 20.0}) {
        EtaOptions opts;
        opts.xi_window = {-half, half};
        opts.quadrature_cells = 16384;
        const double v = eta(burgers, 1e-3, 1.5, opts).value;
        if (previous >= 0.0) CHECK(v + 1e-9 >= previous);
        previous = v;
    }
}

TEST_CASE("eta decay exponent for burgers fits kappa = 1 - beta/2") {
    const FluxDiffusionModel& burgers = find_model("burgers");
    EtaOptions opts;
    opts.xi_window = {-50.0, 50.0};
    opts.quadrature_cells = 1 << 16;
    opts.tau_points = 1001;
    std::vector<double> lambdas = {1e-1, 1e-2, 1e-3, 1e-4, 1e-5};
    std::vector<double> values;
    for (double lam : lambdas) values.push_back(eta(burgers, lam, 1.5, opts).value);
    const DecayReport report = fit_decay_exponent(lambdas, values);
    CHECK(std::abs(report.fitted_exponent - 0.25) < 0.02);
}

TEST_CASE("eta rejects bad arguments") {
    const FluxDiffusionModel& burgers = find_model("burgers");
    CHECK_THROWS_AS(eta(burgers, -1.0, 1.5), std::invalid_argument);
    CHECK_THROWS_AS(eta(burgers, 0.1, 2.5), std::invalid_argument);
    EtaOptions opts;
    opts.quadrature_cells = 8;
    CHECK_THROWS_AS(eta(burgers, 0.1, 1.5, opts), std::invalid_argument);
}

TEST_CASE("delta non-degeneracy integral: burgers small-eps closed form") {
    const FluxDiffusionModel& burgers = find_model("burgers");
    DeltaOptions opts;
    opts.xi_window = {-1.0, 1.0};
    // |{xi in [-1,1] : |xi + tau| <= eps t}| = min(2 eps t, 2), so the
    // integral is 2 eps Gamma(2) up to an exponentially small tail.
    const double eps = 0.01;
    const double exact = 2 * eps * (1 - std::exp(-1 / eps) * (1 + 1 / eps)) + 2 * std::exp(-1 / eps);
    const double got = delta_nondegeneracy(burgers, eps, opts);
    CHECK(got == doctest::Approx(exact).epsilon(0.05));
    CHECK(exact == doctest::Approx(0.02).epsilon(1e-6));
}

TEST_CASE("delta for a linear flux shows no decay") {
    const FluxDiffusionModel& advection = find_model("advection");
    DeltaOptions opts;
    opts.xi_window = {-1.0, 1.0};
    CHECK(delta_nondegeneracy(advection, 0.01, opts) == doctest::Approx(2.0).epsilon(1e-4));
}

TEST_CASE("delta scales linearly in eps for burgers") {
    const FluxDiffusionModel& burgers = find_model("burgers");
    DeltaOptions opts;
    opts.xi_window = {-1.0, 1.0};
    const double a = delta_nondegeneracy(burgers, 0.01, opts);
    const double b = delta_nondegeneracy(burgers, 0.005, opts);
    CHECK(a / b == doctest::Approx(2.0).epsilon(0.10));
}

TEST_CASE("delta stays within [0, window length]") {
    DeltaOptions opts;
    opts.xi_window = {-3.0, 1.0};
    for (const auto& m : builtin_models()) {
        if (m.dim != 1) continue;
        const double v = delta_nondegeneracy(m, 0.05, opts);
        CHECK(v >= 0.0);
        CHECK(v <= opts.xi_window.length() + 1e-12);
    }
    CHECK_THROWS_AS(delta_nondegeneracy(find_model("burgers"), -0.1, opts),
                    std::invalid_argument);
}

TEST_CASE("decay fit recovers exact power laws") {
    std::vector<double> samples = {1.0, 0.1, 0.01, 1e-3, 1e-4};

    DecayReport identity = fit_decay_exponent(samples, samples);
    CHECK(identity.fitted_exponent == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(identity.fit_residual < 1e-12);

    std::vector<double> quarter(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i)
        quarter[i] = std::numbers::pi * std::pow(samples[i], 0.25);
    DecayReport q = fit_decay_exponent(samples, quarter);
    CHECK(q.fitted_exponent == doctest::Approx(0.25).epsilon(1e-10));

    std::vector<double> flat(samples.size(), 3.7);
    DecayReport c = fit_decay_exponent(samples, flat);
    CHECK(c.fitted_exponent == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(c.fit_residual < 1e-12);
}

TEST_CASE("decay fit rejects malformed input") {
    CHECK_THROWS_AS(fit_decay_exponent({1.0, 0.1, 0.01}, {1.0, 0.1, 0.01}),
                    std::invalid_argument);
    CHECK_THROWS_AS(fit_decay_exponent({1.0, 0.5, 0.25, 0.125}, {1.0, 1.0, 1.0, 1.0}),
                    std::invalid_argument);  // under two decades
    CHECK_THROWS_AS(fit_decay_exponent({1.0, 0.1, 0.01, 1e-3}, {1.0, -0.1, 0.01, 1e-3}),
                    std::invalid_argument);
    CHECK_THROWS_AS(fit_decay_exponent({0.1, 1.0, 0.01, 1e-3}, {1.0, 0.1, 0.01, 1e-3}),
                    std::invalid_argument);  // not decreasing
}

TEST_CASE("catalog models evaluate as documented") {
    const FluxDiffusionModel& burgers = find_model("burgers");
    CHECK(burgers.flux_jacobian(2.0)[0] == doctest::Approx(2.0));

    const FluxDiffusionModel& aniso = find_model("burgers2d");
    for (double u : {-3.0, -0.5, 0.0, 1.2, 4.0}) {
        const Mat2 a = aniso.diffusion(u);
        CHECK(a[0][0] >= 0.0);       // eigenvalues {cut^2, 0}
        CHECK(a[1][1] == 0.0);
        CHECK(a[0][1] == a[1][0]);   // symmetric
    }
    CHECK(aniso.diffusion(0.0)[0][0] == 0.0);  // degenerate at the origin

    const FluxDiffusionModel& advection = find_model("advection");
    for (double u : {-2.0, 0.0, 3.0}) CHECK(advection.flux_hessian(u)[0] == 0.0);

    CHECK_THROWS_WITH_AS(find_model("nope"),
                         doctest::Contains("valid models"), std::invalid_argument);
}

TEST_CASE("analytic derivatives agree with finite differences for the catalog") {
    for (const auto& m : builtin_models()) {
        const double err = derivative_consistency_error(m, {-3.0, 3.0}, 4097);
        INFO(m.name);
        CHECK(err < 1e-6);
    }
}

TEST_CASE("diffusion matrices stay positive semidefinite on samples") {
    for (const auto& m : builtin_models()) {
        for (int i = 0; i <= 200; ++i) {
            const double xi = -5.0 + 10.0 * i / 200;
            const Mat2 a = m.diffusion(xi);
            // 2x2 PSD: nonnegative trace and determinant, symmetric
            CHECK(a[0][1] == a[1][0]);
            CHECK(a[0][0] >= -1e-12);
            CHECK(a[1][1] >= -1e-12);
            CHECK(a[0][0] * a[1][1] - a[0][1] * a[1][0] >= -1e-12);
        }
    }
}
