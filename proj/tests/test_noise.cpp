#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <numbers>

#include "sclab/noise.hpp"

using namespace sclab;

TEST_CASE("sigma construction: zero mean, sups, and rejection of k = 0") {
    const TorusGrid g(1, 256);

    const NoiseModel empty = make_sigma(g, {});
    CHECK(max_abs(empty.sigma) == 0.0);
    CHECK(empty.w1inf_factor() == 0.0);

    // single cosine at the fundamental: sup 1, grad sup 2 pi, mean 0
    const NoiseModel one = make_sigma(g, {{{1, 0}, 1.0, false}});
    CHECK(std::abs(mean(one.sigma)) < 1e-14);
    CHECK(one.sup_sigma == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(one.lipschitz_bound == doctest::Approx(2.0 * std::numbers::pi).epsilon(1e-3));

    const NoiseModel two = make_sigma(g, {{{1, 0}, 0.4, false}, {{3, 0}, 0.2, true}});
    CHECK(std::abs(mean(two.sigma)) < 1e-14);

    CHECK_THROWS_AS(make_sigma(g, {{{0, 0}, 1.0, false}}), std::invalid_argument);
}

TEST_CASE("increments replay bit-exactly from the seed") {
    NoisePath a(42, 1e-3);
    NoisePath b(42, 1e-3);
    for (int i = 0; i < 1000; ++i) CHECK(a.next_increment() == b.next_increment());
    CHECK(a.running_w() == b.running_w());

    NoisePath c(43, 1e-3);
    bool all_equal = true;
    NoisePath a2(42, 1e-3);
    for (int i = 0; i < 100; ++i) all_equal = all_equal && (a2.next_increment() == c.next_increment());
    CHECK(!all_equal);
}

TEST_CASE("running sum equals the replayed increments") {
    NoisePath p(7, 0.01);
    double sum = 0.0;
    for (int i = 0; i < 5000; ++i) sum += p.next_increment();
    CHECK(p.running_w() == doctest::Approx(sum).epsilon(1e-12));
    CHECK(p.step_index() == 5000);
}

TEST_CASE("increment moments match N(0, dt)") {
    const double dt = 0.25;
    NoisePath p(123456789, dt);
    const int n = 1'000'000;
    double sum = 0.0, sumsq = 0.0;
    for (int i = 0; i < n; ++i) {
        const double dw = p.next_increment();
        sum += dw;
        sumsq += dw * dw;
    }
    const double mean_hat = sum / n;
    const double var_hat = sumsq / n - mean_hat * mean_hat;
    // CLT bound on the mean: 4 standard errors
    CHECK(std::abs(mean_hat) < 4.0 * std::sqrt(dt / n));
    // chi-square concentration keeps the variance within 1%
    CHECK(var_hat == doctest::Approx(dt).epsilon(0.01));
}

TEST_CASE("window sup: trivial windows and a brute-force replay oracle") {
    const TorusGrid g(1, 128);
    const NoiseModel model = make_sigma(g, {{{1, 0}, 0.3, false}});
    const NoiseModel zero = make_sigma(g, {});

    CHECK(window_noise_sup(zero, 5, 1e-3, {0, 1000}) == 0.0);
    CHECK(window_noise_sup(model, 5, 1e-3, {100, 100}) == 0.0);
    CHECK_THROWS_AS(window_noise_sup(model, 5, 1e-3, {10, 5}), std::invalid_argument);

    // oracle: scan the stored increments directly
    const std::uint64_t seed = 99;
    const double dt = 1e-3;
    NoisePath replay(seed, dt);
    std::vector<double> w(2001, 0.0);
    for (int i = 0; i < 2000; ++i) w[i + 1] = w[i] + replay.next_increment();
    const std::uint64_t a = 500, b = 1500;
    double sup = 0.0;
    for (std::uint64_t i = a + 1; i <= b; ++i) sup = std::max(sup, std::abs(w[i] - w[a]));
    const double expect = sup * model.w1inf_factor();
    CHECK(window_noise_sup(model, seed, dt, {a, b}) == doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("small-noise event frequency: degenerate thresholds") {
    const TorusGrid g(1, 64);
    const NoiseModel model = make_sigma(g, {{{1, 0}, 1.0, false}});
    const EventFrequency always =
        small_noise_event_frequency(model, 1, 200, 1e-2, 1.0, 1e12);
    CHECK(always.estimate == 1.0);
    const EventFrequency never = small_noise_event_frequency(model, 1, 200, 1e-2, 1.0, 0.0);
    CHECK(never.estimate == 0.0);
    CHECK_THROWS_AS(small_noise_event_frequency(model, 1, 50, 1e-2, 1.0, 1.0),
                    std::invalid_argument);
}

TEST_CASE("event frequency matches the reflection-principle series") {
    // sigma with sup|sigma| = sup|grad sigma| = 1 on a period-2pi torus, so
    // the W^{1,inf} factor is 2 and kappa_tilde = 1 thresholds sup|W| at 1/2.
    const TorusGrid g(1, 256, 2.0 * std::numbers::pi);
    const NoiseModel model = make_sigma(g, {{{1, 0}, 1.0, false}});
    CHECK(model.w1inf_factor() == doctest::Approx(2.0).epsilon(1e-3));

    const double oracle = brownian_sup_probability(0.5, 1.0);
    CHECK(oracle == doctest::Approx(0.0091569).epsilon(1e-3));  // frozen from the series

    const EventFrequency freq =
        small_noise_event_frequency(model, 2024, 1000, 1e-5, 1.0, 1.0);
    CHECK(freq.wilson_low <= oracle);
    CHECK(oracle <= freq.wilson_high);
}

TEST_CASE("event frequency is monotone in the threshold and the horizon") {
    const TorusGrid g(1, 64);
    const NoiseModel model = make_sigma(g, {{{1, 0}, 0.5, false}});
    double previous = -1.0;
    for (double kappa : {0.1, 0.3, 0.6, 1.2, 2.5}) {
        const double est =
            small_noise_event_frequency(model, 31, 400, 1e-3, 0.5, kappa).estimate;
        CHECK(est >= previous);
        previous = est;
    }
    previous = 2.0;
    for (double horizon : {0.125, 0.25, 0.5, 1.0}) {
        const double est =
            small_noise_event_frequency(model, 32, 400, 1e-3, horizon, 0.8).estimate;
        CHECK(est <= previous);
        previous = est;
    }
}

TEST_CASE("random zero-mean fields are zero mean and amplitude bounded") {
    const TorusGrid g(1, 128);
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const Field f = random_zero_mean_field(g, 0.8, 4, seed);
        CHECK(std::abs(mean(f)) < 1e-13);
        CHECK(max_abs(f) == doctest::Approx(0.8).epsilon(1e-12));
    }
    const TorusGrid g2(2, 32);
    const Field f2 = random_zero_mean_field(g2, 1.0, 3, 5);
    CHECK(std::abs(mean(f2)) < 1e-13);
}
