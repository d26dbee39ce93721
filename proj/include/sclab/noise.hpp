#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "sclab/grid.hpp"

namespace sclab {

/// One cosine or sine mode of the noise amplitude sigma(x). Zero frequency
/// is rejected so sigma always integrates to zero over the torus.
struct SigmaMode {
    std::array<int, 2> freq{0, 0};
    double amplitude = 0.0;
    bool sine = false;
};

/// Spatial noise amplitude with its grid sups, built once and shared
/// read-only across trajectories.
struct NoiseModel {
    Field sigma;
    std::vector<SigmaMode> mode_spec;
    double sup_sigma = 0.0;
    double lipschitz_bound = 0.0;  // sup |grad sigma| by spectral differentiation
    double l2_norm_sq = 0.0;       // ||sigma||_{L^2}^2, cached for the ledger

    double w1inf_factor() const { return sup_sigma + lipschitz_bound; }
};

NoiseModel make_sigma(const TorusGrid& grid, const std::vector<SigmaMode>& mode_spec);

/// Counter-based Gaussian stream: Philox4x32-10 keyed by (seed, index).
/// Increments are a pure function of (seed, step index), so ensemble
/// members and checkpoint restarts replay bit-exactly.
double gaussian_at(std::uint64_t seed, std::uint64_t index);

/// Seeded Wiener increment stream with the running W(t) and the anchor
/// used by small-noise windows.
class NoisePath {
public:
    NoisePath(std::uint64_t seed, double dt);

    std::uint64_t seed() const { return seed_; }
    double dt() const { return dt_; }
    std::uint64_t step_index() const { return index_; }
    double running_w() const { return running_w_; }
    double anchor_w() const { return anchor_w_; }

    /// Next increment dW ~ N(0, dt); advances the running sum.
    double next_increment();

    /// Peek at increment i without advancing.
    double increment_at(std::uint64_t i) const;

    void set_anchor() { anchor_w_ = running_w_; }

    /// Restore the stream position after a checkpoint resume. running_w is
    /// taken from the checkpoint rather than replayed, so the resumed sum
    /// is bit-identical to the uninterrupted one.
    void restore(std::uint64_t index, double running_w);

private:
    std::uint64_t seed_;
    double dt_;
    std::uint64_t index_ = 0;
    double running_w_ = 0.0;
    double anchor_w_ = 0.0;
};

struct StepWindow {
    std::uint64_t first_step = 0;  // inclusive
    std::uint64_t last_step = 0;   // exclusive
};

/// Discrete sup over the window of ||sigma (W(t) - W(t_a))||_{W^{1,inf}},
/// i.e. (sup_t |W(t) - W(t_a)|) * (sup|sigma| + sup|grad sigma|), replayed
/// from the seed.
double window_noise_sup(const NoiseModel& model, std::uint64_t seed, double dt,
                        StepWindow window);

struct EventFrequency {
    double estimate = 0.0;
    double wilson_low = 0.0;
    double wilson_high = 0.0;
    int successes = 0;
    int trials = 0;
};

/// Fraction of independent paths whose window_noise_sup over [0, T] stays
/// below kappa_tilde, with a Wilson 95% interval.
EventFrequency small_noise_event_frequency(const NoiseModel& model, std::uint64_t base_seed,
                                           int paths, double dt, double window_length,
                                           double kappa_tilde);

/// P(sup_{[0,T]} |W| <= a) by the reflection-principle series, summed until
/// increments drop below 1e-12. Used as the oracle for the event frequency.
double brownian_sup_probability(double a, double T);

/// Zero-mean random field from seeded Gaussian coefficients on the modes
/// 1..max_mode per axis, scaled so max|u| is close to (and never above)
/// the requested amplitude.
Field random_zero_mean_field(const TorusGrid& grid, double amplitude, int max_mode,
                             std::uint64_t seed);

}  // namespace sclab
