#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "sclab/grid.hpp"
#include "sclab/model.hpp"
#include "sclab/noise.hpp"
#include "sclab/solver.hpp"

namespace sclab {

/// Plain-text key = value configuration. Keys may repeat (noise.mode);
/// serialization is a stable sort by key, so configs round-trip unchanged
/// and hash independently of cosmetic line order.
struct ExperimentConfig {
    std::vector<std::pair<std::string, std::string>> entries;

    bool has(const std::string& key) const;
    std::string get(const std::string& key) const;
    std::string get_or(const std::string& key, const std::string& fallback) const;
    double number(const std::string& key) const;
    double number_or(const std::string& key, double fallback) const;
    long long integer_or(const std::string& key, long long fallback) const;
    std::vector<std::string> all(const std::string& key) const;
};

ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config_file(const std::string& path);
std::string canonical_config(const ExperimentConfig& config);
std::array<std::uint8_t, 32> config_hash(const ExperimentConfig& config);

/// Throws std::invalid_argument with the offending key and the valid
/// choices when the config cannot drive an experiment.
void validate_config(const ExperimentConfig& config);

constexpr std::array<char, 8> kCheckpointMagic = {'S', 'C', 'L', 'I', 'N', 'V', 'M', '1'};

struct Checkpoint {
    std::uint32_t version = 1;
    std::array<std::uint8_t, 32> config_hash{};
    double time = 0.0;
    std::uint64_t step_count = 0;
    std::vector<double> state;
    std::uint64_t seed = 0;
    std::uint64_t noise_step_index = 0;
    double dissipation = 0.0;
    double ito_input = 0.0;
    double martingale = 0.0;
    double initial_energy = 0.0;
    std::string config_text;  // canonical form, for the mismatch diff
};

void write_checkpoint(const std::string& path, const Checkpoint& ckpt);
Checkpoint read_checkpoint(const std::string& path);

/// Builders shared by the runner, the tests, and the bindings.
TorusGrid grid_from_config(const ExperimentConfig& config);
SolverConfig solver_from_config(const ExperimentConfig& config);
std::vector<SigmaMode> modes_from_config(const ExperimentConfig& config, int dim);
Field initial_field_from_config(const ExperimentConfig& config, const TorusGrid& grid,
                                const std::string& key = "init");

/// Runs the configured experiment, writing results.json, series CSVs, and
/// checkpoints under out_dir. Throws std::invalid_argument on validation
/// problems and SolverError on numerical aborts; the CLI maps these to exit
/// codes 2 and 3.
void run_experiment(const ExperimentConfig& config, const std::string& out_dir,
                    const std::string& resume_path = "");

std::string catalog_text();

}  // namespace sclab
