#include "sclab/experiment.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "sclab/averaging.hpp"
#include "sclab/ergodics.hpp"
#include "sclab/json_writer.hpp"
#include "sclab/kinetic.hpp"

static_assert(std::endian::native == std::endian::little,
              "checkpoint format is little-endian; big-endian hosts are unsupported");

namespace sclab {

namespace {

std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r");
    if (begin == std::string::npos) return "";
    const auto end = s.find_last_not_of(" \t\r");
    return s.substr(begin, end - begin + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == sep) {
            out.push_back(trim(cur));
            cur.clear();
        } else {
            cur += c;
        }
    }
    out.push_back(trim(cur));
    return out;
}

}  // namespace

bool ExperimentConfig::has(const std::string& key) const {
    for (const auto& [k, v] : entries)
        if (k == key) return true;
    return false;
}

std::string ExperimentConfig::get(const std::string& key) const {
    for (const auto& [k, v] : entries)
        if (k == key) return v;
    throw std::invalid_argument("config: missing required key '" + key + "'");
}

std::string ExperimentConfig::get_or(const std::string& key, const std::string& fallback) const {
    for (const auto& [k, v] : entries)
        if (k == key) return v;
    return fallback;
}

double ExperimentConfig::number(const std::string& key) const {
    const std::string v = get(key);
    try {
        std::size_t used = 0;
        const double x = std::stod(v, &used);
        if (used != v.size()) throw std::invalid_argument(v);
        return x;
    } catch (const std::exception&) {
        throw std::invalid_argument("config: key '" + key + "' is not a number: '" + v + "'");
    }
}

double ExperimentConfig::number_or(const std::string& key, double fallback) const {
    return has(key) ? number(key) : fallback;
}

long long ExperimentConfig::integer_or(const std::string& key, long long fallback) const {
    if (!has(key)) return fallback;
    const double x = number(key);
    const auto n = static_cast<long long>(std::llround(x));
    if (static_cast<double>(n) != x)
        throw std::invalid_argument("config: key '" + key + "' must be an integer");
    return n;
}

std::vector<std::string> ExperimentConfig::all(const std::string& key) const {
    std::vector<std::string> out;
    for (const auto& [k, v] : entries)
        if (k == key) out.push_back(v);
    return out;
}

ExperimentConfig parse_config(const std::string& text) {
    ExperimentConfig config;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("config line " + std::to_string(lineno) +
                                        ": expected 'key = value'");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty() || value.empty())
            throw std::invalid_argument("config line " + std::to_string(lineno) +
                                        ": empty key or value");
        config.entries.emplace_back(key, value);
    }
    return config;
}

ExperimentConfig load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open config file '" + path + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str());
}

std::string canonical_config(const ExperimentConfig& config) {
    auto sorted = config.entries;
    std::stable_sort(sorted.begin(), sorted.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });
    std::string out;
    for (const auto& [k, v] : sorted) out += k + " = " + v + "\n";
    return out;
}

std::array<std::uint8_t, 32> config_hash(const ExperimentConfig& config) {
    const std::string text = canonical_config(config);
    std::array<std::uint8_t, 32> digest{};
    unsigned int len = 0;
    EVP_Digest(text.data(), text.size(), digest.data(), &len, EVP_sha256(), nullptr);
    return digest;
}

namespace {

const std::vector<std::string> kExperiments = {"simulate",      "couple",
                                               "kb_measure",    "nondegeneracy",
                                               "averaging_check", "kinetic_check"};

std::string joined_names(const std::vector<std::string>& names) {
    std::string out;
    for (const auto& n : names) out += (out.empty() ? "" : ", ") + n;
    return out;
}

bool experiment_uses_dynamics(const std::string& kind) {
    return kind == "simulate" || kind == "couple" || kind == "kb_measure" ||
           kind == "kinetic_check";
}

}  // namespace

void validate_config(const ExperimentConfig& config) {
    if (config.integer_or("schema_version", -1) != 1)
        throw std::invalid_argument("config: schema_version must be 1");
    const std::string kind = config.get("experiment");
    if (std::find(kExperiments.begin(), kExperiments.end(), kind) == kExperiments.end())
        throw std::invalid_argument("config: unknown experiment '" + kind +
                                    "'; valid experiments: " + joined_names(kExperiments));
    find_model(config.get("model"));  // throws with the valid keys
    grid_from_config(config);
    solver_from_config(config);
    if (experiment_uses_dynamics(kind)) {
        if (!config.has("noise.seed"))
            throw std::invalid_argument(
                "config: noise.seed is required; unseeded runs are not reproducible");
        if (!config.has("horizon"))
            throw std::invalid_argument("config: horizon is required for " + kind);
        const TorusGrid grid = grid_from_config(config);
        modes_from_config(config, grid.dim());
        initial_field_from_config(config, grid);
    }
}

TorusGrid grid_from_config(const ExperimentConfig& config) {
    const int dim = static_cast<int>(config.integer_or("grid.dim", 1));
    const int cells = static_cast<int>(config.integer_or("grid.cells", 256));
    const double period = config.number_or("grid.period", 1.0);
    return TorusGrid(dim, cells, period);
}

SolverConfig solver_from_config(const ExperimentConfig& config) {
    SolverConfig cfg;
    cfg.cfl = config.number_or("solver.cfl", 0.4);
    if (!(cfg.cfl > 0.0 && cfg.cfl <= 1.0))
        throw std::invalid_argument("config: solver.cfl must lie in (0, 1]");
    const std::string scheme = config.get_or("solver.flux", "engquist_osher");
    if (scheme == "engquist_osher")
        cfg.flux_scheme = FluxScheme::engquist_osher;
    else if (scheme == "lax_friedrichs")
        cfg.flux_scheme = FluxScheme::lax_friedrichs;
    else
        throw std::invalid_argument(
            "config: solver.flux must be engquist_osher or lax_friedrichs");
    cfg.dt_cap = config.number_or("solver.dt_cap", 1e-2);
    cfg.max_speed_estimate = config.number_or("solver.max_speed", 2.0);
    cfg.diffusion_stability_factor = config.number_or("solver.diffusion_factor", 0.25);
    if (!(cfg.diffusion_stability_factor > 0.0 && cfg.diffusion_stability_factor <= 0.5))
        throw std::invalid_argument("config: solver.diffusion_factor must lie in (0, 0.5]");
    cfg.state_bound = config.number_or("solver.state_bound", cfg.max_speed_estimate);
    return cfg;
}

std::vector<SigmaMode> modes_from_config(const ExperimentConfig& config, int dim) {
    std::vector<SigmaMode> modes;
    for (const std::string& text : config.all("noise.mode")) {
        std::istringstream in(text);
        SigmaMode m;
        if (dim == 1) {
            if (!(in >> m.freq[0] >> m.amplitude))
                throw std::invalid_argument("config: noise.mode expects 'n amplitude [sin|cos]'");
        } else {
            if (!(in >> m.freq[0] >> m.freq[1] >> m.amplitude))
                throw std::invalid_argument(
                    "config: noise.mode expects 'nx ny amplitude [sin|cos]'");
        }
        std::string phase;
        if (in >> phase) {
            if (phase == "sin")
                m.sine = true;
            else if (phase != "cos")
                throw std::invalid_argument("config: noise.mode phase must be sin or cos");
        }
        modes.push_back(m);
    }
    return modes;
}

Field initial_field_from_config(const ExperimentConfig& config, const TorusGrid& grid,
                                const std::string& key) {
    const std::string spec = config.get_or(key, "zero");
    const auto colon = spec.find(':');
    const std::string kind = spec.substr(0, colon);
    const std::string args = colon == std::string::npos ? "" : spec.substr(colon + 1);
    const auto parts = split(args, ',');
    auto need = [&](std::size_t n) {
        if (args.empty() || parts.size() != n)
            throw std::invalid_argument("config: " + key + " '" + kind + "' expects " +
                                        std::to_string(n) + " comma-separated arguments");
    };

    Field f(grid);
    const int n = grid.cells_per_axis();
    if (kind == "zero") {
        return f;
    }
    if (kind == "constant") {
        need(1);
        const double c = std::stod(parts[0]);
        for (double& v : f.values()) v = c;
        return f;
    }
    if (kind == "sine") {
        need(2);
        const double amp = std::stod(parts[0]);
        const int mode = std::stoi(parts[1]);
        for (int iy = 0; iy < (grid.dim() == 2 ? n : 1); ++iy)
            for (int ix = 0; ix < n; ++ix)
                f[grid.flat_index(ix, iy)] =
                    amp * std::sin(2.0 * std::numbers::pi * mode * ix / n);
        return f;
    }
    if (kind == "riemann") {
        need(2);
        const double left = std::stod(parts[0]);
        const double right = std::stod(parts[1]);
        for (int iy = 0; iy < (grid.dim() == 2 ? n : 1); ++iy)
            for (int ix = 0; ix < n; ++ix)
                f[grid.flat_index(ix, iy)] = ix < n / 2 ? left : right;
        return f;
    }
    if (kind == "random") {
        need(3);
        return random_zero_mean_field(grid, std::stod(parts[0]), std::stoi(parts[1]),
                                      static_cast<std::uint64_t>(std::stoull(parts[2])));
    }
    throw std::invalid_argument("config: unknown " + key +
                                " kind '" + kind +
                                "'; valid kinds: zero, constant, sine, riemann, random");
}

namespace {

template <typename T>
void write_raw(std::ofstream& out, const T& value) {
    out.write(reinterpret_cast<const char*>(&value), sizeof value);
}

template <typename T>
void read_raw(std::ifstream& in, T& value) {
    in.read(reinterpret_cast<char*>(&value), sizeof value);
}

}  // namespace

void write_checkpoint(const std::string& path, const Checkpoint& ckpt) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write checkpoint '" + path + "'");
    out.write(kCheckpointMagic.data(), kCheckpointMagic.size());
    write_raw(out, ckpt.version);
    out.write(reinterpret_cast<const char*>(ckpt.config_hash.data()), ckpt.config_hash.size());
    write_raw(out, ckpt.time);
    write_raw(out, ckpt.step_count);
    const std::uint64_t count = ckpt.state.size();
    write_raw(out, count);
    out.write(reinterpret_cast<const char*>(ckpt.state.data()),
              static_cast<std::streamsize>(count * sizeof(double)));
    write_raw(out, ckpt.seed);
    write_raw(out, ckpt.noise_step_index);
    write_raw(out, ckpt.dissipation);
    write_raw(out, ckpt.ito_input);
    write_raw(out, ckpt.martingale);
    write_raw(out, ckpt.initial_energy);
    const std::uint32_t text_len = static_cast<std::uint32_t>(ckpt.config_text.size());
    write_raw(out, text_len);
    out.write(ckpt.config_text.data(), text_len);
}

Checkpoint read_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::invalid_argument("cannot open checkpoint '" + path + "'");
    std::array<char, 8> magic{};
    in.read(magic.data(), magic.size());
    if (!in || magic != kCheckpointMagic)
        throw std::invalid_argument("checkpoint '" + path + "': bad magic bytes");
    Checkpoint ckpt;
    read_raw(in, ckpt.version);
    if (ckpt.version != 1)
        throw std::invalid_argument("checkpoint '" + path + "': unsupported version " +
                                    std::to_string(ckpt.version));
    in.read(reinterpret_cast<char*>(ckpt.config_hash.data()), ckpt.config_hash.size());
    read_raw(in, ckpt.time);
    read_raw(in, ckpt.step_count);
    std::uint64_t count = 0;
    read_raw(in, count);
    ckpt.state.resize(count);
    in.read(reinterpret_cast<char*>(ckpt.state.data()),
            static_cast<std::streamsize>(count * sizeof(double)));
    read_raw(in, ckpt.seed);
    read_raw(in, ckpt.noise_step_index);
    read_raw(in, ckpt.dissipation);
    read_raw(in, ckpt.ito_input);
    read_raw(in, ckpt.martingale);
    read_raw(in, ckpt.initial_energy);
    std::uint32_t text_len = 0;
    read_raw(in, text_len);
    ckpt.config_text.resize(text_len);
    in.read(ckpt.config_text.data(), text_len);
    if (!in) throw std::invalid_argument("checkpoint '" + path + "': truncated file");
    return ckpt;
}

namespace {

namespace fs = std::filesystem;

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
    out << text;
}

std::string format17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void write_run_meta(const fs::path& dir) {
    const auto now = std::chrono::system_clock::now().time_since_epoch();
    const auto seconds = std::chrono::duration_cast<std::chrono::seconds>(now).count();
    JsonWriter w;
    w.begin_object();
    w.key("wall_clock_unix_seconds").integer(seconds);
    w.end_object();
    write_text(dir / "run_meta.json", w.str());
}

struct Assembly {
    TorusGrid grid;
    const FluxDiffusionModel* model;
    SolverConfig solver;
    NoiseModel noise;
    std::uint64_t seed;
};

Assembly assemble(const ExperimentConfig& config) {
    TorusGrid grid = grid_from_config(config);
    const FluxDiffusionModel& model = find_model(config.get("model"));
    if (model.dim != grid.dim())
        throw std::invalid_argument("config: model '" + model.name + "' is " +
                                    std::to_string(model.dim) + "-dimensional but grid.dim is " +
                                    std::to_string(grid.dim()));
    NoiseModel noise = make_sigma(grid, modes_from_config(config, grid.dim()));
    const auto seed = static_cast<std::uint64_t>(config.integer_or("noise.seed", 0));
    return Assembly{std::move(grid), &model, solver_from_config(config), std::move(noise), seed};
}

Checkpoint checkpoint_of(const Trajectory& traj, const ExperimentConfig& config) {
    Checkpoint ckpt;
    ckpt.config_hash = config_hash(config);
    ckpt.time = traj.time;
    ckpt.step_count = traj.step_count;
    ckpt.state.assign(traj.state.values().begin(), traj.state.values().end());
    ckpt.seed = traj.noise.seed();
    ckpt.noise_step_index = traj.noise.step_index();
    ckpt.dissipation = traj.ledger.dissipation;
    ckpt.ito_input = traj.ledger.ito_input;
    ckpt.martingale = traj.ledger.martingale;
    ckpt.initial_energy = traj.ledger.initial_energy;
    ckpt.config_text = canonical_config(config);
    return ckpt;
}

std::string hash_hex(const std::array<std::uint8_t, 32>& h) {
    std::string out;
    for (std::uint8_t b : h) {
        char buf[3];
        std::snprintf(buf, sizeof buf, "%02x", b);
        out += buf;
    }
    return out;
}

void run_simulate(const ExperimentConfig& config, const fs::path& dir,
                  const std::string& resume_path) {
    Assembly a = assemble(config);
    const double horizon = config.number("horizon");
    const double snapshot_dt = config.number_or("snapshot_dt", 0.01);
    const double sobolev_s = config.number_or("observable.sobolev_s", 0.25);
    const auto checkpoint_every =
        static_cast<std::uint64_t>(config.integer_or("checkpoint_every", 0));

    Field u0 = initial_field_from_config(config, a.grid);
    Trajectory traj = make_trajectory(std::move(u0), a.seed, a.solver, *a.model);

    if (!resume_path.empty()) {
        const Checkpoint ckpt = read_checkpoint(resume_path);
        if (ckpt.config_hash != config_hash(config)) {
            std::string diff = "resume refused: config hash mismatch (checkpoint " +
                               hash_hex(ckpt.config_hash) + ", config " +
                               hash_hex(config_hash(config)) + ")\n";
            const std::string current = canonical_config(config);
            std::istringstream stored(ckpt.config_text), live(current);
            std::string sl, ll;
            while (true) {
                const bool more_stored = static_cast<bool>(std::getline(stored, sl));
                const bool more_live = static_cast<bool>(std::getline(live, ll));
                if (!more_stored && !more_live) break;
                if (!more_stored) sl.clear();
                if (!more_live) ll.clear();
                if (sl != ll)
                    diff += "  checkpoint: '" + sl + "'  vs  config: '" + ll + "'\n";
            }
            throw std::invalid_argument(diff);
        }
        if (ckpt.state.size() != a.grid.cell_count())
            throw std::invalid_argument("resume refused: state size mismatch");
        std::copy(ckpt.state.begin(), ckpt.state.end(), traj.state.values().begin());
        traj.time = ckpt.time;
        traj.step_count = ckpt.step_count;
        traj.noise.restore(ckpt.noise_step_index, 0.0);
        traj.ledger.dissipation = ckpt.dissipation;
        traj.ledger.ito_input = ckpt.ito_input;
        traj.ledger.martingale = ckpt.martingale;
        traj.ledger.initial_energy = ckpt.initial_energy;
    }

    std::ofstream series(dir / "series.csv");
    series << "time,l1,l2,mean,sobolev_s,dissipation,ito_input,martingale\n";
    const auto every = std::max<std::uint64_t>(
        1, static_cast<std::uint64_t>(std::floor(snapshot_dt / traj.dt)));
    std::vector<Observer> observers;
    observers.push_back({every, [&](const Trajectory& t) {
                             series << format17(t.time) << ',' << format17(l1_norm(t.state))
                                    << ',' << format17(l2_norm(t.state)) << ','
                                    << format17(mean(t.state)) << ','
                                    << format17(sobolev_seminorm(t.state, sobolev_s)) << ','
                                    << format17(t.ledger.dissipation) << ','
                                    << format17(t.ledger.ito_input) << ','
                                    << format17(t.ledger.martingale) << '\n';
                         }});
    if (checkpoint_every > 0)
        observers.push_back({checkpoint_every, [&](const Trajectory& t) {
                                 if (t.step_count == 0) return;
                                 write_checkpoint((dir / ("checkpoint_" +
                                                          std::to_string(t.step_count) + ".ckpt"))
                                                      .string(),
                                                  checkpoint_of(t, config));
                             }});

    run(traj, *a.model, a.noise, a.solver, horizon, observers);
    write_checkpoint((dir / "final.ckpt").string(), checkpoint_of(traj, config));

    JsonWriter w;
    w.begin_object();
    w.key("experiment").string("simulate");
    w.key("model").string(a.model->name);
    w.key("dt").number(traj.dt);
    w.key("steps").integer(static_cast<long long>(traj.step_count));
    w.key("final_time").number(traj.time);
    w.key("final_l1").number(l1_norm(traj.state));
    w.key("final_l2").number(l2_norm(traj.state));
    w.key("final_mean").number(mean(traj.state));
    w.key("dissipation").number(traj.ledger.dissipation);
    w.key("ito_input").number(traj.ledger.ito_input);
    w.key("martingale").number(traj.ledger.martingale);
    w.key("energy_residual").number(energy_balance_residual(traj));
    w.end_object();
    write_text(dir / "results.json", w.str());
}

void run_couple(const ExperimentConfig& config, const fs::path& dir) {
    Assembly a = assemble(config);
    const double horizon = config.number("horizon");
    const Field u0 = initial_field_from_config(config, a.grid, "init");
    const Field v0 = initial_field_from_config(config, a.grid, "couple.init_v");
    const double T = config.number_or("couple.T", 1.0);
    const double kappa_hat = config.number_or("couple.kappa_hat", 1.0);
    const double kappa_tilde = config.number_or("couple.kappa_tilde", 0.1);
    const double snapshot_dt = config.number_or("snapshot_dt", 0.01);

    const CouplingRun run = coupling_experiment(u0, v0, *a.model, a.noise, a.solver, a.seed, T,
                                                kappa_hat, kappa_tilde, horizon, snapshot_dt);

    std::ofstream gaps(dir / "gap.csv");
    gaps << "time,gap\n";
    for (const auto& [t, g] : run.l1_gap_history)
        gaps << format17(t) << ',' << format17(g) << '\n';
    write_text(dir / "results.json", coupling_run_to_json(run));
}

void run_kb_measure(const ExperimentConfig& config, const fs::path& dir) {
    Assembly a = assemble(config);
    const double horizon = config.number("horizon");
    const double snapshot_dt = config.number_or("snapshot_dt", 0.01);
    const double burn_in = config.number_or("kb.burn_in", 0.1);
    const double sobolev_s = config.number_or("observable.sobolev_s", 0.25);

    Field u0 = initial_field_from_config(config, a.grid);
    Trajectory traj = make_trajectory(std::move(u0), a.seed, a.solver, *a.model);

    const int n = a.grid.cells_per_axis();
    const std::array<std::size_t, 4> cells = {0, static_cast<std::size_t>(n / 4),
                                              static_cast<std::size_t>(n / 2),
                                              static_cast<std::size_t>(3 * n / 4)};
    std::vector<std::pair<std::string, Observable>> observables;
    observables.emplace_back("l1", [](const Field& f) { return l1_norm(f); });
    observables.emplace_back("l2", [](const Field& f) { return l2_norm(f); });
    observables.emplace_back("sobolev",
                             [sobolev_s](const Field& f) { return sobolev_seminorm(f, sobolev_s); });
    for (std::size_t c : cells)
        observables.emplace_back("cell_" + std::to_string(c),
                                 [c](const Field& f) { return f[c]; });

    std::vector<EmpiricalMeasure> measures(observables.size());
    const double window_start = burn_in * horizon;
    for (std::size_t i = 0; i < observables.size(); ++i) {
        measures[i].observable_name = observables[i].first;
        measures[i].window_start = window_start;
        measures[i].window_end = horizon;
    }
    const auto every = std::max<std::uint64_t>(
        1, static_cast<std::uint64_t>(std::floor(snapshot_dt / traj.dt)));
    Observer obs{every, [&](const Trajectory& t) {
                     if (t.time + 1e-12 < window_start) return;
                     for (std::size_t i = 0; i < observables.size(); ++i)
                         measures[i].samples.emplace_back(t.time,
                                                          observables[i].second(t.state));
                 }};
    run(traj, *a.model, a.noise, a.solver, horizon, {obs});

    std::string doc = "[";
    for (std::size_t i = 0; i < measures.size(); ++i)
        doc += (i ? "," : "") + empirical_measure_to_json(measures[i]);
    doc += "]";
    write_text(dir / "measures.json", doc);

    JsonWriter w;
    w.begin_object();
    w.key("experiment").string("kb_measure");
    w.key("model").string(a.model->name);
    w.key("horizon").number(horizon);
    w.key("burn_in").number(burn_in);
    w.key("observables").begin_array();
    for (const auto& m : measures) {
        double acc = 0.0;
        for (const auto& [t, v] : m.samples) acc += v;
        w.begin_object();
        w.key("name").string(m.observable_name);
        w.key("samples").integer(static_cast<long long>(m.samples.size()));
        w.key("time_average").number(m.samples.empty() ? 0.0 : acc / m.samples.size());
        w.end_object();
    }
    w.end_array();
    w.end_object();
    write_text(dir / "results.json", w.str());
}

void run_nondegeneracy(const ExperimentConfig& config, const fs::path& dir) {
    const FluxDiffusionModel& model = find_model(config.get("model"));
    const std::string kind = config.get_or("nondeg.kind", "eta");
    const auto window_parts = split(config.get_or("nondeg.window", "-50,50"), ',');
    if (window_parts.size() != 2)
        throw std::invalid_argument("config: nondeg.window expects 'lo,hi'");
    const Interval window{std::stod(window_parts[0]), std::stod(window_parts[1])};

    if (kind == "eta") {
        EtaOptions opts;
        opts.xi_window = window;
        opts.quadrature_cells = static_cast<int>(config.integer_or("nondeg.quadrature_cells",
                                                                   1 << 16));
        opts.tau_points = static_cast<int>(config.integer_or("nondeg.tau_points", 2001));
        const double beta = config.number_or("nondeg.beta", 1.5);
        std::vector<double> lambdas;
        for (const auto& s : split(config.get_or("nondeg.lambda", "1e-1,1e-2,1e-3,1e-4,1e-5"), ','))
            lambdas.push_back(std::stod(s));
        std::vector<double> values;
        bool any_boundary = false;
        for (double lam : lambdas) {
            const EtaResult r = eta(model, lam, beta, opts);
            values.push_back(r.value);
            any_boundary = any_boundary || r.sup_on_tau_boundary;
        }
        const DecayReport report = fit_decay_exponent(lambdas, values);
        JsonWriter w;
        w.begin_object();
        w.key("experiment").string("nondegeneracy");
        w.key("model").string(model.name);
        w.key("kind").string(kind);
        w.key("beta").number(beta);
        w.key("tau_sup_on_boundary").boolean(any_boundary);
        w.key("samples").number_array(report.samples);
        w.key("values").number_array(report.values);
        w.key("exponent").number(report.fitted_exponent);
        w.key("residual").number(report.fit_residual);
        w.end_object();
        write_text(dir / "results.json", w.str());
        return;
    }
    if (kind == "delta") {
        DeltaOptions opts;
        opts.xi_window = window;
        opts.quadrature_cells =
            static_cast<int>(config.integer_or("nondeg.quadrature_cells", 8192));
        opts.t_max = config.number_or("nondeg.t_max", 40.0);
        std::vector<double> epsilons;
        for (const auto& s : split(config.get_or("nondeg.eps", "1e-1,1e-2,1e-3,1e-4"), ','))
            epsilons.push_back(std::stod(s));
        std::vector<double> values;
        for (double eps : epsilons) values.push_back(delta_nondegeneracy(model, eps, opts));
        const DecayReport report = fit_decay_exponent(epsilons, values);
        JsonWriter w;
        w.begin_object();
        w.key("experiment").string("nondegeneracy");
        w.key("model").string(model.name);
        w.key("kind").string(kind);
        w.key("samples").number_array(report.samples);
        w.key("values").number_array(report.values);
        w.key("exponent").number(report.fitted_exponent);
        w.key("residual").number(report.fit_residual);
        w.end_object();
        write_text(dir / "results.json", w.str());
        return;
    }
    throw std::invalid_argument("config: nondeg.kind must be eta or delta");
}

void run_averaging_check(const ExperimentConfig& config, const fs::path& dir) {
    const FluxDiffusionModel& model = find_model(config.get("model"));
    const TorusGrid grid = grid_from_config(config);
    const SemigroupParams params(config.number_or("avg.gamma", 0.05),
                                 config.number_or("avg.theta", 0.05),
                                 config.number_or("avg.beta", 1.5));
    const double kappa = config.number_or("avg.kappa", 1.0 - params.beta / 2.0);
    const double T = config.number_or("avg.T", 1.0);
    const int t_samples = static_cast<int>(config.integer_or("avg.t_samples", 256));
    const int xi_cells = static_cast<int>(config.integer_or("avg.xi_cells", 256));
    const int family = static_cast<int>(config.integer_or("avg.family", 8));
    const auto seed = static_cast<std::uint64_t>(config.integer_or("noise.seed", 1));
    const double amplitude = config.number_or("avg.amplitude", 1.0);

    const XiGrid xi(-1.5 * amplitude - 0.5, 1.5 * amplitude + 0.5, xi_cells);
    RatioReport merged;
    merged.kappa = kappa;
    for (int i = 0; i < family; ++i) {
        const Field u0 = random_zero_mean_field(grid, amplitude, 4, seed + i);
        merged.merge(verify_u0_estimate(u0, params, model, xi, T, kappa, t_samples));
    }
    write_text(dir / "results.json", ratio_report_to_json(merged));
}

void run_kinetic_check(const ExperimentConfig& config, const fs::path& dir) {
    Assembly a = assemble(config);
    const double horizon = config.number("horizon");
    const int xi_cells = static_cast<int>(config.integer_or("kinetic.xi_cells", 1024));

    Field u0 = initial_field_from_config(config, a.grid);
    Trajectory traj = make_trajectory(std::move(u0), a.seed, a.solver, *a.model);
    TrajectoryHistory history;
    run(traj, *a.model, a.noise, a.solver, horizon, {record_history(history)});

    const double bound = a.solver.state_bound + 0.5;
    const XiGrid xi(-bound, bound, xi_cells);

    // Smooth bump in xi, one spatial mode, smooth time cutoff vanishing at
    // the final time.
    const double t_final = history.times.back();
    KineticTestFunction phi;
    auto bump = [bound](double z) {
        const double r = z / bound;
        return std::exp(-3.0 * r * r);
    };
    auto bump_prime = [bound, bump](double z) { return bump(z) * (-6.0 * z / (bound * bound)); };
    auto cutoff = [t_final](double t) {
        const double r = t / t_final;
        return (1.0 - r) * (1.0 - r);
    };
    const double two_pi = 2.0 * std::numbers::pi;
    phi.value = [=](double z, double x, double, double t) {
        return bump(z) * std::cos(two_pi * x) * cutoff(t);
    };
    phi.dxi = [=](double z, double x, double, double t) {
        return bump_prime(z) * std::cos(two_pi * x) * cutoff(t);
    };
    phi.grad = [=](double z, double x, double, double t) {
        return Vec2{-two_pi * bump(z) * std::sin(two_pi * x) * cutoff(t), 0.0};
    };
    phi.hessian = [=](double z, double x, double, double t) {
        Mat2 h{};
        h[0][0] = -two_pi * two_pi * bump(z) * std::cos(two_pi * x) * cutoff(t);
        return h;
    };

    const double residual = weak_formulation_residual(history, *a.model, a.noise, phi, xi);

    const Field initial(a.grid, history.states.front());
    const Field rep = representation(initial, xi, [](double) { return 1.0; });
    double rep_err = 0.0;
    for (std::size_t c = 0; c < initial.size(); ++c)
        rep_err = std::max(rep_err, std::abs(rep[c] - initial[c]));
    const Field final_state(a.grid, history.states.back());
    const double l1_direct = [&] {
        Field diff(a.grid, history.states.front());
        for (std::size_t c = 0; c < diff.size(); ++c) diff[c] -= final_state[c];
        return l1_norm(diff);
    }();
    const double l1_kinetic = l1_from_kinetic(initial, final_state, xi);

    JsonWriter w;
    w.begin_object();
    w.key("experiment").string("kinetic_check");
    w.key("model").string(a.model->name);
    w.key("steps").integer(static_cast<long long>(history.steps()));
    w.key("weak_residual").number(residual);
    w.key("representation_max_error").number(rep_err);
    w.key("xi_spacing").number(xi.spacing());
    w.key("l1_identity_error").number(std::abs(l1_direct - l1_kinetic));
    w.end_object();
    write_text(dir / "results.json", w.str());
}

}  // namespace

void run_experiment(const ExperimentConfig& config, const std::string& out_dir,
                    const std::string& resume_path) {
    validate_config(config);
    const fs::path dir(out_dir);
    fs::create_directories(dir);
    write_text(dir / "config.txt", canonical_config(config));
    write_run_meta(dir);

    const std::string kind = config.get("experiment");
    if (!resume_path.empty() && kind != "simulate")
        throw std::invalid_argument("--resume is only supported for experiment = simulate");
    if (kind == "simulate")
        run_simulate(config, dir, resume_path);
    else if (kind == "couple")
        run_couple(config, dir);
    else if (kind == "kb_measure")
        run_kb_measure(config, dir);
    else if (kind == "nondegeneracy")
        run_nondegeneracy(config, dir);
    else if (kind == "averaging_check")
        run_averaging_check(config, dir);
    else if (kind == "kinetic_check")
        run_kinetic_check(config, dir);
}

std::string catalog_text() {
    std::string out = "models:\n";
    for (const auto& m : builtin_models())
        out += "  " + m.name + " (d = " + std::to_string(m.dim) + ")\n";
    out += "experiments:\n";
    for (const auto& e : kExperiments) out += "  " + e + "\n";
    return out;
}

}  // namespace sclab
