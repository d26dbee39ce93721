#include <pybind11/complex.h>
#include <pybind11/functional.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "sclab/averaging.hpp"
#include "sclab/ergodics.hpp"
#include "sclab/experiment.hpp"
#include "sclab/kinetic.hpp"
#include "sclab/model.hpp"
#include "sclab/noise.hpp"
#include "sclab/solver.hpp"

namespace py = pybind11;
using namespace sclab;

namespace {

Field field_from_array(const TorusGrid& grid, py::array_t<double> values) {
    auto buf = values.request();
    if (static_cast<std::size_t>(buf.size) != grid.cell_count())
        throw std::invalid_argument("array size does not match the grid");
    const double* data = static_cast<const double*>(buf.ptr);
    return Field(grid, std::vector<double>(data, data + buf.size));
}

py::array_t<double> array_of(const Field& f) {
    py::array_t<double> out(f.size());
    std::copy(f.values().begin(), f.values().end(), out.mutable_data());
    return out;
}

std::vector<SigmaMode> modes_from_list(const std::vector<std::tuple<int, double, bool>>& spec) {
    std::vector<SigmaMode> modes;
    for (const auto& [freq, amp, sine] : spec) modes.push_back({{freq, 0}, amp, sine});
    return modes;
}

}  // namespace

PYBIND11_MODULE(_sclab, m) {
    m.doc() = "Stochastic scalar conservation law laboratory (C++ core)";

    py::class_<TorusGrid>(m, "TorusGrid")
        .def(py::init<int, int, double>(), py::arg("dim"), py::arg("cells_per_axis"),
             py::arg("period") = 1.0)
        .def_property_readonly("dim", &TorusGrid::dim)
        .def_property_readonly("cells_per_axis", &TorusGrid::cells_per_axis)
        .def_property_readonly("period", &TorusGrid::period)
        .def_property_readonly("spacing", &TorusGrid::spacing)
        .def_property_readonly("cell_count", &TorusGrid::cell_count);

    py::class_<Field>(m, "Field")
        .def(py::init([](const TorusGrid& g, py::array_t<double> values) {
                 return field_from_array(g, values);
             }),
             py::keep_alive<1, 2>())
        .def("values", &array_of)
        .def("l1_norm", [](const Field& f) { return l1_norm(f); })
        .def("l2_norm", [](const Field& f) { return l2_norm(f); })
        .def("mean", [](const Field& f) { return mean(f); })
        .def("sobolev_seminorm",
             [](const Field& f, double s) { return sobolev_seminorm(f, s); })
        .def("sobolev_wsq_norm",
             [](const Field& f, double s, double q) { return sobolev_wsq_norm(f, s, q); });

    m.def(
        "random_zero_mean_field",
        [](const TorusGrid& g, double amplitude, int max_mode, std::uint64_t seed) {
            return random_zero_mean_field(g, amplitude, max_mode, seed);
        },
        py::keep_alive<0, 1>(), py::arg("grid"), py::arg("amplitude"), py::arg("max_mode"),
        py::arg("seed"));

    m.def("spectrum", [](const Field& f) {
        const SpectralField s = to_spectral(f);
        py::array_t<std::complex<double>> out(s.coefficients().size());
        std::copy(s.coefficients().begin(), s.coefficients().end(), out.mutable_data());
        return out;
    });

    m.def("catalog", [] {
        std::vector<std::string> names;
        for (const auto& model : builtin_models()) names.push_back(model.name);
        return names;
    });

    m.def(
        "eta",
        [](const std::string& model, double lambda, double beta, double window, int cells,
           int tau_points) {
            EtaOptions opts;
            opts.xi_window = {-window, window};
            opts.quadrature_cells = cells;
            opts.tau_points = tau_points;
            const EtaResult r = eta(find_model(model), lambda, beta, opts);
            return py::make_tuple(r.value, r.tau_at_sup, r.sup_on_tau_boundary);
        },
        py::arg("model"), py::arg("lam"), py::arg("beta"), py::arg("window") = 50.0,
        py::arg("quadrature_cells") = 65536, py::arg("tau_points") = 2001);

    m.def(
        "delta_nondegeneracy",
        [](const std::string& model, double eps, double window, int cells) {
            DeltaOptions opts;
            opts.xi_window = {-window, window};
            opts.quadrature_cells = cells;
            return delta_nondegeneracy(find_model(model), eps, opts);
        },
        py::arg("model"), py::arg("eps"), py::arg("window") = 1.0,
        py::arg("quadrature_cells") = 8192);

    m.def("fit_decay_exponent",
          [](std::vector<double> samples, std::vector<double> values) {
              const DecayReport r = fit_decay_exponent(std::move(samples), std::move(values));
              return py::make_tuple(r.fitted_exponent, r.fit_residual);
          });

    m.def(
        "simulate",
        [](const std::string& model_name, const TorusGrid& grid,
           const std::vector<std::tuple<int, double, bool>>& sigma_modes,
           py::array_t<double> initial, std::uint64_t seed, double t_end, double max_speed,
           double cfl, double dt_cap) {
            const FluxDiffusionModel& model = find_model(model_name);
            const NoiseModel noise = make_sigma(grid, modes_from_list(sigma_modes));
            SolverConfig cfg;
            cfg.cfl = cfl;
            cfg.dt_cap = dt_cap;
            cfg.max_speed_estimate = max_speed;
            cfg.state_bound = max_speed;
            Trajectory traj =
                make_trajectory(field_from_array(grid, initial), seed, cfg, model);
            run(traj, model, noise, cfg, t_end);
            py::dict ledger;
            ledger["dissipation"] = traj.ledger.dissipation;
            ledger["ito_input"] = traj.ledger.ito_input;
            ledger["martingale"] = traj.ledger.martingale;
            ledger["energy_residual"] = energy_balance_residual(traj);
            ledger["dt"] = traj.dt;
            ledger["steps"] = traj.step_count;
            ledger["time"] = traj.time;
            return py::make_tuple(array_of(traj.state), ledger);
        },
        py::arg("model"), py::arg("grid"), py::arg("sigma_modes"), py::arg("initial"),
        py::arg("seed"), py::arg("t_end"), py::arg("max_speed") = 2.0, py::arg("cfl") = 0.4,
        py::arg("dt_cap") = 1e-2);

    m.def(
        "couple",
        [](const std::string& model_name, const TorusGrid& grid,
           const std::vector<std::tuple<int, double, bool>>& sigma_modes,
           py::array_t<double> u0, py::array_t<double> v0, std::uint64_t seed, double T,
           double kappa_hat, double kappa_tilde, double t_end, double max_speed) {
            const FluxDiffusionModel& model = find_model(model_name);
            const NoiseModel noise = make_sigma(grid, modes_from_list(sigma_modes));
            SolverConfig cfg;
            cfg.max_speed_estimate = max_speed;
            cfg.state_bound = max_speed;
            const CouplingRun run =
                coupling_experiment(field_from_array(grid, u0), field_from_array(grid, v0),
                                    model, noise, cfg, seed, T, kappa_hat, kappa_tilde, t_end);
            py::dict out;
            out["initial_gap"] = run.initial_gap;
            out["final_gap"] = run.final_gap;
            out["gap_violations"] = run.gap_violations;
            out["stopping_times"] = run.stopping_times;
            out["flagged_fraction"] = run.flagged_fraction;
            out["gap_history"] = run.l1_gap_history;
            return out;
        },
        py::arg("model"), py::arg("grid"), py::arg("sigma_modes"), py::arg("u0"), py::arg("v0"),
        py::arg("seed"), py::arg("T") = 1.0, py::arg("kappa_hat") = 1.0,
        py::arg("kappa_tilde") = 0.1, py::arg("t_end") = 10.0, py::arg("max_speed") = 2.0);

    m.def("wasserstein1", [](std::vector<double> a, std::vector<double> b) {
        EmpiricalMeasure ma, mb;
        for (std::size_t i = 0; i < a.size(); ++i)
            ma.samples.emplace_back(static_cast<double>(i), a[i]);
        for (std::size_t i = 0; i < b.size(); ++i)
            mb.samples.emplace_back(static_cast<double>(i), b[i]);
        return wasserstein1(ma, mb);
    });

    m.def(
        "chi_density",
        [](const Field& f, double xi_min, double xi_max, int cells) {
            const XiGrid xi(xi_min, xi_max, cells);
            const KineticDensity d = chi(f, xi);
            py::array_t<signed char> out({f.size(), static_cast<std::size_t>(cells)});
            std::copy(d.values.begin(), d.values.end(), out.mutable_data());
            return out;
        },
        py::arg("field"), py::arg("xi_min"), py::arg("xi_max"), py::arg("cells") = 256);

    m.def(
        "l1_from_kinetic",
        [](const Field& u, const Field& v, double xi_min, double xi_max, int cells) {
            return l1_from_kinetic(u, v, XiGrid(xi_min, xi_max, cells));
        },
        py::arg("u"), py::arg("v"), py::arg("xi_min") = -2.0, py::arg("xi_max") = 2.0,
        py::arg("cells") = 1024);

    m.def(
        "verify_u0_estimate",
        [](const std::string& model, const Field& u0, double gamma, double theta, double beta,
           double kappa, double T, int xi_cells, int t_samples) {
            const SemigroupParams params(gamma, theta, beta);
            const XiGrid xi(-2.0, 2.0, xi_cells);
            const RatioReport r =
                verify_u0_estimate(u0, params, find_model(model), xi, T, kappa, t_samples);
            py::dict out;
            out["max_ratio"] = r.max_ratio;
            out["log_slope"] = r.log_slope;
            out["kappa"] = r.kappa;
            return out;
        },
        py::arg("model"), py::arg("u0"), py::arg("gamma") = 0.05, py::arg("theta") = 0.05,
        py::arg("beta") = 1.5, py::arg("kappa") = 0.25, py::arg("T") = 1.0,
        py::arg("xi_cells") = 256, py::arg("t_samples") = 256);

    m.def(
        "run_experiment",
        [](const std::string& config_text, const std::string& out_dir,
           const std::string& resume) {
            run_experiment(parse_config(config_text), out_dir, resume);
        },
        py::arg("config_text"), py::arg("out_dir"), py::arg("resume") = std::string());

    m.def("validate_config",
          [](const std::string& config_text) { validate_config(parse_config(config_text)); });

    m.def("brownian_sup_probability", &brownian_sup_probability, py::arg("a"), py::arg("T"));
}
