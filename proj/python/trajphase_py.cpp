#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "trajphase/dephasing.hpp"
#include "trajphase/jump.hpp"
#include "trajphase/qsd.hpp"

namespace py = pybind11;
using namespace trajphase;

namespace {

ShiftSet to_shifts(const std::vector<cd>& f) { return {f.begin(), f.end()}; }

py::array_t<cd> stack(const std::vector<DensityMatrix>& states) {
    const auto n = static_cast<py::ssize_t>(states.size());
    const py::ssize_t d = states.empty() ? 0 : states.front().rows();
    py::array_t<cd> out({n, d, d});
    auto v = out.mutable_unchecked<3>();
    for (py::ssize_t k = 0; k < n; ++k)
        for (py::ssize_t r = 0; r < d; ++r)
            for (py::ssize_t c = 0; c < d; ++c) v(k, r, c) = states[static_cast<std::size_t>(k)](r, c);
    return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Geometric phases of open-system trajectories";
    m.attr("__version__") = TRAJPHASE_VERSION;

    auto base = py::register_exception<Error>(m, "TrajphaseError", PyExc_RuntimeError);
    py::register_exception<InvalidArgument>(m, "InvalidArgument", PyExc_ValueError);
    py::register_exception<NumericError>(m, "NumericError", base.ptr());

    py::class_<LindbladModel>(m, "LindbladModel")
        .def(py::init([](const Operator& h, const std::vector<Operator>& ls, double lambda) {
                 return LindbladModel(OperatorSchedule(h), ls, lambda);
             }),
             py::arg("hamiltonian"), py::arg("lindblads"), py::arg("lam"))
        .def_property_readonly("dim", &LindbladModel::dim)
        .def_property_readonly("channels", &LindbladModel::channels)
        .def_property_readonly("lam", &LindbladModel::lambda)
        .def_property_readonly("hamiltonian", [](const LindbladModel& mdl) { return mdl.hamiltonian().at(0.0); })
        .def_property_readonly("lindblads", [](const LindbladModel& mdl) {
            std::vector<Operator> out;
            for (const auto& l : mdl.lindblads()) out.push_back(l.at(0.0));
            return out;
        });

    py::class_<DephasingParams>(m, "DephasingParams")
        .def(py::init([](double omega, double lambda, double f, double theta0, double phi0) {
                 return DephasingParams{omega, lambda, f, theta0, phi0};
             }),
             py::arg("omega") = 1.0, py::arg("lam") = 0.0, py::arg("f") = 0.0, py::arg("theta0") = pi / 2,
             py::arg("phi0") = 0.0)
        .def_readwrite("omega", &DephasingParams::omega)
        .def_readwrite("lam", &DephasingParams::lambda)
        .def_readwrite("f", &DephasingParams::f)
        .def_readwrite("theta0", &DephasingParams::theta0)
        .def_readwrite("phi0", &DephasingParams::phi0)
        .def_property_readonly("period", &DephasingParams::period)
        .def("model", &dephasing_model)
        .def("shifts", [](const DephasingParams& p) { return std::vector<cd>{cd(p.f, 0.0)}; })
        .def("initial_state", &dephasing_initial_state);

    py::class_<GeometricPhaseResult>(m, "GeometricPhaseResult")
        .def_readonly("gamma", &GeometricPhaseResult::gamma)
        .def_readonly("overlap_arg", &GeometricPhaseResult::overlap_arg)
        .def_readonly("dynamical_term", &GeometricPhaseResult::dynamical_term)
        .def_readonly("final_norm", &GeometricPhaseResult::final_norm)
        .def_readonly("grid_steps", &GeometricPhaseResult::grid_steps)
        .def_readonly("zero_crossing", &GeometricPhaseResult::zero_crossing);

    py::class_<QSDEnsembleResult>(m, "QSDEnsembleResult")
        .def_readonly("alpha_g", &QSDEnsembleResult::alpha_g)
        .def_readonly("overlap_arg", &QSDEnsembleResult::overlap_arg)
        .def_readonly("arg_std_error", &QSDEnsembleResult::arg_std_error)
        .def_readonly("dynamical_term", &QSDEnsembleResult::dynamical_term)
        .def_readonly("mean_overlap", &QSDEnsembleResult::mean_overlap)
        .def_readonly("std_error", &QSDEnsembleResult::std_error)
        .def_readonly("n_used", &QSDEnsembleResult::n_used)
        .def_readonly("n_excluded", &QSDEnsembleResult::n_excluded)
        .def_readonly("rho_estimate", &QSDEnsembleResult::rho_estimate)
        .def_readonly("warnings", &QSDEnsembleResult::warnings);

    m.def("pauli", [](const std::string& axis) {
        if (axis == "x") return pauli(Axis::x);
        if (axis == "y") return pauli(Axis::y);
        if (axis == "z") return pauli(Axis::z);
        throw InvalidArgument("axis must be 'x', 'y' or 'z'");
    });
    m.def("state_from_bloch", [](double theta, double phi) { return state_from_bloch({theta, phi}); },
          py::arg("theta"), py::arg("phi"));
    m.def("density_from_state", &density_from_state);

    m.def(
        "evolve_density",
        [](const LindbladModel& model, const DensityMatrix& rho0, double T, int steps) {
            const auto traj = evolve_density(model, rho0, T, steps);
            return py::make_tuple(py::array(py::cast(traj.times)), stack(traj.states));
        },
        py::arg("model"), py::arg("rho0"), py::arg("T"), py::arg("steps") = kDefaultSteps,
        "(times, states) with states of shape (steps + 1, d, d)");

    m.def(
        "apply_shift", [](const LindbladModel& model, const std::vector<cd>& f) { return apply_shift(model, to_shifts(f)); },
        py::arg("model"), py::arg("shifts"));
    m.def(
        "shift_is_hidden",
        [](const LindbladModel& model, const std::vector<cd>& f) { return shift_is_hidden(model, to_shifts(f)); },
        py::arg("model"), py::arg("shifts"));
    m.def(
        "shift_hamiltonian_term",
        [](const LindbladModel& model, const std::vector<cd>& f) {
            return shift_hamiltonian_term(model, to_shifts(f)).at(0.0);
        },
        py::arg("model"), py::arg("shifts"));

    m.def(
        "no_jump_geometric_phase",
        [](const LindbladModel& model, const std::vector<cd>& f, const PureState& psi0, double T, int steps,
           bool strict) {
            PhaseOptions opts;
            opts.steps = steps;
            opts.strict = strict;
            return no_jump_geometric_phase(model, to_shifts(f), psi0, T, opts);
        },
        py::arg("model"), py::arg("shifts"), py::arg("psi0"), py::arg("T"), py::arg("steps") = kDefaultSteps,
        py::arg("strict") = false);

    m.def(
        "average_jump_ensemble",
        [](const LindbladModel& model, const std::vector<cd>& f, const PureState& psi0, double T, double delta_t, int n,
           std::uint64_t seed, int threads) {
            JumpEnsembleOptions opts;
            opts.threads = threads;
            const auto res = average_jump_ensemble(model, to_shifts(f), psi0, T, delta_t, n, seed, opts);
            py::dict out;
            out["times"] = res.times;
            out["rho"] = stack(res.rho);
            out["rho_std_error"] = res.rho_std_error.back();
            out["jump_counts"] = res.jump_counts;
            out["mean_jumps"] = res.mean_jumps;
            out["jumps_std_error"] = res.jumps_std_error;
            out["warnings"] = res.warnings;
            return out;
        },
        py::arg("model"), py::arg("shifts"), py::arg("psi0"), py::arg("T"), py::arg("delta_t"), py::arg("n"),
        py::arg("seed"), py::arg("threads") = 0);

    m.def(
        "averaged_geometric_phase",
        [](const LindbladModel& model, const std::vector<cd>& f, const PureState& phi0, double T, double delta_t, int n,
           std::uint64_t seed, int threads) {
            QSDConfig cfg;
            cfg.T = T;
            cfg.delta_t = delta_t;
            cfg.n_trajectories = n;
            cfg.seed = seed;
            cfg.threads = threads;
            return averaged_geometric_phase(model, to_shifts(f), phi0, cfg);
        },
        py::arg("model"), py::arg("shifts"), py::arg("phi0"), py::arg("T"), py::arg("delta_t"), py::arg("n"),
        py::arg("seed"), py::arg("threads") = 0);

    m.def("gamma_nj_closed_form", &gamma_nj_closed_form);
    m.def("gamma_nj_small_correction", &gamma_nj_small_correction);
    m.def(
        "bloch_spiral",
        [](const DephasingParams& p, double t) {
            const auto a = bloch_spiral(p, t);
            return py::make_tuple(a.theta, a.phi);
        },
        py::arg("params"), py::arg("t"));
    m.def("qsd_overlap_value", &qsd_overlap_value, py::arg("params"), py::arg("T"));
    m.def("qsd_overlap_closed_form", &qsd_overlap_closed_form, py::arg("params"), py::arg("T"));
    m.def("qsd_overlap_arctan", &qsd_overlap_arctan, py::arg("params"), py::arg("T"));
    m.def("dynamical_term_dephasing", &dynamical_term_dephasing, py::arg("params"), py::arg("T"));
}
