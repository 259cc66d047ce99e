// Python surface of the trajectory engine: model parameters, stochastic
// ensembles, deterministic references, and the singularity locator.

#include <pybind11/complex.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <utility>
#include <vector>

#include "gptraj/analytic.hpp"
#include "gptraj/echo.hpp"
#include "gptraj/ensemble.hpp"
#include "gptraj/gp.hpp"
#include "gptraj/lindblad.hpp"
#include "gptraj/topology.hpp"
#include "gptraj/types.hpp"

namespace py = pybind11;
using namespace gptraj;

namespace {

using PyMat = std::pair<std::pair<Cplx, Cplx>, std::pair<Cplx, Cplx>>;

PyMat mat_out(const Mat2& m) {
  return {{m.m00, m.m01}, {m.m10, m.m11}};
}

Mat2 mat_in(const PyMat& m) {
  return {m.first.first, m.first.second, m.second.first, m.second.second};
}

}  // namespace

PYBIND11_MODULE(_gptraj, mod) {
  mod.doc() =
      "Quantum-trajectory Monte Carlo for geometric phases of a driven "
      "dissipative two-level system";

  py::register_exception<ConfigError>(mod, "GptrajConfigError",
                                      PyExc_ValueError);
  py::register_exception<Error>(mod, "GptrajError", PyExc_RuntimeError);

  py::class_<ModelParams>(mod, "ModelParams")
      .def(py::init<>())
      .def_readwrite("omega", &ModelParams::omega)
      .def_readwrite("Omega", &ModelParams::Omega)
      .def_readwrite("theta", &ModelParams::theta)
      .def_readwrite("Gamma", &ModelParams::Gamma)
      .def_readwrite("gamma_minus", &ModelParams::gamma_minus)
      .def_readwrite("gamma_plus", &ModelParams::gamma_plus)
      .def_readwrite("gamma_d", &ModelParams::gamma_d)
      .def_readwrite("gamma_z", &ModelParams::gamma_z)
      .def_readwrite("lambda_disp", &ModelParams::lambda_disp)
      .def_readwrite("displace_all", &ModelParams::displace_all)
      .def_readwrite("dt", &ModelParams::dt)
      .def_readwrite("n_traj", &ModelParams::n_traj)
      .def_readwrite("seed", &ModelParams::seed)
      .def("period", &ModelParams::period)
      .def("validate", &ModelParams::validate)
      .def_static("standard", &ModelParams::standard, py::arg("Omega"),
                  py::arg("Gamma"), py::arg("theta"), py::arg("gamma_z") = 0.0,
                  "Standard channel split: decay = Gamma, eigenbasis "
                  "dephasing = 0.32 Gamma, no excitation");

  py::class_<EnsembleResult>(mod, "EnsembleResult")
      .def_readonly("phases", &EnsembleResult::phases)
      .def_readonly("jump_counts", &EnsembleResult::jump_counts)
      .def_readonly("excluded", &EnsembleResult::excluded)
      .def_readonly("n_excluded", &EnsembleResult::n_excluded)
      .def_readonly("mean_jumps", &EnsembleResult::mean_jumps)
      .def_property_readonly("mean_state", [](const EnsembleResult& r) {
        std::vector<PyMat> out;
        out.reserve(r.mean_state.size());
        for (const auto& m : r.mean_state) out.push_back(mat_out(m));
        return out;
      });

  py::class_<EchoEnsembleResult>(mod, "EchoEnsembleResult")
      .def_readonly("varphis", &EchoEnsembleResult::varphis)
      .def_readonly("persistences", &EchoEnsembleResult::persistences)
      .def_readonly("jump_counts", &EchoEnsembleResult::jump_counts)
      .def_readonly("excluded", &EchoEnsembleResult::excluded)
      .def_readonly("mean_jumps", &EchoEnsembleResult::mean_jumps);

  mod.def("run_gp_ensemble", &run_gp_ensemble, py::arg("params"),
          py::arg("duration") = -1.0, py::arg("workers") = 1,
          py::arg("sample_times") = std::vector<double>{},
          py::call_guard<py::gil_scoped_release>(),
          "Stochastic geometric-phase ensemble from the upper eigenstate");

  mod.def("run_echo_ensemble", &run_echo_ensemble, py::arg("params"),
          py::arg("workers") = 1, py::call_guard<py::gil_scoped_release>(),
          "Stochastic two-cycle echo ensemble");

  mod.def("gp_no_jump", &gp_no_jump, py::arg("params"),
          py::arg("duration") = -1.0,
          "Geometric phase of the deterministic no-jump path");

  mod.def("gp_no_jump_approx", &gp_no_jump_approx, py::arg("params"),
          "Asymptotic no-jump geometric phase over one cycle");

  mod.def(
      "run_echo_no_jump",
      [](const ModelParams& p) {
        const EchoOutcome o = run_echo_no_jump(p);
        return py::make_tuple(o.persistence, o.varphi);
      },
      py::arg("params"),
      "Drift-only echo: returns (persistence, echo phase)");

  mod.def("varphi_from_persistence", &varphi_from_persistence,
          py::arg("persistence"));

  mod.def("wrap_phase", &wrap_phase, py::arg("phase"),
          "Principal value in (-pi, pi]");

  mod.def("mean_phase", &mean_phase, py::arg("phases"),
          "Circular mean arg sum exp(i phi)");

  mod.def("winding_number", &winding_number, py::arg("params"),
          py::call_guard<py::gil_scoped_release>(),
          "Net turns of the no-jump phase as theta sweeps 0 -> pi");

  mod.def("locate_singularity", &locate_singularity, py::arg("theta"),
          py::arg("omega_window"), py::arg("gamma_window"),
          py::call_guard<py::gil_scoped_release>(),
          "Parameter point (Omega, Gamma) where the drift path returns "
          "orthogonal to the start");

  mod.def("singularity_residual", &singularity_residual, py::arg("params"),
          "Closed-form cycle-return residual (zero at the singular point)");

  mod.def(
      "drift_cycle_overlap",
      [](const ModelParams& p) { return drift_cycle_overlap(p); },
      py::arg("params"),
      "Normalized overlap of the drift-propagated state after one cycle");

  mod.def(
      "drift_cycle_gp",
      [](const ModelParams& p) {
        const DriftCycleGp d = drift_cycle_gp(p);
        return py::make_tuple(d.gp, d.survival);
      },
      py::arg("params"),
      "Cycle geometric phase and squared return amplitude of the no-jump "
      "ray, from one fourth-order drift propagation");

  mod.def(
      "lindblad_evolution",
      [](const ModelParams& p, double duration, int sample_stride) {
        EigenPair eig = eigensystem(p, 0.0);
        const auto path =
            integrate(projector(eig.state_plus), p, duration, sample_stride);
        std::vector<PyMat> out;
        out.reserve(path.size());
        for (const auto& m : path) out.push_back(mat_out(m));
        return out;
      },
      py::arg("params"), py::arg("duration"), py::arg("sample_stride") = 1,
      py::call_guard<py::gil_scoped_release>(),
      "Master-equation density matrices from the upper eigenstate");

  mod.def(
      "trace_distance",
      [](const PyMat& a, const PyMat& b) {
        return trace_distance(mat_in(a), mat_in(b));
      },
      py::arg("a"), py::arg("b"),
      "Trace distance of two 2x2 Hermitian matrices");

  mod.attr("__version__") = "0.1.0";
}
