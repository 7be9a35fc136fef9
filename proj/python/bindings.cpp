#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "platelab/cli.hpp"
#include "platelab/config.hpp"
#include "platelab/lab.hpp"
#include "platelab/minimize.hpp"

namespace py = pybind11;
using namespace platelab;

namespace {

SymMatrix to_sym(const Eigen::MatrixXd& e) {
  if (e.rows() != e.cols() || e.rows() < 1 || e.rows() > 3) throw std::invalid_argument("strain must be square, order 1 to 3");
  SymMatrix s(static_cast<int>(e.rows()));
  for (int i = 0; i < e.rows(); ++i)
    for (int j = i; j < e.cols(); ++j) s.set(i, j, 0.5 * (e(i, j) + e(j, i)));
  return s;
}

BoxGrid omega_grid(int n, const std::vector<int>& cells) {
  if (n == 2 && cells.size() == 1) return BoxGrid(1, {cells[0], 1, 1}, Vec3::Zero(), Vec3(1, 0, 0));
  if (n == 3 && cells.size() == 2) return BoxGrid(2, {cells[0], cells[1], 1}, Vec3::Zero(), Vec3(1, 1, 0));
  throw std::invalid_argument("cells needs n-1 entries");
}

py::dict trace_dict(const std::vector<EnergyBreakdown>& trace) {
  py::list totals;
  for (const auto& e : trace) totals.append(e.total);
  py::dict d;
  d["totals"] = totals;
  return d;
}

}  // namespace

PYBIND11_MODULE(_platelab, m) {
  m.doc() = "Thin-plate fracture reduction experiments";

  py::register_exception<SolverFailure>(m, "SolverFailure", PyExc_RuntimeError);

  py::class_<LameParams>(m, "LameParams")
      .def(py::init([](double lambda, double mu, int n) {
             LameParams p{lambda, mu, n};
             require_valid_lame(p);
             return p;
           }),
           py::arg("lambda_"), py::arg("mu"), py::arg("n") = 2)
      .def_readwrite("lambda_", &LameParams::lambda)
      .def_readwrite("mu", &LameParams::mu)
      .def_readwrite("n", &LameParams::n);

  py::class_<EnergyBreakdown>(m, "EnergyBreakdown")
      .def_readonly("rho", &EnergyBreakdown::rho)
      .def_readonly("bulk", &EnergyBreakdown::bulk)
      .def_readonly("surface", &EnergyBreakdown::surface)
      .def_readonly("boundary_penalty", &EnergyBreakdown::boundary_penalty)
      .def_readonly("total", &EnergyBreakdown::total)
      .def("__repr__", [](const EnergyBreakdown& e) {
        return "EnergyBreakdown(bulk=" + fmt(e.bulk) + ", surface=" + fmt(e.surface) +
               ", penalty=" + fmt(e.boundary_penalty) + ", total=" + fmt(e.total) + ")";
      });

  py::class_<BoundaryDatum>(m, "BoundaryDatum")
      .def_static("parse", &BoundaryDatum::parse, py::arg("n"), py::arg("spec"))
      .def_readonly("name", &BoundaryDatum::name)
      .def("displacement", [](const BoundaryDatum& g, const std::vector<double>& x) {
        Vec3 p = Vec3::Zero();
        for (size_t a = 0; a < x.size() && a < 3; ++a) p[a] = x[a];
        return Eigen::VectorXd(g.displacement(p));
      });

  py::class_<SolverConfig>(m, "SolverConfig")
      .def(py::init<>())
      .def_readwrite("cg_tol", &SolverConfig::cg_tol)
      .def_readwrite("cg_max_iter", &SolverConfig::cg_max_iter)
      .def_readwrite("altmin_max_rounds", &SolverConfig::altmin_max_rounds)
      .def_readwrite("exhaustive", &SolverConfig::exhaustive)
      .def_property(
          "linear", [](const SolverConfig& c) { return c.linear == SolverConfig::Linear::cg ? "cg" : "direct"; },
          [](SolverConfig& c, const std::string& v) {
            if (v == "cg") c.linear = SolverConfig::Linear::cg;
            else if (v == "direct") c.linear = SolverConfig::Linear::direct;
            else throw std::invalid_argument("linear must be 'direct' or 'cg'");
          });

  m.def("reduced_modulus_1d", &reduced_modulus_1d, py::arg("lame"));
  m.def("quadratic_form_c0", [](const LameParams& p, const Eigen::MatrixXd& e) { return quadratic_form_C0(p, to_sym(e)); },
        py::arg("lame"), py::arg("strain"));
  m.def("reduced_min_oracle", [](const LameParams& p, const Eigen::MatrixXd& e) { return reduced_min_oracle(p, to_sym(e)).value; },
        py::arg("lame"), py::arg("strain"));
  m.def("phi_rho", [](double rho, const Eigen::VectorXd& nu) { return phi_rho(rho, nu); }, py::arg("rho"),
        py::arg("normal"));

  m.def(
      "make_state", [](const std::string& spec, int n, const std::vector<int>& cells) {
        return make_state(spec, n, omega_grid(n, cells));
      },
      py::arg("spec"), py::arg("n"), py::arg("cells"));
  py::class_<KLState>(m, "KLState")
      .def_readonly("n", &KLState::n)
      .def("crack_measure", &KLState::crack_measure);
  m.def("limit_energy", &limit_energy, py::arg("state"), py::arg("lame"));

  m.def(
      "minimize_limit",
      [](const std::string& datum, const LameParams& p, int cells) {
        const LimitResult r = minimize_limit(BoundaryDatum::parse(2, datum), p, omega_grid(2, {cells}));
        py::dict d = trace_dict(r.trace);
        d["energy"] = r.energy;
        d["crack_nodes"] = r.crack_nodes;
        d["released_sides"] = r.released_sides;
        d["converged"] = r.converged;
        return d;
      },
      py::arg("datum"), py::arg("lame"), py::arg("cells") = 256);

  m.def(
      "alternate_minimize",
      [](const std::string& datum, const LameParams& p, double rho, int cells, int layers, const SolverConfig& cfg) {
        const BoxGrid plate = plate_grid(omega_grid(2, {cells}), layers);
        MinimizeResult r;
        {
          py::gil_scoped_release release;
          r = alternate_minimize(BoundaryDatum::parse(2, datum), p, rho, plate, cfg);
        }
        py::dict d = trace_dict(r.trace);
        d["energy"] = r.energy;
        d["broken_faces"] = r.field.broken_interior_count();
        d["rounds"] = r.rounds;
        d["converged"] = r.converged;
        d["monotone"] = r.monotone;
        return d;
      },
      py::arg("datum"), py::arg("lame"), py::arg("rho"), py::arg("cells") = 64, py::arg("layers") = 8,
      py::arg("config") = SolverConfig{});

  m.def(
      "recovery_sweep",
      [](const KLState& s, const LameParams& p, const std::vector<double>& rhos, int layers) {
        return recovery_sweep(s, p, rhos, layers).table().csv();
      },
      py::arg("state"), py::arg("lame"), py::arg("rhos"), py::arg("layers") = 8,
      "CSV text with one row per rho.");

  m.def(
      "jump_energy_study",
      [](const std::vector<double>& a, const std::vector<double>& b, double h, int samples, std::uint64_t seed) {
        if (a.size() != 2 || b.size() != 2) throw std::invalid_argument("segment endpoints need two coordinates");
        CrackSurface c(2);
        c.add_segment(Vec3(a[0], a[1], 0), Vec3(b[0], b[1], 0));
        const JumpEnergyStudy st = jump_energy_study(c, h, Vec3::Zero(), Vec3::Ones(), samples, seed);
        return py::make_tuple(st.stats.mean_jump_energy, st.oracle);
      },
      py::arg("a"), py::arg("b"), py::arg("h"), py::arg("samples") = 50, py::arg("seed") = 1,
      "Mean discrete jump energy of a segment in the unit square and its slab oracle.");

  m.def("run_cli", [](const std::vector<std::string>& args) { return run_cli(args); }, py::arg("args"));
}
