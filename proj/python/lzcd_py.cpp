#include <pybind11/complex.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "lzcd/cli.hpp"
#include "lzcd/ensemble.hpp"
#include "lzcd/error.hpp"
#include "lzcd/propagate.hpp"
#include "lzcd/specfun.hpp"
#include "lzcd/version.hpp"

namespace py = pybind11;
using namespace lzcd;

namespace {

py::array_t<double> as_array(const std::vector<double>& v) { return py::array_t<double>(v.size(), v.data()); }

cli::ConfigMap to_config(const py::dict& d) {
  cli::ConfigMap m;
  for (auto [k, v] : d) {
    auto key = py::str(k).cast<std::string>();
    if (py::isinstance<py::list>(v) || py::isinstance<py::tuple>(v)) {
      for (auto x : v) m[key].push_back(py::str(x).cast<std::string>());
    } else {
      m[key].push_back(py::str(v).cast<std::string>());
    }
  }
  return m;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Landau-Zener transitions under counterdiabatic control with random gaps";
  m.attr("__version__") = std::string(kVersion);

  auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<InvalidArgument>(m, "InvalidArgument", PyExc_ValueError);
  py::register_exception<RangeError>(m, "RangeError", base.ptr());
  py::register_exception<NoRoot>(m, "NoRoot", base.ptr());
  py::register_exception<StepUnderflow>(m, "StepUnderflow", base.ptr());
  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);

  py::enum_<PulseKind>(m, "PulseKind")
      .value("Lorentzian", PulseKind::Lorentzian)
      .value("Gaussian", PulseKind::Gaussian)
      .value("Sinc", PulseKind::Sinc)
      .value("Rect", PulseKind::Rect)
      .value("Triangle", PulseKind::Triangle);
  py::enum_<SweepKind>(m, "SweepKind").value("Lin", SweepKind::Lin).value("Tan", SweepKind::Tan);
  py::enum_<ErrorKind>(m, "ErrorKind")
      .value("None_", ErrorKind::None)
      .value("ScaleBoth", ErrorKind::ScaleBoth)
      .value("FixPeak", ErrorKind::FixPeak)
      .value("FixArea", ErrorKind::FixArea);

  py::class_<ErrorModel>(m, "ErrorModel")
      .def(py::init<ErrorKind, double>(), py::arg("kind") = ErrorKind::None, py::arg("epsilon") = 0.0)
      .def_readwrite("kind", &ErrorModel::kind)
      .def_readwrite("epsilon", &ErrorModel::epsilon);

  py::class_<SweepSpec>(m, "SweepSpec")
      .def(py::init<SweepKind, double, double>(), py::arg("kind") = SweepKind::Lin, py::arg("lambda0") = 10.0,
           py::arg("c") = 1.0)
      .def_readwrite("kind", &SweepSpec::kind)
      .def_readwrite("lambda0", &SweepSpec::lambda0)
      .def_readwrite("c", &SweepSpec::c);

  py::class_<GLZParams>(m, "GLZParams")
      .def(py::init([](double a, double b, double phi, PulseKind pulse, ErrorModel error, SweepSpec sweep, double T) {
             GLZParams p;
             p.a = a;
             p.b = b;
             p.phi = phi;
             p.pulse = pulse;
             p.error = error;
             p.T = T;
             p.sweep = sweep;
             p.pulse_sweep = {sweep.kind, sweep.lambda0, sweep.kind == SweepKind::Tan ? b : sweep.c};
             return p;
           }),
           py::arg("a") = 0.0, py::arg("b") = 0.0, py::arg("phi") = std::numbers::pi / 2,
           py::arg("pulse") = PulseKind::Lorentzian, py::arg("error") = ErrorModel{}, py::arg("sweep") = SweepSpec{},
           py::arg("T") = 10.0)
      .def_readwrite("a", &GLZParams::a)
      .def_readwrite("b", &GLZParams::b)
      .def_readwrite("phi", &GLZParams::phi)
      .def_readwrite("pulse", &GLZParams::pulse)
      .def_readwrite("error", &GLZParams::error)
      .def_readwrite("sweep", &GLZParams::sweep)
      .def_readwrite("pulse_sweep", &GLZParams::pulse_sweep)
      .def_readwrite("T", &GLZParams::T)
      .def("__repr__", [](const GLZParams& p) {
        return "GLZParams(a=" + cli::format_double(p.a) + ", b=" + cli::format_double(p.b) +
               ", phi=" + cli::format_double(p.phi) + ", pulse=" + pulse_code(p.pulse) +
               ", T=" + cli::format_double(p.T) + ")";
      });

  py::class_<IntegratorConfig>(m, "IntegratorConfig")
      .def(py::init([](double rtol, double atol, double max_step) {
             return IntegratorConfig{rtol, atol, max_step, {}};
           }),
           py::arg("rtol") = 1e-9, py::arg("atol") = 1e-12, py::arg("max_step") = 0.05)
      .def_readwrite("rtol", &IntegratorConfig::rtol)
      .def_readwrite("atol", &IntegratorConfig::atol)
      .def_readwrite("max_step", &IntegratorConfig::max_step);

  py::class_<TrajectoryRecord>(m, "TrajectoryRecord")
      .def_property_readonly("grid", [](const TrajectoryRecord& r) { return as_array(r.grid); })
      .def_property_readonly("prob", [](const TrajectoryRecord& r) { return as_array(r.prob); })
      .def_property_readonly("norm_error", [](const TrajectoryRecord& r) { return as_array(r.norm_error); })
      .def_readonly("final_prob", &TrajectoryRecord::final_prob)
      .def_readonly("area", &TrajectoryRecord::area)
      .def_readonly("max_norm_error", &TrajectoryRecord::max_norm_error)
      .def_readonly("error_estimate", &TrajectoryRecord::error_estimate)
      .def_readonly("steps", &TrajectoryRecord::steps);

  py::class_<GapDistribution>(m, "GapDistribution")
      .def(py::init<double, double, std::uint64_t>(), py::arg("mu") = 0.5, py::arg("sigma") = 0.1,
           py::arg("seed") = 42)
      .def_readwrite("mu", &GapDistribution::mu)
      .def_readwrite("sigma", &GapDistribution::sigma)
      .def_readwrite("seed", &GapDistribution::seed)
      .def("in_envelope", &GapDistribution::in_envelope);

  py::class_<EnsembleResult>(m, "EnsembleResult")
      .def_readonly("mean", &EnsembleResult::mean)
      .def_readonly("std_error", &EnsembleResult::std_error)
      .def_readonly("n_samples", &EnsembleResult::n_samples)
      .def_readonly("seed", &EnsembleResult::seed)
      .def_readonly("b", &EnsembleResult::b)
      .def_readonly("phi", &EnsembleResult::phi)
      .def_readonly("nonpositive_gaps", &EnsembleResult::nonpositive_gaps)
      .def_readonly("in_envelope", &EnsembleResult::in_envelope)
      .def_property_readonly("samples", [](const EnsembleResult& r) { return as_array(r.samples); })
      .def("__repr__", [](const EnsembleResult& r) {
        return "EnsembleResult(mean=" + cli::format_double(r.mean) + ", std_error=" + cli::format_double(r.std_error) +
               ", n=" + std::to_string(r.n_samples) + ")";
      });

  py::class_<CharacteristicPoint>(m, "CharacteristicPoint")
      .def_readonly("a", &CharacteristicPoint::a)
      .def_readonly("b0", &CharacteristicPoint::b0)
      .def_readonly("phi", &CharacteristicPoint::phi)
      .def_readonly("residual", &CharacteristicPoint::residual);

  py::class_<BStarResult>(m, "BStarResult")
      .def_readonly("b_star", &BStarResult::b_star)
      .def_readonly("p_star", &BStarResult::p_star)
      .def_readonly("b0", &BStarResult::b0)
      .def_readonly("fallback", &BStarResult::fallback)
      .def_readonly("b0_from_min", &BStarResult::b0_from_min)
      .def_readonly("evaluations", &BStarResult::evaluations);

  using release = py::call_guard<py::gil_scoped_release>;
  const IntegratorConfig dflt{};

  m.def("eval_pulse", [](PulseKind kind, double b, double t) { return eval_pulse({kind, b}, t); }, py::arg("kind"),
        py::arg("b"), py::arg("t"));
  m.def("transition_probability", &transition_probability, py::arg("params"), py::arg("cfg") = dflt, release());
  m.def("propagate", &propagate, py::arg("params"), py::arg("cfg") = dflt, py::arg("record") = true, release());
  m.def("adiabaticity_area", &adiabaticity_area, py::arg("params"), py::arg("cfg") = dflt, release());
  m.def("delta_kick_probability", &delta_kick_probability, py::arg("a"), py::arg("phi"), py::arg("t_f") = 20.0,
        py::arg("cfg") = dflt, release());

  m.def("log_gamma", &log_gamma, py::arg("z"));
  m.def("chi", py::vectorize(&chi), py::arg("a"));
  m.def("p_infinity", py::vectorize(&p_infinity), py::arg("a"), py::arg("phi"));
  m.def("avg_plz", py::vectorize(&avg_plz), py::arg("mu"), py::arg("sigma"));
  m.def("average_p_infinity", &average_p_infinity, py::arg("mu"), py::arg("sigma"), py::arg("phi"));
  m.def("pcf_lz_propagator",
        [](double a, double tf, double ti) {
          auto u = pcf_lz_propagator(a, tf, ti);
          return std::pair{u.A, u.B};
        },
        py::arg("a"), py::arg("t_f"), py::arg("t_i"));

  m.def("sample_gaps", [](const GapDistribution& d, std::size_t n) { return as_array(sample_gaps(d, n)); },
        py::arg("dist"), py::arg("n"));
  m.def("average_probability",
        [](const GapDistribution& d, double b, double phi, const GLZParams& model, std::size_t n, bool serial,
           bool keep_samples) {
          EnsembleOptions o;
          o.serial = serial;
          o.keep_samples = keep_samples;
          return average_probability(d, b, phi, model, n, o);
        },
        py::arg("dist"), py::arg("b"), py::arg("phi"), py::arg("model") = GLZParams{}, py::arg("n") = 1000,
        py::arg("serial") = false, py::arg("keep_samples") = false, release());
  m.def("characteristic_b0", &characteristic_b0, py::arg("a"), py::arg("phi"), py::arg("model") = GLZParams{},
        py::arg("cfg") = dflt, release());
  m.def("optimize_bstar",
        [](const GapDistribution& d, double phi, const GLZParams& model, std::size_t n, bool serial) {
          EnsembleOptions o;
          o.serial = serial;
          return optimize_bstar(d, phi, model, n, o);
        },
        py::arg("dist"), py::arg("phi"), py::arg("model") = GLZParams{}, py::arg("n") = 1000,
        py::arg("serial") = false, release());

  m.def("scenario_names", &cli::scenario_names);
  m.def("run_scenario",
        [](const std::string& name, const py::dict& config, std::filesystem::path out, std::uint64_t seed) {
          cli::GlobalOptions g;
          g.out = std::move(out);
          g.seed = seed;
          auto s = cli::make_scenario(name, to_config(config), g);
          cli::ScenarioReport rep;
          {
            py::gil_scoped_release nogil;
            rep = cli::run_scenario(s);
          }
          if (!rep.ok) throw Error("scenario " + name + " failed: " + rep.error);
          std::vector<std::filesystem::path> files;
          for (const auto& f : rep.files) files.push_back(s.out / f.path);
          return files;
        },
        py::arg("name"), py::arg("config") = py::dict(), py::arg("out") = "lzcd-out", py::arg("seed") = 7,
        "Runs a named scenario and returns the CSV paths it wrote.");
}
