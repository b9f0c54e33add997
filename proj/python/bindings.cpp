#include <pybind11/pybind11.h>
#include <pybind11/numpy.h>
#include <pybind11/stl.h>

#include <optional>
#include <string>

#include "qzd/config.hpp"
#include "qzd/runner.hpp"

namespace py = pybind11;

namespace {

qzd::RunConfig load(const std::string& text, const std::string& preset) {
  qzd::RunConfig cfg = qzd::parse_config(text, "<string>");
  if (!preset.empty()) {
    qzd::apply_preset(cfg.spec, preset);
    cfg.spec.validate();
  }
  return cfg;
}

py::array_t<double> as_array(const qzd::TimeSeries& ts) {
  const auto rows = static_cast<py::ssize_t>(ts.rows.size());
  const auto cols = static_cast<py::ssize_t>(ts.columns.size());
  py::array_t<double> a({rows, cols});
  auto m = a.mutable_unchecked<2>();
  for (py::ssize_t i = 0; i < rows; ++i)
    for (py::ssize_t j = 0; j < cols; ++j) m(i, j) = ts.rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
  return a;
}

}  // namespace

PYBIND11_MODULE(_qzd, m) {
  m.doc() = "Zeno-dynamics adiabatic passage simulator (native core)";

  // Translators run newest first, so the subclass goes last.
  py::register_exception<qzd::Error>(m, "SimulationError", PyExc_RuntimeError);
  py::register_exception<qzd::ConfigError>(m, "ConfigError", PyExc_ValueError);

  m.def("spec_json", [](const std::string& text, const std::string& preset) {
    return qzd::spec_to_json(load(text, preset).spec);
  }, py::arg("config"), py::arg("preset") = "");

  m.def("simulate", [](const std::string& text, unsigned workers, const std::string& preset) {
    const qzd::RunConfig cfg = load(text, preset);
    qzd::ScenarioResult r;
    {
      py::gil_scoped_release release;
      r = qzd::simulate(cfg, {workers});
    }
    return py::make_tuple(r.series.columns, as_array(r.series), qzd::summary_json(cfg.spec, r));
  }, py::arg("config"), py::arg("workers") = 1, py::arg("preset") = "");

  m.def("protocol", [](const std::string& text, std::optional<int> n, std::optional<std::string> family,
                       unsigned workers, const std::string& preset) {
    qzd::ScenarioSpec spec = load(text, preset).spec;
    if (family) spec.family = qzd::family_from_string(*family);
    if (n) {
      if (!family && spec.family == qzd::Family::TwoAtom && *n != 2) spec.family = qzd::Family::NAtom;
      spec.n = *n;
    }
    qzd::ProtocolOptions opt;
    opt.workers = workers;
    py::gil_scoped_release release;
    return qzd::protocol_json(spec, qzd::run_protocol(spec, opt));
  }, py::arg("config"), py::arg("n") = py::none(), py::arg("family") = py::none(), py::arg("workers") = 1,
     py::arg("preset") = "");

  m.def("sweep", [](const std::string& text, unsigned workers, const std::string& preset) {
    const qzd::RunConfig cfg = load(text, preset);
    py::gil_scoped_release release;
    return qzd::sweep_json(cfg.spec, qzd::run_sweep(cfg, {workers}));
  }, py::arg("config"), py::arg("workers") = 1, py::arg("preset") = "");

  m.def("zeno", [](const std::string& text, const std::string& preset) {
    return qzd::zeno_json(load(text, preset).spec);
  }, py::arg("config"), py::arg("preset") = "");

  m.attr("__version__") = "0.1.0";
}
