#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "fdmimo/channel.hpp"
#include "fdmimo/config.hpp"
#include "fdmimo/error.hpp"
#include "fdmimo/geometry.hpp"
#include "fdmimo/linalg.hpp"
#include "fdmimo/precoding.hpp"
#include "fdmimo/rates.hpp"
#include "fdmimo/harness.hpp"
#include "fdmimo/report.hpp"

namespace py = pybind11;
using namespace fdmimo;

namespace {

ScenarioConfig config_from(const std::string& text, const std::vector<std::string>& overrides) {
  return parse_config_text(text, overrides);
}

py::dict aggregate_dict(const std::map<std::string, Aggregate>& aggs) {
  py::dict out;
  for (const auto& [name, a] : aggs) {
    py::dict d;
    d["mean"] = a.mean;
    d["p5"] = a.p5;
    d["p50"] = a.p50;
    d["p95"] = a.p95;
    d["count"] = a.count;
    out[py::str(name)] = d;
  }
  return out;
}

py::list rows_list(const std::vector<RateRow>& rows) {
  py::list out;
  for (const auto& r : rows) {
    py::dict d;
    d["trial"] = r.trial;
    d["cell"] = r.cell;
    d["user"] = r.user;
    d["d_m"] = r.d;
    d["phi_rad"] = r.phi;
    d["theta_rad"] = r.theta;
    d["scheme"] = r.scheme;
    d["rate_bps_hz"] = r.rate;
    out.append(d);
  }
  return out;
}

}  // namespace

PYBIND11_MODULE(_fdmimo, m) {
  m.doc() = "Multi-layer precoding simulator for full-dimensional massive MIMO";

  static py::exception<Error> error_type(m, "FdmimoError");
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::object exc = py::reinterpret_borrow<py::object>(error_type.ptr())(e.what());
      exc.attr("code") = std::string(error_code_name(e.code()));
      PyErr_SetObject(error_type.ptr(), exc.ptr());
    }
  });

  m.def("default_config", [] { return serialize_config(ScenarioConfig{}); },
        "Canonical text of the default configuration.");
  m.def("normalize_config",
        [](const std::string& text, const std::vector<std::string>& overrides) {
          return serialize_config(config_from(text, overrides));
        },
        py::arg("text") = "", py::arg("overrides") = std::vector<std::string>{},
        "Parse, apply overrides, validate and re-serialize a configuration.");
  m.def("config_keys", &config_keys);

  m.def("run",
        [](const std::string& text, const std::vector<std::string>& overrides, int workers) {
          RateReport rep;
          const ScenarioConfig cfg = config_from(text, overrides);
          {
            py::gil_scoped_release release;
            rep = run_scenario(cfg, workers);
          }
          py::dict out;
          out["rows"] = rows_list(rep.rows);
          out["aggregates"] = aggregate_dict(rep.aggregates);
          out["csv"] = report_csv(rep);
          return out;
        },
        py::arg("config") = "", py::arg("overrides") = std::vector<std::string>{},
        py::arg("workers") = 1, "Run every trial of a scenario.");

  m.def("sweep",
        [](const std::string& text, const std::vector<std::string>& overrides, const std::string& axis,
           const std::vector<double>& values, int workers) {
          std::vector<SweepRow> rows;
          const ScenarioConfig cfg = config_from(text, overrides);
          {
            py::gil_scoped_release release;
            rows = sweep(cfg, axis, values, workers);
          }
          py::list out;
          for (const auto& r : rows) {
            py::dict d;
            d["value"] = r.value;
            d["aggregates"] = aggregate_dict(r.aggregates);
            d["mean_leakage"] = r.mean_leakage;
            d["mean_ratio_mlp"] = r.mean_ratio_mlp;
            out.append(d);
          }
          return out;
        },
        py::arg("config"), py::arg("overrides"), py::arg("axis"), py::arg("values"),
        py::arg("workers") = 1);

  m.def("validate",
        [](const std::string& text, const std::vector<std::string>& overrides) {
          py::list out;
          for (const auto& r : validate(config_from(text, overrides))) {
            py::dict d;
            d["name"] = r.name;
            d["passed"] = r.passed;
            d["detail"] = r.detail;
            out.append(d);
          }
          return out;
        },
        py::arg("config") = "", py::arg("overrides") = std::vector<std::string>{});

  // Building blocks.
  m.def("noise_power_dbm", &noise_power_dbm, py::arg("bandwidth_hz"), py::arg("noise_figure_db"));
  m.def("d_max", &d_max, py::arg("h_bs"), py::arg("r_cell"), py::arg("delta_e"));
  m.def("rank_angle_law", &rank_angle_law, py::arg("n"), py::arg("spacing_wl"), py::arg("theta_min"),
        py::arg("theta_max"));
  m.def("single_user_rate", &single_user_rate_gain, py::arg("channel_power"), py::arg("snr"));
  m.def("percentile", [](const std::vector<double>& v, double p) { return percentile(v, p); });
  m.def("hermitian_eig", [](const CMatrix& mat) {
    auto e = hermitian_eig(mat);
    return std::pair<RVector, CMatrix>(std::move(e.values), std::move(e.vectors));
  });
  m.def("one_ring_az_cov",
        [](double phi, double theta, double delta_a, int n_h, double spacing_wl) {
          return one_ring_az_cov({1.0, phi, theta, 1.0}, delta_a, n_h, spacing_wl);
        },
        py::arg("phi"), py::arg("theta"), py::arg("delta_a"), py::arg("n_h"), py::arg("spacing_wl") = 0.5);
  m.def("one_ring_el_cov",
        [](double theta, double delta_e, int n_v, double spacing_wl) {
          return one_ring_el_cov({1.0, 0.0, theta, 1.0}, delta_e, n_v, spacing_wl);
        },
        py::arg("theta"), py::arg("delta_e"), py::arg("n_v"), py::arg("spacing_wl") = 0.5);
  m.def("zf_direction", &zf_direction);
}
