#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "quantgan/commands.hpp"
#include "quantgan/stats.hpp"

namespace py = pybind11;
using namespace quantgan;

namespace {

py::object to_py(const nlohmann::json& j) { return py::module_::import("json").attr("loads")(j.dump()); }

nlohmann::json from_py(const py::object& o) {
  return nlohmann::json::parse(py::module_::import("json").attr("dumps")(o).cast<std::string>());
}

RunConfig config_from(const py::object& o) { return run_config_from_json(from_py(o)); }

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Quant GAN pipeline core";

  py::register_exception<DataError>(m, "DataError", PyExc_ValueError);
  py::register_exception<CheckpointError>(m, "CheckpointError", PyExc_RuntimeError);
  py::register_exception<ad::NumericError>(m, "NumericError", PyExc_ArithmeticError);

  m.def("load_csv", [](const std::filesystem::path& p) {
    auto d = load_csv(p);
    return py::make_tuple(d.dates, d.closes);
  });
  m.def("log_returns", [](std::vector<double> p) { return log_returns(p); });
  m.def("prices_from_returns", [](std::vector<double> r, double s0) { return prices_from_returns(r, s0); });

  m.def("lambert_w0", &lambert_w0);
  m.def("lambert_forward", [](std::vector<double> x, double mu, double sigma, double delta) {
    return lambert_forward(x, LambertParams{mu, sigma, delta});
  });
  m.def("lambert_inverse", [](std::vector<double> y, double mu, double sigma, double delta) {
    return lambert_inverse(y, LambertParams{mu, sigma, delta});
  });
  m.def("fit_lambert", [](std::vector<double> y) {
    auto f = fit_lambert(y);
    return py::dict(py::arg("mu") = f.params.mu, py::arg("sigma") = f.params.sigma, py::arg("delta") = f.params.delta,
                    py::arg("log_likelihood") = f.log_likelihood, py::arg("converged") = f.converged);
  });
  m.def("preprocess_prices", [](std::vector<double> prices) {
    auto p = preprocess_prices(prices);
    return py::dict(py::arg("log_returns") = p.log_returns, py::arg("values") = p.values,
                    py::arg("pipeline") = to_py(to_json(p.state)));
  });
  m.def("pipeline_apply", [](const py::object& state, std::vector<double> r) {
    return pipeline_from_json(from_py(state)).apply(r);
  });
  m.def("pipeline_invert", [](const py::object& state, std::vector<double> v) {
    return pipeline_from_json(from_py(state)).invert(v);
  });

  m.def("garch_fit", [](std::vector<double> r) {
    auto f = garch_fit(r);
    return py::dict(py::arg("params") = to_py(to_json(f.params)), py::arg("log_likelihood") = f.log_likelihood,
                    py::arg("converged") = f.converged);
  });
  m.def("garch_simulate", [](const py::object& params, std::size_t length, std::uint64_t seed) {
    return garch_simulate(garch_params_from_json(from_py(params)), length, seed);
  });

  m.def("emd", [](std::vector<double> a, std::vector<double> b) { return emd_1d(a, b); });
  m.def("dy_metric", [](std::vector<double> h, std::vector<double> g, std::size_t lag) { return dy_metric(h, g, lag); },
        py::arg("hist"), py::arg("gen"), py::arg("lag") = 1);
  m.def("acf", [](std::vector<double> r, std::size_t S) { return acf(r, S); });
  m.def("leverage_effect", [](std::vector<double> r, std::size_t S) { return leverage_effect(r, S); });
  m.def("receptive_field", [](std::size_t hidden, std::size_t levels) {
    return receptive_field_size(TcnSkipSpec::dilated(1, hidden, 1, levels));
  });

  m.def("sample_log_returns", [](const std::filesystem::path& ckpt, std::size_t n, std::size_t length,
                                 std::uint64_t seed, std::size_t threads) {
    auto c = load_checkpoint(ckpt);
    py::gil_scoped_release release;
    return sample_log_returns(c, n, length, seed, threads);
  }, py::arg("checkpoint"), py::arg("num_paths"), py::arg("length"), py::arg("seed"), py::arg("threads") = 1);

  m.def("run_preprocess", [](const py::object& cfg) { cmd_preprocess(config_from(cfg)); });
  m.def("run_train", [](const py::object& cfg) {
    auto c = config_from(cfg);
    py::gil_scoped_release release;
    return cmd_train(c).steps.size();
  });
  m.def("run_generate", [](const py::object& cfg) { cmd_generate(config_from(cfg)); });
  m.def("run_evaluate", [](const py::object& cfg) { return to_py(to_json(cmd_evaluate(config_from(cfg)))); });
  m.def("run_garch", [](const py::object& cfg) { return to_py(to_json(cmd_garch(config_from(cfg)))); });
  m.def("echo_config", [](const py::object& cfg) { return to_py(to_json(config_from(cfg))); });
}
