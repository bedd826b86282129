#include "domsplit/errors.hpp"
#include "domsplit/geometry.hpp"
#include "domsplit/linalg.hpp"
#include "domsplit/perturbation.hpp"
#include "domsplit/pipeline.hpp"
#include "domsplit/synthetic.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

namespace py = pybind11;
using namespace domsplit;

namespace {

Matrix to_matrix(const Eigen::MatrixXd& a) {
  if (a.rows() > kMaxDim || a.cols() > kMaxDim || a.rows() == 0 || a.cols() == 0)
    throw InvalidArgument("matrix dimensions must lie in 1.." + std::to_string(kMaxDim));
  return a;
}

Eigen::MatrixXd to_dense(const Matrix& a) { return a; }

// Columns of `basis` span the subspace.
Subspace to_subspace(const Eigen::MatrixXd& basis) { return Subspace::span(to_matrix(basis)); }

AnalysisConfig parse_config(const std::string& text) {
  std::istringstream in(text);
  return AnalysisConfig::from_ini(IniFile::parse(in));
}

py::dict report_dict(const Report& rep) {
  py::module_ json = py::module_::import("json");
  py::dict out;
  out["command"] = rep.command;
  out["exit_code"] = rep.exit_code;
  out["json"] = canonical_json(rep.body);
  out["body"] = json.attr("loads")(out["json"]);
  out["csv"] = curve_csv(rep.curve);
  py::dict plots;
  for (const PlotSeries& s : rep.plots) plots[py::str(s.name)] = plot_data(s);
  out["plots"] = plots;
  return out;
}

RunOptions options(std::optional<std::uint64_t> seed, int threads) {
  RunOptions opt;
  opt.seed = seed;
  opt.threads = threads;
  return opt;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Dominated splittings along orbits of torus endomorphisms";
  m.attr("__version__") = DOMSPLIT_VERSION;
  m.attr("MAX_DIM") = kMaxDim;

  static py::exception<Error> base(m, "Error", PyExc_RuntimeError);
  static py::exception<ConfigError> config_error(m, "ConfigError", base.ptr());
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const ConfigError& e) {
      py::set_error(config_error, e.what());
    } catch (const Error& e) {
      py::set_error(base, (e.kind() + ": " + e.what()).c_str());
    }
  });

  m.def("singular_values", [](const Eigen::MatrixXd& a) { return Eigen::VectorXd(singular_values(to_matrix(a))); },
        py::arg("a"), "Singular values in ascending order.");
  m.def(
      "svd",
      [](const Eigen::MatrixXd& a) {
        const SvdResult s = svd_ascending(to_matrix(a));
        return py::make_tuple(to_dense(s.codomain), Eigen::VectorXd(s.sigmas), to_dense(s.domain));
      },
      py::arg("a"), "(U, sigma, V) with ascending sigma and A = U diag(sigma) V^T.");
  m.def(
      "norm_restricted", [](const Eigen::MatrixXd& a, const Eigen::MatrixXd& v) { return norm_restricted(to_matrix(a), to_subspace(v)); },
      py::arg("a"), py::arg("basis"));
  m.def(
      "conorm_restricted",
      [](const Eigen::MatrixXd& a, const Eigen::MatrixXd& v) { return conorm_restricted(to_matrix(a), to_subspace(v)); },
      py::arg("a"), py::arg("basis"));
  m.def(
      "kernel", [](const Eigen::MatrixXd& a, double tol) { return to_dense(kernel(to_matrix(a), tol).basis()); },
      py::arg("a"), py::arg("tol") = kDefaultRankTol, "Orthonormal basis of the numerical kernel.");
  m.def(
      "grassmann_distance",
      [](const Eigen::MatrixXd& v, const Eigen::MatrixXd& w) { return grassmann_distance(to_subspace(v), to_subspace(w)); },
      py::arg("v"), py::arg("w"));
  m.def(
      "angle_between",
      [](const Eigen::MatrixXd& v, const Eigen::MatrixXd& w) { return angle_between(to_subspace(v), to_subspace(w)); },
      py::arg("v"), py::arg("w"));
  m.def(
      "minimal_mixing_length",
      [](double delta, double n, int corpus, std::uint64_t seed, int l_max) {
        return minimal_mixing_length(delta, n, corpus, seed, l_max).l;
      },
      py::arg("delta"), py::arg("n_bound"), py::arg("corpus") = 1000, py::arg("seed") = 1, py::arg("l_max") = 256);

  m.def(
      "check_config", [](const std::string& text) { parse_config(text); }, py::arg("text"),
      "Raises ConfigError for a malformed config.");
  m.def(
      "run",
      [](const std::string& command, const std::string& path, std::optional<std::uint64_t> seed, int threads) {
        return report_dict(run_command(command, AnalysisConfig::load(path), options(seed, threads)));
      },
      py::arg("command"), py::arg("config"), py::arg("seed") = py::none(), py::arg("threads") = 1);
  m.def(
      "run_text",
      [](const std::string& command, const std::string& text, std::optional<std::uint64_t> seed, int threads) {
        return report_dict(run_command(command, parse_config(text), options(seed, threads)));
      },
      py::arg("command"), py::arg("text"), py::arg("seed") = py::none(), py::arg("threads") = 1);
}
