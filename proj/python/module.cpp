#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "npcvx/bounds.hpp"
#include "npcvx/ccp.hpp"
#include "npcvx/error.hpp"
#include "npcvx/harness.hpp"
#include "npcvx/np_solver.hpp"

namespace py = pybind11;
using nlohmann::json;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

npc::FeatureMatrix to_matrix(const Array& a) {
  if (a.ndim() == 1) {
    std::vector<double> data(a.data(), a.data() + a.shape(0));
    return npc::FeatureMatrix(static_cast<std::size_t>(a.shape(0)), 1, std::move(data));
  }
  if (a.ndim() != 2) throw npc::DimensionMismatch("expected a 1-D or 2-D array");
  const auto rows = static_cast<std::size_t>(a.shape(0)), cols = static_cast<std::size_t>(a.shape(1));
  std::vector<double> data(a.data(), a.data() + rows * cols);
  return npc::FeatureMatrix(rows, cols, std::move(data));
}

py::object to_py(const json& j) { return py::module_::import("json").attr("loads")(j.dump()); }

json from_py(const py::object& o) {
  if (o.is_none()) return json::object();
  return json::parse(py::module_::import("json").attr("dumps")(o).cast<std::string>());
}

npc::NPConfig np_config(double alpha, double delta, const std::string& surrogate, std::optional<double> kappa) {
  npc::NPConfig cfg;
  cfg.alpha = alpha;
  cfg.delta = delta;
  cfg.surrogate = npc::Surrogate::from_name(surrogate);
  cfg.kappa_override = kappa;
  cfg.validate();
  return cfg;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Neyman-Pearson classification by convex aggregation of base classifiers";

  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const npc::Error& e) {
      py::object pkg = py::module_::import("npcvx");
      py::object cls = pkg.attr(e.is_validation() ? "ValidationError" : "SolverError");
      PyErr_SetObject(cls.ptr(), py::make_tuple(e.code(), e.what()).ptr());
    }
  });

  py::class_<npc::Surrogate>(m, "Surrogate")
      .def_static("hinge", &npc::Surrogate::hinge)
      .def_static("logit", &npc::Surrogate::logit)
      .def_static("exponential", &npc::Surrogate::exponential)
      .def_static("from_name", [](const std::string& n) { return npc::Surrogate::from_name(n); })
      .def_static("tabulated", &npc::Surrogate::tabulated, py::arg("knots"), py::arg("values"), py::arg("lipschitz"))
      .def("__call__", &npc::Surrogate::eval)
      .def("derivative", &npc::Surrogate::derivative)
      .def_property_readonly("name", &npc::Surrogate::name)
      .def_property_readonly("lipschitz", &npc::Surrogate::lipschitz)
      .def_property_readonly("value_at_one", &npc::Surrogate::value_at_one)
      .def("__repr__", [](const npc::Surrogate& s) { return "Surrogate('" + s.name() + "')"; });

  m.def("kappa", &npc::kappa, py::arg("lipschitz"), py::arg("num_bases"), py::arg("delta"));
  m.def("alpha_kappa", &npc::alpha_kappa, py::arg("alpha"), py::arg("kappa"), py::arg("n_minus"));
  m.def(
      "n0_and_bound",
      [](double kappa, double eps_bar, double alpha, std::size_t n_minus, std::size_t n_plus, double phi1) {
        return to_py(npc::n0_and_bound(kappa, eps_bar, alpha, n_minus, n_plus, phi1).to_json());
      },
      py::arg("kappa"), py::arg("eps_bar"), py::arg("alpha"), py::arg("n_minus"), py::arg("n_plus"),
      py::arg("phi_at_one"));
  m.def("pooled_bound", &npc::pooled_bound, py::arg("kappa"), py::arg("eps_bar"), py::arg("alpha"), py::arg("n"),
        py::arg("p"), py::arg("phi_at_one"));
  m.def(
      "ccp_bound",
      [](double kappa, double eps, double alpha, std::size_t n, double phi1) {
        npc::CCPBound b = npc::ccp_bound(kappa, eps, alpha, n, phi1);
        return to_py({{"value", b.value}, {"n_threshold", b.n_threshold}, {"below_threshold", b.below_threshold}});
      },
      py::arg("kappa"), py::arg("eps"), py::arg("alpha"), py::arg("n"), py::arg("phi_at_one"));

  m.def("binomial_tail_exact", &npc::binomial_tail_exact, py::arg("n"), py::arg("q"), py::arg("t"));
  m.def(
      "sweep_binomial_lemmas",
      [](std::uint64_t n_max, std::size_t q_count, std::size_t t_points) {
        return to_py(npc::sweep_binomial_lemmas(n_max, q_count, t_points).to_json());
      },
      py::arg("n_max") = 200, py::arg("q_count") = 50, py::arg("t_points") = 10);

  m.def(
      "stump_dictionary",
      [](const Array& x, std::size_t thresholds) {
        return to_py(npc::to_json(npc::build_stump_dictionary(to_matrix(x), thresholds)));
      },
      py::arg("x"), py::arg("thresholds_per_axis") = 3,
      "Stumps at empirical quantiles of each column, both polarities.");

  m.def(
      "solve",
      [](const Array& negatives, const Array& positives, const py::object& dictionary, double alpha, double delta,
         const std::string& surrogate, std::optional<double> kappa) {
        npc::BaseDictionary d = npc::dictionary_from_json(from_py(dictionary));
        npc::Sample s{to_matrix(negatives), to_matrix(positives)};
        npc::NPSolution sol;
        {
          py::gil_scoped_release release;
          sol = npc::solve_np(s, d, np_config(alpha, delta, surrogate, kappa));
        }
        return to_py(sol.to_json());
      },
      py::arg("negatives"), py::arg("positives"), py::arg("dictionary"), py::arg("alpha") = 0.1,
      py::arg("delta") = 0.1, py::arg("surrogate") = "hinge", py::arg("kappa") = py::none());

  m.def(
      "decision_function",
      [](const py::object& dictionary, const std::vector<double>& weights, const Array& x) {
        npc::CombinedClassifier h(npc::dictionary_from_json(from_py(dictionary)), npc::SimplexWeights(weights));
        npc::FeatureMatrix fm = to_matrix(x);
        py::array_t<double> out(static_cast<py::ssize_t>(fm.rows()));
        auto o = out.mutable_unchecked<1>();
        for (std::size_t i = 0; i < fm.rows(); ++i) o(static_cast<py::ssize_t>(i)) = h.evaluate(fm.row(i));
        return out;
      },
      py::arg("dictionary"), py::arg("weights"), py::arg("x"));

  m.def(
      "solve_ccp",
      [](const std::vector<double>& objective, const Array& g_values, double alpha, double delta,
         const std::string& surrogate, std::optional<double> kappa) {
        auto f = std::make_shared<npc::LinearFunction>(objective);
        npc::CCPInstance inst = npc::CCPInstance::from_values(f, to_matrix(g_values), alpha, delta,
                                                              npc::Surrogate::from_name(surrogate));
        inst.kappa_override = kappa;
        npc::CCPSolution sol;
        {
          py::gil_scoped_release release;
          sol = npc::solve_ccp(inst);
        }
        return to_py(sol.to_json());
      },
      py::arg("objective"), py::arg("g_values"), py::arg("alpha") = 0.1, py::arg("delta") = 0.1,
      py::arg("surrogate") = "hinge", py::arg("kappa") = py::none());

  m.def(
      "run_experiment",
      [](const std::string& kind, const py::object& config, std::uint64_t seed) {
        const json cfg = from_py(config);
        npc::ExperimentResult r;
        {
          py::gil_scoped_release release;
          r = npc::run_experiment(kind, cfg, seed);
        }
        return py::make_tuple(to_py(r.summary), r.trials.to_string());
      },
      py::arg("kind"), py::arg("config") = py::none(), py::arg("seed") = 0,
      "Returns (summary, per-trial CSV text).");

  m.def(
      "np_lemma_oracle",
      [](const py::object& scenario, double alpha) {
        return to_py(npc::np_lemma_oracle(npc::Scenario::from_json(from_py(scenario)), alpha).to_json());
      },
      py::arg("scenario"), py::arg("alpha"));
}
