#include <pybind11/eigen.h>
#include <pybind11/gil_safe_call_once.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>
#include <string>

#include "stochdisc/bench.hpp"
#include "stochdisc/discretize.hpp"
#include "stochdisc/errors.hpp"
#include "stochdisc/linalg.hpp"
#include "stochdisc/modelgen.hpp"

namespace py = pybind11;
using namespace stochdisc;

namespace {

using Mat = Matrix<double>;

Method method_from(const std::string& name) {
  if (auto m = parse_method(name)) return *m;
  throw Error(ErrorKind::parse, "unknown method '" + name + "'");
}

bench::Width width_from(const std::string& name) {
  if (name == "f64") return bench::Width::f64;
  if (name == "f32") return bench::Width::f32;
  throw Error(ErrorKind::parse, "width must be 'f32' or 'f64', got '" + name + "'");
}

// Result handed back to Python; F and Q keep the working precision.
struct Report {
  py::object f;
  py::object q;
  std::string method;
  Diagnostics diagnostics;
};

template <typename Real>
Report run(const Mat& a, const Mat& s, double t, Method method, std::optional<double> tau_zero,
           double oracle_tol) {
  const ContinuousModel<Real> m(a.cast<Real>(), s.cast<Real>());
  MethodReport<Real> r;
  {
    py::gil_scoped_release unlocked;
    if (method == Method::proposed && tau_zero) {
      ProposedOptions<Real> opts;
      opts.tau_zero = static_cast<Real>(*tau_zero);
      r = discretize_proposed(m, static_cast<Real>(t), opts);
    } else {
      OracleOptions oracle;
      oracle.rel_tol = oracle_tol;
      r = discretize(m, method, static_cast<Real>(t), oracle);
    }
  }
  return {py::cast(r.model.f), py::cast(r.model.q), std::string(method_name(r.method)),
          r.diagnostics};
}

ContinuousModel<double> model_of(const Mat& a, const Mat& s) { return {a, s}; }

py::tuple as_pair(const ContinuousModel<double>& m) { return py::make_tuple(m.a(), m.s()); }

}  // namespace

PYBIND11_MODULE(_core, mod) {
  mod.doc() = "Discretization of linear time-invariant stochastic systems";

  PYBIND11_CONSTINIT static py::gil_safe_call_once_and_store<py::object> error_type;
  error_type.call_once_and_store_result([&] {
    return py::object(py::exception<Error>(mod, "StochdiscError", PyExc_RuntimeError));
  });
  // instances carry the error kind name so callers can branch on it
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      const py::object& type = error_type.get_stored();
      py::object inst = type(e.what());
      inst.attr("kind") = std::string(error_kind_name(e.kind()));
      PyErr_SetObject(type.ptr(), inst.ptr());
    }
  });

  mod.def("methods", [] {
    std::vector<std::string> out;
    for (Method m : all_methods()) out.emplace_back(method_name(m));
    return out;
  }, "Names accepted by the method argument.");

  mod.def("is_exact", [](const std::string& name) { return is_exact(method_from(name)); },
          py::arg("method"));

  py::class_<Report>(mod, "Report")
      .def_readonly("F", &Report::f)
      .def_readonly("Q", &Report::q)
      .def_readonly("method", &Report::method)
      .def_readonly("diagnostics", &Report::diagnostics)
      .def("__repr__", [](const Report& r) { return "<Report method=" + r.method + ">"; });

  mod.def(
      "discretize",
      [](const Mat& a, const Mat& s, double t, const std::string& method,
         const std::string& width, std::optional<double> tau_zero, double oracle_tol) {
        const Method m = method_from(method);
        if (width_from(width) == bench::Width::f32) {
          return run<float>(a, s, t, m, tau_zero, oracle_tol);
        }
        return run<double>(a, s, t, m, tau_zero, oracle_tol);
      },
      py::arg("A"), py::arg("S"), py::arg("t"), py::arg("method") = "proposed",
      py::arg("width") = "f64", py::arg("tau_zero") = py::none(),
      py::arg("oracle_tol") = 1e-12,
      "F = exp(A t) and Q = int_0^t exp(A r) S exp(A r)^T dr by the chosen method.");

  mod.def(
      "q_oracle",
      [](const Mat& a, const Mat& s, double t, double rel_tol) {
        OracleOptions o;
        o.rel_tol = rel_tol;
        py::gil_scoped_release unlocked;
        return q_oracle(model_of(a, s), t, o);
      },
      py::arg("A"), py::arg("S"), py::arg("t"), py::arg("rel_tol") = 1e-12);

  mod.def("mat_exp", [](const Mat& a, double t) { return linalg::mat_exp<double>(a, t); },
          py::arg("A"), py::arg("t"));

  mod.def(
      "lemma2_residual",
      [](const Mat& a, const Mat& s, const Mat& f, const Mat& q) {
        return lemma2_residual<double>(model_of(a, s), f, q);
      },
      py::arg("A"), py::arg("S"), py::arg("F"), py::arg("Q"),
      "Relative residual of A Q + Q A^T + S - F S F^T.");

  mod.def(
      "semigroup_residual",
      [](const Mat& a, const Mat& s, const std::string& method, double t1, double t2) {
        return semigroup_residual<double>(model_of(a, s), method_from(method), t1, t2);
      },
      py::arg("A"), py::arg("S"), py::arg("method"), py::arg("t1"), py::arg("t2"));

  mod.def("constant_velocity", [] { return as_pair(modelgen::constant_velocity<double>()); },
          "(A, S) of the unit-intensity constant-velocity model.");

  mod.def(
      "gen_random_system",
      [](Index n, Index m, Index p, std::uint64_t seed, std::uint64_t index) {
        modelgen::EnsembleSpec spec;
        spec.n = n;
        spec.m = m;
        spec.p = p;
        spec.seed = seed;
        return as_pair(modelgen::gen_random_system(spec, index));
      },
      py::arg("n") = 6, py::arg("m") = 4, py::arg("p") = 2, py::arg("seed") = 1,
      py::arg("index") = 0);

  py::class_<bench::BenchRecord>(mod, "BenchRecord")
      .def_readonly("system_id", &bench::BenchRecord::system_id)
      .def_property_readonly("method",
                             [](const bench::BenchRecord& r) { return method_name(r.method); })
      .def_readonly("t", &bench::BenchRecord::t)
      .def_readonly("epsilon", &bench::BenchRecord::epsilon)
      .def_property_readonly("status",
                             [](const bench::BenchRecord& r) { return status_name(r.status); });

  py::class_<bench::SummaryRow>(mod, "SummaryRow")
      .def_property_readonly("method",
                             [](const bench::SummaryRow& r) { return method_name(r.method); })
      .def_readonly("t", &bench::SummaryRow::t)
      .def_readonly("median", &bench::SummaryRow::median)
      .def_readonly("q1", &bench::SummaryRow::q1)
      .def_readonly("q3", &bench::SummaryRow::q3)
      .def_readonly("fail_rate", &bench::SummaryRow::fail_rate)
      .def_readonly("count", &bench::SummaryRow::count);

  mod.def(
      "run_benchmark",
      [](int runs, std::optional<std::vector<double>> t_grid,
         std::optional<std::vector<std::string>> methods, const std::string& width,
         std::uint64_t seed, Index n, Index m, Index p, double oracle_tol, unsigned threads) {
        bench::BenchConfig cfg;
        cfg.runs = runs;
        if (t_grid) cfg.t_grid = *t_grid;
        if (methods) {
          cfg.methods.clear();
          for (const auto& name : *methods) cfg.methods.push_back(method_from(name));
        }
        cfg.width = width_from(width);
        cfg.ensemble.seed = seed;
        cfg.ensemble.n = n;
        cfg.ensemble.m = m;
        cfg.ensemble.p = p;
        cfg.oracle_tol = oracle_tol;
        cfg.threads = threads;
        py::gil_scoped_release unlocked;
        return bench::run_benchmark(cfg);
      },
      py::arg("runs") = 100, py::arg("t_grid") = py::none(), py::arg("methods") = py::none(),
      py::arg("width") = "f32", py::arg("seed") = 1, py::arg("n") = 6, py::arg("m") = 4,
      py::arg("p") = 2, py::arg("oracle_tol") = 1e-12, py::arg("threads") = 0);

  mod.def("default_t_grid", &bench::default_t_grid);

  mod.def(
      "summarize",
      [](const std::vector<bench::BenchRecord>& records) { return bench::summarize(records); },
      py::arg("records"));

  mod.def(
      "records_csv",
      [](const std::vector<bench::BenchRecord>& records) {
        std::ostringstream os;
        bench::write_records_csv(os, records);
        return os.str();
      },
      py::arg("records"));

  mod.def(
      "summary_csv",
      [](const std::vector<bench::SummaryRow>& rows) {
        std::ostringstream os;
        bench::write_summary_csv(os, rows);
        return os.str();
      },
      py::arg("rows"));
}
