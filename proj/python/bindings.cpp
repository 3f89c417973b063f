#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "iobs/bernoulli.hpp"
#include "iobs/hierarchy.hpp"
#include "iobs/piident.hpp"

namespace py = pybind11;
using namespace iobs;

namespace {

py::object to_py(const nlohmann::json& j) { return py::module_::import("json").attr("loads")(j.dump()); }

py::object fraction(const Rational& r) {
  return py::module_::import("fractions").attr("Fraction")(to_string(r));
}

// CohFT, observable and DR source chosen by table paths (empty: trivial CohFT, psi observable).
struct Context {
  std::unique_ptr<CohFT> cohft;
  std::unique_ptr<Observable> obs;
  std::unique_ptr<CorrelatorTable> dr_table;
  std::unique_ptr<DRSource> dr;
  Context(const std::string& cohft_table, const std::string& obs_table, const std::string& dr_path) {
    if (cohft_table.empty()) cohft = std::make_unique<TrivialCohFT>();
    else cohft = std::make_unique<TableCohFT>(load_table(cohft_table, TableKind::CohftPsi));
    if (!dr_path.empty()) dr_table = std::make_unique<CorrelatorTable>(load_table(dr_path, TableKind::DrD));
    dr = std::make_unique<DRSource>(*cohft, dr_table.get());
    if (obs_table.empty()) obs = std::make_unique<PsiObservable>();
    else obs = std::make_unique<TableObservable>(load_table(obs_table, TableKind::ObsO));
  }
};

}  // namespace

PYBIND11_MODULE(_iobs, m) {
  m.doc() = "Exact integrable-observable computations";
  py::register_exception<MissingCorrelator>(m, "MissingCorrelator", PyExc_LookupError);
  py::register_exception<TableError>(m, "TableError", PyExc_ValueError);
  py::register_exception<FluxMismatch>(m, "FluxMismatch", PyExc_ArithmeticError);

  m.def("bernoulli_number", [](int k) { return fraction(bernoulli_number(k)); }, py::arg("k"));
  m.def("psi_correlator", [](int g, const std::vector<int>& psi) { return fraction(psi_correlator(g, psi)); },
        py::arg("g"), py::arg("psi"));
  m.def("correlator",
        [](int g, const std::vector<int>& psi, std::vector<int> fields, const std::string& cohft_table) {
          Context c(cohft_table, "", "");
          if (fields.empty()) fields.assign(psi.size(), 1);
          return fraction(c.cohft->correlator(g, fields, psi));
        },
        py::arg("g"), py::arg("psi"), py::arg("fields") = std::vector<int>{}, py::arg("cohft_table") = "");

  m.def("kdv", [](int workers) { return to_py(kdv_demo(workers).to_json()); }, py::arg("workers") = 1);
  m.def("hodge", [](int M) { return to_py(hodge_demo(M).to_json()); }, py::arg("M"));

  m.def("check",
        [](const std::string& relation, int m_, int g, int n, bool strong, int workers, const std::string& cohft_table,
           const std::string& obs_table, const std::string& dr_table) {
          Context c(cohft_table, obs_table, dr_table);
          AssemblyContext ctx{*c.obs, *c.cohft, c.dr.get()};
          CheckOptions opt{strong, workers};
          if (relation == "lrt") return to_py(check_lrt(m_, g, n, ctx, opt).to_json());
          if (relation == "master") return to_py(check_master(m_, g, n, ctx, opt).to_json());
          if (relation == "gmaster") return to_py(check_geometric_master(m_, g, n, ctx, opt).to_json());
          throw py::value_error("relation must be lrt, master or gmaster");
        },
        py::arg("relation"), py::arg("m"), py::arg("g"), py::arg("n"), py::arg("strong") = false,
        py::arg("workers") = 1, py::arg("cohft_table") = "", py::arg("obs_table") = "", py::arg("dr_table") = "");

  m.def("verify_dilaton_identities",
        [](int g, int n, int m_max, bool literal_boundary, int workers) {
          PiOptions opt;
          opt.literal_boundary = literal_boundary;
          opt.workers = workers;
          return to_py(verify_dilaton_identities(g, n, m_max, opt).to_json());
        },
        py::arg("g"), py::arg("n"), py::arg("m_max"), py::arg("literal_boundary") = false, py::arg("workers") = 1);

  m.def("algebra_properties",
        [](std::uint64_t seed, int samples, int eps_max, int workers) {
          return to_py(check_algebra_properties(seed, samples, eps_max, workers).to_json());
        },
        py::arg("seed"), py::arg("samples") = 100, py::arg("eps_max") = 4, py::arg("workers") = 1);

  m.def("fluxes",
        [](int eps, int p_max, const std::string& kind, const std::string& cohft_table, const std::string& obs_table,
           const std::string& dr_table, int workers) {
          Context c(cohft_table, obs_table, dr_table);
          HierarchySpec spec{*c.cohft, *c.obs, c.dr.get(), eps, p_max};
          spec.workers = workers;
          if (kind == "R") return to_py(build_flux_R(spec).to_json());
          if (kind == "DR") return to_py(build_flux_DR(spec).to_json());
          throw py::value_error("kind must be R or DR");
        },
        py::arg("eps") = 2, py::arg("p_max") = 2, py::arg("kind") = "R", py::arg("cohft_table") = "",
        py::arg("obs_table") = "", py::arg("dr_table") = "", py::arg("workers") = 1);

  m.def("commute",
        [](const std::vector<std::tuple<int, int, int, int>>& pairs, int eps, int workers) {
          TrivialCohFT pc;
          PsiObservable psi;
          int p_max = 0;
          std::vector<FlowPair> fp;
          for (auto [b1, p1, b2, p2] : pairs) {
            fp.push_back({b1, p1, b2, p2});
            p_max = std::max({p_max, p1, p2});
          }
          HierarchySpec spec{pc, psi, nullptr, eps, p_max};
          spec.workers = workers;
          return check_commutation(build_flux_R(spec), fp, eps).all_commute();
        },
        py::arg("pairs"), py::arg("eps") = 2, py::arg("workers") = 1);
}
