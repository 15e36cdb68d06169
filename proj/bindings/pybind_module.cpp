#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <nlohmann/json.hpp>

#include "lpvcert/driver.hpp"
#include "lpvcert/gains.hpp"
#include "lpvcert/verify.hpp"

namespace py = pybind11;
using namespace lpvcert;

namespace {

SimMode mode_from_string(const std::string& s) {
  if (s == "open_loop") return SimMode::open_loop;
  if (s == "closed_loop") return SimMode::closed_loop;
  if (s == "error_system") return SimMode::error_system;
  throw std::invalid_argument("unknown mode: " + s);
}

py::dict outcome_to_dict(const AnalysisResult& res) {
  py::dict d;
  d["condition"] = to_string(res.condition);
  d["verdict"] = to_string(res.outcome.status);
  d["margin"] = res.outcome.margin;
  d["upper_bound"] = res.outcome.upper_bound;
  d["iterations"] = res.outcome.iterations;
  d["diagnostic"] = res.outcome.diagnostic;
  d["num_scalars"] = res.num_scalars;
  d["eps"] = res.eps;
  py::dict mats;
  for (const auto& [label, m] : res.matrices) mats[label.c_str()] = m;
  d["matrices"] = mats;
  py::list margins;
  for (const auto& [label, m] : res.block_margins) {
    py::dict e;
    e["label"] = label;
    e["margin"] = m;
    margins.append(e);
  }
  d["block_margins"] = margins;
  return d;
}

py::dict report_to_dict(const VerificationReport& rep) {
  py::dict d;
  py::list margins;
  for (const auto& e : rep.vertex_margins) {
    py::dict m;
    m["i"] = e.i;
    m["j"] = e.j;
    m["label"] = e.label;
    m["margin"] = e.margin;
    margins.append(m);
  }
  d["vertex_margins"] = margins;
  d["grid_mode"] = rep.grid_mode;
  d["pass"] = rep.pass;
  if (rep.mc_ran) {
    d["mc_worst_ratio"] = rep.mc_worst_ratio;
    d["a3_used"] = rep.a3_used;
    d["sequences_run"] = rep.sequences_run;
    d["horizon"] = rep.horizon;
    d["seed"] = rep.seed;
  }
  return d;
}

LyapunovCertificate cert_from_args(std::vector<Matrix> mats, bool is_p) {
  std::vector<SymMatrix> sym;
  for (const auto& m : mats) sym.emplace_back(m);
  return is_p ? LyapunovCertificate::from_p(sym) : LyapunovCertificate::from_s(sym);
}

}  // namespace

PYBIND11_MODULE(_lpvcert, m) {
  m.doc() = "poly-quadratic stability, detectability and stabilizability "
            "certification for discrete-time polytopic LPV systems";

  py::class_<PolytopicSystem>(m, "PolytopicSystem")
      .def_static("from_affine_scalar", &PolytopicSystem::from_affine_scalar, py::arg("a0"),
                  py::arg("ap"), py::arg("gamma"), py::arg("b"), py::arg("c"))
      .def_static(
          "from_vertices",
          [](std::vector<Matrix> vertices, const Matrix& b, const Matrix& c) {
            return PolytopicSystem::from_vertices(std::move(vertices), b, c);
          },
          py::arg("vertices"), py::arg("b"), py::arg("c"))
      .def_static("block_diag_compose", &PolytopicSystem::block_diag_compose, py::arg("parts"))
      .def_static("load", &PolytopicSystem::load, py::arg("path"))
      .def_static("from_json_str",
                  [](const std::string& s) { return PolytopicSystem::from_json(nlohmann::json::parse(s)); })
      .def("save", &PolytopicSystem::save, py::arg("path"))
      .def("to_json_str", [](const PolytopicSystem& s) { return s.to_json().dump(2); })
      .def_property_readonly("nx", &PolytopicSystem::nx)
      .def_property_readonly("nu", &PolytopicSystem::nu)
      .def_property_readonly("ny", &PolytopicSystem::ny)
      .def_property_readonly("num_vertices", &PolytopicSystem::num_vertices)
      .def_property_readonly("param_dim", &PolytopicSystem::param_dim)
      .def_property_readonly("strictly_polytopic", &PolytopicSystem::strictly_polytopic)
      .def_property_readonly("gamma",
                             [](const PolytopicSystem& s) -> py::object {
                               if (auto g = s.gamma()) return py::float_(*g);
                               return py::none();
                             })
      .def_property_readonly("B", &PolytopicSystem::B)
      .def_property_readonly("C", &PolytopicSystem::C)
      .def("vertex", &PolytopicSystem::vertex, py::arg("i"))
      .def("vertices", [](const PolytopicSystem& s) { return s.vertices(); })
      .def("witnesses", [](const PolytopicSystem& s) { return s.witnesses(); })
      .def("xi", &PolytopicSystem::xi, py::arg("p"))
      .def("contains", &PolytopicSystem::contains, py::arg("p"))
      .def("evaluate_A", &PolytopicSystem::evaluate_A, py::arg("p"))
      .def("with_gamma", &PolytopicSystem::with_gamma, py::arg("gamma"));

  py::class_<GainSchedule>(m, "GainSchedule")
      .def_property_readonly("recipe", [](const GainSchedule& g) { return std::string(to_string(g.recipe())); })
      .def_property_readonly("kind", [](const GainSchedule& g) { return std::string(to_string(g.gain_kind())); })
      .def_property_readonly("needs_next_parameter", &GainSchedule::needs_next_parameter)
      .def(
          "gain",
          [](const GainSchedule& g, const Vector& p_now, std::optional<Vector> p_next) {
            return g.gain(p_now, p_next ? &*p_next : nullptr);
          },
          py::arg("p_now"), py::arg("p_next") = std::nullopt)
      .def("vertex_gain", &GainSchedule::vertex_gain, py::arg("i"))
      .def("to_json_str", [](const GainSchedule& g) { return g.to_json().dump(2); });

  // symmetric-matrix utilities
  m.def("svec", [](const Matrix& m_) { return svec(SymMatrix(m_)); }, py::arg("m"));
  m.def("smat", [](const Vector& v) { return smat(v).mat(); }, py::arg("v"));
  m.def("min_eigenvalue", [](const Matrix& m_) { return min_eigenvalue(SymMatrix(m_)); }, py::arg("m"));
  m.def(
      "is_positive_definite",
      [](const Matrix& m_, double tol) { return is_positive_definite(SymMatrix(m_), tol); },
      py::arg("m"), py::arg("tol") = 1e-8);
  m.def("spectral_radius", &spectral_radius, py::arg("a"));

  m.def(
      "count_decision_vars",
      [](const std::string& cond, int n, int nx, int nu, int ny) {
        return count_decision_vars(condition_from_string(cond), n, nx, nu, ny);
      },
      py::arg("condition"), py::arg("num_vertices"), py::arg("nx"), py::arg("nu"), py::arg("ny"));

  m.def("condition_ids", []() {
    std::vector<std::string> out;
    for (auto c : lmi_conditions()) out.emplace_back(to_string(c));
    out.emplace_back("thm2_sampled");
    return out;
  });

  m.def(
      "analyze",
      [](const PolytopicSystem& sys, const std::string& condition, double eps, int max_iterations) {
        ConditionId cond = condition_from_string(condition);
        SolveOptions opts;
        opts.max_iterations = max_iterations;
        auto res = analyze_condition(cond, sys, eps > 0 ? eps : default_eps(cond, sys), opts);
        return outcome_to_dict(res);
      },
      py::arg("system"), py::arg("condition"), py::arg("eps") = -1.0,
      py::arg("max_iterations") = 500);

  m.def(
      "bisect_gamma",
      [](const PolytopicSystem& sys, const std::string& condition, double lo, double hi,
         double tol) {
        auto res = bisect_gamma(condition_from_string(condition), sys, lo, hi, tol);
        py::dict d;
        d["condition"] = condition;
        d["gamma_star"] = res.gamma_star;
        d["lo"] = res.lo;
        d["hi"] = res.hi;
        py::list evals;
        for (const auto& e : res.evaluations) {
          py::dict ev;
          ev["gamma"] = e.gamma;
          ev["verdict"] = to_string(e.verdict);
          ev["margin"] = e.margin;
          ev["wall_seconds"] = e.wall_seconds;
          evals.append(ev);
        }
        d["evaluations"] = evals;
        return d;
      },
      py::arg("system"), py::arg("condition"), py::arg("lo"), py::arg("hi"),
      py::arg("tol") = 1e-3);

  m.def(
      "gain_from_certificate",
      [](const std::string& condition, const PolytopicSystem& sys,
         const std::map<std::string, Matrix>& matrices) {
        return gain_from_certificate(condition_from_string(condition), sys, matrices);
      },
      py::arg("condition"), py::arg("system"), py::arg("matrices"));

  m.def(
      "simulate",
      [](const PolytopicSystem& sys, const Vector& x0, const std::vector<Vector>& params,
         const std::vector<Vector>& inputs, const std::string& mode, const GainSchedule* gain) {
        ParameterSequence seq;
        seq.points = params;
        auto traj = simulate(sys, x0, seq, inputs, gain, mode_from_string(mode));
        py::dict d;
        d["states"] = traj.states;
        d["inputs_used"] = traj.inputs_used;
        d["params_used"] = traj.params_used;
        return d;
      },
      py::arg("system"), py::arg("x0"), py::arg("params"),
      py::arg("inputs") = std::vector<Vector>{}, py::arg("mode") = "open_loop",
      py::arg("gain") = nullptr);

  m.def(
      "check_vertex_certificate",
      [](const PolytopicSystem& sys, std::vector<Matrix> mats, bool is_p, const std::string& mode,
         const GainSchedule* gain) {
        return report_to_dict(
            check_vertex_certificate(sys, cert_from_args(std::move(mats), is_p),
                                     mode_from_string(mode), gain));
      },
      py::arg("system"), py::arg("matrices"), py::arg("is_p"), py::arg("mode") = "open_loop",
      py::arg("gain") = nullptr);

  m.def(
      "monte_carlo_descent",
      [](const PolytopicSystem& sys, std::vector<Matrix> mats, bool is_p, const std::string& mode,
         const GainSchedule* gain, int num_sequences, int horizon, uint64_t seed,
         std::optional<double> a3) {
        return report_to_dict(monte_carlo_descent(sys, cert_from_args(std::move(mats), is_p),
                                                  mode_from_string(mode), gain, num_sequences,
                                                  horizon, seed, a3));
      },
      py::arg("system"), py::arg("matrices"), py::arg("is_p"), py::arg("mode"), py::arg("gain"),
      py::arg("num_sequences") = 1000, py::arg("horizon") = 50, py::arg("seed") = 42,
      py::arg("a3") = std::nullopt);

  m.def(
      "lti_ground_truth",
      [](const Matrix& a, const Matrix& b, const Matrix& c) {
        auto gt = lti_ground_truth(a, b, c);
        py::dict d;
        d["detectable"] = gt.detectable;
        d["stabilizable"] = gt.stabilizable;
        return d;
      },
      py::arg("a"), py::arg("b"), py::arg("c"));

  m.def("product_radius_oracle", &product_radius_oracle, py::arg("system"), py::arg("max_len"),
        py::arg("multiply_budget") = 2000000L);

  m.def(
      "check_thm2_sampled",
      [](const PolytopicSystem& sys, std::vector<Matrix> pbars,
         const std::vector<std::pair<Vector, Vector>>& grid) {
        std::vector<SymMatrix> sym;
        for (const auto& p : pbars) sym.emplace_back(p);
        auto rep = check_thm2_sampled(sys, sym, grid);
        py::dict d;
        d["min_margin"] = rep.min_margin;
        py::list entries;
        for (const auto& e : rep.entries) {
          py::dict ent;
          ent["pi"] = e.pi;
          ent["pi_next"] = e.pi_next;
          ent["margin"] = e.margin;
          entries.append(ent);
        }
        d["entries"] = entries;
        return d;
      },
      py::arg("system"), py::arg("pbars"), py::arg("grid"));

  m.def("scalar_parameter_grid", &scalar_parameter_grid, py::arg("system"),
        py::arg("points_per_axis"));
}
