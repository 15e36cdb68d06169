#include "lpvcert/conditions.hpp"

#include <Eigen/Cholesky>
#include <stdexcept>

namespace lpvcert {

namespace {

std::string idx1(const std::string& base, int i) { return base + "_" + std::to_string(i + 1); }
std::string idx2(const std::string& base, int i, int j) {
  return base + "_" + std::to_string(i + 1) + "_" + std::to_string(j + 1);
}

std::string block_label(ConditionId cond, int i, int j) {
  return std::string(to_string(cond)) + "[i=" + std::to_string(i + 1) +
         ",j=" + std::to_string(j + 1) + "]";
}

Matrix half_eye(int n) { return 0.5 * Matrix::Identity(n, n); }

}  // namespace

const char* to_string(ConditionId c) {
  switch (c) {
    case ConditionId::polyqs_l12: return "polyqs_l12";
    case ConditionId::polyqs_l13: return "polyqs_l13";
    case ConditionId::polyqs_l14: return "polyqs_l14";
    case ConditionId::det_thm1: return "det_thm1";
    case ConditionId::det_rem1: return "det_rem1";
    case ConditionId::stab_nec: return "stab_nec";
    case ConditionId::stab_thm3: return "stab_thm3";
    case ConditionId::synth_t43: return "synth_t43";
    case ConditionId::synth_t44: return "synth_t44";
    case ConditionId::synth_daafouz: return "synth_daafouz";
    case ConditionId::lti_det: return "lti_det";
    case ConditionId::lti_stab: return "lti_stab";
    case ConditionId::thm2_sampled: return "thm2_sampled";
  }
  return "?";
}

ConditionId condition_from_string(const std::string& s) {
  for (ConditionId c : {ConditionId::polyqs_l12, ConditionId::polyqs_l13, ConditionId::polyqs_l14,
                        ConditionId::det_thm1, ConditionId::det_rem1, ConditionId::stab_nec,
                        ConditionId::stab_thm3, ConditionId::synth_t43, ConditionId::synth_t44,
                        ConditionId::synth_daafouz, ConditionId::lti_det, ConditionId::lti_stab,
                        ConditionId::thm2_sampled})
    if (s == to_string(c)) return c;
  throw std::invalid_argument("unknown condition id: " + s);
}

std::vector<ConditionId> lmi_conditions() {
  return {ConditionId::polyqs_l12, ConditionId::polyqs_l13, ConditionId::polyqs_l14,
          ConditionId::det_thm1,   ConditionId::det_rem1,   ConditionId::stab_nec,
          ConditionId::stab_thm3,  ConditionId::synth_t43,  ConditionId::synth_t44,
          ConditionId::synth_daafouz, ConditionId::lti_det, ConditionId::lti_stab};
}

LmiProblem build_condition(ConditionId cond, const PolytopicSystem& sys, double eps) {
  if (!(eps > 0)) throw std::invalid_argument("build_condition: eps must be > 0");
  const int n = sys.num_vertices();
  const int nx = sys.nx(), nu = sys.nu(), ny = sys.ny();
  const Matrix& b = sys.B();
  const Matrix& c = sys.C();
  const Matrix eye = Matrix::Identity(nx, nx);
  LmiProblem prob;

  if ((cond == ConditionId::lti_det || cond == ConditionId::lti_stab) && n != 1)
    throw std::invalid_argument("lti_* conditions require a single-vertex system");

  switch (cond) {
    case ConditionId::polyqs_l12: {
      std::vector<DecisionVar> s, x;
      for (int i = 0; i < n; ++i) s.push_back(prob.declare_symmetric(nx, idx1("Sbar", i)));
      for (int i = 0; i < n; ++i) x.push_back(prob.declare_rectangular(nx, nx, idx1("X", i)));
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
          AffineExpr e(2 * nx);
          e.add_term(x[i], eye, eye, 0, 0);
          e.add_term(s[i], -half_eye(nx), eye, 0, 0);
          e.add_term(x[i], sys.vertex(i), eye, nx, 0);
          e.add_term(s[j], half_eye(nx), eye, nx, nx);
          prob.add_constraint(std::move(e), eps, block_label(cond, i, j));
        }
      break;
    }
    case ConditionId::polyqs_l13: {
      std::vector<DecisionVar> p, x;
      for (int i = 0; i < n; ++i) p.push_back(prob.declare_symmetric(nx, idx1("Pbar", i)));
      for (int i = 0; i < n; ++i) x.push_back(prob.declare_rectangular(nx, nx, idx1("X", i)));
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
          AffineExpr e(2 * nx);
          e.add_term(x[i], eye, eye, 0, 0);
          e.add_term(p[j], -half_eye(nx), eye, 0, 0);
          e.add_term(x[i], eye, sys.vertex(i), 0, nx);  // X_i A_i above, transpose below
          e.add_term(p[i], half_eye(nx), eye, nx, nx);
          prob.add_constraint(std::move(e), eps, block_label(cond, i, j));
        }
      break;
    }
    case ConditionId::polyqs_l14: {
      std::vector<DecisionVar> s;
      for (int i = 0; i < n; ++i) s.push_back(prob.declare_symmetric(nx, idx1("Sbar", i)));
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
          AffineExpr e(2 * nx);
          e.add_term(s[i], half_eye(nx), eye, 0, 0);
          e.add_term(s[i], sys.vertex(i), eye, nx, 0);
          e.add_term(s[j], half_eye(nx), eye, nx, nx);
          prob.add_constraint(std::move(e), eps, block_label(cond, i, j));
        }
      break;
    }
    case ConditionId::lti_det:
    case ConditionId::det_thm1: {
      std::vector<DecisionVar> p;
      for (int i = 0; i < n; ++i) p.push_back(prob.declare_symmetric(nx, idx1("Pbar", i)));
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
          AffineExpr e{SymMatrix(c.transpose() * c)};
          e.add_term(p[i], half_eye(nx), eye, 0, 0);
          e.add_term(p[j], -0.5 * sys.vertex(i).transpose(), sys.vertex(i), 0, 0);
          prob.add_constraint(std::move(e), eps, block_label(cond, i, j));
        }
      for (int i = 0; i < n; ++i) {
        AffineExpr e(nx);
        e.add_term(p[i], half_eye(nx), eye, 0, 0);
        prob.add_constraint(std::move(e), eps, "pos[" + idx1("Pbar", i) + "]");
      }
      break;
    }
    case ConditionId::det_rem1: {
      std::vector<DecisionVar> p, x, y;
      for (int i = 0; i < n; ++i) p.push_back(prob.declare_symmetric(nx, idx1("Pbar", i)));
      for (int i = 0; i < n; ++i) x.push_back(prob.declare_rectangular(nx, nx, idx1("X", i)));
      for (int i = 0; i < n; ++i) y.push_back(prob.declare_rectangular(nx, ny, idx1("Y", i)));
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
          AffineExpr e(2 * nx);
          e.add_term(x[i], eye, eye, 0, 0);
          e.add_term(p[j], -half_eye(nx), eye, 0, 0);
          e.add_term(x[i], eye, sys.vertex(i), 0, nx);
          e.add_term(y[i], eye, c, 0, nx);
          e.add_term(p[i], half_eye(nx), eye, nx, nx);
          prob.add_constraint(std::move(e), eps, block_label(cond, i, j));
        }
      break;
    }
    case ConditionId::lti_stab:
    case ConditionId::stab_nec: {
      std::vector<DecisionVar> s;
      for (int i = 0; i < n; ++i) s.push_back(prob.declare_symmetric(nx, idx1("Sbar", i)));
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
          AffineExpr e{SymMatrix(b * b.transpose())};
          e.add_term(s[j], half_eye(nx), eye, 0, 0);
          e.add_term(s[i], -0.5 * sys.vertex(i), sys.vertex(i).transpose(), 0, 0);
          prob.add_constraint(std::move(e), eps, block_label(cond, i, j));
        }
      for (int i = 0; i < n; ++i) {
        AffineExpr e(nx);
        e.add_term(s[i], half_eye(nx), eye, 0, 0);
        prob.add_constraint(std::move(e), eps, "pos[" + idx1("Sbar", i) + "]");
      }
      break;
    }
    case ConditionId::stab_thm3: {
      std::vector<DecisionVar> s, x;
      for (int i = 0; i < n; ++i) s.push_back(prob.declare_symmetric(nx, idx1("Sbar", i)));
      for (int i = 0; i < n; ++i) x.push_back(prob.declare_rectangular(nx, nx, idx1("X", i)));
      Matrix bbt = Matrix::Zero(2 * nx, 2 * nx);
      bbt.topLeftCorner(nx, nx) = b * b.transpose();
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
          AffineExpr e{SymMatrix(bbt)};
          e.add_term(x[i], eye, eye, 0, 0);
          e.add_term(s[i], -0.5 * sys.vertex(i), sys.vertex(i).transpose(), 0, 0);
          e.add_term(x[i], eye, eye, nx, 0);
          e.add_term(s[j], half_eye(nx), eye, nx, nx);
          prob.add_constraint(std::move(e), eps, block_label(cond, i, j));
        }
      break;
    }
    case ConditionId::synth_t43: {
      std::vector<DecisionVar> s, y;
      for (int i = 0; i < n; ++i) s.push_back(prob.declare_symmetric(nx, idx1("Sbar", i)));
      for (int i = 0; i < n; ++i) y.push_back(prob.declare_rectangular(nu, nx, idx1("Y", i)));
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
          AffineExpr e(2 * nx);
          e.add_term(s[i], half_eye(nx), eye, 0, 0);
          e.add_term(s[i], sys.vertex(i), eye, nx, 0);
          e.add_term(y[i], b, eye, nx, 0);
          e.add_term(s[j], half_eye(nx), eye, nx, nx);
          prob.add_constraint(std::move(e), eps, block_label(cond, i, j));
        }
      break;
    }
    case ConditionId::synth_t44: {
      std::vector<DecisionVar> s, z;
      std::vector<std::vector<DecisionVar>> x(n), y(n);
      for (int i = 0; i < n; ++i) s.push_back(prob.declare_symmetric(nx, idx1("Sbar", i)));
      for (int i = 0; i < n; ++i) z.push_back(prob.declare_rectangular(nx, nx, idx1("Z", i)));
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
          x[i].push_back(prob.declare_rectangular(nx, nx, idx2("X", i, j)));
          y[i].push_back(prob.declare_rectangular(nu, nx, idx2("Y", i, j)));
        }
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
          AffineExpr e(3 * nx);
          e.add_term(x[i][j], eye, eye, 0, 0);
          e.add_term(s[i], -half_eye(nx), eye, 0, 0);
          e.add_term(x[i][j], sys.vertex(i), eye, nx, 0);
          e.add_term(y[i][j], b, eye, nx, 0);
          e.add_term(z[i], eye, eye, nx, nx);
          e.add_term(z[i], eye, eye, 2 * nx, nx);
          e.add_term(s[j], half_eye(nx), eye, 2 * nx, 2 * nx);
          prob.add_constraint(std::move(e), eps, block_label(cond, i, j));
        }
      break;
    }
    case ConditionId::synth_daafouz: {
      std::vector<DecisionVar> s, x, y;
      for (int i = 0; i < n; ++i) s.push_back(prob.declare_symmetric(nx, idx1("Sbar", i)));
      for (int i = 0; i < n; ++i) x.push_back(prob.declare_rectangular(nx, nx, idx1("X", i)));
      for (int i = 0; i < n; ++i) y.push_back(prob.declare_rectangular(nu, nx, idx1("Y", i)));
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
          AffineExpr e(2 * nx);
          e.add_term(x[i], eye, eye, 0, 0);
          e.add_term(s[i], -half_eye(nx), eye, 0, 0);
          e.add_term(x[i], sys.vertex(i), eye, nx, 0);
          e.add_term(y[i], b, eye, nx, 0);
          e.add_term(s[j], half_eye(nx), eye, nx, nx);
          prob.add_constraint(std::move(e), eps, block_label(cond, i, j));
        }
      break;
    }
    case ConditionId::thm2_sampled:
      throw std::invalid_argument("thm2_sampled is a sampled check, not an LMI build");
  }
  return prob;
}

long count_decision_vars(ConditionId cond, int num_vertices, int nx, int nu, int ny) {
  if (num_vertices < 1 || nx < 1 || nu < 1 || ny < 1)
    throw std::invalid_argument("count_decision_vars: dimensions must be >= 1");
  const long n = num_vertices;
  const long tri = static_cast<long>(nx) * (nx + 1) / 2;
  const long sq = static_cast<long>(nx) * nx;
  switch (cond) {
    case ConditionId::polyqs_l12:
    case ConditionId::polyqs_l13:
    case ConditionId::stab_thm3:
      return n * (sq + tri);
    case ConditionId::polyqs_l14:
    case ConditionId::det_thm1:
    case ConditionId::stab_nec:
    case ConditionId::thm2_sampled:
      return n * tri;
    case ConditionId::det_rem1:
      return n * (sq + tri + static_cast<long>(nx) * ny);
    case ConditionId::synth_t43:
      return n * (tri + static_cast<long>(nx) * nu);
    case ConditionId::synth_t44:
      return n * (n * (sq + static_cast<long>(nx) * nu) + sq + tri);
    case ConditionId::synth_daafouz:
      return n * (sq + tri + static_cast<long>(nx) * nu);
    case ConditionId::lti_det:
    case ConditionId::lti_stab:
      if (num_vertices != 1)
        throw std::invalid_argument("lti_* conditions require a single-vertex system");
      return tri;
  }
  throw std::invalid_argument("unknown condition");
}

double default_eps(ConditionId cond, const PolytopicSystem& sys) {
  double scale = 0.0;
  switch (cond) {
    case ConditionId::det_thm1:
    case ConditionId::det_rem1:
    case ConditionId::lti_det:
      scale = (sys.C().transpose() * sys.C()).cwiseAbs().maxCoeff();
      break;
    case ConditionId::stab_nec:
    case ConditionId::stab_thm3:
    case ConditionId::lti_stab:
    case ConditionId::thm2_sampled:
      scale = (sys.B() * sys.B().transpose()).cwiseAbs().maxCoeff();
      break;
    default:
      break;
  }
  return 1e-6 * std::max(1.0, scale);
}

AnalysisResult analyze_condition(ConditionId cond, const PolytopicSystem& sys, double eps,
                                 const SolveOptions& opts) {
  AnalysisResult res;
  res.condition = cond;
  res.eps = eps;
  LmiProblem prob = build_condition(cond, sys, eps);
  auto compiled = compile(prob);
  res.num_scalars = compiled.num_scalars();
  res.outcome = solve_feasibility(compiled, opts);
  if (res.outcome.status == FeasStatus::feasible) {
    res.matrices = compiled.matrices_by_label(*res.outcome.assignment);
    auto margins = verify_assignment(compiled, *res.outcome.assignment);
    for (size_t b = 0; b < margins.size(); ++b)
      res.block_margins.emplace_back(compiled.blocks()[b].label, margins[b]);
  }
  return res;
}

Thm2Report check_thm2_sampled(const PolytopicSystem& sys, const std::vector<SymMatrix>& pbars,
                              const std::vector<std::pair<Vector, Vector>>& grid) {
  if (static_cast<int>(pbars.size()) != sys.num_vertices())
    throw std::invalid_argument("check_thm2_sampled: need one Pbar per vertex");
  if (grid.empty()) throw std::invalid_argument("check_thm2_sampled: empty grid");
  for (const auto& p : pbars)
    if (!is_positive_definite(p, 1e-12))
      throw std::invalid_argument("check_thm2_sampled: Pbar matrices must be positive definite");

  auto s_of = [&](const Vector& pi) {
    Vector w = sys.xi(pi);
    Matrix p = Matrix::Zero(sys.nx(), sys.nx());
    for (int i = 0; i < sys.num_vertices(); ++i) p += w(i) * pbars[i].mat();
    Eigen::LLT<Matrix> llt(p);
    if (llt.info() != Eigen::Success)
      throw std::runtime_error("check_thm2_sampled: singular P(pi)");
    return llt.solve(Matrix::Identity(sys.nx(), sys.nx())).eval();
  };

  Thm2Report rep;
  rep.min_margin = std::numeric_limits<double>::infinity();
  const Matrix bbt = sys.B() * sys.B().transpose();
  for (const auto& [pi, pin] : grid) {
    Matrix a = sys.evaluate_A(pi);
    Matrix m = s_of(pin) - a * s_of(pi) * a.transpose() + bbt;
    double margin = min_eigenvalue(SymMatrix(m));
    rep.entries.push_back({pi, pin, margin});
    rep.min_margin = std::min(rep.min_margin, margin);
  }
  return rep;
}

std::vector<std::pair<Vector, Vector>> scalar_parameter_grid(const PolytopicSystem& sys,
                                                             int points_per_axis) {
  auto g = sys.gamma();
  if (!g || sys.param_dim() != 1)
    throw std::invalid_argument("scalar_parameter_grid: needs a scalar-parameter family");
  if (points_per_axis < 2) throw std::invalid_argument("scalar_parameter_grid: need >= 2 points");
  std::vector<double> pts;
  for (int i = 0; i < points_per_axis; ++i)
    pts.push_back(-*g + 2.0 * *g * i / (points_per_axis - 1));
  std::vector<std::pair<Vector, Vector>> grid;
  for (double a : pts)
    for (double b : pts) {
      Vector pa(1), pb(1);
      pa << a;
      pb << b;
      grid.emplace_back(pa, pb);
    }
  return grid;
}

}  // namespace lpvcert
