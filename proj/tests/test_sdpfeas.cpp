#include <doctest.h>

#include <random>

#include "lpvcert/sdpfeas.hpp"

using namespace lpvcert;

namespace {

CompiledFeasibility scalar_det_problem(double a, double c, double eps = 0.0) {
  // eq-(2)-style scalar test: P - a^2 P + c^2 > 0 and P > 0
  LmiProblem prob;
  auto p = prob.declare_symmetric(1, "P");
  AffineExpr lyap(1);
  lyap.add_term(p, 0.5 * (1.0 - a * a) * Matrix::Identity(1, 1), Matrix::Identity(1, 1), 0, 0);
  AffineExpr lyap_shifted{SymMatrix(c * c * Matrix::Identity(1, 1))};
  lyap_shifted.add_term(p, 0.5 * (1.0 - a * a) * Matrix::Identity(1, 1), Matrix::Identity(1, 1), 0,
                        0);
  AffineExpr pos(1);
  pos.add_term(p, 0.5 * Matrix::Identity(1, 1), Matrix::Identity(1, 1), 0, 0);
  prob.add_constraint(lyap_shifted, eps, "lyap");
  prob.add_constraint(pos, eps, "pos");
  return compile(prob);
}

CompiledFeasibility stein_problem(const Matrix& a) {
  // [[S, S A^T],[A S, S]] > 0, feasible iff rho(A) < 1
  const int n = static_cast<int>(a.rows());
  LmiProblem prob;
  auto s = prob.declare_symmetric(n, "S");
  AffineExpr e(2 * n);
  e.add_term(s, 0.5 * Matrix::Identity(n, n), Matrix::Identity(n, n), 0, 0);
  e.add_term(s, a, Matrix::Identity(n, n), n, 0);
  e.add_term(s, 0.5 * Matrix::Identity(n, n), Matrix::Identity(n, n), n, n);
  prob.add_constraint(e, 0.0, "stein");
  return compile(prob);
}

}  // namespace

TEST_CASE("scalar one-variable problem x - 1 >= 0") {
  LmiProblem prob;
  auto x = prob.declare_symmetric(1, "x");
  AffineExpr e{SymMatrix(-Matrix::Identity(1, 1))};
  e.add_term(x, 0.5 * Matrix::Identity(1, 1), Matrix::Identity(1, 1), 0, 0);
  prob.add_constraint(e, 0.0, "c");
  auto comp = compile(prob);

  SolveOptions opts;
  opts.trust_region = 10.0;
  opts.gap_rel = 0.01;
  auto out = solve_feasibility(comp, opts);
  REQUIRE(out.status == FeasStatus::feasible);
  REQUIRE(out.assignment.has_value());
  CHECK((*out.assignment)(0) >= 1.0);
  // optimum is t* = 9 at x = 10; accept within the gap tolerance
  CHECK(out.margin > 8.5);
  CHECK(out.upper_bound >= out.margin);

  auto margins = verify_assignment(comp, *out.assignment);
  for (double m : margins) CHECK(m > 0);
  CHECK(verify_assignment(comp, Vector::Zero(1))[0] == doctest::Approx(-1.0));
}

TEST_CASE("constant problem -I >= 0 is infeasible") {
  LmiProblem prob;
  prob.declare_symmetric(1, "unused");
  AffineExpr e{SymMatrix(-Matrix::Identity(2, 2))};
  prob.add_constraint(e, 0.0, "c");
  auto out = solve_feasibility(compile(prob));
  CHECK(out.status == FeasStatus::infeasible);
  CHECK(out.margin <= 0);
}

TEST_CASE("undetectable scalar system is infeasible") {
  auto out = solve_feasibility(scalar_det_problem(2.0, 0.0));
  CHECK(out.status == FeasStatus::infeasible);
}

TEST_CASE("detectable scalar system is feasible") {
  auto out = solve_feasibility(scalar_det_problem(2.0, 1.0));
  CHECK(out.status == FeasStatus::feasible);
}

TEST_CASE("verify_assignment margins for the scalar example") {
  auto comp = scalar_det_problem(0.5, 1.0);
  Vector x(1);
  x << 0.2;
  auto margins = verify_assignment(comp, x);
  CHECK(margins[0] == doctest::Approx(0.2 - 0.05 + 1.0));
  CHECK(margins[1] == doctest::Approx(0.2));
  CHECK_THROWS_AS(verify_assignment(comp, Vector::Zero(3)), std::invalid_argument);
}

TEST_CASE("known margin is attained") {
  // blocks x - 1 and 3 - x: max margin 1 at x = 2
  LmiProblem prob;
  auto x = prob.declare_symmetric(1, "x");
  AffineExpr lo{SymMatrix(-Matrix::Identity(1, 1))};
  lo.add_term(x, 0.5 * Matrix::Identity(1, 1), Matrix::Identity(1, 1), 0, 0);
  AffineExpr hi{SymMatrix(3 * Matrix::Identity(1, 1))};
  hi.add_term(x, -0.5 * Matrix::Identity(1, 1), Matrix::Identity(1, 1), 0, 0);
  prob.add_constraint(lo, 0.0, "lo");
  prob.add_constraint(hi, 0.0, "hi");
  SolveOptions opts;
  opts.gap_rel = 0.01;
  auto out = solve_feasibility(compile(prob), opts);
  REQUIRE(out.status == FeasStatus::feasible);
  CHECK(out.margin == doctest::Approx(1.0).epsilon(0.06));
  CHECK(out.upper_bound >= out.margin);
  CHECK((*out.assignment)(0) == doctest::Approx(2.0).epsilon(0.1));
}

TEST_CASE("Stein feasibility tracks the spectral radius") {
  Matrix a(2, 2);
  a << 0.9, 0.5, 0.0, 0.8;
  auto out = solve_feasibility(stein_problem(a));
  CHECK(out.status == FeasStatus::feasible);

  Matrix b(2, 2);
  b << 1.1, 0.0, 0.3, 0.7;
  auto out2 = solve_feasibility(stein_problem(b));
  CHECK(out2.status == FeasStatus::infeasible);
}

TEST_CASE("homogeneity: scaling the blocks scales the found margin") {
  Matrix a(2, 2);
  a << 0.6, 0.3, -0.2, 0.5;
  SolveOptions opts;
  opts.gap_rel = 0.01;

  auto base = stein_problem(a);
  auto out1 = solve_feasibility(base, opts);
  REQUIRE(out1.status == FeasStatus::feasible);

  // same problem with every block scaled by c
  const double c = 12.5;
  LmiProblem prob;
  auto s = prob.declare_symmetric(2, "S");
  AffineExpr e(4);
  e.add_term(s, c * 0.5 * Matrix::Identity(2, 2), Matrix::Identity(2, 2), 0, 0);
  e.add_term(s, c * a, Matrix::Identity(2, 2), 2, 0);
  e.add_term(s, c * 0.5 * Matrix::Identity(2, 2), Matrix::Identity(2, 2), 2, 2);
  prob.add_constraint(e, 0.0, "stein");
  auto out2 = solve_feasibility(compile(prob), opts);
  REQUIRE(out2.status == FeasStatus::feasible);
  CHECK(out2.margin / out1.margin == doctest::Approx(c).epsilon(0.05));
}

TEST_CASE("feasible status implies verified positive margins") {
  std::mt19937_64 rng(23);
  auto u = [&](double lo, double hi) { return lo + (hi - lo) * ((rng() >> 11) * 0x1.0p-53); };
  int feas = 0, infeas = 0;
  for (int rep = 0; rep < 40; ++rep) {
    Matrix a(2, 2);
    for (int i = 0; i < 4; ++i) a.data()[i] = u(-1.2, 1.2);
    auto out = solve_feasibility(stein_problem(a));
    double rho = spectral_radius(a);
    if (std::abs(rho - 1.0) < 5e-2) continue;
    if (out.status == FeasStatus::feasible) {
      ++feas;
      CHECK(rho < 1.0);
      auto margins = verify_assignment(stein_problem(a), *out.assignment);
      for (double m : margins) CHECK(m > 0);
      CHECK(*std::min_element(margins.begin(), margins.end()) >= 0.5 * out.margin);
    } else {
      ++infeas;
      CHECK(out.status == FeasStatus::infeasible);
      CHECK(rho >= 1.0);
    }
  }
  CHECK(feas > 0);
  CHECK(infeas > 0);
}

TEST_CASE("scalar detectability ground truth over 200 random pairs") {
  std::mt19937_64 rng(29);
  auto u = [&](double lo, double hi) { return lo + (hi - lo) * ((rng() >> 11) * 0x1.0p-53); };
  int done = 0;
  while (done < 200) {
    double a = u(-3, 3);
    if (std::abs(std::abs(a) - 1.0) < 5e-2) continue;
    double c = u(-2, 2);
    if (rng() % 4 == 0) c = 0.0;
    else if (std::abs(c) < 5e-2) continue;
    ++done;
    SolveOptions opts;
    opts.eps_feas = 1e-7;
    auto out = solve_feasibility(scalar_det_problem(a, c), opts);
    bool detectable = (std::abs(a) < 1.0) || (c != 0.0);
    CAPTURE(a);
    CAPTURE(c);
    CHECK(out.status == (detectable ? FeasStatus::feasible : FeasStatus::infeasible));
  }
}

TEST_CASE("per-variable scaling does not change the verdict") {
  Matrix a(2, 2);
  a << 0.7, 0.2, 0.1, 0.6;
  auto comp = stein_problem(a);
  SolveOptions opts;
  opts.var_scaling = std::vector<double>{50.0};
  auto out = solve_feasibility(comp, opts);
  CHECK(out.status == FeasStatus::feasible);
  auto margins = verify_assignment(comp, *out.assignment);
  for (double m : margins) CHECK(m > 0);
}

TEST_CASE("options validation") {
  auto comp = scalar_det_problem(0.5, 1.0);
  SolveOptions bad;
  bad.tol = 0.0;
  CHECK_THROWS_AS(solve_feasibility(comp, bad), std::invalid_argument);
}
