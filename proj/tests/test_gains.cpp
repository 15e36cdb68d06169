#include <doctest.h>

#include <nlohmann/json.hpp>

#include "lpvcert/gains.hpp"
#include "test_util.hpp"

using namespace lpvcert;
using namespace lpvcert::testutil;

namespace {

PolytopicSystem scalar_lti(double a, double b, double c) {
  Matrix am(1, 1), bm(1, 1), cm(1, 1);
  am << a;
  bm << b;
  cm << c;
  return PolytopicSystem::from_vertices({am}, bm, cm);
}

Vector simplex1() {
  Vector p(1);
  p << 1.0;
  return p;
}

}  // namespace

TEST_CASE("observer gain arithmetic at a single vertex") {
  auto sys = scalar_lti(0.5, 1.0, 1.0);
  std::vector<SymMatrix> pbar{SymMatrix::identity(1)};
  Matrix l = observer_gain_thm1(sys, pbar, simplex1());
  CHECK(l(0, 0) == doctest::Approx(-0.25));

  auto nosense = scalar_lti(0.5, 1.0, 0.0);
  Matrix l0 = observer_gain_thm1(nosense, pbar, simplex1());
  CHECK(l0(0, 0) == doctest::Approx(0.0));
}

TEST_CASE("lti observer gain and its Woodbury form") {
  Matrix a(1, 1), c(1, 1);
  a << 0.5;
  c << 1.0;
  auto [primary, alternate] = lti_observer_gain(a, c, SymMatrix::identity(1));
  CHECK(primary(0, 0) == doctest::Approx(-0.25));
  CHECK(alternate(0, 0) == doctest::Approx(-0.25));

  Matrix cz = Matrix::Zero(1, 1);
  auto [p0, a0] = lti_observer_gain(a, cz, SymMatrix::identity(1));
  CHECK(p0.cwiseAbs().maxCoeff() == doctest::Approx(0.0));
  CHECK(a0.cwiseAbs().maxCoeff() == doctest::Approx(0.0));
}

TEST_CASE("Woodbury forms agree on random well-conditioned instances") {
  Rng rng(71);
  for (int rep = 0; rep < 500; ++rep) {
    int nx = 2 + static_cast<int>(rng.bits() % 3);
    Matrix a = random_matrix(rng, nx, nx, 1.5);
    Matrix c = random_matrix(rng, 1, nx, 1.5);
    Matrix b = random_matrix(rng, nx, 1, 1.5);
    Matrix m = random_matrix(rng, nx, nx, 1.0);
    SymMatrix p(m * m.transpose() + 0.3 * Matrix::Identity(nx, nx));
    auto [l1, l2] = lti_observer_gain(a, c, p);
    CHECK((l1 - l2).cwiseAbs().maxCoeff() <= 1e-8 * (1 + l1.cwiseAbs().maxCoeff()));
    auto [k1, k2] = lti_controller_gain(a, b, p);
    CHECK((k1 - k2).cwiseAbs().maxCoeff() <= 1e-8 * (1 + k1.cwiseAbs().maxCoeff()));
  }
}

TEST_CASE("rem1 observer gain") {
  Matrix a2 = 0.5 * Matrix::Identity(2, 2);
  Matrix b2 = Matrix::Ones(2, 1);
  Matrix c2(1, 2);
  c2 << 1, 0;
  auto sys = PolytopicSystem::from_vertices({a2}, b2, c2);
  std::vector<Matrix> xs{2.0 * Matrix::Identity(2, 2)};
  Matrix y(2, 1);
  y << -0.5, 0.0;
  Matrix l = observer_gain_rem1(sys, xs, {y}, simplex1());
  CHECK(l(0, 0) == doctest::Approx(-0.25));
  CHECK(l(1, 0) == doctest::Approx(0.0));

  Matrix l0 = observer_gain_rem1(sys, xs, {Matrix::Zero(2, 1)}, simplex1());
  CHECK(l0.cwiseAbs().maxCoeff() == doctest::Approx(0.0));

  std::vector<Matrix> singular{Matrix::Zero(2, 2)};
  CHECK_THROWS_AS(observer_gain_rem1(sys, singular, {y}, simplex1()), std::runtime_error);
}

TEST_CASE("controller gain arithmetic") {
  auto sys = scalar_lti(2.0, 1.0, 1.0);
  std::vector<SymMatrix> sbar{SymMatrix(0.2 * Matrix::Identity(1, 1))};
  Matrix k = controller_gain_thm3(sys, sbar, simplex1(), simplex1());
  CHECK(k(0, 0) == doctest::Approx(-5.0 / 3.0));
  CHECK(2.0 + k(0, 0) == doctest::Approx(1.0 / 3.0));

  auto nob = scalar_lti(2.0, 0.0, 1.0);
  Matrix k0 = controller_gain_thm3(nob, sbar, simplex1(), simplex1());
  CHECK(k0.cwiseAbs().maxCoeff() == doctest::Approx(0.0));

  Matrix y(1, 1);
  y << -1.0 / 3.0;
  Matrix kt = controller_gain_t43(sys, {y}, sbar, simplex1());
  CHECK(kt(0, 0) == doctest::Approx(-5.0 / 3.0));
  Matrix kz = controller_gain_t43(sys, {Matrix::Zero(1, 1)}, sbar, simplex1());
  CHECK(kz(0, 0) == doctest::Approx(0.0));

  Matrix am(1, 1), bm(1, 1);
  am << 2.0;
  bm << 1.0;
  auto [k1, k2] = lti_controller_gain(am, bm, sbar[0]);
  CHECK(k1(0, 0) == doctest::Approx(-5.0 / 3.0));
  CHECK(k2(0, 0) == doctest::Approx(-5.0 / 3.0));
  auto [kb0, kb1] = lti_controller_gain(am, Matrix::Zero(1, 1), sbar[0]);
  CHECK(kb0.cwiseAbs().maxCoeff() == doctest::Approx(0.0));
  CHECK(kb1.cwiseAbs().maxCoeff() == doctest::Approx(0.0));
}

TEST_CASE("t44 gain reduces to the polytopic form when X_ij = I") {
  auto sys = case_study(0.5);
  const int n = sys.num_vertices();
  Rng rng(73);
  std::vector<Matrix> kbars;
  for (int i = 0; i < n; ++i) kbars.push_back(random_matrix(rng, 1, 4, 1.0));
  std::vector<std::vector<Matrix>> xijs(n), yijs(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      xijs[i].push_back(Matrix::Identity(4, 4));
      yijs[i].push_back(kbars[i]);
    }
  Vector pi = scal(0.2), pin = scal(-0.4);
  Matrix k = controller_gain_t44(sys, xijs, yijs, pi, pin);
  Vector w = sys.xi(pi);
  Matrix expect = Matrix::Zero(1, 4);
  for (int i = 0; i < n; ++i) expect += w(i) * kbars[i];
  CHECK((k - expect).cwiseAbs().maxCoeff() < 1e-12);

  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) yijs[i][j].setZero();
  Matrix k0 = controller_gain_t44(sys, xijs, yijs, pi, pin);
  CHECK(k0.cwiseAbs().maxCoeff() == doctest::Approx(0.0));
}

TEST_CASE("detectability certificate yields a sound observer gain") {
  auto sys = case_study(4.0);
  auto res = analyze_condition(ConditionId::det_thm1, sys, default_eps(ConditionId::det_thm1, sys));
  REQUIRE(res.outcome.status == FeasStatus::feasible);
  auto gain = gain_from_certificate(ConditionId::det_thm1, sys, res.matrices);

  // direct route: Q_ij = Sbar_j - (A_i + L_i C) Sbar_i (A_i + L_i C)^T > 0
  auto sbars = gain.sbars();
  for (int i = 0; i < sys.num_vertices(); ++i) {
    Matrix li = gain.vertex_gain(i);
    Matrix mi = sys.vertex(i) + li * sys.C();
    for (int j = 0; j < sys.num_vertices(); ++j) {
      Matrix q = sbars[j].mat() - mi * sbars[i].mat() * mi.transpose();
      CHECK(min_eigenvalue(SymMatrix(q)) > 0.0);
    }
  }
}

TEST_CASE("t43 certificate yields a sound state-feedback gain") {
  auto sys = case_study(1.0);
  auto res = analyze_condition(ConditionId::synth_t43, sys, default_eps(ConditionId::synth_t43, sys));
  REQUIRE(res.outcome.status == FeasStatus::feasible);
  auto gain = gain_from_certificate(ConditionId::synth_t43, sys, res.matrices);
  auto sbars = gain.sbars();
  const int nx = sys.nx();
  for (int i = 0; i < sys.num_vertices(); ++i) {
    Matrix mi = sys.vertex(i) + sys.B() * gain.vertex_gain(i);
    for (int j = 0; j < sys.num_vertices(); ++j) {
      Matrix blk(2 * nx, 2 * nx);
      blk.topLeftCorner(nx, nx) = sbars[i].mat();
      blk.topRightCorner(nx, nx) = (mi * sbars[i].mat()).transpose();
      blk.bottomLeftCorner(nx, nx) = mi * sbars[i].mat();
      blk.bottomRightCorner(nx, nx) = sbars[j].mat();
      CHECK(min_eigenvalue(SymMatrix(blk)) > 0.0);
    }
  }
}

TEST_CASE("closed-loop spectral radius drops for a random stabilizable pair") {
  Rng rng(79);
  int done = 0;
  while (done < 20) {
    int nx = 2 + static_cast<int>(rng.bits() % 3);
    Matrix a = random_matrix(rng, nx, nx, 1.2);
    Matrix b = random_matrix(rng, nx, 1, 1.0);
    auto sys = PolytopicSystem::from_vertices({a}, b, Matrix::Ones(1, nx));
    auto res = analyze_condition(ConditionId::lti_stab, sys, 1e-7);
    if (res.outcome.status != FeasStatus::feasible) continue;
    ++done;
    SymMatrix sbar(res.matrices.at("Sbar_1"));
    auto [k, k2] = lti_controller_gain(a, b, sbar);
    CHECK((k - k2).cwiseAbs().maxCoeff() <= 1e-8 * (1 + k.cwiseAbs().maxCoeff()));
    CHECK(spectral_radius(a + b * k) < 1.0);
  }
}

TEST_CASE("rescaling the strictness margin moves the gain but keeps it sound") {
  auto sys = case_study(4.0);
  auto r1 = analyze_condition(ConditionId::det_thm1, sys, 1e-6);
  auto r2 = analyze_condition(ConditionId::det_thm1, sys, 1e-5);
  REQUIRE(r1.outcome.status == FeasStatus::feasible);
  REQUIRE(r2.outcome.status == FeasStatus::feasible);
  for (const auto& res : {r1, r2}) {
    auto gain = gain_from_certificate(ConditionId::det_thm1, sys, res.matrices);
    auto sbars = gain.sbars();
    for (int i = 0; i < sys.num_vertices(); ++i) {
      Matrix mi = sys.vertex(i) + gain.vertex_gain(i) * sys.C();
      for (int j = 0; j < sys.num_vertices(); ++j) {
        Matrix q = sbars[j].mat() - mi * sbars[i].mat() * mi.transpose();
        CHECK(min_eigenvalue(SymMatrix(q)) > 0.0);
      }
    }
  }
}

TEST_CASE("gain schedule json round trip") {
  auto sys = case_study(1.0);
  auto res = analyze_condition(ConditionId::stab_thm3, sys, default_eps(ConditionId::stab_thm3, sys));
  REQUIRE(res.outcome.status == FeasStatus::feasible);
  auto gain = gain_from_certificate(ConditionId::stab_thm3, sys, res.matrices);
  CHECK(gain.needs_next_parameter());

  auto j = gain.to_json();
  auto back = GainSchedule::from_json(sys, j);
  Vector pi = scal(0.3), pin = scal(-0.6);
  CHECK((gain.gain(pi, &pin) - back.gain(pi, &pin)).cwiseAbs().maxCoeff() < 1e-12);
  CHECK_THROWS_AS(gain.gain(pi, nullptr), std::invalid_argument);
  CHECK_THROWS_AS(gain.vertex_gain(0), std::invalid_argument);
}
