#include <doctest.h>

#include <nlohmann/json.hpp>

#include "lpvcert/verify.hpp"
#include "test_util.hpp"

using namespace lpvcert;
using namespace lpvcert::testutil;

namespace {

LyapunovCertificate cert_from(const AnalysisResult& res, const PolytopicSystem& sys) {
  std::vector<SymMatrix> mats;
  const bool has_p = res.matrices.count("Pbar_1") > 0;
  for (int i = 0; i < sys.num_vertices(); ++i) {
    const std::string base = has_p ? "Pbar_" : "Sbar_";
    mats.emplace_back(res.matrices.at(base + std::to_string(i + 1)));
  }
  return has_p ? LyapunovCertificate::from_p(mats) : LyapunovCertificate::from_s(mats);
}

}  // namespace

TEST_CASE("open-loop vertex certificate from a poly-QS solve") {
  auto sys = case_study(0.5);
  auto res = analyze_condition(ConditionId::polyqs_l14, sys, 1e-7);
  REQUIRE(res.outcome.status == FeasStatus::feasible);
  auto cert = cert_from(res, sys);
  auto rep = check_vertex_certificate(sys, cert, SimMode::open_loop);
  CHECK(rep.pass);
  CHECK(rep.vertex_margins.size() == 4);
  CHECK(rep.min_vertex_margin() > 0.0);

  // negated certificate fails
  std::vector<SymMatrix> neg;
  for (const auto& m : cert.mats) neg.emplace_back(-m.mat());
  auto bad = check_vertex_certificate(sys, LyapunovCertificate::from_s(neg), SimMode::open_loop);
  CHECK_FALSE(bad.pass);
}

TEST_CASE("scalar LTI observer verification arithmetic") {
  Matrix a(1, 1), b(1, 1), c(1, 1);
  a << 0.5;
  b << 1.0;
  c << 1.0;
  auto sys = PolytopicSystem::from_vertices({a}, b, c);
  auto gain = GainSchedule::lti_observer(sys, SymMatrix::identity(1));
  CHECK(gain.vertex_gain(0)(0, 0) == doctest::Approx(-0.25));
  // closed map 0.5 - 0.25 = 0.25; P - M^T P M = 1 - 0.0625 = 0.9375 > 0
  Matrix m = a + gain.vertex_gain(0) * c;
  CHECK(m(0, 0) == doctest::Approx(0.25));
  CHECK(1.0 - m(0, 0) * m(0, 0) == doctest::Approx(0.9375));
  auto rep = check_vertex_certificate(sys, LyapunovCertificate::from_p({SymMatrix::identity(1)}),
                                      SimMode::error_system, &gain);
  CHECK(rep.pass);
}

TEST_CASE("descent ratio for a stable scalar LTI") {
  Matrix a(1, 1), b(1, 1), c(1, 1);
  a << 0.5;
  b << 0.0;
  c << 1.0;
  auto sys = PolytopicSystem::from_vertices({a}, b, c);
  std::vector<SymMatrix> pbar{SymMatrix::identity(1)};
  Vector x0 = Vector::Ones(1);
  auto params = ParameterSequence::constant(Vector::Ones(1), 11);
  double worst = worst_descent_ratio(sys, pbar, SimMode::open_loop, nullptr, x0, params, 0.0);
  CHECK(worst == doctest::Approx(-0.75));

  // zero start: vacuous
  double vac = worst_descent_ratio(sys, pbar, SimMode::open_loop, nullptr, Vector::Zero(1), params, 0.0);
  CHECK(vac <= 0.0);
}

TEST_CASE("monte carlo descent for the case-study closed loop") {
  auto sys = case_study(1.0);
  auto res = analyze_condition(ConditionId::stab_thm3, sys, default_eps(ConditionId::stab_thm3, sys));
  REQUIRE(res.outcome.status == FeasStatus::feasible);
  auto gain = gain_from_certificate(ConditionId::stab_thm3, sys, res.matrices);
  auto cert = cert_from(res, sys);
  auto rep = monte_carlo_descent(sys, cert, SimMode::closed_loop, &gain, 200, 50, 42, 0.0);
  CHECK(rep.mc_ran);
  CHECK(rep.grid_mode);  // thm3 previews the next parameter
  CHECK(rep.pass);
  CHECK(rep.mc_worst_ratio <= 0.0);

  // determinism
  auto rep2 = monte_carlo_descent(sys, cert, SimMode::closed_loop, &gain, 200, 50, 42, 0.0);
  CHECK(rep.mc_worst_ratio == rep2.mc_worst_ratio);
  CHECK(rep.to_json().dump() == rep2.to_json().dump());
}

TEST_CASE("monte carlo default a3 is half the vertex margin") {
  auto sys = case_study(0.5);
  auto res = analyze_condition(ConditionId::polyqs_l14, sys, 1e-7);
  REQUIRE(res.outcome.status == FeasStatus::feasible);
  auto cert = cert_from(res, sys);
  auto rep = monte_carlo_descent(sys, cert, SimMode::open_loop, nullptr, 50, 20, 7);
  CHECK(rep.a3_used == doctest::Approx(0.5 * rep.min_vertex_margin()));
}

TEST_CASE("lti ground truth basics") {
  Matrix a(1, 1), b(1, 1), c0(1, 1);
  a << 0.5;
  b << 1.0;
  c0 << 0.0;
  auto gt = lti_ground_truth(a, b, c0);
  CHECK(gt.detectable);  // already stable

  a << 2.0;
  auto gt2 = lti_ground_truth(a, b, c0);
  CHECK_FALSE(gt2.detectable);

  Matrix ad = Matrix::Zero(2, 2);
  ad(0, 0) = 2.0;
  ad(1, 1) = 0.5;
  Matrix bd(2, 1);
  bd << 1, 0;
  auto gt3 = lti_ground_truth(ad, bd, Matrix::Zero(1, 2));
  CHECK(gt3.stabilizable);
  Matrix bd2(2, 1);
  bd2 << 0, 1;
  auto gt4 = lti_ground_truth(ad, bd2, Matrix::Zero(1, 2));
  CHECK_FALSE(gt4.stabilizable);
}

TEST_CASE("solver verdicts match the eigenstructure oracle on random systems") {
  Rng rng(83);
  int done = 0;
  while (done < 60) {
    int nx = 1 + static_cast<int>(rng.bits() % 4);
    Matrix a = random_matrix(rng, nx, nx, 1.2);
    Matrix b = random_matrix(rng, nx, 1, 1.0);
    Matrix c = random_matrix(rng, 1, nx, 1.0);
    if (std::abs(spectral_radius(a) - 1.0) < 1e-3) continue;
    ++done;
    auto sys = PolytopicSystem::from_vertices({a}, b, c);
    auto gt = lti_ground_truth(a, b, c);
    auto det = analyze_condition(ConditionId::lti_det, sys, 1e-7);
    auto stab = analyze_condition(ConditionId::lti_stab, sys, 1e-7);
    CAPTURE(done);
    CHECK(det.outcome.status == (gt.detectable ? FeasStatus::feasible : FeasStatus::infeasible));
    CHECK(stab.outcome.status ==
          (gt.stabilizable ? FeasStatus::feasible : FeasStatus::infeasible));
  }
}

TEST_CASE("descent never fails for certificates with healthy vertex margins") {
  Rng rng(89);
  int done = 0;
  while (done < 10) {
    auto sys = random_affine_system(rng, 2).with_gamma(0.3);
    auto res = analyze_condition(ConditionId::polyqs_l14, sys, 1e-7);
    if (res.outcome.status != FeasStatus::feasible) continue;
    auto cert = cert_from(res, sys);
    auto vrep = check_vertex_certificate(sys, cert, SimMode::open_loop);
    if (vrep.min_vertex_margin() <= 1e-6) continue;
    ++done;
    auto rep = monte_carlo_descent(sys, cert, SimMode::open_loop, nullptr, 100, 30, 101 + done, 0.0);
    CHECK(rep.pass);
  }
}
