#include "lpvcert/verify.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <nlohmann/json.hpp>

#include "lpvcert/json_io.hpp"
#include "lpvcert/rng.hpp"

namespace lpvcert {

std::vector<SymMatrix> LyapunovCertificate::pbars() const {
  if (is_p) return mats;
  std::vector<SymMatrix> out;
  for (const auto& m : mats) out.emplace_back(guarded_inverse(m.mat(), "certificate Sbar"));
  return out;
}

std::vector<SymMatrix> LyapunovCertificate::sbars() const {
  if (!is_p) return mats;
  std::vector<SymMatrix> out;
  for (const auto& m : mats) out.emplace_back(guarded_inverse(m.mat(), "certificate Pbar"));
  return out;
}

double VerificationReport::min_vertex_margin() const {
  double m = std::numeric_limits<double>::infinity();
  for (const auto& e : vertex_margins) m = std::min(m, e.margin);
  return m;
}

nlohmann::json VerificationReport::to_json() const {
  nlohmann::json j;
  j["schema_version"] = 1;
  nlohmann::json margins = nlohmann::json::array();
  for (const auto& e : vertex_margins)
    margins.push_back({{"i", e.i}, {"j", e.j}, {"label", e.label}, {"margin", e.margin}});
  j["vertex_margins"] = margins;
  j["grid_mode"] = grid_mode;
  if (mc_ran) {
    j["mc_worst_ratio"] = mc_worst_ratio;
    j["a3_used"] = a3_used;
    j["sequences_run"] = sequences_run;
    j["horizon"] = horizon;
    j["seed"] = seed;
  }
  j["pass"] = pass;
  return j;
}

namespace {

Matrix effective_vertex(const PolytopicSystem& sys, int i, SimMode mode, const GainSchedule* gain) {
  switch (mode) {
    case SimMode::open_loop:
      return sys.vertex(i);
    case SimMode::closed_loop:
      return sys.vertex(i) + sys.B() * gain->vertex_gain(i);
    case SimMode::error_system:
      return sys.vertex(i) + gain->vertex_gain(i) * sys.C();
  }
  throw std::logic_error("unreachable");
}

Matrix effective_map(const PolytopicSystem& sys, const Vector& pi, const Vector& pi_next,
                     SimMode mode, const GainSchedule* gain) {
  Matrix a = sys.evaluate_A(pi);
  switch (mode) {
    case SimMode::open_loop:
      return a;
    case SimMode::closed_loop:
      return a + sys.B() * gain->gain(pi, &pi_next);
    case SimMode::error_system:
      return a + gain->gain(pi, &pi_next) * sys.C();
  }
  throw std::logic_error("unreachable");
}

Matrix p_at(const PolytopicSystem& sys, const std::vector<SymMatrix>& pbars, const Vector& pi) {
  Vector w = sys.xi(pi);
  Matrix p = Matrix::Zero(sys.nx(), sys.nx());
  for (int i = 0; i < sys.num_vertices(); ++i) p += w(i) * pbars[i].mat();
  return p;
}

}  // namespace

VerificationReport check_vertex_certificate(const PolytopicSystem& sys,
                                            const LyapunovCertificate& cert, SimMode mode,
                                            const GainSchedule* gain,
                                            std::vector<std::pair<Vector, Vector>> grid) {
  if ((mode == SimMode::closed_loop || mode == SimMode::error_system) && !gain)
    throw std::invalid_argument("check_vertex_certificate: mode requires a gain");
  if (static_cast<int>(cert.mats.size()) != sys.num_vertices())
    throw std::invalid_argument("check_vertex_certificate: one matrix per vertex required");

  VerificationReport rep;
  const int nx = sys.nx();
  const bool preview = gain && gain->needs_next_parameter() && mode != SimMode::open_loop;

  if (!preview) {
    auto sbars = cert.sbars();
    for (int i = 0; i < sys.num_vertices(); ++i) {
      Matrix mi = effective_vertex(sys, i, mode, gain);
      for (int j = 0; j < sys.num_vertices(); ++j) {
        Matrix blk(2 * nx, 2 * nx);
        blk.topLeftCorner(nx, nx) = sbars[i].mat();
        blk.topRightCorner(nx, nx) = (mi * sbars[i].mat()).transpose();
        blk.bottomLeftCorner(nx, nx) = mi * sbars[i].mat();
        blk.bottomRightCorner(nx, nx) = sbars[j].mat();
        rep.vertex_margins.push_back(
            {i, j, "vertex[i=" + std::to_string(i + 1) + ",j=" + std::to_string(j + 1) + "]",
             min_eigenvalue(SymMatrix(blk))});
      }
    }
  } else {
    rep.grid_mode = true;
    if (grid.empty()) grid = scalar_parameter_grid(sys, 11);
    auto pbars = cert.pbars();
    int idx = 0;
    for (const auto& [pi, pin] : grid) {
      Matrix s_now = guarded_inverse(p_at(sys, pbars, pi), "P(pi)");
      Matrix s_next = guarded_inverse(p_at(sys, pbars, pin), "P(pi+)");
      Matrix m = effective_map(sys, pi, pin, mode, gain);
      Matrix blk(2 * nx, 2 * nx);
      blk.topLeftCorner(nx, nx) = s_now;
      blk.topRightCorner(nx, nx) = (m * s_now).transpose();
      blk.bottomLeftCorner(nx, nx) = m * s_now;
      blk.bottomRightCorner(nx, nx) = s_next;
      rep.vertex_margins.push_back(
          {idx, idx, "grid[" + std::to_string(idx) + "]", min_eigenvalue(SymMatrix(blk))});
      ++idx;
    }
  }
  rep.pass = rep.min_vertex_margin() > 0.0;
  return rep;
}

double worst_descent_ratio(const PolytopicSystem& sys, const std::vector<SymMatrix>& pbars,
                           SimMode mode, const GainSchedule* gain, const Vector& x0,
                           const ParameterSequence& params, double a3) {
  double worst = -std::numeric_limits<double>::infinity();
  Vector x = x0;
  const int steps = static_cast<int>(params.points.size()) - 1;
  for (int k = 0; k < steps; ++k) {
    const double norm = x.norm();
    if (norm < 1e-150) break;  // vacuous from here on
    x /= norm;  // the per-step ratio is homogeneous of degree zero in x
    const Vector& p = params.points[k];
    const Vector& pn = params.points[k + 1];
    Vector xn = step_dynamics(sys, x, p, &pn, gain, mode);
    const double v_now = x.dot(p_at(sys, pbars, p) * x);
    const double v_next = xn.dot(p_at(sys, pbars, pn) * xn);
    worst = std::max(worst, v_next - v_now + a3);
    x = xn;
  }
  return worst;
}

VerificationReport monte_carlo_descent(const PolytopicSystem& sys,
                                       const LyapunovCertificate& cert, SimMode mode,
                                       const GainSchedule* gain, int num_sequences, int horizon,
                                       uint64_t seed, std::optional<double> a3) {
  if (num_sequences < 1 || horizon < 1)
    throw std::invalid_argument("monte_carlo_descent: num_sequences and horizon must be >= 1");
  VerificationReport rep = check_vertex_certificate(sys, cert, mode, gain);
  rep.mc_ran = true;
  rep.sequences_run = num_sequences;
  rep.horizon = horizon;
  rep.seed = seed;
  rep.a3_used = a3 ? *a3 : 0.5 * std::max(0.0, rep.min_vertex_margin());

  auto pbars = cert.pbars();
  Rng rng(seed);
  double worst = -std::numeric_limits<double>::infinity();
  for (int s = 0; s < num_sequences; ++s) {
    ParameterSequence params = ParameterSequence::random(sys, horizon + 1, rng);
    Vector x0(sys.nx());
    for (int i = 0; i < sys.nx(); ++i) x0(i) = rng.gaussian();
    if (x0.norm() < 1e-12) x0.setOnes();
    x0.normalize();
    worst = std::max(worst, worst_descent_ratio(sys, pbars, mode, gain, x0, params, rep.a3_used));
  }
  rep.mc_worst_ratio = worst;
  rep.pass = rep.min_vertex_margin() > 0.0 && worst <= 0.0;
  return rep;
}

LtiGroundTruth lti_ground_truth(const Matrix& a, const Matrix& b, const Matrix& c) {
  if (a.rows() != a.cols()) throw std::invalid_argument("lti_ground_truth: A must be square");
  const Eigen::Index nx = a.rows();
  Eigen::EigenSolver<Matrix> es(a, /*computeEigenvectors=*/false);
  if (es.info() != Eigen::Success) throw std::runtime_error("lti_ground_truth: eigensolve failed");

  using CMatrix = Eigen::MatrixXcd;
  LtiGroundTruth out{true, true};
  for (Eigen::Index k = 0; k < nx; ++k) {
    const std::complex<double> lam = es.eigenvalues()(k);
    if (std::abs(lam) < 1.0) continue;
    CMatrix det_test(nx + c.rows(), nx);
    det_test.topRows(nx) = a.cast<std::complex<double>>() - lam * CMatrix::Identity(nx, nx);
    det_test.bottomRows(c.rows()) = c.cast<std::complex<double>>();
    Eigen::JacobiSVD<CMatrix> svd_det(det_test);
    if (svd_det.singularValues()(nx - 1) <=
        1e-9 * std::max(1.0, svd_det.singularValues()(0)))
      out.detectable = false;

    CMatrix stab_test(nx, nx + b.cols());
    stab_test.leftCols(nx) = a.cast<std::complex<double>>() - lam * CMatrix::Identity(nx, nx);
    stab_test.rightCols(b.cols()) = b.cast<std::complex<double>>();
    Eigen::JacobiSVD<CMatrix> svd_stab(stab_test);
    if (svd_stab.singularValues()(nx - 1) <=
        1e-9 * std::max(1.0, svd_stab.singularValues()(0)))
      out.stabilizable = false;
  }
  return out;
}

}  // namespace lpvcert
