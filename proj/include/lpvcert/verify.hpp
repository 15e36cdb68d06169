#pragma once

#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "lpvcert/gains.hpp"
#include "lpvcert/lpv.hpp"

namespace lpvcert {

/// Vertex Lyapunov matrices of a certificate, stored in either the P or the
/// S convention and convertible between them.
struct LyapunovCertificate {
  std::vector<SymMatrix> mats;
  bool is_p = true;

  static LyapunovCertificate from_p(std::vector<SymMatrix> pbars) { return {std::move(pbars), true}; }
  static LyapunovCertificate from_s(std::vector<SymMatrix> sbars) { return {std::move(sbars), false}; }

  std::vector<SymMatrix> pbars() const;
  std::vector<SymMatrix> sbars() const;
};

struct VertexMarginEntry {
  int i = 0;
  int j = 0;
  std::string label;
  double margin = 0.0;
};

struct VerificationReport {
  std::vector<VertexMarginEntry> vertex_margins;
  bool grid_mode = false;
  bool mc_ran = false;
  double mc_worst_ratio = 0.0;
  double a3_used = 0.0;
  int sequences_run = 0;
  int horizon = 0;
  uint64_t seed = 0;
  bool pass = false;

  double min_vertex_margin() const;
  nlohmann::json to_json() const;
};

/// Certificate check by direct eigenvalue evaluation, never consulting the
/// solver: blocks [[S_i, *],[M_i S_i, S_j]] over all vertex pairs with M_i
/// the effective vertex matrix of the selected dynamics. Gains that preview
/// the next parameter are checked on a (pi, pi+) grid instead, with
/// S(pi) = P(pi)^{-1}; the report is then labelled grid mode.
VerificationReport check_vertex_certificate(const PolytopicSystem& sys,
                                            const LyapunovCertificate& cert, SimMode mode,
                                            const GainSchedule* gain = nullptr,
                                            std::vector<std::pair<Vector, Vector>> grid = {});

/// Monte-Carlo descent of V(pi, x) = x^T P(pi) x along simulated runs of the
/// selected dynamics: parameters drawn uniformly from the parameter set,
/// initial states uniform on the unit sphere, worst observed
/// (V(pi+, x+) - V(pi, x) + a3 ||x||^2) / ||x||^2 reported (pass iff <= 0 and
/// the vertex check passes). Without an explicit a3, half the smallest
/// vertex margin is used.
VerificationReport monte_carlo_descent(const PolytopicSystem& sys,
                                       const LyapunovCertificate& cert, SimMode mode,
                                       const GainSchedule* gain, int num_sequences, int horizon,
                                       uint64_t seed, std::optional<double> a3 = std::nullopt);

/// Single-trajectory descent ratios for a given start and parameter run;
/// used by the Monte-Carlo driver and directly testable.
double worst_descent_ratio(const PolytopicSystem& sys, const std::vector<SymMatrix>& pbars,
                           SimMode mode, const GainSchedule* gain, const Vector& x0,
                           const ParameterSequence& params, double a3);

struct LtiGroundTruth {
  bool detectable = false;
  bool stabilizable = false;
};

/// Eigenstructure (PBH) test: detectable iff rank [A - lambda I; C] = n_x for
/// every eigenvalue with |lambda| >= 1; stabilizable with [A - lambda I, B].
LtiGroundTruth lti_ground_truth(const Matrix& a, const Matrix& b, const Matrix& c);

}  // namespace lpvcert
