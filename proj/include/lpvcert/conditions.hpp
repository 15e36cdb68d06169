#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "lpvcert/lmi.hpp"
#include "lpvcert/lpv.hpp"
#include "lpvcert/sdpfeas.hpp"

namespace lpvcert {

/// Analysis and synthesis conditions. The polyqs_* entries are the three
/// equivalent poly-quadratic stability tests (slack in the S form, slack in
/// the P form, slack-free); det_* decide poly-quadratic detectability,
/// stab_* poly-quadratic stabilizability, synth_* carry explicit controller
/// variables, and lti_* are the single-vertex Lyapunov tests.
enum class ConditionId {
  polyqs_l12,
  polyqs_l13,
  polyqs_l14,
  det_thm1,
  det_rem1,
  stab_nec,
  stab_thm3,
  synth_t43,
  synth_t44,
  synth_daafouz,
  lti_det,
  lti_stab,
  thm2_sampled,
};

const char* to_string(ConditionId c);
ConditionId condition_from_string(const std::string& s);
/// Every condition that builds an LMI (thm2_sampled is a sampled check).
std::vector<ConditionId> lmi_conditions();

/// Assemble the vertex LMIs of the condition for the given system, each
/// block shifted by eps to realize strict inequalities.
LmiProblem build_condition(ConditionId cond, const PolytopicSystem& sys, double eps);

/// Closed-form scalar decision-variable count of the condition.
long count_decision_vars(ConditionId cond, int num_vertices, int nx, int nu, int ny);

/// 1e-6 relative to the largest constant entry appearing in the condition.
double default_eps(ConditionId cond, const PolytopicSystem& sys);

struct AnalysisResult {
  ConditionId condition;
  double eps = 0.0;
  long num_scalars = 0;
  FeasibilityOutcome outcome;
  std::map<std::string, Matrix> matrices;  // certificate matrices when feasible
  std::vector<std::pair<std::string, double>> block_margins;
};

/// Build, compile, solve, and (when feasible) re-verify and extract the
/// certificate matrices by label.
AnalysisResult analyze_condition(ConditionId cond, const PolytopicSystem& sys, double eps,
                                 const SolveOptions& opts = {});

/// Sampled evaluation of the parameter-dependent stabilizability condition
/// S(pi+) - A(pi) S(pi) A(pi)^T + B B^T > 0 with S(pi) the inverse of
/// P(pi) = sum_i xi_i(pi) Pbar_i. A negative margin refutes the candidate;
/// positive margins on a grid are evidence, not proof.
struct Thm2Report {
  struct Entry {
    Vector pi;
    Vector pi_next;
    double margin;
  };
  std::vector<Entry> entries;
  double min_margin = 0.0;
};
Thm2Report check_thm2_sampled(const PolytopicSystem& sys, const std::vector<SymMatrix>& pbars,
                              const std::vector<std::pair<Vector, Vector>>& grid);

/// Uniform (pi, pi+) grid over a scalar-parameter family's interval.
std::vector<std::pair<Vector, Vector>> scalar_parameter_grid(const PolytopicSystem& sys,
                                                             int points_per_axis);

}  // namespace lpvcert
