#pragma once

#include <limits>
#include <memory>
#include <optional>
#include <string>

#include "lpvcert/lmi.hpp"

namespace lpvcert {

struct SolveOptions {
  int max_iterations = 500;   // total Newton steps
  double tol = 1e-9;          // relative accuracy target for the margin
  double eps_feas = 1e-7;     // margin threshold for a "feasible" verdict
  double trust_region = 1e6;  // ||x||_inf bound (cuts off homogeneous rays)
  // Stop early once the verified margin reaches this value (absolute).
  double margin_cap = std::numeric_limits<double>::infinity();
  // Same, relative to the problem data scale; keeps homogeneous problems
  // from climbing all the way to the trust-region corner.
  double margin_cap_rel = 100.0;
  // Accept a feasible point once its margin is within this fraction of the
  // certified optimum.
  double gap_rel = 0.25;
  // Optional per-variable scaling, indexed like CompiledFeasibility::vars().
  std::optional<std::vector<double>> var_scaling;
  bool verbose = false;
};

enum class FeasStatus { feasible, infeasible, inconclusive };

const char* to_string(FeasStatus s);

struct FeasibilityOutcome {
  FeasStatus status = FeasStatus::inconclusive;
  std::optional<Vector> assignment;  // present when feasible
  // Verified smallest block margin of the returned assignment when feasible;
  // the certified upper bound on the max margin when infeasible.
  double margin = 0.0;
  // Best certified upper bound on the achievable margin inside the trust
  // region (valid regardless of status).
  double upper_bound = std::numeric_limits<double>::infinity();
  int iterations = 0;
  std::string diagnostic;
};

/// Plug-in contract: a solver consumes a compiled problem and options and
/// produces an outcome; no other coupling.
class FeasibilitySolver {
 public:
  virtual ~FeasibilitySolver() = default;
  virtual FeasibilityOutcome solve(const CompiledFeasibility& problem, const SolveOptions& opts) = 0;
};

/// Reference implementation: barrier path-following on the t-augmented
/// program  max t  s.t.  F0 + sum_k x_k F_k - t I >= 0, |x_k| <= trust region,
/// tracking the implicit dual iterate Z ~ S^{-1} for certified upper bounds
/// on the achievable margin.
class InteriorPointSolver : public FeasibilitySolver {
 public:
  FeasibilityOutcome solve(const CompiledFeasibility& problem, const SolveOptions& opts) override;
};

FeasibilityOutcome solve_feasibility(const CompiledFeasibility& problem, const SolveOptions& opts = {});

/// Per-block smallest eigenvalues of F(x), evaluated directly with the
/// symmetric eigensolver; independent of any solver internals.
std::vector<double> verify_assignment(const CompiledFeasibility& problem, const Vector& x);

}  // namespace lpvcert
