#pragma once

#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "lpvcert/conditions.hpp"
#include "lpvcert/verify.hpp"

namespace lpvcert {

struct BisectionEvaluation {
  double gamma = 0.0;
  FeasStatus verdict = FeasStatus::inconclusive;
  double margin = 0.0;
  double wall_seconds = 0.0;
};

struct BisectionResult {
  ConditionId condition = ConditionId::polyqs_l14;
  double gamma_star = 0.0;
  double lo = 0.0;
  double hi = 0.0;
  std::vector<BisectionEvaluation> evaluations;

  nlohmann::json to_json() const;
};

/// Bisection for the largest radius at which the condition stays feasible.
/// Inconclusive solves count as infeasible (the result is a safe lower
/// bound). Five equispaced radii are evaluated first; a feasible verdict
/// above an infeasible one aborts with an error, as does an invalid bracket.
BisectionResult bisect_gamma(ConditionId cond, const PolytopicSystem& family, double lo, double hi,
                             double tol, const SolveOptions& opts = {});

/// Certificate wire format shared by the CLI and the report generator.
nlohmann::json certificate_to_json(const AnalysisResult& res, const PolytopicSystem& sys);

struct LoadedCertificate {
  ConditionId condition;
  double eps = 0.0;
  std::optional<double> gamma;
  std::map<std::string, Matrix> matrices;
};
LoadedCertificate certificate_from_json(const nlohmann::json& j);

struct ReportResult {
  struct BisectionRow {
    std::string system;
    BisectionResult result;
  };
  struct CountRow {
    ConditionId condition;
    int num_vertices, nx, nu, ny;
    long count;
  };
  struct TimingRow {
    ConditionId condition;
    std::vector<double> runs_seconds;
    double median_seconds = 0.0;
  };
  std::vector<BisectionRow> bisections;
  std::vector<CountRow> counts;
  std::vector<TimingRow> timing;
};

/// Run every job in the config and write gamma_star.{csv,md},
/// decision_vars.csv, timing.csv, and timing_orderings.csv to out_dir.
/// Paths in the config are resolved relative to base_dir.
ReportResult run_report(const nlohmann::json& config, const std::string& base_dir,
                        const std::string& out_dir);

}  // namespace lpvcert
