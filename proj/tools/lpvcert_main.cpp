#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <nlohmann/json.hpp>

#include "lpvcert/driver.hpp"
#include "lpvcert/gains.hpp"
#include "lpvcert/json_io.hpp"

using namespace lpvcert;
using nlohmann::json;

namespace {

constexpr int kExitFeasible = 0;
constexpr int kExitInfeasible = 1;
constexpr int kExitInconclusive = 2;
constexpr int kExitUsage = 3;

int status_code(FeasStatus s) {
  switch (s) {
    case FeasStatus::feasible: return kExitFeasible;
    case FeasStatus::infeasible: return kExitInfeasible;
    case FeasStatus::inconclusive: return kExitInconclusive;
  }
  return kExitUsage;
}

PolytopicSystem load_system(const std::string& path, double gamma) {
  PolytopicSystem sys = PolytopicSystem::load(path);
  if (gamma > 0) return sys.with_gamma(gamma);
  return sys;
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  json j;
  in >> j;
  return j;
}

SimMode mode_for(ConditionId cond) {
  switch (cond) {
    case ConditionId::det_thm1:
    case ConditionId::det_rem1:
    case ConditionId::lti_det:
      return SimMode::error_system;
    case ConditionId::stab_thm3:
    case ConditionId::synth_t43:
    case ConditionId::synth_t44:
    case ConditionId::lti_stab:
      return SimMode::closed_loop;
    default:
      return SimMode::open_loop;
  }
}

LyapunovCertificate lyapunov_from(const std::map<std::string, Matrix>& mats, int num_vertices) {
  std::vector<SymMatrix> out;
  const bool has_p = mats.count("Pbar_1") > 0;
  const std::string base = has_p ? "Pbar_" : "Sbar_";
  for (int i = 0; i < num_vertices; ++i) {
    auto it = mats.find(base + std::to_string(i + 1));
    if (it == mats.end())
      throw std::runtime_error("certificate is missing " + base + std::to_string(i + 1));
    out.emplace_back(it->second);
  }
  return has_p ? LyapunovCertificate::from_p(out) : LyapunovCertificate::from_s(out);
}

int run_analyze(const std::string& system_file, const std::string& condition, double gamma,
                double eps, int grid_points) {
  PolytopicSystem sys = load_system(system_file, gamma);
  ConditionId cond = condition_from_string(condition);

  if (cond == ConditionId::thm2_sampled) {
    auto inner = analyze_condition(ConditionId::stab_thm3, sys,
                                   eps > 0 ? eps : default_eps(ConditionId::stab_thm3, sys));
    json j;
    j["schema_version"] = 1;
    j["condition"] = "thm2_sampled";
    if (auto g = sys.gamma()) j["gamma"] = *g;
    if (inner.outcome.status != FeasStatus::feasible) {
      j["verdict"] = "inconclusive";
      j["diagnostic"] = std::string("stab_thm3 solve was ") + to_string(inner.outcome.status);
      std::cout << j.dump(2) << "\n";
      return kExitInconclusive;
    }
    std::vector<SymMatrix> pbars;
    for (int i = 0; i < sys.num_vertices(); ++i)
      pbars.emplace_back(
          guarded_inverse(inner.matrices.at("Sbar_" + std::to_string(i + 1)), "Sbar"));
    auto rep = check_thm2_sampled(sys, pbars, scalar_parameter_grid(sys, grid_points));
    j["verdict"] = rep.min_margin > 0 ? "pass" : "fail";
    j["min_margin"] = rep.min_margin;
    j["grid_points"] = rep.entries.size();
    std::cout << j.dump(2) << "\n";
    return rep.min_margin > 0 ? kExitFeasible : kExitInfeasible;
  }

  auto res = analyze_condition(cond, sys, eps > 0 ? eps : default_eps(cond, sys));
  std::cout << certificate_to_json(res, sys).dump(2) << "\n";
  return status_code(res.outcome.status);
}

int run_bisect(const std::string& system_file, const std::string& condition, double lo, double hi,
               double tol) {
  PolytopicSystem sys = PolytopicSystem::load(system_file);
  auto res = bisect_gamma(condition_from_string(condition), sys, lo, hi, tol);
  std::cout << res.to_json().dump(2) << "\n";
  return kExitFeasible;
}

int run_gains(const std::string& system_file, const std::string& condition, double gamma,
              const std::string& out_file, double eps) {
  PolytopicSystem sys = load_system(system_file, gamma);
  ConditionId cond = condition_from_string(condition);
  auto res = analyze_condition(cond, sys, eps > 0 ? eps : default_eps(cond, sys));
  if (res.outcome.status != FeasStatus::feasible) {
    std::cerr << "condition " << condition << " is " << to_string(res.outcome.status)
              << " at gamma " << gamma << "; no gain to construct\n";
    return status_code(res.outcome.status);
  }
  auto gain = gain_from_certificate(cond, sys, res.matrices);
  std::ofstream out(out_file);
  if (!out) throw std::runtime_error("cannot write " + out_file);
  out << gain.to_json().dump(2) << "\n";
  std::cout << "wrote " << out_file << " (recipe " << to_string(gain.recipe()) << ", margin "
            << res.outcome.margin << ")\n";
  return kExitFeasible;
}

int run_verify(const std::string& system_file, const std::string& cert_file,
               const std::string& gain_file, int samples, int horizon, uint64_t seed, double a3,
               bool has_a3, int grid_points) {
  auto cert_json = read_json_file(cert_file);
  auto cert = certificate_from_json(cert_json);
  PolytopicSystem sys = load_system(system_file, cert.gamma.value_or(0.0));

  LyapunovCertificate lyap = lyapunov_from(cert.matrices, sys.num_vertices());
  SimMode mode = mode_for(cert.condition);

  std::optional<GainSchedule> gain;
  if (!gain_file.empty()) {
    gain = GainSchedule::from_json(sys, read_json_file(gain_file));
  } else if (mode != SimMode::open_loop) {
    gain = gain_from_certificate(cert.condition, sys, cert.matrices);
  }

  std::vector<std::pair<Vector, Vector>> grid;
  if (gain && gain->needs_next_parameter() && sys.param_dim() == 1)
    grid = scalar_parameter_grid(sys, grid_points);

  auto vrep = check_vertex_certificate(sys, lyap, mode, gain ? &*gain : nullptr, grid);
  auto rep = monte_carlo_descent(sys, lyap, mode, gain ? &*gain : nullptr, samples, horizon, seed,
                                 has_a3 ? std::optional<double>(a3) : std::nullopt);
  // keep the (possibly denser) explicit-grid vertex margins in the report
  rep.vertex_margins = vrep.vertex_margins;
  rep.grid_mode = vrep.grid_mode;
  rep.pass = vrep.pass && rep.mc_worst_ratio <= 0.0;
  std::cout << rep.to_json().dump(2) << "\n";
  return rep.pass ? kExitFeasible : kExitInfeasible;
}

int run_report(const std::string& config_file, const std::string& out_dir) {
  auto config = read_json_file(config_file);
  std::filesystem::path base = std::filesystem::path(config_file).parent_path();
  lpvcert::run_report(config, base.string(), out_dir);
  std::cout << "report written to " << out_dir << "\n";
  return kExitFeasible;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"certification toolkit for discrete-time polytopic LPV systems"};
  app.require_subcommand(1);

  std::string system_file, condition, out_file, cert_file, gain_file, config_file, out_dir;
  double gamma = -1.0, eps = -1.0, lo = 0.0, hi = 0.0, tol = 1e-3, a3 = 0.0;
  int samples = 1000, horizon = 50, grid_points = 11;
  uint64_t seed = 42;

  auto* analyze = app.add_subcommand("analyze", "decide one condition at a fixed radius");
  analyze->add_option("--system", system_file, "system JSON file")->required();
  analyze->add_option("--condition", condition, "condition id")->required();
  analyze->add_option("--gamma", gamma, "parameter radius (affine families)");
  analyze->add_option("--eps", eps, "strictness shift");
  analyze->add_option("--grid-points", grid_points, "grid density for thm2_sampled");

  auto* bisect = app.add_subcommand("bisect", "largest feasible radius by bisection");
  bisect->add_option("--system", system_file)->required();
  bisect->add_option("--condition", condition)->required();
  bisect->add_option("--lo", lo)->required();
  bisect->add_option("--hi", hi)->required();
  bisect->add_option("--tol", tol);

  auto* gains = app.add_subcommand("gains", "solve and export a gain schedule");
  gains->add_option("--system", system_file)->required();
  gains->add_option("--condition", condition)->required();
  gains->add_option("--gamma", gamma)->required();
  gains->add_option("--out", out_file)->required();
  gains->add_option("--eps", eps);

  auto* verify = app.add_subcommand("verify", "verify a certificate file");
  verify->add_option("--system", system_file)->required();
  verify->add_option("--cert", cert_file)->required();
  verify->add_option("--gain", gain_file);
  verify->add_option("--samples", samples);
  verify->add_option("--horizon", horizon);
  verify->add_option("--seed", seed);
  auto* a3_opt = verify->add_option("--a3", a3, "descent offset (default: half vertex margin)");
  verify->add_option("--grid-points", grid_points);

  auto* report = app.add_subcommand("report", "run a batch config and emit tables");
  report->add_option("--config", config_file)->required();
  report->add_option("--out-dir", out_dir)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (analyze->parsed()) return run_analyze(system_file, condition, gamma, eps, grid_points);
    if (bisect->parsed()) return run_bisect(system_file, condition, lo, hi, tol);
    if (gains->parsed()) return run_gains(system_file, condition, gamma, out_file, eps);
    if (verify->parsed())
      return run_verify(system_file, cert_file, gain_file, samples, horizon, seed, a3,
                        a3_opt->count() > 0, grid_points);
    if (report->parsed()) return run_report(config_file, out_dir);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}
