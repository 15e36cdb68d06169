#include "lpvcert/driver.hpp"

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <nlohmann/json.hpp>

#include "lpvcert/json_io.hpp"

namespace lpvcert {

namespace {

using nlohmann::json;

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

BisectionEvaluation evaluate_at(ConditionId cond, const PolytopicSystem& family, double gamma,
                                double eps, const SolveOptions& opts) {
  BisectionEvaluation ev;
  ev.gamma = gamma;
  const auto t0 = std::chrono::steady_clock::now();
  auto res = analyze_condition(cond, family.with_gamma(gamma), eps, opts);
  ev.wall_seconds = seconds_since(t0);
  ev.verdict = res.outcome.status;
  ev.margin = res.outcome.margin;
  return ev;
}

bool feasible(const BisectionEvaluation& ev) { return ev.verdict == FeasStatus::feasible; }

}  // namespace

nlohmann::json BisectionResult::to_json() const {
  json j;
  j["schema_version"] = 1;
  j["condition"] = to_string(condition);
  j["gamma_star"] = gamma_star;
  j["bracket"] = {lo, hi};
  json evs = json::array();
  for (const auto& e : evaluations)
    evs.push_back({{"gamma", e.gamma},
                   {"verdict", to_string(e.verdict)},
                   {"margin", e.margin},
                   {"wall_seconds", e.wall_seconds}});
  j["evaluations"] = evs;
  return j;
}

BisectionResult bisect_gamma(ConditionId cond, const PolytopicSystem& family, double lo, double hi,
                             double tol, const SolveOptions& opts) {
  if (!(0 < lo && lo < hi)) throw std::invalid_argument("bisect_gamma: need 0 < lo < hi");
  if (!(tol > 0)) throw std::invalid_argument("bisect_gamma: tol must be > 0");
  const double eps = default_eps(cond, family);

  BisectionResult res;
  res.condition = cond;

  // monotonicity spot check on five equispaced radii, endpoints included
  std::vector<BisectionEvaluation> spots;
  for (int k = 0; k < 5; ++k) {
    double g = lo + (hi - lo) * k / 4.0;
    spots.push_back(evaluate_at(cond, family, g, eps, opts));
    res.evaluations.push_back(spots.back());
  }
  if (!feasible(spots.front())) throw std::runtime_error("bisect_gamma: bracket invalid, infeasible at lo");
  if (feasible(spots.back()))
    throw std::runtime_error("bisect_gamma: bracket invalid, still feasible at hi");
  bool seen_infeasible = false;
  for (const auto& s : spots) {
    if (!feasible(s)) seen_infeasible = true;
    else if (seen_infeasible)
      throw std::runtime_error("bisect_gamma: non-monotone feasibility across the bracket");
  }
  for (const auto& s : spots) {
    if (feasible(s)) lo = std::max(lo, s.gamma);
    else hi = std::min(hi, s.gamma);
  }

  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    auto ev = evaluate_at(cond, family, mid, eps, opts);
    res.evaluations.push_back(ev);
    if (feasible(ev)) lo = mid;
    else hi = mid;
  }
  res.gamma_star = lo;
  res.lo = lo;
  res.hi = hi;
  return res;
}

nlohmann::json certificate_to_json(const AnalysisResult& res, const PolytopicSystem& sys) {
  json j;
  j["schema_version"] = 1;
  j["condition"] = to_string(res.condition);
  j["eps"] = res.eps;
  if (auto g = sys.gamma()) j["gamma"] = *g;
  j["verdict"] = to_string(res.outcome.status);
  j["margin"] = res.outcome.margin;
  if (std::isfinite(res.outcome.upper_bound)) j["margin_upper_bound"] = res.outcome.upper_bound;
  j["iterations"] = res.outcome.iterations;
  j["diagnostic"] = res.outcome.diagnostic;
  j["num_scalars"] = res.num_scalars;
  json mats;
  for (const auto& [label, m] : res.matrices) mats[label] = mat_to_json(m);
  j["matrices"] = mats;
  json margins = json::array();
  for (const auto& [label, m] : res.block_margins)
    margins.push_back({{"label", label}, {"margin", m}});
  j["block_margins"] = margins;
  return j;
}

LoadedCertificate certificate_from_json(const nlohmann::json& j) {
  LoadedCertificate c;
  c.condition = condition_from_string(j.at("condition").get<std::string>());
  c.eps = j.value("eps", 0.0);
  if (j.contains("gamma")) c.gamma = j.at("gamma").get<double>();
  if (j.contains("matrices"))
    for (auto it = j.at("matrices").begin(); it != j.at("matrices").end(); ++it)
      c.matrices.emplace(it.key(), mat_from_json(it.value()));
  return c;
}

namespace {

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << content;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

ReportResult run_report(const nlohmann::json& config, const std::string& base_dir,
                        const std::string& out_dir) {
  namespace fs = std::filesystem;
  ReportResult result;
  fs::create_directories(out_dir);

  std::map<std::string, PolytopicSystem> systems;
  for (const auto& s : config.at("systems")) {
    const std::string name = s.at("name").get<std::string>();
    fs::path file = s.at("file").get<std::string>();
    if (file.is_relative()) file = fs::path(base_dir) / file;
    systems.emplace(name, PolytopicSystem::load(file.string()));
  }

  SolveOptions opts;
  if (config.contains("solver")) {
    const auto& sj = config.at("solver");
    opts.max_iterations = sj.value("max_iterations", opts.max_iterations);
    opts.eps_feas = sj.value("eps_feas", opts.eps_feas);
    opts.tol = sj.value("tol", opts.tol);
  }

  if (config.contains("bisections")) {
    for (const auto& bj : config.at("bisections")) {
      const std::string sysname = bj.at("system").get<std::string>();
      auto it = systems.find(sysname);
      if (it == systems.end()) throw std::invalid_argument("unknown system in config: " + sysname);
      auto cond = condition_from_string(bj.at("condition").get<std::string>());
      auto res = bisect_gamma(cond, it->second, bj.at("lo").get<double>(),
                              bj.at("hi").get<double>(), bj.value("tol", 1e-3), opts);
      result.bisections.push_back({sysname, std::move(res)});
    }
  }

  if (config.contains("counts")) {
    for (const auto& cj : config.at("counts")) {
      ReportResult::CountRow row;
      row.condition = condition_from_string(cj.at("condition").get<std::string>());
      row.num_vertices = cj.at("N").get<int>();
      row.nx = cj.at("n_x").get<int>();
      row.nu = cj.at("n_u").get<int>();
      row.ny = cj.at("n_y").get<int>();
      row.count = count_decision_vars(row.condition, row.num_vertices, row.nx, row.nu, row.ny);
      result.counts.push_back(row);
    }
  }

  if (config.contains("timing")) {
    const auto& tj = config.at("timing");
    const std::string sysname = tj.at("system").get<std::string>();
    auto it = systems.find(sysname);
    if (it == systems.end()) throw std::invalid_argument("unknown system in config: " + sysname);
    const double gamma = tj.at("gamma").get<double>();
    const int reps = tj.value("repetitions", 5);
    SolveOptions topts = opts;
    if (tj.contains("margin_cap")) topts.margin_cap = tj.at("margin_cap").get<double>();
    PolytopicSystem at = it->second.with_gamma(gamma);
    for (const auto& cj : tj.at("conditions")) {
      ReportResult::TimingRow row;
      row.condition = condition_from_string(cj.get<std::string>());
      const double eps = default_eps(row.condition, at);
      for (int r = 0; r < reps; ++r) {
        const auto t0 = std::chrono::steady_clock::now();
        auto res = analyze_condition(row.condition, at, eps, topts);
        row.runs_seconds.push_back(seconds_since(t0));
        if (res.outcome.status != FeasStatus::feasible)
          throw std::runtime_error(std::string("timing solve not feasible for ") +
                                   to_string(row.condition));
      }
      row.median_seconds = median(row.runs_seconds);
      result.timing.push_back(std::move(row));
    }
  }

  // emit tables
  {
    std::ostringstream csv, md;
    csv << "system,condition,gamma_star,bracket_lo,bracket_hi,evaluations\n";
    md << "| system | condition | gamma_star |\n|---|---|---|\n";
    for (const auto& row : result.bisections) {
      csv << row.system << ',' << to_string(row.result.condition) << ','
          << std::setprecision(10) << row.result.gamma_star << ',' << row.result.lo << ','
          << row.result.hi << ',' << row.result.evaluations.size() << '\n';
      md << "| " << row.system << " | " << to_string(row.result.condition) << " | " << std::fixed
         << std::setprecision(4) << row.result.gamma_star << std::defaultfloat << " |\n";
    }
    write_file(fs::path(out_dir) / "gamma_star.csv", csv.str());
    write_file(fs::path(out_dir) / "gamma_star.md", md.str());
  }
  {
    std::ostringstream csv;
    csv << "condition,N,n_x,n_u,n_y,decision_vars\n";
    for (const auto& row : result.counts)
      csv << to_string(row.condition) << ',' << row.num_vertices << ',' << row.nx << ',' << row.nu
          << ',' << row.ny << ',' << row.count << '\n';
    write_file(fs::path(out_dir) / "decision_vars.csv", csv.str());
  }
  {
    std::ostringstream csv;
    csv << "condition,median_seconds,runs\n";
    for (const auto& row : result.timing) {
      csv << to_string(row.condition) << ',' << row.median_seconds << ',';
      for (size_t r = 0; r < row.runs_seconds.size(); ++r)
        csv << (r ? ";" : "") << row.runs_seconds[r];
      csv << '\n';
    }
    write_file(fs::path(out_dir) / "timing.csv", csv.str());

    auto med = [&](ConditionId c) -> std::optional<double> {
      for (const auto& row : result.timing)
        if (row.condition == c) return row.median_seconds;
      return std::nullopt;
    };
    const std::pair<ConditionId, ConditionId> expected_orderings[] = {
        {ConditionId::polyqs_l14, ConditionId::polyqs_l12},
        {ConditionId::polyqs_l14, ConditionId::polyqs_l13},
        {ConditionId::det_thm1, ConditionId::det_rem1},
        {ConditionId::synth_t43, ConditionId::synth_t44},
    };
    std::ostringstream ord;
    ord << "faster,slower,median_faster,median_slower,ok\n";
    for (const auto& [fast, slow] : expected_orderings) {
      auto mf = med(fast), ms = med(slow);
      if (mf && ms)
        ord << to_string(fast) << ',' << to_string(slow) << ',' << *mf << ',' << *ms << ','
            << (*mf < *ms ? "yes" : "no") << '\n';
    }
    write_file(fs::path(out_dir) / "timing_orderings.csv", ord.str());
  }
  return result;
}

}  // namespace lpvcert
