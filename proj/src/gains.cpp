#include "lpvcert/gains.hpp"

#include <Eigen/SVD>
#include <nlohmann/json.hpp>

#include "lpvcert/json_io.hpp"

namespace lpvcert {

namespace {

std::string idx1(const std::string& base, int i) { return base + "_" + std::to_string(i + 1); }
std::string idx2(const std::string& base, int i, int j) {
  return base + "_" + std::to_string(i + 1) + "_" + std::to_string(j + 1);
}

}  // namespace

const char* to_string(GainKind k) { return k == GainKind::observer ? "observer" : "controller"; }

const char* to_string(GainRecipe r) {
  switch (r) {
    case GainRecipe::thm1: return "thm1";
    case GainRecipe::rem1: return "rem1";
    case GainRecipe::thm3: return "thm3";
    case GainRecipe::t43: return "t43";
    case GainRecipe::t44: return "t44";
    case GainRecipe::lti: return "lti";
  }
  return "?";
}

Matrix observer_gain_thm1(const PolytopicSystem& sys, const std::vector<SymMatrix>& pbars,
                          const Vector& pi) {
  if (static_cast<int>(pbars.size()) != sys.num_vertices())
    throw std::invalid_argument("observer_gain_thm1: need one Pbar per vertex");
  const Matrix& c = sys.C();
  const Matrix ctc = c.transpose() * c;
  Vector w = sys.xi(pi);
  Matrix l = Matrix::Zero(sys.nx(), sys.ny());
  for (int i = 0; i < sys.num_vertices(); ++i)
    l -= w(i) * sys.vertex(i) * guarded_inverse(pbars[i].mat() + ctc, "observer_gain_thm1") *
         c.transpose();
  return l;
}

std::pair<Matrix, Matrix> lti_observer_gain(const Matrix& a, const Matrix& c,
                                            const SymMatrix& pbar) {
  const Matrix ctc = c.transpose() * c;
  Matrix primary = -a * guarded_inverse(pbar.mat() + ctc, "lti_observer_gain") * c.transpose();
  Matrix sbar = guarded_inverse(pbar.mat(), "lti_observer_gain: Pbar");
  Matrix inner = Matrix::Identity(c.rows(), c.rows()) + c * sbar * c.transpose();
  Matrix alternate = -a * sbar * c.transpose() * guarded_inverse(inner, "lti_observer_gain");
  return {primary, alternate};
}

Matrix observer_gain_rem1(const PolytopicSystem& sys, const std::vector<Matrix>& xs,
                          const std::vector<Matrix>& ys, const Vector& pi) {
  if (static_cast<int>(xs.size()) != sys.num_vertices() || xs.size() != ys.size())
    throw std::invalid_argument("observer_gain_rem1: need X_i and Y_i per vertex");
  Vector w = sys.xi(pi);
  Matrix l = Matrix::Zero(sys.nx(), sys.ny());
  for (int i = 0; i < sys.num_vertices(); ++i)
    l += w(i) * guarded_inverse(xs[i], "observer_gain_rem1: X_i") * ys[i];
  return l;
}

namespace {

Matrix s_of_pi(const PolytopicSystem& sys, const std::vector<SymMatrix>& sbars, const Vector& pi) {
  Vector w = sys.xi(pi);
  Matrix p = Matrix::Zero(sys.nx(), sys.nx());
  for (int i = 0; i < sys.num_vertices(); ++i)
    p += w(i) * guarded_inverse(sbars[i].mat(), "S(pi): Sbar_i");
  return guarded_inverse(p, "S(pi): P(pi)");
}

}  // namespace

Matrix controller_gain_thm3(const PolytopicSystem& sys, const std::vector<SymMatrix>& sbars,
                            const Vector& pi_now, const Vector& pi_next) {
  if (static_cast<int>(sbars.size()) != sys.num_vertices())
    throw std::invalid_argument("controller_gain_thm3: need one Sbar per vertex");
  const Matrix& b = sys.B();
  Matrix s_next = s_of_pi(sys, sbars, pi_next);
  Matrix m = s_next + b * b.transpose();
  return -b.transpose() * guarded_inverse(m, "controller_gain_thm3") * sys.evaluate_A(pi_now);
}

std::pair<Matrix, Matrix> lti_controller_gain(const Matrix& a, const Matrix& b,
                                              const SymMatrix& sbar) {
  Matrix primary =
      -b.transpose() * guarded_inverse(sbar.mat() + b * b.transpose(), "lti_controller_gain") * a;
  Matrix pbar = guarded_inverse(sbar.mat(), "lti_controller_gain: Sbar");
  Matrix inner = Matrix::Identity(b.cols(), b.cols()) + b.transpose() * pbar * b;
  Matrix alternate = -guarded_inverse(inner, "lti_controller_gain") * b.transpose() * pbar * a;
  return {primary, alternate};
}

Matrix controller_gain_t43(const PolytopicSystem& sys, const std::vector<Matrix>& ys,
                           const std::vector<SymMatrix>& sbars, const Vector& pi) {
  if (static_cast<int>(ys.size()) != sys.num_vertices() || ys.size() != sbars.size())
    throw std::invalid_argument("controller_gain_t43: need Y_i and Sbar_i per vertex");
  Vector w = sys.xi(pi);
  Matrix k = Matrix::Zero(sys.nu(), sys.nx());
  for (int i = 0; i < sys.num_vertices(); ++i)
    k += w(i) * ys[i] * guarded_inverse(sbars[i].mat(), "controller_gain_t43: Sbar_i");
  return k;
}

Matrix controller_gain_t44(const PolytopicSystem& sys,
                           const std::vector<std::vector<Matrix>>& xijs,
                           const std::vector<std::vector<Matrix>>& yijs, const Vector& pi_now,
                           const Vector& pi_next) {
  const int n = sys.num_vertices();
  if (static_cast<int>(xijs.size()) != n || static_cast<int>(yijs.size()) != n)
    throw std::invalid_argument("controller_gain_t44: need X_ij and Y_ij per vertex pair");
  Vector wn = sys.xi(pi_now);
  Vector wp = sys.xi(pi_next);
  Matrix k = Matrix::Zero(sys.nu(), sys.nx());
  for (int i = 0; i < n; ++i) {
    Matrix xi_next = Matrix::Zero(sys.nx(), sys.nx());
    Matrix yi_next = Matrix::Zero(sys.nu(), sys.nx());
    for (int j = 0; j < n; ++j) {
      xi_next += wp(j) * xijs[i][j];
      yi_next += wp(j) * yijs[i][j];
    }
    k += wn(i) * yi_next * guarded_inverse(xi_next, "controller_gain_t44: X_i(pi+)");
  }
  return k;
}

GainSchedule GainSchedule::observer_thm1(const PolytopicSystem& sys, std::vector<SymMatrix> pbars) {
  GainSchedule g;
  g.kind_ = GainKind::observer;
  g.recipe_ = GainRecipe::thm1;
  g.sys_ = std::make_shared<PolytopicSystem>(sys);
  g.lyap_ = std::move(pbars);
  g.lyap_is_p_ = true;
  return g;
}

GainSchedule GainSchedule::observer_rem1(const PolytopicSystem& sys, std::vector<Matrix> xs,
                                         std::vector<Matrix> ys, std::vector<SymMatrix> pbars) {
  GainSchedule g;
  g.kind_ = GainKind::observer;
  g.recipe_ = GainRecipe::rem1;
  g.sys_ = std::make_shared<PolytopicSystem>(sys);
  g.xs_ = std::move(xs);
  g.ys_ = std::move(ys);
  g.lyap_ = std::move(pbars);
  g.lyap_is_p_ = true;
  return g;
}

GainSchedule GainSchedule::controller_thm3(const PolytopicSystem& sys,
                                           std::vector<SymMatrix> sbars) {
  GainSchedule g;
  g.kind_ = GainKind::controller;
  g.recipe_ = GainRecipe::thm3;
  g.sys_ = std::make_shared<PolytopicSystem>(sys);
  g.lyap_ = std::move(sbars);
  g.lyap_is_p_ = false;
  return g;
}

GainSchedule GainSchedule::controller_t43(const PolytopicSystem& sys, std::vector<Matrix> ys,
                                          std::vector<SymMatrix> sbars) {
  GainSchedule g;
  g.kind_ = GainKind::controller;
  g.recipe_ = GainRecipe::t43;
  g.sys_ = std::make_shared<PolytopicSystem>(sys);
  g.ys_ = std::move(ys);
  g.lyap_ = std::move(sbars);
  g.lyap_is_p_ = false;
  return g;
}

GainSchedule GainSchedule::controller_t44(const PolytopicSystem& sys,
                                          std::vector<std::vector<Matrix>> xijs,
                                          std::vector<std::vector<Matrix>> yijs,
                                          std::vector<SymMatrix> sbars) {
  GainSchedule g;
  g.kind_ = GainKind::controller;
  g.recipe_ = GainRecipe::t44;
  g.sys_ = std::make_shared<PolytopicSystem>(sys);
  g.xijs_ = std::move(xijs);
  g.yijs_ = std::move(yijs);
  g.lyap_ = std::move(sbars);
  g.lyap_is_p_ = false;
  return g;
}

GainSchedule GainSchedule::lti_observer(const PolytopicSystem& sys, SymMatrix pbar) {
  if (sys.num_vertices() != 1)
    throw std::invalid_argument("lti_observer: single-vertex system required");
  GainSchedule g;
  g.kind_ = GainKind::observer;
  g.recipe_ = GainRecipe::lti;
  g.sys_ = std::make_shared<PolytopicSystem>(sys);
  g.lyap_ = {std::move(pbar)};
  g.lyap_is_p_ = true;
  return g;
}

GainSchedule GainSchedule::lti_controller(const PolytopicSystem& sys, SymMatrix sbar) {
  if (sys.num_vertices() != 1)
    throw std::invalid_argument("lti_controller: single-vertex system required");
  GainSchedule g;
  g.kind_ = GainKind::controller;
  g.recipe_ = GainRecipe::lti;
  g.sys_ = std::make_shared<PolytopicSystem>(sys);
  g.lyap_ = {std::move(sbar)};
  g.lyap_is_p_ = false;
  return g;
}

Matrix GainSchedule::gain(const Vector& p_now, const Vector* p_next) const {
  switch (recipe_) {
    case GainRecipe::thm1:
      return observer_gain_thm1(*sys_, lyap_, p_now);
    case GainRecipe::rem1:
      return observer_gain_rem1(*sys_, xs_, ys_, p_now);
    case GainRecipe::thm3:
      if (!p_next) throw std::invalid_argument("thm3 gain needs the next parameter");
      return controller_gain_thm3(*sys_, lyap_, p_now, *p_next);
    case GainRecipe::t43:
      return controller_gain_t43(*sys_, ys_, lyap_, p_now);
    case GainRecipe::t44:
      if (!p_next) throw std::invalid_argument("t44 gain needs the next parameter");
      return controller_gain_t44(*sys_, xijs_, yijs_, p_now, *p_next);
    case GainRecipe::lti:
      if (kind_ == GainKind::observer)
        return lti_observer_gain(sys_->vertex(0), sys_->C(), lyap_[0]).first;
      return lti_controller_gain(sys_->vertex(0), sys_->B(), lyap_[0]).first;
  }
  throw std::logic_error("unreachable");
}

Matrix GainSchedule::vertex_gain(int i) const {
  switch (recipe_) {
    case GainRecipe::thm1: {
      const Matrix& c = sys_->C();
      return -sys_->vertex(i) *
             guarded_inverse(lyap_.at(i).mat() + c.transpose() * c, "vertex_gain") * c.transpose();
    }
    case GainRecipe::rem1:
      return guarded_inverse(xs_.at(i), "vertex_gain: X_i") * ys_.at(i);
    case GainRecipe::t43:
      return ys_.at(i) * guarded_inverse(lyap_.at(i).mat(), "vertex_gain: Sbar_i");
    case GainRecipe::lti:
      return gain(sys_->witnesses().at(0), nullptr);
    case GainRecipe::thm3:
    case GainRecipe::t44:
      throw std::invalid_argument("two-parameter recipes have no per-vertex gain");
  }
  throw std::logic_error("unreachable");
}

std::vector<SymMatrix> GainSchedule::sbars() const {
  std::vector<SymMatrix> out;
  for (const auto& m : lyap_)
    out.emplace_back(lyap_is_p_ ? Matrix(guarded_inverse(m.mat(), "sbars")) : m.mat());
  return out;
}

std::vector<SymMatrix> GainSchedule::pbars() const {
  std::vector<SymMatrix> out;
  for (const auto& m : lyap_)
    out.emplace_back(lyap_is_p_ ? m.mat() : Matrix(guarded_inverse(m.mat(), "pbars")));
  return out;
}

nlohmann::json GainSchedule::to_json(int sample_points) const {
  nlohmann::json j;
  j["schema_version"] = 1;
  j["recipe"] = to_string(recipe_);
  j["kind"] = to_string(kind_);
  nlohmann::json mats;
  const std::string lyap_name = lyap_is_p_ ? "Pbar" : "Sbar";
  for (size_t i = 0; i < lyap_.size(); ++i)
    mats[idx1(lyap_name, static_cast<int>(i))] = mat_to_json(lyap_[i].mat());
  for (size_t i = 0; i < xs_.size(); ++i) mats[idx1("X", static_cast<int>(i))] = mat_to_json(xs_[i]);
  for (size_t i = 0; i < ys_.size(); ++i) mats[idx1("Y", static_cast<int>(i))] = mat_to_json(ys_[i]);
  for (size_t i = 0; i < xijs_.size(); ++i)
    for (size_t jj = 0; jj < xijs_[i].size(); ++jj) {
      mats[idx2("X", static_cast<int>(i), static_cast<int>(jj))] = mat_to_json(xijs_[i][jj]);
      mats[idx2("Y", static_cast<int>(i), static_cast<int>(jj))] = mat_to_json(yijs_[i][jj]);
    }
  j["matrices"] = mats;

  // documentation samples on a parameter grid
  nlohmann::json samples = nlohmann::json::array();
  std::vector<Vector> pts;
  if (sys_->param_dim() == 1 && sys_->gamma()) {
    for (int i = 0; i < sample_points; ++i) {
      Vector p(1);
      p << -*sys_->gamma() + 2.0 * *sys_->gamma() * i / std::max(1, sample_points - 1);
      pts.push_back(p);
    }
  } else {
    pts = sys_->witnesses();
  }
  for (const auto& p : pts) {
    nlohmann::json s;
    s["pi"] = vec_to_json(p);
    if (needs_next_parameter()) {
      s["pi_next"] = vec_to_json(p);
      s["gain"] = mat_to_json(gain(p, &p));
    } else {
      s["gain"] = mat_to_json(gain(p, nullptr));
    }
    samples.push_back(s);
  }
  j["samples"] = samples;
  return j;
}

GainSchedule GainSchedule::from_json(const PolytopicSystem& sys, const nlohmann::json& j) {
  const std::string recipe = j.at("recipe").get<std::string>();
  const auto& mats = j.at("matrices");
  const int n = sys.num_vertices();
  auto get = [&](const std::string& name) { return mat_from_json(mats.at(name)); };
  auto get_sym_list = [&](const std::string& base) {
    std::vector<SymMatrix> out;
    for (int i = 0; i < n; ++i) out.emplace_back(get(idx1(base, i)));
    return out;
  };
  auto get_list = [&](const std::string& base) {
    std::vector<Matrix> out;
    for (int i = 0; i < n; ++i) out.push_back(get(idx1(base, i)));
    return out;
  };
  if (recipe == "thm1") return observer_thm1(sys, get_sym_list("Pbar"));
  if (recipe == "rem1")
    return observer_rem1(sys, get_list("X"), get_list("Y"), get_sym_list("Pbar"));
  if (recipe == "thm3") return controller_thm3(sys, get_sym_list("Sbar"));
  if (recipe == "t43") return controller_t43(sys, get_list("Y"), get_sym_list("Sbar"));
  if (recipe == "t44") {
    std::vector<std::vector<Matrix>> xijs(n), yijs(n);
    for (int i = 0; i < n; ++i)
      for (int jj = 0; jj < n; ++jj) {
        xijs[i].push_back(get(idx2("X", i, jj)));
        yijs[i].push_back(get(idx2("Y", i, jj)));
      }
    return controller_t44(sys, std::move(xijs), std::move(yijs), get_sym_list("Sbar"));
  }
  if (recipe == "lti") {
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "observer") return lti_observer(sys, SymMatrix(get("Pbar_1")));
    return lti_controller(sys, SymMatrix(get("Sbar_1")));
  }
  throw std::invalid_argument("unknown gain recipe: " + recipe);
}

GainSchedule gain_from_certificate(ConditionId cond, const PolytopicSystem& sys,
                                   const std::map<std::string, Matrix>& matrices) {
  const int n = sys.num_vertices();
  auto sym_list = [&](const std::string& base) {
    std::vector<SymMatrix> out;
    for (int i = 0; i < n; ++i) out.emplace_back(matrices.at(idx1(base, i)));
    return out;
  };
  auto list = [&](const std::string& base) {
    std::vector<Matrix> out;
    for (int i = 0; i < n; ++i) out.push_back(matrices.at(idx1(base, i)));
    return out;
  };
  switch (cond) {
    case ConditionId::det_thm1:
      return GainSchedule::observer_thm1(sys, sym_list("Pbar"));
    case ConditionId::det_rem1:
      return GainSchedule::observer_rem1(sys, list("X"), list("Y"), sym_list("Pbar"));
    case ConditionId::stab_thm3:
      return GainSchedule::controller_thm3(sys, sym_list("Sbar"));
    case ConditionId::synth_t43:
      return GainSchedule::controller_t43(sys, list("Y"), sym_list("Sbar"));
    case ConditionId::synth_t44: {
      std::vector<std::vector<Matrix>> xijs(n), yijs(n);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
          xijs[i].push_back(matrices.at(idx2("X", i, j)));
          yijs[i].push_back(matrices.at(idx2("Y", i, j)));
        }
      return GainSchedule::controller_t44(sys, std::move(xijs), std::move(yijs),
                                          sym_list("Sbar"));
    }
    case ConditionId::lti_det:
      return GainSchedule::lti_observer(sys, SymMatrix(matrices.at("Pbar_1")));
    case ConditionId::lti_stab:
      return GainSchedule::lti_controller(sys, SymMatrix(matrices.at("Sbar_1")));
    default:
      throw std::invalid_argument(std::string("no gain recipe for condition ") + to_string(cond));
  }
}

}  // namespace lpvcert
