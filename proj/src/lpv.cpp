#include "lpvcert/lpv.hpp"

#include <fstream>

#include <nlohmann/json.hpp>

#include "lpvcert/json_io.hpp"

namespace lpvcert {

namespace {

using nlohmann::json;

constexpr double kSimplexTol = 1e-9;

}  // namespace

PolytopicSystem PolytopicSystem::from_affine_scalar(const Matrix& a0, const Matrix& ap,
                                                    double gamma, const Matrix& b,
                                                    const Matrix& c) {
  if (!(gamma > 0)) throw std::invalid_argument("from_affine_scalar: gamma must be > 0");
  if (a0.rows() != a0.cols() || ap.rows() != ap.cols() || a0.rows() != ap.rows())
    throw std::invalid_argument("from_affine_scalar: A0 and Ap must be square of equal size");
  if (b.rows() != a0.rows() || c.cols() != a0.rows())
    throw std::invalid_argument("from_affine_scalar: inconsistent B or C dimensions");
  require_finite(a0, "A0");
  require_finite(ap, "Ap");
  PolytopicSystem s;
  s.kind_ = Kind::affine_scalar;
  s.a0_ = a0;
  s.ap_ = ap;
  s.gamma_ = gamma;
  s.b_ = b;
  s.c_ = c;
  s.vertices_ = {a0 - gamma * ap, a0 + gamma * ap};
  s.strictly_polytopic_ = true;
  Vector wneg(1), wpos(1);
  wneg << -gamma;
  wpos << gamma;
  s.witnesses_ = {wneg, wpos};
  s.param_dim_ = 1;
  s.finalize_vertices();
  return s;
}

PolytopicSystem PolytopicSystem::from_vertices(std::vector<Matrix> vertices, const Matrix& b,
                                               const Matrix& c) {
  if (vertices.empty()) throw std::invalid_argument("from_vertices: need at least one vertex");
  const Eigen::Index n = vertices.front().rows();
  for (const auto& a : vertices) {
    if (a.rows() != n || a.cols() != n)
      throw std::invalid_argument("from_vertices: vertices must be square of equal size");
    require_finite(a, "vertex");
  }
  if (b.rows() != n || c.cols() != n)
    throw std::invalid_argument("from_vertices: inconsistent B or C dimensions");
  PolytopicSystem s;
  s.kind_ = Kind::vertices;
  s.vertices_ = std::move(vertices);
  s.b_ = b;
  s.c_ = c;
  const int nv = static_cast<int>(s.vertices_.size());
  s.param_dim_ = nv;
  s.strictly_polytopic_ = true;
  for (int i = 0; i < nv; ++i) {
    Vector e = Vector::Zero(nv);
    e(i) = 1.0;
    s.witnesses_.push_back(e);
  }
  s.finalize_vertices();
  return s;
}

PolytopicSystem PolytopicSystem::block_diag_compose(const std::vector<PolytopicSystem>& parts) {
  if (parts.empty()) throw std::invalid_argument("block_diag_compose: empty list");
  if (parts.size() == 1) return parts.front();
  PolytopicSystem s;
  s.kind_ = Kind::block_diag;
  int nx = 0, nu = 0, ny = 0, pd = 0;
  long nv = 1;
  for (const auto& p : parts) {
    s.parts_.push_back(std::make_shared<PolytopicSystem>(p));
    nx += p.nx();
    nu += p.nu();
    ny += p.ny();
    pd += p.param_dim();
    nv *= p.num_vertices();
  }
  if (nv > 100000) throw std::invalid_argument("block_diag_compose: vertex product too large");

  s.b_ = Matrix::Zero(nx, nu);
  s.c_ = Matrix::Zero(ny, nx);
  {
    int rx = 0, ru = 0, ry = 0;
    for (const auto& p : parts) {
      s.b_.block(rx, ru, p.nx(), p.nu()) = p.B();
      s.c_.block(ry, rx, p.ny(), p.nx()) = p.C();
      rx += p.nx();
      ru += p.nu();
      ry += p.ny();
    }
  }

  s.strictly_polytopic_ = true;
  for (const auto& p : parts) s.strictly_polytopic_ = s.strictly_polytopic_ && p.strictly_polytopic();

  // Cartesian product, first part most significant
  std::vector<int> idx(parts.size(), 0);
  for (long v = 0; v < nv; ++v) {
    Matrix a = Matrix::Zero(nx, nx);
    int rx = 0;
    for (size_t m = 0; m < parts.size(); ++m) {
      const auto& pm = parts[m];
      a.block(rx, rx, pm.nx(), pm.nx()) = pm.vertex(idx[m]);
      rx += pm.nx();
    }
    s.vertices_.push_back(std::move(a));
    if (s.strictly_polytopic_) {
      Vector w(pd);
      int off = 0;
      for (size_t m = 0; m < parts.size(); ++m) {
        w.segment(off, parts[m].param_dim()) = parts[m].witnesses().at(idx[m]);
        off += parts[m].param_dim();
      }
      s.witnesses_.push_back(std::move(w));
    }
    for (int m = static_cast<int>(parts.size()) - 1; m >= 0; --m) {
      if (++idx[m] < parts[m].num_vertices()) break;
      idx[m] = 0;
    }
  }
  s.param_dim_ = pd;
  s.finalize_vertices();
  return s;
}

void PolytopicSystem::finalize_vertices() {
  nx_ = static_cast<int>(vertices_.front().rows());
  nu_ = static_cast<int>(b_.cols());
  ny_ = static_cast<int>(c_.rows());
}

bool PolytopicSystem::contains(const Vector& p) const {
  if (p.size() != param_dim_) return false;
  switch (kind_) {
    case Kind::affine_scalar:
      return std::abs(p(0)) <= gamma_ * (1.0 + 1e-12) + 1e-300;
    case Kind::vertices: {
      if (p.minCoeff() < -kSimplexTol) return false;
      return std::abs(p.sum() - 1.0) <= kSimplexTol;
    }
    case Kind::block_diag: {
      int off = 0;
      for (const auto& part : parts_) {
        if (!part->contains(p.segment(off, part->param_dim()))) return false;
        off += part->param_dim();
      }
      return true;
    }
  }
  return false;
}

Vector PolytopicSystem::xi(const Vector& p) const {
  if (!contains(p)) throw std::invalid_argument("parameter outside the admissible set");
  switch (kind_) {
    case Kind::affine_scalar: {
      Vector out(2);
      out(0) = (gamma_ - p(0)) / (2.0 * gamma_);
      out(1) = (gamma_ + p(0)) / (2.0 * gamma_);
      return out;
    }
    case Kind::vertices:
      return p;
    case Kind::block_diag: {
      Vector out = Vector::Ones(1);
      int off = 0;
      for (const auto& part : parts_) {
        Vector sub = part->xi(p.segment(off, part->param_dim()));
        off += part->param_dim();
        Vector next(out.size() * sub.size());
        for (Eigen::Index i = 0; i < out.size(); ++i)
          for (Eigen::Index j = 0; j < sub.size(); ++j) next(i * sub.size() + j) = out(i) * sub(j);
        out = std::move(next);
      }
      return out;
    }
  }
  throw std::logic_error("unreachable");
}

Matrix PolytopicSystem::evaluate_A(const Vector& p) const {
  Vector w = xi(p);
  Matrix a = Matrix::Zero(nx_, nx_);
  for (int i = 0; i < num_vertices(); ++i) a += w(i) * vertices_[i];
  return a;
}

Vector PolytopicSystem::sample_parameter(Rng& rng) const {
  switch (kind_) {
    case Kind::affine_scalar: {
      Vector p(1);
      p << rng.uniform(-gamma_, gamma_);
      return p;
    }
    case Kind::vertices: {
      // uniform on the simplex via normalized exponentials
      Vector p(param_dim_);
      double total = 0.0;
      for (int i = 0; i < param_dim_; ++i) {
        double u = rng.uniform01();
        while (u <= 1e-300) u = rng.uniform01();
        p(i) = -std::log(u);
        total += p(i);
      }
      return p / total;
    }
    case Kind::block_diag: {
      Vector p(param_dim_);
      int off = 0;
      for (const auto& part : parts_) {
        p.segment(off, part->param_dim()) = part->sample_parameter(rng);
        off += part->param_dim();
      }
      return p;
    }
  }
  throw std::logic_error("unreachable");
}

std::optional<double> PolytopicSystem::gamma() const {
  switch (kind_) {
    case Kind::affine_scalar:
      return gamma_;
    case Kind::block_diag: {
      std::optional<double> g;
      for (const auto& part : parts_) {
        auto pg = part->gamma();
        if (!pg) return std::nullopt;
        if (g && std::abs(*g - *pg) > 1e-12 * std::max(1.0, std::abs(*g))) return std::nullopt;
        g = pg;
      }
      return g;
    }
    case Kind::vertices:
      return std::nullopt;
  }
  return std::nullopt;
}

PolytopicSystem PolytopicSystem::with_gamma(double gamma) const {
  switch (kind_) {
    case Kind::affine_scalar:
      return from_affine_scalar(a0_, ap_, gamma, b_, c_);
    case Kind::block_diag: {
      std::vector<PolytopicSystem> parts;
      for (const auto& part : parts_) parts.push_back(part->with_gamma(gamma));
      return block_diag_compose(parts);
    }
    case Kind::vertices:
      throw std::invalid_argument("with_gamma: vertex-list systems have no gamma family");
  }
  throw std::logic_error("unreachable");
}

nlohmann::json PolytopicSystem::to_json() const {
  json j;
  j["schema_version"] = 1;
  switch (kind_) {
    case Kind::affine_scalar:
      j["kind"] = "affine_scalar";
      j["A0"] = mat_to_json(a0_);
      j["Ap"] = mat_to_json(ap_);
      j["gamma"] = gamma_;
      j["B"] = mat_to_json(b_);
      j["C"] = mat_to_json(c_);
      break;
    case Kind::vertices: {
      j["kind"] = "vertices";
      json as = json::array();
      for (const auto& a : vertices_) as.push_back(mat_to_json(a));
      j["A"] = as;
      j["B"] = mat_to_json(b_);
      j["C"] = mat_to_json(c_);
      break;
    }
    case Kind::block_diag: {
      j["kind"] = "block_diag";
      json parts = json::array();
      for (const auto& p : parts_) parts.push_back(p->to_json());
      j["parts"] = parts;
      break;
    }
  }
  return j;
}

PolytopicSystem PolytopicSystem::from_json(const nlohmann::json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "affine_scalar") {
    return from_affine_scalar(mat_from_json(j.at("A0")), mat_from_json(j.at("Ap")),
                              j.at("gamma").get<double>(), mat_from_json(j.at("B")),
                              mat_from_json(j.at("C")));
  }
  if (kind == "vertices") {
    std::vector<Matrix> as;
    for (const auto& a : j.at("A")) as.push_back(mat_from_json(a));
    return from_vertices(std::move(as), mat_from_json(j.at("B")), mat_from_json(j.at("C")));
  }
  if (kind == "block_diag") {
    std::vector<PolytopicSystem> parts;
    for (const auto& p : j.at("parts")) parts.push_back(from_json(p));
    return block_diag_compose(parts);
  }
  throw std::invalid_argument("unknown system kind: " + kind);
}

PolytopicSystem PolytopicSystem::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open system file: " + path);
  json j;
  in >> j;
  return from_json(j);
}

void PolytopicSystem::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write system file: " + path);
  out << to_json().dump(2) << "\n";
}

ParameterSequence ParameterSequence::constant(const Vector& p, int len) {
  ParameterSequence seq;
  seq.points.assign(len, p);
  return seq;
}

ParameterSequence ParameterSequence::random(const PolytopicSystem& sys, int len, Rng& rng) {
  ParameterSequence seq;
  seq.points.reserve(len);
  for (int i = 0; i < len; ++i) seq.points.push_back(sys.sample_parameter(rng));
  return seq;
}

Vector step_dynamics(const PolytopicSystem& sys, const Vector& x, const Vector& p_now,
                     const Vector* p_next, const GainEvaluator* gain, SimMode mode) {
  if (x.size() != sys.nx()) throw std::invalid_argument("step_dynamics: state dimension mismatch");
  Matrix a = sys.evaluate_A(p_now);
  switch (mode) {
    case SimMode::open_loop:
      return a * x;
    case SimMode::closed_loop: {
      if (!gain) throw std::invalid_argument("closed_loop requires a gain");
      Matrix k = gain->gain(p_now, p_next);
      return (a + sys.B() * k) * x;
    }
    case SimMode::error_system: {
      if (!gain) throw std::invalid_argument("error_system requires a gain");
      Matrix l = gain->gain(p_now, p_next);
      return (a + l * sys.C()) * x;
    }
  }
  throw std::logic_error("unreachable");
}

Trajectory simulate(const PolytopicSystem& sys, const Vector& x0, const ParameterSequence& params,
                    const std::vector<Vector>& inputs, const GainEvaluator* gain, SimMode mode) {
  if (x0.size() != sys.nx()) throw std::invalid_argument("simulate: x0 dimension mismatch");
  if ((mode == SimMode::closed_loop || mode == SimMode::error_system) && !gain)
    throw std::invalid_argument("simulate: closed_loop/error_system require a gain");
  const bool preview = gain && gain->needs_next_parameter() && mode != SimMode::open_loop;
  const int steps = static_cast<int>(params.points.size()) - (preview ? 1 : 0);
  if (steps < 0) throw std::invalid_argument("simulate: parameter sequence too short");
  if (mode == SimMode::open_loop && !inputs.empty() &&
      static_cast<int>(inputs.size()) < steps)
    throw std::invalid_argument("simulate: input sequence shorter than the horizon");

  Trajectory traj;
  traj.states.push_back(x0);
  Vector x = x0;
  for (int k = 0; k < steps; ++k) {
    const Vector& p = params.points[k];
    const Vector* pn = (k + 1 < static_cast<int>(params.points.size())) ? &params.points[k + 1] : nullptr;
    if (preview && pn == nullptr) break;
    if (mode == SimMode::open_loop) {
      Vector u = Vector::Zero(sys.nu());
      if (!inputs.empty()) {
        if (inputs[k].size() != sys.nu()) throw std::invalid_argument("simulate: input dimension mismatch");
        u = inputs[k];
      }
      x = sys.evaluate_A(p) * x + sys.B() * u;
      traj.inputs_used.push_back(u);
    } else {
      x = step_dynamics(sys, x, p, pn, gain, mode);
    }
    traj.params_used.push_back(p);
    traj.states.push_back(x);
  }
  return traj;
}

namespace {

void product_dfs(const std::vector<Matrix>& as, const std::vector<double>& anorms, int len,
                 int depth, const Matrix& prefix, double prefix_norm, double max_anorm,
                 double& best, long& budget) {
  if (depth == len) {
    best = std::max(best, std::pow(spectral_radius(prefix), 1.0 / len));
    return;
  }
  const int rem = len - depth;
  // rho(P Q) <= ||P||_F * max||A||_F^rem; prune branches that cannot beat best
  if (best > 0 && std::pow(prefix_norm * std::pow(max_anorm, rem), 1.0 / len) <= best) return;
  for (size_t i = 0; i < as.size(); ++i) {
    if (--budget < 0) throw BudgetExceeded("product_radius_oracle: multiply budget exceeded", best);
    Matrix next = prefix * as[i];
    product_dfs(as, anorms, len, depth + 1, next, next.norm(), max_anorm, best, budget);
  }
}

}  // namespace

double product_radius_oracle(const PolytopicSystem& sys, int max_len, long multiply_budget) {
  if (max_len < 1) throw std::invalid_argument("product_radius_oracle: max_len must be >= 1");
  const auto& as = sys.vertices();
  std::vector<double> anorms;
  double max_anorm = 0.0;
  for (const auto& a : as) {
    anorms.push_back(a.norm());
    max_anorm = std::max(max_anorm, anorms.back());
  }
  double best = 0.0;
  long budget = multiply_budget;
  const Matrix eye = Matrix::Identity(sys.nx(), sys.nx());
  for (int len = 1; len <= max_len; ++len)
    product_dfs(as, anorms, len, 0, eye, std::sqrt(static_cast<double>(sys.nx())), max_anorm, best,
                budget);
  return best;
}

}  // namespace lpvcert
