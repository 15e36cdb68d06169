#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "lpvcert/matcore.hpp"
#include "lpvcert/rng.hpp"

namespace lpvcert {

/// Discrete-time polytopic LPV system x+ = A(p) x + B u, y = C x with
/// A(p) = sum_i xi_i(p) A_i and xi mapping the parameter set into the unit
/// simplex. Immutable after construction.
class PolytopicSystem {
 public:
  enum class Kind { affine_scalar, vertices, block_diag };

  /// N = 2 family A(p) = A0 + p Ap for |p| <= gamma, with vertices
  /// A(-gamma), A(+gamma) and xi(p) = ((gamma-p)/2gamma, (gamma+p)/2gamma).
  static PolytopicSystem from_affine_scalar(const Matrix& a0, const Matrix& ap, double gamma,
                                            const Matrix& b, const Matrix& c);

  /// Explicit vertex list; the parameter is the simplex coordinate vector
  /// itself (xi = identity), so the system is strictly polytopic with the
  /// unit vectors as witnesses unless other witnesses are supplied.
  static PolytopicSystem from_vertices(std::vector<Matrix> vertices, const Matrix& b,
                                       const Matrix& c);

  /// Decoupled composition: block-diagonal A, B, C; the vertex set is the
  /// Cartesian product (first part most significant) and the parameter is
  /// the concatenation of the part parameters.
  static PolytopicSystem block_diag_compose(const std::vector<PolytopicSystem>& parts);

  int nx() const { return nx_; }
  int nu() const { return nu_; }
  int ny() const { return ny_; }
  int num_vertices() const { return static_cast<int>(vertices_.size()); }
  int param_dim() const { return param_dim_; }
  Kind kind() const { return kind_; }
  bool strictly_polytopic() const { return strictly_polytopic_; }

  const std::vector<Matrix>& vertices() const { return vertices_; }
  const Matrix& vertex(int i) const { return vertices_.at(i); }
  const Matrix& B() const { return b_; }
  const Matrix& C() const { return c_; }
  /// Parameter points attaining the unit coordinate vectors.
  const std::vector<Vector>& witnesses() const { return witnesses_; }

  bool contains(const Vector& p) const;
  /// Simplex coordinates at p; throws if p is outside the parameter set.
  Vector xi(const Vector& p) const;
  Matrix evaluate_A(const Vector& p) const;

  /// Uniform draw from the parameter set.
  Vector sample_parameter(Rng& rng) const;

  /// Interval radius for affine families (uniform over block-diagonal
  /// compositions of affine parts); empty for vertex-list systems.
  std::optional<double> gamma() const;
  /// Rebuild the family at a different radius (affine and block-diagonal
  /// affine systems only).
  PolytopicSystem with_gamma(double gamma) const;

  nlohmann::json to_json() const;
  static PolytopicSystem from_json(const nlohmann::json& j);
  static PolytopicSystem load(const std::string& path);
  void save(const std::string& path) const;

 private:
  PolytopicSystem() = default;
  void finalize_vertices();

  Kind kind_ = Kind::vertices;
  int nx_ = 0, nu_ = 0, ny_ = 0, param_dim_ = 0;
  std::vector<Matrix> vertices_;
  Matrix b_, c_;
  bool strictly_polytopic_ = false;
  std::vector<Vector> witnesses_;

  // affine_scalar payload
  Matrix a0_, ap_;
  double gamma_ = 0.0;

  // block_diag payload
  std::vector<std::shared_ptr<const PolytopicSystem>> parts_;
};

struct ParameterSequence {
  std::vector<Vector> points;

  static ParameterSequence constant(const Vector& p, int len);
  static ParameterSequence random(const PolytopicSystem& sys, int len, Rng& rng);
};

struct Trajectory {
  std::vector<Vector> states;
  std::vector<Vector> inputs_used;
  std::vector<Vector> params_used;
};

/// Gain access used by simulation and verification; implemented by the gain
/// schedules in gains.hpp.
class GainEvaluator {
 public:
  virtual ~GainEvaluator() = default;
  virtual bool needs_next_parameter() const = 0;
  /// Gain matrix at the current parameter (and the next one when previewed).
  virtual Matrix gain(const Vector& p_now, const Vector* p_next) const = 0;
};

enum class SimMode { open_loop, closed_loop, error_system };

/// One step of the selected dynamics: open x+ = A(p)x + Bu, closed loop
/// x+ = (A(p) + B K)x, error system e+ = (A(p) + L C)e.
Vector step_dynamics(const PolytopicSystem& sys, const Vector& x, const Vector& p_now,
                     const Vector* p_next, const GainEvaluator* gain, SimMode mode);

/// Simulate from x0. Open loop runs one step per parameter point; gains that
/// preview p_{k+1} use the final point only as the preview and run one step
/// fewer. Inputs apply to open loop only and may be empty (zero input).
Trajectory simulate(const PolytopicSystem& sys, const Vector& x0, const ParameterSequence& params,
                    const std::vector<Vector>& inputs, const GainEvaluator* gain, SimMode mode);

/// Joint-spectral-radius lower bound: max over vertex-index words w with
/// 1 <= |w| <= max_len of rho(A_w)^(1/|w|). A value > 1 certifies the system
/// is not GUAS under arbitrary parameter variation.
struct BudgetExceeded : std::runtime_error {
  BudgetExceeded(const std::string& what, double partial) : std::runtime_error(what), partial_bound(partial) {}
  double partial_bound;
};
double product_radius_oracle(const PolytopicSystem& sys, int max_len,
                             long multiply_budget = 2000000);

}  // namespace lpvcert
