#pragma once

#include <map>
#include <memory>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "lpvcert/conditions.hpp"
#include "lpvcert/lpv.hpp"

namespace lpvcert {

enum class GainKind { observer, controller };
enum class GainRecipe { thm1, rem1, thm3, t43, t44, lti };

const char* to_string(GainKind k);
const char* to_string(GainRecipe r);

/// Observer gain from a detectability certificate:
/// L(pi) = -sum_i xi_i(pi) A_i (Pbar_i + C^T C)^{-1} C^T.
Matrix observer_gain_thm1(const PolytopicSystem& sys, const std::vector<SymMatrix>& pbars,
                          const Vector& pi);

/// Single-vertex observer gain in both algebraically equivalent forms:
/// -A (Pbar + C^T C)^{-1} C^T  and  -A Sbar C^T (I + C Sbar C^T)^{-1} with
/// Sbar = Pbar^{-1}. Returns {primary, alternate}.
std::pair<Matrix, Matrix> lti_observer_gain(const Matrix& a, const Matrix& c,
                                            const SymMatrix& pbar);

/// L(pi) = sum_i xi_i(pi) X_i^{-1} Y_i.
Matrix observer_gain_rem1(const PolytopicSystem& sys, const std::vector<Matrix>& xs,
                          const std::vector<Matrix>& ys, const Vector& pi);

/// K(pi, pi+) = -B^T (S(pi+) + B B^T)^{-1} A(pi) where S(pi) is the inverse
/// of sum_i xi_i(pi) Sbar_i^{-1} (not the combination of the Sbar_i).
Matrix controller_gain_thm3(const PolytopicSystem& sys, const std::vector<SymMatrix>& sbars,
                            const Vector& pi_now, const Vector& pi_next);

/// Single-vertex controller gain in both forms:
/// -B^T (Sbar + B B^T)^{-1} A  and  -(I + B^T Pbar B)^{-1} B^T Pbar A.
std::pair<Matrix, Matrix> lti_controller_gain(const Matrix& a, const Matrix& b,
                                              const SymMatrix& sbar);

/// K(pi) = sum_i xi_i(pi) Y_i Sbar_i^{-1}.
Matrix controller_gain_t43(const PolytopicSystem& sys, const std::vector<Matrix>& ys,
                           const std::vector<SymMatrix>& sbars, const Vector& pi);

/// K(pi, pi+) = sum_i xi_i(pi) Y_i(pi+) X_i(pi+)^{-1} with
/// X_i(pi) = sum_j xi_j(pi) X_ij and Y_i(pi) = sum_j xi_j(pi) Y_ij.
Matrix controller_gain_t44(const PolytopicSystem& sys,
                           const std::vector<std::vector<Matrix>>& xijs,
                           const std::vector<std::vector<Matrix>>& yijs, const Vector& pi_now,
                           const Vector& pi_next);

/// A reconstructed gain schedule: the certificate matrices plus the recipe
/// that evaluates L or K at a parameter (and the next one where previewed).
class GainSchedule : public GainEvaluator {
 public:
  static GainSchedule observer_thm1(const PolytopicSystem& sys, std::vector<SymMatrix> pbars);
  static GainSchedule observer_rem1(const PolytopicSystem& sys, std::vector<Matrix> xs,
                                    std::vector<Matrix> ys, std::vector<SymMatrix> pbars);
  static GainSchedule controller_thm3(const PolytopicSystem& sys, std::vector<SymMatrix> sbars);
  static GainSchedule controller_t43(const PolytopicSystem& sys, std::vector<Matrix> ys,
                                     std::vector<SymMatrix> sbars);
  static GainSchedule controller_t44(const PolytopicSystem& sys,
                                     std::vector<std::vector<Matrix>> xijs,
                                     std::vector<std::vector<Matrix>> yijs,
                                     std::vector<SymMatrix> sbars);
  static GainSchedule lti_observer(const PolytopicSystem& sys, SymMatrix pbar);
  static GainSchedule lti_controller(const PolytopicSystem& sys, SymMatrix sbar);

  GainKind gain_kind() const { return kind_; }
  GainRecipe recipe() const { return recipe_; }
  const PolytopicSystem& system() const { return *sys_; }

  bool needs_next_parameter() const override {
    return recipe_ == GainRecipe::thm3 || recipe_ == GainRecipe::t44;
  }
  Matrix gain(const Vector& p_now, const Vector* p_next) const override;

  /// Gain at vertex i for the polytopic recipes (thm1, rem1, t43, lti).
  Matrix vertex_gain(int i) const;

  /// Lyapunov vertex matrices in S form (Sbar_i = Pbar_i^{-1} where the
  /// certificate stores Pbar).
  std::vector<SymMatrix> sbars() const;
  /// Lyapunov vertex matrices in P form.
  std::vector<SymMatrix> pbars() const;

  nlohmann::json to_json(int sample_points = 5) const;
  static GainSchedule from_json(const PolytopicSystem& sys, const nlohmann::json& j);

 private:
  GainSchedule() = default;
  GainKind kind_ = GainKind::observer;
  GainRecipe recipe_ = GainRecipe::thm1;
  std::shared_ptr<const PolytopicSystem> sys_;
  std::vector<SymMatrix> lyap_;  // Pbar_i (observer recipes) or Sbar_i (controller)
  bool lyap_is_p_ = true;
  std::vector<Matrix> xs_, ys_;
  std::vector<std::vector<Matrix>> xijs_, yijs_;
};

/// Build the gain schedule that belongs to a feasible certificate of the
/// given condition (det_thm1, det_rem1, stab_thm3, synth_t43, synth_t44,
/// lti_det, lti_stab).
GainSchedule gain_from_certificate(ConditionId cond, const PolytopicSystem& sys,
                                   const std::map<std::string, Matrix>& matrices);

}  // namespace lpvcert
