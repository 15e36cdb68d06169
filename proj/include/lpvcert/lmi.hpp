#pragma once

#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "lpvcert/matcore.hpp"

namespace lpvcert {

enum class VarKind { symmetric, rectangular };

struct DecisionVar {
  int id = -1;
  VarKind kind = VarKind::symmetric;
  int rows = 0;
  int cols = 0;
  std::string label;

  /// Scalar components: n(n+1)/2 for symmetric(n), rows*cols otherwise.
  int num_components() const {
    return kind == VarKind::symmetric ? rows * (rows + 1) / 2 : rows * cols;
  }
};

/// One linear term of an affine block expression: place L * V * R with its
/// top-left corner at (row_off, col_off) and the transpose at the mirrored
/// position. A diagonal placement (row_off == col_off) therefore contributes
/// He(L V R) = L V R + (L V R)^T; use a 1/2 factor in L to place a plain
/// symmetric variable.
struct Placement {
  DecisionVar var;
  Matrix left;
  Matrix right;
  int row_off = 0;
  int col_off = 0;
};

/// Affine symmetric-matrix expression: constant + sum of placements.
class AffineExpr {
 public:
  explicit AffineExpr(SymMatrix constant) : constant_(std::move(constant)) {}
  explicit AffineExpr(int dim) : constant_(SymMatrix::zero(dim)) {}

  void add_term(const DecisionVar& v, Matrix left, Matrix right, int row_off, int col_off);

  int dim() const { return static_cast<int>(constant_.dim()); }
  const SymMatrix& constant() const { return constant_; }
  const std::vector<Placement>& terms() const { return terms_; }

  /// Evaluate with explicit variable values (by var id).
  Matrix evaluate(const std::map<int, Matrix>& values) const;

 private:
  SymMatrix constant_;
  std::vector<Placement> terms_;
};

struct Constraint {
  AffineExpr expr;
  double eps = 0.0;
  std::string label;
};

/// Registry of decision variables plus affine constraints "expr - eps I >= 0".
class LmiProblem {
 public:
  DecisionVar declare_symmetric(int n, const std::string& label);
  DecisionVar declare_rectangular(int rows, int cols, const std::string& label);
  void add_constraint(AffineExpr expr, double eps, const std::string& label);

  const std::vector<DecisionVar>& vars() const { return vars_; }
  const std::vector<Constraint>& constraints() const { return constraints_; }
  const DecisionVar& var_by_label(const std::string& label) const;

  /// Default strictness shift: 1e-6 relative to the largest constant entry.
  double default_eps() const;

 private:
  DecisionVar declare(VarKind kind, int rows, int cols, const std::string& label);
  std::vector<DecisionVar> vars_;
  std::vector<Constraint> constraints_;
};

struct CompiledBlock {
  int dim = 0;
  Matrix f0;  // constant minus eps I
  std::vector<Placement> terms;
  std::string label;
  double eps = 0.0;
};

/// Standard-form strict feasibility data: find x with
/// F_b(x) = F0_b + sum_k x_k F_kb > 0 for every block b. Scalar components
/// are packed variable by variable in declaration order; symmetric variables
/// use the lower triangle column by column, rectangular ones row-major.
class CompiledFeasibility {
 public:
  int num_scalars() const { return num_scalars_; }
  const std::vector<CompiledBlock>& blocks() const { return blocks_; }
  const std::vector<DecisionVar>& vars() const { return vars_; }
  int var_offset(int var_id) const { return offsets_.at(var_id); }

  /// Scalar index -> (var id, component within the variable).
  std::pair<int, int> component_of(int scalar_index) const;

  Matrix materialize(const DecisionVar& v, const Vector& x) const;
  std::map<int, Matrix> materialize_all(const Vector& x) const;
  std::map<std::string, Matrix> matrices_by_label(const Vector& x) const;

  /// F0_b + sum_k x_k F_kb for one block (includes the eps shift).
  Matrix eval_block(int b, const std::map<int, Matrix>& varmats) const;
  Matrix eval_block(int b, const Vector& x) const;

  /// Write one line per nonzero coefficient:
  /// "constraint_label block_row block_col var_label component coeff".
  void dump(std::ostream& os) const;

  friend CompiledFeasibility compile(const LmiProblem& problem);

 private:
  int num_scalars_ = 0;
  std::vector<CompiledBlock> blocks_;
  std::vector<DecisionVar> vars_;
  std::map<int, int> offsets_;  // var id -> first scalar index
};

CompiledFeasibility compile(const LmiProblem& problem);

/// Component basis matrix: the p x q (or n x n symmetric) matrix holding the
/// unit value of scalar component c of variable v.
Matrix component_basis(const DecisionVar& v, int component);

}  // namespace lpvcert
