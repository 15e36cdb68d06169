#include "lpvcert/lmi.hpp"

#include <ostream>
#include <stdexcept>

namespace lpvcert {

void AffineExpr::add_term(const DecisionVar& v, Matrix left, Matrix right, int row_off, int col_off) {
  if (left.cols() != v.rows || right.rows() != v.cols)
    throw std::invalid_argument("AffineExpr::add_term: coefficient shapes do not match variable " + v.label);
  if (row_off < 0 || col_off < 0 || row_off + left.rows() > dim() || col_off + right.cols() > dim())
    throw std::invalid_argument("AffineExpr::add_term: placement exceeds expression dimension");
  require_finite(left, "add_term left");
  require_finite(right, "add_term right");
  terms_.push_back({v, std::move(left), std::move(right), row_off, col_off});
}

Matrix AffineExpr::evaluate(const std::map<int, Matrix>& values) const {
  Matrix s = constant_.mat();
  for (const auto& t : terms_) {
    const Matrix& v = values.at(t.var.id);
    Matrix contrib = t.left * v * t.right;
    s.block(t.row_off, t.col_off, contrib.rows(), contrib.cols()) += contrib;
    s.block(t.col_off, t.row_off, contrib.cols(), contrib.rows()) += contrib.transpose();
  }
  return s;
}

DecisionVar LmiProblem::declare(VarKind kind, int rows, int cols, const std::string& label) {
  if (rows < 1 || cols < 1) throw std::invalid_argument("declare: dimensions must be >= 1");
  for (const auto& v : vars_)
    if (v.label == label) throw std::invalid_argument("declare: duplicate label " + label);
  DecisionVar v{static_cast<int>(vars_.size()), kind, rows, cols, label};
  vars_.push_back(v);
  return v;
}

DecisionVar LmiProblem::declare_symmetric(int n, const std::string& label) {
  return declare(VarKind::symmetric, n, n, label);
}

DecisionVar LmiProblem::declare_rectangular(int rows, int cols, const std::string& label) {
  return declare(VarKind::rectangular, rows, cols, label);
}

void LmiProblem::add_constraint(AffineExpr expr, double eps, const std::string& label) {
  if (!(eps >= 0)) throw std::invalid_argument("add_constraint: eps must be >= 0");
  for (const auto& t : expr.terms()) {
    if (t.var.id < 0 || t.var.id >= static_cast<int>(vars_.size()) ||
        vars_[t.var.id].label != t.var.label)
      throw std::invalid_argument("add_constraint: unknown variable " + t.var.label);
  }
  constraints_.push_back({std::move(expr), eps, label});
}

const DecisionVar& LmiProblem::var_by_label(const std::string& label) const {
  for (const auto& v : vars_)
    if (v.label == label) return v;
  throw std::invalid_argument("no variable labelled " + label);
}

double LmiProblem::default_eps() const {
  double scale = 0.0;
  for (const auto& c : constraints_)
    scale = std::max(scale, c.expr.constant().mat().cwiseAbs().maxCoeff());
  return 1e-6 * (scale > 0 ? scale : 1.0);
}

CompiledFeasibility compile(const LmiProblem& problem) {
  if (problem.constraints().empty()) throw std::invalid_argument("compile: empty problem");
  CompiledFeasibility c;
  c.vars_ = problem.vars();
  int off = 0;
  for (const auto& v : c.vars_) {
    c.offsets_[v.id] = off;
    off += v.num_components();
  }
  c.num_scalars_ = off;
  for (const auto& con : problem.constraints()) {
    CompiledBlock b;
    b.dim = con.expr.dim();
    b.f0 = con.expr.constant().mat() - con.eps * Matrix::Identity(b.dim, b.dim);
    b.terms = con.expr.terms();
    b.label = con.label;
    b.eps = con.eps;
    c.blocks_.push_back(std::move(b));
  }
  return c;
}

std::pair<int, int> CompiledFeasibility::component_of(int scalar_index) const {
  for (const auto& v : vars_) {
    const int off = offsets_.at(v.id);
    if (scalar_index >= off && scalar_index < off + v.num_components())
      return {v.id, scalar_index - off};
  }
  throw std::out_of_range("component_of: scalar index out of range");
}

Matrix component_basis(const DecisionVar& v, int component) {
  Matrix e = Matrix::Zero(v.rows, v.cols);
  if (v.kind == VarKind::rectangular) {
    e(component / v.cols, component % v.cols) = 1.0;
    return e;
  }
  int k = 0;
  for (int j = 0; j < v.cols; ++j)
    for (int i = j; i < v.rows; ++i) {
      if (k == component) {
        e(i, j) = 1.0;
        e(j, i) = 1.0;
        return e;
      }
      ++k;
    }
  throw std::out_of_range("component_basis: component out of range");
}

Matrix CompiledFeasibility::materialize(const DecisionVar& v, const Vector& x) const {
  const int off = offsets_.at(v.id);
  Matrix m = Matrix::Zero(v.rows, v.cols);
  if (v.kind == VarKind::rectangular) {
    for (int i = 0; i < v.rows; ++i)
      for (int j = 0; j < v.cols; ++j) m(i, j) = x(off + i * v.cols + j);
    return m;
  }
  int k = 0;
  for (int j = 0; j < v.cols; ++j)
    for (int i = j; i < v.rows; ++i) {
      m(i, j) = x(off + k);
      m(j, i) = x(off + k);
      ++k;
    }
  return m;
}

std::map<int, Matrix> CompiledFeasibility::materialize_all(const Vector& x) const {
  if (x.size() != num_scalars_) throw std::invalid_argument("assignment length mismatch");
  std::map<int, Matrix> out;
  for (const auto& v : vars_) out.emplace(v.id, materialize(v, x));
  return out;
}

std::map<std::string, Matrix> CompiledFeasibility::matrices_by_label(const Vector& x) const {
  std::map<std::string, Matrix> out;
  for (const auto& v : vars_) out.emplace(v.label, materialize(v, x));
  return out;
}

Matrix CompiledFeasibility::eval_block(int b, const std::map<int, Matrix>& varmats) const {
  const CompiledBlock& blk = blocks_.at(b);
  Matrix s = blk.f0;
  for (const auto& t : blk.terms) {
    Matrix contrib = t.left * varmats.at(t.var.id) * t.right;
    s.block(t.row_off, t.col_off, contrib.rows(), contrib.cols()) += contrib;
    s.block(t.col_off, t.row_off, contrib.cols(), contrib.rows()) += contrib.transpose();
  }
  return s;
}

Matrix CompiledFeasibility::eval_block(int b, const Vector& x) const {
  return eval_block(b, materialize_all(x));
}

void CompiledFeasibility::dump(std::ostream& os) const {
  for (const auto& blk : blocks_) {
    for (Eigen::Index r = 0; r < blk.f0.rows(); ++r)
      for (Eigen::Index cidx = 0; cidx < blk.f0.cols(); ++cidx)
        if (blk.f0(r, cidx) != 0.0)
          os << blk.label << ' ' << r << ' ' << cidx << " const - " << blk.f0(r, cidx) << '\n';
    for (const auto& v : vars_) {
      for (int comp = 0; comp < v.num_components(); ++comp) {
        Matrix fk = Matrix::Zero(blk.dim, blk.dim);
        Matrix basis = component_basis(v, comp);
        bool touched = false;
        for (const auto& t : blk.terms) {
          if (t.var.id != v.id) continue;
          touched = true;
          Matrix contrib = t.left * basis * t.right;
          fk.block(t.row_off, t.col_off, contrib.rows(), contrib.cols()) += contrib;
          fk.block(t.col_off, t.row_off, contrib.cols(), contrib.rows()) += contrib.transpose();
        }
        if (!touched) continue;
        for (Eigen::Index r = 0; r < fk.rows(); ++r)
          for (Eigen::Index cidx = 0; cidx < fk.cols(); ++cidx)
            if (fk(r, cidx) != 0.0)
              os << blk.label << ' ' << r << ' ' << cidx << ' ' << v.label << ' ' << comp << ' '
                 << fk(r, cidx) << '\n';
      }
    }
  }
}

}  // namespace lpvcert
