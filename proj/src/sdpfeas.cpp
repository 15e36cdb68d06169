#include "lpvcert/sdpfeas.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>
#include <algorithm>
#include <cmath>
#include <iostream>

namespace lpvcert {

const char* to_string(FeasStatus s) {
  switch (s) {
    case FeasStatus::feasible: return "feasible";
    case FeasStatus::infeasible: return "infeasible";
    case FeasStatus::inconclusive: return "inconclusive";
  }
  return "?";
}

std::vector<double> verify_assignment(const CompiledFeasibility& problem, const Vector& x) {
  if (x.size() != problem.num_scalars())
    throw std::invalid_argument("verify_assignment: assignment length mismatch");
  auto varmats = problem.materialize_all(x);
  std::vector<double> margins;
  margins.reserve(problem.blocks().size());
  for (int b = 0; b < static_cast<int>(problem.blocks().size()); ++b)
    margins.push_back(min_eigenvalue(problem.eval_block(b, varmats)));
  return margins;
}

namespace {

struct Dyad {
  int a;  // column of L
  int b;  // row of R
};

struct VarInfo {
  VarKind kind;
  int p, q;
  int glob0;   // first scalar index
  int count;
  double scale;  // per-variable scaling
  // dyads per component (1 or 2 entries)
  std::vector<std::array<Dyad, 2>> dyads;
  std::vector<int> ndyads;
};

struct TermData {
  int vi;  // index into VarInfo vector
  Matrix L, R;  // L already multiplied by the variable scale
  int r0, c0;
};

struct BlockData {
  int n = 0;
  Matrix f0;
  std::vector<TermData> terms;
  struct Run {
    int vi;
    int glob0;
    int loc0;
    int count;
  };
  std::vector<Run> runs;
  std::vector<int> term_loc0;  // local offset of each term's variable
  int mloc = 0;
};

struct IterateState {
  std::vector<Eigen::LLT<Matrix>> llt;
  std::vector<Matrix> S;   // block values
  std::vector<Matrix> G;   // inverses
  std::vector<Matrix> G2;  // G*G
  double logdet_blocks = 0.0;
};

class Solver {
 public:
  Solver(const CompiledFeasibility& prob, const SolveOptions& opts) : prob_(prob), opts_(opts) {
    m_ = prob.num_scalars();
    build();
  }

  FeasibilityOutcome run();

 private:
  void build();
  bool eval_blocks(const Vector& xt, double t, IterateState& st, bool with_inverse) const;
  double barrier_value(const Vector& xt, const IterateState& st) const;
  Vector true_x(const Vector& xt) const;

  const CompiledFeasibility& prob_;
  SolveOptions opts_;
  int m_ = 0;
  std::vector<VarInfo> vars_;
  std::vector<BlockData> blocks_;
  std::vector<double> box_;  // per-scalar box radius in scaled units
  std::vector<double> comp_scale_;  // per-scalar variable scale
  double nu_ = 0.0;          // total barrier parameter
  double scale_data_ = 1.0;
  bool use_sparse_ = false;

  // sparse machinery
  Eigen::SparseMatrix<double> hsp_;
  std::vector<std::vector<int>> slot_;       // per block: mloc*mloc -> value slot (-1 if upper)
  std::vector<std::vector<int>> tslot_;      // per block: local col -> slot of (t, col)
  std::vector<int> diag_slot_;
  int tt_slot_ = -1;
};

void Solver::build() {
  const auto& pvars = prob_.vars();
  vars_.resize(pvars.size());
  for (size_t v = 0; v < pvars.size(); ++v) {
    VarInfo& vi = vars_[v];
    vi.kind = pvars[v].kind;
    vi.p = pvars[v].rows;
    vi.q = pvars[v].cols;
    vi.glob0 = prob_.var_offset(pvars[v].id);
    vi.count = pvars[v].num_components();
    vi.scale = 1.0;
    if (opts_.var_scaling) {
      if (opts_.var_scaling->size() != pvars.size())
        throw std::invalid_argument("var_scaling length must match number of variables");
      vi.scale = (*opts_.var_scaling)[v];
      if (!(vi.scale > 0)) throw std::invalid_argument("var_scaling entries must be > 0");
    }
    vi.dyads.resize(vi.count);
    vi.ndyads.resize(vi.count);
    if (vi.kind == VarKind::rectangular) {
      for (int c = 0; c < vi.count; ++c) {
        vi.dyads[c][0] = {c / vi.q, c % vi.q};
        vi.ndyads[c] = 1;
      }
    } else {
      int k = 0;
      for (int j = 0; j < vi.q; ++j)
        for (int i = j; i < vi.p; ++i) {
          vi.dyads[k][0] = {i, j};
          vi.ndyads[k] = 1;
          if (i != j) {
            vi.dyads[k][1] = {j, i};
            vi.ndyads[k] = 2;
          }
          ++k;
        }
    }
  }

  box_.assign(m_, opts_.trust_region);
  comp_scale_.assign(m_, 1.0);
  for (const auto& vi : vars_)
    for (int c = 0; c < vi.count; ++c) {
      box_[vi.glob0 + c] = opts_.trust_region / vi.scale;
      comp_scale_[vi.glob0 + c] = vi.scale;
    }

  nu_ = 2.0 * m_;
  scale_data_ = 0.0;
  blocks_.resize(prob_.blocks().size());
  for (size_t b = 0; b < prob_.blocks().size(); ++b) {
    const CompiledBlock& src = prob_.blocks()[b];
    BlockData& bd = blocks_[b];
    bd.n = src.dim;
    bd.f0 = src.f0;
    nu_ += src.dim;
    scale_data_ = std::max(scale_data_, bd.f0.cwiseAbs().maxCoeff());
    for (const auto& t : src.terms) {
      TermData td;
      td.vi = t.var.id;  // var ids are positional indices
      td.L = vars_[td.vi].scale * t.left;
      td.R = t.right;
      td.r0 = t.row_off;
      td.c0 = t.col_off;
      scale_data_ = std::max(scale_data_,
                             t.left.cwiseAbs().maxCoeff() * t.right.cwiseAbs().maxCoeff());
      bd.terms.push_back(std::move(td));
    }
    // distinct variable runs, in ascending global offset
    std::vector<int> vis;
    for (const auto& t : bd.terms) vis.push_back(t.vi);
    std::sort(vis.begin(), vis.end());
    vis.erase(std::unique(vis.begin(), vis.end()), vis.end());
    std::sort(vis.begin(), vis.end(),
              [&](int a, int c) { return vars_[a].glob0 < vars_[c].glob0; });
    int loc = 0;
    for (int vi : vis) {
      bd.runs.push_back({vi, vars_[vi].glob0, loc, vars_[vi].count});
      loc += vars_[vi].count;
    }
    bd.mloc = loc;
    for (const auto& t : bd.terms) {
      int l0 = -1;
      for (const auto& r : bd.runs)
        if (r.vi == t.vi) l0 = r.loc0;
      bd.term_loc0.push_back(l0);
    }
  }
  if (scale_data_ <= 0) scale_data_ = 1.0;

  use_sparse_ = (m_ + 1) > 3000;
  if (!use_sparse_) return;

  // sparse lower-triangular pattern (t is the last index, m_)
  std::vector<Eigen::Triplet<double>> trips;
  for (int k = 0; k <= m_; ++k) trips.emplace_back(k, k, 0.0);
  for (const auto& bd : blocks_) {
    for (const auto& r1 : bd.runs)
      for (const auto& r2 : bd.runs)
        for (int i = 0; i < r1.count; ++i)
          for (int j = 0; j < r2.count; ++j) {
            int gr = r1.glob0 + i, gc = r2.glob0 + j;
            if (gr >= gc) trips.emplace_back(gr, gc, 0.0);
          }
    for (const auto& r : bd.runs)
      for (int j = 0; j < r.count; ++j) trips.emplace_back(m_, r.glob0 + j, 0.0);
  }
  hsp_.resize(m_ + 1, m_ + 1);
  hsp_.setFromTriplets(trips.begin(), trips.end());
  hsp_.makeCompressed();

  auto slot_of = [&](int row, int col) {
    for (int idx = hsp_.outerIndexPtr()[col]; idx < hsp_.outerIndexPtr()[col + 1]; ++idx)
      if (hsp_.innerIndexPtr()[idx] == row) return idx;
    return -1;
  };
  diag_slot_.resize(m_ + 1);
  for (int k = 0; k <= m_; ++k) diag_slot_[k] = slot_of(k, k);
  tt_slot_ = diag_slot_[m_];
  slot_.resize(blocks_.size());
  tslot_.resize(blocks_.size());
  for (size_t b = 0; b < blocks_.size(); ++b) {
    const BlockData& bd = blocks_[b];
    slot_[b].assign(static_cast<size_t>(bd.mloc) * bd.mloc, -1);
    tslot_[b].assign(bd.mloc, -1);
    for (const auto& r1 : bd.runs)
      for (const auto& r2 : bd.runs)
        for (int i = 0; i < r1.count; ++i)
          for (int j = 0; j < r2.count; ++j) {
            int gr = r1.glob0 + i, gc = r2.glob0 + j;
            if (gr >= gc)
              slot_[b][static_cast<size_t>(r1.loc0 + i) * bd.mloc + (r2.loc0 + j)] = slot_of(gr, gc);
          }
    for (const auto& r : bd.runs)
      for (int j = 0; j < r.count; ++j) tslot_[b][r.loc0 + j] = slot_of(m_, r.glob0 + j);
  }
}

bool Solver::eval_blocks(const Vector& xt, double t, IterateState& st, bool with_inverse) const {
  const size_t nb = blocks_.size();
  st.S.resize(nb);
  st.llt.resize(nb);
  if (with_inverse) {
    st.G.resize(nb);
    st.G2.resize(nb);
  }
  st.logdet_blocks = 0.0;
  std::vector<Matrix> varmats(vars_.size());
  for (size_t v = 0; v < vars_.size(); ++v) {
    const VarInfo& vi = vars_[v];
    Matrix mmat = Matrix::Zero(vi.p, vi.q);
    if (vi.kind == VarKind::rectangular) {
      for (int c = 0; c < vi.count; ++c) mmat(c / vi.q, c % vi.q) = xt(vi.glob0 + c);
    } else {
      int k = 0;
      for (int j = 0; j < vi.q; ++j)
        for (int i = j; i < vi.p; ++i) {
          mmat(i, j) = xt(vi.glob0 + k);
          mmat(j, i) = xt(vi.glob0 + k);
          ++k;
        }
    }
    varmats[v] = std::move(mmat);
  }
  for (size_t b = 0; b < nb; ++b) {
    const BlockData& bd = blocks_[b];
    Matrix s = bd.f0;
    for (const auto& term : bd.terms) {
      Matrix contrib = term.L * varmats[term.vi] * term.R;
      s.block(term.r0, term.c0, contrib.rows(), contrib.cols()) += contrib;
      s.block(term.c0, term.r0, contrib.cols(), contrib.rows()) += contrib.transpose();
    }
    s.diagonal().array() -= t;
    st.S[b] = 0.5 * (s + s.transpose());
    st.llt[b].compute(st.S[b]);
    if (st.llt[b].info() != Eigen::Success) return false;
    const auto& lmat = st.llt[b].matrixLLT();
    for (int i = 0; i < bd.n; ++i) {
      const double d = lmat(i, i);
      if (!(d > 0) || !std::isfinite(d)) return false;
      st.logdet_blocks += 2.0 * std::log(d);
    }
    if (with_inverse) {
      st.G[b] = st.llt[b].solve(Matrix::Identity(bd.n, bd.n));
      st.G[b] = 0.5 * (st.G[b] + st.G[b].transpose()).eval();
      st.G2[b] = st.G[b] * st.G[b];
    }
  }
  return true;
}

double Solver::barrier_value(const Vector& xt, const IterateState& st) const {
  double phi = -st.logdet_blocks;
  for (int k = 0; k < m_; ++k) {
    const double lo = box_[k] + xt(k), hi = box_[k] - xt(k);
    if (!(lo > 0) || !(hi > 0)) return std::numeric_limits<double>::infinity();
    phi -= std::log(lo) + std::log(hi);
  }
  return phi;
}

Vector Solver::true_x(const Vector& xt) const {
  Vector x(m_);
  for (int k = 0; k < m_; ++k) x(k) = comp_scale_[k] * xt(k);
  return x;
}

FeasibilityOutcome Solver::run() {
  FeasibilityOutcome out;
  IterateState st;
  Vector xt = Vector::Zero(m_);

  double min_l0 = std::numeric_limits<double>::infinity();
  for (size_t b = 0; b < blocks_.size(); ++b)
    min_l0 = std::min(min_l0, min_eigenvalue(prob_.blocks()[b].f0));
  double t = min_l0 - (0.1 * scale_data_ + 0.1 * std::abs(min_l0));
  if (!eval_blocks(xt, t, st, true)) {
    out.diagnostic = "failed to construct an interior starting point";
    return out;
  }

  // Start on the central path: at x = 0 the box terms are exactly centered
  // and the block slacks have mean tr(S)/sum(n_b), which is the mu whose
  // center is nearest to the starting point.
  double trs = 0.0, nblk = 0.0;
  for (size_t b = 0; b < blocks_.size(); ++b) {
    trs += st.S[b].trace();
    nblk += blocks_[b].n;
  }
  double mu = std::max(trs / std::max(1.0, nblk), 1e-12 * scale_data_);
  double trg = 0.0;

  double best_margin = -std::numeric_limits<double>::infinity();
  Vector best_x = xt;
  double best_bound = std::numeric_limits<double>::infinity();
  double prev_outer_margin = -std::numeric_limits<double>::infinity();
  int stall_count = 0;
  int stagnant = 0;

  Vector grad(m_ + 1), gS(m_);
  Matrix hdense;
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>, Eigen::Lower> sldlt;
  bool analyzed = false;
  std::vector<Matrix> hloc(blocks_.size());
  for (size_t b = 0; b < blocks_.size(); ++b) hloc[b].resize(blocks_[b].mloc, blocks_[b].mloc);

  const double eta = 0.3;     // centering threshold on the Newton decrement
  const double sigma = 0.15;  // barrier parameter reduction

  auto finish_feasible = [&](const std::string& why) {
    Vector x = true_x(best_x);
    auto margins = verify_assignment(prob_, x);
    double vm = *std::min_element(margins.begin(), margins.end());
    if (!(vm > 0)) {
      out.status = FeasStatus::inconclusive;
      out.diagnostic = "verification mismatch after " + why;
      return out;
    }
    out.status = FeasStatus::feasible;
    out.assignment = x;
    out.margin = vm;
    out.upper_bound = best_bound;
    out.diagnostic = why;
    return out;
  };

  for (int iter = 0; iter < opts_.max_iterations; ++iter) {
    out.iterations = iter + 1;

    // verified margin of the current x (the -tI shift cancels out)
    double margin_now = std::numeric_limits<double>::infinity();
    for (size_t b = 0; b < blocks_.size(); ++b)
      margin_now = std::min(margin_now, min_eigenvalue(st.S[b]) + t);
    if (margin_now > best_margin) {
      best_margin = margin_now;
      best_x = xt;
    }

    // gradient of the block barrier w.r.t. x, plus data for the dual bound
    gS.setZero();
    double f0G = 0.0;
    trg = 0.0;
    for (size_t b = 0; b < blocks_.size(); ++b) {
      const BlockData& bd = blocks_[b];
      const Matrix& g = st.G[b];
      f0G += (bd.f0.array() * g.array()).sum();
      trg += g.trace();
      for (const auto& term : bd.terms) {
        const VarInfo& vi = vars_[term.vi];
        Matrix d = term.L.transpose() *
                   g.block(term.r0, term.c0, term.L.rows(), term.R.cols()) * term.R.transpose();
        for (int c = 0; c < vi.count; ++c) {
          double s = 0.0;
          for (int r = 0; r < vi.ndyads[c]; ++r) s += d(vi.dyads[c][r].a, vi.dyads[c][r].b);
          gS(vi.glob0 + c) -= 2.0 * s;
        }
      }
    }
    double bound = std::numeric_limits<double>::infinity();
    if (trg > 0) {
      double acc = f0G;
      for (int k = 0; k < m_; ++k) acc += box_[k] * std::abs(gS(k));
      bound = acc / trg;
    }
    best_bound = std::min(best_bound, bound);

    // A certified bound below half the feasibility threshold proves that no
    // point with margin > eps_feas exists inside the trust region. Demanding
    // a bound strictly below zero would be undecidable in floating point for
    // homogeneous problems whose exact optimum is t* = 0.
    if (best_bound <= 0.5 * opts_.eps_feas) {
      out.status = FeasStatus::infeasible;
      out.margin = best_bound;
      out.upper_bound = best_bound;
      out.diagnostic = "certified margin upper bound below the feasibility threshold";
      return out;
    }
    const double cap = std::min(opts_.margin_cap, opts_.margin_cap_rel * scale_data_);
    if (best_margin > opts_.eps_feas) {
      if (best_margin >= cap) return finish_feasible("margin cap reached");
      if (best_bound - best_margin <= opts_.gap_rel * best_margin)
        return finish_feasible("margin within gap tolerance of the certified optimum");
    }
    if (mu * nu_ <= opts_.tol * std::max(1e-3 * scale_data_, std::abs(best_margin))) {
      if (best_margin > opts_.eps_feas) return finish_feasible("barrier path exhausted");
      // The path was followed down to numerical resolution without ever
      // finding an eps_feas margin; the achievable margin is at the path
      // limit, below the threshold. The dual bound cannot always certify
      // this (the trust region amplifies any dual residual), so the verdict
      // is recorded as infeasible with an explicit uncertified marker.
      out.status = FeasStatus::infeasible;
      out.margin = best_margin;
      out.upper_bound = best_bound;
      out.diagnostic = "barrier path exhausted below the margin threshold (uncertified)";
      return out;
    }
    if (stagnant >= 8) {
      if (best_margin > opts_.eps_feas) return finish_feasible("iterates stagnated");
      out.status = FeasStatus::infeasible;
      out.margin = best_margin;
      out.upper_bound = best_bound;
      out.diagnostic = "iterates stagnated below the margin threshold (uncertified)";
      return out;
    }

    // full gradient
    grad.head(m_) = gS;
    for (int k = 0; k < m_; ++k) grad(k) += 1.0 / (box_[k] - xt(k)) - 1.0 / (box_[k] + xt(k));
    grad(m_) = -1.0 / mu + trg;

    // Hessian
    if (!use_sparse_) {
      hdense.setZero(m_ + 1, m_ + 1);
    } else {
      std::fill(hsp_.valuePtr(), hsp_.valuePtr() + hsp_.nonZeros(), 0.0);
    }
    double htt = 0.0;
    Vector htx = Vector::Zero(m_);
    for (size_t b = 0; b < blocks_.size(); ++b) {
      const BlockData& bd = blocks_[b];
      const Matrix& g = st.G[b];
      const Matrix& g2 = st.G2[b];
      htt += g.squaredNorm();
      for (const auto& term : bd.terms) {
        const VarInfo& vi = vars_[term.vi];
        Matrix e = term.L.transpose() *
                   g2.block(term.r0, term.c0, term.L.rows(), term.R.cols()) * term.R.transpose();
        for (int c = 0; c < vi.count; ++c) {
          double s = 0.0;
          for (int r = 0; r < vi.ndyads[c]; ++r) s += e(vi.dyads[c][r].a, vi.dyads[c][r].b);
          htx(vi.glob0 + c) -= 2.0 * s;
        }
      }
      Matrix& hl = hloc[b];
      hl.setZero();
      const int nterms = static_cast<int>(bd.terms.size());
      for (int s = 0; s < nterms; ++s) {
        const TermData& ts = bd.terms[s];
        const VarInfo& vs = vars_[ts.vi];
        const int ls0 = bd.term_loc0[s];
        for (int u = 0; u < nterms; ++u) {
          const TermData& tu = bd.terms[u];
          const VarInfo& vu = vars_[tu.vi];
          const int lu0 = bd.term_loc0[u];
          Matrix puu = ts.L.transpose() * g.block(ts.r0, tu.r0, ts.L.rows(), tu.L.rows()) * tu.L;
          Matrix puv = ts.L.transpose() * g.block(ts.r0, tu.c0, ts.L.rows(), tu.R.cols()) *
                       tu.R.transpose();
          Matrix pvu = ts.R * g.block(ts.c0, tu.r0, ts.R.cols(), tu.L.rows()) * tu.L;
          Matrix pvv = ts.R * g.block(ts.c0, tu.c0, ts.R.cols(), tu.R.cols()) * tu.R.transpose();
          for (int cs = 0; cs < vs.count; ++cs) {
            const auto& dys = vs.dyads[cs];
            const int nds = vs.ndyads[cs];
            double* hrow = hl.data() + (ls0 + cs);  // column-major: row index
            for (int cu = 0; cu < vu.count; ++cu) {
              const auto& dyu = vu.dyads[cu];
              const int ndu = vu.ndyads[cu];
              double acc = 0.0;
              for (int r1 = 0; r1 < nds; ++r1)
                for (int r2 = 0; r2 < ndu; ++r2)
                  acc += puu(dys[r1].a, dyu[r2].a) * pvv(dys[r1].b, dyu[r2].b) +
                         puv(dys[r1].a, dyu[r2].b) * pvu(dys[r1].b, dyu[r2].a);
              hrow[static_cast<size_t>(lu0 + cu) * bd.mloc] += 2.0 * acc;
            }
          }
        }
      }
      if (!use_sparse_) {
        for (const auto& r1 : bd.runs)
          for (const auto& r2 : bd.runs)
            hdense.block(r1.glob0, r2.glob0, r1.count, r2.count) +=
                hl.block(r1.loc0, r2.loc0, r1.count, r2.count);
      } else {
        double* vals = hsp_.valuePtr();
        const auto& sl = slot_[b];
        for (int j = 0; j < bd.mloc; ++j)
          for (int i = 0; i < bd.mloc; ++i) {
            const int slot = sl[static_cast<size_t>(i) * bd.mloc + j];
            if (slot >= 0) vals[slot] += hl(i, j);
          }
      }
    }
    if (!use_sparse_) {
      for (int k = 0; k < m_; ++k) {
        const double lo = box_[k] + xt(k), hi = box_[k] - xt(k);
        hdense(k, k) += 1.0 / (lo * lo) + 1.0 / (hi * hi);
      }
      hdense.col(m_).head(m_) = htx;
      hdense.row(m_).head(m_) = htx.transpose();
      hdense(m_, m_) = htt;
    } else {
      double* vals = hsp_.valuePtr();
      for (int k = 0; k < m_; ++k) {
        const double lo = box_[k] + xt(k), hi = box_[k] - xt(k);
        vals[diag_slot_[k]] += 1.0 / (lo * lo) + 1.0 / (hi * hi);
      }
      std::vector<char> written(m_, 0);
      for (size_t b = 0; b < blocks_.size(); ++b) {
        const BlockData& bd = blocks_[b];
        for (const auto& r : bd.runs)
          for (int j = 0; j < r.count; ++j) {
            const int k = r.glob0 + j;
            if (!written[k]) {
              vals[tslot_[b][r.loc0 + j]] += htx(k);
              written[k] = 1;
            }
          }
      }
      vals[tt_slot_] += htt;
    }

    // Newton solve
    Vector step(m_ + 1);
    bool solved = false;
    if (!use_sparse_) {
      Vector d = hdense.diagonal().cwiseMax(1e-300).cwiseSqrt().cwiseInverse();
      Matrix hs = d.asDiagonal() * hdense * d.asDiagonal();
      Vector rhs = -(d.asDiagonal() * grad);
      for (int attempt = 0; attempt < 4 && !solved; ++attempt) {
        Matrix hreg = hs;
        if (attempt > 0) hreg.diagonal().array() += std::pow(10.0, -12 + 3 * attempt);
        Eigen::LDLT<Matrix> ldlt(hreg);
        if (ldlt.info() != Eigen::Success) continue;
        Vector y = ldlt.solve(rhs);
        step = d.asDiagonal() * y;
        if (step.allFinite() && grad.dot(step) < 0) solved = true;
      }
    } else {
      double* vals = hsp_.valuePtr();
      for (int attempt = 0; attempt < 4 && !solved; ++attempt) {
        if (attempt > 0)
          for (int k = 0; k <= m_; ++k)
            vals[diag_slot_[k]] += std::pow(10.0, -12 + 3 * attempt) *
                                   std::max(1.0, std::abs(vals[diag_slot_[k]]));
        if (!analyzed) {
          sldlt.analyzePattern(hsp_);
          analyzed = true;
        }
        sldlt.factorize(hsp_);
        if (sldlt.info() != Eigen::Success) continue;
        step = sldlt.solve(-grad);
        if (step.allFinite() && grad.dot(step) < 0) solved = true;
      }
    }
    if (!solved) {
      if (best_margin > opts_.eps_feas) return finish_feasible("Newton system breakdown");
      out.status = FeasStatus::inconclusive;
      out.margin = best_margin;
      out.upper_bound = best_bound;
      out.diagnostic = "Newton system breakdown";
      return out;
    }

    double decrement2 = -grad.dot(step);
    if (decrement2 <= eta * eta) {
      // centered at this mu: the margin at consecutive centers tracks the
      // path limit, so a stall means the max-margin value has converged
      if (best_margin > opts_.eps_feas) {
        if (best_margin - prev_outer_margin <= 0.02 * std::abs(best_margin)) {
          if (++stall_count >= 2) return finish_feasible("margin stalled at the path limit");
        } else {
          stall_count = 0;
        }
      }
      prev_outer_margin = best_margin;
      // shrink mu and retake the step from the same Hessian
      int shrinks = 0;
      while (decrement2 <= eta * eta && shrinks < 60) {
        mu *= sigma;
        ++shrinks;
        grad(m_) = -1.0 / mu + trg;
        if (!use_sparse_) {
          Vector d = hdense.diagonal().cwiseMax(1e-300).cwiseSqrt().cwiseInverse();
          Matrix hs = d.asDiagonal() * hdense * d.asDiagonal();
          Eigen::LDLT<Matrix> ldlt(hs);
          Vector y = ldlt.solve(-(d.asDiagonal() * grad));
          step = d.asDiagonal() * y;
        } else {
          step = sldlt.solve(-grad);
        }
        if (!step.allFinite()) break;
        decrement2 = -grad.dot(step);
      }
      if (!step.allFinite() || decrement2 <= 0) {
        if (best_margin > opts_.eps_feas) return finish_feasible("stalled near the central path");
        out.status = FeasStatus::inconclusive;
        out.margin = best_margin;
        out.upper_bound = best_bound;
        out.diagnostic = "stalled near the central path";
        return out;
      }
    }

    // line search
    double alpha = 1.0;
    for (int k = 0; k < m_; ++k) {
      if (step(k) > 0) alpha = std::min(alpha, 0.995 * (box_[k] - xt(k)) / step(k));
      else if (step(k) < 0) alpha = std::min(alpha, 0.995 * (-box_[k] - xt(k)) / step(k));
    }
    const double f_cur = -t / mu + barrier_value(xt, st);
    const double slope = grad.dot(step);
    bool stepped = false;
    IterateState trial;
    for (int ls = 0; ls < 60 && !stepped; ++ls) {
      Vector xn = xt + alpha * step.head(m_);
      double tn = t + alpha * step(m_);
      if (eval_blocks(xn, tn, trial, false)) {
        double fn = -tn / mu + barrier_value(xn, trial);
        if (std::isfinite(fn) && fn <= f_cur + 1e-4 * alpha * slope) {
          xt = xn;
          t = tn;
          stepped = true;
        }
      }
      if (!stepped) alpha *= 0.5;
    }
    if (stepped) {
      const double move =
          alpha * step.lpNorm<Eigen::Infinity>() / (1.0 + std::abs(t) + xt.lpNorm<Eigen::Infinity>());
      if (move <= 1e-13) ++stagnant;
      else stagnant = 0;
    }
    if (!stepped) {
      if (best_margin > opts_.eps_feas) return finish_feasible("line search breakdown");
      out.status = FeasStatus::inconclusive;
      out.margin = best_margin;
      out.upper_bound = best_bound;
      out.diagnostic = "line search breakdown";
      return out;
    }
    if (!eval_blocks(xt, t, st, true)) {
      if (best_margin > opts_.eps_feas) return finish_feasible("lost interiority");
      out.status = FeasStatus::inconclusive;
      out.margin = best_margin;
      out.upper_bound = best_bound;
      out.diagnostic = "lost interiority after a step";
      return out;
    }
    if (opts_.verbose)
      std::cerr << "ipm iter=" << iter << " mu=" << mu << " t=" << t << " margin=" << best_margin
                << " bound=" << best_bound << " bound_now=" << bound << " trg=" << trg
                << " f0G=" << f0G << " alpha=" << alpha << "\n";
  }

  if (best_margin > opts_.eps_feas) return finish_feasible("iteration limit reached");
  out.status = FeasStatus::inconclusive;
  out.margin = best_margin;
  out.upper_bound = best_bound;
  out.diagnostic = "iteration limit reached";
  return out;
}

}  // namespace

FeasibilityOutcome InteriorPointSolver::solve(const CompiledFeasibility& problem,
                                              const SolveOptions& opts) {
  if (opts.max_iterations < 1 || !(opts.tol > 0) || !(opts.eps_feas > 0) ||
      !(opts.trust_region > 0))
    throw std::invalid_argument("SolveOptions fields must be positive");
  Solver s(problem, opts);
  return s.run();
}

FeasibilityOutcome solve_feasibility(const CompiledFeasibility& problem, const SolveOptions& opts) {
  InteriorPointSolver s;
  return s.solve(problem, opts);
}

}  // namespace lpvcert
