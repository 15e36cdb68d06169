#include <doctest.h>

#include <random>
#include <sstream>

#include "lpvcert/lmi.hpp"

using namespace lpvcert;

TEST_CASE("declare and component counts") {
  LmiProblem prob;
  auto p1 = prob.declare_symmetric(4, "P_1");
  CHECK(p1.num_components() == 10);
  auto y1 = prob.declare_rectangular(4, 1, "Y_1");
  CHECK(y1.num_components() == 4);
  auto s = prob.declare_symmetric(1, "s");
  CHECK(s.num_components() == 1);
  CHECK_THROWS_AS(prob.declare_symmetric(2, "P_1"), std::invalid_argument);
}

TEST_CASE("add_constraint validation") {
  LmiProblem prob;
  auto p = prob.declare_symmetric(1, "P");
  AffineExpr e(1);
  e.add_term(p, 0.5 * Matrix::Identity(1, 1), Matrix::Identity(1, 1), 0, 0);
  prob.add_constraint(e, 1e-6, "pos");
  CHECK(prob.constraints().size() == 1);
  CHECK_THROWS_AS(prob.add_constraint(AffineExpr(1), -1.0, "bad"), std::invalid_argument);

  AffineExpr wrong(2);
  CHECK_THROWS_AS(wrong.add_term(p, Matrix::Identity(2, 2), Matrix::Identity(1, 1), 0, 0),
                  std::invalid_argument);

  LmiProblem other;
  auto q = other.declare_symmetric(1, "Q");
  AffineExpr foreign(1);
  foreign.add_term(q, 0.5 * Matrix::Identity(1, 1), Matrix::Identity(1, 1), 0, 0);
  // same id, different label: rejected as unknown
  LmiProblem third;
  third.declare_symmetric(1, "R");
  CHECK_THROWS_AS(third.add_constraint(foreign, 0.0, "x"), std::invalid_argument);
}

TEST_CASE("compile scalar problem") {
  LmiProblem prob;
  auto p = prob.declare_symmetric(1, "P");
  AffineExpr e(1);
  e.add_term(p, 0.5 * Matrix::Identity(1, 1), Matrix::Identity(1, 1), 0, 0);
  prob.add_constraint(e, 1e-6, "pos");
  auto c = compile(prob);
  CHECK(c.num_scalars() == 1);
  CHECK(c.blocks().size() == 1);
  CHECK(c.blocks()[0].f0(0, 0) == doctest::Approx(-1e-6));
  Vector x(1);
  x << 2.0;
  CHECK(c.eval_block(0, x)(0, 0) == doctest::Approx(2.0 - 1e-6));

  LmiProblem empty;
  CHECK_THROWS_AS(compile(empty), std::invalid_argument);
}

TEST_CASE("blocks stack independently and dimensions add") {
  LmiProblem prob;
  auto p = prob.declare_symmetric(2, "P");
  AffineExpr e1(2);
  e1.add_term(p, 0.5 * Matrix::Identity(2, 2), Matrix::Identity(2, 2), 0, 0);
  prob.add_constraint(e1, 0.0, "c1");
  AffineExpr e2(4);
  Matrix a(2, 2);
  a << 1, 2, 0, 1;
  e2.add_term(p, a, Matrix::Identity(2, 2), 2, 0);
  prob.add_constraint(e2, 0.0, "c2");
  auto c = compile(prob);
  CHECK(c.blocks()[0].dim + c.blocks()[1].dim == 6);
  CHECK(c.num_scalars() == 3);
}

TEST_CASE("compiled evaluation matches direct expression evaluation") {
  std::mt19937_64 rng(5);
  auto u = [&](double lo, double hi) { return lo + (hi - lo) * ((rng() >> 11) * 0x1.0p-53); };
  for (int rep = 0; rep < 50; ++rep) {
    LmiProblem prob;
    auto p = prob.declare_symmetric(3, "P");
    auto x = prob.declare_rectangular(3, 2, "X");
    Matrix l(5, 3), r(2, 5), c0(5, 5);
    for (int i = 0; i < l.size(); ++i) l.data()[i] = u(-2, 2);
    for (int i = 0; i < r.size(); ++i) r.data()[i] = u(-2, 2);
    for (int i = 0; i < c0.size(); ++i) c0.data()[i] = u(-2, 2);
    AffineExpr e{SymMatrix(c0)};
    e.add_term(p, l, l.transpose(), 0, 0);
    e.add_term(x, l, r, 0, 0);
    prob.add_constraint(e, 1e-7, "blk");
    auto comp = compile(prob);

    Vector assign(comp.num_scalars());
    for (int i = 0; i < assign.size(); ++i) assign(i) = u(-3, 3);
    auto mats = comp.materialize_all(assign);

    std::map<int, Matrix> byid;
    for (const auto& v : prob.vars()) byid[v.id] = mats.at(v.id);
    Matrix direct = e.evaluate(byid) - 1e-7 * Matrix::Identity(5, 5);
    Matrix compiled = comp.eval_block(0, assign);
    CHECK((direct - compiled).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("compilation is deterministic") {
  LmiProblem prob;
  auto p = prob.declare_symmetric(2, "P");
  AffineExpr e(2);
  e.add_term(p, 0.5 * Matrix::Identity(2, 2), Matrix::Identity(2, 2), 0, 0);
  prob.add_constraint(e, 1e-6, "c");
  auto c1 = compile(prob);
  auto c2 = compile(prob);
  std::ostringstream d1, d2;
  c1.dump(d1);
  c2.dump(d2);
  CHECK(d1.str() == d2.str());
  CHECK(!d1.str().empty());
}

TEST_CASE("materialize round-trips component basis") {
  LmiProblem prob;
  auto p = prob.declare_symmetric(3, "P");
  auto x = prob.declare_rectangular(2, 3, "X");
  AffineExpr e(3);
  e.add_term(p, 0.5 * Matrix::Identity(3, 3), Matrix::Identity(3, 3), 0, 0);
  prob.add_constraint(e, 0.0, "c");
  auto comp = compile(prob);
  for (const auto& v : {p, x}) {
    for (int c = 0; c < v.num_components(); ++c) {
      Vector assign = Vector::Zero(comp.num_scalars());
      assign(comp.var_offset(v.id) + c) = 1.0;
      Matrix m = comp.materialize(v, assign);
      CHECK((m - component_basis(v, c)).cwiseAbs().maxCoeff() == 0.0);
      auto [vid, cc] = comp.component_of(comp.var_offset(v.id) + c);
      CHECK(vid == v.id);
      CHECK(cc == c);
    }
  }
}
