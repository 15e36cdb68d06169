#include <doctest.h>

#include <random>

#include "lpvcert/matcore.hpp"

using namespace lpvcert;

namespace {

std::mt19937_64 rng_for(uint64_t seed) { return std::mt19937_64(seed); }

double unif(std::mt19937_64& rng, double lo, double hi) {
  return lo + (hi - lo) * ((rng() >> 11) * 0x1.0p-53);
}

SymMatrix random_sym(std::mt19937_64& rng, int n, double scale = 1.0) {
  Matrix m(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) m(i, j) = unif(rng, -scale, scale);
  return SymMatrix(m);
}

}  // namespace

TEST_CASE("positive definiteness basics") {
  CHECK(is_positive_definite(SymMatrix::identity(2), 1e-9));

  Matrix m(2, 2);
  m << 1, 2, 2, 1;  // eigenvalues -1, 3
  CHECK_FALSE(is_positive_definite(SymMatrix(m), 1e-9));

  // scalar detectability block: P - A^T P A + C^T C at P=1, A=0.5, C=1
  Matrix p(1, 1);
  p << 1.0 - 0.25 + 1.0;
  CHECK(is_positive_definite(SymMatrix(p), 1e-9));
  CHECK(p(0, 0) == doctest::Approx(1.75));

  Matrix bad(2, 2);
  bad.setConstant(std::numeric_limits<double>::quiet_NaN());
  CHECK_THROWS_AS(SymMatrix{bad}, std::invalid_argument);
  CHECK_THROWS_AS(is_positive_definite(SymMatrix::identity(2), 0.0), std::invalid_argument);
}

TEST_CASE("min eigenvalue") {
  Matrix d = Matrix::Zero(2, 2);
  d(0, 0) = 3;
  d(1, 1) = -2;
  CHECK(min_eigenvalue(SymMatrix(d)) == doctest::Approx(-2));
  CHECK(min_eigenvalue(SymMatrix::zero(3)) == doctest::Approx(0));
  Matrix m(2, 2);
  m << 2, 1, 1, 2;
  CHECK(min_eigenvalue(SymMatrix(m)) == doctest::Approx(1));
}

TEST_CASE("svec/smat") {
  Vector v = svec(SymMatrix::identity(2));
  CHECK(v.size() == 3);
  CHECK(v(0) == doctest::Approx(1));
  CHECK(v(1) == doctest::Approx(0));
  CHECK(v(2) == doctest::Approx(1));

  Matrix m(2, 2);
  m << 1, 2, 2, 3;
  Vector w = svec(SymMatrix(m));
  CHECK(w(0) == doctest::Approx(1));
  CHECK(w(1) == doctest::Approx(2 * std::sqrt(2.0)));
  CHECK(w(2) == doctest::Approx(3));

  auto rng = rng_for(7);
  SymMatrix r = random_sym(rng, 4);
  SymMatrix back = smat(svec(r));
  CHECK((back.mat() - r.mat()).cwiseAbs().maxCoeff() < 1e-14);

  CHECK_THROWS_AS(smat(Vector::Zero(4)), std::invalid_argument);
}

TEST_CASE("svec inner product preserves trace(AB)") {
  auto rng = rng_for(11);
  for (int rep = 0; rep < 500; ++rep) {
    int n = 2 + static_cast<int>(rng() % 4);
    SymMatrix a = random_sym(rng, n, 2.0);
    SymMatrix b = random_sym(rng, n, 2.0);
    double ip = svec(a).dot(svec(b));
    double tr = (a.mat() * b.mat()).trace();
    double bound = 1e-12 * a.mat().norm() * b.mat().norm() + 1e-14;
    CHECK(std::abs(ip - tr) <= bound);
  }
}

TEST_CASE("PSD check vs min eigenvalue on random matrices") {
  auto rng = rng_for(13);
  for (int rep = 0; rep < 1000; ++rep) {
    int n = 1 + static_cast<int>(rng() % 5);
    SymMatrix a = random_sym(rng, n);
    double tol = 1e-9;
    CHECK(is_positive_definite(a, tol) == (min_eigenvalue(a) > tol));
  }
}

TEST_CASE("spectral radius") {
  Matrix d = Matrix::Zero(2, 2);
  d(0, 0) = 0.5;
  d(1, 1) = -0.9;
  CHECK(spectral_radius(d) == doctest::Approx(0.9));

  Matrix rot(2, 2);
  rot << 0, -2, 2, 0;  // rotation by 90 degrees scaled by 2
  CHECK(spectral_radius(rot) == doctest::Approx(2.0));

  Matrix a0(4, 4);
  a0 << 4.0 / 5, -1.0 / 4, 0, 1,
        1, 0, 0, 0,
        0, 0, 1.0 / 5, 3.0 / 100,
        0, 0, 1, 0;
  // reference eigensolve gives exactly 0.5 for this matrix
  CHECK(spectral_radius(a0) == doctest::Approx(0.5).epsilon(1e-9));

  CHECK_THROWS_AS(spectral_radius(Matrix::Zero(2, 3)), std::invalid_argument);
}

TEST_CASE("spectral radius below one iff powers vanish") {
  auto rng = rng_for(17);
  int contracting = 0, expanding = 0;
  while (contracting < 200 || expanding < 50) {
    int n = 2 + static_cast<int>(rng() % 3);
    Matrix a(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) a(i, j) = unif(rng, -1, 1);
    double rho = spectral_radius(a);
    Matrix p = Matrix::Identity(n, n);
    for (int k = 0; k < 200; ++k) p = p * a;
    if (rho <= 0.9 && contracting < 200) {
      ++contracting;
      CHECK(p.norm() < 1e-6);
    } else if (rho >= 1.05 && expanding < 50) {
      ++expanding;
      CHECK(p.norm() > 1.0);
    }
  }
}
