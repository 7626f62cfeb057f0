#include <cmath>
#include <stdexcept>

#include "doctest.h"
#include "kolmonet/affine.hpp"
#include "kolmonet/rng.hpp"

using namespace kolmonet;

TEST_CASE("apply computes A x + b and validates shapes") {
  AffineMap m;
  m.A.resize(2, 2);
  m.A << 1.0, 2.0, 3.0, 4.0;
  m.b.resize(2);
  m.b << 0.5, -0.5;
  Vector x(2);
  x << 1.0, -1.0;
  const Vector y = apply(m, x);
  CHECK(y[0] == -0.5);
  CHECK(y[1] == -1.5);

  CHECK_THROWS_AS(apply(m, Vector::Zero(3)), std::invalid_argument);
  AffineMap bad{Matrix::Zero(2, 3), Vector::Zero(2)};
  CHECK_THROWS_AS(apply(bad, Vector::Zero(3)), std::invalid_argument);
  AffineMap bad_b{Matrix::Identity(2, 2), Vector::Zero(3)};
  CHECK_THROWS_AS(apply(bad_b, Vector::Zero(2)), std::invalid_argument);
}

TEST_CASE("recover_affine reconstructs integer maps exactly") {
  AffineMap m;
  m.A.resize(2, 2);
  m.A << 2.0, -3.0, 0.0, 7.0;
  m.b.resize(2);
  m.b << 5.0, -1.0;
  const AffineMap got = recover_affine([&](const Vector& x) { return apply(m, x); }, 2);
  CHECK((got.A.array() == m.A.array()).all());
  CHECK((got.b.array() == m.b.array()).all());
}

TEST_CASE("recover_affine reconstructs random maps to rounding accuracy") {
  RngStream rng(31, stream_tag("test/affine-recover"));
  for (Eigen::Index d : {1, 2, 5, 9}) {
    AffineMap m;
    m.A.resize(d, d);
    for (Eigen::Index r = 0; r < d; ++r)
      for (Eigen::Index c = 0; c < d; ++c) m.A(r, c) = rng.uniform(-3.0, 3.0);
    m.b = rng.uniforms(d, -3.0, 3.0);
    const AffineMap got = recover_affine([&](const Vector& x) { return apply(m, x); }, d);
    CHECK((got.A - m.A).cwiseAbs().maxCoeff() <= 1e-13);
    CHECK((got.b.array() == m.b.array()).all());
  }
  CHECK_THROWS_AS(recover_affine([](const Vector& x) { return x; }, 0),
                  std::invalid_argument);
  CHECK_THROWS_AS(recover_affine([](const Vector&) { return Vector::Zero(3); }, 2),
                  std::invalid_argument);
}

TEST_CASE("check_affine accepts affine maps and rejects a nonlinear one") {
  AffineMap m;
  m.A = Matrix::Identity(3, 3) * 2.0;
  m.b = Vector::Constant(3, -1.0);
  CHECK(check_affine([&](const Vector& x) { return apply(m, x); }, 3, 100, 1e-12));
  CHECK_FALSE(check_affine(
      [](const Vector& x) { return Vector(x.cwiseProduct(x.cwiseAbs())); }, 3, 100,
      1e-12));
  CHECK_THROWS_AS(check_affine([](const Vector& x) { return x; }, 3, 0, 1e-12),
                  std::invalid_argument);
}

TEST_CASE("growth_constant dominates both growth and Lipschitz bounds") {
  AffineMap m;
  m.A.resize(2, 2);
  m.A << 3.0, 0.0, 0.0, 4.0;
  m.b.resize(2);
  m.b << 6.0, 8.0;
  CHECK(growth_constant(m) == 10.0);

  RngStream rng(32, stream_tag("test/affine-growth"));
  for (int rep = 0; rep < 200; ++rep) {
    const Eigen::Index d = 1 + rep % 5;
    AffineMap r;
    r.A.resize(d, d);
    for (Eigen::Index i = 0; i < d; ++i)
      for (Eigen::Index j = 0; j < d; ++j) r.A(i, j) = rng.uniform(-2.0, 2.0);
    r.b = rng.uniforms(d, -2.0, 2.0);
    const double c = growth_constant(r);
    const Vector x = rng.uniforms(d, -4.0, 4.0);
    const Vector y = rng.uniforms(d, -4.0, 4.0);
    CHECK(apply(r, x).norm() <= c * (1.0 + x.norm()) * (1.0 + 1e-12) + 1e-15);
    CHECK((apply(r, x) - apply(r, y)).norm() <=
          c * (x - y).norm() * (1.0 + 1e-12) + 1e-15);
  }
}
