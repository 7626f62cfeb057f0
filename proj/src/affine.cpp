#include "kolmonet/affine.hpp"

#include <stdexcept>
#include <string>

#include "kolmonet/rng.hpp"

namespace kolmonet {

Vector apply(const AffineMap& m, const Eigen::Ref<const Vector>& x) {
  if (m.A.rows() != m.A.cols() || m.b.size() != m.A.rows())
    throw std::invalid_argument("affine apply: map is not a square self-map");
  if (x.size() != m.A.cols())
    throw std::invalid_argument("affine apply: input has size " + std::to_string(x.size()) +
                                ", map expects " + std::to_string(m.A.cols()));
  return m.A * x + m.b;
}

AffineMap recover_affine(const std::function<Vector(const Vector&)>& f, Eigen::Index d) {
  if (d < 1) throw std::invalid_argument("recover_affine: dimension must be positive");
  Vector b = f(Vector::Zero(d));
  if (b.size() != d)
    throw std::invalid_argument("recover_affine: f(0) has size " + std::to_string(b.size()) +
                                ", expected " + std::to_string(d));
  AffineMap m;
  m.A.resize(d, d);
  m.b = b;
  for (Eigen::Index j = 0; j < d; ++j) {
    Vector probe = f(Vector::Unit(d, j));
    if (probe.size() != d)
      throw std::invalid_argument("recover_affine: inconsistent output size " +
                                  std::to_string(probe.size()) + " at probe " +
                                  std::to_string(j));
    m.A.col(j) = probe - b;
  }
  return m;
}

bool check_affine(const std::function<Vector(const Vector&)>& f, Eigen::Index d,
                  int trials, double tol, std::uint64_t seed) {
  if (trials < 1) throw std::invalid_argument("check_affine: trials must be >= 1");
  RngStream rng(seed, stream_tag("affine/check"));
  const Vector f0 = f(Vector::Zero(d));
  for (int t = 0; t < trials; ++t) {
    Vector x = rng.uniforms(d, -2.0, 2.0);
    Vector y = rng.uniforms(d, -2.0, 2.0);
    double lambda = rng.uniform(-3.0, 3.0);
    Vector fx = f(x);
    Vector fy = f(y);
    Vector lhs = f(lambda * x + y) + lambda * f0;
    Vector rhs = lambda * fx + fy;
    double scale = 1.0 + fx.norm() + fy.norm();
    if ((lhs - rhs).norm() > tol * scale) return false;
  }
  return true;
}

double growth_constant(const AffineMap& m) {
  return std::max(m.A.norm(), m.b.norm());
}

}  // namespace kolmonet
