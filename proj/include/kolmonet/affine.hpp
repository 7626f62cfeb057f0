#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <functional>

#include "kolmonet/ann.hpp"

namespace kolmonet {

// Affine self-map x -> A x + b on R^d.
struct AffineMap {
  Matrix A;
  Vector b;
};

Vector apply(const AffineMap& m, const Eigen::Ref<const Vector>& x);

// Reconstructs an affine map from black-box evaluations: b = f(0) and
// column j of A = f(e_j) - f(0). Exact for affine f.
AffineMap recover_affine(const std::function<Vector(const Vector&)>& f, Eigen::Index d);

// Sampled affinity test of the identity
//   f(lambda x + y) + lambda f(0) == lambda f(x) + f(y)
// over (x, y) from [-2,2]^d and lambda from [-3,3]; true iff every sampled
// residual satisfies ||.|| <= tol * (1 + ||f(x)|| + ||f(y)||).
bool check_affine(const std::function<Vector(const Vector&)>& f, Eigen::Index d,
                  int trials, double tol, std::uint64_t seed = 0x636865636bu);

// Computable growth constant c = max(||A||_F, ||b||_2). It guarantees both
// ||apply(m,x)|| <= c (1 + ||x||) and ||apply(m,x) - apply(m,y)|| <= c ||x-y||
// (the Frobenius norm upper-bounds the operator norm).
double growth_constant(const AffineMap& m);

}  // namespace kolmonet
