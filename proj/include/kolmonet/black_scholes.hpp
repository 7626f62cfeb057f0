#pragma once

#include <functional>

#include "kolmonet/affine.hpp"
#include "kolmonet/ann.hpp"

namespace kolmonet {

// Multi-asset Black-Scholes coefficients: drift mu_i(x) = alpha_i x_i and
// diffusion sigma(x) = diag(beta_i x_i) B, with B a d x d factor whose rows
// have unit Euclidean norm (so each asset's own volatility is beta_i).
struct BlackScholesModel {
  Vector alpha;
  Vector beta;
  Matrix B;

  Eigen::Index dim() const { return alpha.size(); }
};

// Validates shapes and normalizes the rows of B to unit norm. Rows with norm
// below 1e-12 are rejected.
BlackScholesModel make_model(Vector alpha, Vector beta, Matrix B);

// Same with B = identity (independent assets).
BlackScholesModel make_model(Vector alpha, Vector beta);

// Lower-triangular factor F with F F^T equal to the equicorrelation matrix
// (unit diagonal, rho off the diagonal). Valid for -1/(d-1) < rho < 1; any
// rho is accepted for d = 1, where the factor is [[1]].
Matrix equicorrelation_factor(Eigen::Index d, double rho);

// Drift vector (alpha_i x_i)_i.
Vector mu(const BlackScholesModel& m, const Eigen::Ref<const Vector>& x);

// Diffusion matrix diag(beta_i x_i) B.
Matrix sigma(const BlackScholesModel& m, const Eigen::Ref<const Vector>& x);

// Linear-growth constant L = 2 max_i(|alpha_i| + |beta_i|), which guarantees
// ||mu(x)|| + ||sigma(x)||_HS <= L (1 + ||x||).
double growth_L(const BlackScholesModel& m);

// Lognormal terminal factors exp((alpha_i - beta_i^2/2) T + beta_i sqrt(T)
// (B z)_i) for a standard-normal vector z. The exact terminal value started
// at x is x .* factors.
Vector terminal_factors(const BlackScholesModel& m, double T,
                        const Eigen::Ref<const Vector>& noise);

// Exact terminal value X_T^x for the given noise realization.
Vector sample_terminal_exact(const BlackScholesModel& m, double T,
                             const Eigen::Ref<const Vector>& x,
                             const Eigen::Ref<const Vector>& noise);

// The affine map x -> X_T^x for fixed noise: A = diag(factors), b = 0.
AffineMap sample_solution_map(const BlackScholesModel& m, double T,
                              const Eigen::Ref<const Vector>& noise);

// Explicit Euler scheme for dX = mu(X) dt + sigma(X) dW on [0, T], used as an
// independent cross-check of the exact sampler. `increments` holds d x steps
// standard normals; they are scaled by sqrt(T/steps) internally.
Vector euler_maruyama(const std::function<Vector(const Vector&)>& mu_fn,
                      const std::function<Matrix(const Vector&)>& sigma_fn,
                      double T, Eigen::Index steps,
                      const Eigen::Ref<const Vector>& x,
                      const Eigen::Ref<const Matrix>& increments);

// Inputs of the a-priori moment bound: ||mu(x)|| <= m1 + m2 ||x|| and
// ||sigma(x)||_HS <= s1 + s2 ||x||, initial norm xi_norm, moment order p >= 2,
// horizon T with evaluation time t <= T.
struct MomentBoundInputs {
  double p = 2.0;
  double T = 1.0;
  double t = 1.0;
  double m1 = 0.0;
  double m2 = 0.0;
  double s1 = 0.0;
  double s2 = 0.0;
  double xi_norm = 0.0;
};

// sqrt(2) (xi + m1 T + s1 p sqrt(T)) exp((m2 sqrt(T) + s2 p)^2 t), an upper
// bound for (E ||X_t||^p)^{1/p}.
double moment_bound(const MomentBoundInputs& in);

// The bound's inputs for a Black-Scholes model: m1 = s1 = 0 and
// m2 = s2 = max_i(|alpha_i| + |beta_i|) = L/2, with t = T.
MomentBoundInputs moment_inputs(const BlackScholesModel& m, double p, double T,
                                double xi_norm);

}  // namespace kolmonet
