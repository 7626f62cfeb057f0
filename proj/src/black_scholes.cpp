#include "kolmonet/black_scholes.hpp"

#include <Eigen/Cholesky>
#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>

namespace kolmonet {

namespace {

void require_dim(const BlackScholesModel& m, const Eigen::Ref<const Vector>& x,
                 const char* what) {
  if (x.size() != m.dim())
    throw std::invalid_argument(std::string(what) + ": expected dimension " +
                                std::to_string(m.dim()) + ", got " +
                                std::to_string(x.size()));
}

}  // namespace

BlackScholesModel make_model(Vector alpha, Vector beta, Matrix B) {
  const Eigen::Index d = alpha.size();
  if (d < 1) throw std::invalid_argument("model: dimension must be at least 1");
  if (beta.size() != d)
    throw std::invalid_argument("model: alpha and beta sizes differ");
  if (B.rows() != d || B.cols() != d)
    throw std::invalid_argument("model: correlation factor must be " +
                                std::to_string(d) + "x" + std::to_string(d));
  for (Eigen::Index i = 0; i < d; ++i) {
    const double norm = B.row(i).norm();
    if (norm < 1e-12)
      throw std::invalid_argument("model: correlation factor row " +
                                  std::to_string(i) + " has near-zero norm");
    B.row(i) /= norm;
  }
  return BlackScholesModel{std::move(alpha), std::move(beta), std::move(B)};
}

BlackScholesModel make_model(Vector alpha, Vector beta) {
  const Eigen::Index d = alpha.size();
  return make_model(std::move(alpha), std::move(beta), Matrix::Identity(d, d));
}

Matrix equicorrelation_factor(Eigen::Index d, double rho) {
  if (d < 1) throw std::invalid_argument("equicorrelation: dimension must be at least 1");
  if (d == 1) return Matrix::Constant(1, 1, 1.0);
  const double lo = -1.0 / static_cast<double>(d - 1);
  if (!(rho > lo && rho < 1.0))
    throw std::invalid_argument("equicorrelation: rho = " + std::to_string(rho) +
                                " outside (" + std::to_string(lo) + ", 1) for d = " +
                                std::to_string(d));
  Matrix C = Matrix::Constant(d, d, rho);
  C.diagonal().setOnes();
  Eigen::LLT<Matrix> llt(C);
  if (llt.info() != Eigen::Success)
    throw std::runtime_error("equicorrelation: factorization failed");
  return llt.matrixL();
}

Vector mu(const BlackScholesModel& m, const Eigen::Ref<const Vector>& x) {
  require_dim(m, x, "mu");
  return m.alpha.cwiseProduct(x);
}

Matrix sigma(const BlackScholesModel& m, const Eigen::Ref<const Vector>& x) {
  require_dim(m, x, "sigma");
  return m.beta.cwiseProduct(x).asDiagonal() * m.B;
}

double growth_L(const BlackScholesModel& m) {
  return 2.0 * (m.alpha.cwiseAbs() + m.beta.cwiseAbs()).maxCoeff();
}

Vector terminal_factors(const BlackScholesModel& m, double T,
                        const Eigen::Ref<const Vector>& noise) {
  if (!(T > 0)) throw std::invalid_argument("terminal_factors: T must be positive");
  require_dim(m, noise, "terminal_factors");
  const Vector bz = m.B * noise;
  const Vector exponent = (m.alpha.array() - 0.5 * m.beta.array().square()) * T +
                          std::sqrt(T) * m.beta.array() * bz.array();
  return exponent.array().exp();
}

Vector sample_terminal_exact(const BlackScholesModel& m, double T,
                             const Eigen::Ref<const Vector>& x,
                             const Eigen::Ref<const Vector>& noise) {
  require_dim(m, x, "sample_terminal_exact");
  return x.cwiseProduct(terminal_factors(m, T, noise));
}

AffineMap sample_solution_map(const BlackScholesModel& m, double T,
                              const Eigen::Ref<const Vector>& noise) {
  AffineMap map;
  map.A = terminal_factors(m, T, noise).asDiagonal();
  map.b = Vector::Zero(m.dim());
  return map;
}

Vector euler_maruyama(const std::function<Vector(const Vector&)>& mu_fn,
                      const std::function<Matrix(const Vector&)>& sigma_fn,
                      double T, Eigen::Index steps,
                      const Eigen::Ref<const Vector>& x,
                      const Eigen::Ref<const Matrix>& increments) {
  if (steps < 1) throw std::invalid_argument("euler: steps must be at least 1");
  if (!(T > 0)) throw std::invalid_argument("euler: T must be positive");
  if (increments.rows() != x.size() || increments.cols() != steps)
    throw std::invalid_argument("euler: increments must be " +
                                std::to_string(x.size()) + "x" +
                                std::to_string(steps));
  const double dt = T / static_cast<double>(steps);
  const double root_dt = std::sqrt(dt);
  Vector state = x;
  for (Eigen::Index k = 0; k < steps; ++k)
    state += mu_fn(state) * dt + sigma_fn(state) * (root_dt * increments.col(k));
  return state;
}

double moment_bound(const MomentBoundInputs& in) {
  if (!(in.p >= 2)) throw std::invalid_argument("moment_bound: p must be at least 2");
  if (in.T < 0 || in.t < 0 || in.t > in.T)
    throw std::invalid_argument("moment_bound: need 0 <= t <= T");
  if (in.m1 < 0 || in.m2 < 0 || in.s1 < 0 || in.s2 < 0 || in.xi_norm < 0)
    throw std::invalid_argument("moment_bound: growth constants must be nonnegative");
  const double root_t = std::sqrt(in.T);
  const double front = std::sqrt(2.0) * (in.xi_norm + in.m1 * in.T + in.s1 * in.p * root_t);
  const double rate = in.m2 * root_t + in.s2 * in.p;
  return front * std::exp(rate * rate * in.t);
}

MomentBoundInputs moment_inputs(const BlackScholesModel& m, double p, double T,
                                double xi_norm) {
  MomentBoundInputs in;
  in.p = p;
  in.T = T;
  in.t = T;
  const double half_L = 0.5 * growth_L(m);
  in.m2 = half_L;
  in.s2 = half_L;
  in.xi_norm = xi_norm;
  return in;
}

}  // namespace kolmonet
