#pragma once

#include <optional>
#include <variant>

#include "kolmonet/ann.hpp"
#include "kolmonet/black_scholes.hpp"
#include "kolmonet/rng.hpp"

namespace kolmonet {

// Uniform distribution on the box [lo, hi]^d.
struct UniformBox {
  Eigen::Index d = 1;
  double lo = 0.0;
  double hi = 1.0;
};

// Law of the model's exact terminal value X_T started at x0.
struct LognormalTerminal {
  BlackScholesModel model;
  double T = 1.0;
  Vector x0;
};

// Discrete measure on the rows of `points` with the given weights.
struct PointCloud {
  Matrix points;
  Vector weights;
};

using MeasureSpec = std::variant<UniformBox, LognormalTerminal, PointCloud>;

// Throws std::invalid_argument when the spec violates its invariants
// (empty box, nonpositive horizon, weights not summing to one, ...).
void validate_measure(const MeasureSpec& spec);

Eigen::Index measure_dim(const MeasureSpec& spec);

// `count` i.i.d. samples, one per row.
Matrix sample_measure(const MeasureSpec& spec, Eigen::Index count, RngStream& rng);

// Sum with tree (pairwise) reduction; rounding error grows like log n.
double pairwise_sum(const Eigen::Ref<const Vector>& values);

// Arithmetic mean of scalar samples via pairwise summation.
double mc_mean(const Eigen::Ref<const Vector>& values);

// Columnwise mean of a batch whose rows are vector samples.
Vector mc_mean_rows(const Eigen::Ref<const Matrix>& values);

// Exact RMS error of the n-sample mean estimator: std / sqrt(n).
double l2_error_predicted(Eigen::Index n, double std);

// Upper bound sqrt(p - 1) for the L^p/L^2 comparison constant; p >= 2.
double kahane_constant_bound(double p);

// 2 sqrt((p - 1) / n) * central_pth_moment_root, an upper bound for the
// L^p norm of the n-sample mean error.
double lp_mc_error_bound(double p, Eigen::Index n, double central_pth_moment_root);

struct NormMoment {
  double estimate = 0.0;
  std::optional<double> analytic_upper;
};

// Monte-Carlo estimate of the q-th moment of ||x|| under the measure; for
// uniform boxes also the analytic upper bound d^{q/2} max{|lo|^q, |hi|^q}.
NormMoment norm_moment(const MeasureSpec& spec, double q, Eigen::Index count,
                       RngStream& rng);

}  // namespace kolmonet
