#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "kolmonet/affine.hpp"
#include "kolmonet/ann.hpp"
#include "kolmonet/black_scholes.hpp"
#include "kolmonet/monte_carlo.hpp"
#include "kolmonet/oracles.hpp"
#include "kolmonet/rng.hpp"

namespace kolmonet {

// Exponent bookkeeping for scaling reports: the parameter count of the
// constructed approximator is predicted to grow like
// d^{(5+zz) theta + z + w zz} * eps^{-(4+zz)}, and the channel count like
// d^{2 v theta} * eps^{-2}. The families built here have (z, w, zz) equal to
// (1, 0, 0) for basket call/put and (3, 0, 0) for call-on-max/min; theta is
// the measure's moment-growth exponent (1/2 for uniform unit boxes); r and R
// are radii of validity carried along for completeness (fixed to 1).
struct TheoryExponents {
  double z = 1.0;
  double w = 0.0;
  double zz = 0.0;
  double theta = 0.5;
  double r = 1.0;
  double R = 1.0;
};

TheoryExponents theory_exponents_for(PayoffFamily family);

// 2 sqrt(p-1) exp(3v (1 + L^2 T (sqrt(T) + v p)^2)) (1 + moment_root), where
// moment_root = [∫ ||x||^{p v} ν(dx)]^{1/p}. Requires p >= 2 and v >= 2.
double theory_constant_C(double p, double v, double L, double T, double moment_root);

// Minimal admissible channel count: the smallest natural n >= c^2 C^2 / eps^2
// (at least 1). Returned as a double because realistic constants make the
// value astronomically large; it is integral whenever below 2^53.
double theory_sample_count(double c, double C, double eps);

// A-priori L^p error bound (eps_payoff + c / sqrt(n)) * C of the n-channel
// construction when the payoff net has sup error eps_payoff * (1 + ||x||^v).
double error_bound_nicer(double eps_payoff, double n, double c, double C);

// Growth constant c >= 1 with |payoff(x)| <= c (1 + ||x||^2):
// ||c||_2 + |K| for basket payoffs, max_i |c_i| + |K| for max/min payoffs.
double payoff_growth_constant(PayoffFamily family,
                              const Eigen::Ref<const Vector>& c, double K);

enum class BuildMode { Theory, Empirical };

struct ApproximationSpec {
  BlackScholesModel model;
  double T = 1.0;
  PayoffFamily family = PayoffFamily::BasketCall;
  Vector weights;
  double strike = 1.0;
  double p = 2.0;
  double epsilon = 0.1;
  MeasureSpec measure = UniformBox{1, 0.0, 1.0};
  BuildMode mode = BuildMode::Empirical;
  int max_attempts = 24;
  Eigen::Index eval_samples = 1024;
  Eigen::Index oracle_samples = 1'000'000;
  Eigen::Index start_n = 32;
  Eigen::Index n_cap = 1 << 20;
  double growth_v = 2.0;
};

struct LpError {
  double estimate = 0.0;
  double std_error = 0.0;
};

// Plug-in estimate of [mean |approx - oracle|^p]^{1/p} over paired value
// vectors, with a delta-method standard error of the p-th-root statistic.
LpError lp_error_at(const Eigen::Ref<const Vector>& approx_values,
                    const Eigen::Ref<const Vector>& oracle_values, double p);

// Same over explicit evaluation points (at least 100 rows).
LpError lp_error(const std::function<double(const Vector&)>& approx,
                 const std::function<double(const Vector&)>& oracle,
                 const Eigen::Ref<const Matrix>& eval_points, double p);

// Same for a network against an oracle over eval_samples fresh ν-samples.
LpError lp_error(const Network& psi,
                 const std::function<double(const Vector&)>& oracle,
                 const MeasureSpec& nu, double p, Eigen::Index eval_samples,
                 RngStream& rng);

struct BuildReport {
  bool success = false;
  bool executed = false;  // a network was actually built and measured
  BuildMode mode = BuildMode::Empirical;
  Eigen::Index n_used = 0;
  int attempts = 0;
  double measured_lp_error = 0.0;  // fresh-sample estimate
  double error_stderr = 0.0;
  std::int64_t param_count = 0;
  std::int64_t nonzero_param_count = 0;
  double wall_time_seconds = 0.0;
  double growth_c = 1.0;
  double moment_root = 0.0;
  double theory_C = 0.0;
  double theory_n = 0.0;
  double apriori_bound = 0.0;
  double best_paired_error = 0.0;  // best error seen on the shared eval set
  std::optional<TheoryExponents> exponents;
};

struct BuildResult {
  Network psi;
  BuildReport report;
};

// n channel factor rows from the model's terminal law; the i-th solution map
// is x -> factors.row(i) .* x.
Matrix draw_channel_factors(const BlackScholesModel& model, double T,
                            Eigen::Index n, RngStream& rng);

// The diagonal affine maps (diag(row_i), 0) of a factor matrix.
std::vector<AffineMap> factor_maps(const Eigen::Ref<const Matrix>& factors);

// End-to-end construction. Theory mode computes the certified channel count
// and the a-priori bound, building only when the count fits under n_cap.
// Empirical mode searches: starting at start_n, each attempt draws fresh
// channels and measures the L^p(ν) error against the pricing oracle on one
// shared evaluation set; after a failed redraw the channel count doubles
// (capped at n_cap) until the target is met or max_attempts is exhausted.
// Success requires the independently re-measured fresh-sample error to stay
// within the target as well; reported errors always come from fresh samples.
BuildResult build_approximator(const ApproximationSpec& spec,
                               const std::optional<TheoryExponents>& exponents,
                               std::uint64_t seed);

}  // namespace kolmonet
