#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>

#include "kolmonet/ann.hpp"
#include "kolmonet/black_scholes.hpp"
#include "kolmonet/rng.hpp"

namespace kolmonet {

// Standard normal CDF via erfc; absolute error well below 1e-12.
double norm_cdf(double z);

// Undiscounted Black-Scholes call price E[(X_T - K)^+] for the 1-d model
// dX = alpha X dt + beta X dW started at x:
//   x e^{alpha T} N(d1) - K N(d2),
//   d1 = (ln(x/K) + (alpha + beta^2/2) T) / (beta sqrt(T)), d2 = d1 - beta sqrt(T).
// Requires x, K, T > 0 and beta >= 0; beta = 0 returns max{x e^{alpha T} - K, 0}.
double bs_call_1d(double x, double K, double alpha, double beta, double T);

// Put by parity: bs_call_1d - x e^{alpha T} + K. Same preconditions.
double bs_put_1d(double x, double K, double alpha, double beta, double T);

enum class PayoffFamily { BasketCall, BasketPut, CallOnMax, CallOnMin };

std::string_view payoff_family_name(PayoffFamily f);
std::optional<PayoffFamily> parse_payoff_family(std::string_view name);

// Analytic payoff value at x for weights c and strike K.
double payoff_value(PayoffFamily f, const Eigen::Ref<const Vector>& c, double K,
                    const Eigen::Ref<const Vector>& x);

// The payoff as a plain function object.
std::function<double(const Vector&)> payoff_function(PayoffFamily f, Vector c, double K);

// The exact ReLU network of the family (dispatch to the builders).
Network payoff_net(PayoffFamily f, const Eigen::Ref<const Vector>& c, double K);

struct PriceEstimate {
  double price = 0.0;
  double std_error = 0.0;
};

// out[j] = (1/rows) sum_i payoff_value(family, c, K, factors.row(i) .* xs.row(j)),
// the average of the payoff over a set of diagonal factor maps, evaluated in
// tiled batches (matrix products for basket payoffs) with pairwise summation.
// This is both the Monte-Carlo price over a factor sample and the exact
// realization of the multichannel average network over its channel factors.
Vector average_payoff_over_factors(PayoffFamily family,
                                   const Eigen::Ref<const Vector>& c, double K,
                                   const Eigen::Ref<const Matrix>& factors,
                                   const Eigen::Ref<const Matrix>& xs);

// Plain Monte-Carlo price: mean of payoff(X_T^{x0}) over n exact terminal
// samples, with the sample standard error. Requires n >= 100. A model with
// beta identically zero short-circuits to the deterministic value.
PriceEstimate mc_price(const BlackScholesModel& model,
                       const std::function<double(const Vector&)>& payoff,
                       double T, const Eigen::Ref<const Vector>& x0,
                       Eigen::Index n, RngStream& rng);

// Fixed seed of the pricing oracle's sample set. Deliberately a constant,
// never derived from a build seed, so approximator construction can never
// share randomness with (and overfit to) its own reference prices.
inline constexpr std::uint64_t kOracleSeed = 0x6f7261636c65ull;

struct OracleConfig {
  Eigen::Index samples = 1'000'000;
  std::uint64_t seed = kOracleSeed;
};

// Reference price u(T, x) = E[payoff(X_T^x)] as a function of the start
// point. Dispatch: closed form for the 1-d call/put; otherwise a common-
// random-numbers Monte-Carlo estimate over one fixed factor set, memoized
// per x (repeated queries are bit-identical).
class PriceOracle {
 public:
  PriceOracle(PayoffFamily family, Vector weights, double strike,
              BlackScholesModel model, double T, OracleConfig cfg = {});

  Eigen::Index dim() const { return model_.dim(); }
  bool closed_form() const { return closed_form_; }
  PayoffFamily family() const { return family_; }
  const OracleConfig& config() const { return cfg_; }

  double price(const Eigen::Ref<const Vector>& x) const;
  // One price per row of xs; uncached rows are priced in one batched pass.
  Vector prices(const Eigen::Ref<const Matrix>& xs) const;

 private:
  double closed_form_call(double s) const;
  double closed_form_price(double s) const;
  void ensure_factors() const;
  Vector batch_mc(const Matrix& xs) const;

  PayoffFamily family_;
  Vector c_;
  double K_;
  BlackScholesModel model_;
  double T_;
  OracleConfig cfg_;
  bool closed_form_ = false;
  mutable Matrix factors_;
  mutable bool have_factors_ = false;
  mutable std::map<std::vector<double>, double> memo_;
};

// Shared-ownership wrapper: the returned function keeps the oracle alive.
std::function<double(const Vector&)> oracle_for(PayoffFamily family, Vector weights,
                                                double strike,
                                                const BlackScholesModel& model,
                                                double T, OracleConfig cfg = {});

}  // namespace kolmonet
