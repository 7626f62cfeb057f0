#include "kolmonet/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <stdexcept>
#include <utility>

#include "kolmonet/monte_carlo.hpp"
#include "kolmonet/net_builders.hpp"

namespace kolmonet {

double norm_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

double bs_call_1d(double x, double K, double alpha, double beta, double T) {
  if (!(x > 0)) throw std::invalid_argument("bs_call_1d: x must be positive");
  if (!(K > 0)) throw std::invalid_argument("bs_call_1d: K must be positive");
  if (!(T > 0)) throw std::invalid_argument("bs_call_1d: T must be positive");
  if (!(beta >= 0)) throw std::invalid_argument("bs_call_1d: beta must be nonnegative");
  const double growth = std::exp(alpha * T);
  if (beta == 0) return std::max(x * growth - K, 0.0);
  const double width = beta * std::sqrt(T);
  const double d1 = (std::log(x / K) + (alpha + 0.5 * beta * beta) * T) / width;
  const double d2 = d1 - width;
  return x * growth * norm_cdf(d1) - K * norm_cdf(d2);
}

double bs_put_1d(double x, double K, double alpha, double beta, double T) {
  return bs_call_1d(x, K, alpha, beta, T) - x * std::exp(alpha * T) + K;
}

std::string_view payoff_family_name(PayoffFamily f) {
  switch (f) {
    case PayoffFamily::BasketCall: return "basket_call";
    case PayoffFamily::BasketPut: return "basket_put";
    case PayoffFamily::CallOnMax: return "call_on_max";
    case PayoffFamily::CallOnMin: return "call_on_min";
  }
  throw std::invalid_argument("payoff_family_name: unknown family");
}

std::optional<PayoffFamily> parse_payoff_family(std::string_view name) {
  if (name == "basket_call") return PayoffFamily::BasketCall;
  if (name == "basket_put") return PayoffFamily::BasketPut;
  if (name == "call_on_max") return PayoffFamily::CallOnMax;
  if (name == "call_on_min") return PayoffFamily::CallOnMin;
  return std::nullopt;
}

double payoff_value(PayoffFamily f, const Eigen::Ref<const Vector>& c, double K,
                    const Eigen::Ref<const Vector>& x) {
  if (c.size() != x.size())
    throw std::invalid_argument("payoff_value: weight and point dimensions differ");
  if (c.size() < 1) throw std::invalid_argument("payoff_value: empty point");
  switch (f) {
    case PayoffFamily::BasketCall: return std::max(c.dot(x) - K, 0.0);
    case PayoffFamily::BasketPut: return std::max(K - c.dot(x), 0.0);
    case PayoffFamily::CallOnMax:
      return std::max(c.cwiseProduct(x).maxCoeff() - K, 0.0);
    case PayoffFamily::CallOnMin:
      return std::max(c.cwiseProduct(x).minCoeff() - K, 0.0);
  }
  throw std::invalid_argument("payoff_value: unknown family");
}

std::function<double(const Vector&)> payoff_function(PayoffFamily f, Vector c, double K) {
  return [f, c = std::move(c), K](const Vector& x) { return payoff_value(f, c, K, x); };
}

Network payoff_net(PayoffFamily f, const Eigen::Ref<const Vector>& c, double K) {
  switch (f) {
    case PayoffFamily::BasketCall: return basket_call_net(c, K);
    case PayoffFamily::BasketPut: return basket_put_net(c, K);
    case PayoffFamily::CallOnMax: return call_on_max_net(c, K);
    case PayoffFamily::CallOnMin: return call_on_min_net(c, K);
  }
  throw std::invalid_argument("payoff_net: unknown family");
}

PriceEstimate mc_price(const BlackScholesModel& model,
                       const std::function<double(const Vector&)>& payoff,
                       double T, const Eigen::Ref<const Vector>& x0,
                       Eigen::Index n, RngStream& rng) {
  if (n < 100) throw std::invalid_argument("mc_price: need at least 100 samples");
  if (x0.size() != model.dim())
    throw std::invalid_argument("mc_price: start point dimension differs from model");
  if (model.beta.isZero(0.0)) {
    const Vector noise = Vector::Zero(model.dim());
    return {payoff(sample_terminal_exact(model, T, x0, noise)), 0.0};
  }
  constexpr Eigen::Index kChunk = 65536;
  const Eigen::Index chunks = (n + kChunk - 1) / kChunk;
  Vector sums(chunks);
  Vector sq_sums(chunks);
  Vector buf(std::min(kChunk, n));
  Vector noise(model.dim());
  Eigen::Index done = 0;
  for (Eigen::Index ci = 0; ci < chunks; ++ci) {
    const Eigen::Index sw = std::min(kChunk, n - done);
    for (Eigen::Index i = 0; i < sw; ++i) {
      for (Eigen::Index j = 0; j < noise.size(); ++j) noise[j] = rng.normal();
      buf[i] = payoff(sample_terminal_exact(model, T, x0, noise));
    }
    sums[ci] = pairwise_sum(buf.head(sw));
    sq_sums[ci] = pairwise_sum(buf.head(sw).cwiseProduct(buf.head(sw)));
    done += sw;
  }
  const double count = static_cast<double>(n);
  const double mean = pairwise_sum(sums) / count;
  double var = 0.0;
  if (n > 1)
    var = std::max(0.0, (pairwise_sum(sq_sums) - count * mean * mean) / (count - 1.0));
  return {mean, std::sqrt(var / count)};
}

PriceOracle::PriceOracle(PayoffFamily family, Vector weights, double strike,
                         BlackScholesModel model, double T, OracleConfig cfg)
    : family_(family),
      c_(std::move(weights)),
      K_(strike),
      model_(std::move(model)),
      T_(T),
      cfg_(cfg) {
  if (c_.size() != model_.dim())
    throw std::invalid_argument("oracle: weight dimension differs from model");
  if (!(T_ > 0)) throw std::invalid_argument("oracle: T must be positive");
  if (cfg_.samples < 100)
    throw std::invalid_argument("oracle: need at least 100 samples");
  closed_form_ = model_.dim() == 1 && (family_ == PayoffFamily::BasketCall ||
                                       family_ == PayoffFamily::BasketPut);
}

// Exact price of the 1-d call E[(s F - K)^+] with lognormal factor F > 0,
// extended beyond the textbook domain s, K > 0 by sign reductions:
// K <= 0 with s > 0 means sure exercise, s <= 0 with K >= 0 is worthless,
// and s < 0 with K < 0 flips into a put on (-s, -K).
double PriceOracle::closed_form_call(double s) const {
  const double alpha = model_.alpha[0];
  const double beta = model_.beta[0];
  const double growth = std::exp(alpha * T_);
  if (s > 0 && K_ > 0) return bs_call_1d(s, K_, alpha, beta, T_);
  if (s > 0) return s * growth - K_;
  if (s == 0) return std::max(-K_, 0.0);
  if (K_ < 0) return bs_put_1d(-s, -K_, alpha, beta, T_);
  return 0.0;
}

double PriceOracle::closed_form_price(double s) const {
  const double call = closed_form_call(s);
  if (family_ == PayoffFamily::BasketCall) return call;
  return call - s * std::exp(model_.alpha[0] * T_) + K_;
}

void PriceOracle::ensure_factors() const {
  if (have_factors_) return;
  const Eigen::Index S = cfg_.samples;
  const Eigen::Index d = model_.dim();
  if (S * d > 250'000'000)
    throw std::runtime_error(
        "oracle: factor table of " + std::to_string(S) + "x" + std::to_string(d) +
        " entries exceeds the memory guard; lower oracle_samples");
  factors_.resize(S, d);
  RngStream rng(cfg_.seed, stream_tag("oracle/factors"));
  Vector noise(d);
  for (Eigen::Index i = 0; i < S; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) noise[j] = rng.normal();
    factors_.row(i) = terminal_factors(model_, T_, noise).transpose();
  }
  have_factors_ = true;
}

Vector average_payoff_over_factors(PayoffFamily family,
                                   const Eigen::Ref<const Vector>& c, double K,
                                   const Eigen::Ref<const Matrix>& factors,
                                   const Eigen::Ref<const Matrix>& xs) {
  const Eigen::Index d = c.size();
  if (factors.cols() != d || xs.cols() != d)
    throw std::invalid_argument("average_payoff_over_factors: dimension mismatch");
  const Eigen::Index m = xs.rows();
  const Eigen::Index S = factors.rows();
  if (S < 1)
    throw std::invalid_argument("average_payoff_over_factors: no factor rows");
  const bool basket =
      family == PayoffFamily::BasketCall || family == PayoffFamily::BasketPut;
  constexpr Eigen::Index kEvalBlock = 32;
  constexpr Eigen::Index kChunk = 65536;
  const Eigen::Index chunks = (S + kChunk - 1) / kChunk;
  Vector out(m);
  Vector vals;
  for (Eigen::Index b0 = 0; b0 < m; b0 += kEvalBlock) {
    const Eigen::Index bw = std::min(kEvalBlock, m - b0);
    Matrix scaled(d, bw);
    for (Eigen::Index j = 0; j < bw; ++j)
      scaled.col(j) = c.cwiseProduct(xs.row(b0 + j).transpose());
    Matrix partial(chunks, bw);
    for (Eigen::Index ci = 0; ci < chunks; ++ci) {
      const Eigen::Index s0 = ci * kChunk;
      const Eigen::Index sw = std::min(kChunk, S - s0);
      const auto block = factors.middleRows(s0, sw);
      if (basket) {
        const Matrix t = block * scaled;
        for (Eigen::Index j = 0; j < bw; ++j) {
          if (family == PayoffFamily::BasketCall)
            vals = (t.col(j).array() - K).max(0.0);
          else
            vals = (K - t.col(j).array()).max(0.0);
          partial(ci, j) = pairwise_sum(vals);
        }
      } else {
        for (Eigen::Index j = 0; j < bw; ++j) {
          const auto channels =
              block.array().rowwise() * scaled.col(j).transpose().array();
          Vector extreme;
          if (family == PayoffFamily::CallOnMax)
            extreme = channels.rowwise().maxCoeff().matrix();
          else
            extreme = channels.rowwise().minCoeff().matrix();
          vals = (extreme.array() - K).max(0.0);
          partial(ci, j) = pairwise_sum(vals);
        }
      }
    }
    for (Eigen::Index j = 0; j < bw; ++j)
      out[b0 + j] = pairwise_sum(partial.col(j)) / static_cast<double>(S);
  }
  return out;
}

Vector PriceOracle::batch_mc(const Matrix& xs) const {
  ensure_factors();
  return average_payoff_over_factors(family_, c_, K_, factors_, xs);
}

double PriceOracle::price(const Eigen::Ref<const Vector>& x) const {
  return prices(x.transpose())[0];
}

Vector PriceOracle::prices(const Eigen::Ref<const Matrix>& xs) const {
  if (xs.cols() != dim())
    throw std::invalid_argument("oracle: point dimension differs from model");
  const Eigen::Index m = xs.rows();
  Vector out(m);
  if (closed_form_) {
    for (Eigen::Index i = 0; i < m; ++i)
      out[i] = closed_form_price(c_[0] * xs(i, 0));
    return out;
  }
  std::map<std::vector<double>, std::vector<Eigen::Index>> pending;
  for (Eigen::Index i = 0; i < m; ++i) {
    std::vector<double> key(xs.row(i).begin(), xs.row(i).end());
    if (auto it = memo_.find(key); it != memo_.end())
      out[i] = it->second;
    else
      pending[std::move(key)].push_back(i);
  }
  if (!pending.empty()) {
    Matrix fresh(static_cast<Eigen::Index>(pending.size()), dim());
    Eigen::Index r = 0;
    for (const auto& [key, rows] : pending) {
      for (Eigen::Index j = 0; j < dim(); ++j) fresh(r, j) = key[static_cast<std::size_t>(j)];
      ++r;
    }
    const Vector priced = batch_mc(fresh);
    r = 0;
    for (const auto& [key, rows] : pending) {
      memo_.emplace(key, priced[r]);
      for (Eigen::Index i : rows) out[i] = priced[r];
      ++r;
    }
  }
  return out;
}

std::function<double(const Vector&)> oracle_for(PayoffFamily family, Vector weights,
                                                double strike,
                                                const BlackScholesModel& model,
                                                double T, OracleConfig cfg) {
  auto oracle = std::make_shared<PriceOracle>(family, std::move(weights), strike,
                                              model, T, cfg);
  return [oracle](const Vector& x) { return oracle->price(x); };
}

}  // namespace kolmonet
