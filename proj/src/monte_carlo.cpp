#include "kolmonet/monte_carlo.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace kolmonet {

namespace {

double pairwise_block(const double* data, Eigen::Index n) {
  if (n <= 64) {
    double s = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) s += data[i];
    return s;
  }
  const Eigen::Index half = n / 2;
  return pairwise_block(data, half) + pairwise_block(data + half, n - half);
}

struct ValidateVisitor {
  void operator()(const UniformBox& b) const {
    if (b.d < 1) throw std::invalid_argument("measure: box dimension must be at least 1");
    if (!(b.lo < b.hi))
      throw std::invalid_argument("measure: box needs lo < hi, got [" +
                                  std::to_string(b.lo) + ", " + std::to_string(b.hi) + "]");
  }
  void operator()(const LognormalTerminal& l) const {
    if (!(l.T > 0)) throw std::invalid_argument("measure: horizon T must be positive");
    if (l.x0.size() != l.model.dim())
      throw std::invalid_argument("measure: start point dimension differs from model");
  }
  void operator()(const PointCloud& c) const {
    if (c.points.rows() < 1)
      throw std::invalid_argument("measure: point cloud must be nonempty");
    if (c.weights.size() != c.points.rows())
      throw std::invalid_argument("measure: weight count differs from point count");
    if (c.weights.minCoeff() < -1e-15)
      throw std::invalid_argument("measure: weights must be nonnegative");
    if (std::abs(c.weights.sum() - 1.0) > 1e-9)
      throw std::invalid_argument("measure: weights must sum to 1");
  }
};

}  // namespace

void validate_measure(const MeasureSpec& spec) { std::visit(ValidateVisitor{}, spec); }

Eigen::Index measure_dim(const MeasureSpec& spec) {
  return std::visit(
      [](const auto& s) -> Eigen::Index {
        using S = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<S, UniformBox>) return s.d;
        else if constexpr (std::is_same_v<S, LognormalTerminal>) return s.model.dim();
        else return s.points.cols();
      },
      spec);
}

Matrix sample_measure(const MeasureSpec& spec, Eigen::Index count, RngStream& rng) {
  validate_measure(spec);
  if (count < 1) throw std::invalid_argument("sample_measure: count must be at least 1");
  const Eigen::Index d = measure_dim(spec);
  Matrix out(count, d);
  if (const auto* box = std::get_if<UniformBox>(&spec)) {
    for (Eigen::Index i = 0; i < count; ++i)
      for (Eigen::Index j = 0; j < d; ++j) out(i, j) = rng.uniform(box->lo, box->hi);
    return out;
  }
  if (const auto* log = std::get_if<LognormalTerminal>(&spec)) {
    Vector noise(d);
    for (Eigen::Index i = 0; i < count; ++i) {
      for (Eigen::Index j = 0; j < d; ++j) noise[j] = rng.normal();
      out.row(i) = sample_terminal_exact(log->model, log->T, log->x0, noise).transpose();
    }
    return out;
  }
  const auto& cloud = std::get<PointCloud>(spec);
  const Eigen::Index m = cloud.points.rows();
  Vector cum(m);
  double acc = 0.0;
  for (Eigen::Index i = 0; i < m; ++i) {
    acc += std::max(cloud.weights[i], 0.0);
    cum[i] = acc;
  }
  for (Eigen::Index i = 0; i < count; ++i) {
    const double u = rng.uniform() * acc;
    const double* begin = cum.data();
    const double* pos = std::upper_bound(begin, begin + m, u);
    const Eigen::Index idx = std::min<Eigen::Index>(pos - begin, m - 1);
    out.row(i) = cloud.points.row(idx);
  }
  return out;
}

double pairwise_sum(const Eigen::Ref<const Vector>& values) {
  if (values.size() == 0) return 0.0;
  return pairwise_block(values.data(), values.size());
}

double mc_mean(const Eigen::Ref<const Vector>& values) {
  if (values.size() < 1) throw std::invalid_argument("mc_mean: empty batch");
  return pairwise_sum(values) / static_cast<double>(values.size());
}

Vector mc_mean_rows(const Eigen::Ref<const Matrix>& values) {
  if (values.rows() < 1) throw std::invalid_argument("mc_mean: empty batch");
  Vector mean(values.cols());
  for (Eigen::Index j = 0; j < values.cols(); ++j) mean[j] = mc_mean(values.col(j));
  return mean;
}

double l2_error_predicted(Eigen::Index n, double std) {
  if (n < 1) throw std::invalid_argument("l2_error_predicted: n must be at least 1");
  if (std < 0) throw std::invalid_argument("l2_error_predicted: std must be nonnegative");
  return std / std::sqrt(static_cast<double>(n));
}

double kahane_constant_bound(double p) {
  if (!(p >= 2)) throw std::invalid_argument("kahane_constant_bound: p must be at least 2");
  return std::sqrt(p - 1.0);
}

double lp_mc_error_bound(double p, Eigen::Index n, double central_pth_moment_root) {
  if (n < 1) throw std::invalid_argument("lp_mc_error_bound: n must be at least 1");
  if (central_pth_moment_root < 0)
    throw std::invalid_argument("lp_mc_error_bound: moment root must be nonnegative");
  return 2.0 * std::sqrt((kahane_constant_bound(p) * kahane_constant_bound(p)) /
                         static_cast<double>(n)) *
         central_pth_moment_root;
}

NormMoment norm_moment(const MeasureSpec& spec, double q, Eigen::Index count,
                       RngStream& rng) {
  if (!(q > 0)) throw std::invalid_argument("norm_moment: q must be positive");
  const Matrix samples = sample_measure(spec, count, rng);
  Vector powers(count);
  for (Eigen::Index i = 0; i < count; ++i)
    powers[i] = std::pow(samples.row(i).norm(), q);
  NormMoment result;
  result.estimate = mc_mean(powers);
  if (const auto* box = std::get_if<UniformBox>(&spec)) {
    const double edge = std::max(std::abs(box->lo), std::abs(box->hi));
    result.analytic_upper =
        std::pow(static_cast<double>(box->d), q / 2.0) * std::pow(edge, q);
  }
  return result;
}

}  // namespace kolmonet
