#include "kolmonet/net_builders.hpp"

#include <stdexcept>
#include <string>

namespace kolmonet {

namespace {

void require_weights(const Eigen::Ref<const Vector>& c) {
  if (c.size() < 1)
    throw std::invalid_argument("payoff net: weight vector must be nonempty");
}

// Shared skeleton of the max/min networks. They differ only in three sign
// choices: the first row of layer 1, the first row of the middle layers, and
// the collapsing row before the strike is subtracted.
//
// Layer 1 emits ((s1 c_1 x_1 + s2 c_2 x_2)^+, (c_2 x_2)^+, (-c_2 x_2)^+,
// (c_3 x_3)^+, (-c_3 x_3)^+, ...). Each middle layer folds the next
// coordinate pair into the running 3-entry head and re-emits the remaining
// pairs through (1,-1)/(-1,1) blocks (exact on ReLU outputs). The collapse
// row turns the head into max(...) or min(...), the bias subtracts K, and a
// final ReLU plus identity layer finish the payoff.
Network extremum_net(const Eigen::Ref<const Vector>& c, double K, bool take_max) {
  const Eigen::Index d = c.size();
  std::vector<Layer> layers;
  layers.reserve(static_cast<std::size_t>(d) + 1);

  const double s_head = take_max ? 1.0 : -1.0;

  Layer first;
  first.W = Matrix::Zero(2 * (d - 1) + 1, d);
  first.b = Vector::Zero(2 * (d - 1) + 1);
  first.W(0, 0) = s_head * c[0];
  first.W(0, 1) = -s_head * c[1];
  for (Eigen::Index i = 1; i < d; ++i) {
    first.W(2 * i - 1, i) = c[i];
    first.W(2 * i, i) = -c[i];
  }
  layers.push_back(std::move(first));

  for (Eigen::Index k = 1; k <= d - 2; ++k) {
    const Eigen::Index rows = 2 * (d - k) - 1;
    const Eigen::Index cols = 2 * (d - k) + 1;
    Layer mid;
    mid.W = Matrix::Zero(rows, cols);
    mid.b = Vector::Zero(rows);
    mid.W(0, 0) = 1.0;
    mid.W(0, 1) = s_head;
    mid.W(0, 2) = -s_head;
    mid.W(0, 3) = -s_head;
    mid.W(0, 4) = s_head;
    mid.W(1, 3) = 1.0;
    mid.W(1, 4) = -1.0;
    mid.W(2, 3) = -1.0;
    mid.W(2, 4) = 1.0;
    for (Eigen::Index t = 0; 3 + 2 * t < rows; ++t) {
      mid.W(3 + 2 * t, 5 + 2 * t) = 1.0;
      mid.W(3 + 2 * t, 6 + 2 * t) = -1.0;
      mid.W(4 + 2 * t, 5 + 2 * t) = -1.0;
      mid.W(4 + 2 * t, 6 + 2 * t) = 1.0;
    }
    layers.push_back(std::move(mid));
  }

  Layer collapse;
  collapse.W.resize(1, 3);
  collapse.W << s_head, 1.0, -1.0;
  collapse.b = Vector::Constant(1, -K);
  layers.push_back(std::move(collapse));

  Layer out;
  out.W = Matrix::Constant(1, 1, 1.0);
  out.b = Vector::Zero(1);
  layers.push_back(std::move(out));

  return Network(std::move(layers));
}

}  // namespace

Network basket_call_net(const Eigen::Ref<const Vector>& c, double K) {
  require_weights(c);
  Layer first;
  first.W = c.transpose();
  first.b = Vector::Constant(1, -K);
  Layer out;
  out.W = Matrix::Constant(1, 1, 1.0);
  out.b = Vector::Zero(1);
  std::vector<Layer> layers;
  layers.push_back(std::move(first));
  layers.push_back(std::move(out));
  return Network(std::move(layers));
}

Network basket_put_net(const Eigen::Ref<const Vector>& c, double K) {
  require_weights(c);
  return basket_call_net(-c, -K);
}

Network call_on_max_net(const Eigen::Ref<const Vector>& c, double K) {
  require_weights(c);
  if (c.size() == 1) return basket_call_net(c, K);
  return extremum_net(c, K, true);
}

Network call_on_min_net(const Eigen::Ref<const Vector>& c, double K) {
  require_weights(c);
  if (c.size() == 1) return basket_call_net(c, K);
  return extremum_net(c, K, false);
}

Network multichannel(const Network& phi, const std::vector<AffineMap>& maps) {
  const Eigen::Index n = static_cast<Eigen::Index>(maps.size());
  if (n < 1) throw std::invalid_argument("multichannel: need at least one channel");
  const Eigen::Index d = phi.input_dim();
  for (std::size_t i = 0; i < maps.size(); ++i) {
    const AffineMap& m = maps[i];
    if (m.A.rows() != d || m.A.cols() != d || m.b.size() != d)
      throw std::invalid_argument("multichannel: map " + std::to_string(i) +
                                  " is not an affine self-map of dimension " +
                                  std::to_string(d));
  }

  const auto& L = phi.layers();
  const std::size_t N = L.size();
  std::vector<Layer> out;
  out.reserve(N);

  const Eigen::Index u1 = L[0].W.rows();
  Layer first;
  first.W.resize(n * u1, d);
  first.b.resize(n * u1);
  for (Eigen::Index i = 0; i < n; ++i) {
    first.W.middleRows(i * u1, u1) = L[0].W * maps[i].A;
    first.b.segment(i * u1, u1) = L[0].W * maps[i].b + L[0].b;
  }
  out.push_back(std::move(first));

  for (std::size_t k = 1; k + 1 < N; ++k) {
    const Eigen::Index rows = L[k].W.rows();
    const Eigen::Index cols = L[k].W.cols();
    Layer mid;
    mid.W = Matrix::Zero(n * rows, n * cols);
    mid.b.resize(n * rows);
    for (Eigen::Index i = 0; i < n; ++i) {
      mid.W.block(i * rows, i * cols, rows, cols) = L[k].W;
      mid.b.segment(i * rows, rows) = L[k].b;
    }
    out.push_back(std::move(mid));
  }

  const Eigen::Index um = L[N - 1].W.cols();
  Layer last;
  last.W.resize(1, n * um);
  last.b = L[N - 1].b;
  for (Eigen::Index i = 0; i < n; ++i)
    last.W.middleCols(i * um, um) = L[N - 1].W / static_cast<double>(n);
  out.push_back(std::move(last));

  return Network(std::move(out));
}

}  // namespace kolmonet
