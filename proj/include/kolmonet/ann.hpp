#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <utility>
#include <vector>

namespace kolmonet {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

struct Layer {
  Matrix W;
  Vector b;
};

// Fully-connected feedforward network: an ordered list of affine layers
// (W_1, b_1), ..., (W_L, b_L) with L >= 2, a consistent shape chain and
// scalar output. Hidden layers are followed by a componentwise activation,
// the output layer is affine. Immutable after construction.
class Network {
 public:
  Network() = default;
  explicit Network(std::vector<Layer> layers);

  Eigen::Index depth() const { return static_cast<Eigen::Index>(layers_.size()); }
  Eigen::Index input_dim() const { return layers_.front().W.cols(); }
  const std::vector<Layer>& layers() const { return layers_; }
  std::vector<Eigen::Index> widths() const;  // (l_0, l_1, ..., l_L)

 private:
  std::vector<Layer> layers_;
};

// Hidden-layer activation. Only ReLU is used by the builders in this
// project; Identity exists so purely affine compositions stay expressible,
// and the templated overload of realize admits any scalar function.
enum class Activation { Relu, Identity };

inline double relu(double t) { return t > 0.0 ? t : 0.0; }

namespace detail {
void check_realize_input(const Network& net, Eigen::Index x_size);
}

// Realization: x -> W_L a(... a(W_1 x + b_1) ...) + b_L. The activation acts
// componentwise on every hidden layer and never on the output layer.
template <class Act>
double realize(const Network& net, const Eigen::Ref<const Vector>& x, Act&& act) {
  detail::check_realize_input(net, x.size());
  const auto& layers = net.layers();
  Vector v = x;
  for (std::size_t k = 0; k < layers.size(); ++k) {
    Vector z = layers[k].W * v + layers[k].b;
    if (k + 1 < layers.size())
      for (Eigen::Index i = 0; i < z.size(); ++i) z[i] = act(z[i]);
    v = std::move(z);
  }
  return v[0];
}

double realize(const Network& net, const Eigen::Ref<const Vector>& x,
               Activation act = Activation::Relu);

// Total entry count sum_k l_k (l_{k-1} + 1), zeros included.
std::int64_t param_count(const Network& net);
// Count of strictly nonzero weight and bias entries of the representation.
std::int64_t nonzero_param_count(const Network& net);

// Text serialization (format documented in the README):
//   line 1: "ANNv1"
//   line 2: layer widths l_0 ... l_L
//   per layer: l_k weight rows of l_{k-1} decimals, then one bias line.
// Decimals use the shortest representation that round-trips exactly.
void save_network(const Network& net, std::ostream& os);
void save_network(const Network& net, const std::filesystem::path& path);
Network load_network(std::istream& is);
Network load_network(const std::filesystem::path& path);

}  // namespace kolmonet
