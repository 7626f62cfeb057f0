#include <cstdio>
#include <filesystem>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "kolmonet/ann.hpp"
#include "kolmonet/rng.hpp"

using namespace kolmonet;

namespace {

Network hand_net() {
  Matrix W1(2, 1);
  W1 << 1.0, -1.0;
  Vector b1(2);
  b1 << -0.5, 0.0;
  Matrix W2(1, 2);
  W2 << 1.0, 2.0;
  Vector b2(1);
  b2 << 0.25;
  return Network({Layer{W1, b1}, Layer{W2, b2}});
}

Network random_net(RngStream& rng, Eigen::Index d, Eigen::Index hidden) {
  Matrix W1(hidden, d);
  Matrix W2(1, hidden);
  Vector b1 = rng.uniforms(hidden, -1.0, 1.0);
  Vector b2 = rng.uniforms(1, -1.0, 1.0);
  for (Eigen::Index j = 0; j < d; ++j)
    for (Eigen::Index i = 0; i < hidden; ++i) W1(i, j) = rng.uniform(-1.0, 1.0);
  for (Eigen::Index i = 0; i < hidden; ++i) W2(0, i) = rng.uniform(-1.0, 1.0);
  return Network({Layer{W1, b1}, Layer{W2, b2}});
}

}  // namespace

TEST_CASE("realize matches a hand evaluation") {
  const Network net = hand_net();
  CHECK(net.depth() == 2);
  CHECK(net.input_dim() == 1);
  CHECK(net.widths() == std::vector<Eigen::Index>{1, 2, 1});
  CHECK(realize(net, Vector::Constant(1, 1.0)) == 0.75);
  CHECK(realize(net, Vector::Constant(1, -2.0)) == 4.25);
  CHECK(realize(net, Vector::Constant(1, 0.5)) == 0.25);
}

TEST_CASE("identity activation makes the composition affine") {
  const Network net = hand_net();
  // (x - 0.5) + 2(-x) + 0.25 = -x - 0.25
  CHECK(realize(net, Vector::Constant(1, 1.0), Activation::Identity) ==
        doctest::Approx(-1.25).epsilon(1e-15));
  CHECK(realize(net, Vector::Constant(1, -3.0), Activation::Identity) ==
        doctest::Approx(2.75).epsilon(1e-15));
}

TEST_CASE("templated realize accepts a custom activation") {
  const Network net = hand_net();
  // hidden (0.25, 1) under t -> t^2, output 0.25 + 2 + 0.25
  CHECK(realize(net, Vector::Constant(1, 1.0), [](double t) { return t * t; }) == 2.5);
}

TEST_CASE("construction validates the layer chain") {
  Matrix W1(2, 1);
  W1 << 1.0, -1.0;
  const Vector b1 = Vector::Zero(2);
  Matrix W2(1, 2);
  W2 << 1.0, 2.0;
  const Vector b2 = Vector::Zero(1);

  CHECK_THROWS_AS(Network({Layer{W1, b1}}), std::invalid_argument);
  CHECK_THROWS_AS(Network({Layer{W1, b1}, Layer{W1, b1}}), std::invalid_argument);
  CHECK_THROWS_AS(Network({Layer{W1, Vector::Zero(3)}, Layer{W2, b2}}),
                  std::invalid_argument);
  CHECK_THROWS_AS(Network({Layer{Matrix(0, 1), Vector(0)}, Layer{W2, b2}}),
                  std::invalid_argument);
  // output width 2
  CHECK_THROWS_AS(Network({Layer{W1, b1}, Layer{Matrix::Identity(2, 2), b1}}),
                  std::invalid_argument);
  CHECK_NOTHROW(Network({Layer{W1, b1}, Layer{W2, b2}}));
}

TEST_CASE("realize rejects inputs of the wrong dimension") {
  const Network net = hand_net();
  CHECK_THROWS_AS(realize(net, Vector::Zero(2)), std::invalid_argument);
}

TEST_CASE("parameter counts include and exclude zero entries") {
  const Network net = hand_net();
  CHECK(param_count(net) == 7);
  CHECK(nonzero_param_count(net) == 6);  // b1[1] is the single zero
  CHECK(nonzero_param_count(net) <= param_count(net));
}

TEST_CASE("stream serialization round trips bit-exactly") {
  RngStream rng(11, stream_tag("test/ann-io"));
  for (int i = 0; i < 20; ++i) {
    const Network net = random_net(rng, 1 + i % 4, 1 + (i * 7) % 5);
    std::stringstream ss;
    save_network(net, ss);
    const Network back = load_network(ss);
    REQUIRE(back.depth() == net.depth());
    for (std::size_t k = 0; k < net.layers().size(); ++k) {
      CHECK((back.layers()[k].W.array() == net.layers()[k].W.array()).all());
      CHECK((back.layers()[k].b.array() == net.layers()[k].b.array()).all());
    }
  }
}

TEST_CASE("file serialization round trips and is headed by ANNv1") {
  RngStream rng(12, stream_tag("test/ann-file"));
  const Network net = random_net(rng, 3, 4);
  const auto path = std::filesystem::temp_directory_path() / "kolmonet_test_ann.ann";
  save_network(net, path);
  const Network back = load_network(path);
  CHECK(realize(back, Vector::Zero(3)) == realize(net, Vector::Zero(3)));
  std::stringstream ss;
  save_network(net, ss);
  std::string first;
  std::getline(ss, first);
  CHECK(first == "ANNv1");
  std::filesystem::remove(path);
}

TEST_CASE("loading rejects malformed streams with line numbers") {
  const auto load_from = [](const std::string& text) {
    std::istringstream is(text);
    return load_network(is);
  };
  CHECK_THROWS_WITH_AS(load_from(""), doctest::Contains("line 0"),
                       std::runtime_error);
  CHECK_THROWS_WITH_AS(load_from("ANNv2\n1 2 1\n"),
                       doctest::Contains("expected ANNv1"), std::runtime_error);
  CHECK_THROWS_WITH_AS(load_from("ANNv1\n1 2\n"),
                       doctest::Contains("at least 3 widths"), std::runtime_error);
  CHECK_THROWS_WITH_AS(load_from("ANNv1\n1 2 2\n"),
                       doctest::Contains("output width"), std::runtime_error);
  CHECK_THROWS_WITH_AS(load_from("ANNv1\n1 2 1\n0.5\n"),
                       doctest::Contains("truncated"), std::runtime_error);
  CHECK_THROWS_WITH_AS(load_from("ANNv1\n1 2 1\n0.5\nfoo\n"),
                       doctest::Contains("non-numeric"), std::runtime_error);
  CHECK_THROWS_WITH_AS(load_from("ANNv1\n1 2 1\n0.5 0.5\n"),
                       doctest::Contains("expected 1 tokens"), std::runtime_error);
  CHECK_THROWS_AS(load_network(std::filesystem::path("/nonexistent/net.ann")),
                  std::runtime_error);
}
