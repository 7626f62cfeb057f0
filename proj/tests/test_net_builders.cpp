#include <cmath>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "kolmonet/net_builders.hpp"
#include "kolmonet/oracles.hpp"
#include "kolmonet/rng.hpp"

using namespace kolmonet;

namespace {

std::int64_t layered_count(Eigen::Index d) {
  // (l_0, 2(d-1)+1, 2(d-2)+1, ..., 3, 1, 1) with l_0 = d
  std::vector<std::int64_t> widths;
  widths.push_back(d);
  for (Eigen::Index k = 0; k + 1 < d; ++k) widths.push_back(2 * (d - 1 - k) + 1);
  widths.push_back(1);
  widths.push_back(1);
  std::int64_t total = 0;
  for (std::size_t k = 1; k < widths.size(); ++k)
    total += widths[k] * (widths[k - 1] + 1);
  return total;
}

}  // namespace

TEST_CASE("basket nets have dims (d, 1, 1) and d + 3 parameters") {
  for (Eigen::Index d : {1, 2, 5, 12, 32}) {
    const Vector c = Vector::Constant(d, 0.5);
    const Network net = basket_call_net(c, 1.0);
    CHECK(net.widths() == std::vector<Eigen::Index>{d, 1, 1});
    CHECK(param_count(net) == d + 3);
    CHECK(param_count(net) <= 4 * d);
    CHECK(param_count(basket_put_net(c, 1.0)) == d + 3);
  }
}

TEST_CASE("extremum nets match the layered size formula and cubic bound") {
  const std::int64_t frozen[] = {15, 44, 99, 188, 319};
  for (Eigen::Index d = 2; d <= 6; ++d) {
    const Vector c = Vector::Constant(d, 1.0);
    CHECK(param_count(call_on_max_net(c, 0.5)) == frozen[d - 2]);
    CHECK(param_count(call_on_min_net(c, 0.5)) == frozen[d - 2]);
  }
  for (Eigen::Index d = 2; d <= 32; ++d) {
    const Vector c = Vector::Constant(d, 1.0);
    const std::int64_t count = param_count(call_on_max_net(c, 0.5));
    CHECK(count == layered_count(d));
    CHECK(count <= 6 * d * d * d);
  }
}

TEST_CASE("call_on_max widths for d = 4") {
  const Network net = call_on_max_net(Vector::Ones(4), 0.0);
  CHECK(net.widths() == std::vector<Eigen::Index>{4, 7, 5, 3, 1, 1});
}

TEST_CASE("extremum nets are exact on a hand case") {
  Vector x(2);
  x << 3.0, 5.0;
  CHECK(realize(call_on_max_net(Vector::Ones(2), 0.0), x) == 5.0);
  CHECK(realize(call_on_min_net(Vector::Ones(2), 0.0), x) == 3.0);
}

TEST_CASE("d = 1 extremum builders degenerate to the basket call") {
  const Vector c = Vector::Constant(1, 2.0);
  const Network mx = call_on_max_net(c, 0.5);
  CHECK(mx.widths() == std::vector<Eigen::Index>{1, 1, 1});
  CHECK(realize(mx, Vector::Constant(1, 1.0)) == 1.5);
  CHECK(realize(call_on_min_net(c, 0.5), Vector::Constant(1, 1.0)) == 1.5);
}

TEST_CASE("payoff nets realize the payoff on random draws") {
  RngStream rng(21, stream_tag("test/builders-exact"));
  const PayoffFamily families[] = {PayoffFamily::BasketCall, PayoffFamily::BasketPut,
                                   PayoffFamily::CallOnMax, PayoffFamily::CallOnMin};
  for (Eigen::Index d = 2; d <= 6; ++d) {
    for (PayoffFamily f : families) {
      const Vector c = rng.uniforms(d, -1.0, 1.0);
      const double K = rng.uniform(-1.0, 1.0);
      const Network net = payoff_net(f, c, K);
      for (int rep = 0; rep < 200; ++rep) {
        const Vector x = rng.uniforms(d, -2.0, 2.0);
        const double want = payoff_value(f, c, K, x);
        CHECK(std::abs(realize(net, x) - want) <= 1e-12 * (1.0 + std::abs(want)));
      }
    }
  }
}

TEST_CASE("multichannel with the identity map reproduces phi") {
  const Vector c = Vector::LinSpaced(3, 0.2, 1.0);
  const Network phi = call_on_max_net(c, 0.3);
  const AffineMap id{Matrix::Identity(3, 3), Vector::Zero(3)};
  const Network psi = multichannel(phi, {id});
  CHECK(psi.widths() == phi.widths());
  RngStream rng(22, stream_tag("test/builders-id"));
  for (int rep = 0; rep < 50; ++rep) {
    const Vector x = rng.uniforms(3, -2.0, 2.0);
    CHECK(realize(psi, x) == doctest::Approx(realize(phi, x)).epsilon(1e-14));
  }
}

TEST_CASE("multichannel averages the channels and respects the size bounds") {
  RngStream rng(23, stream_tag("test/builders-multi"));
  for (int rep = 0; rep < 20; ++rep) {
    const Eigen::Index d = 1 + rep % 4;
    const Eigen::Index n = 2 + rep % 5;
    const Vector c = rng.uniforms(d, -1.0, 1.0);
    const Network phi = payoff_net(
        rep % 2 ? PayoffFamily::CallOnMax : PayoffFamily::BasketPut, c, 0.25);
    std::vector<AffineMap> maps;
    for (Eigen::Index i = 0; i < n; ++i) {
      AffineMap m;
      m.A = Matrix::Zero(d, d);
      for (Eigen::Index r = 0; r < d; ++r)
        for (Eigen::Index col = 0; col < d; ++col) m.A(r, col) = rng.uniform(-1.0, 1.0);
      m.b = rng.uniforms(d, -0.5, 0.5);
      maps.push_back(std::move(m));
    }
    const Network psi = multichannel(phi, maps);
    CHECK(param_count(psi) <= n * n * param_count(phi));
    CHECK(nonzero_param_count(psi) <= n * param_count(phi));
    for (int pt = 0; pt < 25; ++pt) {
      const Vector x = rng.uniforms(d, -2.0, 2.0);
      double avg = 0.0;
      for (const AffineMap& m : maps) avg += realize(phi, apply(m, x));
      avg /= static_cast<double>(n);
      CHECK(std::abs(realize(psi, x) - avg) <= 1e-9 * (1.0 + std::abs(avg)));
    }
  }
}

TEST_CASE("builders validate their arguments") {
  CHECK_THROWS_AS(basket_call_net(Vector(0), 1.0), std::invalid_argument);
  CHECK_THROWS_AS(basket_put_net(Vector(0), 1.0), std::invalid_argument);
  CHECK_THROWS_AS(call_on_max_net(Vector(0), 1.0), std::invalid_argument);
  CHECK_THROWS_AS(call_on_min_net(Vector(0), 1.0), std::invalid_argument);
  const Network phi = basket_call_net(Vector::Ones(2), 1.0);
  CHECK_THROWS_AS(multichannel(phi, {}), std::invalid_argument);
  CHECK_THROWS_WITH_AS(
      multichannel(phi, {AffineMap{Matrix::Identity(3, 3), Vector::Zero(3)}}),
      doctest::Contains("map 0"), std::invalid_argument);
}
