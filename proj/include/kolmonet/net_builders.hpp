#pragma once

#include <vector>

#include "kolmonet/affine.hpp"
#include "kolmonet/ann.hpp"

namespace kolmonet {

// Exact ReLU networks for the four payoff families. Realizations equal the
// closed-form payoffs up to dot-product rounding.

// dims (d, 1, 1); realizes max(sum_i c_i x_i - K, 0).
Network basket_call_net(const Eigen::Ref<const Vector>& c, double K);

// dims (d, 1, 1); realizes max(K - sum_i c_i x_i, 0).
Network basket_put_net(const Eigen::Ref<const Vector>& c, double K);

// dims (d, 2(d-1)+1, 2(d-2)+1, ..., 3, 1, 1) for d >= 2; realizes
// max(max_i c_i x_i - K, 0). For d = 1 the payoff degenerates to the basket
// call and the builder delegates there.
Network call_on_max_net(const Eigen::Ref<const Vector>& c, double K);

// Same dims as call_on_max_net; realizes max(min_i c_i x_i - K, 0).
Network call_on_min_net(const Eigen::Ref<const Vector>& c, double K);

// Averaging composition: for phi with dims (d, u_1, ..., u_{N-1}, 1) and n
// affine maps on R^d, returns psi with dims (d, n u_1, ..., n u_{N-1}, 1)
// and realize(psi, x) == (1/n) sum_i realize(phi, A_i x + b_i). The first
// layer stacks W_1 A_i with biases W_1 b_i + B_1, middle layers are block
// diagonal copies, and the output row is (1/n)(W_N | ... | W_N) with bias
// B_N. Entry counts obey param_count(psi) <= n^2 param_count(phi) and
// nonzero_param_count(psi) <= n * param_count(phi).
Network multichannel(const Network& phi, const std::vector<AffineMap>& maps);

}  // namespace kolmonet
