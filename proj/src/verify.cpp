#include "kolmonet/verify.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <random>
#include <sstream>
#include <string>
#include <utility>

#include "kolmonet/constructor.hpp"
#include "kolmonet/net_builders.hpp"

namespace kolmonet {

namespace {

using Clock = std::chrono::steady_clock;

std::string str(double v) {
  char buf[64];
  const auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, p);
}

template <class F>
CheckResult run_check(std::string name, F&& body) {
  CheckResult r;
  r.name = std::move(name);
  const auto t0 = Clock::now();
  try {
    auto [pass, detail] = body();
    r.pass = pass;
    r.detail = std::move(detail);
  } catch (const std::exception& ex) {
    r.pass = false;
    r.detail = std::string("exception: ") + ex.what();
  }
  r.seconds = std::chrono::duration<double>(Clock::now() - t0).count();
  return r;
}

// Tracks the largest residual/tolerance ratio; the check passes while <= 1.
struct Worst {
  double ratio = 0.0;
  std::string where;
  void update(double residual, double tolerance, const std::string& w) {
    const double q = residual / tolerance;
    if (q > ratio) {
      ratio = q;
      where = w;
    }
  }
  bool ok() const { return ratio <= 1.0; }
  std::string detail(const std::string& what) const {
    std::string s = what + "; worst residual/tolerance " + str(ratio);
    if (!where.empty()) s += " at " + where;
    return s;
  }
};

Eigen::Index rand_int(RngStream& rng, Eigen::Index lo, Eigen::Index hi) {
  return std::uniform_int_distribution<Eigen::Index>(lo, hi)(rng.engine());
}

Matrix uniform_matrix(RngStream& rng, Eigen::Index rows, Eigen::Index cols,
                      double a, double b) {
  Matrix m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = rng.uniform(a, b);
  return m;
}

Network random_phi(RngStream& rng, Eigen::Index d) {
  const Eigen::Index depth = rand_int(rng, 2, 4);
  std::vector<Eigen::Index> widths(static_cast<std::size_t>(depth) + 1);
  widths.front() = d;
  for (Eigen::Index k = 1; k < depth; ++k)
    widths[static_cast<std::size_t>(k)] = rand_int(rng, 1, 5);
  widths.back() = 1;
  std::vector<Layer> layers(static_cast<std::size_t>(depth));
  for (Eigen::Index k = 0; k < depth; ++k) {
    const Eigen::Index rows = widths[static_cast<std::size_t>(k) + 1];
    const Eigen::Index cols = widths[static_cast<std::size_t>(k)];
    layers[static_cast<std::size_t>(k)].W = uniform_matrix(rng, rows, cols, -1.0, 1.0);
    layers[static_cast<std::size_t>(k)].b = rng.uniforms(rows, -1.0, 1.0);
  }
  return Network(std::move(layers));
}

BlackScholesModel random_model(RngStream& rng, Eigen::Index d, double coeff_range) {
  return make_model(rng.uniforms(d, -coeff_range, coeff_range),
                    rng.uniforms(d, -coeff_range, coeff_range),
                    uniform_matrix(rng, d, d, -1.0, 1.0));
}

// --- construction-level checks -------------------------------------------

std::pair<bool, std::string> payoff_exactness(std::uint64_t seed, std::uint64_t tag,
                                              double c_lo, double c_hi, double k_lo,
                                              double k_hi) {
  RngStream rng(seed, tag);
  Worst worst;
  for (PayoffFamily f : {PayoffFamily::BasketCall, PayoffFamily::BasketPut,
                         PayoffFamily::CallOnMax, PayoffFamily::CallOnMin}) {
    const bool basket =
        f == PayoffFamily::BasketCall || f == PayoffFamily::BasketPut;
    for (Eigen::Index d = basket ? 1 : 2; d <= 16; ++d) {
      for (int it = 0; it < 1000; ++it) {
        const Vector c = rng.uniforms(d, c_lo, c_hi);
        const double K = rng.uniform(k_lo, k_hi);
        const Vector x = rng.uniforms(d, -2.0, 2.0);
        const Network net = payoff_net(f, c, K);
        const double want = payoff_value(f, c, K, x);
        const double got = realize(net, x);
        worst.update(std::abs(got - want), 1e-12 * (1.0 + std::abs(want)),
                     std::string(payoff_family_name(f)) + " d=" + std::to_string(d));
      }
    }
  }
  return {worst.ok(),
          worst.detail("1000 draws per (family, d), d up to 16, tol 1e-12*(1+|payoff|)")};
}

std::pair<bool, std::string> param_count_formulas() {
  for (Eigen::Index d = 2; d <= 32; ++d) {
    const Vector c = Vector::Constant(d, 1.0);
    const std::int64_t basket = param_count(basket_call_net(c, 1.0));
    const std::int64_t put = param_count(basket_put_net(c, 1.0));
    std::int64_t layered = (2 * (d - 1) + 1) * (d + 1) + 2;
    for (Eigen::Index k = 1; k <= d - 1; ++k)
      layered += (2 * (d - (k + 1)) + 1) * (2 * (d - k) + 2);
    const std::int64_t mx = param_count(call_on_max_net(c, 1.0));
    const std::int64_t mn = param_count(call_on_min_net(c, 1.0));
    const bool ok = basket == d + 3 && put == d + 3 && basket <= 4 * d &&
                    mx == layered && mn == layered && mx <= 6 * d * d * d;
    if (!ok)
      return {false, "mismatch at d=" + std::to_string(d) + ": basket " +
                         std::to_string(basket) + " vs " + std::to_string(d + 3) +
                         ", extremum " + std::to_string(mx) + " vs " +
                         std::to_string(layered)};
  }
  return {true, "d in 2..32: basket == d+3 <= 4d, extremum == layered sum <= 6d^3"};
}

std::pair<bool, std::string> multichannel_identity(std::uint64_t seed,
                                                   std::uint64_t tag) {
  RngStream rng(seed, tag);
  Worst worst;
  for (int inst = 0; inst < 100; ++inst) {
    const Eigen::Index d = rand_int(rng, 1, 4);
    const Network phi = random_phi(rng, d);
    const Eigen::Index n = rand_int(rng, 1, 8);
    std::vector<AffineMap> maps;
    maps.reserve(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i)
      maps.push_back({uniform_matrix(rng, d, d, -1.0, 1.0), rng.uniforms(d, -1.0, 1.0)});
    const Network psi = multichannel(phi, maps);
    const std::int64_t p_phi = param_count(phi);
    if (param_count(psi) > n * n * p_phi || nonzero_param_count(psi) > n * p_phi ||
        nonzero_param_count(psi) > param_count(psi))
      return {false, "count bound violated at instance " + std::to_string(inst) +
                         " (n=" + std::to_string(n) + ")"};
    for (int t = 0; t < 100; ++t) {
      const Vector x = rng.uniforms(d, -2.0, 2.0);
      double avg = 0.0;
      for (const AffineMap& m : maps) avg += realize(phi, apply(m, x));
      avg /= static_cast<double>(n);
      worst.update(std::abs(realize(psi, x) - avg), 1e-9 * (1.0 + std::abs(avg)),
                   "instance " + std::to_string(inst));
    }
  }
  return {worst.ok(),
          worst.detail("100 instances x 100 points, count bounds on every instance")};
}

std::pair<bool, std::string> maxmin_pointwise(std::uint64_t seed, std::uint64_t tag) {
  RngStream rng(seed, tag);
  Worst worst;
  for (int it = 0; it < 500; ++it) {
    const double x = rng.uniform(-3.0, 3.0);
    const double y = rng.uniform(-3.0, 3.0);
    const double pos = relu(x - y);
    const double tol = 1e-12 * (1.0 + std::abs(x) + std::abs(y));
    worst.update(std::abs(pos + y - std::max(x, y)), tol, "max");
    worst.update(std::abs(-pos + x - std::min(x, y)), tol, "min");
  }
  return {worst.ok(), worst.detail("max/min rewrites via (x-y)^+, 500 pairs")};
}

bool layers_equal(const Network& a, const Network& b) {
  if (a.depth() != b.depth()) return false;
  for (std::size_t k = 0; k < a.layers().size(); ++k) {
    const Layer& la = a.layers()[k];
    const Layer& lb = b.layers()[k];
    if (la.W.rows() != lb.W.rows() || la.W.cols() != lb.W.cols()) return false;
    if ((la.W.array() != lb.W.array()).any()) return false;
    if ((la.b.array() != lb.b.array()).any()) return false;
  }
  return true;
}

std::pair<bool, std::string> serialization_roundtrip(std::uint64_t seed,
                                                     std::uint64_t tag) {
  RngStream rng(seed, tag);
  std::vector<Network> nets;
  const Vector c5 = rng.uniforms(5, -2.0, 2.0);
  nets.push_back(basket_call_net(c5, 0.7));
  nets.push_back(basket_put_net(c5, 0.7));
  nets.push_back(call_on_max_net(c5, 0.7));
  nets.push_back(call_on_min_net(c5, 0.7));
  for (int i = 0; i < 20; ++i) nets.push_back(random_phi(rng, rand_int(rng, 1, 4)));
  for (std::size_t i = 0; i < nets.size(); ++i) {
    if (nonzero_param_count(nets[i]) > param_count(nets[i]))
      return {false, "nonzero count exceeds total at net " + std::to_string(i)};
    std::stringstream ss;
    save_network(nets[i], ss);
    const Network back = load_network(ss);
    if (!layers_equal(nets[i], back))
      return {false, "round trip not exact at net " + std::to_string(i)};
  }
  return {true, "24 networks, text round trip bit-exact"};
}

std::pair<bool, std::string> realize_continuity(std::uint64_t seed,
                                                std::uint64_t tag) {
  RngStream rng(seed, tag);
  Worst worst;
  for (int i = 0; i < 20; ++i) {
    const Eigen::Index d = rand_int(rng, 1, 4);
    const Network phi = random_phi(rng, d);
    double lip = 1.0;
    for (const Layer& l : phi.layers()) lip *= l.W.norm();
    for (int t = 0; t < 20; ++t) {
      const Vector x = rng.uniforms(d, -2.0, 2.0);
      Vector u = rng.normals(d);
      if (u.norm() < 1e-12) u = Vector::Ones(d);
      u.normalize();
      const double h = 1e-6;
      const double diff = std::abs(realize(phi, (x + h * u).eval()) - realize(phi, x));
      worst.update(diff, lip * h * (1.0 + 1e-6) + 1e-12, "net " + std::to_string(i));
    }
  }
  return {worst.ok(), worst.detail("finite-difference continuity vs Frobenius "
                                   "Lipschitz product, 20 nets x 20 points")};
}

std::pair<bool, std::string> output_layer_scaling(std::uint64_t seed,
                                                  std::uint64_t tag) {
  RngStream rng(seed, tag);
  Worst worst;
  for (int i = 0; i < 20; ++i) {
    const Eigen::Index d = rand_int(rng, 1, 4);
    const Network phi = random_phi(rng, d);
    const double s = rng.uniform(-3.0, 3.0);
    std::vector<Layer> layers = phi.layers();
    layers.back().W *= s;
    layers.back().b *= s;
    const Network scaled(std::move(layers));
    for (int t = 0; t < 20; ++t) {
      const Vector x = rng.uniforms(d, -2.0, 2.0);
      const double want = s * realize(phi, x);
      worst.update(std::abs(realize(scaled, x) - want),
                   1e-12 * (1.0 + std::abs(want)), "net " + std::to_string(i));
    }
  }
  return {worst.ok(), worst.detail("output layer scaled by s scales the "
                                   "realization by s, 20 nets x 20 points")};
}

std::pair<bool, std::string> affine_recovery(std::uint64_t seed, std::uint64_t tag) {
  RngStream rng(seed, tag);
  Worst worst;
  for (int it = 0; it < 100; ++it) {
    const Eigen::Index d = rand_int(rng, 1, 16);
    const AffineMap m{uniform_matrix(rng, d, d, -2.0, 2.0), rng.uniforms(d, -2.0, 2.0)};
    const auto f = [&m](const Vector& v) { return apply(m, v); };
    const AffineMap rec = recover_affine(f, d);
    const std::string w = "map " + std::to_string(it);
    for (Eigen::Index j = 0; j < d; ++j) {
      worst.update(std::abs(rec.b[j] - m.b[j]), 1e-12 * (1.0 + std::abs(m.b[j])), w);
      for (Eigen::Index i = 0; i < d; ++i)
        worst.update(std::abs(rec.A(i, j) - m.A(i, j)),
                     1e-12 * (1.0 + std::abs(m.A(i, j))), w);
    }
    if (!check_affine(f, d, 20, 1e-12, stream_mix(tag, static_cast<std::uint64_t>(it))))
      return {false, "check_affine rejected the exact map " + std::to_string(it)};
    for (int t = 0; t < 10; ++t) {
      const Vector x = rng.uniforms(d, -2.0, 2.0);
      worst.update((apply(rec, x) - f(x)).norm(), 1e-12 * (1.0 + f(x).norm()), w);
    }
  }
  return {worst.ok(),
          worst.detail("recover_affine round trip + sampled re-application, 100 maps")};
}

std::pair<bool, std::string> affine_growth(std::uint64_t seed, std::uint64_t tag) {
  RngStream rng(seed, tag);
  Worst worst;
  for (int it = 0; it < 50; ++it) {
    const Eigen::Index d = rand_int(rng, 1, 8);
    const AffineMap m{uniform_matrix(rng, d, d, -2.0, 2.0), rng.uniforms(d, -2.0, 2.0)};
    const double g = growth_constant(m);
    for (int t = 0; t < 20; ++t) {
      const Vector x = rng.uniforms(d, -3.0, 3.0);
      const Vector y = rng.uniforms(d, -3.0, 3.0);
      const std::string w = "map " + std::to_string(it);
      worst.update(apply(m, x).norm(), g * (1.0 + x.norm()) * (1.0 + 1e-12), w);
      worst.update((apply(m, x) - apply(m, y)).norm(),
                   g * (x - y).norm() * (1.0 + 1e-12) + 1e-15, w);
    }
  }
  return {worst.ok(), worst.detail("growth and Lipschitz inequalities of "
                                   "growth_constant, 50 maps x 20 points")};
}

// --- SDE checks ------------------------------------------------------------

std::pair<bool, std::string> flow_linearity(std::uint64_t seed, std::uint64_t tag) {
  RngStream rng(seed, tag);
  Worst worst;
  for (int it = 0; it < 100; ++it) {
    const Eigen::Index d = rand_int(rng, 1, 8);
    const BlackScholesModel m = random_model(rng, d, 0.5);
    const double T = rng.uniform(0.25, 2.0);
    const Vector noise = rng.normals(d);
    const Vector x = rng.uniforms(d, -2.0, 2.0);
    const Vector y = rng.uniforms(d, -2.0, 2.0);
    const double lam = rng.uniform(-3.0, 3.0);
    const Vector lhs = sample_terminal_exact(m, T, (lam * x + y).eval(), noise) +
                       lam * sample_terminal_exact(m, T, Vector::Zero(d), noise);
    const Vector rhs = lam * sample_terminal_exact(m, T, x, noise) +
                       sample_terminal_exact(m, T, y, noise);
    for (Eigen::Index i = 0; i < d; ++i)
      worst.update(std::abs(lhs[i] - rhs[i]),
                   1e-12 * (1.0 + std::abs(lhs[i]) + std::abs(rhs[i])),
                   "case " + std::to_string(it));
  }
  return {worst.ok(),
          worst.detail("X^{lx+y} + l X^0 == l X^x + X^y with shared noise, 100 cases")};
}

std::pair<bool, std::string> solution_map_recovery(std::uint64_t seed,
                                                   std::uint64_t tag) {
  RngStream rng(seed, tag);
  Worst worst;
  for (int it = 0; it < 100; ++it) {
    const Eigen::Index d = rand_int(rng, 1, 8);
    const BlackScholesModel m = random_model(rng, d, 0.5);
    const double T = rng.uniform(0.25, 2.0);
    const Vector noise = rng.normals(d);
    const AffineMap want = sample_solution_map(m, T, noise);
    const AffineMap got = recover_affine(
        [&](const Vector& v) { return sample_terminal_exact(m, T, v, noise); }, d);
    const std::string w = "case " + std::to_string(it);
    for (Eigen::Index j = 0; j < d; ++j) {
      worst.update(std::abs(got.b[j] - want.b[j]), 1e-12, w);
      for (Eigen::Index i = 0; i < d; ++i)
        worst.update(std::abs(got.A(i, j) - want.A(i, j)),
                     1e-12 * (1.0 + std::abs(want.A(i, j))), w);
    }
  }
  return {worst.ok(),
          worst.detail("recover_affine of the exact flow == sample_solution_map, "
                       "100 cases")};
}

std::pair<bool, std::string> moment_bound_check(std::uint64_t seed,
                                                std::uint64_t tag) {
  double min_ratio = std::numeric_limits<double>::infinity();
  for (const Eigen::Index d : {Eigen::Index{1}, Eigen::Index{5}}) {
    RngStream rng(seed, stream_mix(tag, static_cast<std::uint64_t>(d)));
    const BlackScholesModel m = random_model(rng, d, 0.3);
    const Eigen::Index N = 1'000'000;
    Vector ns2(N);
    for (Eigen::Index i = 0; i < N; ++i)
      ns2[i] = terminal_factors(m, 1.0, rng.normals(d)).squaredNorm();
    for (const double p : {2.0, 4.0}) {
      const double lhs = p == 2.0
                             ? std::sqrt(pairwise_sum(ns2) / static_cast<double>(N))
                             : std::pow(pairwise_sum(ns2.cwiseProduct(ns2)) /
                                            static_cast<double>(N),
                                        0.25);
      const double bound =
          moment_bound(moment_inputs(m, p, 1.0, std::sqrt(static_cast<double>(d))));
      if (!(lhs <= bound))
        return {false, "violation at d=" + std::to_string(d) + " p=" + str(p) +
                           ": empirical " + str(lhs) + " > bound " + str(bound)};
      min_ratio = std::min(min_ratio, bound / lhs);
    }
  }
  return {true, "1e6 exact samples per d in {1,5}, p in {2,4}, x0 = ones; min "
                "bound/empirical ratio " +
                    str(min_ratio)};
}

std::pair<bool, std::string> coefficient_affinity(std::uint64_t seed,
                                                  std::uint64_t tag) {
  RngStream rng(seed, tag);
  for (int it = 0; it < 20; ++it) {
    const Eigen::Index d = rand_int(rng, 1, 6);
    const BlackScholesModel m = random_model(rng, d, 0.5);
    const auto mu_fn = [&m](const Vector& v) { return mu(m, v); };
    const auto sigma_flat = [&m](const Vector& v) {
      const Matrix s = sigma(m, v);
      return Vector(Eigen::Map<const Vector>(s.data(), s.size()));
    };
    if (mu_fn(Vector::Zero(d)).norm() != 0.0)
      return {false, "mu(0) != 0 at case " + std::to_string(it)};
    if (sigma_flat(Vector::Zero(d)).norm() != 0.0)
      return {false, "sigma(0) != 0 at case " + std::to_string(it)};
    const std::uint64_t s1 = stream_mix(tag, static_cast<std::uint64_t>(2 * it));
    const std::uint64_t s2 = stream_mix(tag, static_cast<std::uint64_t>(2 * it + 1));
    if (!check_affine(mu_fn, d, 20, 1e-12, s1))
      return {false, "mu failed check_affine at case " + std::to_string(it)};
    if (!check_affine(sigma_flat, d, 20, 1e-12, s2))
      return {false, "sigma failed check_affine at case " + std::to_string(it)};
  }
  return {true, "mu and flattened sigma affine with zero offset, 20 models"};
}

std::pair<bool, std::string> euler_crosscheck(std::uint64_t seed, std::uint64_t tag) {
  Vector alpha(2), beta(2), x0(2), c(2);
  alpha << 0.03, -0.02;
  beta << 0.2, 0.3;
  x0 << 1.0, 1.1;
  c << 0.5, 0.5;
  const BlackScholesModel bsm = make_model(alpha, beta, equicorrelation_factor(2, 0.5));
  const double K = 0.9;
  const double T = 1.0;
  const Eigen::Index paths = 30000;
  const Eigen::Index steps = 1024;
  RngStream er(seed, stream_mix(tag, std::uint64_t{1}));
  RngStream xr(seed, stream_mix(tag, std::uint64_t{2}));
  const auto mu_fn = [&bsm](const Vector& v) { return mu(bsm, v); };
  const auto sigma_fn = [&bsm](const Vector& v) { return sigma(bsm, v); };
  Vector ev(paths), xv(paths);
  Matrix incr(2, steps);
  for (Eigen::Index path = 0; path < paths; ++path) {
    for (Eigen::Index j = 0; j < steps; ++j) {
      incr(0, j) = er.normal();
      incr(1, j) = er.normal();
    }
    ev[path] = payoff_value(PayoffFamily::BasketCall, c, K,
                            euler_maruyama(mu_fn, sigma_fn, T, steps, x0, incr));
    xv[path] = payoff_value(PayoffFamily::BasketCall, c, K,
                            sample_terminal_exact(bsm, T, x0, xr.normals(2)));
  }
  const auto mean_se = [paths](const Vector& v) {
    const double m = mc_mean(v);
    const double var =
        std::max(0.0, pairwise_sum(v.cwiseProduct(v)) / static_cast<double>(paths) -
                          m * m);
    return std::pair<double, double>(m, std::sqrt(var / static_cast<double>(paths)));
  };
  const auto [me, se_e] = mean_se(ev);
  const auto [mx, se_x] = mean_se(xv);
  const double tol =
      4.0 * std::sqrt(se_e * se_e + se_x * se_x) + 2e-3 * (1.0 + std::abs(mx));
  const bool ok = std::abs(me - mx) <= tol;
  return {ok, "basket payoff mean: Euler " + str(me) + " vs exact " + str(mx) +
                  ", diff " + str(std::abs(me - mx)) + " tol " + str(tol) + " (" +
                  std::to_string(paths) + " paths, " + std::to_string(steps) +
                  " steps)"};
}

// --- Monte-Carlo grid (shared by the mc suite and criteria 5/6) ------------

enum class GridDist { Bernoulli, Uniform, Lognormal };

struct GridSetup {
  GridDist dist = GridDist::Bernoulli;
  const char* name = "";
  Eigen::Index n = 0;
  double mean = 0.0;
  double sd = 0.0;
  double central4 = 0.0;
  Eigen::Index reps = 0;
  double rms = 0.0;
  double lhs2 = 0.0;
  double lhs4 = 0.0;
  double grand = 0.0;
  Eigen::Index flags2 = 0;
  Eigen::Index flags4 = 0;
};

// One pass per (distribution, n): 1e5 repetitions of the n-sample mean, with
// the per-repetition plug-in central moments kept for the L^p bound check.
std::vector<GridSetup> run_mc_grid(std::uint64_t seed, std::uint64_t tag) {
  const double ln_mean = std::exp(0.125);
  const double ln_sd = std::sqrt(std::exp(0.5) - std::exp(0.25));
  const double ln_c4 = std::exp(2.0) - 4.0 * std::exp(1.25) +
                       6.0 * std::exp(0.75) - 3.0 * std::exp(0.5);
  std::vector<GridSetup> grid;
  for (const GridDist dist :
       {GridDist::Bernoulli, GridDist::Uniform, GridDist::Lognormal})
    for (const Eigen::Index n : {Eigen::Index{100}, Eigen::Index{10000}}) {
      GridSetup s;
      s.dist = dist;
      s.n = n;
      switch (dist) {
        case GridDist::Bernoulli:
          s.name = "bernoulli(1/2)";
          s.mean = 0.5;
          s.sd = 0.5;
          s.central4 = 1.0 / 16.0;
          break;
        case GridDist::Uniform:
          s.name = "uniform(0,1)";
          s.mean = 0.5;
          s.sd = std::sqrt(1.0 / 12.0);
          s.central4 = 1.0 / 80.0;
          break;
        case GridDist::Lognormal:
          s.name = "lognormal(0,1/2)";
          s.mean = ln_mean;
          s.sd = ln_sd;
          s.central4 = ln_c4;
          break;
      }
      grid.push_back(s);
    }

  const Eigen::Index R = 100000;
  for (GridSetup& s : grid) {
    RngStream rng(seed,
                  stream_mix(stream_mix(tag, static_cast<std::uint64_t>(s.dist)),
                             static_cast<std::uint64_t>(s.n)));
    Vector buf(s.n), dev(s.n), err(R), plug2(R), plug4(R);
    std::uint64_t word = 0;
    int bits = 0;
    for (Eigen::Index r = 0; r < R; ++r) {
      switch (s.dist) {
        case GridDist::Bernoulli:
          for (Eigen::Index i = 0; i < s.n; ++i) {
            if (bits == 0) {
              word = rng.engine()();
              bits = 64;
            }
            buf[i] = static_cast<double>(word & 1u);
            word >>= 1;
            --bits;
          }
          break;
        case GridDist::Uniform:
          for (Eigen::Index i = 0; i < s.n; ++i) buf[i] = rng.uniform();
          break;
        case GridDist::Lognormal:
          for (Eigen::Index i = 0; i < s.n; ++i)
            buf[i] = std::exp(0.5 * rng.normal());
          break;
      }
      const double m = pairwise_sum(buf) / static_cast<double>(s.n);
      err[r] = m - s.mean;
      dev = (buf.array() - m).square().matrix();
      plug2[r] = pairwise_sum(dev) / static_cast<double>(s.n);
      dev = dev.cwiseProduct(dev);
      plug4[r] = pairwise_sum(dev) / static_cast<double>(s.n);
    }
    const Vector e2 = err.cwiseProduct(err);
    s.reps = R;
    s.rms = std::sqrt(pairwise_sum(e2) / static_cast<double>(R));
    s.lhs2 = s.rms;
    s.lhs4 =
        std::pow(pairwise_sum(e2.cwiseProduct(e2)) / static_cast<double>(R), 0.25);
    s.grand = pairwise_sum(err) / static_cast<double>(R) + s.mean;
    for (Eigen::Index r = 0; r < R; ++r) {
      if (s.lhs2 > lp_mc_error_bound(2.0, s.n, std::sqrt(plug2[r]))) ++s.flags2;
      if (s.lhs4 > lp_mc_error_bound(4.0, s.n, std::pow(plug4[r], 0.25))) ++s.flags4;
    }
  }
  return grid;
}

std::pair<bool, std::string> grid_l2_check(const std::vector<GridSetup>& grid) {
  if (grid.empty()) return {false, "no grid statistics (sampling pass failed)"};
  double worst_rel = 0.0;
  std::string at;
  for (const GridSetup& s : grid) {
    const double target = s.sd / std::sqrt(static_cast<double>(s.n));
    const double rel = std::abs(s.rms - target) / target;
    if (rel > worst_rel) {
      worst_rel = rel;
      at = std::string(s.name) + " n=" + std::to_string(s.n);
    }
  }
  return {worst_rel <= 0.02,
          "RMS vs sd/sqrt(n) over 1e5 repetitions, 3 distributions x n in "
          "{100,10000}; worst relative deviation " +
              str(worst_rel) + " at " + at + " (tol 0.02)"};
}

std::pair<bool, std::string> grid_lp_check(const std::vector<GridSetup>& grid) {
  if (grid.empty()) return {false, "no grid statistics (sampling pass failed)"};
  double max_flag_frac = 0.0;
  double min_margin = std::numeric_limits<double>::infinity();
  for (const GridSetup& s : grid) {
    const double frac =
        static_cast<double>(std::max(s.flags2, s.flags4)) / static_cast<double>(s.reps);
    max_flag_frac = std::max(max_flag_frac, frac);
    const double b2 = lp_mc_error_bound(2.0, s.n, s.sd);
    const double b4 = lp_mc_error_bound(4.0, s.n, std::pow(s.central4, 0.25));
    if (!(s.lhs2 <= b2 && s.lhs4 <= b4))
      return {false, std::string("hard failure with analytic moments at ") + s.name +
                         " n=" + std::to_string(s.n)};
    min_margin = std::min({min_margin, b2 / s.lhs2, b4 / s.lhs4});
  }
  return {max_flag_frac <= 0.01,
          "plug-in flag fraction max " + str(max_flag_frac) +
              " (budget 0.01); zero analytic-moment failures, min bound/empirical "
              "ratio " +
              str(min_margin)};
}

std::pair<bool, std::string> grid_unbiased_check(const std::vector<GridSetup>& grid) {
  if (grid.empty()) return {false, "no grid statistics (sampling pass failed)"};
  Worst worst;
  for (const GridSetup& s : grid)
    worst.update(std::abs(s.grand - s.mean),
                 4.0 * s.sd / std::sqrt(static_cast<double>(s.n * s.reps)),
                 std::string(s.name) + " n=" + std::to_string(s.n));
  return {worst.ok(), worst.detail("grand mean within 4 stderr of the true mean")};
}

std::pair<bool, std::string> norm_moment_bounds(std::uint64_t seed,
                                                std::uint64_t tag) {
  struct Box {
    Eigen::Index d;
    double lo, hi;
  };
  const Box boxes[] = {{1, 0.0, 1.0}, {3, -1.0, 1.0}, {8, 0.0, 2.0}, {4, -2.0, 0.5}};
  std::uint64_t k = 0;
  double min_ratio = std::numeric_limits<double>::infinity();
  for (const Box& b : boxes)
    for (const double q : {2.0, 4.0}) {
      RngStream rng(seed, stream_mix(tag, k++));
      const NormMoment nm = norm_moment(UniformBox{b.d, b.lo, b.hi}, q, 20000, rng);
      if (!nm.analytic_upper) return {false, "missing analytic bound for a box"};
      if (!(nm.estimate <= *nm.analytic_upper * (1.0 + 1e-9)))
        return {false, "estimate " + str(nm.estimate) + " above analytic bound " +
                           str(*nm.analytic_upper) + " (d=" + std::to_string(b.d) +
                           ", q=" + str(q) + ")"};
      min_ratio = std::min(min_ratio, *nm.analytic_upper / nm.estimate);
    }
  return {true, "4 boxes x q in {2,4}, 2e4 samples; min bound/estimate ratio " +
                    str(min_ratio)};
}

std::pair<bool, std::string> stream_determinism(std::uint64_t seed,
                                                std::uint64_t tag) {
  RngStream a(seed, tag), b(seed, tag);
  const Vector va = a.normals(64), vb = b.normals(64);
  if ((va.array() != vb.array()).any())
    return {false, "same (seed, stream) produced different normals"};
  RngStream c(seed, stream_mix(tag, std::uint64_t{1}));
  RngStream d(seed, stream_mix(tag, std::uint64_t{1}));
  const MeasureSpec box = UniformBox{3, -1.0, 2.0};
  const Matrix ma = sample_measure(box, 50, c), mb = sample_measure(box, 50, d);
  if ((ma.array() != mb.array()).any())
    return {false, "same (seed, stream) produced different measure samples"};
  RngStream e(seed, stream_mix(tag, std::uint64_t{2}));
  const Matrix mc = sample_measure(box, 50, e);
  if ((mc.array() == ma.array()).all())
    return {false, "distinct streams produced identical samples"};
  return {true, "identical (seed, stream) replays bit-exactly; distinct streams differ"};
}

// --- end-to-end builds ------------------------------------------------------

ApproximationSpec d1_build_spec() {
  ApproximationSpec spec;
  spec.model = make_model(Vector::Constant(1, 0.02), Vector::Constant(1, 0.2));
  spec.T = 1.0;
  spec.family = PayoffFamily::BasketCall;
  spec.weights = Vector::Ones(1);
  spec.strike = 0.5;
  spec.p = 2.0;
  spec.epsilon = 0.01;
  spec.measure = UniformBox{1, 0.0, 1.0};
  spec.mode = BuildMode::Empirical;
  spec.max_attempts = 24;
  spec.eval_samples = 1024;
  spec.oracle_samples = 1'000'000;
  return spec;
}

std::pair<bool, std::string> end_to_end_builds(std::uint64_t seed,
                                               std::uint64_t tag) {
  std::ostringstream info;
  bool ok = true;
  {
    const ApproximationSpec spec = d1_build_spec();
    const BuildResult r = build_approximator(
        spec, theory_exponents_for(spec.family),
        stream_mix(stream_mix(tag, std::uint64_t{1}), seed));
    ok = ok && r.report.success && r.report.measured_lp_error <= spec.epsilon;
    info << "d=1 eps=0.01: err " << str(r.report.measured_lp_error) << " n "
         << r.report.n_used << " attempts " << r.report.attempts;
  }
  for (const Eigen::Index d : {Eigen::Index{2}, Eigen::Index{5}, Eigen::Index{10}}) {
    ApproximationSpec spec = d1_build_spec();
    spec.model = make_model(Vector::Constant(d, 0.02), Vector::Constant(d, 0.2));
    spec.weights = Vector::Constant(d, 1.0 / static_cast<double>(d));
    spec.epsilon = 0.05;
    spec.measure = UniformBox{d, 0.0, 1.0};
    const BuildResult r = build_approximator(
        spec, theory_exponents_for(spec.family),
        stream_mix(stream_mix(tag, static_cast<std::uint64_t>(d)), seed));
    ok = ok && r.report.success && r.report.measured_lp_error <= spec.epsilon;
    info << "; d=" << d << " eps=0.05: err " << str(r.report.measured_lp_error)
         << " n " << r.report.n_used << " attempts " << r.report.attempts;
  }
  return {ok, info.str()};
}

std::pair<bool, std::string> convergence_exponent(std::uint64_t seed,
                                                  std::uint64_t tag) {
  // The mean build error at n channels decays like n^{-1/2}, so the n needed
  // to reach a target epsilon should grow like epsilon^{-2}. Walk the doubling
  // ladder, estimate the mean error per rung, and read off the first rung
  // whose mean is at or below each target. The three targets sit exactly 4x
  // apart in n, so rung rounding shifts all crossings equally and the fitted
  // slope stays centred on 2.
  ApproximationSpec spec;
  spec.model = make_model(Vector::Constant(1, 0.02), Vector::Constant(1, 0.2));
  spec.T = 1.0;
  spec.family = PayoffFamily::BasketCall;
  spec.weights = Vector::Ones(1);
  spec.strike = 12.0;
  spec.p = 2.0;
  spec.epsilon = 1e-6;  // unreachable: every build reports its fresh error
  spec.measure = UniformBox{1, 0.0, 24.0};
  spec.mode = BuildMode::Empirical;
  spec.max_attempts = 1;
  spec.eval_samples = 2048;
  spec.oracle_samples = 10000;

  const double eps_list[3] = {0.2, 0.1, 0.05};
  const int builds_per_rung = 16;
  const int replicates = 8;
  std::vector<double> lx;
  std::vector<double> ly;
  std::vector<double> crossings[3];
  for (int rep = 0; rep < replicates; ++rep) {
    const std::uint64_t rep_seed =
        stream_mix(stream_mix(tag, seed), static_cast<std::uint64_t>(rep));
    int next = 0;
    for (Eigen::Index rung = 32; next < 3 && rung <= 32768; rung *= 2) {
      spec.start_n = rung;
      spec.n_cap = rung;
      double sum = 0.0;
      for (int k = 0; k < builds_per_rung; ++k) {
        const std::uint64_t build_seed =
            stream_mix(stream_mix(rep_seed, static_cast<std::uint64_t>(rung)),
                       static_cast<std::uint64_t>(k));
        sum += build_approximator(spec, std::nullopt, build_seed)
                   .report.measured_lp_error;
      }
      const double mean = sum / builds_per_rung;
      while (next < 3 && mean <= eps_list[next]) {
        crossings[next].push_back(static_cast<double>(rung));
        lx.push_back(std::log(1.0 / eps_list[next]));
        ly.push_back(std::log(static_cast<double>(rung)));
        ++next;
      }
    }
    if (next < 3)
      return {false, "mean error did not reach 0.05 within 32768 channels"};
  }
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    mx += lx[i];
    my += ly[i];
  }
  mx /= static_cast<double>(lx.size());
  my /= static_cast<double>(ly.size());
  double num = 0.0;
  double den = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    num += (lx[i] - mx) * (ly[i] - my);
    den += (lx[i] - mx) * (lx[i] - mx);
  }
  const double slope = num / den;
  double ss = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    const double r = ly[i] - my - slope * (lx[i] - mx);
    ss += r * r;
  }
  const double se =
      std::sqrt(ss / (static_cast<double>(lx.size()) - 2.0) / den);
  std::ostringstream info;
  info << "median n at eps {0.2, 0.1, 0.05}:";
  for (auto& c : crossings) {
    std::sort(c.begin(), c.end());
    info << " " << 0.5 * (c[c.size() / 2 - 1] + c[c.size() / 2]);
  }
  info << "; fitted eps-exponent " << str(slope) << " +- " << str(se) << " over "
       << lx.size() << " crossings (accept [1.5, 2.5])";
  return {slope >= 1.5 && slope <= 2.5, info.str()};
}

std::pair<bool, std::string> theory_arithmetic() {
  const double C = theory_constant_C(2.0, 2.0, 0.0, 1.0, 0.0);
  const double frozen_C = 806.8575869854702;
  const double n = theory_sample_count(1.0, C, 0.1);
  const bool ok = std::abs(C - frozen_C) <= 1e-12 * frozen_C && n == 65101917.0;
  return {ok, "C(2,2,0,1,0) = " + str(C) + " (frozen " + str(frozen_C) +
                  "), n(1,C,0.1) = " + str(n) + " (frozen 65101917)"};
}

std::pair<bool, std::string> realization_selection(std::uint64_t seed,
                                                   std::uint64_t tag) {
  const double eps = 0.02;
  std::ostringstream info;
  for (const Eigen::Index level : {Eigen::Index{64}, Eigen::Index{128}, Eigen::Index{256}}) {
    ApproximationSpec spec = d1_build_spec();
    spec.epsilon = eps;
    spec.max_attempts = 1;
    spec.start_n = level;
    double sum = 0.0;
    double min_err = std::numeric_limits<double>::infinity();
    for (int k = 0; k < 50; ++k) {
      const BuildResult r = build_approximator(
          spec, theory_exponents_for(spec.family),
          stream_mix(stream_mix(tag, static_cast<std::uint64_t>(level * 100 + k)),
                     seed));
      sum += r.report.measured_lp_error;
      min_err = std::min(min_err, r.report.measured_lp_error);
    }
    const double mean = sum / 50.0;
    info << "n=" << level << ": mean " << str(mean) << ", min " << str(min_err);
    if (mean <= eps)
      return {min_err <= eps, info.str() + " (mean <= eps, existence " +
                                  (min_err <= eps ? "holds" : "fails") + ")"};
    info << "; ";
  }
  return {false, info.str() + "no level reached mean error <= " + str(eps)};
}

std::pair<bool, std::string> oracle_crosscheck(std::uint64_t seed,
                                               std::uint64_t tag) {
  RngStream rng(seed, tag);
  double worst_z = 0.0;
  bool ok = true;
  for (int t = 0; t < 20; ++t) {
    const double x = rng.uniform(0.5, 2.0);
    const double K = rng.uniform(0.5, 2.0);
    const double a = rng.uniform(-0.1, 0.1);
    const double b = rng.uniform(0.05, 0.5);
    const double T = rng.uniform(0.5, 2.0);
    const double closed = bs_call_1d(x, K, a, b, T);
    const BlackScholesModel m =
        make_model(Vector::Constant(1, a), Vector::Constant(1, b));
    RngStream prng(seed, stream_mix(tag, static_cast<std::uint64_t>(t + 1)));
    const PriceEstimate est =
        mc_price(m, payoff_function(PayoffFamily::BasketCall, Vector::Ones(1), K),
                 T, Vector::Constant(1, x), 10'000'000, prng);
    const double z = std::abs(est.price - closed) / est.std_error;
    worst_z = std::max(worst_z, z);
    ok = ok && z <= 3.0;
  }
  const double pin = 7.965567455405804;
  const double closed_pin = bs_call_1d(100.0, 100.0, 0.0, 0.2, 1.0);
  ok = ok && std::abs(closed_pin - pin) <= 1e-12 * pin;
  const BlackScholesModel m =
      make_model(Vector::Constant(1, 0.0), Vector::Constant(1, 0.2));
  RngStream prng(seed, stream_mix(tag, std::uint64_t{0}));
  const PriceEstimate est =
      mc_price(m, payoff_function(PayoffFamily::BasketCall, Vector::Ones(1), 100.0),
               1.0, Vector::Constant(1, 100.0), 10'000'000, prng);
  const double z_pin = std::abs(est.price - pin) / est.std_error;
  ok = ok && z_pin <= 3.0;
  return {ok, "20 tuples at 1e7 samples, worst |z| " + str(worst_z) +
                  " (accept 3); pin " + str(closed_pin) + " vs frozen " + str(pin) +
                  ", MC z " + str(z_pin)};
}

}  // namespace

std::vector<CheckResult> verify_core(std::uint64_t seed) {
  std::vector<CheckResult> out;
  out.push_back(run_check("core/payoff-exactness", [seed] {
    return payoff_exactness(seed, stream_tag("verify/core/payoff"), -2.0, 2.0, -2.0,
                            2.0);
  }));
  out.push_back(
      run_check("core/param-count-formulas", [] { return param_count_formulas(); }));
  out.push_back(run_check("core/multichannel-identity", [seed] {
    return multichannel_identity(seed, stream_tag("verify/core/multichannel"));
  }));
  out.push_back(run_check("core/maxmin-pointwise", [seed] {
    return maxmin_pointwise(seed, stream_tag("verify/core/maxmin"));
  }));
  out.push_back(run_check("core/serialization-roundtrip", [seed] {
    return serialization_roundtrip(seed, stream_tag("verify/core/serialize"));
  }));
  out.push_back(run_check("core/realize-continuity", [seed] {
    return realize_continuity(seed, stream_tag("verify/core/continuity"));
  }));
  out.push_back(run_check("core/output-layer-scaling", [seed] {
    return output_layer_scaling(seed, stream_tag("verify/core/outscale"));
  }));
  out.push_back(run_check("core/affine-recovery", [seed] {
    return affine_recovery(seed, stream_tag("verify/core/affine"));
  }));
  out.push_back(run_check("core/affine-growth-constant", [seed] {
    return affine_growth(seed, stream_tag("verify/core/growth"));
  }));
  return out;
}

std::vector<CheckResult> verify_sde(std::uint64_t seed) {
  std::vector<CheckResult> out;
  out.push_back(run_check("sde/flow-linearity", [seed] {
    return flow_linearity(seed, stream_tag("verify/sde/flow"));
  }));
  out.push_back(run_check("sde/solution-map-recovery", [seed] {
    return solution_map_recovery(seed, stream_tag("verify/sde/recover"));
  }));
  out.push_back(run_check("sde/moment-bound", [seed] {
    return moment_bound_check(seed, stream_tag("verify/sde/moment"));
  }));
  out.push_back(run_check("sde/coefficient-affinity", [seed] {
    return coefficient_affinity(seed, stream_tag("verify/sde/affinity"));
  }));
  out.push_back(run_check("sde/euler-crosscheck", [seed] {
    return euler_crosscheck(seed, stream_tag("verify/sde/euler"));
  }));
  return out;
}

std::vector<CheckResult> verify_mc(std::uint64_t seed) {
  std::vector<CheckResult> out;
  std::vector<GridSetup> grid;
  out.push_back(run_check("mc/l2-identity", [seed, &grid] {
    grid = run_mc_grid(seed, stream_tag("verify/mc/grid"));
    return grid_l2_check(grid);
  }));
  out.push_back(run_check("mc/lp-bound", [&grid] { return grid_lp_check(grid); }));
  out.push_back(
      run_check("mc/unbiasedness", [&grid] { return grid_unbiased_check(grid); }));
  out.push_back(run_check("mc/norm-moment-bound", [seed] {
    return norm_moment_bounds(seed, stream_tag("verify/mc/normmoment"));
  }));
  out.push_back(run_check("mc/stream-determinism", [seed] {
    return stream_determinism(seed, stream_tag("verify/mc/determinism"));
  }));
  return out;
}

std::vector<CheckResult> verify_e2e(std::uint64_t seed) {
  std::vector<CheckResult> out;
  out.push_back(run_check("e2e/01-payoff-exactness", [seed] {
    return payoff_exactness(seed, stream_tag("verify/e2e/01"), 0.0, 1.0, 0.0, 2.0);
  }));
  out.push_back(
      run_check("e2e/02-parameter-counts", [] { return param_count_formulas(); }));
  out.push_back(run_check("e2e/03-multichannel-equivalence", [seed] {
    return multichannel_identity(seed, stream_tag("verify/e2e/03"));
  }));
  out.push_back(run_check("e2e/04-affine-flow", [seed] {
    auto [ok1, d1] = flow_linearity(seed, stream_tag("verify/e2e/04a"));
    auto [ok2, d2] = solution_map_recovery(seed, stream_tag("verify/e2e/04b"));
    return std::pair<bool, std::string>(ok1 && ok2, d1 + " | " + d2);
  }));
  std::vector<GridSetup> grid;
  out.push_back(run_check("e2e/05-mc-l2-identity", [seed, &grid] {
    grid = run_mc_grid(seed, stream_tag("verify/e2e/grid"));
    auto [ok, detail] = grid_l2_check(grid);
    return std::pair<bool, std::string>(
        ok, detail + " (sampling pass shared with criterion 6)");
  }));
  out.push_back(
      run_check("e2e/06-mc-lp-bound", [&grid] { return grid_lp_check(grid); }));
  out.push_back(run_check("e2e/07-moment-bound", [seed] {
    return moment_bound_check(seed, stream_tag("verify/e2e/07"));
  }));
  out.push_back(run_check("e2e/08-oracle-crosscheck", [seed] {
    return oracle_crosscheck(seed, stream_tag("verify/e2e/08"));
  }));
  out.push_back(run_check("e2e/09-end-to-end-builds", [seed] {
    return end_to_end_builds(seed, stream_tag("verify/e2e/09"));
  }));
  out.push_back(run_check("e2e/10-convergence-exponent", [seed] {
    return convergence_exponent(seed, stream_tag("verify/e2e/10"));
  }));
  out.push_back(
      run_check("e2e/11-theory-arithmetic", [] { return theory_arithmetic(); }));
  out.push_back(run_check("e2e/12-realization-selection", [seed] {
    return realization_selection(seed, stream_tag("verify/e2e/12"));
  }));
  return out;
}

bool all_pass(const std::vector<CheckResult>& results) {
  return std::all_of(results.begin(), results.end(),
                     [](const CheckResult& r) { return r.pass; });
}

}  // namespace kolmonet
