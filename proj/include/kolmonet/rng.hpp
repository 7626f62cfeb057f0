#pragma once

#include <Eigen/Dense>

#include <bit>
#include <cstdint>
#include <random>
#include <string_view>

namespace kolmonet {

// Reproducible random stream identified by (seed, stream_id).
//
// The pair is expanded through std::seed_seq into a full mt19937_64 state, so
// distinct ids give statistically independent streams from one root seed.
// Chunked or parallel work derives one stream per chunk of a fixed partition
// (never per thread); results therefore depend only on (seed, partition) and
// are identical for any thread count.
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t stream_id) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed),
                      static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream_id),
                      static_cast<std::uint32_t>(stream_id >> 32),
                      0x9e3779b9u};
    engine_.seed(seq);
  }

  double uniform() {
    return std::uniform_real_distribution<double>(0.0, 1.0)(engine_);
  }
  double uniform(double a, double b) { return a + (b - a) * uniform(); }
  double normal() { return normal_(engine_); }

  Eigen::VectorXd normals(Eigen::Index n) {
    Eigen::VectorXd v(n);
    for (Eigen::Index i = 0; i < n; ++i) v[i] = normal();
    return v;
  }
  Eigen::VectorXd uniforms(Eigen::Index n, double a, double b) {
    Eigen::VectorXd v(n);
    for (Eigen::Index i = 0; i < n; ++i) v[i] = uniform(a, b);
    return v;
  }

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

// FNV-1a hashing for naming streams: a tag string identifies the purpose
// ("build/channels", "sweep/cell", ...) and mix-ins bind parameters such as
// the dimension or the target accuracy to the id.
inline constexpr std::uint64_t kFnvOffset = 1469598103934665603ull;
inline constexpr std::uint64_t kFnvPrime = 1099511628211ull;

constexpr std::uint64_t stream_tag(std::string_view name) {
  std::uint64_t h = kFnvOffset;
  for (char ch : name) {
    h ^= static_cast<unsigned char>(ch);
    h *= kFnvPrime;
  }
  return h;
}

constexpr std::uint64_t stream_mix(std::uint64_t id, std::uint64_t part) {
  for (int i = 0; i < 8; ++i) {
    id ^= (part >> (8 * i)) & 0xffu;
    id *= kFnvPrime;
  }
  return id;
}

inline std::uint64_t stream_mix(std::uint64_t id, double part) {
  return stream_mix(id, std::bit_cast<std::uint64_t>(part));
}

}  // namespace kolmonet
