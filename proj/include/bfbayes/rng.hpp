#pragma once

#include <cstdint>
#include <random>

namespace bfbayes {

// Deterministic stream of draws identified by (seed, index). The engine is
// std::mt19937_64 keyed through SplitMix64, so equal keys give identical
// sequences on every platform. derive() spawns an independent child stream
// from the stream's key, untouched by any draws already made.
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t index);
  RngStream derive(std::uint64_t sub) const;

  double uniform01();                       // [0, 1)
  double normal();                          // standard normal, Box-Muller
  double normal(double mean, double sd);
  double gamma(double shape, double rate);  // Marsaglia-Tsang
  double inverse_gamma(double alpha, double beta);

 private:
  explicit RngStream(std::uint64_t key);
  std::uint64_t key_;
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace bfbayes
