#pragma once

#include <cstdint>
#include <random>

namespace qvdp {

std::uint64_t splitmix64(std::uint64_t x);

// Independent stream keyed by (seed, index, purpose); the same key always
// yields the same sequence regardless of evaluation order.
class Rng {
 public:
  Rng(std::uint64_t seed, std::uint64_t index = 0, std::uint64_t purpose = 0);

  double uniform();  // [0,1), 53-bit
  double normal();   // Box-Muller
  bool bernoulli(double p) { return uniform() < p; }

 private:
  std::mt19937_64 eng_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

namespace purpose {
constexpr std::uint64_t kPulsePhase = 1;
constexpr std::uint64_t kReadout = 2;
constexpr std::uint64_t kNoise = 3;
}  // namespace purpose

}  // namespace qvdp
