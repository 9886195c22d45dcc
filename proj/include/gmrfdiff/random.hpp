#pragma once

#include <cstdint>
#include <random>

namespace gmrfdiff {

// Roles a Monte Carlo run draws randomness for. Each role gets its own stream
// so that, e.g., adding an algorithm or changing the regressor dimension never
// perturbs the noise sequence.
enum class StreamRole : std::uint64_t {
  noise = 1,
  regressors = 2,
  parameter = 3,
  support = 4,
  initial = 5,
  topology = 6,
  powers = 7,
  theory = 8,
};

std::uint64_t splitmix64(std::uint64_t x);

// Counter-hashed child seed: splitmix64 chained over (master, run, role).
std::uint64_t derive_seed(std::uint64_t master_seed, std::uint64_t run_index, StreamRole role);

// A single independent random stream. Owns its engine and the normal
// distribution state, so it must not be shared between threads.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed) : engine_(seed) {}
  RandomStream(std::uint64_t master_seed, std::uint64_t run_index, StreamRole role)
      : engine_(derive_seed(master_seed, run_index, role)) {}

  double gaussian() { return normal_(engine_); }
  double uniform() { return uniform_(engine_); }
  std::uint64_t next() { return engine_(); }
  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

}  // namespace gmrfdiff
