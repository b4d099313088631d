#pragma once

// Counter-based random streams. A stream is identified by (seed, purpose,
// a, b) -- typically (step, batch index) -- so draws never depend on the order
// in which parallel workers reach them.

#include <cstdint>
#include <random>

namespace edmp::rng {

enum class Purpose : std::uint64_t {
  param_init = 1,
  train_index,
  train_time,
  train_noise,
  sample_init,
  sample_noise,
  scene,
  trajectory,
  dataset,
  test,
};

std::uint64_t mix(std::uint64_t x);
std::uint64_t derive(std::uint64_t seed, Purpose purpose, std::uint64_t a = 0, std::uint64_t b = 0);

class Stream {
 public:
  Stream(std::uint64_t seed, Purpose purpose, std::uint64_t a = 0, std::uint64_t b = 0)
      : engine_(derive(seed, purpose, a, b)) {}

  double normal() { return normal_(engine_); }
  double uniform(double lo, double hi) {
    return lo + (hi - lo) * std::uniform_real_distribution<double>(0.0, 1.0)(engine_);
  }
  // Inclusive on both ends.
  int uniform_int(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(engine_); }
  std::mt19937_64& engine() { return engine_; }

  template <typename Derived>
  void fill_normal(Derived&& m) {
    for (Eigen_Index i = 0; i < m.rows(); ++i)
      for (Eigen_Index j = 0; j < m.cols(); ++j) m(i, j) = normal();
  }

 private:
  using Eigen_Index = std::ptrdiff_t;
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

}  // namespace edmp::rng
