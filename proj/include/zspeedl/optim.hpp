#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "zspeedl/matrix.hpp"

namespace zspeedl {

// Adaptive-moment optimizer over a fixed set of parameter blocks.
class Adam {
 public:
  explicit Adam(double lr, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8)
      : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {}

  // Registers a parameter block; returns its slot.
  std::size_t add(std::size_t size);

  // Call once per optimizer step before update().
  void tick() { ++t_; }

  void update(std::size_t slot, std::span<double> params, std::span<const double> grads);

 private:
  double lr_, beta1_, beta2_, eps_;
  std::uint64_t t_ = 0;
  std::vector<std::vector<double>> m_, v_;
};

using Rng = std::mt19937_64;

// He-style normal initialization, stddev sqrt(2 / fan_in).
Matrix he_normal(std::size_t rows, std::size_t cols, Rng& rng);

// Seeded permutation of [0, n).
std::vector<std::size_t> shuffled_indices(std::size_t n, Rng& rng);

}  // namespace zspeedl
