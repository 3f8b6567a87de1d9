#include "zspeedl/optim.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "zspeedl/errors.hpp"

namespace zspeedl {

std::size_t Adam::add(std::size_t size) {
  m_.emplace_back(size, 0.0);
  v_.emplace_back(size, 0.0);
  return m_.size() - 1;
}

void Adam::update(std::size_t slot, std::span<double> params, std::span<const double> grads) {
  auto& m = m_.at(slot);
  auto& v = v_.at(slot);
  if (params.size() != m.size() || grads.size() != m.size()) throw DataError("Adam: block size mismatch");
  const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  const double step = lr_ * std::sqrt(bc2) / bc1;
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double g = grads[i];
    m[i] = beta1_ * m[i] + (1.0 - beta1_) * g;
    v[i] = beta2_ * v[i] + (1.0 - beta2_) * g * g;
    params[i] -= step * m[i] / (std::sqrt(v[i]) + eps_);
  }
}

Matrix he_normal(std::size_t rows, std::size_t cols, Rng& rng) {
  std::normal_distribution<double> dist(0.0, std::sqrt(2.0 / static_cast<double>(std::max<std::size_t>(rows, 1))));
  Matrix m(rows, cols);
  for (double& v : m.values()) v = dist(rng);
  return m;
}

std::vector<std::size_t> shuffled_indices(std::size_t n, Rng& rng) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::shuffle(idx.begin(), idx.end(), rng);
  return idx;
}

}  // namespace zspeedl
