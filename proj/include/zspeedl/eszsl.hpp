#pragma once

#include <span>
#include <vector>

#include "zspeedl/dataset.hpp"
#include "zspeedl/matrix.hpp"

namespace zspeedl {

// Bilinear compatibility x^T V s between features and class attributes.
struct EszslModel {
  Matrix v;  // d x a
  double gamma = 0.0;
  double lambda = 0.0;
};

// Closed form V = (X X^T + gamma I)^-1 X Y S^T (S S^T + lambda I)^-1 with
// +/-1 class indicators in Y. Intermediate products are cached so a
// hyper-parameter grid reuses them.
class EszslSolver {
 public:
  EszslSolver(const DatasetBundle& bundle, std::span<const std::size_t> train_idx);

  EszslModel fit(double gamma, double lambda) const;

  std::size_t feature_dim() const noexcept { return xxt_.rows(); }

 private:
  Matrix xxt_;  // d x d
  Matrix xys_;  // d x a
  Matrix sst_;  // a x a
};

EszslModel eszsl_fit(const DatasetBundle& bundle, double gamma, double lambda);

// argmax_c x^T V s_c per row.
std::vector<std::size_t> eszsl_predict(const EszslModel& m, const Matrix& x, const Matrix& candidates);

}  // namespace zspeedl
