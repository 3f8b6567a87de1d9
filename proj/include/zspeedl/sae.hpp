#pragma once

#include <span>
#include <string_view>
#include <vector>

#include "zspeedl/dataset.hpp"
#include "zspeedl/matrix.hpp"
#include "zspeedl/numerics.hpp"

namespace zspeedl {

enum class SaeDirection { feature_to_semantic, semantic_to_feature };

std::string_view to_string(SaeDirection d) noexcept;
SaeDirection parse_sae_direction(std::string_view name);

// Linear semantic auto-encoder: encoder W (a x d), decoder W^T.
struct SaeModel {
  Matrix w;  // a x d
  double lambda = 0.0;
  double residual = 0.0;  // Sylvester residual at fit time
  SaeDirection direction = SaeDirection::feature_to_semantic;
  numerics::Metric metric = numerics::Metric::cosine;
};

// Solves S S^T W + W (lambda X X^T) = (1 + lambda) S X^T. The eigen-
// decompositions do not depend on lambda and are computed once.
class SaeSolver {
 public:
  SaeSolver(const DatasetBundle& bundle, std::span<const std::size_t> train_idx);

  SaeModel fit(double lambda) const;

  const Matrix& sst() const noexcept { return sst_; }
  const Matrix& xxt() const noexcept { return xxt_; }
  const Matrix& sxt() const noexcept { return sxt_; }

 private:
  Matrix sst_;  // a x a
  Matrix xxt_;  // d x d
  Matrix sxt_;  // a x d
  numerics::EigDecomp sst_eig_;
  numerics::EigDecomp xxt_eig_;
};

SaeModel sae_fit(const DatasetBundle& bundle, double lambda);

std::vector<std::size_t> sae_predict(const SaeModel& m, const Matrix& x, const Matrix& candidates,
                                     SaeDirection direction, numerics::Metric metric);

}  // namespace zspeedl
