#pragma once

#include <cstdint>
#include <vector>

#include "zspeedl/dataset.hpp"
#include "zspeedl/matrix.hpp"

namespace zspeedl {

// Direct attribute prediction: one logistic regressor per binarized attribute.
struct DapModel {
  Matrix weights;                   // a x (d + 1), bias in the last column
  std::vector<double> priors;       // p(a_m = 1) over seen classes, clamped
  std::vector<double> thresholds;   // binarization threshold per attribute
  std::vector<std::size_t> excluded;  // attributes constant over the seen classes

  std::size_t attribute_dim() const noexcept { return weights.rows(); }
  std::size_t feature_dim() const noexcept { return weights.cols() ? weights.cols() - 1 : 0; }
  bool is_excluded(std::size_t m) const noexcept;
};

inline constexpr double kDapProbClamp = 1e-5;
inline constexpr std::size_t kDapBatch = 64;

DapModel dap_fit(const DatasetBundle& bundle, double l2, std::size_t epochs, double lr, std::uint64_t seed);
DapModel dap_fit_rows(const DatasetBundle& bundle, std::span<const std::size_t> train_idx, double l2,
                      std::size_t epochs, double lr, std::uint64_t seed);

// 0/1 candidate attribute matrix using the model's thresholds.
Matrix dap_binarize(const DapModel& m, const Matrix& attributes);

// p(a_m = 1 | x) for every row and attribute, clamped.
Matrix dap_attribute_posteriors(const DapModel& m, const Matrix& x);

// argmax_c sum_m log p(a_m = b_cm | x) - log p(a_m = b_cm), excluded attributes skipped.
// n x C log-scores: sum over active attributes of log p(a = b_c | x) - log prior(b_c).
Matrix dap_log_scores(const DapModel& m, const Matrix& x, const Matrix& binary_candidates);

std::vector<std::size_t> dap_predict(const DapModel& m, const Matrix& x, const Matrix& binary_candidates);

}  // namespace zspeedl
