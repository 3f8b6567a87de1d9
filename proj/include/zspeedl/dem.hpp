#pragma once

#include <cstdint>
#include <vector>

#include "zspeedl/dataset.hpp"
#include "zspeedl/matrix.hpp"

namespace zspeedl {

// Semantic-to-visual embedding f(s) = relu(relu(s W1 + b1) W2 + b2).
struct DemModel {
  Matrix w1;  // a x h
  std::vector<double> b1;
  Matrix w2;  // h x d
  std::vector<double> b2;
  // Data term of the training loss at initialization, then after each epoch.
  std::vector<double> loss_history;

  std::size_t attribute_dim() const noexcept { return w1.rows(); }
  std::size_t hidden_dim() const noexcept { return w1.cols(); }
  std::size_t feature_dim() const noexcept { return w2.cols(); }
};

// Training stops with NumericalError once the loss exceeds this multiple of
// the loss at initialization.
inline constexpr double kDemDivergenceFactor = 1e12;

// Initialization: W1 He-normal, b1 small positive, W2 He-normal scaled down,
// b2 the mean training target. Starting near the target mean keeps output
// relus alive; with plain He init many start negative for every class and
// never receive gradient.
inline constexpr double kDemBiasInit = 0.1;
inline constexpr double kDemOutputInitScale = 0.01;

struct DemOptions {
  std::size_t hidden = 1600;
  double lr = 1e-4;
  double l2 = 1e-3;
  std::size_t epochs = 100;
  std::size_t batch = 64;
  std::uint64_t seed = 42;
};

DemModel dem_init(std::size_t attribute_dim, std::size_t hidden, std::size_t feature_dim, std::uint64_t seed);

// Seeded starting point of dem_fit for the given training rows.
DemModel dem_initial_model(const DatasetBundle& bundle, std::span<const std::size_t> train_idx,
                           const DemOptions& opt);
DemModel dem_fit(const DatasetBundle& bundle, const DemOptions& opt);
DemModel dem_fit_rows(const DatasetBundle& bundle, std::span<const std::size_t> train_idx, const DemOptions& opt);

// Rows of f(s) for each row of `semantics`.
Matrix dem_forward(const DemModel& m, const Matrix& semantics);

// A mini-batch grouped by class: instances sharing a semantic vector are
// folded into one row with their count and target sum. With all counts 1 this
// is the plain per-instance batch.
struct DemBatch {
  Matrix semantics;           // U x a
  Matrix target_sums;         // U x d, sum of targets per row
  std::vector<double> counts; // instances per row
  double target_sq_sum = 0.0; // sum of ||x_i||^2 over the batch
  double batch_size = 0.0;    // total instances
};

struct DemGradient {
  double loss = 0.0;  // data term + l2 (||W1||^2 + ||W2||^2)
  double data_loss = 0.0;
  Matrix w1, w2;
  std::vector<double> b1, b2;
};

// Loss (1/B) sum_i ||f(s_i) - x_i||^2 + l2 (||W1||^2 + ||W2||^2) and its gradient.
DemGradient dem_loss_grad(const DemModel& m, const DemBatch& batch, double l2);

std::vector<std::size_t> dem_predict(const DemModel& m, const Matrix& x, const Matrix& candidates);

}  // namespace zspeedl
