#pragma once

#include <span>

#include "zspeedl/dataset.hpp"

namespace zspeedl {

struct GzslScores {
  double acc_seen = 0.0;
  double acc_unseen = 0.0;
  double harmonic_mean = 0.0;
};

// 2 s u / (s + u), or 0 when s + u = 0.
double harmonic_mean(double acc_seen, double acc_unseen) noexcept;

// Mean per-class accuracy over the given classes; classes without test
// instances are left out of the mean.
double mca(std::span<const ClassId> predictions, std::span<const ClassId> labels, std::span<const ClassId> classes);

GzslScores gzsl_eval(std::span<const ClassId> pred_seen, std::span<const ClassId> labels_seen,
                     std::span<const ClassId> pred_unseen, std::span<const ClassId> labels_unseen,
                     std::span<const ClassId> seen_classes, std::span<const ClassId> unseen_classes);

}  // namespace zspeedl
