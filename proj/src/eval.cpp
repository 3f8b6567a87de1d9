#include "zspeedl/eval.hpp"

#include <map>
#include <string>

#include "zspeedl/errors.hpp"

namespace zspeedl {

double harmonic_mean(double s, double u) noexcept {
  const double sum = s + u;
  return sum > 0.0 ? 2.0 * s * u / sum : 0.0;
}

double mca(std::span<const ClassId> predictions, std::span<const ClassId> labels, std::span<const ClassId> classes) {
  if (labels.empty()) throw DataError("mca: empty label list");
  if (predictions.size() != labels.size()) throw DataError("mca: prediction and label counts differ");
  std::map<ClassId, std::pair<std::size_t, std::size_t>> tally;  // class -> (correct, total)
  for (ClassId c : classes) tally.emplace(c, std::make_pair(0, 0));
  for (std::size_t i = 0; i < labels.size(); ++i) {
    auto it = tally.find(labels[i]);
    if (it == tally.end()) throw DataError("mca: label " + std::to_string(labels[i]) + " is not among the classes");
    ++it->second.second;
    if (predictions[i] == labels[i]) ++it->second.first;
  }
  double sum = 0.0;
  std::size_t populated = 0;
  for (const auto& [cls, ct] : tally) {
    if (ct.second == 0) continue;
    sum += static_cast<double>(ct.first) / static_cast<double>(ct.second);
    ++populated;
  }
  return sum / static_cast<double>(populated);
}

GzslScores gzsl_eval(std::span<const ClassId> pred_seen, std::span<const ClassId> labels_seen,
                     std::span<const ClassId> pred_unseen, std::span<const ClassId> labels_unseen,
                     std::span<const ClassId> seen_classes, std::span<const ClassId> unseen_classes) {
  if (labels_seen.empty()) throw DataError("gzsl: empty seen test partition");
  if (labels_unseen.empty()) throw DataError("gzsl: empty unseen test partition");
  GzslScores s;
  s.acc_seen = mca(pred_seen, labels_seen, seen_classes);
  s.acc_unseen = mca(pred_unseen, labels_unseen, unseen_classes);
  s.harmonic_mean = harmonic_mean(s.acc_seen, s.acc_unseen);
  return s;
}

}  // namespace zspeedl
