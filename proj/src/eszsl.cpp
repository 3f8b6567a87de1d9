#include "zspeedl/eszsl.hpp"

#include <algorithm>
#include <map>

#include "zspeedl/errors.hpp"
#include "zspeedl/numerics.hpp"

namespace zspeedl {

EszslSolver::EszslSolver(const DatasetBundle& bundle, std::span<const std::size_t> train_idx) {
  if (train_idx.empty()) throw DataError("eszsl: empty training split");
  const auto seen = classes_present(bundle.labels, train_idx);
  std::map<ClassId, std::size_t> column;
  for (std::size_t i = 0; i < seen.size(); ++i) column[seen[i]] = i;

  const SplitView train = view_rows(bundle, train_idx);
  Matrix y(train_idx.size(), seen.size(), -1.0);
  for (std::size_t i = 0; i < train.labels.size(); ++i) y(i, column.at(train.labels[i])) = 1.0;
  const Matrix s = class_attributes(bundle, seen);  // z x a

  xxt_ = gram(train.features);
  xys_ = matmul(matmul_tn(train.features, y), s);
  sst_ = gram(s);
}

EszslModel EszslSolver::fit(double gamma, double lambda) const {
  const Matrix left = numerics::ridge_solve(xxt_, gamma, xys_);                 // d x a
  const Matrix vt = numerics::ridge_solve(sst_, lambda, transpose(left));       // a x d
  return {transpose(vt), gamma, lambda};
}

EszslModel eszsl_fit(const DatasetBundle& bundle, double gamma, double lambda) {
  return EszslSolver(bundle, bundle.split.train_idx).fit(gamma, lambda);
}

}  // namespace zspeedl
