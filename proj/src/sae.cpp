#include "zspeedl/sae.hpp"

#include <map>

#include "zspeedl/errors.hpp"

namespace zspeedl {

std::string_view to_string(SaeDirection d) noexcept {
  return d == SaeDirection::feature_to_semantic ? "feature_to_semantic" : "semantic_to_feature";
}

SaeDirection parse_sae_direction(std::string_view name) {
  if (name == "feature_to_semantic" || name == "f2s") return SaeDirection::feature_to_semantic;
  if (name == "semantic_to_feature" || name == "s2f") return SaeDirection::semantic_to_feature;
  throw UsageError("unknown SAE direction '" + std::string(name) + "'");
}

SaeSolver::SaeSolver(const DatasetBundle& bundle, std::span<const std::size_t> train_idx) {
  if (train_idx.empty()) throw DataError("sae: empty training split");
  const std::size_t d = bundle.feature_dim();
  const std::size_t a = bundle.attribute_dim();

  // Per-instance semantics only depend on the class, so S S^T and S X^T
  // are accumulated per class.
  std::map<ClassId, std::pair<std::size_t, std::vector<double>>> per_class;
  for (std::size_t i : train_idx) {
    auto& [count, sum] = per_class[bundle.labels[i]];
    if (sum.empty()) sum.assign(d, 0.0);
    ++count;
    const auto x = bundle.features.row(i);
    for (std::size_t j = 0; j < d; ++j) sum[j] += x[j];
  }
  sst_ = Matrix(a, a);
  sxt_ = Matrix(a, d);
  for (const auto& [cls, entry] : per_class) {
    const auto& [count, sum] = entry;
    const auto s = bundle.attributes.row(cls);
    for (std::size_t p = 0; p < a; ++p) {
      for (std::size_t q = 0; q < a; ++q) sst_(p, q) += static_cast<double>(count) * s[p] * s[q];
      for (std::size_t j = 0; j < d; ++j) sxt_(p, j) += s[p] * sum[j];
    }
  }
  xxt_ = gram(select_rows(bundle.features, train_idx));
  sst_eig_ = numerics::sym_eig(sst_);
  xxt_eig_ = numerics::sym_eig(xxt_);
}

SaeModel SaeSolver::fit(double lambda) const {
  if (!(lambda > 0.0)) throw UsageError("sae: lambda must be positive");
  numerics::EigDecomp b = xxt_eig_;
  for (double& v : b.values) v *= lambda;
  const Matrix c = scaled(sxt_, 1.0 + lambda);
  SaeModel m;
  m.w = numerics::solve_sylvester(sst_eig_, b, c);
  m.lambda = lambda;
  m.residual = numerics::sylvester_residual(sst_, scaled(xxt_, lambda), c, m.w);
  return m;
}

SaeModel sae_fit(const DatasetBundle& bundle, double lambda) {
  return SaeSolver(bundle, bundle.split.train_idx).fit(lambda);
}

}  // namespace zspeedl
