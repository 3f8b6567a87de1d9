#include "zspeedl/dap.hpp"

#include <algorithm>
#include <cmath>

#include "zspeedl/errors.hpp"
#include "zspeedl/optim.hpp"

namespace zspeedl {

namespace {

double clamp_prob(double p) { return std::clamp(p, kDapProbClamp, 1.0 - kDapProbClamp); }

double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

}  // namespace

bool DapModel::is_excluded(std::size_t m) const noexcept {
  return std::find(excluded.begin(), excluded.end(), m) != excluded.end();
}

DapModel dap_fit(const DatasetBundle& bundle, double l2, std::size_t epochs, double lr, std::uint64_t seed) {
  return dap_fit_rows(bundle, bundle.split.train_idx, l2, epochs, lr, seed);
}

DapModel dap_fit_rows(const DatasetBundle& bundle, std::span<const std::size_t> train_idx, double l2,
                      std::size_t epochs, double lr, std::uint64_t seed) {
  if (train_idx.empty()) throw DataError("dap: empty training split");
  const std::size_t d = bundle.feature_dim();
  const std::size_t a = bundle.attribute_dim();
  const auto& seen = bundle.split.seen_classes;
  if (seen.empty()) throw DataError("dap: no seen classes");

  DapModel m;
  m.thresholds.assign(a, 0.0);
  for (ClassId c : seen)
    for (std::size_t k = 0; k < a; ++k) m.thresholds[k] += bundle.attributes(c, k);
  for (double& t : m.thresholds) t /= static_cast<double>(seen.size());

  const Matrix binary = dap_binarize(m, bundle.attributes);  // C_total x a
  m.priors.assign(a, 0.0);
  for (ClassId c : seen)
    for (std::size_t k = 0; k < a; ++k) m.priors[k] += binary(c, k);
  for (std::size_t k = 0; k < a; ++k) {
    const double mean = m.priors[k] / static_cast<double>(seen.size());
    if (mean == 0.0 || mean == 1.0) m.excluded.push_back(k);
    m.priors[k] = clamp_prob(mean);
  }

  std::vector<char> active(a, 1);
  for (std::size_t k : m.excluded) active[k] = 0;

  m.weights = Matrix(a, d + 1);
  Rng rng(seed);
  Adam adam(lr);
  const std::size_t slot = adam.add(m.weights.size());
  Matrix grad(a, d + 1);
  const std::size_t n = train_idx.size();

  for (std::size_t epoch = 0; epoch < epochs; ++epoch) {
    const auto order = shuffled_indices(n, rng);
    for (std::size_t start = 0; start < n; start += kDapBatch) {
      const std::size_t end = std::min(n, start + kDapBatch);
      const double inv_b = 1.0 / static_cast<double>(end - start);
      std::fill(grad.values().begin(), grad.values().end(), 0.0);
      double loss = 0.0;
      for (std::size_t p = start; p < end; ++p) {
        const std::size_t i = train_idx[order[p]];
        const auto x = bundle.features.row(i);
        const auto target = binary.row(bundle.labels[i]);
        for (std::size_t k = 0; k < a; ++k) {
          if (!active[k]) continue;
          const auto w = m.weights.row(k);
          double z = w[d];
          for (std::size_t j = 0; j < d; ++j) z += w[j] * x[j];
          const double prob = sigmoid(z);
          loss -= target[k] > 0.5 ? std::log(clamp_prob(prob)) : std::log(clamp_prob(1.0 - prob));
          const double err = (prob - target[k]) * inv_b;
          auto g = grad.row(k);
          for (std::size_t j = 0; j < d; ++j) g[j] += err * x[j];
          g[d] += err;
        }
      }
      if (!std::isfinite(loss)) throw NumericalError("dap: non-finite loss; lower the learning rate");
      for (std::size_t k = 0; k < a; ++k)
        for (std::size_t j = 0; j < d; ++j) grad(k, j) += 2.0 * l2 * m.weights(k, j);
      adam.tick();
      adam.update(slot, m.weights.values(), grad.values());
    }
  }
  if (!m.weights.all_finite()) throw NumericalError("dap: non-finite weights; lower the learning rate");
  return m;
}

Matrix dap_binarize(const DapModel& m, const Matrix& attributes) {
  if (attributes.cols() != m.thresholds.size()) throw DataError("dap: attribute dimension mismatch");
  Matrix out(attributes.rows(), attributes.cols());
  for (std::size_t r = 0; r < attributes.rows(); ++r)
    for (std::size_t k = 0; k < attributes.cols(); ++k) out(r, k) = attributes(r, k) > m.thresholds[k] ? 1.0 : 0.0;
  return out;
}

Matrix dap_attribute_posteriors(const DapModel& m, const Matrix& x) {
  const std::size_t d = m.feature_dim();
  if (x.cols() != d) throw DataError("dap: feature dimension mismatch");
  Matrix p(x.rows(), m.attribute_dim());
  for (std::size_t r = 0; r < x.rows(); ++r) {
    const auto xr = x.row(r);
    for (std::size_t k = 0; k < m.attribute_dim(); ++k) {
      const auto w = m.weights.row(k);
      double z = w[d];
      for (std::size_t j = 0; j < d; ++j) z += w[j] * xr[j];
      p(r, k) = clamp_prob(sigmoid(z));
    }
  }
  return p;
}

Matrix dap_log_scores(const DapModel& m, const Matrix& x, const Matrix& binary_candidates) {
  if (binary_candidates.cols() != m.attribute_dim()) throw DataError("dap: attribute dimension mismatch");
  const Matrix p = dap_attribute_posteriors(m, x);
  Matrix scores(x.rows(), binary_candidates.rows());
  for (std::size_t r = 0; r < x.rows(); ++r)
    for (std::size_t c = 0; c < binary_candidates.rows(); ++c) {
      double s = 0.0;
      for (std::size_t k = 0; k < m.attribute_dim(); ++k) {
        if (m.is_excluded(k)) continue;
        const bool one = binary_candidates(c, k) > 0.5;
        s += std::log(one ? p(r, k) : 1.0 - p(r, k)) - std::log(one ? m.priors[k] : 1.0 - m.priors[k]);
      }
      scores(r, c) = s;
    }
  return scores;
}

}  // namespace zspeedl
