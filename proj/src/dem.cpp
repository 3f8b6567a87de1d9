#include "zspeedl/dem.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <string>

#include "zspeedl/errors.hpp"
#include "zspeedl/optim.hpp"

namespace zspeedl {

namespace {

struct Activations {
  Matrix z1, h1, z2, f;
};

Activations forward(const DemModel& m, const Matrix& s) {
  Activations act;
  act.z1 = matmul(s, m.w1);
  for (std::size_t r = 0; r < act.z1.rows(); ++r) {
    auto row = act.z1.row(r);
    for (std::size_t j = 0; j < row.size(); ++j) row[j] += m.b1[j];
  }
  act.h1 = act.z1;
  for (double& v : act.h1.values()) v = std::max(v, 0.0);
  act.z2 = matmul(act.h1, m.w2);
  for (std::size_t r = 0; r < act.z2.rows(); ++r) {
    auto row = act.z2.row(r);
    for (std::size_t j = 0; j < row.size(); ++j) row[j] += m.b2[j];
  }
  act.f = act.z2;
  for (double& v : act.f.values()) v = std::max(v, 0.0);
  return act;
}

double sq_norm(const Matrix& m) {
  double s = 0.0;
  for (double v : m.values()) s += v * v;
  return s;
}

double data_loss(const Matrix& f, const DemBatch& b) {
  double loss = b.target_sq_sum;
  for (std::size_t u = 0; u < f.rows(); ++u) {
    const auto fu = f.row(u);
    const auto tu = b.target_sums.row(u);
    double ff = 0.0, ft = 0.0;
    for (std::size_t j = 0; j < fu.size(); ++j) {
      ff += fu[j] * fu[j];
      ft += fu[j] * tu[j];
    }
    loss += b.counts[u] * ff - 2.0 * ft;
  }
  return loss / b.batch_size;
}

// Groups instances by class into a DemBatch.
DemBatch make_batch(const DatasetBundle& bundle, std::span<const std::size_t> instances) {
  const std::size_t d = bundle.feature_dim();
  std::map<ClassId, std::size_t> slot;
  for (std::size_t i : instances) slot.emplace(bundle.labels[i], 0);
  std::size_t u = 0;
  std::vector<ClassId> classes;
  for (auto& [cls, s] : slot) {
    s = u++;
    classes.push_back(cls);
  }
  DemBatch b;
  b.semantics = class_attributes(bundle, classes);
  b.target_sums = Matrix(classes.size(), d);
  b.counts.assign(classes.size(), 0.0);
  b.batch_size = static_cast<double>(instances.size());
  for (std::size_t i : instances) {
    const std::size_t s = slot[bundle.labels[i]];
    b.counts[s] += 1.0;
    const auto x = bundle.features.row(i);
    auto t = b.target_sums.row(s);
    for (std::size_t j = 0; j < d; ++j) {
      t[j] += x[j];
      b.target_sq_sum += x[j] * x[j];
    }
  }
  return b;
}

}  // namespace

DemModel dem_init(std::size_t attribute_dim, std::size_t hidden, std::size_t feature_dim, std::uint64_t seed) {
  if (hidden == 0) throw UsageError("dem: hidden dimension must be positive");
  Rng rng(seed);
  DemModel m;
  m.w1 = he_normal(attribute_dim, hidden, rng);
  m.b1.assign(hidden, kDemBiasInit);
  m.w2 = scaled(he_normal(hidden, feature_dim, rng), kDemOutputInitScale);
  m.b2.assign(feature_dim, kDemBiasInit);
  return m;
}

Matrix dem_forward(const DemModel& m, const Matrix& semantics) {
  if (semantics.cols() != m.attribute_dim()) throw DataError("dem: attribute dimension mismatch");
  return forward(m, semantics).f;
}

DemGradient dem_loss_grad(const DemModel& m, const DemBatch& b, double l2) {
  const Activations act = forward(m, b.semantics);
  DemGradient g;
  g.data_loss = data_loss(act.f, b);
  g.loss = g.data_loss + l2 * (sq_norm(m.w1) + sq_norm(m.w2));

  // dL/dz2 = (2/B)(n_u f_u - T_u) masked by relu'(z2)
  Matrix dz2(act.f.rows(), act.f.cols());
  const double scale = 2.0 / b.batch_size;
  for (std::size_t u = 0; u < dz2.rows(); ++u)
    for (std::size_t j = 0; j < dz2.cols(); ++j)
      dz2(u, j) = act.z2(u, j) > 0.0 ? scale * (b.counts[u] * act.f(u, j) - b.target_sums(u, j)) : 0.0;

  g.w2 = matmul_tn(act.h1, dz2);
  g.b2.assign(dz2.cols(), 0.0);
  for (std::size_t u = 0; u < dz2.rows(); ++u)
    for (std::size_t j = 0; j < dz2.cols(); ++j) g.b2[j] += dz2(u, j);

  Matrix dz1 = matmul_nt(dz2, m.w2);
  for (std::size_t i = 0; i < dz1.size(); ++i)
    if (!(act.z1.data()[i] > 0.0)) dz1.data()[i] = 0.0;
  g.w1 = matmul_tn(b.semantics, dz1);
  g.b1.assign(dz1.cols(), 0.0);
  for (std::size_t u = 0; u < dz1.rows(); ++u)
    for (std::size_t j = 0; j < dz1.cols(); ++j) g.b1[j] += dz1(u, j);

  for (std::size_t i = 0; i < g.w1.size(); ++i) g.w1.data()[i] += 2.0 * l2 * m.w1.data()[i];
  for (std::size_t i = 0; i < g.w2.size(); ++i) g.w2.data()[i] += 2.0 * l2 * m.w2.data()[i];
  return g;
}

DemModel dem_initial_model(const DatasetBundle& bundle, std::span<const std::size_t> train_idx,
                           const DemOptions& opt) {
  DemModel m = dem_init(bundle.attribute_dim(), opt.hidden, bundle.feature_dim(), opt.seed);
  if (train_idx.empty()) return m;
  std::fill(m.b2.begin(), m.b2.end(), 0.0);
  for (std::size_t i : train_idx) {
    const auto x = bundle.features.row(i);
    for (std::size_t j = 0; j < x.size(); ++j) m.b2[j] += x[j];
  }
  for (double& v : m.b2) v /= static_cast<double>(train_idx.size());
  return m;
}

DemModel dem_fit(const DatasetBundle& bundle, const DemOptions& opt) {
  return dem_fit_rows(bundle, bundle.split.train_idx, opt);
}

DemModel dem_fit_rows(const DatasetBundle& bundle, std::span<const std::size_t> train_idx, const DemOptions& opt) {
  if (train_idx.empty()) throw DataError("dem: empty training split");
  if (opt.batch == 0) throw UsageError("dem: batch size must be positive");
  DemModel m = dem_initial_model(bundle, train_idx, opt);
  Rng rng(opt.seed ^ 0x9e3779b97f4a7c15ull);

  const DemBatch full = make_batch(bundle, train_idx);
  auto full_loss = [&] { return data_loss(dem_forward(m, full.semantics), full); };
  m.loss_history.push_back(full_loss());
  // Adam bounds each step by the learning rate, so a runaway rate blows the
  // loss up by many orders of magnitude rather than overflowing. Treat that
  // the same as an overflow.
  const double ceiling = kDemDivergenceFactor * std::max(m.loss_history.front(), 1e-12);
  auto diverged = [&](double loss) { return !std::isfinite(loss) || loss > ceiling; };

  Adam adam(opt.lr);
  const std::size_t s_w1 = adam.add(m.w1.size());
  const std::size_t s_b1 = adam.add(m.b1.size());
  const std::size_t s_w2 = adam.add(m.w2.size());
  const std::size_t s_b2 = adam.add(m.b2.size());

  const std::size_t n = train_idx.size();
  std::vector<std::size_t> batch_idx;
  for (std::size_t epoch = 0; epoch < opt.epochs; ++epoch) {
    const auto order = shuffled_indices(n, rng);
    for (std::size_t start = 0; start < n; start += opt.batch) {
      const std::size_t end = std::min(n, start + opt.batch);
      batch_idx.clear();
      for (std::size_t p = start; p < end; ++p) batch_idx.push_back(train_idx[order[p]]);
      const DemGradient g = dem_loss_grad(m, make_batch(bundle, batch_idx), opt.l2);
      if (diverged(g.loss))
        throw NumericalError("dem: non-finite loss at epoch " + std::to_string(epoch) +
                             "; the learning rate is too high");
      adam.tick();
      adam.update(s_w1, m.w1.values(), g.w1.values());
      adam.update(s_b1, m.b1, g.b1);
      adam.update(s_w2, m.w2.values(), g.w2.values());
      adam.update(s_b2, m.b2, g.b2);
    }
    const double loss = full_loss();
    if (diverged(loss))
      throw NumericalError("dem: non-finite loss after epoch " + std::to_string(epoch) +
                           "; the learning rate is too high");
    m.loss_history.push_back(loss);
  }
  return m;
}

}  // namespace zspeedl
