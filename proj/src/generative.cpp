#include "zspeedl/generative.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <set>
#include <string>

#include "zspeedl/errors.hpp"
#include "zspeedl/numerics.hpp"
#include "zspeedl/optim.hpp"

namespace zspeedl {

GaussianGenerator fit_gaussian_generator(const DatasetBundle& bundle, std::span<const std::size_t> train_idx,
                                         double ridge) {
  if (train_idx.empty()) throw DataError("generator: empty training split");
  const std::size_t d = bundle.feature_dim();
  const auto seen = classes_present(bundle.labels, train_idx);
  std::map<ClassId, std::size_t> row;
  for (std::size_t i = 0; i < seen.size(); ++i) row[seen[i]] = i;

  Matrix means(seen.size(), d);
  std::vector<double> counts(seen.size(), 0.0);
  for (std::size_t i : train_idx) {
    const std::size_t r = row.at(bundle.labels[i]);
    counts[r] += 1.0;
    const auto x = bundle.features.row(i);
    for (std::size_t j = 0; j < d; ++j) means(r, j) += x[j];
  }
  for (std::size_t r = 0; r < seen.size(); ++r)
    for (std::size_t j = 0; j < d; ++j) means(r, j) /= counts[r];

  GaussianGenerator g;
  g.sigma.assign(d, 0.0);
  for (std::size_t i : train_idx) {
    const auto mu = means.row(row.at(bundle.labels[i]));
    const auto x = bundle.features.row(i);
    for (std::size_t j = 0; j < d; ++j) g.sigma[j] += (x[j] - mu[j]) * (x[j] - mu[j]);
  }
  for (double& s : g.sigma) s = std::sqrt(s / static_cast<double>(train_idx.size()));

  const Matrix s = class_attributes(bundle, seen);
  g.projection = numerics::ridge_solve(gram(s), ridge, matmul_tn(s, means));
  return g;
}

Matrix generator_means(const GaussianGenerator& g, const Matrix& attributes) {
  return matmul(attributes, g.projection);
}

SyntheticSet generate(const GaussianGenerator& g, const DatasetBundle& bundle, std::span<const ClassId> classes,
                      std::size_t n_per_class, std::uint64_t seed) {
  const std::size_t d = g.sigma.size();
  const Matrix mu = generator_means(g, class_attributes(bundle, classes));
  SyntheticSet out{Matrix(classes.size() * n_per_class, d), {}};
  out.labels.reserve(classes.size() * n_per_class);
  Rng rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::size_t r = 0;
  for (std::size_t c = 0; c < classes.size(); ++c) {
    for (std::size_t k = 0; k < n_per_class; ++k, ++r) {
      auto row = out.features.row(r);
      for (std::size_t j = 0; j < d; ++j) row[j] = mu(c, j) + g.sigma[j] * normal(rng);
      out.labels.push_back(classes[c]);
    }
  }
  return out;
}

SyntheticSet gaussian_generate(const DatasetBundle& bundle, double ridge, std::size_t n_per_class,
                               std::uint64_t seed) {
  if (bundle.split.unseen_classes.empty()) throw DataError("generator: no unseen classes");
  const GaussianGenerator g = fit_gaussian_generator(bundle, bundle.split.train_idx, ridge);
  return generate(g, bundle, bundle.split.unseen_classes, n_per_class, seed);
}

LinearSoftmaxModel softmax_clf_fit(const Matrix& x, const Labels& y, std::span<const ClassId> class_ids,
                                   const SoftmaxOptions& opt) {
  if (x.rows() != y.size()) throw DataError("softmax: feature and label counts differ");
  if (opt.batch == 0) throw UsageError("softmax: batch size must be positive");
  std::map<ClassId, std::size_t> index;
  for (std::size_t c = 0; c < class_ids.size(); ++c) index[class_ids[c]] = c;
  std::vector<std::size_t> target(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) {
    auto it = index.find(y[i]);
    if (it == index.end()) throw DataError("softmax: label " + std::to_string(y[i]) + " not among the classes");
    target[i] = it->second;
  }

  const std::size_t nc = class_ids.size();
  const std::size_t p = x.cols();
  LinearSoftmaxModel m{Matrix(nc, p), std::vector<double>(nc, 0.0), {class_ids.begin(), class_ids.end()}};
  Adam adam(opt.lr);
  const std::size_t s_w = adam.add(m.w.size());
  const std::size_t s_b = adam.add(nc);
  Rng rng(opt.seed);
  Matrix gw(nc, p);
  std::vector<double> gb(nc), logits(nc);
  const std::size_t n = x.rows();

  for (std::size_t epoch = 0; epoch < opt.epochs; ++epoch) {
    const auto order = shuffled_indices(n, rng);
    for (std::size_t start = 0; start < n; start += opt.batch) {
      const std::size_t end = std::min(n, start + opt.batch);
      const double inv_b = 1.0 / static_cast<double>(end - start);
      std::fill(gw.values().begin(), gw.values().end(), 0.0);
      std::fill(gb.begin(), gb.end(), 0.0);
      double loss = 0.0;
      for (std::size_t q = start; q < end; ++q) {
        const std::size_t i = order[q];
        const auto xi = x.row(i);
        for (std::size_t c = 0; c < nc; ++c) {
          const auto wc = m.w.row(c);
          double z = m.b[c];
          for (std::size_t j = 0; j < p; ++j) z += wc[j] * xi[j];
          logits[c] = z;
        }
        const auto prob = numerics::softmax(logits);
        loss -= std::log(std::max(prob[target[i]], 1e-300));
        for (std::size_t c = 0; c < nc; ++c) {
          const double err = (prob[c] - (c == target[i] ? 1.0 : 0.0)) * inv_b;
          if (err == 0.0) continue;
          auto g = gw.row(c);
          for (std::size_t j = 0; j < p; ++j) g[j] += err * xi[j];
          gb[c] += err;
        }
      }
      if (!std::isfinite(loss)) throw NumericalError("softmax: non-finite loss; lower the learning rate");
      if (opt.l2 > 0.0)
        for (std::size_t k = 0; k < gw.size(); ++k) gw.data()[k] += 2.0 * opt.l2 * m.w.data()[k];
      adam.tick();
      adam.update(s_w, m.w.values(), gw.values());
      adam.update(s_b, m.b, gb);
    }
  }
  if (!m.w.all_finite()) throw NumericalError("softmax: non-finite weights; lower the learning rate");
  return m;
}

std::vector<double> softmax_clf_probabilities(const LinearSoftmaxModel& m, std::span<const double> x) {
  if (x.size() != m.input_dim()) throw DataError("softmax: input dimension mismatch");
  std::vector<double> logits(m.w.rows());
  for (std::size_t c = 0; c < logits.size(); ++c) {
    const auto wc = m.w.row(c);
    double z = m.b[c];
    for (std::size_t j = 0; j < x.size(); ++j) z += wc[j] * x[j];
    logits[c] = z;
  }
  return numerics::softmax(logits);
}

DecoderModel decoder_fit(const Matrix& x, const Matrix& targets, const DecoderOptions& opt) {
  if (x.rows() != targets.rows()) throw DataError("decoder: feature and target counts differ");
  if (opt.batch == 0) throw UsageError("decoder: batch size must be positive");
  const std::size_t d = x.cols();
  const std::size_t a = targets.cols();
  const std::size_t h = opt.hidden;
  if (h == 0) throw UsageError("decoder: hidden dimension must be positive");
  Rng rng(opt.seed);
  DecoderModel dec{he_normal(d, h, rng), std::vector<double>(h, 0.0), he_normal(h, a, rng),
                   std::vector<double>(a, 0.0)};
  Adam adam(opt.lr);
  const std::size_t s_w1 = adam.add(dec.w1.size());
  const std::size_t s_b1 = adam.add(h);
  const std::size_t s_w2 = adam.add(dec.w2.size());
  const std::size_t s_b2 = adam.add(a);
  const std::size_t n = x.rows();
  std::vector<std::size_t> idx;

  for (std::size_t epoch = 0; epoch < opt.epochs; ++epoch) {
    const auto order = shuffled_indices(n, rng);
    for (std::size_t start = 0; start < n; start += opt.batch) {
      const std::size_t end = std::min(n, start + opt.batch);
      idx.assign(order.begin() + static_cast<std::ptrdiff_t>(start), order.begin() + static_cast<std::ptrdiff_t>(end));
      const Matrix xb = select_rows(x, idx);
      const Matrix tb = select_rows(targets, idx);
      const double scale = 2.0 / static_cast<double>(idx.size());

      Matrix z1 = matmul(xb, dec.w1);
      for (std::size_t r = 0; r < z1.rows(); ++r)
        for (std::size_t j = 0; j < h; ++j) z1(r, j) += dec.b1[j];
      Matrix h1 = z1;
      for (double& v : h1.values()) v = std::max(v, 0.0);
      Matrix out = matmul(h1, dec.w2);
      double loss = 0.0;
      for (std::size_t r = 0; r < out.rows(); ++r)
        for (std::size_t j = 0; j < a; ++j) {
          out(r, j) += dec.b2[j] - tb(r, j);  // residual
          loss += out(r, j) * out(r, j);
          out(r, j) *= scale;                 // dL/d(decoded)
        }
      if (!std::isfinite(loss)) throw NumericalError("decoder: non-finite loss; lower the learning rate");

      Matrix gw2 = matmul_tn(h1, out);
      std::vector<double> gb2(a, 0.0);
      for (std::size_t r = 0; r < out.rows(); ++r)
        for (std::size_t j = 0; j < a; ++j) gb2[j] += out(r, j);
      Matrix dz1 = matmul_nt(out, dec.w2);
      for (std::size_t k = 0; k < dz1.size(); ++k)
        if (!(z1.data()[k] > 0.0)) dz1.data()[k] = 0.0;
      Matrix gw1 = matmul_tn(xb, dz1);
      std::vector<double> gb1(h, 0.0);
      for (std::size_t r = 0; r < dz1.rows(); ++r)
        for (std::size_t j = 0; j < h; ++j) gb1[j] += dz1(r, j);
      for (std::size_t k = 0; k < gw1.size(); ++k) gw1.data()[k] += 2.0 * opt.l2 * dec.w1.data()[k];
      for (std::size_t k = 0; k < gw2.size(); ++k) gw2.data()[k] += 2.0 * opt.l2 * dec.w2.data()[k];

      adam.tick();
      adam.update(s_w1, dec.w1.values(), gw1.values());
      adam.update(s_b1, dec.b1, gb1);
      adam.update(s_w2, dec.w2.values(), gw2.values());
      adam.update(s_b2, dec.b2, gb2);
    }
  }
  return dec;
}

void decoder_augment(const DecoderModel& dec, std::span<const double> x, std::span<double> out) {
  const std::size_t d = dec.feature_dim();
  const std::size_t h = dec.hidden_dim();
  const std::size_t a = dec.attribute_dim();
  if (x.size() != d || out.size() != d + h + a) throw DataError("decoder: dimension mismatch");
  std::copy(x.begin(), x.end(), out.begin());
  auto hidden = out.subspan(d, h);
  std::copy(dec.b1.begin(), dec.b1.end(), hidden.begin());
  for (std::size_t j = 0; j < d; ++j) {
    const double xj = x[j];
    if (xj == 0.0) continue;
    const auto w = dec.w1.row(j);
    for (std::size_t k = 0; k < h; ++k) hidden[k] += xj * w[k];
  }
  for (double& v : hidden) v = std::max(v, 0.0);
  auto decoded = out.subspan(d + h, a);
  std::copy(dec.b2.begin(), dec.b2.end(), decoded.begin());
  for (std::size_t k = 0; k < h; ++k) {
    const double hk = hidden[k];
    if (hk == 0.0) continue;
    const auto w = dec.w2.row(k);
    for (std::size_t m = 0; m < a; ++m) decoded[m] += hk * w[m];
  }
}

Matrix decoder_augment(const DecoderModel& dec, const Matrix& x) {
  Matrix out(x.rows(), dec.augmented_dim());
  for (std::size_t r = 0; r < x.rows(); ++r) decoder_augment(dec, x.row(r), out.row(r));
  return out;
}

GenerativeModel generative_fit(const DatasetBundle& bundle, std::span<const std::size_t> train_idx,
                               std::span<const ClassId> synth_classes, const GenerativeOptions& opt) {
  if (train_idx.empty()) throw DataError("generative: empty training split");
  if (synth_classes.empty()) throw DataError("generative: no classes to synthesize");
  const GaussianGenerator gen = fit_gaussian_generator(bundle, train_idx, opt.ridge);
  const SyntheticSet synth = generate(gen, bundle, synth_classes, opt.n_per_class, opt.seed);
  const SplitView real = view_rows(bundle, train_idx);

  Matrix x(real.features.rows() + synth.features.rows(), bundle.feature_dim());
  std::copy(real.features.values().begin(), real.features.values().end(), x.values().begin());
  std::copy(synth.features.values().begin(), synth.features.values().end(),
            x.values().begin() + static_cast<std::ptrdiff_t>(real.features.size()));
  Labels y = real.labels;
  y.insert(y.end(), synth.labels.begin(), synth.labels.end());

  std::set<ClassId> classes(real.labels.begin(), real.labels.end());
  classes.insert(synth_classes.begin(), synth_classes.end());
  const std::vector<ClassId> class_ids(classes.begin(), classes.end());

  GenerativeModel model;
  SoftmaxOptions sopt = opt.softmax;
  sopt.seed = opt.seed;
  if (opt.use_decoder) {
    DecoderOptions dopt = opt.decoder;
    dopt.seed = opt.seed;
    model.decoder = decoder_fit(real.features, class_attributes(bundle, real.labels), dopt);
    model.classifier = softmax_clf_fit(decoder_augment(*model.decoder, x), y, class_ids, sopt);
  } else {
    model.classifier = softmax_clf_fit(x, y, class_ids, sopt);
  }
  return model;
}

}  // namespace zspeedl
