#include "zspeedl/predictor.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <string>

#include "zspeedl/errors.hpp"
#include "zspeedl/numerics.hpp"

namespace zspeedl {

namespace {

void require_dim(std::size_t got, std::size_t want, const char* what) {
  if (got != want)
    throw DataError(std::string(what) + ": dimension mismatch (" + std::to_string(got) + " vs " +
                    std::to_string(want) + ")");
}

void require_candidates(std::size_t n) {
  if (n == 0) throw DataError("predict: empty candidate set");
}

double dot(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

// scores[c] = x^T (V S^T)[:, c]; V S^T is folded once per candidate set.
class EszslPredictor final : public Predictor {
 public:
  EszslPredictor(const EszslModel& m, const Matrix& cand)
      : d_(m.v.rows()), vs_(matmul_nt(m.v, cand)), scores_(cand.rows()) {
    require_dim(cand.cols(), m.v.cols(), "eszsl candidates");
    require_candidates(cand.rows());
  }
  std::size_t classify(std::span<const double> x) override {
    require_dim(x.size(), d_, "eszsl features");
    std::fill(scores_.begin(), scores_.end(), 0.0);
    const std::size_t nc = scores_.size();
    for (std::size_t j = 0; j < d_; ++j) {
      const double xj = x[j];
      const double* row = vs_.data() + j * nc;
      for (std::size_t c = 0; c < nc; ++c) scores_[c] += xj * row[c];
    }
    return argmax(scores_);
  }
  std::size_t feature_dim() const noexcept override { return d_; }

 private:
  std::size_t d_;
  Matrix vs_;  // d x C
  std::vector<double> scores_;
};

class SaePredictor final : public Predictor {
 public:
  SaePredictor(const SaeModel& m, const Matrix& cand)
      : m_(m), cand_(cand), dist_(cand.rows()), proj_(m.w.rows()) {
    require_dim(cand.cols(), m.w.rows(), "sae candidates");
    require_candidates(cand.rows());
    if (m.direction == SaeDirection::semantic_to_feature) {
      decoded_ = matmul(cand, m.w);  // rows W^T s_c
    }
  }
  std::size_t classify(std::span<const double> x) override {
    const std::size_t d = m_.w.cols();
    require_dim(x.size(), d, "sae features");
    if (m_.direction == SaeDirection::feature_to_semantic) {
      for (std::size_t k = 0; k < proj_.size(); ++k) proj_[k] = dot(m_.w.data() + k * d, x.data(), d);
      for (std::size_t c = 0; c < dist_.size(); ++c) dist_[c] = numerics::distance(proj_, cand_.row(c), m_.metric);
    } else {
      for (std::size_t c = 0; c < dist_.size(); ++c) dist_[c] = numerics::distance(x, decoded_.row(c), m_.metric);
    }
    return argmin(dist_);
  }
  std::size_t feature_dim() const noexcept override { return m_.w.cols(); }

 private:
  const SaeModel& m_;
  Matrix cand_;
  Matrix decoded_;
  std::vector<double> dist_;
  std::vector<double> proj_;
};

class DapPredictor final : public Predictor {
 public:
  DapPredictor(const DapModel& m, const Matrix& binary_cand)
      : m_(m), active_(m.attribute_dim(), 1), scores_(binary_cand.rows()) {
    require_dim(binary_cand.cols(), m.attribute_dim(), "dap candidates");
    require_candidates(binary_cand.rows());
    for (std::size_t k : m.excluded) active_[k] = 0;
    const std::size_t a = m.attribute_dim();
    // Per candidate: which posterior to read and the prior term.
    take_one_ = Matrix(binary_cand.rows(), a);
    prior_term_.assign(binary_cand.rows(), 0.0);
    for (std::size_t c = 0; c < binary_cand.rows(); ++c) {
      for (std::size_t k = 0; k < a; ++k) {
        const bool one = binary_cand(c, k) > 0.5;
        take_one_(c, k) = one ? 1.0 : 0.0;
        if (active_[k]) prior_term_[c] -= std::log(one ? m.priors[k] : 1.0 - m.priors[k]);
      }
    }
  }
  std::size_t classify(std::span<const double> x) override {
    const std::size_t d = m_.feature_dim();
    const std::size_t a = m_.attribute_dim();
    require_dim(x.size(), d, "dap features");
    for (std::size_t k = 0; k < a; ++k) {
      if (!active_[k]) continue;
      const double* w = m_.weights.data() + k * (d + 1);
      const double z = dot(w, x.data(), d) + w[d];
      const double p = z >= 0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z));
      const double pc = std::clamp(p, kDapProbClamp, 1.0 - kDapProbClamp);
      log_one_[k] = std::log(pc);
      log_zero_[k] = std::log(1.0 - pc);
    }
    for (std::size_t c = 0; c < scores_.size(); ++c) {
      double s = prior_term_[c];
      const double* one = take_one_.data() + c * a;
      for (std::size_t k = 0; k < a; ++k)
        if (active_[k]) s += one[k] > 0.5 ? log_one_[k] : log_zero_[k];
      scores_[c] = s;
    }
    return argmax(scores_);
  }
  std::size_t feature_dim() const noexcept override { return m_.feature_dim(); }

 private:
  const DapModel& m_;
  std::vector<char> active_;
  std::vector<double> scores_;
  Matrix take_one_;
  std::vector<double> prior_term_;
  std::vector<double> log_one_ = std::vector<double>(m_.attribute_dim());
  std::vector<double> log_zero_ = std::vector<double>(m_.attribute_dim());
};

// The two-layer embedding of every candidate is recomputed per sample: it is
// the network forward pass that dominates this method's inference cost.
class DemPredictor final : public Predictor {
 public:
  DemPredictor(const DemModel& m, const Matrix& cand)
      : m_(m), cand_(cand), hidden_(m.hidden_dim()), embed_(m.feature_dim()), dist_(cand.rows()) {
    require_dim(cand.cols(), m.attribute_dim(), "dem candidates");
    require_candidates(cand.rows());
  }
  std::size_t classify(std::span<const double> x) override {
    const std::size_t a = m_.attribute_dim();
    const std::size_t h = m_.hidden_dim();
    const std::size_t d = m_.feature_dim();
    require_dim(x.size(), d, "dem features");
    for (std::size_t c = 0; c < dist_.size(); ++c) {
      const auto s = cand_.row(c);
      std::copy(m_.b1.begin(), m_.b1.end(), hidden_.begin());
      for (std::size_t k = 0; k < a; ++k) {
        const double sk = s[k];
        const double* w = m_.w1.data() + k * h;
        for (std::size_t j = 0; j < h; ++j) hidden_[j] += sk * w[j];
      }
      std::copy(m_.b2.begin(), m_.b2.end(), embed_.begin());
      for (std::size_t j = 0; j < h; ++j) {
        const double hj = hidden_[j];
        if (!(hj > 0.0)) continue;  // relu
        const double* w = m_.w2.data() + j * d;
        for (std::size_t k = 0; k < d; ++k) embed_[k] += hj * w[k];
      }
      double sq = 0.0;
      for (std::size_t k = 0; k < d; ++k) {
        const double t = std::max(embed_[k], 0.0) - x[k];
        sq += t * t;
      }
      dist_[c] = std::sqrt(sq);
    }
    return argmin(dist_);
  }
  std::size_t feature_dim() const noexcept override { return m_.feature_dim(); }

 private:
  const DemModel& m_;
  Matrix cand_;
  std::vector<double> hidden_;
  std::vector<double> embed_;
  std::vector<double> dist_;
};

std::vector<std::size_t> candidate_rows(const LinearSoftmaxModel& m, std::span<const ClassId> candidates) {
  std::map<ClassId, std::size_t> row;
  for (std::size_t c = 0; c < m.class_ids.size(); ++c) row[m.class_ids[c]] = c;
  std::vector<std::size_t> out;
  out.reserve(candidates.size());
  for (ClassId id : candidates) {
    auto it = row.find(id);
    if (it == row.end()) throw DataError("softmax: candidate class " + std::to_string(id) + " unknown to the classifier");
    out.push_back(it->second);
  }
  return out;
}

// Linear softmax over the candidate rows, optionally on decoder-augmented input.
// argmax of the probabilities equals argmax of the logits; the probabilities
// are still normalized so the timed work matches a real softmax head.
class SoftmaxPredictor final : public Predictor {
 public:
  SoftmaxPredictor(const LinearSoftmaxModel& clf, const DecoderModel* dec, std::span<const ClassId> candidates)
      : clf_(clf), dec_(dec), rows_(candidate_rows(clf, candidates)), logits_(rows_.size()) {
    require_candidates(rows_.size());
    if (dec_) {
      require_dim(clf.input_dim(), dec_->augmented_dim(), "decoder-augmented classifier");
      input_.resize(dec_->augmented_dim());
    }
  }
  std::size_t classify(std::span<const double> x) override {
    std::span<const double> in = x;
    if (dec_) {
      require_dim(x.size(), dec_->feature_dim(), "decoder features");
      decoder_augment(*dec_, x, input_);
      in = input_;
    }
    const std::size_t p = clf_.input_dim();
    require_dim(in.size(), p, "softmax features");
    double mx = -std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < rows_.size(); ++c) {
      logits_[c] = clf_.b[rows_[c]] + dot(clf_.w.data() + rows_[c] * p, in.data(), p);
      mx = std::max(mx, logits_[c]);
    }
    double sum = 0.0;
    for (double& v : logits_) {
      v = std::exp(v - mx);
      sum += v;
    }
    for (double& v : logits_) v /= sum;
    return argmax(logits_);
  }
  std::size_t feature_dim() const noexcept override { return dec_ ? dec_->feature_dim() : clf_.input_dim(); }

 private:
  const LinearSoftmaxModel& clf_;
  const DecoderModel* dec_;
  std::vector<std::size_t> rows_;
  std::vector<double> logits_;
  std::vector<double> input_;
};

std::vector<std::size_t> run_batch(Predictor& p, const Matrix& x) {
  std::vector<std::size_t> out(x.rows());
  for (std::size_t r = 0; r < x.rows(); ++r) out[r] = p.classify(x.row(r));
  return out;
}

}  // namespace

Candidates make_candidates(const DatasetBundle& bundle, std::span<const ClassId> classes) {
  return {{classes.begin(), classes.end()}, class_attributes(bundle, classes)};
}

Labels to_class_ids(const Candidates& c, std::span<const std::size_t> indices) {
  Labels out;
  out.reserve(indices.size());
  for (std::size_t i : indices) out.push_back(c.class_ids.at(i));
  return out;
}

std::size_t argmin(std::span<const double> v) noexcept {
  std::size_t best = 0;
  for (std::size_t i = 1; i < v.size(); ++i)
    if (v[i] < v[best]) best = i;
  return best;
}

std::size_t argmax(std::span<const double> v) noexcept {
  std::size_t best = 0;
  for (std::size_t i = 1; i < v.size(); ++i)
    if (v[i] > v[best]) best = i;
  return best;
}

std::string_view to_string(Method m) noexcept {
  switch (m) {
    case Method::dap: return "dap";
    case Method::eszsl: return "eszsl";
    case Method::sae: return "sae";
    case Method::dem: return "dem";
    case Method::gen_softmax: return "gen-softmax";
    case Method::gen_decoder: return "gen-decoder";
  }
  return "?";
}

Method parse_method(std::string_view name) {
  for (Method m : all_methods())
    if (to_string(m) == name) return m;
  throw UsageError("unknown method '" + std::string(name) + "'");
}

const std::vector<Method>& all_methods() {
  static const std::vector<Method> methods{Method::dap, Method::eszsl, Method::sae,
                                           Method::dem, Method::gen_softmax, Method::gen_decoder};
  return methods;
}

Method method_of(const Model& m) noexcept {
  struct Visitor {
    Method operator()(const EszslModel&) const { return Method::eszsl; }
    Method operator()(const SaeModel&) const { return Method::sae; }
    Method operator()(const DapModel&) const { return Method::dap; }
    Method operator()(const DemModel&) const { return Method::dem; }
    Method operator()(const GenerativeModel& g) const {
      return g.decoder ? Method::gen_decoder : Method::gen_softmax;
    }
  };
  return std::visit(Visitor{}, m);
}

std::size_t model_feature_dim(const Model& m) noexcept {
  struct Visitor {
    std::size_t operator()(const EszslModel& x) const { return x.v.rows(); }
    std::size_t operator()(const SaeModel& x) const { return x.w.cols(); }
    std::size_t operator()(const DapModel& x) const { return x.feature_dim(); }
    std::size_t operator()(const DemModel& x) const { return x.feature_dim(); }
    std::size_t operator()(const GenerativeModel& g) const {
      return g.decoder ? g.decoder->feature_dim() : g.classifier.input_dim();
    }
  };
  return std::visit(Visitor{}, m);
}

std::unique_ptr<Predictor> make_predictor(const Model& model, const Candidates& candidates) {
  struct Visitor {
    const Candidates& c;
    std::unique_ptr<Predictor> operator()(const EszslModel& m) const {
      return std::make_unique<EszslPredictor>(m, c.attributes);
    }
    std::unique_ptr<Predictor> operator()(const SaeModel& m) const {
      return std::make_unique<SaePredictor>(m, c.attributes);
    }
    std::unique_ptr<Predictor> operator()(const DapModel& m) const {
      return std::make_unique<DapPredictor>(m, dap_binarize(m, c.attributes));
    }
    std::unique_ptr<Predictor> operator()(const DemModel& m) const {
      return std::make_unique<DemPredictor>(m, c.attributes);
    }
    std::unique_ptr<Predictor> operator()(const GenerativeModel& g) const {
      return std::make_unique<SoftmaxPredictor>(g.classifier, g.decoder ? &*g.decoder : nullptr, c.class_ids);
    }
  };
  return std::visit(Visitor{candidates}, model);
}

std::vector<std::size_t> predict(const Model& model, const Matrix& x, const Candidates& candidates) {
  auto p = make_predictor(model, candidates);
  return run_batch(*p, x);
}

std::size_t predict_single(const Model& model, std::span<const double> x, const Candidates& candidates) {
  return make_predictor(model, candidates)->classify(x);
}

std::vector<std::size_t> eszsl_predict(const EszslModel& m, const Matrix& x, const Matrix& candidates) {
  EszslPredictor p(m, candidates);
  return run_batch(p, x);
}

std::vector<std::size_t> sae_predict(const SaeModel& m, const Matrix& x, const Matrix& candidates,
                                     SaeDirection direction, numerics::Metric metric) {
  SaeModel local = m;
  local.direction = direction;
  local.metric = metric;
  SaePredictor p(local, candidates);
  return run_batch(p, x);
}

std::vector<std::size_t> dap_predict(const DapModel& m, const Matrix& x, const Matrix& binary_candidates) {
  DapPredictor p(m, binary_candidates);
  return run_batch(p, x);
}

std::vector<std::size_t> dem_predict(const DemModel& m, const Matrix& x, const Matrix& candidates) {
  DemPredictor p(m, candidates);
  return run_batch(p, x);
}

std::vector<std::size_t> softmax_clf_predict(const LinearSoftmaxModel& m, const Matrix& x,
                                             std::span<const ClassId> candidates) {
  SoftmaxPredictor p(m, nullptr, candidates);
  return run_batch(p, x);
}

std::vector<std::size_t> decoder_augmented_predict(const LinearSoftmaxModel& clf, const DecoderModel& dec,
                                                   const Matrix& x, std::span<const ClassId> candidates) {
  SoftmaxPredictor p(clf, &dec, candidates);
  return run_batch(p, x);
}

}  // namespace zspeedl
