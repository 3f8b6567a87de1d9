#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "zspeedl/candidates.hpp"
#include "zspeedl/dataset.hpp"
#include "zspeedl/matrix.hpp"

namespace zspeedl {

// Conditional Gaussian feature generator used in place of a trained GAN:
// class means are a ridge regression of seen-class means on attributes,
// spread is one diagonal residual standard deviation shared by all classes.
struct GaussianGenerator {
  Matrix projection;          // a x d, mean(s) = s * projection
  std::vector<double> sigma;  // d
};

GaussianGenerator fit_gaussian_generator(const DatasetBundle& bundle, std::span<const std::size_t> train_idx,
                                         double ridge);

Matrix generator_means(const GaussianGenerator& g, const Matrix& attributes);

struct SyntheticSet {
  Matrix features;
  Labels labels;
};

// n_per_class samples for each class, drawn as mean(s_c) + sigma * N(0, I).
SyntheticSet generate(const GaussianGenerator& g, const DatasetBundle& bundle, std::span<const ClassId> classes,
                      std::size_t n_per_class, std::uint64_t seed);

// Fits on the training split and samples every unseen class.
SyntheticSet gaussian_generate(const DatasetBundle& bundle, double ridge, std::size_t n_per_class,
                               std::uint64_t seed);

// Multinomial logistic regression.
struct LinearSoftmaxModel {
  Matrix w;  // C x p
  std::vector<double> b;
  std::vector<ClassId> class_ids;

  std::size_t input_dim() const noexcept { return w.cols(); }
};

struct SoftmaxOptions {
  double lr = 1e-3;
  double l2 = 0.0;
  std::size_t epochs = 50;
  std::size_t batch = 64;
  std::uint64_t seed = 42;
};

LinearSoftmaxModel softmax_clf_fit(const Matrix& x, const Labels& y, std::span<const ClassId> class_ids,
                                   const SoftmaxOptions& opt);

// Class probabilities over all model classes for one input.
std::vector<double> softmax_clf_probabilities(const LinearSoftmaxModel& m, std::span<const double> x);

// Prediction restricted to the candidate classes, which must be a subset of
// the model's classes. Returns candidate indices.
std::vector<std::size_t> softmax_clf_predict(const LinearSoftmaxModel& m, const Matrix& x,
                                             std::span<const ClassId> candidates);

// Semantic decoder x -> a used to augment classifier inputs:
// hidden = relu(x Wd1 + bd1), decoded = hidden Wd2 + bd2.
struct DecoderModel {
  Matrix w1;  // d x h'
  std::vector<double> b1;
  Matrix w2;  // h' x a
  std::vector<double> b2;

  std::size_t feature_dim() const noexcept { return w1.rows(); }
  std::size_t hidden_dim() const noexcept { return w1.cols(); }
  std::size_t attribute_dim() const noexcept { return w2.cols(); }
  std::size_t augmented_dim() const noexcept { return feature_dim() + hidden_dim() + attribute_dim(); }
};

struct DecoderOptions {
  std::size_t hidden = 512;
  double lr = 1e-3;
  double l2 = 1e-4;
  std::size_t epochs = 20;
  std::size_t batch = 64;
  std::uint64_t seed = 42;
};

// Regresses each instance's class attributes from its features (mean squared error).
DecoderModel decoder_fit(const Matrix& x, const Matrix& targets, const DecoderOptions& opt);

// [x || hidden(x) || decoded(x)] into `out` (size augmented_dim()).
void decoder_augment(const DecoderModel& dec, std::span<const double> x, std::span<double> out);
Matrix decoder_augment(const DecoderModel& dec, const Matrix& x);

std::vector<std::size_t> decoder_augmented_predict(const LinearSoftmaxModel& clf, const DecoderModel& dec,
                                                   const Matrix& x, std::span<const ClassId> candidates);

// Classifier trained on real seen-class features plus synthetic unseen-class
// features, optionally on decoder-augmented inputs.
struct GenerativeModel {
  LinearSoftmaxModel classifier;
  std::optional<DecoderModel> decoder;
};

struct GenerativeOptions {
  double ridge = 1.0;
  std::size_t n_per_class = 300;
  SoftmaxOptions softmax;
  DecoderOptions decoder;
  bool use_decoder = false;
  std::uint64_t seed = 42;
};

GenerativeModel generative_fit(const DatasetBundle& bundle, std::span<const std::size_t> train_idx,
                               std::span<const ClassId> synth_classes, const GenerativeOptions& opt);

}  // namespace zspeedl
