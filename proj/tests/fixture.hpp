#pragma once

#include <filesystem>
#include <random>
#include <string>

#include "zspeedl/dataset.hpp"

namespace zspeedl::testing {

struct FixtureShape {
  std::size_t n = 60;
  std::size_t d = 8;
  std::size_t classes = 6;
  std::size_t a = 4;
  std::size_t unseen = 2;
  double noise = 0.1;
};

// Features are a random linear image of the class attributes plus Gaussian
// noise. Instance i has class i % classes; the last `unseen` classes are
// unseen, every fourth instance of each seen class goes to test_seen. All values are
// float32-representable so they survive the on-disk format exactly.
inline DatasetBundle make_fixture(std::uint64_t seed, FixtureShape s = {}) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);
  auto f32 = [](double v) { return static_cast<double>(static_cast<float>(v)); };

  DatasetBundle b;
  b.name = "fixture";
  b.backbone_tag = "fixnet";
  b.attributes = Matrix(s.classes, s.a);
  for (std::size_t c = 0; c < s.classes; ++c)
    for (std::size_t k = 0; k < s.a; ++k) b.attributes(c, k) = f32(unif(rng));
  Matrix proj(s.a, s.d);
  for (std::size_t k = 0; k < s.a; ++k)
    for (std::size_t j = 0; j < s.d; ++j) proj(k, j) = normal(rng);

  b.features = Matrix(s.n, s.d);
  b.labels.resize(s.n);
  const std::size_t n_seen = s.classes - s.unseen;
  for (std::size_t i = 0; i < s.n; ++i) {
    const auto c = static_cast<ClassId>(i % s.classes);
    b.labels[i] = c;
    for (std::size_t j = 0; j < s.d; ++j) {
      double v = 0.0;
      for (std::size_t k = 0; k < s.a; ++k) v += b.attributes(c, k) * proj(k, j);
      b.features(i, j) = f32(v + s.noise * normal(rng));
    }
    if (static_cast<std::size_t>(c) >= n_seen) {
      b.split.test_unseen_idx.push_back(i);
    } else if ((i / s.classes) % 4 == 3) {
      b.split.test_seen_idx.push_back(i);
    } else {
      b.split.train_idx.push_back(i);
    }
  }
  for (std::size_t c = 0; c < s.classes; ++c) {
    (c < n_seen ? b.split.seen_classes : b.split.unseen_classes).push_back(static_cast<ClassId>(c));
    b.class_names.push_back("class" + std::to_string(c));
  }
  return b;
}

// Fresh, empty scratch directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("zspeedl_test_" + name);
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

}  // namespace zspeedl::testing
