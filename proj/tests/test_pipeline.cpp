#include <algorithm>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

#include "doctest.h"
#include "fixture.hpp"
#include "zspeedl/candidates.hpp"
#include "zspeedl/errors.hpp"
#include "zspeedl/eval.hpp"
#include "zspeedl/experiment.hpp"
#include "zspeedl/model_io.hpp"
#include "zspeedl/predictor.hpp"

using namespace zspeedl;

namespace {

// One small trained model per method on the shared fixture.
std::vector<Model> trained_models(const DatasetBundle& b) {
  std::vector<Model> out;
  for (Method m : all_methods()) {
    Hyperparameters hp;
    switch (m) {
      case Method::eszsl: hp = {{"gamma", "0.1"}, {"lambda", "1"}}; break;
      case Method::sae: hp = {{"lambda", "0.5"}}; break;
      case Method::dap: hp = {{"epochs", "5"}}; break;
      case Method::dem: hp = {{"hidden", "16"}, {"epochs", "5"}}; break;
      case Method::gen_softmax: hp = {{"n_per_class", "20"}, {"epochs", "5"}}; break;
      case Method::gen_decoder: hp = {{"n_per_class", "20"}, {"epochs", "5"}, {"dec_hidden", "8"}, {"dec_epochs", "3"}}; break;
    }
    out.push_back(train_method(m, b, hp, 42).model);
  }
  return out;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_SUITE("predictor") {
  TEST_CASE("method names round trip") {
    for (Method m : all_methods()) CHECK(parse_method(to_string(m)) == m);
    CHECK(all_methods().size() == 6);
    CHECK_THROWS_AS(parse_method("iap"), UsageError);
  }

  TEST_CASE("single-row prediction agrees with batch prediction for every method") {
    const DatasetBundle b = testing::make_fixture(60);
    const Candidates cand = make_candidates(b, std::vector<ClassId>{0, 1, 2, 3, 4, 5});
    for (const Model& model : trained_models(b)) {
      CAPTURE(to_string(method_of(model)));
      const auto batch = predict(model, b.features, cand);
      for (std::size_t i = 0; i < b.num_instances(); ++i) CHECK(batch[i] == predict_single(model, b.features.row(i), cand));
      CHECK(model_feature_dim(model) == 8);
    }
  }

  TEST_CASE("permuting candidates permutes predicted indices consistently") {
    const DatasetBundle b = testing::make_fixture(61);
    const std::vector<ClassId> order{0, 1, 2, 3, 4, 5};
    std::vector<ClassId> shuffled = order;
    std::mt19937_64 rng(3);
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    const Candidates a = make_candidates(b, order), c = make_candidates(b, shuffled);
    for (const Model& model : trained_models(b)) {
      CAPTURE(to_string(method_of(model)));
      CHECK(to_class_ids(a, predict(model, b.features, a)) == to_class_ids(c, predict(model, b.features, c)));
    }
  }

  TEST_CASE("wrong feature dimension and empty candidates are data errors") {
    const DatasetBundle b = testing::make_fixture(62);
    const Candidates cand = make_candidates(b, b.split.unseen_classes);
    for (const Model& model : trained_models(b)) {
      CHECK_THROWS_AS(predict(model, Matrix(1, 5), cand), DataError);
      CHECK_THROWS_AS(make_predictor(model, make_candidates(b, std::vector<ClassId>{})), DataError);
    }
  }

  TEST_CASE("argmin and argmax break ties toward the lowest index") {
    CHECK(argmax(std::vector<double>{1, 3, 3}) == 1);
    CHECK(argmin(std::vector<double>{2, 0, 0, 5}) == 1);
  }
}

TEST_SUITE("model_io") {
  TEST_CASE("every method round trips bitwise and re-saves identically") {
    const DatasetBundle b = testing::make_fixture(70);
    const auto dir = testing::scratch_dir("models");
    const Candidates cand = make_candidates(b, std::vector<ClassId>{0, 1, 2, 3, 4, 5});
    for (const Model& model : trained_models(b)) {
      const std::string name(to_string(method_of(model)));
      CAPTURE(name);
      save_model(dir / (name + ".zspm"), model, {{"seed", 42}, {"train_manifest_hash", "abc"}});
      const ModelFile mf = load_model(dir / (name + ".zspm"));
      CHECK(method_of(mf.model) == method_of(model));
      CHECK(mf.header.at("method") == name);
      CHECK(mf.header.at("seed") == 42);
      CHECK(mf.header.at("train_manifest_hash") == "abc");
      CHECK(predict(mf.model, b.features, cand) == predict(model, b.features, cand));
      save_model(dir / (name + ".again.zspm"), mf.model, {{"seed", 42}, {"train_manifest_hash", "abc"}});
      CHECK(slurp(dir / (name + ".zspm")) == slurp(dir / (name + ".again.zspm")));
    }
  }

  TEST_CASE("bad model files are data errors") {
    const auto dir = testing::scratch_dir("badmodels");
    CHECK_THROWS_AS(load_model(dir / "missing.zspm"), DataError);
    std::ofstream(dir / "junk.zspm") << "not a model";
    CHECK_THROWS_AS(load_model(dir / "junk.zspm"), DataError);
    const DatasetBundle b = testing::make_fixture(71);
    save_model(dir / "e.zspm", Model{eszsl_fit(b, 0.1, 0.1)}, {});
    const std::string bytes = slurp(dir / "e.zspm");
    std::ofstream(dir / "cut.zspm", std::ios::binary) << bytes.substr(0, bytes.size() - 10);
    CHECK_THROWS_AS(load_model(dir / "cut.zspm"), DataError);
  }
}

TEST_SUITE("eval") {
  TEST_CASE("mca examples") {
    const std::vector<ClassId> cls{0, 1, 2};
    CHECK(mca(std::vector<ClassId>{0, 1, 2}, std::vector<ClassId>{0, 1, 2}, cls) == 1.0);
    // One class fully right, one fully wrong, sizes differ.
    CHECK(mca(std::vector<ClassId>{0, 0, 0, 0}, std::vector<ClassId>{0, 0, 0, 1}, std::vector<ClassId>{0, 1}) == 0.5);
    // Sizes (10, 1, 1) with (5, 1, 0) correct.
    Labels labels(10, 0), pred(10, 0);
    for (int i = 5; i < 10; ++i) pred[static_cast<std::size_t>(i)] = 1;
    labels.push_back(1);
    pred.push_back(1);
    labels.push_back(2);
    pred.push_back(0);
    CHECK(mca(pred, labels, cls) == doctest::Approx(0.5).epsilon(1e-15));
    // A class without instances is excluded from the average.
    CHECK(mca(std::vector<ClassId>{0}, std::vector<ClassId>{0}, cls) == 1.0);
    CHECK_THROWS_AS(mca(std::vector<ClassId>{}, std::vector<ClassId>{}, cls), DataError);
    CHECK_THROWS_AS(mca(std::vector<ClassId>{0}, std::vector<ClassId>{7}, cls), DataError);
  }

  TEST_CASE("printed example: U 4.66, S 87.07 gives H 8.86 within 0.01") {
    // Source values as printed, compared at the tolerance of two-decimal rounding.
    CHECK(std::abs(100 * harmonic_mean(0.8707, 0.0466) - 8.86) < 0.01);
  }

  TEST_CASE("harmonic mean examples and bounds") {
    // Direct formula oracle.
    CHECK(100 * harmonic_mean(0.8707, 0.0466) == doctest::Approx(2 * 87.07 * 4.66 / (87.07 + 4.66)).epsilon(1e-14));
    CHECK(harmonic_mean(0.4, 0.4) == doctest::Approx(0.4));
    CHECK(harmonic_mean(0.7, 0.0) == 0.0);
    CHECK(harmonic_mean(0.0, 0.0) == 0.0);
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0.001, 1.0);
    for (int i = 0; i < 200; ++i) {
      const double s = u(rng), t = u(rng);
      const double h = harmonic_mean(s, t);
      CHECK(h >= std::min(s, t) - 1e-15);
      CHECK(h <= std::max(s, t) + 1e-15);
    }
  }

  TEST_CASE("gzsl_eval combines per-partition mca") {
    const GzslScores s = gzsl_eval(std::vector<ClassId>{0, 1, 1}, std::vector<ClassId>{0, 1, 0},
                                   std::vector<ClassId>{2, 2}, std::vector<ClassId>{2, 3},
                                   std::vector<ClassId>{0, 1}, std::vector<ClassId>{2, 3});
    CHECK(s.acc_seen == doctest::Approx(0.75));
    CHECK(s.acc_unseen == doctest::Approx(0.5));
    CHECK(s.harmonic_mean == doctest::Approx(2 * 0.75 * 0.5 / 1.25));
    CHECK_THROWS_AS(gzsl_eval({}, {}, std::vector<ClassId>{2}, std::vector<ClassId>{2}, std::vector<ClassId>{0},
                              std::vector<ClassId>{2}),
                    DataError);
  }

  TEST_CASE("mca is invariant under relabeling and equals accuracy when balanced") {
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 50; ++trial) {
      const std::size_t k = 2 + static_cast<std::size_t>(trial % 5), per = 1 + static_cast<std::size_t>(trial % 7);
      std::vector<ClassId> cls(k);
      std::iota(cls.begin(), cls.end(), 0);
      Labels labels, pred;
      std::uniform_int_distribution<ClassId> pick(0, static_cast<ClassId>(k - 1));
      for (std::size_t c = 0; c < k; ++c)
        for (std::size_t i = 0; i < per; ++i) {
          labels.push_back(static_cast<ClassId>(c));
          pred.push_back(pick(rng));
        }
      std::size_t correct = 0;
      for (std::size_t i = 0; i < labels.size(); ++i) correct += labels[i] == pred[i];
      const double m = mca(pred, labels, cls);
      CHECK(m == doctest::Approx(static_cast<double>(correct) / static_cast<double>(labels.size())).epsilon(1e-12));

      std::vector<ClassId> perm = cls;
      std::shuffle(perm.begin(), perm.end(), rng);
      Labels pl, pp;
      for (std::size_t i = 0; i < labels.size(); ++i) {
        pl.push_back(perm[static_cast<std::size_t>(labels[i])] + 100);
        pp.push_back(perm[static_cast<std::size_t>(pred[i])] + 100);
      }
      std::vector<ClassId> pc;
      for (ClassId c : cls) pc.push_back(c + 100);
      CHECK(mca(pp, pl, pc) == doctest::Approx(m).epsilon(1e-12));
    }
  }
}

TEST_SUITE("experiment") {
  TEST_CASE("perfect fixture gives mca 1.0") {
    const DatasetBundle b = testing::make_fixture(80, {.n = 60, .d = 8, .classes = 6, .a = 4, .unseen = 2, .noise = 0.0});
    const TrainResult r = train_method(Method::eszsl, b, {{"gamma", "0.001"}, {"lambda", "0.001"}}, 1);
    CHECK(zsl_mca(r.model, b) == 1.0);
    CHECK(evaluate(r.model, b, Setting::zsl).at("mca") == 100.0);
  }

  TEST_CASE("grid search records the selected values and validation score") {
    const DatasetBundle b = testing::make_fixture(81);
    const TrainResult sae = train_method(Method::sae, b, {}, 42);
    REQUIRE(sae.validation_mca.has_value());
    const double lambda = sae.hyperparameters.at("lambda");
    CHECK(std::find(sae_grid().begin(), sae_grid().end(), lambda) != sae_grid().end());
    const TrainResult e = train_method(Method::eszsl, b, {{"gamma", "1"}}, 42);
    CHECK(e.hyperparameters.at("gamma") == 1.0);
    CHECK(e.validation_mca.has_value());
    const TrainResult fixed = train_method(Method::eszsl, b, {{"gamma", "1"}, {"lambda", "1"}}, 42);
    CHECK_FALSE(fixed.validation_mca.has_value());
  }

  TEST_CASE("hyperparameter validation happens before any work") {
    const DatasetBundle b = testing::make_fixture(82);
    CHECK_THROWS_AS(train_method(Method::eszsl, b, {{"hidden", "3"}}, 1), UsageError);
    CHECK_THROWS_AS(train_method(Method::dem, b, {{"lr", "fast"}}, 1), UsageError);
    CHECK_THROWS_AS(train_method(Method::dem, b, {{"epochs", "-1"}}, 1), UsageError);
    CHECK_THROWS_AS(train_method(Method::sae, b, {{"metric", "l1"}}, 1), UsageError);
    CHECK_NOTHROW(validate_hyperparameters(Method::gen_decoder, {{"dec_hidden", "4"}, {"ridge", "0.5"}}));
  }

  TEST_CASE("gzsl result record has u, s, h and is reproducible") {
    const DatasetBundle b = testing::make_fixture(83);
    for (Method m : all_methods()) {
      CAPTURE(to_string(m));
      Hyperparameters hp;
      if (m == Method::dem) hp = {{"hidden", "16"}, {"epochs", "3"}};
      if (m == Method::gen_softmax || m == Method::gen_decoder) hp = {{"n_per_class", "10"}, {"epochs", "3"}};
      if (m == Method::gen_decoder) hp["dec_epochs"] = "2";
      const TrainResult a = train_method(m, b, hp, 5), c = train_method(m, b, hp, 5);
      const auto ja = evaluate(a.model, b, Setting::gzsl), jc = evaluate(c.model, b, Setting::gzsl);
      CHECK(ja.dump() == jc.dump());
      CHECK(ja.contains("u"));
      CHECK(ja.contains("s"));
      CHECK(ja.contains("h"));
      CHECK(ja.at("setting") == "gzsl");
    }
    DatasetBundle no_seen = b;
    no_seen.split.test_seen_idx.clear();
    CHECK_THROWS_AS(gzsl_scores(train_method(Method::eszsl, b, {{"gamma", "1"}, {"lambda", "1"}}, 1).model, no_seen),
                    DataError);
  }
}
