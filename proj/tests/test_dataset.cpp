#include <fstream>

#include "doctest.h"
#include "fixture.hpp"
#include "json.hpp"
#include "zspeedl/array_io.hpp"
#include "zspeedl/errors.hpp"

using namespace zspeedl;

TEST_SUITE("dataset") {
  TEST_CASE("fixture passes validation and has the expected shape") {
    const DatasetBundle b = testing::make_fixture(1);
    CHECK_NOTHROW(validate(b));
    CHECK(b.num_instances() == 60);
    CHECK(b.feature_dim() == 8);
    CHECK(b.attribute_dim() == 4);
    CHECK(b.num_classes() == 6);
    CHECK(b.split.seen_classes.size() == 4);
    CHECK(b.split.test_unseen_idx.size() == 20);
  }

  TEST_CASE("save and load round trip") {
    const auto dir = testing::scratch_dir("bundle");
    DatasetBundle b = testing::make_fixture(2);
    const auto manifest = save_bundle(b, dir, "fx");
    const DatasetBundle back = load_manifest(manifest);
    CHECK(back.features == b.features);
    CHECK(back.attributes == b.attributes);
    CHECK(back.labels == b.labels);
    CHECK(back.split == b.split);
    CHECK(back.class_names == b.class_names);
    CHECK(back.backbone_tag == "fixnet");
    CHECK(back.manifest_hash.size() == 16);
    CHECK(load_manifest(manifest).manifest_hash == back.manifest_hash);
  }

  TEST_CASE("class in both seen and unseen is rejected") {
    DatasetBundle b = testing::make_fixture(3);
    b.split.unseen_classes.push_back(b.split.seen_classes.front());
    CHECK_THROWS_AS(validate(b), DataError);
  }

  TEST_CASE("split disjointness and membership are enforced") {
    SUBCASE("unseen-class instance in train") {
      DatasetBundle b = testing::make_fixture(3);
      b.split.train_idx.push_back(b.split.test_unseen_idx.front());
      CHECK_THROWS_AS(validate(b), DataError);
    }
    SUBCASE("seen-class instance in test_unseen") {
      DatasetBundle b = testing::make_fixture(3);
      b.split.test_unseen_idx.push_back(b.split.train_idx.front());
      CHECK_THROWS_AS(validate(b), DataError);
    }
    SUBCASE("train instance also in test_seen") {
      DatasetBundle b = testing::make_fixture(3);
      b.split.test_seen_idx.push_back(b.split.train_idx.front());
      CHECK_THROWS_AS(validate(b), DataError);
    }
    SUBCASE("val instance also in test_seen") {
      DatasetBundle b = testing::make_fixture(3);
      b.split.val_idx.push_back(b.split.test_seen_idx.front());
      CHECK_THROWS_AS(validate(b), DataError);
    }
    SUBCASE("val inside train is allowed") {
      DatasetBundle b = testing::make_fixture(3);
      b.split.val_idx.push_back(b.split.train_idx.front());
      CHECK_NOTHROW(validate(b));
    }
    SUBCASE("duplicate index") {
      DatasetBundle b = testing::make_fixture(3);
      b.split.train_idx.push_back(b.split.train_idx.front());
      CHECK_THROWS_AS(validate(b), DataError);
    }
    SUBCASE("index out of range") {
      DatasetBundle b = testing::make_fixture(3);
      b.split.test_seen_idx.push_back(1000);
      CHECK_THROWS_AS(validate(b), DataError);
    }
    SUBCASE("class id out of range") {
      DatasetBundle b = testing::make_fixture(3);
      b.split.unseen_classes.push_back(99);
      CHECK_THROWS_AS(validate(b), DataError);
    }
    SUBCASE("label count mismatch") {
      DatasetBundle b = testing::make_fixture(3);
      b.labels.pop_back();
      CHECK_THROWS_AS(validate(b), DataError);
    }
  }

  TEST_CASE("manifest errors are data errors") {
    const auto dir = testing::scratch_dir("badmanifest");
    const auto manifest = save_bundle(testing::make_fixture(4), dir, "fx");
    SUBCASE("missing manifest") { CHECK_THROWS_AS(load_manifest(dir / "nope.json"), DataError); }
    SUBCASE("malformed JSON") {
      std::ofstream(manifest) << "{ not json";
      CHECK_THROWS_AS(load_manifest(manifest), DataError);
    }
    SUBCASE("declared dim mismatch") {
      std::ifstream in(manifest);
      auto j = nlohmann::json::parse(in);
      in.close();
      j["feature_dim"] = 9;
      std::ofstream(manifest) << j.dump();
      CHECK_THROWS_AS(load_manifest(manifest), DataError);
    }
    SUBCASE("missing array") {
      std::filesystem::remove(dir / "fx.labels.zspl");
      CHECK_THROWS_AS(load_manifest(manifest), DataError);
    }
  }

  TEST_CASE("views and class attributes") {
    const DatasetBundle b = testing::make_fixture(5);
    const SplitView v = view_split(b, SplitPart::test_unseen);
    CHECK(v.features.rows() == b.split.test_unseen_idx.size());
    for (std::size_t r = 0; r < v.labels.size(); ++r) {
      CHECK(v.labels[r] == b.labels[b.split.test_unseen_idx[r]]);
      CHECK(v.features(r, 3) == b.features(b.split.test_unseen_idx[r], 3));
    }
    CHECK_THROWS_AS(view_split(b, SplitPart::val), DataError);
    CHECK(view_split(b, SplitPart::val, true).features.rows() == 0);
    const std::vector<ClassId> cls{5, 1};
    const Matrix s = class_attributes(b, cls);
    CHECK(s(0, 2) == b.attributes(5, 2));
    CHECK(s(1, 0) == b.attributes(1, 0));
  }

  TEST_CASE("validation split holds out a per-class fraction, seeded") {
    const DatasetBundle b = testing::make_fixture(6);
    const ValidationSplit v1 = validation_split(b, 0.2, 11);
    const ValidationSplit v2 = validation_split(b, 0.2, 11);
    CHECK(v1.fit_idx == v2.fit_idx);
    CHECK(v1.val_idx == v2.val_idx);
    CHECK(v1.fit_idx.size() + v1.val_idx.size() == b.split.train_idx.size());
    CHECK(classes_present(b.labels, v1.val_idx) == b.split.seen_classes);

    DatasetBundle official = b;
    official.split.val_idx = {b.split.train_idx[0], b.split.train_idx[1]};
    const ValidationSplit v3 = validation_split(official, 0.2, 11);
    CHECK(v3.val_idx == official.split.val_idx);
    CHECK(v3.fit_idx.size() == b.split.train_idx.size() - 2);
  }
}
