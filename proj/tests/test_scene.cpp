// Copyright 2026 The hilo-sg Authors
// SPDX-License-Identifier: Apache-2.0
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "hilo/error.hpp"
#include "hilo/scene.hpp"
#include "oracles.hpp"

namespace hilo {
namespace {

Dataset one_scene() {
  Dataset d;
  d.object_class_names = {"person", "table"};
  d.relation_class_names = {"on", "beside", "over"};
  SceneGraph s;
  s.scene_id = "a";
  s.height = 2;
  s.width = 3;
  s.objects.push_back({BinaryMask::rectangle(2, 3, 0, 0, 1, 2), 0});
  s.objects.push_back({BinaryMask::rectangle(2, 3, 1, 1, 1, 2), 1});
  s.triplets.push_back({0, 1, 2});
  d.scenes.push_back(s);
  return d;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

TEST(Dataset, EmptyScenesRoundTrip) {
  Dataset d = one_scene();
  d.scenes.clear();
  const auto path = oracle::temp_path("empty.json");
  save_dataset(d, path);
  EXPECT_NE(slurp(path).find("\"scenes\":[]"), std::string::npos);
  const auto back = load_dataset(path);
  EXPECT_TRUE(back.scenes.empty());
  EXPECT_EQ(back, d);
}

TEST(Dataset, SaveLoadIsByteIdentical) {
  const auto d = one_scene();
  const auto p1 = oracle::temp_path("one1.json");
  const auto p2 = oracle::temp_path("one2.json");
  save_dataset(d, p1);
  const auto back = load_dataset(p1);
  EXPECT_EQ(back, d);
  save_dataset(back, p2);
  EXPECT_EQ(slurp(p1), slurp(p2));
  EXPECT_EQ(slurp(p1).back(), '\n');
}

TEST(Dataset, CanonicalFormHasSortedKeys) {
  const auto text = canonical_dump(to_json(one_scene()));
  EXPECT_LT(text.find("\"object_class_names\""), text.find("\"relation_class_names\""));
  EXPECT_LT(text.find("\"relation_class_names\""), text.find("\"scenes\""));
  EXPECT_LT(text.find("\"class_id\""), text.find("\"rle\""));
}

TEST(Dataset, RandomRoundTrips) {
  oracle::Rng rng(3);
  for (int i = 0; i < 20; ++i) {
    const auto d = oracle::random_dataset(rng, 5, 4, 5, 5, 6);
    const auto path = oracle::temp_path("rand.json");
    save_dataset(d, path);
    EXPECT_EQ(load_dataset(path), d);
  }
}

TEST(Dataset, SelfRelationIsRejectedWithSceneName) {
  auto d = one_scene();
  d.scenes[0].triplets.push_back({1, 1, 0});
  try {
    validate(d);
    FAIL() << "expected an error";
  } catch (const Error& e) {
    const std::string what = e.what();
    EXPECT_NE(what.find("scene 'a'"), std::string::npos) << what;
    EXPECT_NE(what.find("triplets[1]"), std::string::npos) << what;
  }
  const auto path = oracle::temp_path("bad.json");
  write_text_file(path, canonical_dump(to_json(d)));
  EXPECT_THROW(load_dataset(path), Error);
}

TEST(Dataset, InvariantViolations) {
  auto bad_class = one_scene();
  bad_class.scenes[0].objects[0].class_id = 2;
  EXPECT_THROW(validate(bad_class), Error);

  auto bad_rel = one_scene();
  bad_rel.scenes[0].triplets[0].relation_id = 3;
  EXPECT_THROW(validate(bad_rel), Error);

  auto bad_idx = one_scene();
  bad_idx.scenes[0].triplets[0].object_idx = 5;
  EXPECT_THROW(validate(bad_idx), Error);

  auto dup_names = one_scene();
  dup_names.relation_class_names = {"on", "on", "over"};
  EXPECT_THROW(validate(dup_names), Error);

  auto no_names = one_scene();
  no_names.object_class_names.clear();
  EXPECT_THROW(validate(no_names), Error);

  auto dup_scene = one_scene();
  dup_scene.scenes.push_back(dup_scene.scenes[0]);
  EXPECT_THROW(validate(dup_scene), Error);

  auto bad_dims = one_scene();
  bad_dims.scenes[0].objects[1].mask = BinaryMask::empty(3, 3);
  EXPECT_THROW(validate(bad_dims), Error);
}

TEST(Dataset, ParseErrorsCarryLocation) {
  const auto path = oracle::temp_path("broken.json");
  write_text_file(path, "{\n  \"scenes\": [\n    oops\n]}");
  try {
    load_dataset(path);
    FAIL() << "expected a parse error";
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos) << e.what();
  }
  write_text_file(path, R"({"object_class_names":["a"],"relation_class_names":["r"],"scenes":[{"scene_id":"x","height":1,"width":1,"objects":[],"triplets":[{"subject_idx":0}]}]})");
  try {
    load_dataset(path);
    FAIL() << "expected a field error";
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("object_idx"), std::string::npos) << e.what();
  }
}

TEST(Dataset, IoErrors) {
  EXPECT_THROW(load_dataset("/nonexistent/dir/file.json"), IoError);
  EXPECT_THROW(save_dataset(one_scene(), "/nonexistent/dir/file.json"), IoError);
}

TEST(FrequencyTable, DirectCount) {
  auto d = one_scene();
  d.scenes[0].triplets = {{0, 1, 0}, {1, 0, 0}, {0, 1, 2}};
  EXPECT_EQ(compute_frequency_table(d).counts, (std::vector<std::int64_t>{2, 0, 1}));
  d.scenes.clear();
  EXPECT_EQ(compute_frequency_table(d).counts, (std::vector<std::int64_t>{0, 0, 0}));
}

TEST(FrequencyTable, DescendingOrderBreaksTiesByIdRandomScans) {
  RelationFrequencyTable t{{3, 5, 3, 0, 5}};
  EXPECT_EQ(t.descending_order(), (std::vector<std::int64_t>{1, 4, 0, 2, 3}));

  oracle::Rng rng(5);
  for (int i = 0; i < 50; ++i) {
    const auto d = oracle::random_dataset(rng, 6, 3, 4, 3, 3);
    std::vector<std::int64_t> brute(4, 0);
    std::int64_t total = 0;
    for (const auto& s : d.scenes) {
      for (const auto& tr : s.triplets) {
        for (std::int64_t r = 0; r < 4; ++r) brute[static_cast<std::size_t>(r)] += tr.relation_id == r;
        ++total;
      }
    }
    const auto table = compute_frequency_table(d);
    EXPECT_EQ(table.counts, brute);
    EXPECT_EQ(std::accumulate(table.counts.begin(), table.counts.end(), std::int64_t{0}), total);
  }
}

TEST(Dataset, MultiRelationFraction) {
  auto d = one_scene();
  d.scenes[0].triplets = {{0, 1, 0}, {0, 1, 2}, {1, 0, 1}};
  EXPECT_DOUBLE_EQ(multi_relation_pair_fraction(d), 0.5);
}

}  // namespace
}  // namespace hilo
