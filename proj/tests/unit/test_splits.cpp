#include <gtest/gtest.h>

#include <algorithm>
#include <filesystem>
#include <set>

#include "surgrec/splits.hpp"

using namespace surgrec;

TEST(Splits, PaperPartitionSizes) {
  const auto ids = numbered_ids(1622);
  const auto splits = make_splits(ids, 6, 1200, 2017);
  ASSERT_EQ(splits.size(), 6u);
  for (const auto& s : splits) {
    EXPECT_EQ(s.train.size(), 1200u);
    EXPECT_EQ(s.test.size(), 422u);
    std::set<std::string> all(s.train.begin(), s.train.end());
    for (const auto& id : s.test) EXPECT_TRUE(all.insert(id).second) << id;
    EXPECT_EQ(all.size(), 1622u);
    EXPECT_TRUE(std::is_sorted(s.train.begin(), s.train.end()));
  }
  EXPECT_NE(splits[0], splits[1]);
}

TEST(Splits, SingletonTestBoundaryAndErrors) {
  const auto ids = numbered_ids(10);
  const auto s = make_splits(ids, 2, 9, 1);
  EXPECT_EQ(s[0].test.size(), 1u);
  EXPECT_THROW(make_splits(ids, 1, 10, 1), std::invalid_argument);
  EXPECT_THROW(make_splits(ids, 1, 11, 1), std::invalid_argument);
}

TEST(Splits, DeterministicPerSeed) {
  const auto ids = numbered_ids(100);
  EXPECT_EQ(make_splits(ids, 3, 70, 5), make_splits(ids, 3, 70, 5));
  EXPECT_NE(make_splits(ids, 3, 70, 5), make_splits(ids, 3, 70, 6));
  const auto s = make_splits(ids, 2, 70, 5);
  EXPECT_EQ(split_hash(s[0]), split_hash(make_splits(ids, 2, 70, 5)[0]));
  EXPECT_NE(split_hash(s[0]), split_hash(s[1]));
}

TEST(Splits, PairwiseOverlapMatchesHypergeometricMean) {
  // Two independent 1200-of-1622 draws share 1200 * 1200 / 1622 ~ 887.8 ids.
  const auto splits = make_splits(numbered_ids(1622), 6, 1200, 2017);
  const double expected = 1200.0 * 1200.0 / 1622.0;
  for (std::size_t i = 0; i < splits.size(); ++i) {
    for (std::size_t j = i + 1; j < splits.size(); ++j) {
      std::vector<std::string> common;
      std::set_intersection(splits[i].train.begin(), splits[i].train.end(), splits[j].train.begin(),
                            splits[j].train.end(), std::back_inserter(common));
      EXPECT_NEAR(static_cast<double>(common.size()), expected, 0.05 * expected) << i << "," << j;
    }
  }
}

TEST(Splits, JsonRoundTrip) {
  const auto splits = make_splits(numbered_ids(30), 3, 20, 9);
  EXPECT_EQ(splits_from_json(splits_to_json(splits)), splits);
  const auto path = std::filesystem::temp_directory_path() / "surgrec_splits_test.json";
  save_splits(splits, path);
  EXPECT_EQ(load_splits(path), splits);
  EXPECT_THROW(splits_from_json("{\"train\": 3}"), std::exception);
}
