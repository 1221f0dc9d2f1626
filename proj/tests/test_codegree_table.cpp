#include <gtest/gtest.h>

#include <random>

#include "nibble_forge/codegree_table.hpp"
#include "nibble_forge/errors.hpp"
#include "test_support.hpp"

using namespace nforge;

TEST(CodegreeTable, K4Counts) {
  const Hypergraph k4 = nftest::k4_3();
  const CodegreeTable t(k4, {2});
  EXPECT_TRUE(t.has_size(2));
  EXPECT_FALSE(t.has_size(1));
  EXPECT_FALSE(t.has_size(3));
  const Vertex u[] = {0, 3};
  EXPECT_EQ(t.count(u), 2u);
  EXPECT_EQ(t.max_count(2), 2u);
  const Vertex bad[] = {0, 1, 2};
  EXPECT_THROW(t.count(bad), std::invalid_argument);
}

TEST(CodegreeTable, AbsentSubsetsCountZero) {
  const Hypergraph h(6, {{0, 1, 2}, {3, 4, 5}});
  const CodegreeTable t(h, {2});
  const Vertex u[] = {0, 5};
  EXPECT_EQ(t.count(u), 0u);
}

TEST(CodegreeTable, OutOfRangeSizesIgnored) {
  const Hypergraph h(5, {{0, 1, 2, 3}, {1, 2, 3, 4}});
  const CodegreeTable t(h, {1, 2, 3, 4, 9});
  EXPECT_FALSE(t.has_size(1));
  EXPECT_TRUE(t.has_size(2));
  EXPECT_TRUE(t.has_size(3));
  EXPECT_FALSE(t.has_size(4));
  const Vertex u[] = {1, 2, 3};
  EXPECT_EQ(t.count(u), 2u);
}

TEST(CodegreeTable, RequiredEntriesAndCap) {
  const Hypergraph k4 = nftest::k4_3();
  const std::size_t sizes[] = {2};
  // Four triples, three pairs each.
  EXPECT_EQ(CodegreeTable::required_entries(k4, sizes), 12u);
  EXPECT_THROW(CodegreeTable(k4, {2}, 11), MemoryGuardError);
  EXPECT_NO_THROW(CodegreeTable(k4, {2}, 12));
}

TEST(CodegreeTable, MultiplicityCounts) {
  const Hypergraph h(4, {{0, 1, 2}, {0, 1, 2}, {0, 1, 3}});
  const CodegreeTable t(h, {2});
  const Vertex u[] = {0, 1};
  EXPECT_EQ(t.count(u), 3u);
  const Vertex w[] = {1, 2};
  EXPECT_EQ(t.count(w), 2u);
}

class TableProperties : public ::testing::TestWithParam<int> {};

TEST_P(TableProperties, EveryTabledSubsetMatchesBruteForce) {
  std::mt19937_64 rng(500 + GetParam());
  const std::size_t n = 8 + rng() % 4;
  const Hypergraph h = nftest::random_hypergraph(rng, n, 10 + rng() % 30, 2, 5, 0.2);
  const auto edges = nftest::edges_of(h);
  std::vector<std::size_t> sizes;
  for (std::size_t j = 2; j < h.uniformity_bound(); ++j) sizes.push_back(j);
  const CodegreeTable t(h, sizes);
  for (std::size_t j : sizes) {
    EXPECT_EQ(t.max_count(j), nftest::brute_max_codegree(n, edges, j));
    std::vector<bool> pick(n, false);
    std::fill(pick.begin(), pick.begin() + static_cast<long>(j), true);
    do {
      std::vector<Vertex> u;
      for (std::size_t i = 0; i < n; ++i)
        if (pick[i]) u.push_back(static_cast<Vertex>(i));
      ASSERT_EQ(t.count(u), nftest::brute_codegree(edges, u));
    } while (std::prev_permutation(pick.begin(), pick.end()));
  }
}

INSTANTIATE_TEST_SUITE_P(Random, TableProperties, ::testing::Range(0, 25));
