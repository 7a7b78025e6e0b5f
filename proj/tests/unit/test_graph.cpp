#include <algorithm>
#include <numeric>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "otgk/error.hpp"
#include "otgk/graph.hpp"
#include "test_util.hpp"

using otgk::Graph;

TEST(Adjacency, SingleEdge) {
  Eigen::MatrixXd expected(2, 2);
  expected << 0, 1, 1, 0;
  EXPECT_EQ(otgk::adjacency(Graph(2, {{0, 1}})), expected);
}

TEST(Adjacency, NoEdgesIsZero) {
  EXPECT_EQ(otgk::adjacency(Graph(3, {})), Eigen::MatrixXd::Zero(3, 3));
}

TEST(Adjacency, TriangleIsAllOnesOffDiagonal) {
  const Eigen::MatrixXd a = otgk::adjacency(testutil::complete_graph(3));
  EXPECT_EQ(a, Eigen::MatrixXd::Ones(3, 3) - Eigen::MatrixXd::Identity(3, 3));
}

TEST(Graph, EdgesAreNormalizedAndSorted) {
  const Graph g(4, {{3, 1}, {2, 0}, {1, 0}});
  const std::vector<otgk::Edge> expected = {{0, 1}, {0, 2}, {1, 3}};
  EXPECT_EQ(g.edges(), expected);
  EXPECT_TRUE(g.has_edge(3, 1));
  EXPECT_FALSE(g.has_edge(2, 3));
  EXPECT_EQ(g.neighbors()[0], (std::vector<int>{1, 2}));
}

TEST(Graph, RejectsInvalidEdges) {
  EXPECT_THROW(Graph(2, {{0, 2}}), otgk::ContractViolation);
  EXPECT_THROW(Graph(2, {{1, 1}}), otgk::ContractViolation);
  EXPECT_THROW(Graph(2, {{0, 1}, {1, 0}}), otgk::ContractViolation);
  EXPECT_THROW(Graph(2, {}, std::vector<int>{1}), otgk::ContractViolation);
}

TEST(Graph, FromRawEdgesDropsNoise) {
  std::size_t dropped = 0;
  const Graph g = Graph::from_raw_edges(3, {{0, 1}, {1, 0}, {2, 2}, {0, 1}},
                                        std::nullopt, &dropped);
  EXPECT_EQ(g.num_edges(), 1u);
  EXPECT_EQ(dropped, 3u);
}

TEST(Graph, InducedSubgraphKeepsOrder) {
  const Graph g = testutil::path_graph(4);
  const Graph sub = g.induced_subgraph({2, 1, 3});
  EXPECT_EQ(sub.num_nodes(), 3);
  EXPECT_TRUE(sub.has_edge(0, 1));
  EXPECT_TRUE(sub.has_edge(0, 2));
  EXPECT_FALSE(sub.has_edge(1, 2));
}

TEST(Graph, PermutedRelabelsNodes) {
  const Graph g(3, {{0, 1}});
  const Graph p = g.permuted({2, 0, 1});
  EXPECT_TRUE(p.has_edge(2, 0));
  EXPECT_EQ(p.num_edges(), 1u);
}

TEST(Graph, FingerprintSeparatesGraphs) {
  EXPECT_EQ(testutil::path_graph(4).fingerprint(), testutil::path_graph(4).fingerprint());
  EXPECT_NE(testutil::path_graph(4).fingerprint(), testutil::cycle_graph(4).fingerprint());
}

TEST(GraphDataset, ValidatesSizes) {
  otgk::GraphDataset ds;
  ds.graphs.push_back(testutil::path_graph(2));
  EXPECT_THROW(ds.validate(), otgk::ContractViolation);
  ds.class_labels = {3};
  EXPECT_NO_THROW(ds.validate());
  ds.graphs.push_back(testutil::path_graph(3));
  ds.class_labels.push_back(1);
  EXPECT_EQ(ds.distinct_labels(), (std::vector<int>{1, 3}));
}

TEST(ShortestPaths, PathGraph) {
  const auto d = otgk::shortest_path_distances(testutil::path_graph(3));
  EXPECT_EQ(d[0][2], 2);
  EXPECT_EQ(d[2][0], 2);
  EXPECT_EQ(d[1][1], 0);
}

TEST(ShortestPaths, DisconnectedPairIsUnreachable) {
  const auto d = otgk::shortest_path_distances(Graph(3, {{0, 1}}));
  EXPECT_EQ(d[0][2], otgk::kUnreachable);
  EXPECT_EQ(d[2][1], otgk::kUnreachable);
}

TEST(ShortestPaths, FourCycle) {
  const auto d = otgk::shortest_path_distances(testutil::cycle_graph(4));
  EXPECT_EQ(d[0][2], 2);
  EXPECT_EQ(d[1][3], 2);
  EXPECT_EQ(d[0][3], 1);
}

TEST(ShortestPaths, MatchesFloydWarshall) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 1 + static_cast<int>(rng() % 12);
    const Graph g = testutil::random_graph(rng, n, 0.25);
    const auto bfs = otgk::shortest_path_distances(g);
    const auto fw = oracle::floyd_warshall(g);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        const int expected = fw[i][j] < 0 ? otgk::kUnreachable : fw[i][j];
        ASSERT_EQ(bfs[i][j], expected) << "trial " << trial;
      }
    }
  }
}

TEST(CanonicalLabeling, IsAPermutationAndRelabelInvariant) {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 1 + static_cast<int>(rng() % 12);
    const Graph g = testutil::random_graph(rng, n, 0.1 + 0.1 * static_cast<double>(rng() % 8));
    const auto canon = otgk::canonical_labeling(g);
    std::vector<int> sorted = canon;
    std::sort(sorted.begin(), sorted.end());
    std::vector<int> identity(n);
    std::iota(identity.begin(), identity.end(), 0);
    ASSERT_EQ(sorted, identity);
    const Graph h = g.permuted(testutil::random_permutation(rng, n));
    EXPECT_EQ(g.permuted(canon), h.permuted(otgk::canonical_labeling(h))) << "trial " << trial;
  }
}

TEST(CanonicalLabeling, SymmetricFamilies) {
  std::mt19937_64 rng(37);
  for (int n = 2; n <= 14; ++n) {
    std::vector<otgk::Edge> star;
    for (int v = 1; v < n; ++v) star.emplace_back(0, v);
    for (const Graph& g : {testutil::complete_graph(n), Graph(n, {}), Graph(n, star),
                           testutil::cycle_graph(std::max(n, 3))}) {
      const Graph h = g.permuted(testutil::random_permutation(rng, g.num_nodes()));
      EXPECT_EQ(g.permuted(otgk::canonical_labeling(g)),
                h.permuted(otgk::canonical_labeling(h)));
    }
  }
}

TEST(CanonicalLabeling, SeparatesExactlyTheIsomorphismClasses) {
  std::mt19937_64 rng(41);
  for (int trial = 0; trial < 300; ++trial) {
    const int n = 2 + static_cast<int>(rng() % 5);
    const Graph a = testutil::random_graph(rng, n, 0.5);
    const Graph b = testutil::random_graph(rng, n, 0.5);
    const bool same = a.permuted(otgk::canonical_labeling(a)) ==
                      b.permuted(otgk::canonical_labeling(b));
    EXPECT_EQ(same, oracle::isomorphic(a, b)) << "trial " << trial;
  }
}
