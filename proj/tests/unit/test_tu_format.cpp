#include <fstream>

#include <gtest/gtest.h>

#include "otgk/error.hpp"
#include "otgk/tu_format.hpp"
#include "test_util.hpp"

namespace fs = std::filesystem;

namespace {

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  out << text;
}

// Minimal dataset "T": graph 1 = nodes 1,2 joined, graph 2 = node 3.
fs::path minimal_dataset(const std::string& edges) {
  const fs::path dir = testutil::temp_dir("tu");
  write_file(dir / "T_A.txt", edges);
  write_file(dir / "T_graph_indicator.txt", "1\n1\n2\n");
  write_file(dir / "T_graph_labels.txt", "1\n-1\n");
  return dir;
}

}  // namespace

TEST(ParseTu, MinimalDataset) {
  const auto ds = otgk::parse_tu_dataset(minimal_dataset("1, 2\n2, 1\n"), "T");
  ASSERT_EQ(ds.size(), 2u);
  EXPECT_EQ(ds.graphs[0].num_nodes(), 2);
  EXPECT_EQ(ds.graphs[0].num_edges(), 1u);
  EXPECT_EQ(ds.graphs[1].num_nodes(), 1);
  EXPECT_EQ(ds.graphs[1].num_edges(), 0u);
  EXPECT_EQ(ds.class_labels, (std::vector<int>{1, -1}));
  EXPECT_EQ(ds.name, "T");
}

TEST(ParseTu, MissingFileIsNamed) {
  const fs::path dir = minimal_dataset("1, 2\n");
  fs::remove(dir / "T_graph_labels.txt");
  try {
    otgk::parse_tu_dataset(dir, "T");
    FAIL() << "expected ParseError";
  } catch (const otgk::ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("T_graph_labels.txt"), std::string::npos);
  }
}

TEST(ParseTu, OutOfRangeNodeReportsLine) {
  const fs::path dir = minimal_dataset("1, 2\n2, 1\n1, 99\n");
  try {
    otgk::parse_tu_dataset(dir, "T");
    FAIL() << "expected ParseError";
  } catch (const otgk::ParseError& e) {
    EXPECT_EQ(e.line(), 3);
    EXPECT_NE(e.file().find("T_A.txt"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find(":3:"), std::string::npos);
  }
}

TEST(ParseTu, NonIntegerTokenReportsLine) {
  const fs::path dir = minimal_dataset("1, 2\n2, x\n");
  try {
    otgk::parse_tu_dataset(dir, "T");
    FAIL() << "expected ParseError";
  } catch (const otgk::ParseError& e) {
    EXPECT_EQ(e.line(), 2);
  }
}

TEST(ParseTu, SelfLoopsAndRepeatsDroppedWithWarning) {
  std::vector<std::string> warnings;
  const auto ds = otgk::parse_tu_dataset(
      minimal_dataset("1, 2\n2, 1\n1, 1\n1, 2\n"), "T", &warnings);
  EXPECT_EQ(ds.graphs[0].num_edges(), 1u);
  EXPECT_EQ(warnings.size(), 2u);
}

TEST(ParseTu, LabelCountMismatchFails) {
  const fs::path dir = minimal_dataset("1, 2\n");
  write_file(dir / "T_graph_labels.txt", "1\n");
  EXPECT_THROW(otgk::parse_tu_dataset(dir, "T"), otgk::ParseError);
}

TEST(ParseTu, RoundTripRandomDatasets) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 10; ++trial) {
    auto ds = testutil::random_dataset(rng, 1 + static_cast<int>(rng() % 12), 1, 9);
    ds.name = "RT";
    if (trial % 2 == 1) {
      for (auto& g : ds.graphs) {
        std::vector<int> labels(g.num_nodes());
        for (int& l : labels) l = static_cast<int>(rng() % 4);
        g = otgk::Graph(g.num_nodes(), g.edges(), labels);
      }
    }
    const fs::path dir = testutil::temp_dir("roundtrip");
    otgk::write_tu_dataset(ds, dir);
    const auto back = otgk::parse_tu_dataset(dir, "RT");
    ASSERT_EQ(back.size(), ds.size());
    EXPECT_EQ(back.class_labels, ds.class_labels);
    for (std::size_t g = 0; g < ds.size(); ++g) EXPECT_EQ(back.graphs[g], ds.graphs[g]);
    EXPECT_EQ(back.content_hash(), ds.content_hash());
  }
}

TEST(ParseTu, Mutag) {
  const auto ds = otgk::parse_tu_dataset(testutil::data_dir() / "MUTAG", "MUTAG");
  EXPECT_EQ(ds.size(), 188u);
  EXPECT_EQ(ds.distinct_labels().size(), 2u);
  std::size_t nodes = 0;
  for (const auto& g : ds.graphs) nodes += g.num_nodes();
  std::ifstream indicator(testutil::data_dir() / "MUTAG" / "MUTAG_graph_indicator.txt");
  std::size_t lines = 0;
  for (std::string line; std::getline(indicator, line);) lines += !line.empty();
  EXPECT_EQ(nodes, lines);
}
