#include <gtest/gtest.h>

#include <sstream>

#include "swamp/random.hpp"
#include "swamp/tabularprep.hpp"

namespace swamp {
namespace {

using Set = std::set<std::string>;

Schema schema(std::size_t id, Set cols) { return Schema{id, std::move(cols)}; }

TEST(ExtractSchema, NormalizesNames) {
  Table t;
  t.header = {" ID", "Name", "name "};
  EXPECT_EQ(extract_schema(t, 0).columns, (Set{"id", "name"}));
  EXPECT_EQ(normalize_column("\tMixed Case  "), "mixed case");
}

TEST(ExtractSchema, EmptyHeaderIsPerFileError) {
  Table t;
  EXPECT_THROW(extract_schema(t, 3), FileError);
  t.header = {"", "  "};
  EXPECT_THROW(extract_schema(t, 3), FileError);
}

TEST(Jaccard, Examples) {
  EXPECT_NEAR(jaccard_distance(Set{"a", "b"}, Set{"b", "c"}), 2.0 / 3.0, 1e-12);
  EXPECT_EQ(jaccard_distance(Set{"x"}, Set{"x"}), 0.0);
  EXPECT_EQ(jaccard_distance(Set{"x"}, Set{"y"}), 1.0);
}

TEST(DistanceMatrix, SmallExample) {
  const auto dm = build_distance_matrix({schema(0, {"a"}), schema(1, {"a"}), schema(2, {"b"})});
  EXPECT_EQ(dm.size(), 3u);
  EXPECT_EQ(dm(0, 1), 0.0);
  EXPECT_EQ(dm(0, 2), 1.0);
  EXPECT_EQ(dm(1, 2), 1.0);
  EXPECT_EQ(dm(2, 0), 1.0);
  EXPECT_EQ(dm(1, 1), 0.0);
}

TEST(DistanceMatrix, OrderedByFileId) {
  const auto dm = build_distance_matrix({schema(9, {"a"}), schema(4, {"b"})});
  EXPECT_EQ(dm.item_ids(), (std::vector<std::size_t>{4, 9}));
}

TEST(DistanceMatrix, TooFewTables) {
  EXPECT_THROW(build_distance_matrix({schema(0, {"a"})}), InsufficientDataError);
  EXPECT_THROW(build_distance_matrix({}), InsufficientDataError);
}

TEST(DistanceMatrix, SizeWarning) {
  std::vector<std::string> warnings;
  DistanceMatrixOptions opt;
  opt.size_warning = 2;
  opt.warn = [&](const std::string& w) { warnings.push_back(w); };
  build_distance_matrix({schema(0, {"a"}), schema(1, {"b"}), schema(2, {"c"})}, opt);
  EXPECT_EQ(warnings.size(), 1u);
}

TEST(DistanceMatrix, ThreadCountDoesNotMatter) {
  Rng rng(3);
  std::vector<Schema> schemas;
  for (std::size_t i = 0; i < 60; ++i) {
    Set s;
    for (int c = 0; c < 4; ++c) s.insert("c" + std::to_string(rng.below(8)));
    schemas.push_back(schema(i, s));
  }
  DistanceMatrixOptions one, many;
  many.threads = 8;
  const auto a = build_distance_matrix(schemas, one), b = build_distance_matrix(schemas, many);
  EXPECT_EQ(a.stored(), b.stored());
}

TEST(DistanceMatrix, CsvExport) {
  std::ostringstream os;
  write_distance_csv(os, build_distance_matrix({schema(0, {"a", "b"}), schema(5, {"b"})}));
  EXPECT_EQ(os.str(), "0,5\n0.000000,0.500000\n0.500000,0.000000\n");
}

Set random_set(Rng& rng, std::size_t universe) {
  Set s;
  const auto size = 1 + rng.below(universe);
  for (std::uint64_t i = 0; i < size; ++i) s.insert("t" + std::to_string(rng.below(universe)));
  return s;
}

TEST(Jaccard, MetricProperties) {
  Rng rng(2024);
  for (int trial = 0; trial < 10000; ++trial) {
    const auto universe = 1 + rng.below(10);
    const auto a = random_set(rng, universe), b = random_set(rng, universe), c = random_set(rng, universe);
    const double ab = jaccard_distance(a, b), ba = jaccard_distance(b, a);
    EXPECT_EQ(jaccard_distance(a, a), 0.0);
    EXPECT_EQ(ab, ba);
    EXPECT_GE(ab, 0.0);
    EXPECT_LE(ab, 1.0);
    EXPECT_EQ(ab == 0.0, a == b);
    EXPECT_LE(ab, jaccard_distance(a, c) + jaccard_distance(c, b) + 1e-12);
  }
}

}  // namespace
}  // namespace swamp
