#include <gtest/gtest.h>

#include <cstdlib>
#include <sstream>

#include "swamp/orchestrator.hpp"
#include "test_util.hpp"

namespace swamp {
namespace {

using testing::read_file;
using testing::TempDir;
using testing::write_file;

// Two topics in two directories, with a pair of tables per directory.
void toy_corpus(const fs::path& root) {
  for (int i = 0; i < 6; ++i) {
    write_file(root / "pets" / ("p" + std::to_string(i) + ".txt"), "cat dog cat kitten puppy dog");
    write_file(root / "money" / ("m" + std::to_string(i) + ".txt"), "stock bond market price stock");
  }
  write_file(root / "pets/a.csv", "name,species,age\nrex,dog,3\n");
  write_file(root / "pets/b.csv", "Name,Species,Age,owner\nfelix,cat,2,ann\n");
  write_file(root / "money/c.csv", "ticker,price,volume\nabc,1,2\n");
  write_file(root / "money/d.csv", "ticker,price,volume,date\nxyz,3,4,2020\n");
}

PipelineConfig config(const fs::path& root, std::size_t k_min, std::size_t k_max) {
  PipelineConfig c;
  c.root = root;
  c.k_min = k_min;
  c.k_max = k_max;
  c.seed = 7;
  c.threads = 1;
  return c;
}

TEST(ChooseK, ArgmaxWithSmallestKOnTies) {
  std::vector<SweepRow> rows(4);
  for (std::size_t i = 0; i < rows.size(); ++i) rows[i].k = i + 1;
  rows[1].feature_silhouette = 0.5;
  rows[2].feature_silhouette = 0.7;
  rows[3].feature_silhouette = 0.7;
  EXPECT_EQ(rows[choose_k_index(rows)].k, 3u);
  std::vector<SweepRow> single(1);
  single[0].k = 1;
  EXPECT_EQ(choose_k_index(single), 0u);
}

TEST(Config, Validation) {
  auto c = config("/tmp", 3, 2);
  EXPECT_THROW(c.validate(), ConfigError);
  c.k_min = 0;
  c.k_max = 2;
  EXPECT_THROW(c.validate(), ConfigError);
  c.k_min = 1;
  c.text_algorithm = Algorithm::Agglomerative;
  EXPECT_THROW(c.validate(), ConfigError);
}

TEST(SweepK, SeparableToyCorpusChoosesTwo) {
  TempDir dir;
  toy_corpus(dir.path());
  const auto r = sweep_k(config(dir.path(), 2, 5));
  ASSERT_TRUE(r.text);
  EXPECT_EQ(r.text->chosen_k, 2u);
  EXPECT_EQ(r.text->rows.size(), 4u);
  EXPECT_EQ(r.text->chosen_report.S, 1.0);
  ASSERT_TRUE(r.tabular);
  EXPECT_EQ(r.tabular->rows.size(), 3u);  // k capped by the four tables
  EXPECT_EQ(r.tabular->chosen_k, 2u);
  EXPECT_EQ(r.tabular->chosen_report.S, 1.0);
  EXPECT_FALSE(r.partial);
}

TEST(SweepK, SingletonRange) {
  TempDir dir;
  toy_corpus(dir.path());
  const auto r = sweep_k(config(dir.path(), 3, 3));
  EXPECT_EQ(r.text->chosen_k, 3u);
  EXPECT_EQ(r.tabular->chosen_k, 3u);
  const auto one = sweep_k(config(dir.path(), 1, 1));
  EXPECT_EQ(one.text->chosen_k, 1u);
  EXPECT_FALSE(one.text->rows[0].feature_silhouette);
}

TEST(SweepK, EmptyEffectiveRangeIsConfigError) {
  TempDir dir;
  toy_corpus(dir.path());
  EXPECT_THROW(sweep_k(config(dir.path(), 5, 9)), ConfigError);  // only 4 tables
}

TEST(SweepK, SyntheticChoosesLeafCount) {
  TempDir dir;
  synth::SynthSpec spec;
  spec.arity = 3;
  spec.height = 3;
  spec.seed = 1;
  const auto snap = synth::generate(spec, dir / "c");
  auto cfg = config(dir / "c", 20, 40);
  cfg.threads = 4;
  const auto r = sweep_k(snap, cfg);
  EXPECT_EQ(r.text->chosen_k, 27u);
  EXPECT_EQ(r.tabular->chosen_k, 27u);
  EXPECT_EQ(r.text->chosen_report.S, 1.0);
  EXPECT_EQ(r.tabular->chosen_report.S, 1.0);
}

TEST(RunPipeline, SkippedModalityIsPartial) {
  TempDir dir;
  write_file(dir / "a/x.txt", "alpha beta");
  write_file(dir / "b/y.txt", "gamma delta");
  auto cfg = config(dir.path(), 1, 2);
  cfg.out_dir = dir / "out";
  const auto r = run_pipeline(cfg);
  EXPECT_TRUE(r.text);
  EXPECT_FALSE(r.tabular);
  EXPECT_TRUE(r.partial);
  EXPECT_EQ(r.exit_code(), 2);
  EXPECT_FALSE(r.notices.empty());
  EXPECT_TRUE(fs::exists(dir / "out/summary.json"));
  EXPECT_TRUE(fs::exists(dir / "out/text_report.json"));
  EXPECT_FALSE(fs::exists(dir / "out/tabular_report.json"));
}

TEST(RunPipeline, NothingToClusterIsFatal) {
  TempDir dir;
  write_file(dir / "image.png", "x");
  EXPECT_THROW(run_pipeline(config(dir.path(), 1, 2)), InsufficientDataError);
  EXPECT_THROW(run_pipeline(config(dir / "missing", 1, 2)), ConfigError);
}

TEST(RunPipeline, BadFilesBecomeNotices) {
  TempDir dir;
  toy_corpus(dir.path());
  write_file(dir / "pets/broken.csv", "a,\"open\n");
  write_file(dir / "pets/empty.csv", "");
  const auto r = run_pipeline(config(dir.path(), 2, 2));
  ASSERT_TRUE(r.tabular);
  EXPECT_EQ(r.tabular->items, 4u);
  std::size_t mentions = 0;
  for (const auto& n : r.notices) mentions += n.find("treated as other") != std::string::npos;
  EXPECT_EQ(mentions, 2u);
}

TEST(RunPipeline, OutputsAndRoundTrip) {
  TempDir dir;
  toy_corpus(dir.path());
  auto cfg = config(dir.path(), 2, 3);
  cfg.out_dir = dir / "out";
  cfg.dump_matrices = true;
  const auto r = run_pipeline(cfg);
  for (const char* f : {"summary.json", "text_report.json", "text_sweep.csv", "text_assignments.csv",
                        "tabular_report.json", "tabular_sweep.csv", "tabular_assignments.csv", "text_tfidf.csv",
                        "tabular_jaccard.csv"})
    EXPECT_TRUE(fs::exists(dir / "out" / f)) << f;
  const auto text_report = report_from_json(nlohmann::json::parse(read_file(dir / "out/text_report.json")));
  EXPECT_EQ(text_report, r.text->chosen_report);
  const auto sweep = read_file(dir / "out/text_sweep.csv");
  EXPECT_EQ(sweep.substr(0, sweep.find('\n')), "k,feature_silhouette,S,cohesion,tree_silhouette");
  const auto assignments = read_file(dir / "out/tabular_assignments.csv");
  EXPECT_EQ(assignments.substr(0, assignments.find('\n')), "file_id,label");
  const auto summary = nlohmann::json::parse(read_file(dir / "out/summary.json"));
  EXPECT_NEAR(summary["combined_S_extension"].get<double>(), *r.combined_S(), 1e-15);
}

TEST(RunPipeline, ThreadBudgetDoesNotChangeOutputs) {
  TempDir dir;
  synth::SynthSpec spec;
  spec.arity = 2;
  spec.height = 3;
  synth::generate(spec, dir / "c");
  synth::shuffle(dir / "c", 40, 3);
  std::string first;
  for (unsigned threads : {1u, 3u, 8u}) {
    auto cfg = config(dir / "c", 4, 10);
    cfg.threads = threads;
    cfg.out_dir = dir / ("out" + std::to_string(threads));
    run_pipeline(cfg);
    std::string all;
    for (const char* f : {"summary.json", "text_report.json", "text_sweep.csv", "tabular_report.json",
                          "tabular_sweep.csv", "tabular_assignments.csv"})
      all += read_file(cfg.out_dir / f);
    if (first.empty()) first = all;
    EXPECT_EQ(all, first) << threads << " threads";
  }
}

TEST(RunPipeline, MiniBatchAlgorithm) {
  TempDir dir;
  toy_corpus(dir.path());
  auto cfg = config(dir.path(), 2, 2);
  cfg.text_algorithm = Algorithm::MiniBatchKMeans;
  const auto r = run_pipeline(cfg);
  EXPECT_EQ(r.text->chosen_report.algorithm, Algorithm::MiniBatchKMeans);
  EXPECT_EQ(r.text->chosen_report.S, 1.0);
}

TEST(Compare, SingleZeroPercentMatchesPipeline) {
  TempDir dir;
  CompareConfig cc;
  cc.arity = 2;
  cc.height = 2;
  cc.percents = {0};
  cc.seeds = {5};
  cc.work_dir = dir / "work";
  cc.out_dir = dir / "out";
  cc.threads = 1;
  const auto res = compare_measures(cc);
  ASSERT_EQ(res.rows.size(), 2u);

  synth::SynthSpec spec;
  spec.arity = 2;
  spec.height = 2;
  spec.seed = 5;
  const auto snap = synth::generate(spec, dir / "ref");
  auto cfg = config(dir / "ref", 4, 4);
  cfg.seed = 5;
  const auto direct = sweep_k(snap, cfg);
  EXPECT_EQ(res.select(Modality::Text, 0)[0]->S, direct.text->chosen_report.S);
  EXPECT_EQ(res.select(Modality::Tabular, 0)[0]->S, direct.tabular->chosen_report.S);
  EXPECT_EQ(res.mean_S(Modality::Text, 0), 1.0);
}

TEST(Compare, TwoSeedsGiveRowsPlusMean) {
  TempDir dir;
  CompareConfig cc;
  cc.arity = 2;
  cc.height = 2;
  cc.percents = {0, 50};
  cc.seeds = {1, 2};
  cc.work_dir = dir / "work";
  cc.out_dir = dir / "out";
  const auto res = compare_measures(cc);
  EXPECT_EQ(res.rows.size(), 8u);
  std::istringstream in(read_file(dir / "out/comparison_text.csv"));
  std::string line;
  std::vector<std::string> lines;
  while (std::getline(in, line)) lines.push_back(line);
  ASSERT_EQ(lines.size(), 1u + 2u * 3u);
  EXPECT_EQ(lines[0], "dataset,percent,seed,S,cohesion,silhouette");
  EXPECT_EQ(lines[3].rfind("2-ary 2-height,0,mean,", 0), 0u);
  const auto table = read_file(dir / "out/table_text.csv");
  EXPECT_EQ(table.substr(0, table.find('\n')), "dataset,0%,50%");
  EXPECT_FALSE(fs::exists(dir / "work/p0_s1_0"));
}

TEST(Compare, InvalidPercent) {
  CompareConfig cc;
  cc.percents = {120};
  EXPECT_THROW(compare_measures(cc), ConfigError);
}

TEST(Format, Numbers) {
  EXPECT_EQ(format_number(1.0), "1.000000");
  EXPECT_EQ(format_number(0.80649, 3), "0.806");
  EXPECT_EQ(format_optional(std::nullopt), "");
}

}  // namespace
}  // namespace swamp
