// swamp: command-line front end for the repository cleanliness pipeline.
//
// Exit codes: 0 success, 1 fatal configuration or I/O error, 2 partial result
// (one modality had nothing to cluster).

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "swamp/swamp.hpp"

namespace {

template <typename T>
std::vector<T> parse_list(const std::string& csv, const char* what) {
  std::vector<T> out;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    try {
      std::size_t used = 0;
      const long long v = std::stoll(item, &used);
      if (used != item.size() || v < 0) throw std::invalid_argument(item);
      out.push_back(static_cast<T>(v));
    } catch (const std::exception&) {
      throw swamp::ConfigError(std::string("invalid ") + what + " value '" + item + "'");
    }
  }
  if (out.empty()) throw swamp::ConfigError(std::string("empty ") + what + " list");
  return out;
}

void print_modality(const std::optional<swamp::SweepResult>& r, const char* name) {
  if (!r) {
    std::printf("%-8s skipped\n", name);
    return;
  }
  const auto& rep = r->chosen_report;
  std::printf("%-8s items=%zu k=%zu S=%.3f cohesion=%.3f tree_silhouette=%s\n", name, r->items, r->chosen_k,
              rep.S, rep.cohesion,
              rep.tree_silhouette ? swamp::format_number(*rep.tree_silhouette, 3).c_str() : "n/a");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Measure how well file content clusters line up with directory structure"};
  app.require_subcommand(1);

  // crawl
  auto* crawl_cmd = app.add_subcommand("crawl", "Write a JSON manifest of a repository");
  std::string crawl_root, crawl_out;
  bool crawl_follow = false;
  crawl_cmd->add_option("--root", crawl_root, "Repository root")->required();
  crawl_cmd->add_option("--out", crawl_out, "Manifest output path")->required();
  crawl_cmd->add_flag("--follow-symlinks", crawl_follow, "Follow symbolic links");

  // analyze
  auto* analyze_cmd = app.add_subcommand("analyze", "Cluster a repository and score its cleanliness");
  swamp::PipelineConfig pc;
  std::string analyze_root, analyze_out, algorithm = "kmeans", linkage = "average";
  bool no_stopwords = false;
  analyze_cmd->add_option("--root", analyze_root, "Repository root")->required();
  analyze_cmd->add_option("--k-min", pc.k_min, "Smallest k to try")->required();
  analyze_cmd->add_option("--k-max", pc.k_max, "Largest k to try")->required();
  analyze_cmd->add_option("--seed", pc.seed, "Random seed")->required();
  analyze_cmd->add_option("--algorithm", algorithm, "Text clustering: kmeans|minibatch")
      ->check(CLI::IsMember({"kmeans", "minibatch"}));
  analyze_cmd->add_option("--linkage", linkage, "Tabular linkage: average|complete")
      ->check(CLI::IsMember({"average", "complete"}));
  analyze_cmd->add_flag("--no-stopwords", no_stopwords, "Keep English stopwords");
  analyze_cmd->add_option("--out", analyze_out, "Output directory")->required();
  analyze_cmd->add_option("--threads", pc.threads, "Thread budget (SWAMP_THREADS overrides)");
  analyze_cmd->add_option("--min-df", pc.min_df, "Drop terms found in fewer documents");
  analyze_cmd->add_option("--batch-size", pc.minibatch.batch_size, "MiniBatch batch size");
  analyze_cmd->add_flag("--dump-matrices", pc.dump_matrices, "Also write the TF-IDF and Jaccard matrices");
  analyze_cmd->add_flag("--follow-symlinks", pc.follow_symlinks, "Follow symbolic links");

  // synth
  auto* synth_cmd = app.add_subcommand("synth", "Synthetic benchmark corpora");
  synth_cmd->require_subcommand(1);
  auto* gen_cmd = synth_cmd->add_subcommand("generate", "Generate an N-ary tree corpus");
  swamp::synth::SynthSpec spec;
  std::string gen_out;
  gen_cmd->add_option("--arity", spec.arity, "Children per directory")->required()->check(CLI::PositiveNumber);
  gen_cmd->add_option("--height", spec.height, "Tree height")->required()->check(CLI::PositiveNumber);
  gen_cmd->add_option("--seed", spec.seed, "Seed for leaf words")->required();
  gen_cmd->add_option("--out", gen_out, "Corpus root (must be absent or empty)")->required();

  auto* shuf_cmd = synth_cmd->add_subcommand("shuffle", "Move a percentage of files between leaves");
  std::string shuf_root, shuf_mode = "permute";
  int shuf_percent = 0;
  std::uint64_t shuf_seed = 0;
  shuf_cmd->add_option("--root", shuf_root, "Corpus root")->required();
  shuf_cmd->add_option("--percent", shuf_percent, "Percent of files to move (0-100)")->required();
  shuf_cmd->add_option("--seed", shuf_seed, "Shuffle seed")->required();
  shuf_cmd->add_option("--mode", shuf_mode, "permute|uniform")->check(CLI::IsMember({"permute", "uniform"}));

  // compare
  auto* cmp_cmd = app.add_subcommand("compare", "Score shuffled synthetic corpora over percents and seeds");
  swamp::CompareConfig cc;
  std::string percents_csv, seeds_csv, cmp_out, cmp_work, cmp_algorithm = "kmeans", cmp_linkage = "average",
                                                            cmp_mode = "permute";
  cmp_cmd->add_option("--arity", cc.arity, "Children per directory")->required()->check(CLI::PositiveNumber);
  cmp_cmd->add_option("--height", cc.height, "Tree height")->required()->check(CLI::PositiveNumber);
  cmp_cmd->add_option("--percents", percents_csv, "Comma separated percents, e.g. 0,20,40")->required();
  cmp_cmd->add_option("--seeds", seeds_csv, "Comma separated seeds")->required();
  cmp_cmd->add_option("--k-min", cc.k_min, "Smallest k")->required();
  cmp_cmd->add_option("--k-max", cc.k_max, "Largest k")->required();
  cmp_cmd->add_option("--out", cmp_out, "Output directory")->required();
  cmp_cmd->add_option("--algorithm", cmp_algorithm, "Text clustering: kmeans|minibatch")
      ->check(CLI::IsMember({"kmeans", "minibatch"}));
  cmp_cmd->add_option("--linkage", cmp_linkage, "Tabular linkage: average|complete")
      ->check(CLI::IsMember({"average", "complete"}));
  cmp_cmd->add_option("--mode", cmp_mode, "Shuffle mode: permute|uniform")
      ->check(CLI::IsMember({"permute", "uniform"}));
  cmp_cmd->add_option("--threads", cc.threads, "Thread budget (SWAMP_THREADS overrides)");
  cmp_cmd->add_option("--work-dir", cmp_work, "Where corpora are generated");
  cmp_cmd->add_flag("--keep-corpora", cc.keep_corpora, "Keep generated corpora");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    if (*crawl_cmd) {
      swamp::CrawlOptions opt;
      opt.follow_symlinks = crawl_follow;
      const auto snap = swamp::crawl(crawl_root, opt);
      for (const auto& w : snap.warnings) std::cerr << "warning: " << w << '\n';
      std::ofstream out(crawl_out, std::ios::binary | std::ios::trunc);
      if (!out) throw swamp::ConfigError("cannot write '" + crawl_out + "'");
      out << swamp::manifest_json(snap).dump(2) << '\n';
      std::printf("%zu files, %zu directories\n", snap.files.size(), snap.directory_tree.size());
      return 0;
    }
    if (*analyze_cmd) {
      pc.root = analyze_root;
      pc.out_dir = analyze_out;
      pc.text_algorithm = swamp::algorithm_from_string(algorithm);
      pc.linkage = swamp::linkage_from_string(linkage);
      pc.stopwords = !no_stopwords;
      const auto result = swamp::run_pipeline(pc);
      for (const auto& n : result.notices) std::cerr << "notice: " << n << '\n';
      print_modality(result.text, "text");
      print_modality(result.tabular, "tabular");
      return result.exit_code();
    }
    if (*synth_cmd) {
      if (*gen_cmd) {
        const auto snap = swamp::synth::generate(spec, gen_out);
        std::printf("%zu leaves, %zu files\n", spec.leaf_count(), snap.files.size());
        return 0;
      }
      if (*shuf_cmd) {
        const auto snap =
            swamp::synth::shuffle(shuf_root, shuf_percent, shuf_seed, swamp::synth::shuffle_mode_from_string(shuf_mode));
        std::printf("moved %zu of %zu files\n", swamp::synth::shuffle_count(shuf_percent, snap.files.size()),
                    snap.files.size());
        return 0;
      }
    }
    if (*cmp_cmd) {
      cc.percents = parse_list<int>(percents_csv, "percent");
      cc.seeds = parse_list<std::uint64_t>(seeds_csv, "seed");
      cc.out_dir = cmp_out;
      cc.work_dir = cmp_work;
      cc.text_algorithm = swamp::algorithm_from_string(cmp_algorithm);
      cc.linkage = swamp::linkage_from_string(cmp_linkage);
      cc.shuffle_mode = swamp::synth::shuffle_mode_from_string(cmp_mode);
      const auto result = swamp::compare_measures(cc);
      for (auto m : {swamp::Modality::Text, swamp::Modality::Tabular}) {
        std::printf("%-8s %s", std::string(swamp::to_string(m)).c_str(), result.dataset.c_str());
        for (int p : result.percents) std::printf("  %d%%=%.3f", p, result.mean_S(m, p));
        std::printf("\n");
      }
      return 0;
    }
  } catch (const swamp::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
