#ifndef SWAMP_ORCHESTRATOR_HPP
#define SWAMP_ORCHESTRATOR_HPP

// Pipeline driver: crawl -> preprocess -> cluster over a k range -> score,
// plus report writing and the shuffled-synthetic comparison harness.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "swamp/clusterer.hpp"
#include "swamp/crawler.hpp"
#include "swamp/error.hpp"
#include "swamp/parallel.hpp"
#include "swamp/scorer.hpp"
#include "swamp/synth.hpp"
#include "swamp/tabularprep.hpp"
#include "swamp/textprep.hpp"

namespace swamp {

enum class Modality { Text, Tabular };

inline std::string_view to_string(Modality m) { return m == Modality::Text ? "text" : "tabular"; }

struct PipelineConfig {
  fs::path root;
  std::size_t k_min = 2;
  std::size_t k_max = 10;
  Algorithm text_algorithm = Algorithm::KMeans;
  Linkage linkage = Linkage::Average;
  std::uint64_t seed = 0;
  bool stopwords = true;
  std::size_t min_df = 1;
  bool follow_symlinks = false;
  fs::path out_dir;  // empty: nothing is written
  bool dump_matrices = false;
  unsigned threads = 0;  // 0: SWAMP_THREADS or hardware concurrency
  KMeansOptions kmeans;
  MiniBatchOptions minibatch;

  void validate() const {
    if (k_min < 1) throw ConfigError("k-min must be at least 1");
    if (k_max < k_min) throw ConfigError("k-max must be at least k-min");
    if (text_algorithm == Algorithm::Agglomerative)
      throw ConfigError("text clustering uses kmeans or minibatch");
  }
};

struct SweepRow {
  std::size_t k = 0;
  std::optional<double> feature_silhouette;  // undefined for k = 1
  double S = 0.0;
  double cohesion = 0.0;
  std::optional<double> tree_silhouette;
};

struct SweepResult {
  Modality modality = Modality::Text;
  std::size_t items = 0;
  std::vector<SweepRow> rows;
  std::size_t chosen_k = 0;
  Clustering chosen_clustering;
  CleanlinessReport chosen_report;
};

struct PipelineResult {
  RepositorySnapshot snapshot;
  std::optional<SweepResult> text;
  std::optional<SweepResult> tabular;
  std::vector<std::string> notices;
  bool partial = false;  // a modality was skipped

  /// File-count weighted mean of the per-modality scores.
  std::optional<double> combined_S() const {
    double w = 0.0, n = 0.0;
    for (const auto* r : {&text, &tabular}) {
      if (!*r) continue;
      w += static_cast<double>((*r)->items) * (*r)->chosen_report.S;
      n += static_cast<double>((*r)->items);
    }
    if (n == 0.0) return std::nullopt;
    return w / n;
  }

  int exit_code() const { return partial ? 2 : 0; }
};

/// Index of the row with the largest feature silhouette; ties and rows
/// without a silhouette resolve to the smallest k.
inline std::size_t choose_k_index(const std::vector<SweepRow>& rows) {
  std::size_t best = 0;
  double best_score = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const double s = rows[i].feature_silhouette.value_or(-std::numeric_limits<double>::infinity());
    if (s > best_score) { best_score = s; best = i; }
  }
  return best;
}

namespace detail {

inline std::optional<TfidfResult> prepare_text(const RepositorySnapshot& snap, const PipelineConfig& cfg,
                                               unsigned threads, std::vector<std::string>& notices) {
  const auto ids = snap.ids_of(FileType::Text);
  if (ids.empty()) {
    notices.push_back("text: no text files, modality skipped");
    return std::nullopt;
  }
  TokenizerOptions topt;
  topt.remove_stopwords = cfg.stopwords;
  std::vector<std::vector<std::string>> docs(ids.size());
  std::vector<std::string> errors(ids.size());
  std::vector<char> ok(ids.size(), 0);
  parallel_for(ids.size(), threads, [&](std::size_t i) {
    try {
      docs[i] = analyze_text(read_text(snap.root, snap.file(ids[i])), topt);
      ok[i] = 1;
    } catch (const FileError& e) {
      errors[i] = e.what();
    }
  });
  std::vector<std::vector<std::string>> kept;
  std::vector<std::size_t> kept_ids;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (ok[i]) {
      kept.push_back(std::move(docs[i]));
      kept_ids.push_back(ids[i]);
    } else {
      notices.push_back("text: " + errors[i] + " (treated as other)");
    }
  }
  if (kept.empty()) {
    notices.push_back("text: no readable text files, modality skipped");
    return std::nullopt;
  }
  try {
    return build_tfidf(kept, std::move(kept_ids), TfidfOptions{cfg.min_df});
  } catch (const InsufficientDataError& e) {
    notices.push_back(std::string("text: ") + e.what() + ", modality skipped");
    return std::nullopt;
  }
}

inline std::optional<DistanceMatrix> prepare_tabular(const RepositorySnapshot& snap, unsigned threads,
                                                     std::vector<std::string>& notices) {
  const auto ids = snap.ids_of(FileType::Tabular);
  if (ids.empty()) {
    notices.push_back("tabular: no tabular files, modality skipped");
    return std::nullopt;
  }
  std::vector<std::optional<Schema>> schemas(ids.size());
  std::vector<std::string> messages(ids.size());
  parallel_for(ids.size(), threads, [&](std::size_t i) {
    try {
      const auto table = read_table(snap.root, snap.file(ids[i]));
      if (table.ragged_rows > 0)
        messages[i] = "tabular: " + snap.file(ids[i]).path + ": " + std::to_string(table.ragged_rows) +
                      " ragged rows padded or truncated";
      schemas[i] = extract_schema(table, ids[i]);
    } catch (const FileError& e) {
      messages[i] = "tabular: " + snap.file(ids[i]).path + ": " + e.what() + " (treated as other)";
    }
  });
  std::vector<Schema> kept;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (!messages[i].empty()) notices.push_back(messages[i]);
    if (schemas[i]) kept.push_back(std::move(*schemas[i]));
  }
  try {
    DistanceMatrixOptions opt;
    opt.threads = threads;
    opt.warn = [&](const std::string& w) { notices.push_back("tabular: " + w); };
    return build_distance_matrix(std::move(kept), opt);
  } catch (const InsufficientDataError& e) {
    notices.push_back(std::string("tabular: ") + e.what() + ", modality skipped");
    return std::nullopt;
  }
}

// Runs cluster(k, inner_threads) for every k in [k_min, k_max] and scores each.
template <typename ClusterFn, typename SilhouetteFn>
SweepResult sweep(Modality modality, std::size_t items, const RepositorySnapshot& snap,
                  const PipelineConfig& cfg, unsigned threads, ClusterFn&& cluster,
                  SilhouetteFn&& silhouette) {
  const std::size_t k_hi = std::min(cfg.k_max, items);
  if (cfg.k_min > k_hi)
    throw ConfigError(std::string(to_string(modality)) + ": empty k range " + std::to_string(cfg.k_min) +
                      ".." + std::to_string(cfg.k_max) + " for " + std::to_string(items) + " items");
  const std::size_t count = k_hi - cfg.k_min + 1;
  const unsigned outer = static_cast<unsigned>(std::min<std::size_t>(threads, count));
  const unsigned inner = std::max(1u, threads / std::max(1u, outer));

  std::vector<Clustering> clusterings(count);
  std::vector<SweepRow> rows(count);
  parallel_for(count, outer, [&](std::size_t i) {
    const std::size_t k = cfg.k_min + i;
    clusterings[i] = cluster(k, inner);
    SweepRow row;
    row.k = k;
    if (k >= 2 && items >= 2) row.feature_silhouette = silhouette(clusterings[i], inner);
    const auto report = cleanliness(clusterings[i], snap);
    row.S = report.S;
    row.cohesion = report.cohesion;
    row.tree_silhouette = report.tree_silhouette;
    rows[i] = row;
  });

  SweepResult out;
  out.modality = modality;
  out.items = items;
  out.rows = std::move(rows);
  const std::size_t best = choose_k_index(out.rows);
  out.chosen_k = out.rows[best].k;
  out.chosen_clustering = std::move(clusterings[best]);
  out.chosen_report = cleanliness(out.chosen_clustering, snap);
  return out;
}

}  // namespace detail

/// Preprocessed clustering inputs for both modalities.
struct PreparedInputs {
  std::optional<TfidfResult> text;
  std::optional<DistanceMatrix> tabular;
};

inline PreparedInputs prepare_inputs(const RepositorySnapshot& snap, const PipelineConfig& cfg,
                                     unsigned threads, std::vector<std::string>& notices) {
  PreparedInputs in;
  in.text = detail::prepare_text(snap, cfg, threads, notices);
  in.tabular = detail::prepare_tabular(snap, threads, notices);
  return in;
}

/// Sweeps the configured k range over an existing snapshot, for both
/// modalities. Throws InsufficientDataError if neither modality is usable.
/// When `keep` is given it receives the preprocessed matrices.
inline PipelineResult sweep_k(const RepositorySnapshot& snapshot, const PipelineConfig& cfg,
                              PreparedInputs* keep = nullptr) {
  cfg.validate();
  const unsigned threads = resolve_threads(cfg.threads);
  PipelineResult result;
  result.snapshot = snapshot;
  const auto& snap = result.snapshot;

  PreparedInputs in = prepare_inputs(snap, cfg, threads, result.notices);
  if (in.text) {
    const auto& m = in.text->matrix;
    result.text = detail::sweep(
        Modality::Text, m.rows(), snap, cfg, threads,
        [&](std::size_t k, unsigned t) {
          if (cfg.text_algorithm == Algorithm::MiniBatchKMeans) {
            auto opt = cfg.minibatch;
            opt.threads = t;
            return minibatch_kmeans(m, k, cfg.seed, opt);
          }
          auto opt = cfg.kmeans;
          opt.threads = t;
          return kmeans(m, k, cfg.seed, opt);
        },
        [&](const Clustering& c, unsigned t) { return feature_silhouette(m, c, t); });
  }
  if (in.tabular) {
    const auto& d = *in.tabular;
    result.tabular = detail::sweep(
        Modality::Tabular, d.size(), snap, cfg, threads,
        [&](std::size_t k, unsigned) {
          auto c = agglomerative(d, k, cfg.linkage);
          c.seed = cfg.seed;
          return c;
        },
        [&](const Clustering& c, unsigned t) { return feature_silhouette(d, c, t); });
  }
  if (!result.text && !result.tabular) throw InsufficientDataError("no text or tabular files to cluster");
  result.partial = !result.text || !result.tabular;
  if (keep) *keep = std::move(in);
  return result;
}

/// Crawls config.root and sweeps k.
inline PipelineResult sweep_k(const PipelineConfig& cfg) {
  cfg.validate();
  CrawlOptions opt;
  opt.follow_symlinks = cfg.follow_symlinks;
  return sweep_k(crawl(cfg.root, opt), cfg);
}

// ---- output ---------------------------------------------------------------

inline std::string format_number(double v, int precision = 6) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", precision, v);
  return buf;
}

inline std::string format_optional(const std::optional<double>& v, int precision = 6) {
  return v ? format_number(*v, precision) : std::string();
}

inline void write_sweep_csv(std::ostream& os, const SweepResult& r) {
  os << "k,feature_silhouette,S,cohesion,tree_silhouette\n";
  for (const auto& row : r.rows) {
    os << row.k << ',' << format_optional(row.feature_silhouette) << ',' << format_number(row.S) << ','
       << format_number(row.cohesion) << ',' << format_optional(row.tree_silhouette) << '\n';
  }
}

inline void write_assignments_csv(std::ostream& os, const Clustering& c) {
  os << "file_id,label\n";
  for (std::size_t i = 0; i < c.size(); ++i) os << detail::file_of(c, i) << ',' << c.assignments[i] << '\n';
}

inline nlohmann::json to_json(const SweepResult& r) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& row : r.rows) {
    rows.push_back({{"k", row.k},
                    {"feature_silhouette",
                     row.feature_silhouette ? nlohmann::json(*row.feature_silhouette) : nlohmann::json()},
                    {"S", row.S},
                    {"cohesion", row.cohesion},
                    {"tree_silhouette",
                     row.tree_silhouette ? nlohmann::json(*row.tree_silhouette) : nlohmann::json()}});
  }
  return {{"modality", std::string(to_string(r.modality))},
          {"items", r.items},
          {"chosen_k", r.chosen_k},
          {"sweep", std::move(rows)},
          {"report", to_json(r.chosen_report)}};
}

inline nlohmann::json summary_json(const PipelineResult& r, const PipelineConfig& cfg) {
  nlohmann::json j;
  j["config"] = {{"k_min", cfg.k_min},
                 {"k_max", cfg.k_max},
                 {"algorithm", std::string(to_string(cfg.text_algorithm))},
                 {"linkage", std::string(to_string(cfg.linkage))},
                 {"seed", cfg.seed},
                 {"stopwords", cfg.stopwords}};
  j["files"] = r.snapshot.files.size();
  j["text"] = r.text ? to_json(*r.text) : nlohmann::json();
  j["tabular"] = r.tabular ? to_json(*r.tabular) : nlohmann::json();
  const auto combined = r.combined_S();
  // Not part of the per-modality measure: a file-weighted mean of both.
  j["combined_S_extension"] = combined ? nlohmann::json(*combined) : nlohmann::json();
  j["notices"] = r.notices;
  return j;
}

namespace detail {

inline void write_text_file(const fs::path& p, const std::string& content) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) throw FileError(p.string(), "cannot create");
  out << content;
  if (!out) throw FileError(p.string(), "write failed");
}

template <typename Fn>
std::string render(Fn&& fn) {
  std::ostringstream os;
  fn(os);
  return os.str();
}

}  // namespace detail

/// Writes summary.json and per-modality <m>_report.json, <m>_sweep.csv and
/// <m>_assignments.csv into `out_dir`.
inline void write_outputs(const PipelineResult& r, const PipelineConfig& cfg, const fs::path& out_dir,
                          const TfidfResult* tfidf = nullptr, const DistanceMatrix* dist = nullptr) {
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw ConfigError("cannot create '" + out_dir.string() + "': " + ec.message());
  detail::write_text_file(out_dir / "summary.json", summary_json(r, cfg).dump(2) + "\n");
  for (const auto* m : {&r.text, &r.tabular}) {
    if (!*m) continue;
    const auto& s = **m;
    const std::string name(to_string(s.modality));
    detail::write_text_file(out_dir / (name + "_report.json"), to_json(s.chosen_report).dump(2) + "\n");
    detail::write_text_file(out_dir / (name + "_sweep.csv"),
                            detail::render([&](std::ostream& os) { write_sweep_csv(os, s); }));
    detail::write_text_file(out_dir / (name + "_assignments.csv"),
                            detail::render([&](std::ostream& os) { write_assignments_csv(os, s.chosen_clustering); }));
  }
  if (tfidf)
    detail::write_text_file(out_dir / "text_tfidf.csv",
                            detail::render([&](std::ostream& os) { write_triplets(os, *tfidf); }));
  if (dist)
    detail::write_text_file(out_dir / "tabular_jaccard.csv",
                            detail::render([&](std::ostream& os) { write_distance_csv(os, *dist); }));
}

/// Full pipeline; writes outputs when config.out_dir is set.
inline PipelineResult run_pipeline(const PipelineConfig& cfg) {
  cfg.validate();
  CrawlOptions opt;
  opt.follow_symlinks = cfg.follow_symlinks;
  auto snapshot = crawl(cfg.root, opt);
  PreparedInputs in;
  auto result = sweep_k(snapshot, cfg, &in);
  for (auto it = snapshot.warnings.rbegin(); it != snapshot.warnings.rend(); ++it)
    result.notices.insert(result.notices.begin(), "crawl: " + *it);
  if (!cfg.out_dir.empty()) {
    const bool dump = cfg.dump_matrices;
    write_outputs(result, cfg, cfg.out_dir, dump && in.text ? &*in.text : nullptr,
                  dump && in.tabular ? &*in.tabular : nullptr);
  }
  return result;
}

// ---- synthetic comparison -------------------------------------------------

struct CompareConfig {
  std::size_t arity = 2;
  std::size_t height = 5;
  std::vector<int> percents{0, 20, 40, 60, 80, 100};
  std::vector<std::uint64_t> seeds{0};
  std::size_t k_min = 0;  // 0: leaf count
  std::size_t k_max = 0;  // 0: leaf count
  Algorithm text_algorithm = Algorithm::KMeans;
  Linkage linkage = Linkage::Average;
  synth::ShuffleMode shuffle_mode = synth::ShuffleMode::Permute;
  unsigned threads = 0;
  fs::path out_dir;   // empty: nothing is written
  fs::path work_dir;  // corpora are generated here; defaults to a temp directory
  bool keep_corpora = false;
};

struct CompareRow {
  std::string dataset;
  Modality modality = Modality::Text;
  int percent = 0;
  std::uint64_t seed = 0;
  double S = 0.0;
  double cohesion = 0.0;
  std::optional<double> silhouette;
  std::size_t chosen_k = 0;
};

struct CompareResult {
  std::string dataset;
  std::vector<int> percents;
  std::vector<std::uint64_t> seeds;
  std::vector<CompareRow> rows;  // percent-major, then seed, then modality

  /// Rows for one modality and percent, in seed order.
  std::vector<const CompareRow*> select(Modality m, int percent) const {
    std::vector<const CompareRow*> out;
    for (const auto& r : rows)
      if (r.modality == m && r.percent == percent) out.push_back(&r);
    return out;
  }

  double mean_S(Modality m, int percent) const {
    const auto sel = select(m, percent);
    double s = 0.0;
    for (const auto* r : sel) s += r->S;
    return sel.empty() ? 0.0 : s / static_cast<double>(sel.size());
  }
};

inline void write_comparison_csv(std::ostream& os, const CompareResult& r, Modality m) {
  os << "dataset,percent,seed,S,cohesion,silhouette\n";
  for (int p : r.percents) {
    const auto sel = r.select(m, p);
    double s = 0.0, c = 0.0, sil = 0.0;
    std::size_t sil_n = 0;
    for (const auto* row : sel) {
      os << row->dataset << ',' << p << ',' << row->seed << ',' << format_number(row->S) << ','
         << format_number(row->cohesion) << ',' << format_optional(row->silhouette) << '\n';
      s += row->S;
      c += row->cohesion;
      if (row->silhouette) { sil += *row->silhouette; ++sil_n; }
    }
    if (sel.empty()) continue;
    const double n = static_cast<double>(sel.size());
    os << r.dataset << ',' << p << ",mean," << format_number(s / n) << ',' << format_number(c / n) << ','
       << (sil_n ? format_number(sil / static_cast<double>(sil_n)) : std::string()) << '\n';
  }
}

/// One row per dataset: mean S over seeds for every percent.
inline void write_table_csv(std::ostream& os, const CompareResult& r, Modality m) {
  os << "dataset";
  for (int p : r.percents) os << ',' << p << '%';
  os << '\n' << r.dataset;
  for (int p : r.percents) os << ',' << format_number(r.mean_S(m, p), 3);
  os << '\n';
}

/// For every (percent, seed): generate the synthetic corpus, shuffle it, run
/// the pipeline and record S, cohesion and tree silhouette per modality.
/// Runs fan out over the thread budget; results do not depend on it.
inline CompareResult compare_measures(const CompareConfig& cfg) {
  synth::SynthSpec base;
  base.arity = cfg.arity;
  base.height = cfg.height;
  base.validate();
  for (int p : cfg.percents)
    if (p < 0 || p > 100) throw ConfigError("percent must be within 0..100");
  if (cfg.seeds.empty()) throw ConfigError("at least one seed is required");
  const std::size_t leaves = base.leaf_count();

  fs::path work = cfg.work_dir;
  bool own_work = false;
  if (work.empty()) {
    work = fs::temp_directory_path() / ("swamp-compare-" + std::to_string(std::random_device{}()));
    own_work = true;
  }
  std::error_code ec;
  fs::create_directories(work, ec);
  if (ec) throw ConfigError("cannot create work directory '" + work.string() + "': " + ec.message());

  CompareResult result;
  result.dataset = base.label();
  result.percents = cfg.percents;
  result.seeds = cfg.seeds;

  struct Job {
    int percent;
    std::uint64_t seed;
  };
  std::vector<Job> jobs;
  for (int p : cfg.percents)
    for (auto s : cfg.seeds) jobs.push_back({p, s});

  std::vector<std::vector<CompareRow>> per_job(jobs.size());
  const unsigned threads = resolve_threads(cfg.threads);
  parallel_for(jobs.size(), threads, [&](std::size_t j) {
    const auto [percent, seed] = jobs[j];
    synth::SynthSpec spec = base;
    spec.seed = seed;
    const fs::path root = work / ("p" + std::to_string(percent) + "_s" + std::to_string(seed) + "_" +
                                  std::to_string(j));
    fs::remove_all(root);
    fs::remove(synth::manifest_path(root));
    auto snap = synth::generate(spec, root);
    if (percent > 0) snap = synth::shuffle(snap, percent, seed, cfg.shuffle_mode);

    PipelineConfig pc;
    pc.root = root;
    pc.k_min = cfg.k_min ? cfg.k_min : leaves;
    pc.k_max = cfg.k_max ? cfg.k_max : leaves;
    pc.text_algorithm = cfg.text_algorithm;
    pc.linkage = cfg.linkage;
    pc.seed = seed;
    pc.threads = 1;
    const auto res = sweep_k(snap, pc);
    for (const auto* m : {&res.text, &res.tabular}) {
      if (!*m) continue;
      const auto& rep = (*m)->chosen_report;
      per_job[j].push_back({result.dataset, (*m)->modality, percent, seed, rep.S, rep.cohesion,
                            rep.tree_silhouette, (*m)->chosen_k});
    }
    if (!cfg.keep_corpora) {
      fs::remove_all(root);
      fs::remove(synth::manifest_path(root));
    }
  });
  for (auto& rows : per_job)
    for (auto& r : rows) result.rows.push_back(std::move(r));
  if (own_work && !cfg.keep_corpora) fs::remove_all(work, ec);

  if (!cfg.out_dir.empty()) {
    fs::create_directories(cfg.out_dir, ec);
    for (auto m : {Modality::Text, Modality::Tabular}) {
      const std::string name(to_string(m));
      detail::write_text_file(cfg.out_dir / ("comparison_" + name + ".csv"),
                              detail::render([&](std::ostream& os) { write_comparison_csv(os, result, m); }));
      detail::write_text_file(cfg.out_dir / ("table_" + name + ".csv"),
                              detail::render([&](std::ostream& os) { write_table_csv(os, result, m); }));
    }
  }
  return result;
}

}  // namespace swamp

#endif  // SWAMP_ORCHESTRATOR_HPP
