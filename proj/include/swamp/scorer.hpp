#ifndef SWAMP_SCORER_HPP
#define SWAMP_SCORER_HPP

// Frequency-drop cleanliness score and the tree-distance baselines
// (cohesion and silhouette).
//
// For a cluster whose files span m directories with per-directory counts
// c_1 >= ... >= c_m, the head is the prefix ending at the largest drop
// c_i - c_{i+1} (with c_{m+1} = 0, ties to the smallest i). The drop score is
//
//   drop = 1                                         if m = 1
//   drop = (1 - sigma(m - 1, |head|)) * mass(head) / |cluster|   otherwise
//
// clamped to [0, 1], where sigma(a, b) = log_a(b) for a > 1 and 0 for a = 1.
// The overall score is the size-weighted mean of the cluster drop scores.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "swamp/clusterer.hpp"
#include "swamp/crawler.hpp"
#include "swamp/error.hpp"

namespace swamp {

/// Files of one cluster counted per directory, largest count first and ties
/// by directory path.
struct DirectoryHistogram {
  std::size_t cluster_id = 0;
  std::vector<std::pair<std::string, std::size_t>> entries;

  std::size_t total() const {
    std::size_t s = 0;
    for (const auto& e : entries) s += e.second;
    return s;
  }

  bool operator==(const DirectoryHistogram&) const = default;
};

inline void sort_histogram(DirectoryHistogram& h) {
  std::sort(h.entries.begin(), h.entries.end(), [](const auto& x, const auto& y) {
    if (x.second != y.second) return x.second > y.second;
    return x.first < y.first;
  });
}

/// Histogram over the given file ids. `file_ids` must be nonempty.
inline DirectoryHistogram directory_histogram(std::span<const std::size_t> file_ids,
                                              const RepositorySnapshot& snapshot,
                                              std::size_t cluster_id = 0) {
  if (file_ids.empty()) throw ConfigError("directory histogram of an empty cluster");
  std::map<std::string, std::size_t> counts;
  for (auto id : file_ids) ++counts[snapshot.file(id).directory];
  DirectoryHistogram h{cluster_id, {counts.begin(), counts.end()}};
  sort_histogram(h);
  return h;
}

/// Histogram from bare counts; directories are named "d0", "d1", ... in input
/// order. Handy for tests and oracles.
inline DirectoryHistogram histogram_from_counts(std::span<const std::size_t> counts) {
  DirectoryHistogram h;
  for (std::size_t i = 0; i < counts.size(); ++i) h.entries.emplace_back("d" + std::to_string(i), counts[i]);
  sort_histogram(h);
  return h;
}

struct DropSplit {
  std::size_t head_size = 0;
  std::size_t m = 0;
  std::size_t gap = 0;  // c_i - c_{i+1} at the chosen position
  std::vector<std::pair<std::string, std::size_t>> head;
  std::vector<std::pair<std::string, std::size_t>> tail;

  std::size_t head_mass() const {
    std::size_t s = 0;
    for (const auto& e : head) s += e.second;
    return s;
  }
};

/// Splits a sorted histogram at its largest frequency drop.
inline DropSplit find_frequency_drop(const DirectoryHistogram& histogram) {
  const auto& e = histogram.entries;
  if (e.empty()) throw ConfigError("frequency drop of an empty histogram");
  DropSplit split;
  split.m = e.size();
  std::size_t best_gap = 0, best_i = 0;
  for (std::size_t i = 0; i < e.size(); ++i) {
    const std::size_t next = i + 1 < e.size() ? e[i + 1].second : 0;
    const std::size_t gap = e[i].second >= next ? e[i].second - next : 0;
    if (i == 0 || gap > best_gap) { best_gap = gap; best_i = i; }
  }
  split.head_size = best_i + 1;
  split.gap = best_gap;
  split.head.assign(e.begin(), e.begin() + static_cast<std::ptrdiff_t>(split.head_size));
  split.tail.assign(e.begin() + static_cast<std::ptrdiff_t>(split.head_size), e.end());
  return split;
}

/// log base a of b for a > 1, and 0 for a = 1. Both arguments must be >= 1.
inline double sigma(std::size_t a, std::size_t b) {
  if (a == 0 || b == 0) throw ConfigError("sigma is defined for positive integers only");
  if (a == 1) return 0.0;
  return std::log(static_cast<double>(b)) / std::log(static_cast<double>(a));
}

struct DropResult {
  double score = 1.0;  // clamped to [0, 1]
  double raw = 1.0;
  bool clamped = false;
  DropSplit split;
};

inline DropResult evaluate_drop(const DirectoryHistogram& histogram) {
  DropResult r;
  r.split = find_frequency_drop(histogram);
  if (r.split.m == 1) return r;
  const double mass = static_cast<double>(r.split.head_mass()) / static_cast<double>(histogram.total());
  r.raw = (1.0 - sigma(r.split.m - 1, r.split.head_size)) * mass;
  r.score = std::clamp(r.raw, 0.0, 1.0);
  r.clamped = r.score != r.raw;
  return r;
}

inline double drop_score(const DirectoryHistogram& histogram) { return evaluate_drop(histogram).score; }

inline double drop_score(std::span<const std::size_t> file_ids, const RepositorySnapshot& snapshot) {
  return drop_score(directory_histogram(file_ids, snapshot));
}

struct ClusterScore {
  std::size_t id = 0;
  std::size_t size = 0;
  DirectoryHistogram histogram;
  std::size_t head_size = 0;
  double drop = 0.0;
  bool clamped = false;

  bool operator==(const ClusterScore&) const = default;
};

struct CleanlinessReport {
  std::size_t k = 0;
  Algorithm algorithm = Algorithm::KMeans;
  std::uint64_t seed = 0;
  std::vector<ClusterScore> clusters;  // nonempty clusters only
  double S = 0.0;
  double cohesion = 1.0;
  std::optional<double> tree_silhouette;  // undefined for k < 2

  std::size_t total_files() const {
    std::size_t s = 0;
    for (const auto& c : clusters) s += c.size;
    return s;
  }

  bool operator==(const CleanlinessReport&) const = default;
};

namespace detail {

inline std::size_t file_of(const Clustering& c, std::size_t item) {
  return c.item_ids.empty() ? item : c.item_ids[item];
}

// Directory node per item plus the distinct nodes used and their pairwise
// tree distances.
struct DirectoryLayout {
  std::vector<std::size_t> item_slot;      // item -> index into nodes
  std::vector<std::size_t> nodes;          // distinct directory nodes
  std::vector<std::size_t> dist;           // nodes x nodes tree distances

  std::size_t d(std::size_t u, std::size_t v) const { return dist[u * nodes.size() + v]; }
};

inline DirectoryLayout layout_of(const Clustering& clustering, const RepositorySnapshot& snapshot) {
  DirectoryLayout lay;
  const auto& tree = snapshot.directory_tree;
  std::map<std::size_t, std::size_t> slot;
  lay.item_slot.resize(clustering.size());
  for (std::size_t i = 0; i < clustering.size(); ++i) {
    const std::size_t node = tree.at(snapshot.file(file_of(clustering, i)).directory);
    auto [it, inserted] = slot.emplace(node, lay.nodes.size());
    if (inserted) lay.nodes.push_back(node);
    lay.item_slot[i] = it->second;
  }
  const std::size_t u = lay.nodes.size();
  lay.dist.resize(u * u);
  for (std::size_t a = 0; a < u; ++a)
    for (std::size_t b = 0; b < u; ++b) lay.dist[a * u + b] = tree.distance(lay.nodes[a], lay.nodes[b]);
  return lay;
}

// counts[c][slot] = files of cluster c in directory slot.
inline std::vector<std::vector<std::size_t>> cluster_slot_counts(const Clustering& clustering,
                                                                 const DirectoryLayout& lay) {
  std::vector<std::vector<std::size_t>> counts(clustering.k, std::vector<std::size_t>(lay.nodes.size(), 0));
  for (std::size_t i = 0; i < clustering.size(); ++i) ++counts[clustering.assignments[i]][lay.item_slot[i]];
  return counts;
}

}  // namespace detail

/// Edge count of the tree path between two directories of the snapshot.
inline std::size_t tree_distance(const std::string& dir_a, const std::string& dir_b,
                                 const RepositorySnapshot& snapshot) {
  const auto& tree = snapshot.directory_tree;
  return tree.distance(tree.at(dir_a), tree.at(dir_b));
}

/// Silhouette where the distance between two files is the tree distance
/// between their directories. Requires k >= 2.
inline double tree_silhouette(const Clustering& clustering, const RepositorySnapshot& snapshot) {
  if (clustering.k < 2) throw ConfigError("tree silhouette undefined for k < 2");
  if (clustering.size() == 0) throw ConfigError("tree silhouette of an empty clustering");
  const auto lay = detail::layout_of(clustering, snapshot);
  const auto counts = detail::cluster_slot_counts(clustering, lay);
  const std::size_t k = clustering.k, u = lay.nodes.size();
  std::vector<std::size_t> sizes(k, 0);
  for (auto l : clustering.assignments) ++sizes[l];

  // Every file of the same cluster and directory has the same silhouette.
  double total = 0.0;
  for (std::size_t own = 0; own < k; ++own) {
    if (sizes[own] <= 1) continue;
    for (std::size_t s = 0; s < u; ++s) {
      if (counts[own][s] == 0) continue;
      std::vector<double> sums(k, 0.0);
      for (std::size_t c = 0; c < k; ++c)
        for (std::size_t v = 0; v < u; ++v)
          sums[c] += static_cast<double>(counts[c][v] * lay.d(s, v));
      const double a = sums[own] / static_cast<double>(sizes[own] - 1);
      double b = std::numeric_limits<double>::infinity();
      for (std::size_t c = 0; c < k; ++c)
        if (c != own && sizes[c] > 0) b = std::min(b, sums[c] / static_cast<double>(sizes[c]));
      if (!std::isfinite(b)) continue;
      const double denom = std::max(a, b);
      const double value = denom > 0.0 ? (b - a) / denom : 0.0;
      total += value * static_cast<double>(counts[own][s]);
    }
  }
  return total / static_cast<double>(clustering.size());
}

/// 1 - (size-weighted mean intra-cluster tree distance) / (tree diameter).
/// Singleton clusters have intra-distance 0; a zero diameter gives 1.
inline double tree_cohesion(const Clustering& clustering, const RepositorySnapshot& snapshot) {
  if (clustering.size() == 0) throw ConfigError("tree cohesion of an empty clustering");
  const std::size_t diameter = snapshot.directory_tree.diameter();
  if (diameter == 0) return 1.0;
  const auto lay = detail::layout_of(clustering, snapshot);
  const auto counts = detail::cluster_slot_counts(clustering, lay);
  const std::size_t u = lay.nodes.size();
  double weighted = 0.0;
  for (std::size_t c = 0; c < clustering.k; ++c) {
    std::size_t size = 0;
    double pair_sum = 0.0;
    for (std::size_t s = 0; s < u; ++s) {
      size += counts[c][s];
      for (std::size_t v = s + 1; v < u; ++v)
        pair_sum += static_cast<double>(counts[c][s] * counts[c][v] * lay.d(s, v));
    }
    if (size < 2) continue;
    const double pairs = static_cast<double>(size) * static_cast<double>(size - 1) / 2.0;
    weighted += static_cast<double>(size) * (pair_sum / pairs);
  }
  const double mean = weighted / static_cast<double>(clustering.size());
  return 1.0 - mean / static_cast<double>(diameter);
}

/// Scores every nonempty cluster and the clustering as a whole.
inline CleanlinessReport cleanliness(const Clustering& clustering, const RepositorySnapshot& snapshot) {
  if (clustering.size() == 0) throw ConfigError("cleanliness of an empty clustering");
  CleanlinessReport report;
  report.k = clustering.k;
  report.algorithm = clustering.algorithm;
  report.seed = clustering.seed;

  std::vector<std::vector<std::size_t>> files(clustering.k);
  for (std::size_t i = 0; i < clustering.size(); ++i)
    files[clustering.assignments[i]].push_back(detail::file_of(clustering, i));

  double weighted = 0.0;
  for (std::size_t c = 0; c < clustering.k; ++c) {
    if (files[c].empty()) continue;
    ClusterScore cs;
    cs.id = c;
    cs.size = files[c].size();
    cs.histogram = directory_histogram(files[c], snapshot, c);
    const auto drop = evaluate_drop(cs.histogram);
    cs.head_size = drop.split.head_size;
    cs.drop = drop.score;
    cs.clamped = drop.clamped;
    weighted += static_cast<double>(cs.size) * cs.drop;
    report.clusters.push_back(std::move(cs));
  }
  report.S = weighted / static_cast<double>(clustering.size());
  report.cohesion = tree_cohesion(clustering, snapshot);
  if (clustering.k >= 2) report.tree_silhouette = tree_silhouette(clustering, snapshot);
  return report;
}

inline nlohmann::json to_json(const CleanlinessReport& r) {
  nlohmann::json clusters = nlohmann::json::array();
  for (const auto& c : r.clusters) {
    nlohmann::json hist = nlohmann::json::array();
    for (const auto& [dir, count] : c.histogram.entries) hist.push_back(nlohmann::json::array({dir, count}));
    clusters.push_back({{"id", c.id},
                        {"size", c.size},
                        {"histogram", std::move(hist)},
                        {"head_size", c.head_size},
                        {"drop", c.drop},
                        {"clamped", c.clamped}});
  }
  return nlohmann::json{{"k", r.k},
                        {"algorithm", std::string(to_string(r.algorithm))},
                        {"seed", r.seed},
                        {"clusters", std::move(clusters)},
                        {"S", r.S},
                        {"cohesion", r.cohesion},
                        {"tree_silhouette", r.tree_silhouette ? nlohmann::json(*r.tree_silhouette)
                                                              : nlohmann::json(nullptr)}};
}

inline CleanlinessReport report_from_json(const nlohmann::json& j) {
  CleanlinessReport r;
  r.k = j.at("k").get<std::size_t>();
  r.algorithm = algorithm_from_string(j.at("algorithm").get<std::string>());
  r.seed = j.at("seed").get<std::uint64_t>();
  for (const auto& jc : j.at("clusters")) {
    ClusterScore c;
    c.id = jc.at("id").get<std::size_t>();
    c.size = jc.at("size").get<std::size_t>();
    c.histogram.cluster_id = c.id;
    for (const auto& e : jc.at("histogram"))
      c.histogram.entries.emplace_back(e.at(0).get<std::string>(), e.at(1).get<std::size_t>());
    c.head_size = jc.at("head_size").get<std::size_t>();
    c.drop = jc.at("drop").get<double>();
    c.clamped = jc.value("clamped", false);
    r.clusters.push_back(std::move(c));
  }
  r.S = j.at("S").get<double>();
  r.cohesion = j.at("cohesion").get<double>();
  if (const auto& ts = j.at("tree_silhouette"); !ts.is_null()) r.tree_silhouette = ts.get<double>();
  return r;
}

}  // namespace swamp

#endif  // SWAMP_SCORER_HPP
