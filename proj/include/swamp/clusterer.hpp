#ifndef SWAMP_CLUSTERER_HPP
#define SWAMP_CLUSTERER_HPP

// Clustering of text feature vectors (k-means, mini-batch k-means) and of
// precomputed distance matrices (agglomerative), plus silhouette scoring in
// feature space for k selection.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <map>
#include <numeric>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "swamp/error.hpp"
#include "swamp/parallel.hpp"
#include "swamp/random.hpp"
#include "swamp/tabularprep.hpp"
#include "swamp/textprep.hpp"

namespace swamp {

enum class Algorithm { KMeans, MiniBatchKMeans, Agglomerative };
enum class Linkage { Average, Complete };

inline std::string_view to_string(Algorithm a) {
  switch (a) {
    case Algorithm::KMeans: return "kmeans";
    case Algorithm::MiniBatchKMeans: return "minibatch";
    case Algorithm::Agglomerative: return "agglomerative";
  }
  return "kmeans";
}

inline Algorithm algorithm_from_string(std::string_view s) {
  if (s == "kmeans") return Algorithm::KMeans;
  if (s == "minibatch") return Algorithm::MiniBatchKMeans;
  if (s == "agglomerative") return Algorithm::Agglomerative;
  throw ConfigError("unknown algorithm '" + std::string(s) + "'");
}

inline std::string_view to_string(Linkage l) { return l == Linkage::Average ? "average" : "complete"; }

inline Linkage linkage_from_string(std::string_view s) {
  if (s == "average") return Linkage::Average;
  if (s == "complete") return Linkage::Complete;
  throw ConfigError("unknown linkage '" + std::string(s) + "'");
}

/// k dense centroid vectors stored row-major.
struct Centroids {
  std::size_t k = 0;
  std::size_t dim = 0;
  std::vector<double> values;

  std::span<double> operator[](std::size_t c) { return std::span(values).subspan(c * dim, dim); }
  std::span<const double> operator[](std::size_t c) const {
    return std::span(values).subspan(c * dim, dim);
  }
};

/// Assignment of items to labels 0..k-1. Items follow the row order of the
/// input matrix; item_ids maps them back to file ids.
struct Clustering {
  std::size_t k = 0;
  std::vector<std::size_t> assignments;
  std::vector<std::size_t> item_ids;
  Algorithm algorithm = Algorithm::KMeans;
  std::uint64_t seed = 0;
  double inertia = 0.0;  // centroid algorithms only

  Centroids centroids;                 // centroid algorithms only
  std::vector<double> inertia_trace;   // k-means: inertia after every assignment step
  std::vector<double> merge_heights;   // agglomerative: linkage distance of every merge
  std::size_t iterations = 0;
  std::size_t reseeded = 0;            // empty clusters re-seeded

  std::size_t size() const { return assignments.size(); }

  /// Item indices per label.
  std::vector<std::vector<std::size_t>> members() const {
    std::vector<std::vector<std::size_t>> out(k);
    for (std::size_t i = 0; i < assignments.size(); ++i) out[assignments[i]].push_back(i);
    return out;
  }
};

struct KMeansOptions {
  std::size_t max_iter = 300;
  double tol = 1e-6;
  unsigned threads = 1;
};

struct MiniBatchOptions {
  std::size_t batch_size = 100;
  std::size_t iterations = 100;
  unsigned threads = 1;
};

namespace detail {

inline void check_k(std::size_t k, std::size_t n) {
  if (k < 1 || k > n)
    throw ConfigError("k=" + std::to_string(k) + " out of range 1.." + std::to_string(n));
}

// Squared Euclidean distance between sparse row r and a dense centroid with
// precomputed squared norm. Split as (|c|^2 - sum_{j in row} c_j^2) +
// sum_{j in row} (x_j - c_j)^2 so identical vectors give exactly zero.
inline double sq_distance(const FeatureMatrix& m, std::size_t r, std::span<const double> c,
                          double c_sq_norm) {
  const auto row = m.row(r);
  double outside = c_sq_norm;
  double inside = 0.0;
  for (std::size_t i = 0; i < row.cols.size(); ++i) {
    const double cj = c[row.cols[i]];
    outside -= cj * cj;
    const double d = row.values[i] - cj;
    inside += d * d;
  }
  if (outside < 0.0) outside = 0.0;
  return outside + inside;
}

inline double sq_norm(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return s;
}

inline void set_centroid_to_row(const FeatureMatrix& m, std::size_t r, std::span<double> c) {
  std::fill(c.begin(), c.end(), 0.0);
  m.add_row_to(r, c);
}

// k-means++ seeding.
inline Centroids kmeans_plus_plus(const FeatureMatrix& m, std::size_t k, Rng& rng) {
  const std::size_t n = m.rows();
  Centroids cents{k, m.cols(), std::vector<double>(k * m.cols(), 0.0)};
  std::vector<char> chosen(n, 0);
  std::size_t first = static_cast<std::size_t>(rng.below(n));
  chosen[first] = 1;
  set_centroid_to_row(m, first, cents[0]);
  std::vector<double> d2(n);
  double cn = sq_norm(cents[0]);
  for (std::size_t i = 0; i < n; ++i) d2[i] = sq_distance(m, i, cents[0], cn);

  for (std::size_t c = 1; c < k; ++c) {
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) total += d2[i];
    std::size_t pick = n;
    if (total > 0.0) {
      const double target = rng.uniform() * total;
      double acc = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        if (d2[i] <= 0.0) continue;
        acc += d2[i];
        pick = i;
        if (acc > target) break;
      }
    } else {
      // Every point coincides with a centre already; take an unused point.
      std::vector<std::size_t> unused;
      for (std::size_t i = 0; i < n; ++i)
        if (!chosen[i]) unused.push_back(i);
      pick = unused[static_cast<std::size_t>(rng.below(unused.size()))];
    }
    chosen[pick] = 1;
    set_centroid_to_row(m, pick, cents[c]);
    cn = sq_norm(cents[c]);
    for (std::size_t i = 0; i < n; ++i) d2[i] = std::min(d2[i], sq_distance(m, i, cents[c], cn));
  }
  return cents;
}

// Nearest centroid for every row (ties to the lowest label).
inline void assign_all(const FeatureMatrix& m, const Centroids& cents, unsigned threads,
                       std::vector<std::size_t>& labels, std::vector<double>& dist) {
  std::vector<double> norms(cents.k);
  for (std::size_t c = 0; c < cents.k; ++c) norms[c] = sq_norm(cents[c]);
  parallel_for(m.rows(), threads, [&](std::size_t i) {
    std::size_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < cents.k; ++c) {
      const double d = sq_distance(m, i, cents[c], norms[c]);
      if (d < best_d) { best_d = d; best = c; }
    }
    labels[i] = best;
    dist[i] = best_d;
  });
}

// Gives every empty cluster the point farthest from its current centroid
// (ties to the lowest index), taken from a cluster with more than one member.
inline std::size_t reseed_empty(const FeatureMatrix& m, Centroids& cents,
                                std::vector<std::size_t>& labels, std::vector<double>& dist) {
  std::vector<std::size_t> counts(cents.k, 0);
  for (auto l : labels) ++counts[l];
  std::size_t reseeded = 0;
  for (std::size_t c = 0; c < cents.k; ++c) {
    if (counts[c] != 0) continue;
    std::size_t far = labels.size();
    double far_d = -1.0;
    for (std::size_t i = 0; i < labels.size(); ++i) {
      if (counts[labels[i]] > 1 && dist[i] > far_d) { far_d = dist[i]; far = i; }
    }
    if (far == labels.size()) break;
    --counts[labels[far]];
    labels[far] = c;
    counts[c] = 1;
    dist[far] = 0.0;
    set_centroid_to_row(m, far, cents[c]);
    ++reseeded;
  }
  return reseeded;
}

inline double sum_in_order(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s;
}

}  // namespace detail

/// Lloyd's algorithm with k-means++ seeding on the rows of `matrix`.
///
/// Stops when the largest centroid move is below `tol` or after `max_iter`
/// iterations; the returned labels come from a final assignment against the
/// final centroids. Deterministic for a given (matrix, k, seed) regardless of
/// the thread count.
inline Clustering kmeans(const FeatureMatrix& matrix, std::size_t k, std::uint64_t seed,
                         const KMeansOptions& options = {}) {
  const std::size_t n = matrix.rows();
  detail::check_k(k, n);
  Rng rng(seed);
  Clustering out;
  out.k = k;
  out.algorithm = Algorithm::KMeans;
  out.seed = seed;
  out.item_ids = matrix.row_file_ids();
  out.centroids = detail::kmeans_plus_plus(matrix, k, rng);
  auto& cents = out.centroids;
  const std::size_t dim = matrix.cols();

  std::vector<std::size_t> labels(n);
  std::vector<double> dist(n);
  std::vector<double> next(k * dim);
  std::vector<std::size_t> counts(k);

  for (std::size_t iter = 0; iter < options.max_iter; ++iter) {
    detail::assign_all(matrix, cents, options.threads, labels, dist);
    out.reseeded += detail::reseed_empty(matrix, cents, labels, dist);
    out.inertia_trace.push_back(detail::sum_in_order(dist));
    ++out.iterations;

    std::fill(next.begin(), next.end(), 0.0);
    std::fill(counts.begin(), counts.end(), 0);
    for (std::size_t i = 0; i < n; ++i) {
      matrix.add_row_to(i, std::span(next).subspan(labels[i] * dim, dim));
      ++counts[labels[i]];
    }
    double shift = 0.0;
    for (std::size_t c = 0; c < k; ++c) {
      auto dst = cents[c];
      if (counts[c] == 0) continue;
      const double inv = 1.0 / static_cast<double>(counts[c]);
      double moved = 0.0;
      for (std::size_t j = 0; j < dim; ++j) {
        const double v = next[c * dim + j] * inv;
        const double d = v - dst[j];
        moved += d * d;
        dst[j] = v;
      }
      shift = std::max(shift, std::sqrt(moved));
    }
    if (shift < options.tol) break;
  }

  detail::assign_all(matrix, cents, options.threads, labels, dist);
  out.reseeded += detail::reseed_empty(matrix, cents, labels, dist);
  out.inertia = detail::sum_in_order(dist);
  out.inertia_trace.push_back(out.inertia);
  out.assignments = std::move(labels);
  return out;
}

/// Mini-batch k-means: k-means++ seeding, then per-point centroid updates with
/// learning rate 1/(points assigned to that centroid so far). A batch of at
/// least n rows uses every row in index order. Ends with a full assignment.
inline Clustering minibatch_kmeans(const FeatureMatrix& matrix, std::size_t k, std::uint64_t seed,
                                   const MiniBatchOptions& options = {}) {
  const std::size_t n = matrix.rows();
  detail::check_k(k, n);
  if (options.batch_size < 1) throw ConfigError("batch_size must be at least 1");
  Rng rng(seed);
  Clustering out;
  out.k = k;
  out.algorithm = Algorithm::MiniBatchKMeans;
  out.seed = seed;
  out.item_ids = matrix.row_file_ids();
  out.centroids = detail::kmeans_plus_plus(matrix, k, rng);
  auto& cents = out.centroids;

  std::vector<std::size_t> seen(k, 0);
  std::vector<std::size_t> batch;
  std::vector<std::size_t> batch_labels;
  std::vector<double> norms(k);
  for (std::size_t it = 0; it < options.iterations; ++it) {
    if (options.batch_size >= n) {
      batch.resize(n);
      std::iota(batch.begin(), batch.end(), std::size_t{0});
    } else {
      batch = rng.sample(n, options.batch_size);
      std::sort(batch.begin(), batch.end());
    }
    for (std::size_t c = 0; c < k; ++c) norms[c] = detail::sq_norm(cents[c]);
    batch_labels.assign(batch.size(), 0);
    parallel_for(batch.size(), options.threads, [&](std::size_t b) {
      double best_d = std::numeric_limits<double>::infinity();
      for (std::size_t c = 0; c < k; ++c) {
        const double d = detail::sq_distance(matrix, batch[b], cents[c], norms[c]);
        if (d < best_d) { best_d = d; batch_labels[b] = c; }
      }
    });
    for (std::size_t b = 0; b < batch.size(); ++b) {
      const std::size_t c = batch_labels[b];
      ++seen[c];
      const double eta = 1.0 / static_cast<double>(seen[c]);
      auto cv = cents[c];
      for (auto& v : cv) v *= (1.0 - eta);
      matrix.add_row_to(batch[b], cv, eta);
    }
    ++out.iterations;
  }

  std::vector<std::size_t> labels(n);
  std::vector<double> dist(n);
  detail::assign_all(matrix, cents, options.threads, labels, dist);
  out.reseeded = detail::reseed_empty(matrix, cents, labels, dist);
  out.inertia = detail::sum_in_order(dist);
  out.inertia_trace.push_back(out.inertia);
  out.assignments = std::move(labels);
  return out;
}

/// Bottom-up merging on a precomputed distance matrix until k clusters remain.
///
/// Cluster distances are updated with the Lance-Williams rule for the chosen
/// linkage. Among equal merge distances the pair with the smallest (i, j)
/// representative indices merges first. Labels are numbered by the smallest
/// item index in each cluster.
inline Clustering agglomerative(const DistanceMatrix& dist, std::size_t k,
                                Linkage linkage = Linkage::Average) {
  const std::size_t n = dist.size();
  detail::check_k(k, n);
  Clustering out;
  out.k = k;
  out.algorithm = Algorithm::Agglomerative;
  out.item_ids = dist.item_ids();

  std::vector<double> d(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) d[i * n + j] = d[j * n + i] = dist(i, j);

  constexpr std::size_t none = std::numeric_limits<std::size_t>::max();
  std::vector<char> active(n, 1);
  std::vector<std::size_t> size(n, 1), parent(n);
  std::iota(parent.begin(), parent.end(), std::size_t{0});
  std::vector<std::size_t> nn(n, none);
  std::vector<double> nn_d(n, std::numeric_limits<double>::infinity());

  // Nearest active neighbour of i among larger indices, smallest index on ties.
  auto refresh = [&](std::size_t i) {
    nn[i] = none;
    nn_d[i] = std::numeric_limits<double>::infinity();
    for (std::size_t j = i + 1; j < n; ++j) {
      if (active[j] && d[i * n + j] < nn_d[i]) { nn_d[i] = d[i * n + j]; nn[i] = j; }
    }
  };
  for (std::size_t i = 0; i < n; ++i) refresh(i);

  for (std::size_t remaining = n; remaining > k; --remaining) {
    std::size_t a = none;
    for (std::size_t i = 0; i < n; ++i) {
      if (active[i] && nn[i] != none && (a == none || nn_d[i] < nn_d[a])) a = i;
    }
    const std::size_t b = nn[a];
    out.merge_heights.push_back(nn_d[a]);

    const double sa = static_cast<double>(size[a]), sb = static_cast<double>(size[b]);
    for (std::size_t m = 0; m < n; ++m) {
      if (!active[m] || m == a || m == b) continue;
      const double dam = d[a * n + m], dbm = d[b * n + m];
      const double merged =
          linkage == Linkage::Average ? (sa * dam + sb * dbm) / (sa + sb) : std::max(dam, dbm);
      d[a * n + m] = d[m * n + a] = merged;
    }
    active[b] = 0;
    size[a] += size[b];
    parent[b] = a;

    for (std::size_t r = 0; r < n; ++r) {
      if (!active[r]) continue;
      if (r == a || nn[r] == a || nn[r] == b) {
        refresh(r);
      } else if (r < a) {
        const double v = d[r * n + a];
        if (v < nn_d[r] || (v == nn_d[r] && a < nn[r])) { nn_d[r] = v; nn[r] = a; }
      }
    }
  }

  auto root = [&](std::size_t i) {
    while (parent[i] != i) i = parent[i];
    return i;
  };
  std::vector<std::size_t> label_of_root(n, none);
  std::size_t next_label = 0;
  out.assignments.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t r = root(i);
    if (label_of_root[r] == none) label_of_root[r] = next_label++;
    out.assignments[i] = label_of_root[r];
  }
  return out;
}

namespace detail {

// Mean silhouette given an item distance function. Singletons and items with
// a = b = 0 contribute 0; clusters with no members are ignored.
template <typename DistFn>
double silhouette(std::size_t n, const Clustering& clustering, unsigned threads, DistFn&& distance) {
  const std::size_t k = clustering.k;
  const auto& labels = clustering.assignments;
  std::vector<std::size_t> counts(k, 0);
  for (auto l : labels) ++counts[l];
  std::vector<double> s(n, 0.0);
  parallel_for(n, threads, [&](std::size_t i) {
    const std::size_t own = labels[i];
    if (counts[own] <= 1) return;
    std::vector<double> sums(k, 0.0);
    for (std::size_t j = 0; j < n; ++j) {
      if (j != i) sums[labels[j]] += distance(i, j);
    }
    const double a = sums[own] / static_cast<double>(counts[own] - 1);
    double b = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < k; ++c) {
      if (c == own || counts[c] == 0) continue;
      b = std::min(b, sums[c] / static_cast<double>(counts[c]));
    }
    if (!std::isfinite(b)) return;
    const double denom = std::max(a, b);
    s[i] = denom > 0.0 ? (b - a) / denom : 0.0;
  });
  return sum_in_order(s) / static_cast<double>(n);
}

inline void check_silhouette(const Clustering& clustering, std::size_t n) {
  if (clustering.k < 2) throw ConfigError("silhouette undefined for k < 2");
  if (n < 2) throw ConfigError("silhouette undefined for fewer than 2 items");
  if (clustering.assignments.size() != n) throw ConfigError("clustering does not match items");
}

}  // namespace detail

/// Mean silhouette with Euclidean distance between feature rows.
inline double feature_silhouette(const FeatureMatrix& items, const Clustering& clustering,
                                 unsigned threads = 1) {
  detail::check_silhouette(clustering, items.rows());
  return detail::silhouette(items.rows(), clustering, threads,
                            [&](std::size_t i, std::size_t j) { return items.euclidean(i, j); });
}

/// Mean silhouette using the precomputed distances.
inline double feature_silhouette(const DistanceMatrix& items, const Clustering& clustering,
                                 unsigned threads = 1) {
  detail::check_silhouette(clustering, items.size());
  return detail::silhouette(items.size(), clustering, threads,
                            [&](std::size_t i, std::size_t j) { return items(i, j); });
}

/// Adjusted Rand index between two labelings of the same items. Identical
/// partitions score 1 even in the degenerate cases where the index is 0/0.
inline double adjusted_rand_index(std::span<const std::size_t> a, std::span<const std::size_t> b) {
  if (a.size() != b.size()) throw ConfigError("labelings differ in length");
  const std::size_t n = a.size();
  auto comb2 = [](double x) { return x * (x - 1.0) / 2.0; };
  std::map<std::pair<std::size_t, std::size_t>, double> joint;
  std::map<std::size_t, double> ra, rb;
  for (std::size_t i = 0; i < n; ++i) {
    joint[{a[i], b[i]}] += 1.0;
    ra[a[i]] += 1.0;
    rb[b[i]] += 1.0;
  }
  double index = 0.0, sa = 0.0, sb = 0.0;
  for (const auto& [key, c] : joint) index += comb2(c);
  for (const auto& [key, c] : ra) sa += comb2(c);
  for (const auto& [key, c] : rb) sb += comb2(c);
  const double total = comb2(static_cast<double>(n));
  const double expected = total > 0.0 ? sa * sb / total : 0.0;
  const double max_index = 0.5 * (sa + sb);
  if (max_index == expected) return index == max_index ? 1.0 : 0.0;
  return (index - expected) / (max_index - expected);
}

}  // namespace swamp

#endif  // SWAMP_CLUSTERER_HPP
