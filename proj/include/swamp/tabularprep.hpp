#ifndef SWAMP_TABULARPREP_HPP
#define SWAMP_TABULARPREP_HPP

// Schema extraction from tabular files and pairwise Jaccard distances.

#include <algorithm>
#include <cctype>
#include <cstddef>
#include <cstdio>
#include <functional>
#include <ostream>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "swamp/crawler.hpp"
#include "swamp/error.hpp"
#include "swamp/parallel.hpp"

namespace swamp {

/// Set of normalized column names of one tabular file.
struct Schema {
  std::size_t file_id = 0;
  std::set<std::string> columns;

  bool operator==(const Schema&) const = default;
};

/// Trims ASCII whitespace and lowercases.
inline std::string normalize_column(std::string_view name) {
  auto is_space = [](char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; };
  while (!name.empty() && is_space(name.front())) name.remove_prefix(1);
  while (!name.empty() && is_space(name.back())) name.remove_suffix(1);
  std::string out(name);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

/// Normalized header names of `table`; empty names are dropped. Throws
/// FileError ("schemaless table") if nothing remains.
inline Schema extract_schema(const Table& table, std::size_t file_id) {
  Schema schema{file_id, {}};
  for (const auto& name : table.header) {
    auto n = normalize_column(name);
    if (!n.empty()) schema.columns.insert(std::move(n));
  }
  if (schema.columns.empty())
    throw FileError("file " + std::to_string(file_id), "schemaless table");
  return schema;
}

/// 1 - |a ∩ b| / |a ∪ b| over column sets. Two empty sets have distance 0.
inline double jaccard_distance(const std::set<std::string>& a, const std::set<std::string>& b) {
  std::size_t common = 0;
  auto ia = a.begin();
  auto ib = b.begin();
  while (ia != a.end() && ib != b.end()) {
    if (*ia < *ib) ++ia;
    else if (*ib < *ia) ++ib;
    else { ++common; ++ia; ++ib; }
  }
  const std::size_t uni = a.size() + b.size() - common;
  if (uni == 0) return 0.0;
  return 1.0 - static_cast<double>(common) / static_cast<double>(uni);
}

inline double jaccard_distance(const Schema& a, const Schema& b) {
  return jaccard_distance(a.columns, b.columns);
}

/// Symmetric distance matrix with zero diagonal. Only the strict upper
/// triangle is stored.
class DistanceMatrix {
 public:
  DistanceMatrix() = default;
  explicit DistanceMatrix(std::vector<std::size_t> item_ids)
      : n_(item_ids.size()), item_ids_(std::move(item_ids)), upper_(n_ * (n_ ? n_ - 1 : 0) / 2, 0.0) {}

  std::size_t size() const { return n_; }
  const std::vector<std::size_t>& item_ids() const { return item_ids_; }

  double operator()(std::size_t i, std::size_t j) const {
    if (i == j) return 0.0;
    return upper_[index(i, j)];
  }

  void set(std::size_t i, std::size_t j, double v) {
    if (i == j) return;
    upper_[index(i, j)] = v;
  }

  /// Number of independent entries, n(n-1)/2.
  std::size_t stored() const { return upper_.size(); }

 private:
  std::size_t index(std::size_t i, std::size_t j) const {
    if (i > j) std::swap(i, j);
    // row-major strict upper triangle
    return i * n_ - i * (i + 1) / 2 + (j - i - 1);
  }

  std::size_t n_ = 0;
  std::vector<std::size_t> item_ids_;
  std::vector<double> upper_;
};

struct DistanceMatrixOptions {
  unsigned threads = 1;
  std::size_t size_warning = 20000;
  std::function<void(const std::string&)> warn;
};

/// Pairwise Jaccard distances between schemas, items ordered by file id.
/// Requires at least two schemas.
inline DistanceMatrix build_distance_matrix(std::vector<Schema> schemas,
                                            const DistanceMatrixOptions& options = {}) {
  if (schemas.size() < 2) throw InsufficientDataError("not enough tabular files");
  std::sort(schemas.begin(), schemas.end(),
            [](const Schema& a, const Schema& b) { return a.file_id < b.file_id; });
  if (schemas.size() > options.size_warning && options.warn)
    options.warn("distance matrix over " + std::to_string(schemas.size()) +
                 " tabular files; memory and time grow quadratically");
  std::vector<std::size_t> ids;
  ids.reserve(schemas.size());
  for (const auto& s : schemas) ids.push_back(s.file_id);
  DistanceMatrix dm(std::move(ids));
  const std::size_t n = schemas.size();
  parallel_for(n, options.threads, [&](std::size_t i) {
    for (std::size_t j = i + 1; j < n; ++j) dm.set(i, j, jaccard_distance(schemas[i], schemas[j]));
  });
  return dm;
}

/// Square CSV dump. The header row lists item ids; each following row holds
/// one row of the matrix.
inline void write_distance_csv(std::ostream& os, const DistanceMatrix& dm) {
  const auto& ids = dm.item_ids();
  for (std::size_t i = 0; i < ids.size(); ++i) os << (i ? "," : "") << ids[i];
  os << '\n';
  char buf[32];
  for (std::size_t i = 0; i < dm.size(); ++i) {
    for (std::size_t j = 0; j < dm.size(); ++j) {
      std::snprintf(buf, sizeof buf, "%.6f", dm(i, j));
      os << (j ? "," : "") << buf;
    }
    os << '\n';
  }
}

}  // namespace swamp

#endif  // SWAMP_TABULARPREP_HPP
