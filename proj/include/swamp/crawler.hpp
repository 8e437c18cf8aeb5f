#ifndef SWAMP_CRAWLER_HPP
#define SWAMP_CRAWLER_HPP

// Repository crawling: enumerate files, classify them by extension and read
// their content as text or as a delimited table.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <limits>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "swamp/error.hpp"

namespace swamp {

namespace fs = std::filesystem;

enum class FileType { Text, Tabular, Other };

inline std::string_view to_string(FileType t) {
  switch (t) {
    case FileType::Text: return "text";
    case FileType::Tabular: return "tabular";
    case FileType::Other: return "other";
  }
  return "other";
}

inline FileType file_type_from_string(std::string_view s) {
  if (s == "text") return FileType::Text;
  if (s == "tabular") return FileType::Tabular;
  if (s == "other") return FileType::Other;
  throw ConfigError("unknown filetype '" + std::string(s) + "'");
}

/// One crawled file. Paths are repository-relative with '/' separators; the
/// repository root directory itself is the empty string.
struct FileRecord {
  std::size_t id = 0;
  std::string path;
  std::string directory;
  FileType filetype = FileType::Other;
  std::uintmax_t size_bytes = 0;

  bool operator==(const FileRecord&) const = default;
};

/// Parent of a repository-relative path ("a/b/c.txt" -> "a/b", "c.txt" -> "").
inline std::string parent_directory(std::string_view rel) {
  const auto slash = rel.rfind('/');
  if (slash == std::string_view::npos) return {};
  return std::string(rel.substr(0, slash));
}

/// Rooted tree of repository-relative directories. Node 0 is the root ("").
class DirectoryTree {
 public:
  static constexpr std::size_t npos = std::numeric_limits<std::size_t>::max();

  struct Node {
    std::string path;
    std::size_t parent = npos;
    std::size_t depth = 0;
    std::vector<std::size_t> children;
  };

  DirectoryTree() { nodes_.push_back(Node{}); index_.emplace("", 0); }

  /// Inserts `path` and all of its ancestors; returns the node index.
  std::size_t add(const std::string& path) {
    if (auto it = index_.find(path); it != index_.end()) return it->second;
    const std::size_t parent = add(parent_directory(path));
    const std::size_t id = nodes_.size();
    nodes_.push_back(Node{path, parent, nodes_[parent].depth + 1, {}});
    nodes_[parent].children.push_back(id);
    index_.emplace(path, id);
    return id;
  }

  std::optional<std::size_t> find(const std::string& path) const {
    if (auto it = index_.find(path); it != index_.end()) return it->second;
    return std::nullopt;
  }

  std::size_t at(const std::string& path) const {
    if (auto id = find(path)) return *id;
    throw ConfigError("unknown directory '" + path + "'");
  }

  bool contains(const std::string& path) const { return index_.count(path) != 0; }
  std::size_t size() const { return nodes_.size(); }
  const Node& node(std::size_t id) const { return nodes_.at(id); }
  const std::vector<Node>& nodes() const { return nodes_; }

  /// Number of edges on the tree path between two nodes.
  std::size_t distance(std::size_t a, std::size_t b) const {
    std::size_t steps = 0;
    while (nodes_[a].depth > nodes_[b].depth) { a = nodes_[a].parent; ++steps; }
    while (nodes_[b].depth > nodes_[a].depth) { b = nodes_[b].parent; ++steps; }
    while (a != b) {
      a = nodes_[a].parent;
      b = nodes_[b].parent;
      steps += 2;
    }
    return steps;
  }

  /// Longest path (in edges) between any two nodes.
  std::size_t diameter() const {
    // Height of every subtree, computed children-first. Children always have
    // larger indices than their parent.
    std::vector<std::size_t> height(nodes_.size(), 0);
    std::size_t best = 0;
    for (std::size_t i = nodes_.size(); i-- > 0;) {
      std::size_t first = 0, second = 0;
      for (std::size_t c : nodes_[i].children) {
        const std::size_t h = height[c] + 1;
        if (h > first) { second = first; first = h; }
        else if (h > second) { second = h; }
      }
      height[i] = first;
      best = std::max(best, first + second);
    }
    return best;
  }

 private:
  std::vector<Node> nodes_;
  std::unordered_map<std::string, std::size_t> index_;
};

/// Immutable result of one crawl.
struct RepositorySnapshot {
  fs::path root;
  std::vector<FileRecord> files;
  DirectoryTree directory_tree;
  std::vector<std::string> warnings;

  const FileRecord& file(std::size_t id) const { return files.at(id); }

  std::vector<std::size_t> ids_of(FileType t) const {
    std::vector<std::size_t> out;
    for (const auto& f : files)
      if (f.filetype == t) out.push_back(f.id);
    return out;
  }
};

/// Extension-based classification: .txt/.md/.log are text, .csv/.tsv are
/// tabular, anything else is Other. Case-insensitive on the extension.
inline FileType detect_type(std::string_view path) {
  const auto slash = path.rfind('/');
  const auto name = slash == std::string_view::npos ? path : path.substr(slash + 1);
  const auto dot = name.rfind('.');
  if (dot == std::string_view::npos || dot == 0) return FileType::Other;
  std::string ext(name.substr(dot + 1));
  for (auto& c : ext) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  if (ext == "txt" || ext == "md" || ext == "log") return FileType::Text;
  if (ext == "csv" || ext == "tsv") return FileType::Tabular;
  return FileType::Other;
}

inline FileType detect_type(const FileRecord& record) { return detect_type(record.path); }

struct ListingEntry {
  std::string path;  // repository-relative
  std::uintmax_t size_bytes = 0;
};

/// Builds a snapshot from an in-memory listing. Files are sorted by path,
/// assigned dense ids and classified; `directories` adds empty directories.
inline RepositorySnapshot make_snapshot(fs::path root, std::vector<ListingEntry> listing,
                                        const std::vector<std::string>& directories = {}) {
  RepositorySnapshot snap;
  snap.root = std::move(root);
  std::sort(listing.begin(), listing.end(),
            [](const ListingEntry& a, const ListingEntry& b) { return a.path < b.path; });
  std::vector<std::string> dirs = directories;
  std::sort(dirs.begin(), dirs.end());
  for (const auto& d : dirs) snap.directory_tree.add(d);
  snap.files.reserve(listing.size());
  for (auto& entry : listing) {
    FileRecord rec;
    rec.id = snap.files.size();
    rec.directory = parent_directory(entry.path);
    rec.path = std::move(entry.path);
    rec.filetype = detect_type(rec.path);
    rec.size_bytes = entry.size_bytes;
    snap.directory_tree.add(rec.directory);
    snap.files.push_back(std::move(rec));
  }
  return snap;
}

/// Optional step run before the walk. A converter may write `.txt`/`.csv`
/// siblings for formats the crawler does not understand.
using PreCrawlHook = std::function<void(const fs::path& root)>;

struct CrawlOptions {
  bool follow_symlinks = false;
  PreCrawlHook pre_crawl;
};

/// Walks `root` and returns every regular file in lexicographic path order.
///
/// Symlinks are skipped unless `follow_symlinks` is set. Text and tabular
/// files that cannot be opened are kept as FileType::Other and reported in
/// `warnings`. A missing or non-directory root is fatal.
inline RepositorySnapshot crawl(const fs::path& root_in, const CrawlOptions& options = {}) {
  std::error_code ec;
  if (!fs::is_directory(root_in, ec))
    throw ConfigError("crawl root '" + root_in.string() + "' is not a readable directory");
  const fs::path root = fs::absolute(root_in).lexically_normal();
  if (options.pre_crawl) options.pre_crawl(root);

  auto dir_options = fs::directory_options::skip_permission_denied;
  if (options.follow_symlinks) dir_options |= fs::directory_options::follow_directory_symlink;
  fs::recursive_directory_iterator it(root, dir_options, ec);
  if (ec) throw ConfigError("cannot read crawl root '" + root.string() + "': " + ec.message());

  std::vector<ListingEntry> listing;
  std::vector<std::string> directories;
  std::set<fs::path> visited;
  visited.insert(fs::canonical(root, ec));
  std::vector<std::string> warnings;

  for (const auto end = fs::recursive_directory_iterator(); it != end; it.increment(ec)) {
    if (ec) {
      warnings.push_back("walk error: " + ec.message());
      ec.clear();
      continue;
    }
    const auto& entry = *it;
    std::string rel = entry.path().lexically_relative(root).generic_string();
    const bool is_link = entry.is_symlink(ec);
    if (is_link && !options.follow_symlinks) {
      if (entry.is_directory(ec)) it.disable_recursion_pending();
      continue;
    }
    if (entry.is_directory(ec)) {
      if (is_link) {
        auto canon = fs::canonical(entry.path(), ec);
        if (ec || !visited.insert(canon).second) {
          it.disable_recursion_pending();
          ec.clear();
          continue;
        }
      }
      directories.push_back(std::move(rel));
      continue;
    }
    if (!entry.is_regular_file(ec)) continue;
    const auto size = entry.file_size(ec);
    listing.push_back({std::move(rel), ec ? 0 : size});
    ec.clear();
  }

  RepositorySnapshot snap = make_snapshot(root, std::move(listing), directories);
  snap.warnings = std::move(warnings);
  for (auto& rec : snap.files) {
    if (rec.filetype == FileType::Other) continue;
    std::ifstream probe(root / rec.path, std::ios::binary);
    if (!probe) {
      snap.warnings.push_back(rec.path + ": unreadable, treated as other");
      rec.filetype = FileType::Other;
    }
  }
  return snap;
}

namespace detail {

inline std::string slurp(const fs::path& file, const std::string& rel) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw FileError(rel, "cannot open");
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) throw FileError(rel, "read failed");
  return bytes;
}

}  // namespace detail

/// Replaces every byte that is not part of a well-formed UTF-8 sequence with
/// U+FFFD. Valid input is returned unchanged.
inline std::string sanitize_utf8(std::string_view bytes) {
  static constexpr std::string_view kReplacement = "\xEF\xBF\xBD";
  std::string out;
  out.reserve(bytes.size());
  const auto* s = reinterpret_cast<const unsigned char*>(bytes.data());
  const std::size_t n = bytes.size();
  std::size_t i = 0;
  while (i < n) {
    const unsigned char c = s[i];
    std::size_t len = 0;
    unsigned char lo = 0x80, hi = 0xBF;
    if (c < 0x80) len = 1;
    else if (c >= 0xC2 && c <= 0xDF) len = 2;
    else if (c >= 0xE0 && c <= 0xEF) {
      len = 3;
      if (c == 0xE0) lo = 0xA0;
      if (c == 0xED) hi = 0x9F;
    } else if (c >= 0xF0 && c <= 0xF4) {
      len = 4;
      if (c == 0xF0) lo = 0x90;
      if (c == 0xF4) hi = 0x8F;
    }
    bool ok = len > 0 && i + len <= n;
    for (std::size_t k = 1; ok && k < len; ++k) {
      const unsigned char b = s[i + k];
      const unsigned char l = k == 1 ? lo : 0x80;
      const unsigned char h = k == 1 ? hi : 0xBF;
      ok = b >= l && b <= h;
    }
    if (ok) {
      out.append(bytes.substr(i, len));
      i += len;
    } else {
      out.append(kReplacement);
      ++i;
    }
  }
  return out;
}

/// File content decoded as UTF-8 (invalid bytes become U+FFFD).
inline std::string read_text(const fs::path& root, const FileRecord& record) {
  return sanitize_utf8(detail::slurp(root / record.path, record.path));
}

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::size_t ragged_rows = 0;  // rows padded or truncated to header width
};

/// RFC-4180 style parse: `separator` between fields, CRLF or LF between
/// records, double quotes for quoting with "" as an escaped quote. Blank lines
/// are skipped. The first record is the header.
inline Table parse_delimited(std::string_view text, char separator, const std::string& name = "<table>") {
  if (text.size() >= 3 && text.substr(0, 3) == "\xEF\xBB\xBF") text.remove_prefix(3);
  std::vector<std::vector<std::string>> records;
  std::vector<std::string> record;
  std::string field;
  bool in_quotes = false;
  bool field_started = false;  // anything seen for the current record

  auto end_field = [&] {
    record.push_back(std::move(field));
    field.clear();
  };
  auto end_record = [&] {
    if (field_started) {
      end_field();
      records.push_back(std::move(record));
    }
    record.clear();
    field_started = false;
  };

  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        field.push_back(c);
      }
      continue;
    }
    if (c == '"' && field.empty()) {
      in_quotes = true;
      field_started = true;
    } else if (c == separator) {
      field_started = true;
      end_field();
    } else if (c == '\n') {
      end_record();
    } else if (c == '\r') {
      if (i + 1 < text.size() && text[i + 1] == '\n') continue;
      end_record();
    } else {
      field_started = true;
      field.push_back(c);
    }
  }
  if (in_quotes) throw FileError(name, "unterminated quoted field");
  end_record();
  if (records.empty()) throw FileError(name, "no header row");

  Table table;
  table.header = std::move(records.front());
  const std::size_t width = table.header.size();
  table.rows.reserve(records.size() - 1);
  for (std::size_t r = 1; r < records.size(); ++r) {
    auto& row = records[r];
    if (row.size() != width) {
      ++table.ragged_rows;
      row.resize(width);
    }
    table.rows.push_back(std::move(row));
  }
  return table;
}

inline char separator_for(std::string_view path) {
  const auto dot = path.rfind('.');
  std::string ext(dot == std::string_view::npos ? "" : path.substr(dot + 1));
  for (auto& c : ext) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return ext == "tsv" ? '\t' : ',';
}

/// Parses a tabular file (comma for .csv, tab for .tsv).
inline Table read_table(const fs::path& root, const FileRecord& record) {
  const std::string bytes = detail::slurp(root / record.path, record.path);
  return parse_delimited(bytes, separator_for(record.path), record.path);
}

// Manifest JSON: {root, files:[{id,path,directory,filetype,size_bytes}]}.

inline nlohmann::json to_json(const FileRecord& f) {
  return nlohmann::json{{"id", f.id},
                        {"path", f.path},
                        {"directory", f.directory},
                        {"filetype", std::string(to_string(f.filetype))},
                        {"size_bytes", f.size_bytes}};
}

inline nlohmann::json manifest_json(const RepositorySnapshot& snap) {
  nlohmann::json files = nlohmann::json::array();
  for (const auto& f : snap.files) files.push_back(to_json(f));
  return nlohmann::json{{"root", snap.root.generic_string()}, {"files", std::move(files)}};
}

/// Rebuilds a snapshot from a manifest. The directory tree is reconstructed
/// from file directories, so empty directories are not restored.
inline RepositorySnapshot snapshot_from_manifest(const nlohmann::json& j) {
  RepositorySnapshot snap;
  snap.root = j.at("root").get<std::string>();
  for (const auto& jf : j.at("files")) {
    FileRecord f;
    f.id = jf.at("id").get<std::size_t>();
    f.path = jf.at("path").get<std::string>();
    f.directory = jf.at("directory").get<std::string>();
    f.filetype = file_type_from_string(jf.at("filetype").get<std::string>());
    f.size_bytes = jf.at("size_bytes").get<std::uintmax_t>();
    if (f.id != snap.files.size()) throw ConfigError("manifest ids are not dense");
    snap.directory_tree.add(f.directory);
    snap.files.push_back(std::move(f));
  }
  return snap;
}

}  // namespace swamp

#endif  // SWAMP_CRAWLER_HPP
