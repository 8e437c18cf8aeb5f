#ifndef SWAMP_SYNTH_HPP
#define SWAMP_SYNTH_HPP

// Synthetic N-ary directory trees with one unique word per leaf, and seeded
// shuffling of files between leaves.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "swamp/crawler.hpp"
#include "swamp/error.hpp"
#include "swamp/random.hpp"

namespace swamp::synth {

struct SynthSpec {
  std::size_t arity = 2;
  std::size_t height = 1;
  std::size_t files_per_leaf_per_type = 20;
  std::size_t repeats_per_file = 100;
  std::uint64_t seed = 0;

  std::size_t leaf_count() const {
    std::size_t n = 1;
    for (std::size_t i = 0; i < height; ++i) {
      if (n > (std::size_t{1} << 40) / std::max<std::size_t>(arity, 1))
        throw ConfigError("synthetic tree too large");
      n *= arity;
    }
    return n;
  }

  std::size_t total_files() const { return 2 * files_per_leaf_per_type * leaf_count(); }

  /// "2-ary, 5-height" style label.
  std::string label() const {
    return std::to_string(arity) + "-ary " + std::to_string(height) + "-height";
  }

  void validate() const {
    if (arity < 1) throw ConfigError("arity must be at least 1");
    if (height < 1) throw ConfigError("height must be at least 1");
    if (files_per_leaf_per_type < 1) throw ConfigError("files per leaf must be at least 1");
    if (repeats_per_file < 1) throw ConfigError("repeats per file must be at least 1");
    (void)leaf_count();
  }
};

enum class ShuffleMode {
  Permute,  // permute the leaf slots of the selected files
  Uniform,  // send every selected file to an independently drawn leaf
};

inline std::string_view to_string(ShuffleMode m) { return m == ShuffleMode::Permute ? "permute" : "uniform"; }

inline ShuffleMode shuffle_mode_from_string(std::string_view s) {
  if (s == "permute") return ShuffleMode::Permute;
  if (s == "uniform") return ShuffleMode::Uniform;
  throw ConfigError("unknown shuffle mode '" + std::string(s) + "'");
}

struct ShufflePlan {
  int percent = 0;
  std::uint64_t seed = 0;
  ShuffleMode mode = ShuffleMode::Permute;
  std::vector<std::string> selected;  // repository-relative paths before the move
  std::vector<std::string> targets;   // destination leaf directory per selected file
};

struct Leaf {
  std::string directory;
  std::string word;
};

/// Path of the manifest written beside a corpus root.
inline fs::path manifest_path(const fs::path& root) {
  fs::path p = fs::absolute(root).lexically_normal();
  if (!p.has_filename()) p = p.parent_path();
  p += ".synth.json";
  return p;
}

/// Word for leaf `index`: lowercase alphanumeric, ending in a digit so the
/// stemmer leaves it alone, and unique per leaf.
inline std::string leaf_word(std::uint64_t seed, std::size_t index) {
  static constexpr char kAlphabet[] = "abcdefghijklmnopqrstuvwxyz";
  std::uint64_t h = mix_seed(seed);
  std::string w = "w";
  for (int i = 0; i < 4; ++i) {
    w.push_back(kAlphabet[h % 26]);
    h /= 26;
  }
  return w + std::to_string(index);
}

/// Leaves in lexicographic directory order. Directory names are zero padded
/// so that order matches the leaf index.
inline std::vector<Leaf> leaves(const SynthSpec& spec) {
  spec.validate();
  const std::size_t width = std::to_string(spec.arity - 1).size();
  const std::size_t count = spec.leaf_count();
  std::vector<Leaf> out;
  out.reserve(count);
  for (std::size_t leaf = 0; leaf < count; ++leaf) {
    std::vector<std::size_t> digits(spec.height);
    std::size_t rest = leaf;
    for (std::size_t level = spec.height; level-- > 0;) {
      digits[level] = rest % spec.arity;
      rest /= spec.arity;
    }
    std::string dir;
    for (std::size_t level = 0; level < spec.height; ++level) {
      std::string part = std::to_string(digits[level]);
      part.insert(0, width - part.size(), '0');
      if (!dir.empty()) dir.push_back('/');
      dir += "n" + part;
    }
    out.push_back({std::move(dir), leaf_word(spec.seed, leaf)});
  }
  return out;
}

namespace detail {

inline void write_file(const fs::path& p, const std::string& content) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) throw FileError(p.string(), "cannot create");
  out << content;
  if (!out) throw FileError(p.string(), "write failed");
}

inline nlohmann::json spec_json(const SynthSpec& s) {
  return {{"arity", s.arity},
          {"height", s.height},
          {"files_per_leaf_per_type", s.files_per_leaf_per_type},
          {"repeats_per_file", s.repeats_per_file},
          {"seed", s.seed}};
}

inline void save_manifest(const fs::path& root, const nlohmann::json& j) {
  write_file(manifest_path(root), j.dump(2) + "\n");
}

inline nlohmann::json load_manifest(const fs::path& root) {
  std::ifstream in(manifest_path(root));
  if (!in) throw ConfigError("'" + root.string() + "' has no synthetic manifest; was it generated by synth?");
  return nlohmann::json::parse(in);
}

}  // namespace detail

inline std::string text_file_name(const std::string& word, std::size_t i) {
  return word + "_" + (i < 10 ? "0" : "") + std::to_string(i) + ".txt";
}

inline std::string table_file_name(const std::string& word, std::size_t i) {
  return word + "_" + (i < 10 ? "0" : "") + std::to_string(i) + ".csv";
}

/// Writes the corpus under `out_root` and returns its crawl.
///
/// Each leaf gets `files_per_leaf_per_type` text files holding the leaf word
/// repeated `repeats_per_file` times, and as many CSV files whose single
/// column is named after the leaf word followed by `repeats_per_file` rows of
/// the word. A manifest is written to `<out_root>.synth.json`.
inline RepositorySnapshot generate(const SynthSpec& spec, const fs::path& out_root) {
  spec.validate();
  std::error_code ec;
  if (fs::exists(out_root, ec)) {
    if (!fs::is_directory(out_root, ec) || !fs::is_empty(out_root, ec))
      throw ConfigError("output '" + out_root.string() + "' exists and is not an empty directory");
  }
  fs::create_directories(out_root, ec);
  if (ec) throw ConfigError("cannot create '" + out_root.string() + "': " + ec.message());

  const auto all = leaves(spec);
  nlohmann::json leaf_table = nlohmann::json::array();
  for (const auto& leaf : all) {
    const fs::path dir = out_root / leaf.directory;
    fs::create_directories(dir, ec);
    if (ec) throw ConfigError("cannot create '" + dir.string() + "': " + ec.message());

    std::string text;
    text.reserve((leaf.word.size() + 1) * spec.repeats_per_file);
    for (std::size_t r = 0; r < spec.repeats_per_file; ++r) {
      if (r) text.push_back(' ');
      text += leaf.word;
    }
    text.push_back('\n');
    std::string table = leaf.word + "\n";
    for (std::size_t r = 0; r < spec.repeats_per_file; ++r) table += leaf.word + "\n";

    for (std::size_t i = 0; i < spec.files_per_leaf_per_type; ++i) {
      detail::write_file(dir / text_file_name(leaf.word, i), text);
      detail::write_file(dir / table_file_name(leaf.word, i), table);
    }
    leaf_table.push_back({{"directory", leaf.directory}, {"word", leaf.word}});
  }
  detail::save_manifest(out_root, {{"spec", detail::spec_json(spec)},
                                   {"leaves", std::move(leaf_table)},
                                   {"shuffles", nlohmann::json::array()}});
  return crawl(out_root);
}

/// Number of files selected for `percent` of `total`, rounding halves up.
inline std::size_t shuffle_count(int percent, std::size_t total) {
  return (static_cast<std::size_t>(percent) * total + 50) / 100;
}

/// Draws the shuffle for a crawled synthetic corpus without touching disk.
inline ShufflePlan plan_shuffle(const RepositorySnapshot& snapshot, const std::vector<std::string>& leaf_dirs,
                                int percent, std::uint64_t seed, ShuffleMode mode = ShuffleMode::Permute) {
  if (percent < 0 || percent > 100) throw ConfigError("percent must be within 0..100");
  ShufflePlan plan;
  plan.percent = percent;
  plan.seed = seed;
  plan.mode = mode;
  const std::size_t n = snapshot.files.size();
  Rng rng(seed);
  auto picked = rng.sample(n, shuffle_count(percent, n));
  std::sort(picked.begin(), picked.end());
  for (auto id : picked) {
    plan.selected.push_back(snapshot.file(id).path);
    plan.targets.push_back(snapshot.file(id).directory);
  }
  if (mode == ShuffleMode::Permute) {
    rng.shuffle(std::span(plan.targets));
  } else {
    if (leaf_dirs.empty()) throw ConfigError("no leaf directories to shuffle into");
    for (auto& t : plan.targets) t = leaf_dirs[static_cast<std::size_t>(rng.below(leaf_dirs.size()))];
  }
  return plan;
}

/// Moves round(percent% of all files) to new leaf directories and returns the
/// new crawl. The plan is appended to the corpus manifest. 0% is a no-op.
inline RepositorySnapshot shuffle(const RepositorySnapshot& snapshot, int percent, std::uint64_t seed,
                                  ShuffleMode mode = ShuffleMode::Permute) {
  if (percent < 0 || percent > 100) throw ConfigError("percent must be within 0..100");
  auto manifest = detail::load_manifest(snapshot.root);
  std::vector<std::string> leaf_dirs;
  for (const auto& l : manifest.at("leaves")) leaf_dirs.push_back(l.at("directory").get<std::string>());

  const auto plan = plan_shuffle(snapshot, leaf_dirs, percent, seed, mode);
  for (std::size_t i = 0; i < plan.selected.size(); ++i) {
    const fs::path from = snapshot.root / plan.selected[i];
    const fs::path to = snapshot.root / plan.targets[i] / from.filename();
    if (from == to) continue;
    std::error_code ec;
    if (fs::exists(to, ec)) throw FileError(to.string(), "shuffle target already exists");
    fs::rename(from, to, ec);
    if (ec) throw FileError(from.string(), "move failed: " + ec.message());
  }
  manifest["shuffles"].push_back({{"percent", plan.percent},
                                   {"seed", plan.seed},
                                   {"mode", std::string(to_string(plan.mode))},
                                   {"selected", plan.selected},
                                   {"targets", plan.targets}});
  detail::save_manifest(snapshot.root, manifest);
  return crawl(snapshot.root);
}

inline RepositorySnapshot shuffle(const fs::path& root, int percent, std::uint64_t seed,
                                  ShuffleMode mode = ShuffleMode::Permute) {
  return shuffle(crawl(root), percent, seed, mode);
}

/// Spec recorded in a corpus manifest.
inline SynthSpec read_spec(const fs::path& root) {
  const auto j = detail::load_manifest(root).at("spec");
  SynthSpec s;
  s.arity = j.at("arity").get<std::size_t>();
  s.height = j.at("height").get<std::size_t>();
  s.files_per_leaf_per_type = j.at("files_per_leaf_per_type").get<std::size_t>();
  s.repeats_per_file = j.at("repeats_per_file").get<std::size_t>();
  s.seed = j.at("seed").get<std::uint64_t>();
  return s;
}

}  // namespace swamp::synth

#endif  // SWAMP_SYNTH_HPP
