#ifndef SWAMP_TEXTPREP_HPP
#define SWAMP_TEXTPREP_HPP

// Text preprocessing: tokenization, stemming and TF-IDF vectorization.

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstddef>
#include <cstdio>
#include <iterator>
#include <map>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "swamp/error.hpp"
#include "swamp/porter.hpp"

namespace swamp {

/// Bundled English stopword list (the common 127-word list used by NLTK).
inline constexpr std::string_view kEnglishStopwords[] = {
    "i",       "me",     "my",      "myself",     "we",      "our",    "ours",    "ourselves",
    "you",     "your",   "yours",   "yourself",   "yourselves", "he", "him",     "his",
    "himself", "she",    "her",     "hers",       "herself", "it",     "its",     "itself",
    "they",    "them",   "their",   "theirs",     "themselves", "what", "which",  "who",
    "whom",    "this",   "that",    "these",      "those",   "am",     "is",      "are",
    "was",     "were",   "be",      "been",       "being",   "have",   "has",     "had",
    "having",  "do",     "does",    "did",        "doing",   "a",      "an",      "the",
    "and",     "but",    "if",      "or",         "because", "as",     "until",   "while",
    "of",      "at",     "by",      "for",        "with",    "about",  "against", "between",
    "into",    "through", "during", "before",     "after",   "above",  "below",   "to",
    "from",    "up",     "down",    "in",         "out",     "on",     "off",     "over",
    "under",   "again",  "further", "then",       "once",    "here",   "there",   "when",
    "where",   "why",    "how",     "all",        "any",     "both",   "each",    "few",
    "more",    "most",   "other",   "some",       "such",    "no",     "nor",     "not",
    "only",    "own",    "same",    "so",         "than",    "too",    "very",    "s",
    "t",       "can",    "will",    "just",       "don",     "should", "now"};

inline bool is_stopword(std::string_view token) {
  return std::find(std::begin(kEnglishStopwords), std::end(kEnglishStopwords), token) !=
         std::end(kEnglishStopwords);
}

struct TokenizerOptions {
  bool remove_stopwords = true;
  std::size_t min_length = 2;
};

/// Lowercases, splits on every character that is not an ASCII letter or
/// digit, then drops short tokens and (optionally) stopwords. Non-ASCII bytes
/// act as separators.
inline std::vector<std::string> tokenize(std::string_view text, const TokenizerOptions& options = {}) {
  std::vector<std::string> tokens;
  std::string current;
  auto flush = [&] {
    if (current.size() >= options.min_length &&
        !(options.remove_stopwords && is_stopword(current)))
      tokens.push_back(current);
    current.clear();
  };
  for (const char ch : text) {
    const auto c = static_cast<unsigned char>(ch);
    if (c < 0x80 && std::isalnum(c)) {
      current.push_back(static_cast<char>(std::tolower(c)));
    } else if (!current.empty()) {
      flush();
    }
  }
  if (!current.empty()) flush();
  return tokens;
}

inline std::string stem(std::string_view token) { return porter::stem(token); }

/// tokenize followed by stemming of every token.
inline std::vector<std::string> analyze_text(std::string_view text, const TokenizerOptions& options = {}) {
  auto tokens = tokenize(text, options);
  for (auto& t : tokens) t = porter::stem(t);
  return tokens;
}

struct Vocabulary {
  std::vector<std::string> terms;                        // lexicographic
  std::unordered_map<std::string, std::size_t> term_to_index;
  std::vector<std::size_t> document_frequency;

  std::size_t size() const { return terms.size(); }
};

/// Row-compressed sparse matrix of non-negative weights. Column indices within
/// a row are strictly increasing.
class FeatureMatrix {
 public:
  FeatureMatrix() = default;
  FeatureMatrix(std::size_t cols, std::vector<std::size_t> row_file_ids)
      : cols_(cols), row_file_ids_(std::move(row_file_ids)) {}

  /// Appends the next row; entries must be sorted by column.
  void push_row(const std::vector<std::pair<std::size_t, double>>& entries) {
    double sq = 0.0;
    for (const auto& [c, v] : entries) {
      col_.push_back(c);
      val_.push_back(v);
      sq += v * v;
    }
    row_ptr_.push_back(col_.size());
    sq_norm_.push_back(sq);
  }

  std::size_t rows() const { return sq_norm_.size(); }
  std::size_t cols() const { return cols_; }
  std::size_t nnz() const { return col_.size(); }
  const std::vector<std::size_t>& row_file_ids() const { return row_file_ids_; }

  struct RowView {
    std::span<const std::size_t> cols;
    std::span<const double> values;
  };

  RowView row(std::size_t r) const {
    const std::size_t b = row_ptr_[r], e = row_ptr_[r + 1];
    return {std::span(col_).subspan(b, e - b), std::span(val_).subspan(b, e - b)};
  }

  double squared_norm(std::size_t r) const { return sq_norm_[r]; }

  double dot(std::size_t a, std::size_t b) const {
    const auto ra = row(a), rb = row(b);
    double sum = 0.0;
    std::size_t i = 0, j = 0;
    while (i < ra.cols.size() && j < rb.cols.size()) {
      if (ra.cols[i] < rb.cols[j]) ++i;
      else if (rb.cols[j] < ra.cols[i]) ++j;
      else sum += ra.values[i++] * rb.values[j++];
    }
    return sum;
  }

  /// Dot product of row r with a dense vector.
  double dot_dense(std::size_t r, std::span<const double> dense) const {
    const auto rv = row(r);
    double sum = 0.0;
    for (std::size_t i = 0; i < rv.cols.size(); ++i) sum += rv.values[i] * dense[rv.cols[i]];
    return sum;
  }

  double euclidean(std::size_t a, std::size_t b) const {
    if (a == b) return 0.0;
    const double d2 = sq_norm_[a] + sq_norm_[b] - 2.0 * dot(a, b);
    return d2 > 0.0 ? std::sqrt(d2) : 0.0;
  }

  void add_row_to(std::size_t r, std::span<double> dense, double scale = 1.0) const {
    const auto rv = row(r);
    for (std::size_t i = 0; i < rv.cols.size(); ++i) dense[rv.cols[i]] += scale * rv.values[i];
  }

 private:
  std::size_t cols_ = 0;
  std::vector<std::size_t> row_ptr_{0};
  std::vector<std::size_t> col_;
  std::vector<double> val_;
  std::vector<double> sq_norm_;
  std::vector<std::size_t> row_file_ids_;
};

struct TfidfOptions {
  std::size_t min_df = 1;  // drop terms that occur in fewer documents
};

struct TfidfResult {
  Vocabulary vocabulary;
  FeatureMatrix matrix;
};

/// Smoothed inverse document frequency: ln((1 + n) / (1 + df)) + 1.
inline double smoothed_idf(std::size_t n_docs, std::size_t df) {
  return std::log((1.0 + static_cast<double>(n_docs)) / (1.0 + static_cast<double>(df))) + 1.0;
}

/// Builds the vocabulary and the L2-normalized TF-IDF matrix.
///
/// tf is the raw count of a term in a document. Rows follow document order;
/// row_file_ids defaults to 0..n-1 when empty. Throws InsufficientDataError if
/// no document contributes a term.
inline TfidfResult build_tfidf(const std::vector<std::vector<std::string>>& documents,
                               std::vector<std::size_t> row_file_ids = {},
                               const TfidfOptions& options = {}) {
  const std::size_t n = documents.size();
  if (n == 0) throw InsufficientDataError("no text features: no documents");
  if (row_file_ids.empty()) {
    row_file_ids.resize(n);
    for (std::size_t i = 0; i < n; ++i) row_file_ids[i] = i;
  }
  if (row_file_ids.size() != n) throw ConfigError("row_file_ids size does not match documents");

  std::vector<std::map<std::string, std::size_t>> counts(n);
  std::map<std::string, std::size_t> df;
  for (std::size_t d = 0; d < n; ++d) {
    for (const auto& t : documents[d]) ++counts[d][t];
    for (const auto& [t, c] : counts[d]) ++df[t];
  }

  TfidfResult out;
  auto& vocab = out.vocabulary;
  for (const auto& [t, f] : df) {
    if (f < options.min_df) continue;
    vocab.term_to_index.emplace(t, vocab.terms.size());
    vocab.terms.push_back(t);
    vocab.document_frequency.push_back(f);
  }
  if (vocab.terms.empty()) throw InsufficientDataError("no text features");

  std::vector<double> idf(vocab.size());
  for (std::size_t t = 0; t < vocab.size(); ++t) idf[t] = smoothed_idf(n, vocab.document_frequency[t]);

  out.matrix = FeatureMatrix(vocab.size(), std::move(row_file_ids));
  std::vector<std::pair<std::size_t, double>> entries;
  for (std::size_t d = 0; d < n; ++d) {
    entries.clear();
    double sq = 0.0;
    // counts[d] is ordered by term, so column indices come out increasing.
    for (const auto& [t, c] : counts[d]) {
      const auto it = vocab.term_to_index.find(t);
      if (it == vocab.term_to_index.end()) continue;
      const double w = static_cast<double>(c) * idf[it->second];
      entries.emplace_back(it->second, w);
      sq += w * w;
    }
    if (sq > 0.0) {
      const double inv = 1.0 / std::sqrt(sq);
      for (auto& e : entries) e.second *= inv;
    }
    out.matrix.push_row(entries);
  }
  return out;
}

/// Debug dump: one `row_id,term,weight` line per stored value, where row_id is
/// the file id of the row.
inline void write_triplets(std::ostream& os, const TfidfResult& tfidf) {
  os << "row_id,term,weight\n";
  char buf[64];
  for (std::size_t r = 0; r < tfidf.matrix.rows(); ++r) {
    const auto row = tfidf.matrix.row(r);
    for (std::size_t i = 0; i < row.cols.size(); ++i) {
      std::snprintf(buf, sizeof buf, "%.17g", row.values[i]);
      os << tfidf.matrix.row_file_ids()[r] << ',' << tfidf.vocabulary.terms[row.cols[i]] << ','
         << buf << '\n';
    }
  }
}

}  // namespace swamp

#endif  // SWAMP_TEXTPREP_HPP
