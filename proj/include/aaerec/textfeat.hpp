#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "aaerec/matrix.hpp"

namespace aaerec {

using Tokens = std::vector<std::string>;

/// Lowercases ASCII, splits on every ASCII non-alphanumeric byte and drops
/// empty tokens and single digits. Bytes >= 0x80 are kept inside tokens so
/// UTF-8 words survive intact.
Tokens tokenize(std::string_view title);

/// Smoothed inverse document frequencies, fitted on training titles only.
class TfidfModel {
 public:
  static TfidfModel fit(std::span<const Tokens> train_titles);

  std::size_t vocabulary_size() const { return words_.size(); }
  std::size_t n_train_docs() const { return n_train_docs_; }
  const std::vector<std::string>& words() const { return words_; }
  const std::vector<double>& idf() const { return idf_; }

  /// Column of `token`, or nullopt when out of vocabulary.
  std::optional<std::size_t> column(const std::string& token) const;

  /// Per-token weight count * idf for in-vocabulary tokens, sorted by column.
  std::vector<SparseRealMatrix::Entry> weights(const Tokens& title) const;

  friend bool operator==(const TfidfModel& a, const TfidfModel& b) {
    return a.words_ == b.words_ && a.idf_ == b.idf_ && a.n_train_docs_ == b.n_train_docs_;
  }

 private:
  std::vector<std::string> words_;
  std::unordered_map<std::string, std::size_t> word_index_;
  std::vector<double> idf_;
  std::size_t n_train_docs_ = 0;
};

/// Rows of count * idf, L2-normalized; empty rows stay zero.
SparseRealMatrix transform_tfidf(const TfidfModel& model, std::span<const Tokens> titles);

/// Word vectors loaded from a word2vec text file, or generated on demand from
/// a seeded hash of the token (`builtin:hash:<dim>:<seed>`).
class EmbeddingTable {
 public:
  static EmbeddingTable from_word2vec(const std::filesystem::path& path);
  static EmbeddingTable hashed(std::size_t dim, std::uint64_t seed);

  std::size_t dim() const { return dim_; }
  bool is_hashed() const { return hashed_; }
  std::size_t size() const { return vectors_.size(); }

  /// Writes the vector for `token` into `out` (length dim). Returns false
  /// when a file-backed table has no entry for it.
  bool lookup(const std::string& token, std::span<double> out) const;

 private:
  std::size_t dim_ = 0;
  bool hashed_ = false;
  std::uint64_t seed_ = 0;
  std::unordered_map<std::string, std::vector<double>> vectors_;
};

/// Accepts a file path or `builtin:hash:<dim>:<seed>`.
EmbeddingTable load_embeddings(const std::string& source);

/// Row = sum over in-vocabulary tokens with embeddings of count * idf * emb,
/// then L2-normalized; rows without any such token stay zero.
DenseMatrix embed_titles(const TfidfModel& tfidf, const EmbeddingTable& embeddings,
                         std::span<const Tokens> titles);

/// Side information for one set of documents.
struct TitleFeatures {
  SparseRealMatrix tfidf;  // m x |vocabulary|
  DenseMatrix embedded;    // m x dim
};

TitleFeatures featurize(const TfidfModel& tfidf, const EmbeddingTable& embeddings,
                        std::span<const Tokens> titles);

}  // namespace aaerec
