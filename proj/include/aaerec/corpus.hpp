#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <unordered_map>
#include <vector>

#include "aaerec/matrix.hpp"

namespace aaerec {

struct Document {
  std::string doc_id;
  int year = 0;
  std::string title;
  std::vector<std::string> items;  // distinct, in first-seen order
};

/// Documents plus a dense item index shared by every row.
class Corpus {
 public:
  Corpus() = default;
  Corpus(std::vector<Document> documents, std::vector<std::string> items);

  const std::vector<Document>& documents() const { return documents_; }
  /// Column index -> item id.
  const std::vector<std::string>& items() const { return items_; }
  std::size_t n_items() const { return items_.size(); }
  std::size_t size() const { return documents_.size(); }
  bool empty() const { return documents_.empty(); }

  /// Column of `item`, or -1 if absent.
  std::ptrdiff_t item_column(const std::string& item) const;

 private:
  std::vector<Document> documents_;
  std::vector<std::string> items_;
  std::unordered_map<std::string, std::size_t> item_index_;
};

struct SplitCorpus {
  Corpus train;
  Corpus test;
  int split_year = 0;
};

struct PruningReport {
  int alpha = 0;
  std::size_t n_items = 0;
  std::size_t n_nonzeros = 0;
  std::size_t n_documents = 0;
  double density = 0.0;
};

struct PrunedSplit {
  SplitCorpus split;
  PruningReport train_report;
  PruningReport test_report;
};

/// nonzeros / (items * documents); 0 when either dimension is empty.
double density(std::size_t n_nonzeros, std::size_t n_items, std::size_t n_documents);

/// Reads `doc_id<TAB>item_id` ratings and `doc_id<TAB>year<TAB>title` metadata.
/// Documents follow meta-file order; documents without ratings keep an empty
/// item list.
Corpus load_corpus(const std::filesystem::path& ratings_path,
                   const std::filesystem::path& meta_path);

/// Train = year < split_year, test = year >= split_year, order preserved.
SplitCorpus time_split(const Corpus& corpus, int split_year);

/// Vocabulary = items occurring at least `alpha` times in train; both sides
/// are filtered to it and documents left with fewer than two items dropped.
/// Both sides share the rebuilt item index.
PrunedSplit prune(const SplitCorpus& split, int alpha);

/// Row j holds the columns of document j's items.
SparseBinaryMatrix to_matrix(const Corpus& corpus);

enum class SyntheticMode { Relatedness, Diversity };

struct SyntheticParams {
  SyntheticMode mode = SyntheticMode::Relatedness;
  std::size_t n_clusters = 5;
  std::size_t docs_per_cluster = 40;
  std::size_t items_per_cluster = 10;
  std::size_t items_per_doc = 2;
  std::uint64_t seed = 0;
};

/// Year carried by the newest tenth of synthetic documents.
inline constexpr int kSyntheticTestYear = 2011;

struct SyntheticData {
  std::string ratings;  // file contents, TSV
  std::string meta;
};

/// Synthetic corpus with known co-occurrence semantics.
///
/// Relatedness: every document belongs to one cluster. Each cluster's items
/// are cut into consecutive reading lists of `items_per_doc` items and a
/// document cites one whole list. The title draws words from the cluster's
/// keyword pool.
///
/// Diversity: a document draws `items_per_doc` distinct clusters and one
/// item from each, so items of one cluster never co-occur. The title names
/// every drawn cluster through its keywords.
///
/// The first 90% of documents get years 2000..2010, the rest
/// kSyntheticTestYear.
SyntheticData generate_synthetic(const SyntheticParams& params);

/// Writes ratings.tsv and meta.tsv into `out_dir` (created if needed).
/// Returns {ratings path, meta path}.
std::pair<std::filesystem::path, std::filesystem::path> write_synthetic(
    const SyntheticData& data, const std::filesystem::path& out_dir);

std::string to_string(SyntheticMode mode);
SyntheticMode parse_synthetic_mode(const std::string& s);

}  // namespace aaerec
