#include "aaerec/corpus.hpp"

#include <algorithm>
#include <cstdio>
#include <numeric>
#include <fstream>
#include <random>
#include <sstream>
#include <unordered_set>

#include "aaerec/error.hpp"
#include "aaerec/random.hpp"

namespace aaerec {

Corpus::Corpus(std::vector<Document> documents, std::vector<std::string> items)
    : documents_(std::move(documents)), items_(std::move(items)) {
  item_index_.reserve(items_.size());
  for (std::size_t i = 0; i < items_.size(); ++i) {
    if (!item_index_.emplace(items_[i], i).second) {
      throw Error("Corpus: duplicate item id '" + items_[i] + "'");
    }
  }
}

std::ptrdiff_t Corpus::item_column(const std::string& item) const {
  auto it = item_index_.find(item);
  return it == item_index_.end() ? -1 : static_cast<std::ptrdiff_t>(it->second);
}

double density(std::size_t n_nonzeros, std::size_t n_items, std::size_t n_documents) {
  if (n_items == 0 || n_documents == 0) return 0.0;
  return static_cast<double>(n_nonzeros) /
         (static_cast<double>(n_items) * static_cast<double>(n_documents));
}

namespace {

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    auto pos = line.find('\t', start);
    fields.push_back(line.substr(start, pos == std::string::npos ? pos : pos - start));
    if (pos == std::string::npos) break;
    start = pos + 1;
  }
  return fields;
}

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path.string() + "'");
  return in;
}

bool next_line(std::istream& in, std::string& line) {
  if (!std::getline(in, line)) return false;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return true;
}

int parse_year(const std::string& s, const std::string& source, std::size_t line) {
  if (s.size() != 4 || !std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; })) {
    throw ParseError(source, line, "year '" + s + "' is not a 4-digit integer");
  }
  return std::stoi(s);
}

}  // namespace

Corpus load_corpus(const std::filesystem::path& ratings_path,
                   const std::filesystem::path& meta_path) {
  // Open both up front so a missing ratings file is reported as such.
  auto ratings_in = open_input(ratings_path);
  auto meta_in = open_input(meta_path);
  std::vector<Document> docs;
  std::unordered_map<std::string, std::size_t> doc_row;
  {
    auto& in = meta_in;
    const std::string source = meta_path.string();
    std::string line;
    for (std::size_t lineno = 1; next_line(in, line); ++lineno) {
      if (line.empty()) continue;
      auto f = split_tabs(line);
      if (f.size() < 2 || f.size() > 3) {
        throw ParseError(source, lineno, "expected doc_id<TAB>year<TAB>title");
      }
      if (f[0].empty()) throw ParseError(source, lineno, "empty doc_id");
      Document d;
      d.doc_id = f[0];
      d.year = parse_year(f[1], source, lineno);
      if (f.size() == 3) d.title = f[2];
      if (!doc_row.emplace(d.doc_id, docs.size()).second) {
        throw ParseError(source, lineno, "duplicate doc_id '" + d.doc_id + "'");
      }
      docs.push_back(std::move(d));
    }
  }

  std::vector<std::string> items;
  std::unordered_map<std::string, std::size_t> item_seen;
  std::vector<std::unordered_set<std::string>> doc_items(docs.size());
  std::vector<std::string> unknown;
  std::unordered_set<std::string> unknown_seen;
  {
    auto& in = ratings_in;
    const std::string source = ratings_path.string();
    std::string line;
    for (std::size_t lineno = 1; next_line(in, line); ++lineno) {
      if (line.empty()) continue;
      auto f = split_tabs(line);
      if (f.size() != 2 || f[0].empty() || f[1].empty()) {
        throw ParseError(source, lineno, "expected doc_id<TAB>item_id");
      }
      auto it = doc_row.find(f[0]);
      if (it == doc_row.end()) {
        if (unknown_seen.insert(f[0]).second) unknown.push_back(f[0]);
        continue;
      }
      if (item_seen.emplace(f[1], items.size()).second) items.push_back(f[1]);
      if (doc_items[it->second].insert(f[1]).second) docs[it->second].items.push_back(f[1]);
    }
  }
  if (!unknown.empty()) {
    std::string list;
    for (std::size_t i = 0; i < unknown.size(); ++i) list += (i ? ", " : "") + unknown[i];
    throw Error("ratings reference doc_ids absent from '" + meta_path.string() + "': " + list);
  }
  return Corpus(std::move(docs), std::move(items));
}

SplitCorpus time_split(const Corpus& corpus, int split_year) {
  std::vector<Document> train, test;
  for (const auto& d : corpus.documents()) (d.year < split_year ? train : test).push_back(d);
  if (train.empty()) {
    throw Error("time_split: train side is empty for split year " + std::to_string(split_year));
  }
  if (test.empty()) {
    throw Error("time_split: test side is empty for split year " + std::to_string(split_year));
  }
  SplitCorpus s;
  s.train = Corpus(std::move(train), corpus.items());
  s.test = Corpus(std::move(test), corpus.items());
  s.split_year = split_year;
  return s;
}

namespace {

std::vector<Document> filter_side(const Corpus& side,
                                  const std::unordered_set<std::string>& vocabulary) {
  std::vector<Document> kept;
  for (const auto& d : side.documents()) {
    Document f = d;
    std::erase_if(f.items, [&](const std::string& i) { return !vocabulary.contains(i); });
    if (f.items.size() >= 2) kept.push_back(std::move(f));
  }
  return kept;
}

PruningReport report_for(const std::vector<Document>& docs, int alpha, std::size_t n_items) {
  PruningReport r;
  r.alpha = alpha;
  r.n_items = n_items;
  r.n_documents = docs.size();
  for (const auto& d : docs) r.n_nonzeros += d.items.size();
  r.density = density(r.n_nonzeros, r.n_items, r.n_documents);
  return r;
}

}  // namespace

PrunedSplit prune(const SplitCorpus& split, int alpha) {
  if (alpha < 1) throw Error("prune: alpha must be >= 1, got " + std::to_string(alpha));

  std::unordered_map<std::string, std::size_t> counts;
  std::vector<std::string> first_seen;
  for (const auto& d : split.train.documents()) {
    for (const auto& i : d.items) {
      if (counts[i]++ == 0) first_seen.push_back(i);
    }
  }
  std::vector<std::string> vocab;
  std::unordered_set<std::string> vocab_set;
  for (const auto& i : first_seen) {
    if (counts[i] >= static_cast<std::size_t>(alpha)) {
      vocab.push_back(i);
      vocab_set.insert(i);
    }
  }

  auto train_docs = filter_side(split.train, vocab_set);
  auto test_docs = filter_side(split.test, vocab_set);
  if (train_docs.empty()) {
    throw Error("prune: no train documents remain at alpha " + std::to_string(alpha));
  }
  if (test_docs.empty()) {
    throw Error("prune: no test documents remain at alpha " + std::to_string(alpha));
  }

  PrunedSplit out;
  out.train_report = report_for(train_docs, alpha, vocab.size());
  out.test_report = report_for(test_docs, alpha, vocab.size());
  out.split.split_year = split.split_year;
  out.split.train = Corpus(std::move(train_docs), vocab);
  out.split.test = Corpus(std::move(test_docs), std::move(vocab));
  return out;
}

SparseBinaryMatrix to_matrix(const Corpus& corpus) {
  std::vector<std::vector<std::uint32_t>> rows(corpus.size());
  for (std::size_t r = 0; r < corpus.size(); ++r) {
    for (const auto& item : corpus.documents()[r].items) {
      auto col = corpus.item_column(item);
      if (col < 0) throw Error("to_matrix: item '" + item + "' missing from the item index");
      rows[r].push_back(static_cast<std::uint32_t>(col));
    }
  }
  return SparseBinaryMatrix::from_rows(corpus.n_items(), rows);
}

// ---------------------------------------------------------------------------
// Synthetic corpora

namespace {

const std::vector<std::string>& filler_words() {
  static const std::vector<std::string> words = {
      "analysis", "study", "effects", "approach", "evidence", "model",
      "review", "results", "towards", "new", "on", "of"};
  return words;
}

// Pronounceable pseudo-words, unique across the whole corpus.
std::vector<std::vector<std::string>> keyword_pools(std::size_t n_clusters, std::size_t per_cluster,
                                                    std::mt19937_64& rng) {
  static const char* const kOnsets[] = {"b", "d", "f", "g", "k", "l", "m", "n", "p",
                                        "r", "s", "t", "v", "z", "br", "tr", "st", "pl"};
  static const char* const kVowels[] = {"a", "e", "i", "o", "u", "ai", "ou"};
  std::unordered_set<std::string> used(filler_words().begin(), filler_words().end());
  std::vector<std::vector<std::string>> pools(n_clusters);
  for (auto& pool : pools) {
    while (pool.size() < per_cluster) {
      std::string w;
      const std::size_t syllables = 2 + uniform_index(rng, 2);
      for (std::size_t s = 0; s < syllables; ++s) {
        w += kOnsets[uniform_index(rng, std::size(kOnsets))];
        w += kVowels[uniform_index(rng, std::size(kVowels))];
      }
      w += kOnsets[uniform_index(rng, std::size(kOnsets))];
      if (used.insert(w).second) pool.push_back(w);
    }
  }
  return pools;
}

std::string item_id(std::size_t cluster, std::size_t item) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "c%02zu-i%03zu", cluster, item);
  return buf;
}

struct SynthDoc {
  std::vector<std::string> items;
  std::vector<std::string> title_words;
};

constexpr std::size_t kKeywordsPerCluster = 6;

}  // namespace

SyntheticData generate_synthetic(const SyntheticParams& p) {
  if (p.n_clusters == 0 || p.docs_per_cluster == 0 || p.items_per_cluster == 0 ||
      p.items_per_doc == 0) {
    throw Error("generate_synthetic: all sizes must be positive");
  }
  if (p.mode == SyntheticMode::Relatedness && p.items_per_doc > p.items_per_cluster) {
    throw Error("generate_synthetic: relatedness needs items_per_doc <= items_per_cluster");
  }
  if (p.mode == SyntheticMode::Diversity && p.items_per_doc > p.n_clusters) {
    throw Error("generate_synthetic: diversity needs items_per_doc <= n_clusters");
  }
  const std::size_t m = p.n_clusters * p.docs_per_cluster;
  if (m < 10) throw Error("generate_synthetic: need at least 10 documents for a 90:10 split");

  std::mt19937_64 rng(p.seed);
  const auto pools = keyword_pools(p.n_clusters, kKeywordsPerCluster, rng);
  const auto& filler = filler_words();
  auto keyword = [&](std::size_t c) { return pools[c][uniform_index(rng, pools[c].size())]; };

  std::vector<SynthDoc> docs;
  docs.reserve(m);
  const std::size_t n_lists = (p.items_per_cluster + p.items_per_doc - 1) / p.items_per_doc;
  for (std::size_t c = 0; c < p.n_clusters; ++c) {
    for (std::size_t k = 0; k < p.docs_per_cluster; ++k) {
      SynthDoc d;
      if (p.mode == SyntheticMode::Relatedness) {
        const std::size_t list = uniform_index(rng, n_lists);
        for (std::size_t t = 0; t < p.items_per_doc; ++t) {
          d.items.push_back(item_id(c, (list * p.items_per_doc + t) % p.items_per_cluster));
        }
        d.title_words = {keyword(c), keyword(c)};
      } else {
        // The document's own cluster plus items_per_doc - 1 others.
        std::vector<std::size_t> clusters(p.n_clusters);
        std::iota(clusters.begin(), clusters.end(), std::size_t{0});
        std::swap(clusters[0], clusters[c]);
        for (std::size_t t = 1; t < p.items_per_doc; ++t) {
          std::swap(clusters[t], clusters[t + uniform_index(rng, p.n_clusters - t)]);
        }
        for (std::size_t t = 0; t < p.items_per_doc; ++t) {
          d.items.push_back(item_id(clusters[t], uniform_index(rng, p.items_per_cluster)));
          d.title_words.push_back(keyword(clusters[t]));
        }
      }
      d.title_words.push_back(filler[uniform_index(rng, filler.size())]);
      shuffle(d.title_words, rng);
      docs.push_back(std::move(d));
    }
  }
  shuffle(docs, rng);

  const std::size_t n_test = std::max<std::size_t>(1, m / 10);
  const std::size_t n_train = m - n_test;
  std::ostringstream ratings, meta;
  for (std::size_t j = 0; j < m; ++j) {
    char id[32];
    std::snprintf(id, sizeof id, "d%05zu", j);
    const int year =
        j < n_train ? 2000 + static_cast<int>((j * 11) / n_train) : kSyntheticTestYear;
    std::string title;
    for (const auto& w : docs[j].title_words) title += (title.empty() ? "" : " ") + w;
    meta << id << '\t' << year << '\t' << title << '\n';
    for (const auto& item : docs[j].items) ratings << id << '\t' << item << '\n';
  }
  return {ratings.str(), meta.str()};
}

std::pair<std::filesystem::path, std::filesystem::path> write_synthetic(
    const SyntheticData& data, const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);
  const auto ratings = out_dir / "ratings.tsv";
  const auto meta = out_dir / "meta.tsv";
  for (const auto& [path, contents] : {std::pair{ratings, &data.ratings}, std::pair{meta, &data.meta}}) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << *contents;
    if (!out) throw Error("cannot write '" + path.string() + "'");
  }
  return {ratings, meta};
}

std::string to_string(SyntheticMode mode) {
  return mode == SyntheticMode::Relatedness ? "relatedness" : "diversity";
}

SyntheticMode parse_synthetic_mode(const std::string& s) {
  if (s == "relatedness") return SyntheticMode::Relatedness;
  if (s == "diversity") return SyntheticMode::Diversity;
  throw Error("unknown synthetic mode '" + s + "' (expected relatedness or diversity)");
}

}  // namespace aaerec
