#include "aaerec/textfeat.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <map>
#include <random>
#include <sstream>
#include <unordered_set>

#include "aaerec/error.hpp"
#include "aaerec/random.hpp"

namespace aaerec {

Tokens tokenize(std::string_view title) {
  Tokens tokens;
  std::string current;
  auto flush = [&] {
    const bool single_digit = current.size() == 1 && current[0] >= '0' && current[0] <= '9';
    if (!current.empty() && !single_digit) tokens.push_back(current);
    current.clear();
  };
  for (char ch : title) {
    const auto c = static_cast<unsigned char>(ch);
    if (c >= 0x80 || std::isalnum(c)) {
      current.push_back(static_cast<char>(c < 0x80 ? std::tolower(c) : c));
    } else {
      flush();
    }
  }
  flush();
  return tokens;
}

TfidfModel TfidfModel::fit(std::span<const Tokens> train_titles) {
  if (train_titles.empty()) throw Error("fit_tfidf: no training titles");
  TfidfModel model;
  std::vector<std::size_t> df;
  for (const auto& title : train_titles) {
    std::unordered_set<std::size_t> seen;
    for (const auto& token : title) {
      auto [it, inserted] = model.word_index_.emplace(token, model.words_.size());
      if (inserted) {
        model.words_.push_back(token);
        df.push_back(0);
      }
      if (seen.insert(it->second).second) ++df[it->second];
    }
  }
  const double n = static_cast<double>(train_titles.size());
  model.n_train_docs_ = train_titles.size();
  model.idf_.resize(df.size());
  for (std::size_t i = 0; i < df.size(); ++i) {
    model.idf_[i] = std::log((1.0 + n) / (1.0 + static_cast<double>(df[i]))) + 1.0;
  }
  return model;
}

std::optional<std::size_t> TfidfModel::column(const std::string& token) const {
  auto it = word_index_.find(token);
  if (it == word_index_.end()) return std::nullopt;
  return it->second;
}

std::vector<SparseRealMatrix::Entry> TfidfModel::weights(const Tokens& title) const {
  std::map<std::size_t, double> counts;
  for (const auto& token : title) {
    if (auto col = column(token)) counts[*col] += 1.0;
  }
  std::vector<SparseRealMatrix::Entry> entries;
  entries.reserve(counts.size());
  for (const auto& [col, count] : counts) {
    entries.push_back({static_cast<std::uint32_t>(col), count * idf_[col]});
  }
  return entries;
}

SparseRealMatrix transform_tfidf(const TfidfModel& model, std::span<const Tokens> titles) {
  SparseRealMatrix out(model.vocabulary_size());
  for (const auto& title : titles) {
    auto entries = model.weights(title);
    double norm = 0.0;
    for (const auto& e : entries) norm += e.value * e.value;
    norm = std::sqrt(norm);
    if (norm > 0.0) {
      for (auto& e : entries) e.value /= norm;
    }
    out.push_row(entries);
  }
  return out;
}

EmbeddingTable EmbeddingTable::from_word2vec(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open embeddings '" + path.string() + "'");
  const std::string source = path.string();
  std::string line;
  if (!std::getline(in, line)) throw ParseError(source, 1, "missing 'n_words dim' header");
  std::size_t n_words = 0, dim = 0;
  {
    std::istringstream header(line);
    std::string extra;
    if (!(header >> n_words >> dim) || (header >> extra) || dim == 0) {
      throw ParseError(source, 1, "header must be 'n_words dim'");
    }
  }
  EmbeddingTable table;
  table.dim_ = dim;
  std::size_t lineno = 1;
  std::size_t n_rows = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string word;
    row >> word;
    std::vector<double> v;
    v.reserve(dim);
    std::string field;
    while (row >> field) {
      char* end = nullptr;
      const double x = std::strtod(field.c_str(), &end);
      if (end != field.c_str() + field.size() || !std::isfinite(x)) {
        throw ParseError(source, lineno, "non-numeric component '" + field + "'");
      }
      v.push_back(x);
    }
    if (v.size() != dim) {
      throw ParseError(source, lineno,
                       "expected " + std::to_string(dim) + " components, got " + std::to_string(v.size()));
    }
    table.vectors_[word] = std::move(v);
    ++n_rows;
  }
  if (n_rows != n_words) {
    throw ParseError(source, lineno,
                     "header announces " + std::to_string(n_words) + " words, file has " +
                         std::to_string(n_rows));
  }
  return table;
}

EmbeddingTable EmbeddingTable::hashed(std::size_t dim, std::uint64_t seed) {
  if (dim == 0) throw Error("hashed embeddings need dim >= 1");
  EmbeddingTable table;
  table.dim_ = dim;
  table.hashed_ = true;
  table.seed_ = seed;
  return table;
}

bool EmbeddingTable::lookup(const std::string& token, std::span<double> out) const {
  if (out.size() != dim_) throw ShapeError("EmbeddingTable::lookup: output length mismatch");
  if (!hashed_) {
    auto it = vectors_.find(token);
    if (it == vectors_.end()) return false;
    std::copy(it->second.begin(), it->second.end(), out.begin());
    return true;
  }
  // FNV-1a over the token bytes, then mixed with the table seed.
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : token) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  Rng rng(mix_seed(h, seed_));
  std::normal_distribution<double> normal;
  double norm = 0.0;
  do {
    norm = 0.0;
    for (auto& x : out) {
      x = normal(rng);
      norm += x * x;
    }
  } while (norm == 0.0);
  norm = std::sqrt(norm);
  for (auto& x : out) x /= norm;
  return true;
}

EmbeddingTable load_embeddings(const std::string& source) {
  constexpr std::string_view kPrefix = "builtin:hash:";
  if (source.starts_with(kPrefix)) {
    const std::string rest = source.substr(kPrefix.size());
    const auto colon = rest.find(':');
    try {
      if (colon == std::string::npos) throw std::invalid_argument("missing seed");
      std::size_t pos = 0;
      const auto dim = std::stoull(rest.substr(0, colon), &pos);
      if (pos != colon) throw std::invalid_argument("dim");
      const std::string seed_text = rest.substr(colon + 1);
      const auto seed = std::stoull(seed_text, &pos);
      if (pos != seed_text.size()) throw std::invalid_argument("seed");
      return EmbeddingTable::hashed(dim, seed);
    } catch (const std::logic_error&) {
      throw Error("embedding selector '" + source + "' is not builtin:hash:<dim>:<seed>");
    }
  }
  return EmbeddingTable::from_word2vec(source);
}

DenseMatrix embed_titles(const TfidfModel& tfidf, const EmbeddingTable& embeddings,
                         std::span<const Tokens> titles) {
  const std::size_t dim = embeddings.dim();
  DenseMatrix out(titles.size(), dim);
  std::vector<double> vec(dim);
  for (std::size_t r = 0; r < titles.size(); ++r) {
    auto row = out.row(r);
    for (const auto& e : tfidf.weights(titles[r])) {
      if (!embeddings.lookup(tfidf.words()[e.col], vec)) continue;
      for (std::size_t k = 0; k < dim; ++k) row[k] += e.value * vec[k];
    }
    double norm = 0.0;
    for (double x : row) norm += x * x;
    norm = std::sqrt(norm);
    if (norm > 0.0) {
      for (double& x : row) x /= norm;
    }
  }
  return out;
}

TitleFeatures featurize(const TfidfModel& tfidf, const EmbeddingTable& embeddings,
                        std::span<const Tokens> titles) {
  return {transform_tfidf(tfidf, titles), embed_titles(tfidf, embeddings, titles)};
}

}  // namespace aaerec
