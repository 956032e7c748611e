#include "aaerec/evalharness.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <optional>

#include "aaerec/corpus.hpp"
#include "aaerec/error.hpp"
#include "aaerec/random.hpp"
#include "aaerec/textfeat.hpp"

namespace aaerec {

CorruptedTestSet corrupt(const SparseBinaryMatrix& x_test, std::uint64_t seed) {
  Rng rng(seed);
  CorruptedTestSet out;
  out.omitted.reserve(x_test.rows());
  std::vector<std::vector<std::uint32_t>> rows(x_test.rows());
  for (std::size_t r = 0; r < x_test.rows(); ++r) {
    auto row = x_test.row(r);
    if (row.size() < 2) {
      throw Error("corrupt: test row " + std::to_string(r) + " has " + std::to_string(row.size()) +
                  " items, need at least 2");
    }
    const std::size_t drop = uniform_index(rng, row.size());
    out.omitted.push_back(row[drop]);
    for (std::size_t k = 0; k < row.size(); ++k)
      if (k != drop) rows[r].push_back(row[k]);
  }
  out.x_corrupted = SparseBinaryMatrix::from_rows(x_test.cols(), rows);
  return out;
}

double reciprocal_rank(std::span<const double> scores, std::size_t omitted) {
  if (omitted >= scores.size()) {
    throw Error("reciprocal_rank: omitted index " + std::to_string(omitted) + " out of range for " +
                std::to_string(scores.size()) + " scores");
  }
  const double target = scores[omitted];
  std::size_t rank = 1;
  for (std::size_t j = 0; j < scores.size(); ++j) {
    if (scores[j] > target || (j < omitted && scores[j] == target)) ++rank;
  }
  return 1.0 / static_cast<double>(rank);
}

double mrr(const ScoreMatrix& scores, const CorruptedTestSet& corrupted) {
  if (scores.rows() != corrupted.omitted.size()) {
    throw ShapeError("mrr: " + std::to_string(scores.rows()) + " score rows for " +
                     std::to_string(corrupted.omitted.size()) + " corrupted rows");
  }
  if (scores.rows() == 0) throw Error("mrr: no rows");
  double sum = 0.0;
  for (std::size_t r = 0; r < scores.rows(); ++r) sum += reciprocal_rank(scores.row(r), corrupted.omitted[r]);
  return sum / static_cast<double>(scores.rows());
}

std::string to_string(Modality m) {
  switch (m) {
    case Modality::Items: return "items";
    case Modality::Titles: return "titles";
    case Modality::Both: return "both";
  }
  return "?";
}

Modality parse_modality(const std::string& s) {
  if (s == "items") return Modality::Items;
  if (s == "titles") return Modality::Titles;
  if (s == "both") return Modality::Both;
  throw ConfigError("unknown modality '" + s + "' (valid: items, titles, both)");
}

std::vector<ModelRun> plan_model_runs(std::span<const ModelKind> models,
                                      std::span<const Modality> modalities) {
  std::vector<ModelRun> runs;
  for (auto kind : models) {
    bool any = false;
    for (auto requested : modalities) {
      std::optional<Modality> effective;
      switch (kind) {
        case ModelKind::Cooc:
          if (requested != Modality::Titles) effective = Modality::Items;
          break;
        case ModelKind::Mlp: effective = Modality::Titles; break;
        default:
          if (requested != Modality::Titles) effective = requested;
          break;
      }
      if (!effective) continue;
      any = true;
      ModelRun run{kind, *effective};
      if (std::find(runs.begin(), runs.end(), run) == runs.end()) runs.push_back(run);
    }
    if (!any) {
      throw ConfigError("model '" + to_string(kind) + "' cannot run on the requested modality");
    }
  }
  return runs;
}

void ExperimentConfig::validate() const {
  if (alphas.empty()) throw ConfigError("alphas: list is empty");
  for (int a : alphas)
    if (a < 1) throw ConfigError("alphas: threshold " + std::to_string(a) + " is below 1");
  if (models.empty()) throw ConfigError("models: list is empty");
  if (modalities.empty()) throw ConfigError("modality: list is empty");
  if (runs < 1) throw ConfigError("runs: must be >= 1");
  if (epochs < 1) throw ConfigError("epochs: must be >= 1");
  if (batch_size < 1) throw ConfigError("batch_size: must be >= 1");
  if (svd_rank < 1) throw ConfigError("svd_rank: must be >= 1");
}

namespace {

std::vector<Tokens> tokenize_titles(const Corpus& corpus) {
  std::vector<Tokens> out;
  out.reserve(corpus.size());
  for (const auto& doc : corpus.documents()) out.push_back(tokenize(doc.title));
  return out;
}

std::string context(int alpha, std::size_t run, const ModelRun& m) {
  return "alpha=" + std::to_string(alpha) + " run=" + std::to_string(run) + " model=" +
         to_string(m.kind) + "/" + to_string(m.modality);
}

}  // namespace

std::vector<RunResult> run_experiment(const ExperimentConfig& config, const ExperimentHooks& hooks) {
  config.validate();
  const auto plan = plan_model_runs(config.models, config.modalities);
  auto log = [&](const std::string& line) {
    if (hooks.log) hooks.log(line);
  };

  const Corpus corpus = load_corpus(config.ratings, config.meta);
  const SplitCorpus split = time_split(corpus, config.split_year);
  const EmbeddingTable embeddings = load_embeddings(config.embeddings);
  log("loaded " + std::to_string(corpus.size()) + " documents, " + std::to_string(corpus.n_items()) +
      " items; " + std::to_string(split.train.size()) + " train / " + std::to_string(split.test.size()) +
      " test at year " + std::to_string(config.split_year));

  ModelSettings settings;
  settings.neural.epochs = config.epochs;
  settings.neural.batch_size = config.batch_size;
  settings.svd_rank = config.svd_rank;

  std::vector<RunResult> results;
  for (int alpha : config.alphas) {
    PrunedSplit pruned;
    try {
      pruned = prune(split, alpha);
    } catch (const Error& e) {
      throw Error("alpha=" + std::to_string(alpha) + ": " + e.what());
    }
    const auto& tr = pruned.train_report;
    char buf[160];
    std::snprintf(buf, sizeof buf, "alpha=%d: %zu items, %zu train docs, %zu test docs, density %.6f",
                  alpha, tr.n_items, tr.n_documents, pruned.test_report.n_documents, tr.density);
    log(buf);

    const SparseBinaryMatrix x_train = to_matrix(pruned.split.train);
    const SparseBinaryMatrix x_test = to_matrix(pruned.split.test);
    const auto train_tokens = tokenize_titles(pruned.split.train);
    const auto test_tokens = tokenize_titles(pruned.split.test);
    const TfidfModel tfidf = TfidfModel::fit(train_tokens);
    const TitleFeatures train_titles = featurize(tfidf, embeddings, train_tokens);
    const TitleFeatures test_titles = featurize(tfidf, embeddings, test_tokens);

    for (std::size_t run = 0; run < config.runs; ++run) {
      const std::uint64_t seed = config.seed + run;
      const CorruptedTestSet corrupted = corrupt(x_test, seed);
      for (const auto& m : plan) {
        try {
          const auto start = std::chrono::steady_clock::now();
          FitInput fit{x_train, &train_titles, m.modality != Modality::Items};
          auto model = fit_model(m.kind, fit, settings, seed);
          const ScoreMatrix scores = model->predict({corrupted.x_corrupted, &test_titles});
          const double score = mrr(scores, corrupted);
          const double elapsed =
              std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
          results.push_back({m.kind, m.modality, alpha, run, seed, score, elapsed});
          if (hooks.on_scored) hooks.on_scored({alpha, run, m, &corrupted, &pruned.train_report});
          std::snprintf(buf, sizeof buf, "%s: mrr %.4f (%.1f s)", context(alpha, run, m).c_str(), score,
                        elapsed);
          log(buf);
        } catch (const Error& e) {
          throw Error(context(alpha, run, m) + ": " + e.what());
        }
      }
    }
  }
  return results;
}

std::string results_csv(std::span<const RunResult> results) {
  std::string out = std::string(kResultsHeader) + "\n";
  char buf[256];
  for (const auto& r : results) {
    std::snprintf(buf, sizeof buf, "%s,%s,%d,%zu,%llu,%.10g,%.1f\n", to_string(r.model).c_str(),
                  to_string(r.modality).c_str(), r.alpha, r.run, static_cast<unsigned long long>(r.seed),
                  r.mrr, r.wall_time_s);
    out += buf;
  }
  return out;
}

}  // namespace aaerec
