#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "aaerec/corpus.hpp"
#include "aaerec/matrix.hpp"
#include "aaerec/recommenders.hpp"

namespace aaerec {

/// Test rows with exactly one known item removed per row.
struct CorruptedTestSet {
  SparseBinaryMatrix x_corrupted;
  std::vector<std::uint32_t> omitted;  // removed column per row

  friend bool operator==(const CorruptedTestSet&, const CorruptedTestSet&) = default;
};

/// Removes one uniformly chosen nonzero from every row. Rows with fewer than
/// two items throw.
CorruptedTestSet corrupt(const SparseBinaryMatrix& x_test, std::uint64_t seed);

/// 1 / rank of `omitted`, where rank counts strictly higher scores plus equal
/// scores at lower indices. Known items are not masked.
double reciprocal_rank(std::span<const double> scores, std::size_t omitted);

/// Mean reciprocal rank over the rows of `scores`.
double mrr(const ScoreMatrix& scores, const CorruptedTestSet& corrupted);

enum class Modality { Items, Titles, Both };

std::string to_string(Modality m);
Modality parse_modality(const std::string& s);

/// One fitted configuration. cooc only sees items and the MLP only titles,
/// so their modality is forced; svd, ae and aae run on items or both.
struct ModelRun {
  ModelKind kind;
  Modality modality;

  friend bool operator==(const ModelRun&, const ModelRun&) = default;
};

/// Expands models x requested modalities into distinct runs, dropping
/// combinations a model cannot serve. Throws ConfigError if a requested model
/// ends up with no run at all.
std::vector<ModelRun> plan_model_runs(std::span<const ModelKind> models,
                                      std::span<const Modality> modalities);

struct ExperimentConfig {
  std::filesystem::path ratings;
  std::filesystem::path meta;
  int split_year = 0;
  std::vector<int> alphas{1};
  std::vector<ModelKind> models = all_model_kinds();
  std::vector<Modality> modalities{Modality::Both};
  std::size_t runs = 3;
  std::uint64_t seed = 1;
  std::size_t epochs = 20;
  std::string embeddings = "builtin:hash:50:1";
  std::filesystem::path out;
  std::size_t svd_rank = 1000;
  std::size_t batch_size = 100;

  /// Throws ConfigError on an empty alpha list, zero runs and the like.
  void validate() const;
};

struct RunResult {
  ModelKind model = ModelKind::Cooc;
  Modality modality = Modality::Items;
  int alpha = 0;
  std::size_t run = 0;
  std::uint64_t seed = 0;
  double mrr = 0.0;
  double wall_time_s = 0.0;
};

struct CellEvent {
  int alpha = 0;
  std::size_t run = 0;
  ModelRun model;
  const CorruptedTestSet* corrupted = nullptr;
  const PruningReport* train_report = nullptr;
};

struct ExperimentHooks {
  /// Called after every fit/predict with the corruption it was scored on.
  std::function<void(const CellEvent&)> on_scored;
  /// Progress lines.
  std::function<void(const std::string&)> log;
};

/// For each alpha the corpus is split and pruned once; run r corrupts the
/// test rows with seed + r and every model is fitted (with the same seed)
/// and scored against that one corruption.
std::vector<RunResult> run_experiment(const ExperimentConfig& config, const ExperimentHooks& hooks = {});

inline constexpr const char* kResultsHeader = "model,modality,alpha,run,seed,mrr,wall_time_s";

/// Header line plus one row per result, '\n' terminated.
std::string results_csv(std::span<const RunResult> results);

}  // namespace aaerec
