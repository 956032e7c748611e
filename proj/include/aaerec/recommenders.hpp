#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "aaerec/linalg.hpp"
#include "aaerec/matrix.hpp"
#include "aaerec/neural.hpp"
#include "aaerec/textfeat.hpp"

namespace aaerec {

enum class ModelKind { Cooc, Svd, Mlp, Ae, Aae };

std::string to_string(ModelKind kind);
/// Throws ConfigError listing the valid names.
ModelKind parse_model_kind(const std::string& name);
const std::vector<ModelKind>& all_model_kinds();

struct FitInput {
  const SparseBinaryMatrix& x_train;
  const TitleFeatures* titles = nullptr;
  bool use_titles = false;
};

/// Models that are not multi-modal ignore `titles`.
struct PredictInput {
  const SparseBinaryMatrix& x_corrupted;
  const TitleFeatures* titles = nullptr;
};

/// m_test x n item scores; higher ranks first.
using ScoreMatrix = DenseMatrix;

struct NamedTensor {
  std::string name;
  DenseMatrix value;
};

class Checkpoint;

class Recommender {
 public:
  virtual ~Recommender() = default;
  virtual ModelKind kind() const = 0;
  virtual bool multimodal() const = 0;
  virtual std::size_t n_items() const = 0;
  virtual ScoreMatrix predict(const PredictInput& input) const = 0;
  virtual Checkpoint checkpoint() const = 0;
};

// ---------------------------------------------------------------------------

/// Item co-occurrence: scores = x * X_train^T X_train. The diagonal keeps
/// each item's occurrence count as its prior.
class CoocModel final : public Recommender {
 public:
  static CoocModel fit(const FitInput& input);

  ModelKind kind() const override { return ModelKind::Cooc; }
  bool multimodal() const override { return false; }
  std::size_t n_items() const override { return cooccurrence_.rows(); }
  ScoreMatrix predict(const PredictInput& input) const override;
  Checkpoint checkpoint() const override;
  static CoocModel restore(const Checkpoint& ckpt);

  const DenseMatrix& cooccurrence() const { return cooccurrence_; }

 private:
  DenseMatrix cooccurrence_;
};

struct SvdOptions {
  std::size_t rank = 1000;  // clipped to the feasible maximum
  std::uint64_t seed = 0;
};

/// Truncated SVD of [X_train | tfidf(titles)]; prediction projects the
/// (concatenated) test row onto the top right singular subspace and keeps
/// the item columns: scores = (row V) V^T.
class SvdModel final : public Recommender {
 public:
  static SvdModel fit(const FitInput& input, const SvdOptions& options = {});

  ModelKind kind() const override { return ModelKind::Svd; }
  bool multimodal() const override { return multimodal_; }
  std::size_t n_items() const override { return n_items_; }
  ScoreMatrix predict(const PredictInput& input) const override;
  Checkpoint checkpoint() const override;
  static SvdModel restore(const Checkpoint& ckpt);

  std::size_t rank() const { return vt_.rows(); }
  const std::vector<double>& singular_values() const { return sigma_; }

 private:
  std::size_t n_items_ = 0;
  std::size_t title_cols_ = 0;
  bool multimodal_ = false;
  std::vector<double> sigma_;
  DenseMatrix vt_;  // k x (n_items + title_cols)
};

struct NeuralOptions {
  std::size_t hidden_dim = 100;
  std::size_t code_dim = 50;
  double dropout_p = 0.2;
  AdamHyper adam{};
  std::size_t batch_size = 100;
  std::size_t epochs = 20;
  std::uint64_t seed = 0;
};

/// Per-epoch training snapshot handed to fit callbacks.
struct EpochReport {
  std::size_t epoch = 0;
  double reconstruction_loss = 0.0;  // mean over minibatches
  double discriminator_loss = 0.0;   // AAE only
  double generator_loss = 0.0;       // AAE only
  const Mlp2* encoder = nullptr;     // null for the title MLP
  const Mlp2* decoder = nullptr;     // the title MLP reports its network here
};
using EpochCallback = std::function<void(const EpochReport&)>;

/// Title-only MLP-2: embedded title -> sigmoid item scores, trained with BCE.
/// Prediction ignores the corrupted item rows.
class MlpModel final : public Recommender {
 public:
  static MlpModel fit(const FitInput& input, const NeuralOptions& options = {},
                      const EpochCallback& on_epoch = {});

  ModelKind kind() const override { return ModelKind::Mlp; }
  bool multimodal() const override { return true; }
  std::size_t n_items() const override { return net_.out_dim(); }
  ScoreMatrix predict(const PredictInput& input) const override;
  Checkpoint checkpoint() const override;
  static MlpModel restore(const Checkpoint& ckpt);

  const Mlp2& network() const { return net_; }

 private:
  Mlp2 net_;
};

/// Undercomplete autoencoder: r = dec([enc(x); s]) where the title part s is
/// present only for multi-modal models.
class AeModel final : public Recommender {
 public:
  static AeModel fit(const FitInput& input, const NeuralOptions& options = {},
                     const EpochCallback& on_epoch = {});

  ModelKind kind() const override { return ModelKind::Ae; }
  bool multimodal() const override { return title_dim_ > 0; }
  std::size_t n_items() const override { return encoder_.in_dim(); }
  ScoreMatrix predict(const PredictInput& input) const override;
  Checkpoint checkpoint() const override;
  static AeModel restore(const Checkpoint& ckpt);

  const Mlp2& encoder() const { return encoder_; }
  const Mlp2& decoder() const { return decoder_; }
  DenseMatrix encode(const SparseBinaryMatrix& x) const;

 private:
  Mlp2 encoder_;
  Mlp2 decoder_;
  std::size_t title_dim_ = 0;
};

struct AaeOptions {
  NeuralOptions neural{};
  /// Discriminator and generator phases. Off reduces training to the plain
  /// autoencoder.
  bool adversarial = true;
};

/// Adversarial autoencoder. Each minibatch runs, in order: reconstruction
/// (encoder + decoder on BCE), discriminator (N(0, I) samples vs codes), and
/// generator (encoder only, pushing D(code) towards 1). Titles reach the
/// decoder only; the discriminator sees codes alone.
class AaeModel final : public Recommender {
 public:
  static AaeModel fit(const FitInput& input, const AaeOptions& options = {},
                      const EpochCallback& on_epoch = {});

  ModelKind kind() const override { return ModelKind::Aae; }
  bool multimodal() const override { return title_dim_ > 0; }
  std::size_t n_items() const override { return encoder_.in_dim(); }
  ScoreMatrix predict(const PredictInput& input) const override;
  Checkpoint checkpoint() const override;
  static AaeModel restore(const Checkpoint& ckpt);

  const Mlp2& encoder() const { return encoder_; }
  const Mlp2& decoder() const { return decoder_; }
  const Mlp2& discriminator() const { return discriminator_; }
  std::size_t code_dim() const { return encoder_.out_dim(); }

  /// Eval-mode codes for the given item rows.
  DenseMatrix encode(const SparseBinaryMatrix& x) const;
  /// Eval-mode discriminator output for codes.
  DenseMatrix discriminate(const DenseMatrix& codes) const;

 private:
  Mlp2 encoder_;
  Mlp2 decoder_;
  Mlp2 discriminator_;
  std::size_t title_dim_ = 0;
};

struct ModelSettings {
  NeuralOptions neural{};
  std::size_t svd_rank = 1000;
};

/// Fits `kind` with the given seed; used by the experiment runner.
std::unique_ptr<Recommender> fit_model(ModelKind kind, const FitInput& input,
                                       const ModelSettings& settings, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Checkpoints

/// Self-describing model container: model name, the settings that produced
/// it, and every parameter tensor by name and shape. Stored as JSON; doubles
/// are written in shortest round-trip form so save/load is bit-exact.
class Checkpoint {
 public:
  std::string model;
  std::vector<std::pair<std::string, std::string>> config;  // ordered key/value
  std::vector<NamedTensor> tensors;

  const DenseMatrix& tensor(const std::string& name) const;
  const std::string& setting(const std::string& key) const;

  std::string serialize() const;
  static Checkpoint parse(const std::string& text);

  void save(const std::filesystem::path& path) const;
  static Checkpoint load(const std::filesystem::path& path);
};

std::unique_ptr<Recommender> restore_model(const Checkpoint& ckpt);

}  // namespace aaerec
