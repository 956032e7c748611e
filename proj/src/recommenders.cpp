#include "aaerec/recommenders.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "aaerec/error.hpp"

namespace aaerec {

std::string to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::Cooc: return "cooc";
    case ModelKind::Svd: return "svd";
    case ModelKind::Mlp: return "mlp";
    case ModelKind::Ae: return "ae";
    case ModelKind::Aae: return "aae";
  }
  return "?";
}

const std::vector<ModelKind>& all_model_kinds() {
  static const std::vector<ModelKind> kinds = {ModelKind::Cooc, ModelKind::Svd, ModelKind::Mlp,
                                               ModelKind::Ae, ModelKind::Aae};
  return kinds;
}

ModelKind parse_model_kind(const std::string& name) {
  for (auto k : all_model_kinds())
    if (to_string(k) == name) return k;
  throw ConfigError("unknown model '" + name + "' (valid: cooc, svd, mlp, ae, aae)");
}

namespace {

constexpr std::size_t kPredictChunk = 1024;

DenseMatrix gather_rows(const SparseBinaryMatrix& x, std::span<const std::size_t> idx) {
  DenseMatrix out(idx.size(), x.cols());
  for (std::size_t r = 0; r < idx.size(); ++r)
    for (auto c : x.row(idx[r])) out(r, c) = 1.0;
  return out;
}

DenseMatrix gather_rows(const DenseMatrix& m, std::span<const std::size_t> idx) {
  DenseMatrix out(idx.size(), m.cols());
  for (std::size_t r = 0; r < idx.size(); ++r) {
    auto src = m.row(idx[r]);
    std::copy(src.begin(), src.end(), out.row(r).begin());
  }
  return out;
}

std::vector<std::size_t> iota_indices(std::size_t begin, std::size_t end) {
  std::vector<std::size_t> idx(end - begin);
  std::iota(idx.begin(), idx.end(), begin);
  return idx;
}

/// Embedded title rows, checked against the expected row count.
const DenseMatrix& embedded_titles(const TitleFeatures* titles, std::size_t rows,
                                   const std::string& who) {
  if (titles == nullptr) throw Error(who + ": title features are required");
  if (titles->embedded.rows() != rows) {
    throw ShapeError(who + ": " + std::to_string(titles->embedded.rows()) + " title rows for " +
                     std::to_string(rows) + " item rows");
  }
  return titles->embedded;
}

void check_item_space(const SparseBinaryMatrix& x, std::size_t n_items, const std::string& who) {
  if (x.cols() != n_items) {
    throw ShapeError(who + ": input has " + std::to_string(x.cols()) + " item columns, model has " +
                     std::to_string(n_items));
  }
}

std::vector<std::span<double>> join_params(Mlp2& a, Mlp2& b) {
  auto p = a.parameters();
  auto q = b.parameters();
  p.insert(p.end(), q.begin(), q.end());
  return p;
}

std::vector<std::span<const double>> join_grads(const Mlp2Gradients& a, const Mlp2Gradients& b) {
  auto p = a.tensors();
  auto q = b.tensors();
  p.insert(p.end(), q.begin(), q.end());
  return p;
}

void check_finite(double loss, const char* phase) {
  if (!std::isfinite(loss)) {
    throw DivergenceError(std::string(phase) + " phase: non-finite loss");
  }
}

// Runs one Adam update, relabelling divergence with the phase name.
void guarded_step(AdamState& state, std::span<const std::span<double>> params,
                  std::span<const std::span<const double>> grads, const char* phase) {
  try {
    state.step(params, grads);
  } catch (const DivergenceError& e) {
    throw DivergenceError(std::string(phase) + " phase: " + e.what());
  }
}

/// Encoder + decoder trained on reconstruction BCE. Shared by AE and AAE so
/// that the AAE without adversarial phases is the AE exactly.
struct AutoencoderTrainer {
  Mlp2 encoder;
  Mlp2 decoder;
  AdamState state;
  std::size_t title_dim = 0;

  AutoencoderTrainer(std::size_t n_items, std::size_t title_dim_, const NeuralOptions& o, Rng& rng)
      : title_dim(title_dim_) {
    if (o.code_dim >= o.hidden_dim) {
      throw Error("autoencoder: code size " + std::to_string(o.code_dim) +
                  " must be smaller than the hidden size " + std::to_string(o.hidden_dim));
    }
    encoder = init_mlp2(n_items, o.hidden_dim, o.code_dim, Activation::Linear, o.dropout_p, rng);
    decoder = init_mlp2(o.code_dim + title_dim, o.hidden_dim, n_items, Activation::Sigmoid,
                        o.dropout_p, rng);
    auto params = join_params(encoder, decoder);
    state = AdamState::for_parameters(params, o.adam);
  }

  double reconstruction_step(const DenseMatrix& x, const DenseMatrix* titles, Rng& rng) {
    auto enc = forward(encoder, x, Mode::Train, &rng);
    DenseMatrix dec_in = titles ? hconcat(enc.output, *titles) : enc.output;
    auto dec = forward(decoder, dec_in, Mode::Train, &rng);
    auto loss = bce(dec.output, x);
    check_finite(loss.loss, "reconstruction");
    auto dec_back = backward(decoder, *dec.cache, loss.grad);
    DenseMatrix grad_code = titles ? column_slice(dec_back.grad_input, 0, encoder.out_dim())
                                   : std::move(dec_back.grad_input);
    auto enc_back = backward(encoder, *enc.cache, grad_code);
    auto params = join_params(encoder, decoder);
    auto grads = join_grads(enc_back.grads, dec_back.grads);
    guarded_step(state, params, grads, "reconstruction");
    return loss.loss;
  }
};

DenseMatrix autoencoder_scores(const Mlp2& encoder, const Mlp2& decoder, std::size_t title_dim,
                               const PredictInput& input, const std::string& who) {
  const auto& x = input.x_corrupted;
  check_item_space(x, encoder.in_dim(), who);
  const DenseMatrix* titles = nullptr;
  if (title_dim > 0) {
    titles = &embedded_titles(input.titles, x.rows(), who);
    if (titles->cols() != title_dim) {
      throw ShapeError(who + ": title dimension " + std::to_string(titles->cols()) +
                       " differs from the fitted " + std::to_string(title_dim));
    }
  }
  DenseMatrix scores(x.rows(), encoder.in_dim());
  for (std::size_t begin = 0; begin < x.rows(); begin += kPredictChunk) {
    const auto idx = iota_indices(begin, std::min(x.rows(), begin + kPredictChunk));
    DenseMatrix code = infer(encoder, gather_rows(x, idx));
    DenseMatrix dec_in = titles ? hconcat(code, gather_rows(*titles, idx)) : std::move(code);
    DenseMatrix r = infer(decoder, dec_in);
    for (std::size_t i = 0; i < idx.size(); ++i) {
      std::copy(r.row(i).begin(), r.row(i).end(), scores.row(idx[i]).begin());
    }
  }
  return scores;
}

std::vector<std::vector<std::size_t>> epoch_batches(std::size_t m, std::size_t batch_size, Rng& rng) {
  std::vector<std::size_t> perm = iota_indices(0, m);
  shuffle(perm, rng);
  std::vector<std::vector<std::size_t>> batches;
  for (std::size_t b = 0; b < m; b += batch_size) {
    batches.emplace_back(perm.begin() + static_cast<std::ptrdiff_t>(b),
                         perm.begin() + static_cast<std::ptrdiff_t>(std::min(m, b + batch_size)));
  }
  return batches;
}

void check_training_options(const NeuralOptions& o, const SparseBinaryMatrix& x, const char* who) {
  if (o.batch_size == 0) throw Error(std::string(who) + ": batch size must be >= 1");
  if (x.rows() == 0) throw Error(std::string(who) + ": no training rows");
}

}  // namespace

// ---------------------------------------------------------------------------
// Co-occurrence

CoocModel CoocModel::fit(const FitInput& input) {
  CoocModel model;
  model.cooccurrence_ = gram(input.x_train);
  return model;
}

ScoreMatrix CoocModel::predict(const PredictInput& input) const {
  check_item_space(input.x_corrupted, n_items(), "cooc");
  return spmm(input.x_corrupted, cooccurrence_);
}

// ---------------------------------------------------------------------------
// SVD

namespace {

DenseMatrix concatenated_rows(const SparseBinaryMatrix& x, const SparseRealMatrix* tfidf) {
  const std::size_t cols = x.cols() + (tfidf ? tfidf->cols() : 0);
  if (x.rows() * cols > kMaxDenseElements) {
    throw CapacityError("svd: " + std::to_string(x.rows()) + "x" + std::to_string(cols) +
                        " exceeds the dense limit of " + std::to_string(kMaxDenseElements) +
                        " elements");
  }
  DenseMatrix a(x.rows(), cols);
  for (std::size_t r = 0; r < x.rows(); ++r) {
    for (auto c : x.row(r)) a(r, c) = 1.0;
    if (tfidf) {
      for (const auto& e : tfidf->row(r)) a(r, x.cols() + e.col) = e.value;
    }
  }
  return a;
}

}  // namespace

SvdModel SvdModel::fit(const FitInput& input, const SvdOptions& options) {
  const auto& x = input.x_train;
  const SparseRealMatrix* tfidf = nullptr;
  if (input.use_titles) {
    if (input.titles == nullptr) throw Error("svd: title features are required");
    if (input.titles->tfidf.rows() != x.rows()) throw ShapeError("svd: title rows do not match");
    tfidf = &input.titles->tfidf;
  }
  DenseMatrix a = concatenated_rows(x, tfidf);
  const std::size_t k = std::min(options.rank, std::min(a.rows(), a.cols()));
  if (k == 0) throw Error("svd: empty training matrix");
  SvdFactors f = truncated_svd(a, k, options.seed);

  SvdModel model;
  model.n_items_ = x.cols();
  model.title_cols_ = tfidf ? tfidf->cols() : 0;
  model.multimodal_ = tfidf != nullptr;
  model.sigma_ = std::move(f.sigma);
  model.vt_ = std::move(f.vt);
  return model;
}

ScoreMatrix SvdModel::predict(const PredictInput& input) const {
  const auto& x = input.x_corrupted;
  check_item_space(x, n_items_, "svd");
  const SparseRealMatrix* tfidf = nullptr;
  if (multimodal_) {
    if (input.titles == nullptr) throw Error("svd: multi-modal model needs test title features");
    if (input.titles->tfidf.rows() != x.rows() || input.titles->tfidf.cols() != title_cols_) {
      throw ShapeError("svd: test title features do not match the fitted vocabulary");
    }
    tfidf = &input.titles->tfidf;
  }
  DenseMatrix rows = concatenated_rows(x, tfidf);
  DenseMatrix projected = matmul_nt(rows, vt_);  // m x k
  DenseMatrix vt_items = column_slice(vt_, 0, n_items_);
  return matmul(projected, vt_items);
}

// ---------------------------------------------------------------------------
// Title MLP

MlpModel MlpModel::fit(const FitInput& input, const NeuralOptions& o, const EpochCallback& on_epoch) {
  const auto& x = input.x_train;
  check_training_options(o, x, "mlp");
  const DenseMatrix& s = embedded_titles(input.titles, x.rows(), "mlp");

  Rng rng(mix_seed(o.seed, 0));
  MlpModel model;
  model.net_ = init_mlp2(s.cols(), o.hidden_dim, x.cols(), Activation::Sigmoid, o.dropout_p, rng);
  AdamState state = AdamState::for_parameters(model.net_.parameters(), o.adam);

  for (std::size_t epoch = 0; epoch < o.epochs; ++epoch) {
    double total = 0.0;
    const auto batches = epoch_batches(x.rows(), o.batch_size, rng);
    for (const auto& idx : batches) {
      DenseMatrix target = gather_rows(x, idx);
      auto fwd = forward(model.net_, gather_rows(s, idx), Mode::Train, &rng);
      auto loss = bce(fwd.output, target);
      check_finite(loss.loss, "mlp");
      auto back = backward(model.net_, *fwd.cache, loss.grad);
      auto params = model.net_.parameters();
      auto grads = back.grads.tensors();
      guarded_step(state, params, grads, "mlp");
      total += loss.loss;
    }
    if (on_epoch) {
      EpochReport report;
      report.epoch = epoch;
      report.reconstruction_loss = total / static_cast<double>(batches.size());
      report.decoder = &model.net_;
      on_epoch(report);
    }
  }
  return model;
}

ScoreMatrix MlpModel::predict(const PredictInput& input) const {
  check_item_space(input.x_corrupted, n_items(), "mlp");
  const DenseMatrix& s = embedded_titles(input.titles, input.x_corrupted.rows(), "mlp");
  if (s.cols() != net_.in_dim()) {
    throw ShapeError("mlp: title dimension " + std::to_string(s.cols()) + " differs from the fitted " +
                     std::to_string(net_.in_dim()));
  }
  return infer(net_, s);
}

// ---------------------------------------------------------------------------
// Autoencoders

AeModel AeModel::fit(const FitInput& input, const NeuralOptions& o, const EpochCallback& on_epoch) {
  const auto& x = input.x_train;
  check_training_options(o, x, "ae");
  const DenseMatrix* s = input.use_titles ? &embedded_titles(input.titles, x.rows(), "ae") : nullptr;

  Rng rng(mix_seed(o.seed, 0));
  AutoencoderTrainer trainer(x.cols(), s ? s->cols() : 0, o, rng);
  for (std::size_t epoch = 0; epoch < o.epochs; ++epoch) {
    double total = 0.0;
    const auto batches = epoch_batches(x.rows(), o.batch_size, rng);
    for (const auto& idx : batches) {
      DenseMatrix sb = s ? gather_rows(*s, idx) : DenseMatrix{};
      total += trainer.reconstruction_step(gather_rows(x, idx), s ? &sb : nullptr, rng);
    }
    if (on_epoch) {
      EpochReport report;
      report.epoch = epoch;
      report.reconstruction_loss = total / static_cast<double>(batches.size());
      report.encoder = &trainer.encoder;
      report.decoder = &trainer.decoder;
      on_epoch(report);
    }
  }
  AeModel model;
  model.encoder_ = std::move(trainer.encoder);
  model.decoder_ = std::move(trainer.decoder);
  model.title_dim_ = trainer.title_dim;
  return model;
}

ScoreMatrix AeModel::predict(const PredictInput& input) const {
  return autoencoder_scores(encoder_, decoder_, title_dim_, input, "ae");
}

DenseMatrix AeModel::encode(const SparseBinaryMatrix& x) const {
  check_item_space(x, n_items(), "ae");
  return infer(encoder_, x.to_dense());
}

AaeModel AaeModel::fit(const FitInput& input, const AaeOptions& options, const EpochCallback& on_epoch) {
  const auto& o = options.neural;
  const auto& x = input.x_train;
  check_training_options(o, x, "aae");
  const DenseMatrix* s = input.use_titles ? &embedded_titles(input.titles, x.rows(), "aae") : nullptr;

  // Two streams: the reconstruction path consumes exactly what AeModel::fit
  // consumes, the adversarial phases draw from their own.
  Rng rng(mix_seed(o.seed, 0));
  Rng adv_rng(mix_seed(o.seed, 1));
  AutoencoderTrainer trainer(x.cols(), s ? s->cols() : 0, o, rng);
  Mlp2 disc = init_mlp2(o.code_dim, o.hidden_dim, 1, Activation::Sigmoid, o.dropout_p, adv_rng);
  AdamState disc_state = AdamState::for_parameters(disc.parameters(), o.adam);
  AdamState gen_state = AdamState::for_parameters(trainer.encoder.parameters(), o.adam);

  for (std::size_t epoch = 0; epoch < o.epochs; ++epoch) {
    double rec_total = 0.0, disc_total = 0.0, gen_total = 0.0;
    const auto batches = epoch_batches(x.rows(), o.batch_size, rng);
    for (const auto& idx : batches) {
      DenseMatrix xb = gather_rows(x, idx);
      DenseMatrix sb = s ? gather_rows(*s, idx) : DenseMatrix{};
      rec_total += trainer.reconstruction_step(xb, s ? &sb : nullptr, rng);
      if (!options.adversarial) continue;

      // Discriminator: prior samples are real (1), codes are fake (0).
      {
        DenseMatrix codes = forward(trainer.encoder, xb, Mode::Train, &adv_rng).output;
        DenseMatrix prior = sample_gaussian(xb.rows(), o.code_dim, adv_rng);
        auto real = forward(disc, prior, Mode::Train, &adv_rng);
        auto fake = forward(disc, codes, Mode::Train, &adv_rng);
        auto real_loss = bce(real.output, DenseMatrix(xb.rows(), 1, 1.0));
        auto fake_loss = bce(fake.output, DenseMatrix(xb.rows(), 1, 0.0));
        const double loss = real_loss.loss + fake_loss.loss;
        check_finite(loss, "discriminator");
        auto real_back = backward(disc, *real.cache, real_loss.grad);
        auto fake_back = backward(disc, *fake.cache, fake_loss.grad);
        Mlp2Gradients sum = std::move(real_back.grads);
        for (std::size_t i = 0; i < 3; ++i) {
          auto dst = sum.w[i].values();
          auto src = fake_back.grads.w[i].values();
          for (std::size_t k = 0; k < dst.size(); ++k) dst[k] += src[k];
          for (std::size_t k = 0; k < sum.b[i].size(); ++k) sum.b[i][k] += fake_back.grads.b[i][k];
        }
        auto params = disc.parameters();
        auto grads = sum.tensors();
        guarded_step(disc_state, params, grads, "discriminator");
        disc_total += loss;
      }
      // Generator: encoder alone, pushing D(code) towards "real".
      {
        auto enc = forward(trainer.encoder, xb, Mode::Train, &adv_rng);
        auto judged = forward(disc, enc.output, Mode::Train, &adv_rng);
        auto loss = bce(judged.output, DenseMatrix(xb.rows(), 1, 1.0));
        check_finite(loss.loss, "generator");
        auto disc_back = backward(disc, *judged.cache, loss.grad);
        auto enc_back = backward(trainer.encoder, *enc.cache, disc_back.grad_input);
        auto params = trainer.encoder.parameters();
        auto grads = enc_back.grads.tensors();
        guarded_step(gen_state, params, grads, "generator");
        gen_total += loss.loss;
      }
    }
    if (on_epoch) {
      const double nb = static_cast<double>(batches.size());
      EpochReport report;
      report.epoch = epoch;
      report.reconstruction_loss = rec_total / nb;
      report.discriminator_loss = disc_total / nb;
      report.generator_loss = gen_total / nb;
      report.encoder = &trainer.encoder;
      report.decoder = &trainer.decoder;
      on_epoch(report);
    }
  }
  AaeModel model;
  model.encoder_ = std::move(trainer.encoder);
  model.decoder_ = std::move(trainer.decoder);
  model.discriminator_ = std::move(disc);
  model.title_dim_ = trainer.title_dim;
  return model;
}

ScoreMatrix AaeModel::predict(const PredictInput& input) const {
  return autoencoder_scores(encoder_, decoder_, title_dim_, input, "aae");
}

DenseMatrix AaeModel::encode(const SparseBinaryMatrix& x) const {
  check_item_space(x, n_items(), "aae");
  return infer(encoder_, x.to_dense());
}

DenseMatrix AaeModel::discriminate(const DenseMatrix& codes) const {
  return infer(discriminator_, codes);
}

// ---------------------------------------------------------------------------

std::unique_ptr<Recommender> fit_model(ModelKind kind, const FitInput& input,
                                       const ModelSettings& settings, std::uint64_t seed) {
  NeuralOptions neural = settings.neural;
  neural.seed = seed;
  switch (kind) {
    case ModelKind::Cooc: return std::make_unique<CoocModel>(CoocModel::fit(input));
    case ModelKind::Svd:
      return std::make_unique<SvdModel>(SvdModel::fit(input, {settings.svd_rank, seed}));
    case ModelKind::Mlp: return std::make_unique<MlpModel>(MlpModel::fit(input, neural));
    case ModelKind::Ae: return std::make_unique<AeModel>(AeModel::fit(input, neural));
    case ModelKind::Aae: return std::make_unique<AaeModel>(AaeModel::fit(input, {neural, true}));
  }
  throw Error("fit_model: unknown model kind");
}

}  // namespace aaerec
