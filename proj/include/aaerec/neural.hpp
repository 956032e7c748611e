#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "aaerec/matrix.hpp"
#include "aaerec/random.hpp"

namespace aaerec {

enum class Activation { Linear, Relu, Sigmoid };
enum class Mode { Train, Eval };

std::string to_string(Activation a);
Activation parse_activation(const std::string& s);

/// out = f(in * w + b), followed by inverted dropout in training mode.
struct DenseLayer {
  DenseMatrix w;          // in x out
  std::vector<double> b;  // out
  Activation activation = Activation::Linear;
  double dropout_p = 0.0;

  std::size_t in_dim() const { return w.rows(); }
  std::size_t out_dim() const { return w.cols(); }
};

/// Two hidden layers plus an output layer.
struct Mlp2 {
  std::array<DenseLayer, 3> layers;

  std::size_t in_dim() const { return layers[0].in_dim(); }
  std::size_t out_dim() const { return layers[2].out_dim(); }

  /// Parameter tensors in the fixed order w0, b0, w1, b1, w2, b2.
  std::vector<std::span<double>> parameters();
  std::vector<std::span<const double>> parameters() const;
  std::size_t parameter_count() const;

  friend bool operator==(const Mlp2& a, const Mlp2& b);
};

struct LayerCache {
  DenseMatrix pre;            // before activation
  DenseMatrix act;            // after activation, before dropout
  std::vector<double> mask;   // 0 or 1/(1-p) per element; empty without dropout
  DenseMatrix out;            // after dropout
};

/// Everything backward() needs from one training-mode forward pass.
struct ForwardCache {
  DenseMatrix input;
  std::array<LayerCache, 3> layers;
};

struct ForwardResult {
  DenseMatrix output;
  std::optional<ForwardCache> cache;  // set in Mode::Train only
};

/// Train mode draws dropout masks from `rng` (required when any layer has
/// dropout). Eval mode is deterministic and leaves `rng` untouched.
ForwardResult forward(const Mlp2& mlp, const DenseMatrix& input, Mode mode, Rng* rng = nullptr);

/// Eval-mode forward.
DenseMatrix infer(const Mlp2& mlp, const DenseMatrix& input);

struct Mlp2Gradients {
  std::array<DenseMatrix, 3> w;
  std::array<std::vector<double>, 3> b;

  std::vector<std::span<const double>> tensors() const;
};

struct BackwardResult {
  Mlp2Gradients grads;
  DenseMatrix grad_input;
};

BackwardResult backward(const Mlp2& mlp, const ForwardCache& cache, const DenseMatrix& grad_out);

inline constexpr double kBceEpsilon = 1e-7;

struct BceResult {
  double loss = 0.0;
  DenseMatrix grad;  // d loss / d pred
};

/// Mean binary cross-entropy over all elements, predictions clamped to
/// [kBceEpsilon, 1 - kBceEpsilon].
BceResult bce(const DenseMatrix& pred, const DenseMatrix& target);

struct AdamHyper {
  double lr = 0.001;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// Adam moments for a fixed list of parameter tensors.
class AdamState {
 public:
  AdamState() = default;
  AdamState(std::span<const std::size_t> tensor_sizes, AdamHyper hyper = {});

  template <typename Params>
  static AdamState for_parameters(const Params& params, AdamHyper hyper = {}) {
    std::vector<std::size_t> sizes;
    for (const auto& p : params) sizes.push_back(p.size());
    return AdamState(sizes, hyper);
  }

  std::uint64_t step_count() const { return step_count_; }
  const AdamHyper& hyper() const { return hyper_; }

  /// Applies one bias-corrected update. Throws DivergenceError on non-finite
  /// gradients and ShapeError when tensors do not match the state.
  void step(std::span<const std::span<double>> params,
            std::span<const std::span<const double>> grads);

 private:
  std::uint64_t step_count_ = 0;
  AdamHyper hyper_;
  std::vector<std::vector<double>> m_;
  std::vector<std::vector<double>> v_;
};

inline void adam_step(AdamState& state, std::span<const std::span<double>> params,
                      std::span<const std::span<const double>> grads) {
  state.step(params, grads);
}

/// i.i.d. standard normal entries.
DenseMatrix sample_gaussian(std::size_t rows, std::size_t cols, Rng& rng);

/// Glorot-uniform weights, zero biases, ReLU hidden layers with dropout
/// after each hidden activation.
Mlp2 init_mlp2(std::size_t in_dim, std::size_t hidden_dim, std::size_t out_dim,
               Activation out_activation, double dropout_p, Rng& rng);

/// Horizontal concatenation [a | b]; rows must match.
DenseMatrix hconcat(const DenseMatrix& a, const DenseMatrix& b);
/// Columns [begin, end) of m.
DenseMatrix column_slice(const DenseMatrix& m, std::size_t begin, std::size_t end);

struct GradientCheckReport {
  double max_relative_error = 0.0;
  std::size_t n_configs = 0;
  std::size_t n_checked = 0;  // scalar parameters and inputs compared
};

/// Compares backward() against central finite differences (h = 1e-5) on
/// `n_configs` random MLP-2 networks with dims in [1, 10] and dropout
/// disabled. Relative error is |a - n| / max(|a| + |n|, 1e-6).
GradientCheckReport gradient_check(std::uint64_t seed, std::size_t n_configs = 20);

}  // namespace aaerec
