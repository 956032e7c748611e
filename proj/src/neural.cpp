#include "aaerec/neural.hpp"

#include <algorithm>
#include <cmath>

#include "aaerec/error.hpp"
#include "aaerec/linalg.hpp"

namespace aaerec {

std::string to_string(Activation a) {
  switch (a) {
    case Activation::Linear: return "linear";
    case Activation::Relu: return "relu";
    case Activation::Sigmoid: return "sigmoid";
  }
  return "?";
}

Activation parse_activation(const std::string& s) {
  if (s == "linear") return Activation::Linear;
  if (s == "relu") return Activation::Relu;
  if (s == "sigmoid") return Activation::Sigmoid;
  throw Error("unknown activation '" + s + "'");
}

std::vector<std::span<double>> Mlp2::parameters() {
  std::vector<std::span<double>> p;
  for (auto& l : layers) {
    p.push_back(l.w.values());
    p.push_back(l.b);
  }
  return p;
}

std::vector<std::span<const double>> Mlp2::parameters() const {
  std::vector<std::span<const double>> p;
  for (const auto& l : layers) {
    p.push_back(l.w.values());
    p.push_back(l.b);
  }
  return p;
}

std::size_t Mlp2::parameter_count() const {
  std::size_t n = 0;
  for (const auto& l : layers) n += l.w.size() + l.b.size();
  return n;
}

bool operator==(const Mlp2& a, const Mlp2& b) {
  for (std::size_t i = 0; i < 3; ++i) {
    const auto& x = a.layers[i];
    const auto& y = b.layers[i];
    if (x.w != y.w || x.b != y.b || x.activation != y.activation || x.dropout_p != y.dropout_p) {
      return false;
    }
  }
  return true;
}

std::vector<std::span<const double>> Mlp2Gradients::tensors() const {
  std::vector<std::span<const double>> t;
  for (std::size_t i = 0; i < 3; ++i) {
    t.push_back(w[i].values());
    t.push_back(b[i]);
  }
  return t;
}

namespace {

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double activate(Activation a, double z) {
  switch (a) {
    case Activation::Linear: return z;
    case Activation::Relu: return z > 0.0 ? z : 0.0;
    case Activation::Sigmoid: return sigmoid(z);
  }
  return z;
}

// f'(z) expressed through z and f(z).
double activation_derivative(Activation a, double z, double fz) {
  switch (a) {
    case Activation::Linear: return 1.0;
    case Activation::Relu: return z > 0.0 ? 1.0 : 0.0;
    case Activation::Sigmoid: return fz * (1.0 - fz);
  }
  return 1.0;
}

DenseMatrix affine(const DenseLayer& layer, const DenseMatrix& in) {
  DenseMatrix pre = matmul(in, layer.w);
  for (std::size_t r = 0; r < pre.rows(); ++r) {
    auto row = pre.row(r);
    for (std::size_t c = 0; c < row.size(); ++c) row[c] += layer.b[c];
  }
  return pre;
}

}  // namespace

ForwardResult forward(const Mlp2& mlp, const DenseMatrix& input, Mode mode, Rng* rng) {
  if (input.cols() != mlp.in_dim()) {
    throw ShapeError("forward: input width " + std::to_string(input.cols()) +
                     " does not match network input " + std::to_string(mlp.in_dim()));
  }
  ForwardResult result;
  if (mode == Mode::Eval) {
    DenseMatrix h = input;
    for (const auto& layer : mlp.layers) {
      DenseMatrix pre = affine(layer, h);
      for (double& v : pre.values()) v = activate(layer.activation, v);
      h = std::move(pre);
    }
    result.output = std::move(h);
    return result;
  }

  ForwardCache cache;
  cache.input = input;
  const DenseMatrix* h = &cache.input;
  for (std::size_t i = 0; i < 3; ++i) {
    const auto& layer = mlp.layers[i];
    auto& lc = cache.layers[i];
    lc.pre = affine(layer, *h);
    lc.act = lc.pre;
    for (double& v : lc.act.values()) v = activate(layer.activation, v);
    lc.out = lc.act;
    if (layer.dropout_p > 0.0) {
      if (rng == nullptr) throw Error("forward: training with dropout needs a random stream");
      const double keep_scale = 1.0 / (1.0 - layer.dropout_p);
      lc.mask.resize(lc.out.size());
      auto out = lc.out.values();
      for (std::size_t k = 0; k < out.size(); ++k) {
        lc.mask[k] = uniform01(*rng) < layer.dropout_p ? 0.0 : keep_scale;
        out[k] *= lc.mask[k];
      }
    }
    h = &lc.out;
  }
  result.output = cache.layers[2].out;
  result.cache = std::move(cache);
  return result;
}

DenseMatrix infer(const Mlp2& mlp, const DenseMatrix& input) {
  return forward(mlp, input, Mode::Eval).output;
}

BackwardResult backward(const Mlp2& mlp, const ForwardCache& cache, const DenseMatrix& grad_out) {
  const auto& last = cache.layers[2].out;
  if (grad_out.rows() != last.rows() || grad_out.cols() != last.cols()) {
    throw ShapeError("backward: gradient " + shape_string(grad_out) + " does not match output " +
                     shape_string(last));
  }
  if (cache.input.cols() != mlp.in_dim()) throw ShapeError("backward: cache from another network");

  BackwardResult result;
  DenseMatrix grad = grad_out;
  for (std::size_t i = 3; i-- > 0;) {
    const auto& layer = mlp.layers[i];
    const auto& lc = cache.layers[i];
    if (lc.pre.cols() != layer.out_dim()) throw ShapeError("backward: cache from another network");
    auto g = grad.values();
    auto pre = lc.pre.values();
    auto act = lc.act.values();
    for (std::size_t k = 0; k < g.size(); ++k) {
      if (!lc.mask.empty()) g[k] *= lc.mask[k];
      g[k] *= activation_derivative(layer.activation, pre[k], act[k]);
    }
    const DenseMatrix& layer_in = i == 0 ? cache.input : cache.layers[i - 1].out;
    result.grads.w[i] = matmul_tn(layer_in, grad);
    result.grads.b[i].assign(layer.out_dim(), 0.0);
    for (std::size_t r = 0; r < grad.rows(); ++r) {
      auto row = grad.row(r);
      for (std::size_t c = 0; c < row.size(); ++c) result.grads.b[i][c] += row[c];
    }
    grad = matmul_nt(grad, layer.w);
  }
  result.grad_input = std::move(grad);
  return result;
}

BceResult bce(const DenseMatrix& pred, const DenseMatrix& target) {
  if (pred.rows() != target.rows() || pred.cols() != target.cols()) {
    throw ShapeError("bce: prediction " + shape_string(pred) + " vs target " + shape_string(target));
  }
  BceResult r;
  r.grad = DenseMatrix(pred.rows(), pred.cols());
  const double n = static_cast<double>(pred.size());
  if (pred.size() == 0) return r;
  auto p = pred.values();
  auto t = target.values();
  auto g = r.grad.values();
  double sum = 0.0;
  for (std::size_t k = 0; k < p.size(); ++k) {
    const double pk = std::clamp(p[k], kBceEpsilon, 1.0 - kBceEpsilon);
    sum -= t[k] * std::log(pk) + (1.0 - t[k]) * std::log(1.0 - pk);
    g[k] = (-t[k] / pk + (1.0 - t[k]) / (1.0 - pk)) / n;
  }
  r.loss = sum / n;
  return r;
}

AdamState::AdamState(std::span<const std::size_t> tensor_sizes, AdamHyper hyper) : hyper_(hyper) {
  for (auto n : tensor_sizes) {
    m_.emplace_back(n, 0.0);
    v_.emplace_back(n, 0.0);
  }
}

void AdamState::step(std::span<const std::span<double>> params,
                     std::span<const std::span<const double>> grads) {
  if (params.size() != m_.size() || grads.size() != m_.size()) {
    throw ShapeError("adam: expected " + std::to_string(m_.size()) + " tensors");
  }
  for (std::size_t t = 0; t < params.size(); ++t) {
    if (params[t].size() != m_[t].size() || grads[t].size() != m_[t].size()) {
      throw ShapeError("adam: tensor " + std::to_string(t) + " has the wrong size");
    }
    for (double g : grads[t]) {
      if (!std::isfinite(g)) throw DivergenceError("adam: non-finite gradient");
    }
  }
  ++step_count_;
  const double c1 = 1.0 - std::pow(hyper_.beta1, static_cast<double>(step_count_));
  const double c2 = 1.0 - std::pow(hyper_.beta2, static_cast<double>(step_count_));
  for (std::size_t t = 0; t < params.size(); ++t) {
    auto& m = m_[t];
    auto& v = v_[t];
    for (std::size_t k = 0; k < m.size(); ++k) {
      const double g = grads[t][k];
      m[k] = hyper_.beta1 * m[k] + (1.0 - hyper_.beta1) * g;
      v[k] = hyper_.beta2 * v[k] + (1.0 - hyper_.beta2) * g * g;
      const double mhat = m[k] / c1;
      const double vhat = v[k] / c2;
      params[t][k] -= hyper_.lr * mhat / (std::sqrt(vhat) + hyper_.eps);
    }
  }
}

DenseMatrix sample_gaussian(std::size_t rows, std::size_t cols, Rng& rng) {
  DenseMatrix z(rows, cols);
  std::normal_distribution<double> normal;
  for (double& x : z.values()) x = normal(rng);
  return z;
}

Mlp2 init_mlp2(std::size_t in_dim, std::size_t hidden_dim, std::size_t out_dim,
               Activation out_activation, double dropout_p, Rng& rng) {
  if (in_dim == 0 || hidden_dim == 0 || out_dim == 0) throw Error("init_mlp2: dims must be >= 1");
  if (dropout_p < 0.0 || dropout_p >= 1.0) throw Error("init_mlp2: dropout must lie in [0, 1)");
  const std::array<std::size_t, 4> dims = {in_dim, hidden_dim, hidden_dim, out_dim};
  Mlp2 mlp;
  for (std::size_t i = 0; i < 3; ++i) {
    auto& layer = mlp.layers[i];
    layer.w = DenseMatrix(dims[i], dims[i + 1]);
    layer.b.assign(dims[i + 1], 0.0);
    const double a = std::sqrt(6.0 / static_cast<double>(dims[i] + dims[i + 1]));
    // uniform01 < 1 keeps every weight strictly inside (-a, a).
    for (double& w : layer.w.values()) w = a * (2.0 * uniform01(rng) - 1.0);
    layer.activation = i < 2 ? Activation::Relu : out_activation;
    layer.dropout_p = i < 2 ? dropout_p : 0.0;
  }
  return mlp;
}

DenseMatrix hconcat(const DenseMatrix& a, const DenseMatrix& b) {
  if (a.rows() != b.rows()) {
    throw ShapeError("hconcat: " + shape_string(a) + " beside " + shape_string(b));
  }
  DenseMatrix out(a.rows(), a.cols() + b.cols());
  for (std::size_t r = 0; r < a.rows(); ++r) {
    auto dst = out.row(r);
    std::copy(a.row(r).begin(), a.row(r).end(), dst.begin());
    std::copy(b.row(r).begin(), b.row(r).end(), dst.begin() + static_cast<std::ptrdiff_t>(a.cols()));
  }
  return out;
}

DenseMatrix column_slice(const DenseMatrix& m, std::size_t begin, std::size_t end) {
  if (begin > end || end > m.cols()) throw ShapeError("column_slice: range out of bounds");
  DenseMatrix out(m.rows(), end - begin);
  for (std::size_t r = 0; r < m.rows(); ++r) {
    auto src = m.row(r);
    std::copy(src.begin() + static_cast<std::ptrdiff_t>(begin),
              src.begin() + static_cast<std::ptrdiff_t>(end), out.row(r).begin());
  }
  return out;
}

GradientCheckReport gradient_check(std::uint64_t seed, std::size_t n_configs) {
  constexpr double kStep = 1e-5;
  GradientCheckReport report;
  report.n_configs = n_configs;
  Rng rng(seed);
  const std::array<Activation, 3> outs = {Activation::Linear, Activation::Sigmoid, Activation::Relu};

  for (std::size_t cfg = 0; cfg < n_configs; ++cfg) {
    const std::size_t in = 1 + uniform_index(rng, 10);
    const std::size_t hidden = 1 + uniform_index(rng, 10);
    const std::size_t out = 1 + uniform_index(rng, 10);
    const std::size_t batch = 1 + uniform_index(rng, 5);
    Mlp2 mlp = init_mlp2(in, hidden, out, outs[cfg % outs.size()], 0.0, rng);
    for (auto& layer : mlp.layers)
      for (double& b : layer.b) b = 0.2 * (2.0 * uniform01(rng) - 1.0);
    DenseMatrix x = sample_gaussian(batch, in, rng);
    DenseMatrix probe = sample_gaussian(batch, out, rng);

    auto loss = [&](const Mlp2& net, const DenseMatrix& input) {
      DenseMatrix y = infer(net, input);
      double s = 0.0;
      for (std::size_t k = 0; k < y.size(); ++k) s += y.values()[k] * probe.values()[k];
      return s;
    };
    auto rel = [](double a, double n) { return std::abs(a - n) / std::max(std::abs(a) + std::abs(n), 1e-6); };

    auto fwd = forward(mlp, x, Mode::Train);
    auto bwd = backward(mlp, *fwd.cache, probe);
    auto analytic = bwd.grads.tensors();
    auto params = mlp.parameters();
    for (std::size_t t = 0; t < params.size(); ++t) {
      for (std::size_t k = 0; k < params[t].size(); ++k) {
        const double saved = params[t][k];
        params[t][k] = saved + kStep;
        const double up = loss(mlp, x);
        params[t][k] = saved - kStep;
        const double down = loss(mlp, x);
        params[t][k] = saved;
        const double numeric = (up - down) / (2.0 * kStep);
        report.max_relative_error = std::max(report.max_relative_error, rel(analytic[t][k], numeric));
        ++report.n_checked;
      }
    }
    for (std::size_t k = 0; k < x.size(); ++k) {
      const double saved = x.values()[k];
      x.values()[k] = saved + kStep;
      const double up = loss(mlp, x);
      x.values()[k] = saved - kStep;
      const double down = loss(mlp, x);
      x.values()[k] = saved;
      const double numeric = (up - down) / (2.0 * kStep);
      report.max_relative_error =
          std::max(report.max_relative_error, rel(bwd.grad_input.values()[k], numeric));
      ++report.n_checked;
    }
  }
  return report;
}

}  // namespace aaerec
