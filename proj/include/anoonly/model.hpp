#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <type_traits>
#include <string>
#include <variant>
#include <vector>

#include "anoonly/dense.hpp"
#include "anoonly/matrix.hpp"
#include "anoonly/normalization.hpp"
#include "anoonly/random.hpp"

namespace anoonly {

enum class Activation { ReLU, Tanh, Identity };

inline std::string to_string(Activation a) {
  switch (a) {
    case Activation::ReLU: return "relu";
    case Activation::Tanh: return "tanh";
    case Activation::Identity: return "identity";
  }
  return "?";
}

inline Activation parse_activation(const std::string& s) {
  if (s == "relu") return Activation::ReLU;
  if (s == "tanh") return Activation::Tanh;
  if (s == "identity") return Activation::Identity;
  throw ConfigError("unknown activation '" + s + "'");
}

/// Which normalizer sits between the enhancer and the classifier.
struct NormalizerKind {
  enum class Type { None, BatchNorm, LayerNorm };
  Type type = Type::BatchNorm;
  bool affine = false;  // BatchNorm only

  static NormalizerKind none() { return {Type::None, false}; }
  static NormalizerKind batch_norm(bool affine) { return {Type::BatchNorm, affine}; }
  static NormalizerKind layer_norm() { return {Type::LayerNorm, false}; }

  bool is_batch_norm() const noexcept { return type == Type::BatchNorm; }

  /// "none", "ln", "bn_star" (no affine) or "bn".
  std::string name() const {
    switch (type) {
      case Type::None: return "none";
      case Type::LayerNorm: return "ln";
      case Type::BatchNorm: return affine ? "bn" : "bn_star";
    }
    return "?";
  }

  static NormalizerKind parse(const std::string& s) {
    if (s == "none") return none();
    if (s == "ln") return layer_norm();
    if (s == "bn_star") return batch_norm(false);
    if (s == "bn") return batch_norm(true);
    throw ConfigError("unknown normalizer '" + s + "'");
  }

  friend bool operator==(const NormalizerKind&, const NormalizerKind&) = default;
};

struct ModelRecipe {
  std::size_t input_dim = 16;
  std::vector<std::size_t> hidden_dims{64, 32};
  std::size_t rep_dim = 16;
  Activation activation = Activation::Tanh;
  bool activate_last = true;  // activation after the last enhancer layer too
  NormalizerKind normalizer = NormalizerKind::batch_norm(false);
  bool classifier_bias = false;
  double bn_eps = 1e-5;
  double bn_momentum = 0.1;
  std::uint64_t seed = 0;

  void validate() const {
    if (input_dim == 0 || rep_dim == 0) throw ConfigError("model dims must be >= 1");
    for (auto h : hidden_dims)
      if (h == 0) throw ConfigError("hidden dims must be >= 1");
  }

  std::size_t hidden_out_dim() const { return hidden_dims.empty() ? input_dim : hidden_dims.back(); }
};

enum class Mode { Train, Eval };

/// Handle to one trainable tensor and its gradient buffer.
struct ParamRef {
  std::string name;
  Matrix* value;
  Matrix* grad;
  bool decays;  // included in the L2 weight penalty
};

/// Enhancer stack -> normalizer -> classifier. Scores are squared output
/// norms, so the hypersphere center is the origin.
class SSADModel {
 public:
  using Normalizer = std::variant<std::monostate, BatchNormLayer, LayerNormLayer>;

  SSADModel() = default;

  explicit SSADModel(const ModelRecipe& recipe) : recipe_(recipe) {
    recipe.validate();
    Rng rng = make_rng(recipe.seed, 0x6d6f64656cULL);
    std::size_t in = recipe.input_dim;
    for (auto h : recipe.hidden_dims) {
      enhancer_.emplace_back(in, h, true);
      enhancer_.back().init_uniform(rng);
      in = h;
    }
    switch (recipe.normalizer.type) {
      case NormalizerKind::Type::None: break;
      case NormalizerKind::Type::BatchNorm:
        normalizer_ = BatchNormLayer(in, recipe.normalizer.affine, recipe.bn_eps, recipe.bn_momentum);
        break;
      case NormalizerKind::Type::LayerNorm:
        normalizer_ = LayerNormLayer(in, recipe.bn_eps);
        break;
    }
    classifier_ = DenseLayer(in, recipe.rep_dim, recipe.classifier_bias);
    classifier_.init_uniform(rng);
  }

  const ModelRecipe& recipe() const noexcept { return recipe_; }
  Mode mode() const noexcept { return mode_; }
  void set_mode(Mode m) noexcept { mode_ = m; }
  void train() noexcept { mode_ = Mode::Train; }
  /// Train-mode batch norm normalizes with running statistics instead of
  /// batch statistics (needed for single-row batches).
  void set_freeze_batch_stats(bool on) noexcept { freeze_batch_stats_ = on; }
  bool freeze_batch_stats() const noexcept { return freeze_batch_stats_; }
  void eval() noexcept { mode_ = Mode::Eval; }

  /// Classifier output, rows x rep_dim. In train mode every layer caches
  /// what backward needs and batch norm uses (and updates) batch statistics.
  Matrix forward(const Matrix& x) {
    if (mode_ == Mode::Eval) {
      hidden_.reset();
      pre_activations_.clear();
      return infer(x);
    }
    check_input(x);
    pre_activations_.clear();
    Matrix h = x;
    for (std::size_t k = 0; k < enhancer_.size(); ++k) {
      Matrix z = enhancer_[k].forward(h);
      h = activated(k) ? activate(z) : z;
      pre_activations_.push_back(std::move(z));
    }
    hidden_ = h;
    Matrix normed = std::visit(
        [&](auto& n) -> Matrix {
          using N = std::decay_t<decltype(n)>;
          if constexpr (std::is_same_v<N, BatchNormLayer>) {
            return freeze_batch_stats_ ? n.forward_frozen(h) : n.forward_train(h);
          }
          else if constexpr (std::is_same_v<N, LayerNormLayer>) return n.forward(h);
          else return h;
        },
        normalizer_);
    return classifier_.forward(normed);
  }

  /// Eval-mode forward. Pure per-row function of x; touches no cache.
  Matrix infer(const Matrix& x) const {
    check_input(x);
    Matrix h = x;
    for (std::size_t k = 0; k < enhancer_.size(); ++k) {
      h = enhancer_[k].apply(h);
      if (activated(k)) h = activate(std::move(h));
    }
    Matrix normed = std::visit(
        [&](const auto& n) -> Matrix {
          using N = std::decay_t<decltype(n)>;
          if constexpr (std::is_same_v<N, BatchNormLayer>) return n.forward_eval(h);
          else if constexpr (std::is_same_v<N, LayerNormLayer>) return n.apply(h);
          else return h;
        },
        normalizer_);
    return classifier_.apply(normed);
  }

  /// Per-row squared norm of the forward output.
  Vector score(const Matrix& x) { return row_squared_norms(forward(x)); }
  Vector score_eval(const Matrix& x) const { return row_squared_norms(infer(x)); }

  static Vector row_squared_norms(const Matrix& out) {
    Vector s(out.rows(), 0.0);
    for (std::size_t i = 0; i < out.rows(); ++i)
      for (double v : out.row(i)) s[i] += v * v;
    return s;
  }

  /// Pre-normalizer hidden batch from the last train-mode forward.
  const Matrix& hidden() const {
    if (!hidden_) throw StateError("no cached hidden batch");
    return *hidden_;
  }

  /// Backpropagates dL/d(output) (plus an optional extra dL/d(hidden) term
  /// that enters at the normalizer input). Accumulates parameter gradients
  /// and returns dL/dx.
  Matrix backward(const Matrix& grad_output, const Matrix* grad_hidden = nullptr) {
    if (!hidden_) throw StateError("model backward: no cached train-mode forward");
    Matrix g = classifier_.backward(grad_output);
    g = std::visit(
        [&](auto& n) -> Matrix {
          using N = std::decay_t<decltype(n)>;
          if constexpr (std::is_same_v<N, std::monostate>) return std::move(g);
          else return n.backward(g);
        },
        normalizer_);
    if (grad_hidden) g += *grad_hidden;
    for (std::size_t k = enhancer_.size(); k-- > 0;) {
      if (activated(k)) g = activate_backward(pre_activations_[k], std::move(g));
      g = enhancer_[k].backward(g);
    }
    hidden_.reset();
    pre_activations_.clear();
    return g;
  }

  void zero_grad() {
    for (auto& l : enhancer_) l.zero_grad();
    if (auto* bn = batch_norm()) bn->zero_grad();
    classifier_.zero_grad();
  }

  /// Trainable tensors in construction order.
  std::vector<ParamRef> parameters() {
    std::vector<ParamRef> out;
    for (std::size_t k = 0; k < enhancer_.size(); ++k) {
      auto& l = enhancer_[k];
      out.push_back({"enhancer." + std::to_string(k) + ".weight", &l.weight, &l.grad_weight, true});
      out.push_back({"enhancer." + std::to_string(k) + ".bias", &l.bias, &l.grad_bias, false});
    }
    if (auto* bn = batch_norm(); bn && bn->affine()) {
      out.push_back({"normalizer.gamma", &bn->gamma, &bn->grad_gamma, false});
      out.push_back({"normalizer.beta", &bn->beta, &bn->grad_beta, false});
    }
    out.push_back({"classifier.weight", &classifier_.weight, &classifier_.grad_weight, true});
    if (classifier_.has_bias()) {
      out.push_back({"classifier.bias", &classifier_.bias, &classifier_.grad_bias, false});
    }
    return out;
  }

  std::size_t parameter_count() {
    std::size_t n = 0;
    for (const auto& p : parameters()) n += p.value->size();
    return n;
  }

  Vector flat_parameters() {
    Vector v;
    for (const auto& p : parameters()) v.insert(v.end(), p.value->values().begin(), p.value->values().end());
    return v;
  }

  Vector flat_gradients() {
    Vector v;
    for (const auto& p : parameters()) v.insert(v.end(), p.grad->values().begin(), p.grad->values().end());
    return v;
  }

  void set_flat_parameters(std::span<const double> v) {
    if (v.size() != parameter_count()) {
      throw ShapeError("set_flat_parameters: got " + std::to_string(v.size()) + " values");
    }
    std::size_t off = 0;
    for (const auto& p : parameters()) {
      auto dst = p.value->data();
      std::copy(v.begin() + off, v.begin() + off + dst.size(), dst.begin());
      off += dst.size();
    }
  }

  BatchNormLayer* batch_norm() noexcept { return std::get_if<BatchNormLayer>(&normalizer_); }
  const BatchNormLayer* batch_norm() const noexcept { return std::get_if<BatchNormLayer>(&normalizer_); }

  std::vector<DenseLayer>& enhancer() noexcept { return enhancer_; }
  const std::vector<DenseLayer>& enhancer() const noexcept { return enhancer_; }
  DenseLayer& classifier() noexcept { return classifier_; }
  const DenseLayer& classifier() const noexcept { return classifier_; }

 private:
  void check_input(const Matrix& x) const {
    if (x.cols() != recipe_.input_dim) {
      throw ShapeError("model forward: input " + x.shape() + " vs input_dim " +
                       std::to_string(recipe_.input_dim));
    }
  }

  bool activated(std::size_t k) const noexcept { return k + 1 < enhancer_.size() || recipe_.activate_last; }

  Matrix activate(Matrix z) const {
    switch (recipe_.activation) {
      case Activation::ReLU:
        for (auto& v : z.data()) v = v > 0.0 ? v : 0.0;
        break;
      case Activation::Tanh:
        for (auto& v : z.data()) v = std::tanh(v);
        break;
      case Activation::Identity: break;
    }
    return z;
  }

  Matrix activate_backward(const Matrix& pre, Matrix g) const {
    switch (recipe_.activation) {
      case Activation::ReLU:
        for (std::size_t i = 0; i < g.size(); ++i)
          if (!(pre[i] > 0.0)) g[i] = 0.0;
        break;
      case Activation::Tanh:
        for (std::size_t i = 0; i < g.size(); ++i) {
          const double t = std::tanh(pre[i]);
          g[i] *= 1.0 - t * t;
        }
        break;
      case Activation::Identity: break;
    }
    return g;
  }

  ModelRecipe recipe_;
  std::vector<DenseLayer> enhancer_;
  Normalizer normalizer_;
  DenseLayer classifier_;
  Mode mode_ = Mode::Train;
  bool freeze_batch_stats_ = false;
  std::vector<Matrix> pre_activations_;
  std::optional<Matrix> hidden_;
};

inline SSADModel build_model(const ModelRecipe& recipe) { return SSADModel(recipe); }

}  // namespace anoonly
