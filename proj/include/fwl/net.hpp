#pragma once

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "fwl/gp.hpp"  // softmax
#include "fwl/rng.hpp"
#include "fwl/vecmat.hpp"

namespace fwl {

enum class Activation { Tanh, ReLU, Identity };

inline const char* activation_name(Activation a) {
  switch (a) {
    case Activation::Tanh: return "tanh";
    case Activation::ReLU: return "relu";
    case Activation::Identity: return "identity";
  }
  return "?";
}

inline Activation activation_from_name(const std::string& s) {
  if (s == "tanh") return Activation::Tanh;
  if (s == "relu") return Activation::ReLU;
  if (s == "identity") return Activation::Identity;
  throw ConfigParse("unknown activation: " + s);
}

struct Layer {
  Matrix weights;  // out x in
  Vector bias;     // out
  Activation activation = Activation::Tanh;
};

struct LossSpec {
  enum class Kind { MSE, CrossEntropy };
  Kind kind = Kind::MSE;
  double l2 = 0.0;  // coefficient of the ||w||^2 regularizer
};

/// Feed-forward student network split into a representation part psi
/// (layers before repr_boundary) and a predictor part phi (the rest).
/// Parameters are addressable through a flat index space so the optimizer
/// and the finite-difference tests can treat the net as one vector.
class StudentNet {
 public:
  StudentNet() = default;
  StudentNet(std::vector<Layer> layers, std::size_t repr_boundary)
      : layers_(std::move(layers)), repr_boundary_(repr_boundary) {
    if (layers_.size() < 2 || repr_boundary_ < 1 || repr_boundary_ >= layers_.size())
      throw BadDimension("StudentNet: repr_boundary must be in [1, num_layers-1]");
    for (std::size_t l = 0; l < layers_.size(); ++l) {
      if (layers_[l].bias.size() != layers_[l].weights.rows())
        throw DimensionMismatch("StudentNet: bias/weights mismatch at layer " + std::to_string(l));
      if (l > 0 && layers_[l].weights.cols() != layers_[l - 1].weights.rows())
        throw DimensionMismatch("StudentNet: layer dimensions disagree at layer " + std::to_string(l));
    }
    rebuild_offsets();
  }

  /// Fan-in scaled uniform init: U(-1/sqrt(fan_in), 1/sqrt(fan_in)).
  static StudentNet init(const std::vector<std::size_t>& dims,
                         const std::vector<Activation>& activations, std::size_t repr_boundary,
                         Rng& rng) {
    if (dims.size() < 3 || activations.size() != dims.size() - 1)
      throw BadDimension("StudentNet::init: need >= 2 layers and one activation per layer");
    std::vector<Layer> layers;
    for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
      Layer layer;
      layer.activation = activations[l];
      layer.weights = Matrix(dims[l + 1], dims[l]);
      layer.bias = Vector(dims[l + 1], 0.0);
      const double scale = 1.0 / std::sqrt(static_cast<double>(dims[l]));
      for (std::size_t i = 0; i < layer.weights.size(); ++i)
        layer.weights.data()[i] = rng.uniform(-scale, scale);
      layers.push_back(std::move(layer));
    }
    return StudentNet(std::move(layers), repr_boundary);
  }

  const std::vector<Layer>& layers() const { return layers_; }
  std::size_t num_layers() const { return layers_.size(); }
  std::size_t repr_boundary() const { return repr_boundary_; }
  std::size_t input_dim() const { return layers_.front().weights.cols(); }
  std::size_t output_dim() const { return layers_.back().weights.rows(); }
  std::size_t repr_dim() const { return layers_[repr_boundary_ - 1].weights.rows(); }
  std::size_t param_count() const { return param_count_; }

  double param_at(std::size_t i) const { return *locate(i); }
  void set_param(std::size_t i, double v) { *const_cast<double*>(locate(i)) = v; }

  /// Visit parameter storage as (pointer, length, flat offset) blocks,
  /// weights then bias per layer.
  template <typename F>
  void for_each_block(F&& f) {
    std::size_t off = 0;
    for (auto& layer : layers_) {
      f(layer.weights.data(), layer.weights.size(), off);
      off += layer.weights.size();
      f(layer.bias.data(), layer.bias.size(), off);
      off += layer.bias.size();
    }
  }
  template <typename F>
  void for_each_block(F&& f) const {
    const_cast<StudentNet*>(this)->for_each_block(
        [&](double* p, std::size_t n, std::size_t off) { f(static_cast<const double*>(p), n, off); });
  }

  double param_squared_norm() const {
    double s = 0.0;
    for_each_block([&](const double* p, std::size_t n, std::size_t) {
      for (std::size_t i = 0; i < n; ++i) s += p[i] * p[i];
    });
    return s;
  }

 private:
  const double* locate(std::size_t i) const {
    const double* found = nullptr;
    for_each_block([&](const double* p, std::size_t n, std::size_t off) {
      if (!found && i >= off && i < off + n) found = p + (i - off);
    });
    if (!found) throw BadDimension("StudentNet: parameter index out of range");
    return found;
  }

  void rebuild_offsets() {
    param_count_ = 0;
    for (const auto& l : layers_) param_count_ += l.weights.size() + l.bias.size();
  }

  std::vector<Layer> layers_;
  std::size_t repr_boundary_ = 1;
  std::size_t param_count_ = 0;
};

/// Per-layer activations kept from a forward pass; enough for exact backprop.
struct ForwardCache {
  std::vector<Vector> pre;   // pre[l]: pre-activation of layer l
  std::vector<Vector> post;  // post[0] = input, post[l+1] = activation of layer l

  void resize_for(const StudentNet& net) {
    pre.resize(net.num_layers());
    post.resize(net.num_layers() + 1);
    post[0].resize(net.input_dim());
    for (std::size_t l = 0; l < net.num_layers(); ++l) {
      pre[l].resize(net.layers()[l].weights.rows());
      post[l + 1].resize(net.layers()[l].weights.rows());
    }
  }
};

namespace detail {

inline double apply_activation(Activation a, double z) {
  switch (a) {
    case Activation::Tanh: return std::tanh(z);
    case Activation::ReLU: return z > 0.0 ? z : 0.0;
    case Activation::Identity: return z;
  }
  return z;
}

/// Derivative in terms of pre-activation z and activation value a.
inline double activation_grad(Activation act, double z, double a) {
  switch (act) {
    case Activation::Tanh: return 1.0 - a * a;
    case Activation::ReLU: return z > 0.0 ? 1.0 : 0.0;
    case Activation::Identity: return 1.0;
  }
  return 1.0;
}

}  // namespace detail

/// Forward pass filling `cache`; returns nothing, outputs live in
/// cache.post.back() and the representation in cache.post[repr_boundary].
inline void forward_into(const StudentNet& net, const Vector& x, ForwardCache& cache) {
  if (x.size() != net.input_dim()) throw DimensionMismatch("forward: input dimension mismatch");
  cache.resize_for(net);
  cache.post[0] = x;
  for (std::size_t l = 0; l < net.num_layers(); ++l) {
    const Layer& layer = net.layers()[l];
    const Vector& in = cache.post[l];
    Vector& z = cache.pre[l];
    Vector& a = cache.post[l + 1];
    const std::size_t rows = layer.weights.rows(), cols = layer.weights.cols();
    for (std::size_t i = 0; i < rows; ++i) {
      const double* wrow = layer.weights.row_ptr(i);
      double s = layer.bias[i];
      for (std::size_t j = 0; j < cols; ++j) s += wrow[j] * in[j];
      z[i] = s;
      a[i] = detail::apply_activation(layer.activation, s);
    }
  }
}

struct ForwardResult {
  Vector output;
  Vector representation;
  ForwardCache cache;
};

inline ForwardResult forward(const StudentNet& net, const Vector& x) {
  ForwardResult res;
  forward_into(net, x, res.cache);
  res.output = res.cache.post.back();
  res.representation = res.cache.post[net.repr_boundary()];
  return res;
}

namespace detail {

/// Backprop for one sample from a filled cache. Adds `scale` times the data
/// gradient into the flat buffer `grads` and returns the data loss (without
/// the L2 term). CrossEntropy is softmax cross-entropy over the raw network
/// output, with the loss value log-clipped at 1e-12.
inline double backprop_accumulate(const StudentNet& net, const ForwardCache& cache,
                                  const Vector& target, const LossSpec& spec, double scale,
                                  Vector& grads, std::vector<Vector>& delta_ws) {
  const std::size_t layers = net.num_layers();
  const Vector& out = cache.post.back();
  if (target.size() != out.size()) throw DimensionMismatch("loss_and_grad: target dimension mismatch");

  delta_ws.resize(layers);
  Vector& delta_out = delta_ws[layers - 1];
  delta_out.resize(out.size());

  double loss = 0.0;
  if (spec.kind == LossSpec::Kind::MSE) {
    const double inv_p = 1.0 / static_cast<double>(out.size());
    for (std::size_t k = 0; k < out.size(); ++k) {
      const double diff = out[k] - target[k];
      loss += diff * diff * inv_p;
      delta_out[k] = 2.0 * diff * inv_p;
    }
  } else {
    double tsum = 0.0;
    for (double t : target) {
      if (t < -1e-9) throw NonDistributionTarget("cross-entropy target has negative mass");
      tsum += t;
    }
    if (std::abs(tsum - 1.0) > 1e-6)
      throw NonDistributionTarget("cross-entropy target does not sum to 1");
    const Vector q = softmax(out);
    for (std::size_t k = 0; k < out.size(); ++k) {
      if (target[k] > 0.0) loss -= target[k] * std::log(std::max(q[k], 1e-12));
      delta_out[k] = q[k] - target[k];
    }
  }

  // dL/dz for the output layer (its activation folded in).
  {
    const Layer& last = net.layers().back();
    for (std::size_t k = 0; k < out.size(); ++k)
      delta_out[k] *= activation_grad(last.activation, cache.pre[layers - 1][k], out[k]);
  }

  std::size_t off_end = grads.size();
  for (std::size_t l = layers; l-- > 0;) {
    const Layer& layer = net.layers()[l];
    const std::size_t rows = layer.weights.rows(), cols = layer.weights.cols();
    const Vector& in = cache.post[l];
    const Vector& delta = delta_ws[l];

    double* gb = grads.data() + (off_end - rows);
    double* gw = grads.data() + (off_end - rows - rows * cols);
    for (std::size_t i = 0; i < rows; ++i) {
      const double di = scale * delta[i];
      gb[i] += di;
      double* gwrow = gw + i * cols;
      for (std::size_t j = 0; j < cols; ++j) gwrow[j] += di * in[j];
    }
    off_end -= rows + rows * cols;

    if (l > 0) {
      Vector& prev = delta_ws[l - 1];
      prev.assign(cols, 0.0);
      for (std::size_t i = 0; i < rows; ++i) {
        const double di = delta[i];
        const double* wrow = layer.weights.row_ptr(i);
        for (std::size_t j = 0; j < cols; ++j) prev[j] += wrow[j] * di;
      }
      const Layer& below = net.layers()[l - 1];
      for (std::size_t j = 0; j < cols; ++j)
        prev[j] *= activation_grad(below.activation, cache.pre[l - 1][j], cache.post[l][j]);
    }
  }
  return loss;
}

}  // namespace detail

/// Loss and exact gradient for a single sample, including the L2 term
/// spec.l2 * ||w||^2 over all parameters. Gradient is flat, in block order.
inline std::pair<double, Vector> loss_and_grad(const StudentNet& net, const Vector& x,
                                               const Vector& target, const LossSpec& spec) {
  ForwardCache cache;
  forward_into(net, x, cache);
  Vector grads(net.param_count(), 0.0);
  std::vector<Vector> scratch;
  double loss = detail::backprop_accumulate(net, cache, target, spec, 1.0, grads, scratch);
  if (spec.l2 > 0.0) {
    loss += spec.l2 * net.param_squared_norm();
    std::size_t i = 0;
    net.for_each_block([&](const double* p, std::size_t n, std::size_t) {
      for (std::size_t k = 0; k < n; ++k, ++i) grads[i] += 2.0 * spec.l2 * p[k];
    });
  }
  return {loss, std::move(grads)};
}

}  // namespace fwl
