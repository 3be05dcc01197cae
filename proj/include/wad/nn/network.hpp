#pragma once

#include <cmath>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "wad/core/error.hpp"
#include "wad/core/matmul.hpp"
#include "wad/core/rng.hpp"
#include "wad/core/tensor.hpp"

namespace wad::nn {

enum class Act { linear, relu, tanh, sigmoid };

inline const char* to_string(Act a) {
  switch (a) {
    case Act::linear: return "linear";
    case Act::relu: return "relu";
    case Act::tanh: return "tanh";
    case Act::sigmoid: return "sigmoid";
  }
  return "?";
}

// Layered computation graph with named input ports, named output heads and
// concatenation nodes. Nodes are created in topological order; forward caches
// activations so backward can run on the same batch. Not an autodiff tape:
// only the layer kinds the project needs.
template <typename T>
class Network {
 public:
  using NodeId = int;

  struct Param {
    std::string name;
    Tensor<T> value;
    Tensor<T> grad;
    T weight_decay = T(0);
    bool is_weight = false;  // decay applies to weights only
    int fan_in = 0, fan_out = 0;
  };

  explicit Network(std::string name = "net") : name_(std::move(name)) {}

  const std::string& name() const { return name_; }

  NodeId input(const std::string& port, std::vector<int> dims) {
    for (const auto& [p, id] : inputs_)
      if (p == port) throw Error(ErrorCode::bad_argument, name_ + ": duplicate input port " + port);
    Node n;
    n.kind = NodeKind::input;
    n.label = port;
    n.dims = std::move(dims);
    inputs_.emplace_back(port, NodeId(nodes_.size()));
    nodes_.push_back(std::move(n));
    return NodeId(nodes_.size()) - 1;
  }

  NodeId dense(const std::string& layer, NodeId src, int out_dim, Act act, T weight_decay = T(0)) {
    const auto& sdims = node(src).dims;
    if (sdims.size() != 1)
      throw Error(ErrorCode::dimension_mismatch,
                  name_ + "." + layer + ": dense input must be flat, got rank " +
                      std::to_string(sdims.size()));
    const int in_dim = sdims[0];
    Node n;
    n.kind = NodeKind::dense;
    n.label = layer;
    n.srcs = {src};
    n.dims = {out_dim};
    n.act = act;
    n.w = add_param(layer + ".W", {out_dim, in_dim}, weight_decay, in_dim, out_dim);
    n.b = add_param(layer + ".b", {out_dim}, T(0), in_dim, out_dim);
    nodes_.push_back(std::move(n));
    return NodeId(nodes_.size()) - 1;
  }

  NodeId conv2d(const std::string& layer, NodeId src, int out_ch, int kernel, int stride, Act act,
                T weight_decay = T(0)) {
    const auto& sdims = node(src).dims;
    if (sdims.size() != 3)
      throw Error(ErrorCode::dimension_mismatch, name_ + "." + layer + ": conv2d needs [C,H,W] input");
    if (kernel < 1 || stride < 1)
      throw Error(ErrorCode::bad_argument, name_ + "." + layer + ": kernel and stride must be >= 1");
    Node n;
    n.kind = NodeKind::conv;
    n.label = layer;
    n.srcs = {src};
    n.act = act;
    n.in_ch = sdims[0];
    n.in_h = sdims[1];
    n.in_w = sdims[2];
    if (n.in_h < kernel || n.in_w < kernel)
      throw Error(ErrorCode::dimension_mismatch, name_ + "." + layer + ": kernel larger than input");
    n.out_ch = out_ch;
    n.kernel = kernel;
    n.stride = stride;
    n.out_h = (n.in_h - kernel) / stride + 1;
    n.out_w = (n.in_w - kernel) / stride + 1;
    n.dims = {out_ch, n.out_h, n.out_w};
    const int kk = n.in_ch * kernel * kernel;
    n.w = add_param(layer + ".W", {out_ch, kk}, weight_decay, kk, out_ch * kernel * kernel);
    n.b = add_param(layer + ".b", {out_ch}, T(0), kk, out_ch);
    nodes_.push_back(std::move(n));
    return NodeId(nodes_.size()) - 1;
  }

  // Adjoint of conv2d; upsamples by `stride`. out = (in-1)*stride + kernel + out_pad.
  NodeId conv2d_transpose(const std::string& layer, NodeId src, int out_ch, int kernel, int stride,
                          int out_pad, Act act, T weight_decay = T(0)) {
    const auto& sdims = node(src).dims;
    if (sdims.size() != 3)
      throw Error(ErrorCode::dimension_mismatch,
                  name_ + "." + layer + ": conv2d_transpose needs [C,H,W] input");
    if (out_pad < 0 || out_pad >= stride)
      throw Error(ErrorCode::bad_argument, name_ + "." + layer + ": out_pad must be in [0,stride)");
    Node n;
    n.kind = NodeKind::convt;
    n.label = layer;
    n.srcs = {src};
    n.act = act;
    n.in_ch = sdims[0];
    n.in_h = sdims[1];
    n.in_w = sdims[2];
    n.out_ch = out_ch;
    n.kernel = kernel;
    n.stride = stride;
    n.out_pad = out_pad;
    n.out_h = (n.in_h - 1) * stride + kernel + out_pad;
    n.out_w = (n.in_w - 1) * stride + kernel + out_pad;
    n.dims = {out_ch, n.out_h, n.out_w};
    const int okk = out_ch * kernel * kernel;
    n.w = add_param(layer + ".W", {n.in_ch, okk}, weight_decay, n.in_ch * kernel * kernel,
                    out_ch * kernel * kernel);
    n.b = add_param(layer + ".b", {out_ch}, T(0), n.in_ch, out_ch);
    nodes_.push_back(std::move(n));
    return NodeId(nodes_.size()) - 1;
  }

  NodeId concat(const std::vector<NodeId>& srcs) {
    if (srcs.empty()) throw Error(ErrorCode::bad_argument, name_ + ": concat of nothing");
    int total = 0;
    for (NodeId s : srcs) {
      const auto& d = node(s).dims;
      if (d.size() != 1)
        throw Error(ErrorCode::dimension_mismatch, name_ + ": concat inputs must be flat");
      total += d[0];
    }
    Node n;
    n.kind = NodeKind::concat;
    n.label = "concat" + std::to_string(nodes_.size());
    n.srcs = srcs;
    n.dims = {total};
    nodes_.push_back(std::move(n));
    return NodeId(nodes_.size()) - 1;
  }

  NodeId flatten(NodeId src) {
    Node n;
    n.kind = NodeKind::flatten;
    n.label = "flatten" + std::to_string(nodes_.size());
    n.srcs = {src};
    n.dims = {int(shape_numel(node(src).dims))};
    nodes_.push_back(std::move(n));
    return NodeId(nodes_.size()) - 1;
  }

  NodeId reshape(NodeId src, std::vector<int> dims) {
    if (shape_numel(dims) != shape_numel(node(src).dims))
      throw Error(ErrorCode::dimension_mismatch, name_ + ": reshape changes element count");
    Node n;
    n.kind = NodeKind::reshape;
    n.label = "reshape" + std::to_string(nodes_.size());
    n.srcs = {src};
    n.dims = std::move(dims);
    nodes_.push_back(std::move(n));
    return NodeId(nodes_.size()) - 1;
  }

  void output(const std::string& head, NodeId id, T scale = T(1)) {
    heads_.emplace_back(head, HeadSpec{id, scale});
  }

  const std::vector<int>& head_dims(const std::string& head) const {
    return node(find_head(head).node).dims;
  }

  const std::vector<std::pair<std::string, NodeId>>& input_ports() const { return inputs_; }

  std::vector<Param>& params() { return params_; }
  const std::vector<Param>& params() const { return params_; }

  Param& param(const std::string& name) {
    for (auto& p : params_)
      if (p.name == name) return p;
    throw Error(ErrorCode::unknown_parameter, name_ + ": no parameter " + name);
  }

  void zero_grads() {
    for (auto& p : params_) p.grad.fill(T(0));
  }

  // Uniform +-sqrt(6/(fan_in+fan_out)) weights, zero biases.
  void init_params(std::uint64_t seed) {
    Rng rng(hash_combine(seed, hash_str(name_)));
    for (auto& p : params_) {
      if (p.is_weight) {
        const double bound = std::sqrt(6.0 / double(p.fan_in + p.fan_out));
        for (auto& v : p.value.data) v = T(rng.uniform(-bound, bound));
      } else {
        p.value.fill(T(0));
      }
    }
  }

  std::map<std::string, Tensor<T>> forward(const std::map<std::string, Tensor<T>>& in) {
    batch_ = -1;
    for (const auto& [port, id] : inputs_) {
      auto it = in.find(port);
      if (it == in.end())
        throw Error(ErrorCode::bad_argument, name_ + ": input port not bound: " + port);
      const Tensor<T>& x = it->second;
      const auto& dims = nodes_[id].dims;
      if (x.shape.size() != dims.size() + 1 ||
          !std::equal(dims.begin(), dims.end(), x.shape.begin() + 1))
        throw Error(ErrorCode::dimension_mismatch, name_ + ": input " + port + " has wrong shape");
      if (batch_ < 0) batch_ = x.shape[0];
      if (x.shape[0] != batch_)
        throw Error(ErrorCode::dimension_mismatch, name_ + ": inconsistent batch size on " + port);
      nodes_[id].out = x;
    }
    if (batch_ < 0) throw Error(ErrorCode::bad_argument, name_ + ": network has no inputs");

    for (auto& n : nodes_) {
      switch (n.kind) {
        case NodeKind::input: break;
        case NodeKind::dense: forward_dense(n); break;
        case NodeKind::conv: forward_conv(n); break;
        case NodeKind::convt: forward_convt(n); break;
        case NodeKind::concat: forward_concat(n); break;
        case NodeKind::flatten:
        case NodeKind::reshape: {
          n.out = nodes_[n.srcs[0]].out;
          n.out.shape = with_batch(n.dims);
          break;
        }
      }
      if (n.kind != NodeKind::input && !n.out.all_finite())
        throw Error(ErrorCode::non_finite, name_ + ": non-finite output at layer " + n.label);
    }
    has_cache_ = true;

    std::map<std::string, Tensor<T>> out;
    for (const auto& [hname, spec] : heads_) {
      Tensor<T> t = nodes_[spec.node].out;
      if (spec.scale != T(1))
        for (auto& v : t.data) v *= spec.scale;
      out[hname] = std::move(t);
    }
    return out;
  }

  // Backpropagates head gradients; accumulates parameter gradients (plus the
  // weight-decay term lambda*w on weights) and returns gradients w.r.t. the
  // input ports. Heads missing from `head_grads` contribute zero.
  std::map<std::string, Tensor<T>> backward(const std::map<std::string, Tensor<T>>& head_grads) {
    if (!has_cache_)
      throw Error(ErrorCode::missing_cache, name_ + ": backward without a cached forward pass");

    grads_.assign(nodes_.size(), Tensor<T>());
    for (const auto& [hname, spec] : heads_) {
      auto it = head_grads.find(hname);
      if (it == head_grads.end()) continue;
      const Tensor<T>& g = it->second;
      if (g.shape != nodes_[spec.node].out.shape)
        throw Error(ErrorCode::dimension_mismatch, name_ + ": head grad shape mismatch on " + hname);
      Tensor<T>& acc = grad_buf(spec.node);
      for (long i = 0; i < g.size(); ++i) acc[i] += spec.scale * g[i];
    }

    for (int id = int(nodes_.size()) - 1; id >= 0; --id) {
      Node& n = nodes_[id];
      if (grads_[id].size() == 0) continue;  // node not on any gradient path
      switch (n.kind) {
        case NodeKind::input: break;
        case NodeKind::dense: backward_dense(n, grads_[id]); break;
        case NodeKind::conv: backward_conv(n, grads_[id]); break;
        case NodeKind::convt: backward_convt(n, grads_[id]); break;
        case NodeKind::concat: backward_concat(n, grads_[id]); break;
        case NodeKind::flatten:
        case NodeKind::reshape: {
          Tensor<T>& src = grad_buf(n.srcs[0]);
          const Tensor<T>& g = grads_[id];
          for (long i = 0; i < g.size(); ++i) src[i] += g[i];
          break;
        }
      }
    }

    std::map<std::string, Tensor<T>> in_grads;
    for (const auto& [port, id] : inputs_) {
      if (grads_[id].size() == 0) {
        in_grads[port] = Tensor<T>(with_batch(nodes_[id].dims));
      } else {
        in_grads[port] = grads_[id];
      }
    }
    return in_grads;
  }

  void invalidate_cache() { has_cache_ = false; }

 private:
  enum class NodeKind { input, dense, conv, convt, concat, flatten, reshape };

  struct Node {
    NodeKind kind;
    std::string label;
    std::vector<int> srcs;
    std::vector<int> dims;
    Act act = Act::linear;
    int w = -1, b = -1;
    int in_ch = 0, out_ch = 0, kernel = 0, stride = 1, out_pad = 0;
    int in_h = 0, in_w = 0, out_h = 0, out_w = 0;
    Tensor<T> out;   // post-activation, [N, dims...]
    Tensor<T> pre;   // pre-activation, kept for relu only
    Tensor<T> cols;  // im2col scratch, conv kinds
  };

  struct HeadSpec {
    NodeId node;
    T scale;
  };

  Node& node(NodeId id) {
    if (id < 0 || id >= int(nodes_.size()))
      throw Error(ErrorCode::bad_argument, name_ + ": bad node id");
    return nodes_[id];
  }
  const Node& node(NodeId id) const { return const_cast<Network*>(this)->node(id); }

  const HeadSpec& find_head(const std::string& head) const {
    for (const auto& [h, spec] : heads_)
      if (h == head) return spec;
    throw Error(ErrorCode::bad_argument, name_ + ": no output head " + head);
  }

  int add_param(const std::string& pname, std::vector<int> shape, T decay, int fan_in, int fan_out) {
    Param p;
    p.name = pname;
    p.value = Tensor<T>(shape);
    p.grad = Tensor<T>(shape);
    p.weight_decay = decay;
    p.is_weight = pname.size() >= 2 && pname.substr(pname.size() - 2) == ".W";
    p.fan_in = fan_in;
    p.fan_out = fan_out;
    params_.push_back(std::move(p));
    return int(params_.size()) - 1;
  }

  std::vector<int> with_batch(const std::vector<int>& dims) const {
    std::vector<int> s;
    s.reserve(dims.size() + 1);
    s.push_back(batch_);
    s.insert(s.end(), dims.begin(), dims.end());
    return s;
  }

  Tensor<T>& grad_buf(NodeId id) {
    if (grads_[id].size() == 0) grads_[id] = Tensor<T>(nodes_[id].out.shape);
    return grads_[id];
  }

  void apply_act(Node& n) {
    if (n.act == Act::relu) {
      n.pre = n.out;
      for (auto& v : n.out.data) v = v > T(0) ? v : T(0);
    } else if (n.act == Act::tanh) {
      for (auto& v : n.out.data) v = std::tanh(v);
    } else if (n.act == Act::sigmoid) {
      for (auto& v : n.out.data) v = T(1) / (T(1) + std::exp(-v));
    }
  }

  // d(pre) = d(out) * act'(pre), written into g in place.
  void act_backward(const Node& n, Tensor<T>& g) {
    if (n.act == Act::relu) {
      for (long i = 0; i < g.size(); ++i) g[i] = n.pre[i] > T(0) ? g[i] : T(0);
    } else if (n.act == Act::tanh) {
      for (long i = 0; i < g.size(); ++i) g[i] *= (T(1) - n.out[i] * n.out[i]);
    } else if (n.act == Act::sigmoid) {
      for (long i = 0; i < g.size(); ++i) g[i] *= n.out[i] * (T(1) - n.out[i]);
    }
  }

  void forward_dense(Node& n) {
    const Tensor<T>& x = nodes_[n.srcs[0]].out;
    const int in_dim = nodes_[n.srcs[0]].dims[0];
    const int out_dim = n.dims[0];
    n.out = Tensor<T>(with_batch(n.dims));
    const Param& W = params_[n.w];
    const Param& B = params_[n.b];
    for (int s = 0; s < batch_; ++s) {
      T* y = n.out.ptr() + std::size_t(s) * out_dim;
      for (int o = 0; o < out_dim; ++o) y[o] = B.value[o];
    }
    gemm_nt(batch_, out_dim, in_dim, x.ptr(), W.value.ptr(), n.out.ptr());
    apply_act(n);
  }

  void backward_dense(Node& n, Tensor<T>& g) {
    act_backward(n, g);
    const Tensor<T>& x = nodes_[n.srcs[0]].out;
    const int in_dim = nodes_[n.srcs[0]].dims[0];
    const int out_dim = n.dims[0];
    Param& W = params_[n.w];
    Param& B = params_[n.b];
    // dW += g^T x ; db += sum g ; dx += g W
    gemm_tn(out_dim, in_dim, batch_, g.ptr(), x.ptr(), W.grad.ptr());
    for (int s = 0; s < batch_; ++s) {
      const T* gs = g.ptr() + std::size_t(s) * out_dim;
      for (int o = 0; o < out_dim; ++o) B.grad[o] += gs[o];
    }
    Tensor<T>& dx = grad_buf(n.srcs[0]);
    gemm_nn(batch_, in_dim, out_dim, g.ptr(), W.value.ptr(), dx.ptr());
    add_weight_decay(W);
  }

  void im2col(const T* x, int C, int H, int W, int k, int s, int oH, int oW, T* cols) const {
    // cols[(c*k+i)*k+j][oy*oW+ox] = x[c][oy*s+i][ox*s+j]
    const int ohw = oH * oW;
    for (int c = 0; c < C; ++c)
      for (int i = 0; i < k; ++i)
        for (int j = 0; j < k; ++j) {
          T* row = cols + (std::size_t(c) * k * k + std::size_t(i) * k + j) * ohw;
          const T* xc = x + std::size_t(c) * H * W;
          for (int oy = 0; oy < oH; ++oy) {
            const T* xr = xc + std::size_t(oy * s + i) * W + j;
            T* r = row + std::size_t(oy) * oW;
            for (int ox = 0; ox < oW; ++ox) r[ox] = xr[std::size_t(ox) * s];
          }
        }
  }

  void col2im_add(const T* cols, int C, int H, int W, int k, int s, int oH, int oW, T* x) const {
    const int ohw = oH * oW;
    for (int c = 0; c < C; ++c)
      for (int i = 0; i < k; ++i)
        for (int j = 0; j < k; ++j) {
          const T* row = cols + (std::size_t(c) * k * k + std::size_t(i) * k + j) * ohw;
          T* xc = x + std::size_t(c) * H * W;
          for (int oy = 0; oy < oH; ++oy) {
            T* xr = xc + std::size_t(oy * s + i) * W + j;
            const T* r = row + std::size_t(oy) * oW;
            for (int ox = 0; ox < oW; ++ox) xr[std::size_t(ox) * s] += r[ox];
          }
        }
  }

  void forward_conv(Node& n) {
    const Tensor<T>& x = nodes_[n.srcs[0]].out;
    const int ckk = n.in_ch * n.kernel * n.kernel;
    const int ohw = n.out_h * n.out_w;
    n.out = Tensor<T>(with_batch(n.dims));
    n.cols = Tensor<T>({batch_, ckk, ohw});
    const Param& W = params_[n.w];
    const Param& B = params_[n.b];
    for (int s = 0; s < batch_; ++s) {
      const T* xs = x.ptr() + std::size_t(s) * n.in_ch * n.in_h * n.in_w;
      T* cols = n.cols.ptr() + std::size_t(s) * ckk * ohw;
      im2col(xs, n.in_ch, n.in_h, n.in_w, n.kernel, n.stride, n.out_h, n.out_w, cols);
      T* ys = n.out.ptr() + std::size_t(s) * n.out_ch * ohw;
      for (int oc = 0; oc < n.out_ch; ++oc) {
        T* yrow = ys + std::size_t(oc) * ohw;
        const T bias = B.value[oc];
        for (int p = 0; p < ohw; ++p) yrow[p] = bias;
      }
      gemm_nn(n.out_ch, ohw, ckk, W.value.ptr(), cols, ys);
    }
    apply_act(n);
  }

  void backward_conv(Node& n, Tensor<T>& g) {
    act_backward(n, g);
    const int ckk = n.in_ch * n.kernel * n.kernel;
    const int ohw = n.out_h * n.out_w;
    Param& W = params_[n.w];
    Param& B = params_[n.b];
    Tensor<T>& dx = grad_buf(n.srcs[0]);
    Tensor<T> dcols({ckk, ohw});
    for (int s = 0; s < batch_; ++s) {
      const T* gs = g.ptr() + std::size_t(s) * n.out_ch * ohw;
      const T* cols = n.cols.ptr() + std::size_t(s) * ckk * ohw;
      gemm_nt(n.out_ch, ckk, ohw, gs, cols, W.grad.ptr());
      for (int oc = 0; oc < n.out_ch; ++oc) {
        const T* grow = gs + std::size_t(oc) * ohw;
        T acc = T(0);
        for (int p = 0; p < ohw; ++p) acc += grow[p];
        B.grad[oc] += acc;
      }
      dcols.fill(T(0));
      gemm_tn(ckk, ohw, n.out_ch, W.value.ptr(), gs, dcols.ptr());
      T* dxs = dx.ptr() + std::size_t(s) * n.in_ch * n.in_h * n.in_w;
      col2im_add(dcols.ptr(), n.in_ch, n.in_h, n.in_w, n.kernel, n.stride, n.out_h, n.out_w, dxs);
    }
    add_weight_decay(W);
  }

  void forward_convt(Node& n) {
    const Tensor<T>& x = nodes_[n.srcs[0]].out;
    const int okk = n.out_ch * n.kernel * n.kernel;
    const int ihw = n.in_h * n.in_w;
    n.out = Tensor<T>(with_batch(n.dims));
    n.cols = Tensor<T>({batch_, okk, ihw});
    const Param& W = params_[n.w];
    const Param& B = params_[n.b];
    for (int s = 0; s < batch_; ++s) {
      const T* xs = x.ptr() + std::size_t(s) * n.in_ch * ihw;
      T* cols = n.cols.ptr() + std::size_t(s) * okk * ihw;
      std::fill(cols, cols + std::size_t(okk) * ihw, T(0));
      gemm_tn(okk, ihw, n.in_ch, W.value.ptr(), xs, cols);
      T* ys = n.out.ptr() + std::size_t(s) * n.out_ch * n.out_h * n.out_w;
      for (int oc = 0; oc < n.out_ch; ++oc) {
        T* yc = ys + std::size_t(oc) * n.out_h * n.out_w;
        const T bias = B.value[oc];
        for (int p = 0; p < n.out_h * n.out_w; ++p) yc[p] = bias;
      }
      // scatter: output grid viewed as the "image", input grid as its conv output
      col2im_add(cols, n.out_ch, n.out_h, n.out_w, n.kernel, n.stride, n.in_h, n.in_w, ys);
    }
    apply_act(n);
  }

  void backward_convt(Node& n, Tensor<T>& g) {
    act_backward(n, g);
    const int okk = n.out_ch * n.kernel * n.kernel;
    const int ihw = n.in_h * n.in_w;
    Param& W = params_[n.w];
    Param& B = params_[n.b];
    const Tensor<T>& x = nodes_[n.srcs[0]].out;
    Tensor<T>& dx = grad_buf(n.srcs[0]);
    Tensor<T> dcols({okk, ihw});
    for (int s = 0; s < batch_; ++s) {
      const T* gs = g.ptr() + std::size_t(s) * n.out_ch * n.out_h * n.out_w;
      im2col(gs, n.out_ch, n.out_h, n.out_w, n.kernel, n.stride, n.in_h, n.in_w, dcols.ptr());
      const T* xs = x.ptr() + std::size_t(s) * n.in_ch * ihw;
      gemm_nt(n.in_ch, okk, ihw, xs, dcols.ptr(), W.grad.ptr());
      for (int oc = 0; oc < n.out_ch; ++oc) {
        const T* gc = gs + std::size_t(oc) * n.out_h * n.out_w;
        T acc = T(0);
        for (int p = 0; p < n.out_h * n.out_w; ++p) acc += gc[p];
        B.grad[oc] += acc;
      }
      T* dxs = dx.ptr() + std::size_t(s) * n.in_ch * ihw;
      gemm_nn(n.in_ch, ihw, okk, W.value.ptr(), dcols.ptr(), dxs);
    }
    add_weight_decay(W);
  }

  void forward_concat(Node& n) {
    n.out = Tensor<T>(with_batch(n.dims));
    const int total = n.dims[0];
    int off = 0;
    for (NodeId s : n.srcs) {
      const Tensor<T>& x = nodes_[s].out;
      const int d = nodes_[s].dims[0];
      for (int b = 0; b < batch_; ++b) {
        const T* xs = x.ptr() + std::size_t(b) * d;
        T* ys = n.out.ptr() + std::size_t(b) * total + off;
        for (int i = 0; i < d; ++i) ys[i] = xs[i];
      }
      off += d;
    }
  }

  void backward_concat(Node& n, const Tensor<T>& g) {
    const int total = n.dims[0];
    int off = 0;
    for (NodeId s : n.srcs) {
      const int d = nodes_[s].dims[0];
      Tensor<T>& dst = grad_buf(s);
      for (int b = 0; b < batch_; ++b) {
        const T* gs = g.ptr() + std::size_t(b) * total + off;
        T* ds = dst.ptr() + std::size_t(b) * d;
        for (int i = 0; i < d; ++i) ds[i] += gs[i];
      }
      off += d;
    }
  }

  void add_weight_decay(Param& W) {
    if (W.weight_decay == T(0)) return;
    for (long i = 0; i < W.value.size(); ++i) W.grad[i] += W.weight_decay * W.value[i];
  }

  std::string name_;
  std::vector<Node> nodes_;
  std::vector<std::pair<std::string, NodeId>> inputs_;
  std::vector<std::pair<std::string, HeadSpec>> heads_;
  std::vector<Param> params_;
  std::vector<Tensor<T>> grads_;
  int batch_ = -1;
  bool has_cache_ = false;
};

}  // namespace wad::nn
