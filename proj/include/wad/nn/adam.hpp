#pragma once

#include <cmath>
#include <vector>

#include "wad/core/error.hpp"
#include "wad/nn/network.hpp"

namespace wad::nn {

// Bias-corrected Adam. Weight decay is not handled here; the network adds
// lambda*w to the weight gradients during backward.
template <typename T>
struct AdamState {
  T lr = T(1e-4);
  T beta1 = T(0.9);
  T beta2 = T(0.999);
  T eps = T(1e-8);
  long t = 0;
  std::vector<Tensor<T>> m, v;

  explicit AdamState(T learning_rate = T(1e-4)) : lr(learning_rate) {}

  void attach(const Network<T>& net) {
    m.clear();
    v.clear();
    for (const auto& p : net.params()) {
      m.push_back(Tensor<T>(p.value.shape));
      v.push_back(Tensor<T>(p.value.shape));
    }
    t = 0;
  }
};

template <typename T>
void adam_step(Network<T>& net, AdamState<T>& st) {
  auto& params = net.params();
  if (st.m.size() != params.size())
    throw Error(ErrorCode::dimension_mismatch, net.name() + ": adam state not attached to network");
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (!same_shape(st.m[i].shape, params[i].value.shape))
      throw Error(ErrorCode::dimension_mismatch,
                  net.name() + ": adam moment shape mismatch on " + params[i].name);
    if (!params[i].grad.all_finite())
      throw Error(ErrorCode::non_finite, net.name() + ": non-finite gradient on " + params[i].name);
  }
  st.t += 1;
  const T bc1 = T(1) - T(std::pow(double(st.beta1), double(st.t)));
  const T bc2 = T(1) - T(std::pow(double(st.beta2), double(st.t)));
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto& p = params[i];
    T* m = st.m[i].ptr();
    T* v = st.v[i].ptr();
    T* w = p.value.ptr();
    const T* g = p.grad.ptr();
    const long n = p.value.size();
    for (long j = 0; j < n; ++j) {
      m[j] = st.beta1 * m[j] + (T(1) - st.beta1) * g[j];
      v[j] = st.beta2 * v[j] + (T(1) - st.beta2) * g[j] * g[j];
      const T mhat = m[j] / bc1;
      const T vhat = v[j] / bc2;
      w[j] -= st.lr * mhat / (std::sqrt(vhat) + st.eps);
    }
  }
}

// theta_target <- tau*theta + (1-tau)*theta_target
template <typename T>
void polyak_update(const Network<T>& src, Network<T>& target, T tau) {
  const auto& sp = src.params();
  auto& tp = target.params();
  if (sp.size() != tp.size())
    throw Error(ErrorCode::dimension_mismatch, "polyak: parameter count mismatch");
  for (std::size_t i = 0; i < sp.size(); ++i) {
    const long n = sp[i].value.size();
    for (long j = 0; j < n; ++j)
      tp[i].value[j] = tau * sp[i].value[j] + (T(1) - tau) * tp[i].value[j];
  }
}

}  // namespace wad::nn
