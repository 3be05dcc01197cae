#pragma once

#include <cmath>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "wad/nn/network.hpp"

namespace wad::nn {

struct GradCheckResult {
  double max_rel_err = 0.0;
  std::string worst_param;
  double analytic = 0.0;
  double numeric = 0.0;
};

// Central-difference verification of analytic gradients. `loss(true)` must run
// forward+backward and leave gradients accumulated on the given networks;
// `loss(false)` must evaluate the same scalar loss without touching gradients.
// Relative error uses a 1e-6 floor so near-zero gradient pairs do not blow up.
template <typename T>
GradCheckResult grad_check_multi(const std::vector<Network<T>*>& nets,
                                 const std::function<T(bool with_grad)>& loss, double h = 1e-5) {
  GradCheckResult res;
  for (auto* net : nets) net->zero_grads();
  loss(true);

  std::vector<std::vector<Tensor<T>>> analytic;
  for (auto* net : nets) {
    std::vector<Tensor<T>> g;
    for (auto& p : net->params()) g.push_back(p.grad);
    analytic.push_back(std::move(g));
  }

  for (std::size_t ni = 0; ni < nets.size(); ++ni) {
    auto& params = nets[ni]->params();
    for (std::size_t pi = 0; pi < params.size(); ++pi) {
      auto& p = params[pi];
      for (long j = 0; j < p.value.size(); ++j) {
        const T saved = p.value[j];
        p.value[j] = saved + T(h);
        const double lp = double(loss(false));
        p.value[j] = saved - T(h);
        const double lm = double(loss(false));
        p.value[j] = saved;
        const double num = (lp - lm) / (2.0 * h);
        const double ana = double(analytic[ni][pi][j]);
        const double rel = std::abs(ana - num) / std::max({1e-6, std::abs(ana), std::abs(num)});
        if (rel > res.max_rel_err) {
          res.max_rel_err = rel;
          res.worst_param = nets[ni]->name() + "." + p.name + "[" + std::to_string(j) + "]";
          res.analytic = ana;
          res.numeric = num;
        }
      }
    }
  }
  return res;
}

// Single-network convenience: the loss maps head outputs to a scalar and
// fills the gradient of the loss w.r.t. each head.
template <typename T>
GradCheckResult grad_check(
    Network<T>& net, const std::map<std::string, Tensor<T>>& inputs,
    const std::function<T(const std::map<std::string, Tensor<T>>& outs,
                          std::map<std::string, Tensor<T>>& head_grads)>& loss,
    double h = 1e-5) {
  auto eval = [&](bool with_grad) -> T {
    auto outs = net.forward(inputs);
    std::map<std::string, Tensor<T>> head_grads;
    const T l = loss(outs, head_grads);
    if (with_grad) net.backward(head_grads);
    return l;
  };
  return grad_check_multi<T>({&net}, eval, h);
}

}  // namespace wad::nn
