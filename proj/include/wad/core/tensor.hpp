#pragma once

#include <cmath>
#include <cstdint>
#include <numeric>
#include <vector>

#include "wad/core/error.hpp"

namespace wad {

inline long shape_numel(const std::vector<int>& shape) {
  long n = 1;
  for (int d : shape) n *= d;
  return n;
}

// Dense row-major tensor. Shape is runtime; scalar type is float on production
// paths and double on gradient-check paths.
template <typename T>
struct Tensor {
  std::vector<int> shape;
  std::vector<T> data;

  Tensor() = default;
  explicit Tensor(std::vector<int> s) : shape(std::move(s)), data(shape_numel(shape), T(0)) {}
  Tensor(std::vector<int> s, std::vector<T> d) : shape(std::move(s)), data(std::move(d)) {
    if (shape_numel(shape) != long(data.size()))
      throw Error(ErrorCode::dimension_mismatch, "tensor shape does not match data length");
  }

  static Tensor zeros(std::vector<int> s) { return Tensor(std::move(s)); }

  long size() const { return long(data.size()); }

  T* ptr() { return data.data(); }
  const T* ptr() const { return data.data(); }

  T& operator[](long i) { return data[std::size_t(i)]; }
  const T& operator[](long i) const { return data[std::size_t(i)]; }

  void fill(T v) { std::fill(data.begin(), data.end(), v); }

  bool all_finite() const {
    for (const T& v : data)
      if (!std::isfinite(double(v))) return false;
    return true;
  }

  template <typename U>
  Tensor<U> cast() const {
    Tensor<U> out;
    out.shape = shape;
    out.data.resize(data.size());
    for (std::size_t i = 0; i < data.size(); ++i) out.data[i] = U(data[i]);
    return out;
  }
};

inline bool same_shape(const std::vector<int>& a, const std::vector<int>& b) { return a == b; }

}  // namespace wad
