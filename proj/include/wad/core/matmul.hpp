#pragma once

#include <cstddef>

namespace wad {

// Accumulating GEMM kernels with loop orders chosen so the inner loop runs
// over contiguous memory and auto-vectorizes. All results are added into c.

// c[M,N] += a[M,K] * b[K,N]
template <typename T>
void gemm_nn(int M, int N, int K, const T* a, const T* b, T* c) {
  for (int m = 0; m < M; ++m) {
    T* cm = c + std::size_t(m) * N;
    const T* am = a + std::size_t(m) * K;
    for (int k = 0; k < K; ++k) {
      const T amk = am[k];
      const T* bk = b + std::size_t(k) * N;
      for (int n = 0; n < N; ++n) cm[n] += amk * bk[n];
    }
  }
}

// c[M,N] += a[M,K] * b[N,K]^T
template <typename T>
void gemm_nt(int M, int N, int K, const T* a, const T* b, T* c) {
  for (int m = 0; m < M; ++m) {
    const T* am = a + std::size_t(m) * K;
    T* cm = c + std::size_t(m) * N;
    for (int n = 0; n < N; ++n) {
      const T* bn = b + std::size_t(n) * K;
      T acc = T(0);
      for (int k = 0; k < K; ++k) acc += am[k] * bn[k];
      cm[n] += acc;
    }
  }
}

// c[M,N] += a[K,M]^T * b[K,N]
template <typename T>
void gemm_tn(int M, int N, int K, const T* a, const T* b, T* c) {
  for (int k = 0; k < K; ++k) {
    const T* ak = a + std::size_t(k) * M;
    const T* bk = b + std::size_t(k) * N;
    for (int m = 0; m < M; ++m) {
      const T akm = ak[m];
      T* cm = c + std::size_t(m) * N;
      for (int n = 0; n < N; ++n) cm[n] += akm * bk[n];
    }
  }
}

}  // namespace wad
