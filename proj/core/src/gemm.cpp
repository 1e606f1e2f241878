#include "orn/gemm.hpp"

#include <algorithm>
#include <vector>

namespace orn {

namespace {

template <typename T>
inline void axpy_row(T* __restrict c, const T* __restrict b, T a, std::size_t n) {
  for (std::size_t j = 0; j < n; ++j) c[j] += a * b[j];
}

}  // namespace

template <typename T>
void gemm(bool trans_a, bool trans_b, std::size_t M, std::size_t N, std::size_t K, const T* A, const T* B, T* C,
          bool accumulate) {
  if (!accumulate) std::fill(C, C + M * N, T{0});
  if (M == 0 || N == 0 || K == 0) return;

  std::vector<T> bt;
  const T* b_rows = B;
  if (trans_b) {
    bt.resize(K * N);
    for (std::size_t n = 0; n < N; ++n) {
      const T* src = B + n * K;
      for (std::size_t k = 0; k < K; ++k) bt[k * N + n] = src[k];
    }
    b_rows = bt.data();
  }

  for (std::size_t i = 0; i < M; ++i) {
    T* c = C + i * N;
    for (std::size_t k = 0; k < K; ++k) {
      const T a = trans_a ? A[k * M + i] : A[i * K + k];
      if (a == T{0}) continue;
      axpy_row(c, b_rows + k * N, a, N);
    }
  }
}

template void gemm<float>(bool, bool, std::size_t, std::size_t, std::size_t, const float*, const float*, float*,
                          bool);
template void gemm<double>(bool, bool, std::size_t, std::size_t, std::size_t, const double*, const double*, double*,
                           bool);

}  // namespace orn
