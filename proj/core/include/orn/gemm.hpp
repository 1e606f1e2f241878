#pragma once

#include <cstddef>

namespace orn {

// C[M,N] = op(A)[M,K] * op(B)[K,N], or C += ... when `accumulate` is set.
// op(A) = A^T when trans_a (A stored [K,M]); op(B) = B^T when trans_b
// (B stored [N,K]). Every output element is reduced over k in ascending order,
// independently of its row and column, so results do not depend on how rows
// are arranged.
template <typename T>
void gemm(bool trans_a, bool trans_b, std::size_t M, std::size_t N, std::size_t K, const T* A, const T* B, T* C,
          bool accumulate);

extern template void gemm<float>(bool, bool, std::size_t, std::size_t, std::size_t, const float*, const float*,
                                 float*, bool);
extern template void gemm<double>(bool, bool, std::size_t, std::size_t, std::size_t, const double*, const double*,
                                  double*, bool);

}  // namespace orn
