#pragma once

#include <random>
#include <string>
#include <vector>

#include "orn/ops.hpp"
#include "orn/params.hpp"

// Parameterised building blocks shared by every head: affine maps,
// perceptrons and the gated recurrent unit.
namespace orn::nn {

// Registers `<prefix>.w` [out,in] and `<prefix>.b` [out].
template <typename T>
void add_linear(ParamStore<T>& store, const std::string& prefix, std::size_t in, std::size_t out,
                std::mt19937_64& rng);

// x [n,in] -> x W^T + b, [n,out].
template <typename T>
ad::Var<T> linear(Bindings<T>& p, const std::string& prefix, const ad::Var<T>& x);

// Perceptron with layer widths dims[0] -> dims[1] -> ... ; layers are named
// `<prefix>.0`, `<prefix>.1`, ...
template <typename T>
void add_mlp(ParamStore<T>& store, const std::string& prefix, const std::vector<std::size_t>& dims,
             std::mt19937_64& rng);

enum class OutputActivation { none, relu, tanh };

// ReLU between layers; `out` chooses the activation after the last one.
template <typename T>
ad::Var<T> mlp(Bindings<T>& p, const std::string& prefix, std::size_t layers, const ad::Var<T>& x,
               OutputActivation out);

// Gated recurrent unit with update gate z, reset gate r and tanh candidate:
//   z  = sigmoid(x Wz^T + h Uz^T + bz)
//   r  = sigmoid(x Wr^T + h Ur^T + br)
//   n  = tanh(x Wn^T + bn + r * (h Un^T + bhn))
//   h' = (1 - z) * h + z * n
template <typename T>
void add_gru(ParamStore<T>& store, const std::string& prefix, std::size_t in, std::size_t hidden,
             std::mt19937_64& rng);

// x [1,in], h [1,hidden] -> [1,hidden]
template <typename T>
ad::Var<T> gru_step(Bindings<T>& p, const std::string& prefix, const ad::Var<T>& x, const ad::Var<T>& h);

}  // namespace orn::nn
