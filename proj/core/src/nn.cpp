#include "orn/nn.hpp"

namespace orn::nn {

template <typename T>
void add_linear(ParamStore<T>& store, const std::string& prefix, std::size_t in, std::size_t out,
                std::mt19937_64& rng) {
  store.add(prefix + ".w", glorot_uniform<T>({out, in}, in, out, rng));
  store.add(prefix + ".b", Tensor<T>({out}));
}

template <typename T>
ad::Var<T> linear(Bindings<T>& p, const std::string& prefix, const ad::Var<T>& x) {
  auto y = ad::matmul_nt(x, p(prefix + ".w"));
  return ad::add(y, ad::expand_rows(p(prefix + ".b"), y.dim(0)));
}

template <typename T>
void add_mlp(ParamStore<T>& store, const std::string& prefix, const std::vector<std::size_t>& dims,
             std::mt19937_64& rng) {
  for (std::size_t i = 0; i + 1 < dims.size(); ++i) {
    add_linear(store, prefix + "." + std::to_string(i), dims[i], dims[i + 1], rng);
  }
}

template <typename T>
ad::Var<T> mlp(Bindings<T>& p, const std::string& prefix, std::size_t layers, const ad::Var<T>& x,
               OutputActivation out) {
  ad::Var<T> h = x;
  for (std::size_t i = 0; i < layers; ++i) {
    h = linear(p, prefix + "." + std::to_string(i), h);
    const bool last = i + 1 == layers;
    if (!last || out == OutputActivation::relu) {
      h = ad::relu(h);
    } else if (out == OutputActivation::tanh) {
      h = ad::tanh(h);
    }
  }
  return h;
}

template <typename T>
void add_gru(ParamStore<T>& store, const std::string& prefix, std::size_t in, std::size_t hidden,
             std::mt19937_64& rng) {
  for (const char* gate : {"z", "r", "n"}) {
    store.add(prefix + ".w" + gate, glorot_uniform<T>({hidden, in}, in, hidden, rng));
    store.add(prefix + ".u" + gate, glorot_uniform<T>({hidden, hidden}, hidden, hidden, rng));
    store.add(prefix + ".b" + gate, Tensor<T>({hidden}));
  }
  store.add(prefix + ".bhn", Tensor<T>({hidden}));
}

template <typename T>
ad::Var<T> gru_step(Bindings<T>& p, const std::string& prefix, const ad::Var<T>& x, const ad::Var<T>& h) {
  auto gate = [&](const char* g) {
    auto a = ad::add(ad::matmul_nt(x, p(prefix + ".w" + g)), ad::matmul_nt(h, p(prefix + ".u" + g)));
    return ad::add(a, ad::reshape(p(prefix + ".b" + g), {1, a.dim(1)}));
  };
  auto z = ad::sigmoid(gate("z"));
  auto r = ad::sigmoid(gate("r"));
  const std::size_t hidden = h.dim(1);
  auto hn = ad::add(ad::matmul_nt(h, p(prefix + ".un")), ad::reshape(p(prefix + ".bhn"), {1, hidden}));
  auto xn = ad::add(ad::matmul_nt(x, p(prefix + ".wn")), ad::reshape(p(prefix + ".bn"), {1, hidden}));
  auto n = ad::tanh(ad::add(xn, ad::mul(r, hn)));
  auto keep = ad::mul(ad::affine(z, T{-1}, T{1}), h);
  return ad::add(keep, ad::mul(z, n));
}

#define ORN_INSTANTIATE_NN(T)                                                                                    \
  template void add_linear<T>(ParamStore<T>&, const std::string&, std::size_t, std::size_t, std::mt19937_64&); \
  template ad::Var<T> linear<T>(Bindings<T>&, const std::string&, const ad::Var<T>&);                          \
  template void add_mlp<T>(ParamStore<T>&, const std::string&, const std::vector<std::size_t>&,                \
                           std::mt19937_64&);                                                                  \
  template ad::Var<T> mlp<T>(Bindings<T>&, const std::string&, std::size_t, const ad::Var<T>&,                 \
                             OutputActivation);                                                                \
  template void add_gru<T>(ParamStore<T>&, const std::string&, std::size_t, std::size_t, std::mt19937_64&);    \
  template ad::Var<T> gru_step<T>(Bindings<T>&, const std::string&, const ad::Var<T>&, const ad::Var<T>&);

ORN_INSTANTIATE_NN(float)
ORN_INSTANTIATE_NN(double)

#undef ORN_INSTANTIATE_NN

}  // namespace orn::nn
