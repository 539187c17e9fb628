// Copyright (C) 2026 fedrl contributors
// SPDX-License-Identifier: Apache-2.0

#include "fedrl/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

#include "fedrl/simd/kernels.hpp"

namespace fedrl {

std::size_t mlp_param_count(const std::vector<std::size_t>& dims) {
  std::size_t n = 0;
  for (std::size_t l = 0; l + 1 < dims.size(); ++l) n += dims[l] * dims[l + 1] + dims[l + 1];
  return n;
}

template <typename T>
Mlp<T>::Mlp(std::vector<std::size_t> dims, std::vector<double> dropout)
    : dims_(std::move(dims)), dropout_(std::move(dropout)) {
  if (dims_.size() < 2) throw ValidationError("mlp: need at least input and output dims");
  for (auto d : dims_) {
    if (d == 0) throw ValidationError("mlp: layer dims must be positive");
  }
  const std::size_t hidden = dims_.size() - 2;
  if (dropout_.empty()) dropout_.assign(hidden, 0.0);
  if (dropout_.size() != hidden) {
    throw ValidationError("mlp: expected " + std::to_string(hidden) + " dropout rates, got " +
                          std::to_string(dropout_.size()));
  }
  for (double p : dropout_) {
    if (!(p >= 0 && p < 1)) throw ValidationError("mlp: dropout rates must be in [0, 1)");
  }
  std::size_t off = 0;
  for (std::size_t l = 0; l + 1 < dims_.size(); ++l) {
    offsets_.push_back(off);
    off += dims_[l] * dims_[l + 1] + dims_[l + 1];
  }
  params_.assign(off, T(0));
}

template <typename T>
void Mlp<T>::init_uniform(Rng& rng) {
  for (std::size_t l = 0; l < layer_count(); ++l) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(dims_[l]));
    const std::size_t n = dims_[l] * dims_[l + 1] + dims_[l + 1];
    T* p = params_.data() + offsets_[l];
    for (std::size_t i = 0; i < n; ++i) p[i] = static_cast<T>((2.0 * uniform01(rng) - 1.0) * bound);
  }
}

template <typename T>
std::span<const T> Mlp<T>::forward(std::span<const T> input, std::size_t batch, MlpWorkspace<T>& ws, Mode mode,
                                   Rng* rng) const {
  if (input.size() != batch * input_dim()) {
    throw ValidationError("mlp: input has " + std::to_string(input.size()) + " values, expected " +
                          std::to_string(batch * input_dim()));
  }
  const bool train = mode == Mode::kTrain;
  if (train && !rng) throw ValidationError("mlp: train-mode forward needs an rng");
  const auto& k = simd::kernels<T>();
  ws.batch = batch;
  ws.train = train;
  ws.input.assign(input.begin(), input.end());
  ws.acts.resize(layer_count());
  const T* x = ws.input.data();
  for (std::size_t l = 0; l < layer_count(); ++l) {
    const std::size_t in = dims_[l], out = dims_[l + 1];
    auto& y = ws.acts[l];
    y.resize(batch * out);
    const T* w = params_.data() + offsets_[l];
    const T* b = w + in * out;
    for (std::size_t i = 0; i < batch; ++i) std::memcpy(y.data() + i * out, b, out * sizeof(T));
    k.gemm(batch, out, in, x, in, 1, w, out, y.data(), out);
    if (l + 1 < layer_count()) {
      for (auto& v : y) v = v > T(0) ? v : T(0);
      const double rate = dropout_[l];
      if (train && rate > 0) {
        // Keep with probability 1 - rate, two 32-bit draws per rng call.
        const auto threshold = static_cast<std::uint64_t>(rate * 4294967296.0);
        const T scale = static_cast<T>(1.0 / (1.0 - rate));
        std::size_t i = 0;
        const std::size_t n = y.size();
        while (i < n) {
          const std::uint64_t r = (*rng)();
          y[i] = (r & 0xffffffffULL) >= threshold ? y[i] * scale : T(0);
          if (++i < n) {
            y[i] = (r >> 32) >= threshold ? y[i] * scale : T(0);
            ++i;
          }
        }
      }
    }
    x = y.data();
  }
  return ws.acts.back();
}

template <typename T>
void Mlp<T>::backward(MlpWorkspace<T>& ws, std::span<const T> d_out, std::span<T> grad) const {
  const std::size_t batch = ws.batch;
  if (d_out.size() != batch * output_dim()) throw ValidationError("mlp: d_out size mismatch");
  if (grad.size() != param_count()) throw ValidationError("mlp: grad size mismatch");
  const auto& k = simd::kernels<T>();
  std::fill(grad.begin(), grad.end(), T(0));
  ws.grads.resize(layer_count());
  ws.grads.back().assign(d_out.begin(), d_out.end());
  for (std::size_t l = layer_count(); l-- > 0;) {
    const std::size_t in = dims_[l], out = dims_[l + 1];
    auto& d = ws.grads[l];
    if (l + 1 < layer_count()) {
      // Through dropout and ReLU: a positive output means the unit was active and kept.
      const double rate = ws.train ? dropout_[l] : 0.0;
      const T scale = static_cast<T>(1.0 / (1.0 - rate));
      const auto& a = ws.acts[l];
      for (std::size_t i = 0; i < d.size(); ++i) d[i] = a[i] > T(0) ? d[i] * scale : T(0);
    }
    const T* x = l == 0 ? ws.input.data() : ws.acts[l - 1].data();
    T* gw = grad.data() + offsets_[l];
    T* gb = gw + in * out;
    k.gemm(in, out, batch, x, 1, in, d.data(), out, gw, out);
    for (std::size_t i = 0; i < batch; ++i) k.axpy(out, T(1), d.data() + i * out, gb);
    if (l > 0) {
      const T* w = params_.data() + offsets_[l];
      ws.transpose.resize(in * out);
      for (std::size_t r = 0; r < in; ++r) {
        for (std::size_t c = 0; c < out; ++c) ws.transpose[c * in + r] = w[r * out + c];
      }
      auto& dprev = ws.grads[l - 1];
      dprev.assign(batch * in, T(0));
      k.gemm(batch, in, out, d.data(), out, 1, ws.transpose.data(), in, dprev.data(), in);
    }
  }
}

template class Mlp<float>;
template class Mlp<double>;

}  // namespace fedrl
