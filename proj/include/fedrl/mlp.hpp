// Copyright (C) 2026 fedrl contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Fully connected network with ReLU hidden layers, identity output and
// inverted dropout after each hidden layer.
//
// Parameters live in one contiguous buffer in canonical layer-major order:
// for each layer, the weights as an [in x out] row-major block followed by the
// out biases. flatten/unflatten is a plain copy of that buffer.

#include <cstddef>
#include <span>
#include <vector>

#include "fedrl/common.hpp"

namespace fedrl {

enum class Mode { kEval, kTrain };

template <typename T>
struct MlpWorkspace {
  std::size_t batch = 0;
  bool train = false;
  std::vector<T> input;
  std::vector<std::vector<T>> acts;   // acts[l]: output of layer l
  std::vector<std::vector<T>> grads;  // grads[l]: dL/d acts[l]
  std::vector<T> transpose;
};

template <typename T>
class Mlp {
 public:
  Mlp() = default;
  Mlp(std::vector<std::size_t> dims, std::vector<double> dropout);

  const std::vector<std::size_t>& dims() const { return dims_; }
  const std::vector<double>& dropout() const { return dropout_; }
  std::size_t input_dim() const { return dims_.front(); }
  std::size_t output_dim() const { return dims_.back(); }
  std::size_t layer_count() const { return dims_.size() - 1; }
  std::size_t param_count() const { return params_.size(); }

  std::span<T> params() { return params_; }
  std::span<const T> params() const { return params_; }
  std::size_t weight_offset(std::size_t layer) const { return offsets_[layer]; }
  std::size_t bias_offset(std::size_t layer) const { return offsets_[layer] + dims_[layer] * dims_[layer + 1]; }

  /// U(-1/sqrt(fan_in), 1/sqrt(fan_in)) for weights and biases.
  void init_uniform(Rng& rng);

  /// Runs `batch` rows of `input` (row-major, batch x input_dim). Train mode
  /// applies dropout and needs `rng`. Returns the batch x output_dim block.
  std::span<const T> forward(std::span<const T> input, std::size_t batch, MlpWorkspace<T>& ws, Mode mode,
                             Rng* rng) const;

  /// Backpropagates d_out (batch x output_dim) through the last forward held
  /// in `ws`, overwriting `grad` (param_count entries).
  void backward(MlpWorkspace<T>& ws, std::span<const T> d_out, std::span<T> grad) const;

 private:
  std::vector<std::size_t> dims_;
  std::vector<double> dropout_;
  std::vector<std::size_t> offsets_;
  std::vector<T> params_;
};

/// Sum over layers of fan_in * fan_out + fan_out.
std::size_t mlp_param_count(const std::vector<std::size_t>& dims);

extern template class Mlp<float>;
extern template class Mlp<double>;

}  // namespace fedrl
