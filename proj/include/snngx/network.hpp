#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "snngx/errors.hpp"

namespace snngx {

enum class LayerKind { FullyConnected, Recurrent };

inline const char* to_string(LayerKind k) {
  return k == LayerKind::FullyConnected ? "FullyConnected" : "Recurrent";
}

inline LayerKind layer_kind_from_string(const std::string& s) {
  if (s == "FullyConnected") return LayerKind::FullyConnected;
  if (s == "Recurrent") return LayerKind::Recurrent;
  throw validation_error("unknown layer kind: " + s);
}

struct NeuronParams {
  double lambda = 0.9;  // membrane decay per step
  double v_th = 1.0;    // firing threshold

  bool operator==(const NeuronParams&) const = default;

  void validate() const {
    if (!(lambda >= 0.0 && lambda < 1.0))
      throw validation_error("NeuronParams: lambda must be in [0, 1)");
    if (!(v_th > 0.0)) throw validation_error("NeuronParams: v_th must be > 0");
  }
};

/// Dense row-major matrix, rows x cols.
template <class T>
class Matrix {
public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, T fill = T{})
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  T& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  const T& operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
  T& operator[](std::size_t flat) { return data_[flat]; }
  const T& operator[](std::size_t flat) const { return data_[flat]; }

  const T* row(std::size_t r) const { return data_.data() + r * cols_; }
  T* row(std::size_t r) { return data_.data() + r * cols_; }

  std::vector<T>& data() noexcept { return data_; }
  const std::vector<T>& data() const noexcept { return data_; }

  bool operator==(const Matrix&) const = default;

private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<T> data_;
};

struct FloatLayer {
  LayerKind kind = LayerKind::FullyConnected;
  Matrix<double> weights;             // n_out x n_in
  Matrix<double> recurrent_weights;   // n_out x n_out, Recurrent only
  NeuronParams neuron;

  std::size_t n_in() const noexcept { return weights.cols(); }
  std::size_t n_out() const noexcept { return weights.rows(); }

  bool operator==(const FloatLayer&) const = default;
};

struct QuantLayer {
  LayerKind kind = LayerKind::FullyConnected;
  Matrix<std::int32_t> weights;            // n_out x n_in, two's-complement n_bit values
  Matrix<std::int32_t> recurrent_weights;  // n_out x n_out, Recurrent only
  double delta = 1.0;                      // shared dequantization scale of this layer
  NeuronParams neuron;

  std::size_t n_in() const noexcept { return weights.cols(); }
  std::size_t n_out() const noexcept { return weights.rows(); }

  bool operator==(const QuantLayer&) const = default;
};

namespace detail {

template <class Layer>
void validate_topology(const std::vector<Layer>& layers, std::uint16_t num_classes) {
  if (layers.empty()) throw validation_error("network: needs at least one layer");
  for (std::size_t i = 0; i < layers.size(); ++i) {
    const auto& l = layers[i];
    if (l.weights.rows() == 0 || l.weights.cols() == 0)
      throw validation_error("network: layer " + std::to_string(i) + " is empty");
    l.neuron.validate();
    if (l.kind == LayerKind::Recurrent) {
      if (l.recurrent_weights.rows() != l.n_out() || l.recurrent_weights.cols() != l.n_out())
        throw validation_error("network: layer " + std::to_string(i) +
                               " recurrent_weights must be n_out x n_out");
    } else if (!l.recurrent_weights.empty()) {
      throw validation_error("network: layer " + std::to_string(i) +
                             " is FullyConnected but has recurrent_weights");
    }
    if (i > 0 && l.n_in() != layers[i - 1].n_out())
      throw validation_error("network: layer " + std::to_string(i) +
                             " n_in does not chain with previous n_out");
  }
  if (layers.back().n_out() != num_classes)
    throw validation_error("network: final layer n_out must equal num_classes");
}

}  // namespace detail

struct FloatNetwork {
  std::vector<FloatLayer> layers;
  std::uint16_t num_classes = 0;

  std::size_t input_features() const { return layers.front().n_in(); }

  bool operator==(const FloatNetwork&) const = default;

  void validate() const { detail::validate_topology(layers, num_classes); }
};

struct QuantizedNetwork {
  std::vector<QuantLayer> layers;
  std::uint16_t num_classes = 0;
  int n_bit = 8;

  std::size_t input_features() const { return layers.front().n_in(); }

  bool operator==(const QuantizedNetwork&) const = default;

  void validate() const {
    if (n_bit < 2 || n_bit > 16)
      throw validation_error("QuantizedNetwork: n_bit must be in [2, 16]");
    detail::validate_topology(layers, num_classes);
    const std::int32_t lo = -(std::int32_t(1) << (n_bit - 1));
    const std::int32_t hi = (std::int32_t(1) << (n_bit - 1)) - 1;
    for (std::size_t i = 0; i < layers.size(); ++i) {
      const auto& l = layers[i];
      if (!(l.delta > 0.0))
        throw validation_error("QuantizedNetwork: layer " + std::to_string(i) +
                               " delta must be > 0");
      auto check = [&](const Matrix<std::int32_t>& m) {
        for (std::int32_t w : m.data())
          if (w < lo || w > hi)
            throw validation_error("QuantizedNetwork: layer " + std::to_string(i) +
                                   " weight " + std::to_string(w) + " outside n_bit range");
      };
      check(l.weights);
      check(l.recurrent_weights);
    }
  }
};

}  // namespace snngx
