#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>

#include "snngx/network.hpp"

namespace snngx {

/// Round half away from zero, the symmetric deterministic choice.
inline std::int64_t round_half_away(double x) { return std::llround(x); }

/// Symmetric per-layer quantization: delta = max|w| / (2^(n_bit-1) - 1) over
/// all weights of the layer (recurrent included, so one scale serves the
/// whole layer), then clamp(round(w / delta)) into the n_bit range.
inline QuantizedNetwork quantize(const FloatNetwork& net, int n_bit = 8) {
  if (n_bit < 2) throw validation_error("quantize: n_bit must be >= 2");
  if (n_bit > 16) throw validation_error("quantize: n_bit must be <= 16");
  net.validate();

  const std::int64_t q_hi = (std::int64_t(1) << (n_bit - 1)) - 1;
  const std::int64_t q_lo = -(std::int64_t(1) << (n_bit - 1));

  QuantizedNetwork out;
  out.num_classes = net.num_classes;
  out.n_bit = n_bit;
  out.layers.reserve(net.layers.size());
  for (std::size_t li = 0; li < net.layers.size(); ++li) {
    const FloatLayer& fl = net.layers[li];
    double max_abs = 0.0;
    for (double w : fl.weights.data()) max_abs = std::max(max_abs, std::fabs(w));
    for (double w : fl.recurrent_weights.data()) max_abs = std::max(max_abs, std::fabs(w));
    if (max_abs == 0.0)
      throw validation_error("quantize: layer " + std::to_string(li) +
                             " is all-zero, scale would be degenerate");

    QuantLayer ql;
    ql.kind = fl.kind;
    ql.neuron = fl.neuron;
    ql.delta = max_abs / static_cast<double>(q_hi);
    auto quantize_matrix = [&](const Matrix<double>& src) {
      Matrix<std::int32_t> dst(src.rows(), src.cols());
      for (std::size_t i = 0; i < src.size(); ++i) {
        std::int64_t q = round_half_away(src[i] / ql.delta);
        dst[i] = static_cast<std::int32_t>(std::clamp(q, q_lo, q_hi));
      }
      return dst;
    };
    ql.weights = quantize_matrix(fl.weights);
    if (fl.kind == LayerKind::Recurrent) ql.recurrent_weights = quantize_matrix(fl.recurrent_weights);
    out.layers.push_back(std::move(ql));
  }
  return out;
}

}  // namespace snngx
