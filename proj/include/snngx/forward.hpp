#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "snngx/network.hpp"
#include "snngx/spike_train.hpp"

namespace snngx {

struct LifStepResult {
  std::vector<double> v_next;
  std::vector<std::uint8_t> spikes;
};

/// One discrete LIF update:
///   V' = lambda * V * (1 - O_prev) + I_ext, spike where V' >= v_th.
/// The (1 - O_prev) factor implements the multiplicative post-spike reset.
inline LifStepResult lif_step(std::span<const double> v, std::span<const double> i_ext,
                              std::span<const std::uint8_t> o_prev, const NeuronParams& p) {
  if (v.size() != i_ext.size() || v.size() != o_prev.size())
    throw validation_error("lif_step: V, I_ext and O_prev must have equal length");
  LifStepResult r;
  r.v_next.resize(v.size());
  r.spikes.resize(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    double vn = p.lambda * v[i] * (1.0 - static_cast<double>(o_prev[i])) + i_ext[i];
    r.v_next[i] = vn;
    r.spikes[i] = vn >= p.v_th ? 1 : 0;
  }
  return r;
}

namespace detail {

// In-place update; `spikes` holds O_prev on entry and O_next on return.
inline void lif_step_inplace(std::vector<double>& v, const std::vector<double>& i_ext,
                             std::vector<std::uint8_t>& spikes, const NeuronParams& p) {
  for (std::size_t i = 0; i < v.size(); ++i) {
    double vn = p.lambda * v[i] * (1.0 - static_cast<double>(spikes[i])) + i_ext[i];
    v[i] = vn;
    spikes[i] = vn >= p.v_th ? 1 : 0;
  }
}

/// Membrane update of the quantized path: integer lane sums scaled once per
/// layer per timestep. The datapath simulator calls this exact function so the
/// two paths agree bit-for-bit once the integer sums agree.
inline void quant_membrane_step(std::vector<double>& v, const std::vector<std::int64_t>& sums,
                                double delta, std::vector<std::uint8_t>& spikes,
                                const NeuronParams& p) {
  for (std::size_t i = 0; i < v.size(); ++i) {
    double i_ext = static_cast<double>(sums[i]) * delta;
    double vn = p.lambda * v[i] * (1.0 - static_cast<double>(spikes[i])) + i_ext;
    v[i] = vn;
    spikes[i] = vn >= p.v_th ? 1 : 0;
  }
}

inline std::size_t argmax_lowest(const std::vector<std::uint64_t>& counts) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < counts.size(); ++i)
    if (counts[i] > counts[best]) best = i;
  return best;
}

}  // namespace detail

struct ForwardResult {
  std::size_t prediction = 0;
  std::vector<std::uint64_t> class_spike_counts;
};

/// Integer partial sums of the quantized path, [layer][timestep][neuron].
struct QuantTrace {
  std::vector<Matrix<std::int64_t>> sums;
};

inline ForwardResult forward(const FloatNetwork& net, const SpikeTrain& sample) {
  if (sample.features() != net.input_features())
    throw validation_error("forward: sample features do not match first layer n_in");

  const std::size_t depth = net.layers.size();
  std::vector<std::vector<double>> v(depth);
  std::vector<std::vector<std::uint8_t>> spikes(depth);
  for (std::size_t i = 0; i < depth; ++i) {
    v[i].assign(net.layers[i].n_out(), 0.0);
    spikes[i].assign(net.layers[i].n_out(), 0);
  }

  ForwardResult out;
  out.class_spike_counts.assign(net.num_classes, 0);
  std::vector<double> i_ext;
  for (std::size_t t = 0; t < sample.timesteps(); ++t) {
    for (std::size_t li = 0; li < depth; ++li) {
      const FloatLayer& layer = net.layers[li];
      const std::uint8_t* in = li == 0 ? sample.row(t) : spikes[li - 1].data();
      const std::size_t n_in = layer.n_in();
      i_ext.assign(layer.n_out(), 0.0);
      for (std::size_t j = 0; j < n_in; ++j) {
        if (!in[j]) continue;
        for (std::size_t o = 0; o < layer.n_out(); ++o) i_ext[o] += layer.weights(o, j);
      }
      if (layer.kind == LayerKind::Recurrent) {
        // spikes[li] still holds this layer's output from t-1.
        for (std::size_t j = 0; j < layer.n_out(); ++j) {
          if (!spikes[li][j]) continue;
          for (std::size_t o = 0; o < layer.n_out(); ++o)
            i_ext[o] += layer.recurrent_weights(o, j);
        }
      }
      detail::lif_step_inplace(v[li], i_ext, spikes[li], layer.neuron);
    }
    for (std::size_t c = 0; c < net.num_classes; ++c) out.class_spike_counts[c] += spikes.back()[c];
  }
  out.prediction = detail::argmax_lowest(out.class_spike_counts);
  return out;
}

inline ForwardResult forward(const QuantizedNetwork& net, const SpikeTrain& sample,
                             QuantTrace* trace = nullptr) {
  if (sample.features() != net.input_features())
    throw validation_error("forward: sample features do not match first layer n_in");

  const std::size_t depth = net.layers.size();
  const std::size_t steps = sample.timesteps();
  std::vector<std::vector<double>> v(depth);
  std::vector<std::vector<std::uint8_t>> spikes(depth);
  for (std::size_t i = 0; i < depth; ++i) {
    v[i].assign(net.layers[i].n_out(), 0.0);
    spikes[i].assign(net.layers[i].n_out(), 0);
  }
  if (trace) {
    trace->sums.clear();
    for (std::size_t i = 0; i < depth; ++i)
      trace->sums.emplace_back(steps, net.layers[i].n_out(), 0);
  }

  ForwardResult out;
  out.class_spike_counts.assign(net.num_classes, 0);
  std::vector<std::int64_t> sums;
  for (std::size_t t = 0; t < steps; ++t) {
    for (std::size_t li = 0; li < depth; ++li) {
      const QuantLayer& layer = net.layers[li];
      const std::uint8_t* in = li == 0 ? sample.row(t) : spikes[li - 1].data();
      sums.assign(layer.n_out(), 0);
      for (std::size_t j = 0; j < layer.n_in(); ++j) {
        if (!in[j]) continue;
        for (std::size_t o = 0; o < layer.n_out(); ++o) sums[o] += layer.weights(o, j);
      }
      if (layer.kind == LayerKind::Recurrent) {
        for (std::size_t j = 0; j < layer.n_out(); ++j) {
          if (!spikes[li][j]) continue;
          for (std::size_t o = 0; o < layer.n_out(); ++o) sums[o] += layer.recurrent_weights(o, j);
        }
      }
      if (trace)
        for (std::size_t o = 0; o < layer.n_out(); ++o) trace->sums[li](t, o) = sums[o];
      detail::quant_membrane_step(v[li], sums, layer.delta, spikes[li], layer.neuron);
    }
    for (std::size_t c = 0; c < net.num_classes; ++c) out.class_spike_counts[c] += spikes.back()[c];
  }
  out.prediction = detail::argmax_lowest(out.class_spike_counts);
  return out;
}

template <class Net>
double evaluate_accuracy(const Net& net, const Dataset& ds) {
  if (ds.samples.empty()) throw validation_error("evaluate_accuracy: dataset is empty");
  std::size_t correct = 0;
  for (const auto& s : ds.samples)
    if (forward(net, s.input).prediction == s.label) ++correct;
  return static_cast<double>(correct) / static_cast<double>(ds.samples.size());
}

}  // namespace snngx
