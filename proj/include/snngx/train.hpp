#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "snngx/forward.hpp"
#include "snngx/network.hpp"
#include "snngx/rng.hpp"
#include "snngx/spike_train.hpp"

namespace snngx {

struct ToyArchLayer {
  LayerKind kind = LayerKind::FullyConnected;
  std::size_t n_out = 0;
};

/// Architecture shorthand, e.g. "64F-32F-4F" or "128F-200R-28F". The first
/// token is the input feature count; each later token adds a layer (F fully
/// connected, R recurrent).
struct ToyArch {
  std::size_t input_features = 0;
  std::vector<ToyArchLayer> layers;

  static ToyArch parse(const std::string& text) {
    ToyArch arch;
    std::size_t pos = 0;
    bool first = true;
    while (pos < text.size()) {
      std::size_t end = text.find('-', pos);
      if (end == std::string::npos) end = text.size();
      std::string token = text.substr(pos, end - pos);
      if (token.size() < 2) throw validation_error("arch: bad token '" + token + "'");
      char kind_ch = token.back();
      std::size_t n = 0;
      for (std::size_t i = 0; i + 1 < token.size(); ++i) {
        if (!std::isdigit(static_cast<unsigned char>(token[i])))
          throw validation_error("arch: bad token '" + token + "'");
        n = n * 10 + static_cast<std::size_t>(token[i] - '0');
      }
      if (n == 0) throw validation_error("arch: layer width must be >= 1 in '" + token + "'");
      if (first) {
        if (kind_ch != 'F')
          throw validation_error("arch: input token must use F, got '" + token + "'");
        arch.input_features = n;
        first = false;
      } else if (kind_ch == 'F') {
        arch.layers.push_back({LayerKind::FullyConnected, n});
      } else if (kind_ch == 'R') {
        arch.layers.push_back({LayerKind::Recurrent, n});
      } else {
        throw validation_error(std::string("arch: unsupported layer kind '") + kind_ch + "'");
      }
      pos = end + 1;
    }
    if (arch.input_features == 0 || arch.layers.empty())
      throw validation_error("arch: need an input width and at least one layer");
    return arch;
  }
};

inline FloatNetwork init_network(const ToyArch& arch, const NeuronParams& neuron,
                                 std::uint64_t seed) {
  FloatNetwork net;
  net.num_classes = static_cast<std::uint16_t>(arch.layers.back().n_out);
  std::size_t n_in = arch.input_features;
  for (std::size_t li = 0; li < arch.layers.size(); ++li) {
    const auto& spec = arch.layers[li];
    FloatLayer layer;
    layer.kind = spec.kind;
    layer.neuron = neuron;
    layer.weights = Matrix<double>(spec.n_out, n_in);
    double bound = std::sqrt(6.0 / static_cast<double>(n_in + spec.n_out));
    CounterRng rng(seed, li, 0);
    for (auto& w : layer.weights.data()) w = rng.uniform(-bound, bound);
    if (spec.kind == LayerKind::Recurrent) {
      layer.recurrent_weights = Matrix<double>(spec.n_out, spec.n_out);
      double rbound = std::sqrt(6.0 / static_cast<double>(2 * spec.n_out));
      CounterRng rrng(seed, li, 1);
      for (auto& w : layer.recurrent_weights.data()) w = rrng.uniform(-rbound, rbound);
    }
    net.layers.push_back(std::move(layer));
    n_in = spec.n_out;
  }
  net.validate();
  return net;
}

struct LayerGradient {
  Matrix<double> weights;
  Matrix<double> recurrent;
};

struct LossGradient {
  double loss = 0.0;
  std::vector<LayerGradient> layers;
};

namespace detail {

// Training-time spike relaxation: a unit ramp centred on the threshold whose
// slope is the rectangular surrogate window. The forward value is continuous,
// so the analytic gradient below is the true gradient of surrogate_loss and
// can be checked against finite differences.
inline double surrogate_spike(double v, double v_th, double window) {
  double s = (v - v_th + window) / (2.0 * window);
  return std::clamp(s, 0.0, 1.0);
}

inline double surrogate_spike_grad(double v, double v_th, double window) {
  return std::fabs(v - v_th) < window ? 1.0 / (2.0 * window) : 0.0;
}

struct SoftTrajectory {
  // [layer][t][neuron]
  std::vector<Matrix<double>> v;
  std::vector<Matrix<double>> s;
  std::vector<double> logits;  // summed output activity per class
};

inline SoftTrajectory soft_forward(const FloatNetwork& net, const SpikeTrain& sample,
                                   double window) {
  const std::size_t depth = net.layers.size();
  const std::size_t steps = sample.timesteps();
  SoftTrajectory traj;
  traj.v.reserve(depth);
  traj.s.reserve(depth);
  for (const auto& l : net.layers) {
    traj.v.emplace_back(steps, l.n_out(), 0.0);
    traj.s.emplace_back(steps, l.n_out(), 0.0);
  }
  traj.logits.assign(net.num_classes, 0.0);

  std::vector<double> a;
  for (std::size_t t = 0; t < steps; ++t) {
    for (std::size_t li = 0; li < depth; ++li) {
      const FloatLayer& layer = net.layers[li];
      a.assign(layer.n_out(), 0.0);
      if (li == 0) {
        const std::uint8_t* in = sample.row(t);
        for (std::size_t j = 0; j < layer.n_in(); ++j) {
          if (!in[j]) continue;
          for (std::size_t o = 0; o < layer.n_out(); ++o) a[o] += layer.weights(o, j);
        }
      } else {
        const double* in = traj.s[li - 1].row(t);
        for (std::size_t j = 0; j < layer.n_in(); ++j) {
          if (in[j] == 0.0) continue;
          for (std::size_t o = 0; o < layer.n_out(); ++o) a[o] += layer.weights(o, j) * in[j];
        }
      }
      if (layer.kind == LayerKind::Recurrent && t > 0) {
        const double* prev = traj.s[li].row(t - 1);
        for (std::size_t j = 0; j < layer.n_out(); ++j) {
          if (prev[j] == 0.0) continue;
          for (std::size_t o = 0; o < layer.n_out(); ++o)
            a[o] += layer.recurrent_weights(o, j) * prev[j];
        }
      }
      for (std::size_t o = 0; o < layer.n_out(); ++o) {
        double v_prev = t > 0 ? traj.v[li](t - 1, o) : 0.0;
        double s_prev = t > 0 ? traj.s[li](t - 1, o) : 0.0;
        double vn = layer.neuron.lambda * v_prev * (1.0 - s_prev) + a[o];
        traj.v[li](t, o) = vn;
        traj.s[li](t, o) = surrogate_spike(vn, layer.neuron.v_th, window);
      }
    }
    for (std::size_t c = 0; c < net.num_classes; ++c) traj.logits[c] += traj.s.back()(t, c);
  }
  return traj;
}

inline std::vector<double> softmax(const std::vector<double>& z) {
  double zmax = *std::max_element(z.begin(), z.end());
  std::vector<double> p(z.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    p[i] = std::exp(z[i] - zmax);
    sum += p[i];
  }
  for (auto& x : p) x /= sum;
  return p;
}

// Backpropagation through time on the soft trajectory. Accumulates into `grad`
// and returns the sample's cross-entropy loss.
inline double soft_backward(const FloatNetwork& net, const SpikeTrain& sample, std::uint16_t label,
                            double window, const SoftTrajectory& traj, LossGradient& grad) {
  const std::size_t depth = net.layers.size();
  const std::size_t steps = sample.timesteps();
  std::vector<double> p = softmax(traj.logits);
  double loss = -std::log(std::max(p[label], 1e-300));

  std::vector<double> gz(p);
  gz[label] -= 1.0;

  // Carried adjoints from t+1: dL/dV_i(t+1) and dL/da_i(t+1).
  std::vector<std::vector<double>> gv_next(depth), ga_next(depth);
  std::vector<std::vector<double>> gv_cur(depth), ga_cur(depth);
  for (std::size_t li = 0; li < depth; ++li) {
    gv_next[li].assign(net.layers[li].n_out(), 0.0);
    ga_next[li].assign(net.layers[li].n_out(), 0.0);
  }

  std::vector<double> gs;
  for (std::size_t t = steps; t-- > 0;) {
    for (std::size_t li = depth; li-- > 0;) {
      const FloatLayer& layer = net.layers[li];
      const std::size_t n = layer.n_out();
      gs.assign(n, 0.0);
      if (li == depth - 1)
        for (std::size_t o = 0; o < n; ++o) gs[o] += gz[o];
      if (li + 1 < depth) {
        // s_i(t) feeds a_{i+1}(t) through W_{i+1}.
        const FloatLayer& up = net.layers[li + 1];
        for (std::size_t o = 0; o < up.n_out(); ++o) {
          double g = ga_cur[li + 1][o];
          if (g == 0.0) continue;
          for (std::size_t j = 0; j < n; ++j) gs[j] += up.weights(o, j) * g;
        }
      }
      if (layer.kind == LayerKind::Recurrent) {
        // s_i(t) feeds a_i(t+1) through the recurrent matrix.
        for (std::size_t o = 0; o < n; ++o) {
          double g = ga_next[li][o];
          if (g == 0.0) continue;
          for (std::size_t j = 0; j < n; ++j) gs[j] += layer.recurrent_weights(o, j) * g;
        }
      }
      // Reset path: V(t+1) = lambda * V(t) * (1 - s(t)) + a(t+1).
      for (std::size_t o = 0; o < n; ++o)
        gs[o] -= layer.neuron.lambda * traj.v[li](t, o) * gv_next[li][o];

      gv_cur[li].assign(n, 0.0);
      ga_cur[li].assign(n, 0.0);
      for (std::size_t o = 0; o < n; ++o) {
        double sg = surrogate_spike_grad(traj.v[li](t, o), layer.neuron.v_th, window);
        double gv = gs[o] * sg +
                    gv_next[li][o] * layer.neuron.lambda * (1.0 - traj.s[li](t, o));
        gv_cur[li][o] = gv;
        ga_cur[li][o] = gv;
      }

      LayerGradient& lg = grad.layers[li];
      if (li == 0) {
        const std::uint8_t* in = sample.row(t);
        for (std::size_t j = 0; j < layer.n_in(); ++j) {
          if (!in[j]) continue;
          for (std::size_t o = 0; o < n; ++o) lg.weights(o, j) += ga_cur[li][o];
        }
      } else {
        const double* in = traj.s[li - 1].row(t);
        for (std::size_t j = 0; j < layer.n_in(); ++j) {
          if (in[j] == 0.0) continue;
          for (std::size_t o = 0; o < n; ++o) lg.weights(o, j) += ga_cur[li][o] * in[j];
        }
      }
      if (layer.kind == LayerKind::Recurrent && t > 0) {
        const double* prev = traj.s[li].row(t - 1);
        for (std::size_t j = 0; j < n; ++j) {
          if (prev[j] == 0.0) continue;
          for (std::size_t o = 0; o < n; ++o) lg.recurrent(o, j) += ga_cur[li][o] * prev[j];
        }
      }
    }
    gv_next.swap(gv_cur);
    ga_next.swap(ga_cur);
  }
  return loss;
}

}  // namespace detail

inline LossGradient make_zero_gradient(const FloatNetwork& net) {
  LossGradient g;
  g.layers.reserve(net.layers.size());
  for (const auto& l : net.layers) {
    LayerGradient lg;
    lg.weights = Matrix<double>(l.weights.rows(), l.weights.cols(), 0.0);
    if (l.kind == LayerKind::Recurrent)
      lg.recurrent = Matrix<double>(l.n_out(), l.n_out(), 0.0);
    g.layers.push_back(std::move(lg));
  }
  return g;
}

/// Mean surrogate cross-entropy over the batch (forward only).
inline double surrogate_loss(const FloatNetwork& net, const Dataset& batch, double window) {
  if (batch.samples.empty()) throw validation_error("surrogate_loss: empty batch");
  double total = 0.0;
  for (const auto& s : batch.samples) {
    auto traj = detail::soft_forward(net, s.input, window);
    auto p = detail::softmax(traj.logits);
    total += -std::log(std::max(p[s.label], 1e-300));
  }
  return total / static_cast<double>(batch.samples.size());
}

/// Mean loss and its gradient w.r.t. every weight, via backpropagation through
/// time with the rectangular surrogate window.
inline LossGradient surrogate_gradient(const FloatNetwork& net, const Dataset& batch,
                                       double window) {
  if (batch.samples.empty()) throw validation_error("surrogate_gradient: empty batch");
  if (!(window > 0.0)) throw validation_error("surrogate_gradient: window must be > 0");
  LossGradient grad = make_zero_gradient(net);
  double total = 0.0;
  for (const auto& s : batch.samples) {
    auto traj = detail::soft_forward(net, s.input, window);
    total += detail::soft_backward(net, s.input, s.label, window, traj, grad);
  }
  const double inv = 1.0 / static_cast<double>(batch.samples.size());
  for (auto& lg : grad.layers) {
    for (auto& w : lg.weights.data()) w *= inv;
    for (auto& w : lg.recurrent.data()) w *= inv;
  }
  grad.loss = total * inv;
  return grad;
}

struct TrainConfig {
  std::size_t epochs = 100;
  double learning_rate = 0.05;
  double surrogate_window = 0.5;
  std::uint64_t seed = 1;
  NeuronParams neuron{};
};

struct TrainResult {
  FloatNetwork net;
  double train_accuracy = 0.0;
};

/// Desk-scale surrogate-gradient trainer: per-sample SGD in a reseeded shuffle
/// order each epoch. Deterministic given the seed. Zero epochs returns the
/// seeded initialization unchanged. Reported accuracy uses the hard (spiking)
/// forward pass.
inline TrainResult train_toy(const ToyArch& arch, const Dataset& train, const TrainConfig& cfg) {
  train.validate();
  if (arch.input_features != train.features)
    throw validation_error("train_toy: arch input width must match dataset features");
  if (arch.layers.back().n_out != train.num_classes)
    throw validation_error("train_toy: final layer width must match num_classes");
  cfg.neuron.validate();
  if (!(cfg.surrogate_window > 0.0))
    throw validation_error("train_toy: surrogate window must be > 0");

  TrainResult result;
  result.net = init_network(arch, cfg.neuron, cfg.seed);

  std::vector<std::size_t> order(train.samples.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  Dataset single;
  single.timesteps = train.timesteps;
  single.features = train.features;
  single.num_classes = train.num_classes;
  single.samples.resize(1);

  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    CounterRng shuffle_rng(cfg.seed, epoch, 0, 0xabcd);
    for (std::size_t i = order.size(); i > 1; --i)
      std::swap(order[i - 1], order[shuffle_rng.below(i)]);
    for (std::size_t idx : order) {
      single.samples[0] = train.samples[idx];
      LossGradient g = surrogate_gradient(result.net, single, cfg.surrogate_window);
      for (std::size_t li = 0; li < result.net.layers.size(); ++li) {
        auto& layer = result.net.layers[li];
        const auto& lg = g.layers[li];
        for (std::size_t k = 0; k < layer.weights.size(); ++k)
          layer.weights[k] -= cfg.learning_rate * lg.weights[k];
        for (std::size_t k = 0; k < layer.recurrent_weights.size(); ++k)
          layer.recurrent_weights[k] -= cfg.learning_rate * lg.recurrent[k];
      }
    }
  }
  result.train_accuracy = evaluate_accuracy(result.net, train);
  return result;
}

}  // namespace snngx
