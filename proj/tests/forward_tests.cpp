#include <doctest.h>

#include <vector>

#include "snngx/forward.hpp"
#include "snngx/quantize.hpp"
#include "test_support.hpp"

using namespace snngx;

TEST_CASE("lif_step evaluates the discrete dynamics") {
  NeuronParams p{0.5, 1.0};

  SUBCASE("zero state is a fixed point") {
    auto r = lif_step(std::vector<double>{0.0}, std::vector<double>{0.0},
                      std::vector<std::uint8_t>{0}, p);
    CHECK(r.v_next[0] == 0.0);
    CHECK(r.spikes[0] == 0);
  }
  SUBCASE("integration crosses the threshold") {
    auto r = lif_step(std::vector<double>{0.8}, std::vector<double>{0.7},
                      std::vector<std::uint8_t>{0}, p);
    CHECK(r.v_next[0] == doctest::Approx(1.1));
    CHECK(r.spikes[0] == 1);
  }
  SUBCASE("the (1 - O) term zeroes the decayed potential") {
    auto r = lif_step(std::vector<double>{1.1}, std::vector<double>{0.0},
                      std::vector<std::uint8_t>{1}, p);
    CHECK(r.v_next[0] == 0.0);
    CHECK(r.spikes[0] == 0);
  }
  SUBCASE("reset correctness: any lambda, O_prev=1 gives V_next = I_ext exactly") {
    for (double lambda : {0.0, 0.3, 0.99}) {
      NeuronParams q{lambda, 1.0};
      auto r = lif_step(std::vector<double>{123.5}, std::vector<double>{0.25},
                        std::vector<std::uint8_t>{1}, q);
      CHECK(r.v_next[0] == 0.25);
    }
  }
  SUBCASE("length mismatch is a dimension error") {
    CHECK_THROWS_AS(lif_step(std::vector<double>{0.0, 0.0}, std::vector<double>{0.0},
                             std::vector<std::uint8_t>{0}, p),
                    validation_error);
  }
}

namespace {

// Independent scalar re-simulation of the forward contract, written straight
// from the recurrences for tiny nets. Deliberately naive.
std::vector<std::uint64_t> hand_trace_counts(const FloatNetwork& net, const SpikeTrain& sample) {
  std::vector<std::vector<double>> v;
  std::vector<std::vector<int>> out;
  for (auto& l : net.layers) {
    v.push_back(std::vector<double>(l.n_out(), 0.0));
    out.push_back(std::vector<int>(l.n_out(), 0));
  }
  std::vector<std::uint64_t> counts(net.num_classes, 0);
  for (std::size_t t = 0; t < sample.timesteps(); ++t) {
    std::vector<int> below(sample.features());
    for (std::size_t f = 0; f < sample.features(); ++f) below[f] = sample.at(t, f);
    for (std::size_t li = 0; li < net.layers.size(); ++li) {
      const auto& l = net.layers[li];
      std::vector<int> next_out(l.n_out());
      std::vector<double> next_v(l.n_out());
      for (std::size_t o = 0; o < l.n_out(); ++o) {
        double i_ext = 0.0;
        for (std::size_t j = 0; j < l.n_in(); ++j)
          i_ext += l.weights(o, j) * below[j];
        if (l.kind == LayerKind::Recurrent)
          for (std::size_t j = 0; j < l.n_out(); ++j)
            i_ext += l.recurrent_weights(o, j) * out[li][j];
        double vn = l.neuron.lambda * v[li][o] * (1 - out[li][o]) + i_ext;
        next_v[o] = vn;
        next_out[o] = vn >= l.neuron.v_th ? 1 : 0;
      }
      v[li] = next_v;
      out[li] = next_out;
      below.assign(next_out.begin(), next_out.end());
    }
    for (std::size_t c = 0; c < net.num_classes; ++c)
      counts[c] += static_cast<std::uint64_t>(out.back()[c]);
  }
  return counts;
}

}  // namespace

TEST_CASE("forward matches an independent hand simulation on tiny networks") {
  // 2-layer nets with T <= 3, F <= 3, hand-set weights, recurrent included.
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    FloatNetwork net;
    net.num_classes = 2;
    CounterRng rng(seed, 1, 2, 3);
    FloatLayer l0;
    l0.kind = LayerKind::Recurrent;
    l0.neuron = {0.6, 0.8};
    l0.weights = Matrix<double>(3, 3);
    l0.recurrent_weights = Matrix<double>(3, 3);
    for (auto& w : l0.weights.data()) w = rng.uniform(-1.0, 1.5);
    for (auto& w : l0.recurrent_weights.data()) w = rng.uniform(-1.0, 1.0);
    net.layers.push_back(l0);
    FloatLayer l1;
    l1.kind = LayerKind::FullyConnected;
    l1.neuron = {0.5, 0.7};
    l1.weights = Matrix<double>(2, 3);
    for (auto& w : l1.weights.data()) w = rng.uniform(-1.0, 1.5);
    net.layers.push_back(l1);

    SpikeTrain sample(3, 3);
    for (auto& b : sample.bits()) b = rng.bernoulli(0.5) ? 1 : 0;

    auto result = forward(net, sample);
    auto counts = hand_trace_counts(net, sample);
    CHECK(result.class_spike_counts == counts);
    std::size_t expect = counts[1] > counts[0] ? 1 : 0;  // ties break to class 0
    CHECK(result.prediction == expect);
  }
}

TEST_CASE("forward monotonicity: the neuron fed the largest weight wins") {
  // Sub-threshold weights with leak turn weight size into firing rate.
  FloatNetwork net;
  net.num_classes = 3;
  FloatLayer l;
  l.neuron = {0.5, 1.0};
  l.weights = Matrix<double>(3, 1);
  l.weights(0, 0) = 0.55;
  l.weights(1, 0) = 0.6;
  l.weights(2, 0) = 0.3;  // V saturates at 0.6, never fires
  net.layers.push_back(l);

  SpikeTrain always(12, 1);
  for (auto& b : always.bits()) b = 1;
  auto r = forward(net, always);
  CHECK(r.class_spike_counts[1] > r.class_spike_counts[0]);
  CHECK(r.class_spike_counts[2] == 0);
  CHECK(r.prediction == 1);
}

TEST_CASE("forward on an all-zero train predicts class 0 by tie-break") {
  auto net = test::block_net();
  SpikeTrain quiet(5, 16);
  auto r = forward(net, quiet);
  for (auto c : r.class_spike_counts) CHECK(c == 0);
  CHECK(r.prediction == 0);
}

TEST_CASE("forward rejects mismatched feature counts") {
  auto net = test::block_net();
  CHECK_THROWS_AS(forward(net, SpikeTrain(4, 3)), validation_error);
}

TEST_CASE("forward is deterministic across repeated evaluation") {
  auto net = test::random_quant_net(3, {8, -6, 4}, 10);
  auto sample = test::random_train(11, 6, 10);
  auto a = forward(net, sample);
  auto b = forward(net, sample);
  CHECK(a.prediction == b.prediction);
  CHECK(a.class_spike_counts == b.class_spike_counts);
}

TEST_CASE("16-bit quantization preserves nearly all predictions") {
  auto net = test::block_net();
  auto spec = test::block_task_spec(21, 0.05, 16);
  auto ds = generate_synthetic(spec);
  auto q16 = quantize(net, 16);
  std::size_t agree = 0;
  for (const auto& s : ds.samples)
    if (forward(net, s.input).prediction == forward(q16, s.input).prediction) ++agree;
  CHECK(static_cast<double>(agree) / static_cast<double>(ds.samples.size()) >= 0.95);
}

TEST_CASE("evaluate_accuracy") {
  auto net = test::block_net();
  auto ds = generate_synthetic(test::block_task_spec());

  SUBCASE("single correctly classified sample gives 1.0") {
    Dataset one{ds.timesteps, ds.features, ds.num_classes, {ds.samples[0]}};
    CHECK(evaluate_accuracy(net, one) == 1.0);
  }
  SUBCASE("perfectly mislabeled dataset gives 0.0") {
    Dataset bad = ds;
    for (auto& s : bad.samples) s.label = static_cast<std::uint16_t>((s.label + 1) % 4);
    CHECK(evaluate_accuracy(net, bad) == 0.0);
  }
  SUBCASE("matches the per-sample tally") {
    Dataset ten = ds;
    ten.samples.resize(10);
    std::size_t correct = 0;
    for (const auto& s : ten.samples)
      if (forward(net, s.input).prediction == s.label) ++correct;
    CHECK(evaluate_accuracy(net, ten) ==
          doctest::Approx(static_cast<double>(correct) / 10.0));
  }
  SUBCASE("empty dataset is rejected") {
    Dataset empty{ds.timesteps, ds.features, ds.num_classes, {}};
    CHECK_THROWS_AS(evaluate_accuracy(net, empty), validation_error);
  }
}
