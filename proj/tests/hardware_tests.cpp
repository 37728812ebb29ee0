#include <doctest.h>

#include <cmath>
#include <sstream>

#include "snngx/cost.hpp"
#include "snngx/forward.hpp"
#include "snngx/hardware.hpp"
#include "test_support.hpp"

using namespace snngx;
using namespace snngx::hw;

TEST_CASE("decryptor truth table: OUT equals x AND weight for all 8 cases") {
  for (int weight = 0; weight <= 1; ++weight) {
    for (int key = 0; key <= 1; ++key) {
      for (int x = 0; x <= 1; ++x) {
        bool w_e = (weight ^ key) != 0;  // stored encrypted bit
        bool out = decrypt_mac_bit(x != 0, w_e, key != 0);
        REQUIRE(out == ((x & weight) != 0));
      }
    }
  }
}

TEST_CASE("decryptor reproduces the four encrypted-path rows") {
  // weight=1, key=1 -> w_e = 0 (HRS)
  CHECK(decrypt_mac_bit(true, false, true) == true);
  CHECK(decrypt_mac_bit(false, false, true) == false);
  // weight=0, key=1 -> w_e = 1 (LRS)
  CHECK(decrypt_mac_bit(true, true, true) == false);
  CHECK(decrypt_mac_bit(false, true, true) == false);
}

TEST_CASE("PE programming stores MSB-first bit patterns") {
  PEArray pe;
  SUBCASE("-127 = 0b10000001") {
    pe.program_weight(0, 0, -127);
    std::vector<RramCell> expect = {RramCell::LRS, RramCell::HRS, RramCell::HRS, RramCell::HRS,
                                    RramCell::HRS, RramCell::HRS, RramCell::HRS, RramCell::LRS};
    for (std::size_t b = 0; b < 8; ++b) CHECK(pe.cell(0, b) == expect[b]);
    CHECK(pe.read_weight(0, 0) == -127);
  }
  SUBCASE("zero is all HRS") {
    pe.program_weight(2, 5, 0);
    for (std::size_t b = 0; b < 8; ++b) CHECK(pe.cell(2, 5 * 8 + b) == RramCell::HRS);
  }
  SUBCASE("a random full array reads back bit-exactly") {
    CounterRng rng(3, 1, 4, 1);
    std::vector<std::int32_t> weights(kPeRows * kWeightsPerRow);
    for (auto& w : weights) w = static_cast<std::int32_t>(rng.below(256)) - 128;
    program_weights(pe, weights);
    for (std::size_t i = 0; i < weights.size(); ++i)
      REQUIRE(pe.read_weight(i / kWeightsPerRow, i % kWeightsPerRow) == weights[i]);
  }
  SUBCASE("capacity is enforced") {
    std::vector<std::int32_t> too_many(kPeRows * kWeightsPerRow + 1, 0);
    CHECK_THROWS_AS(program_weights(pe, too_many), validation_error);
  }
}

TEST_CASE("pe_cycle aggregates decrypted weights into lane sums") {
  PEArray pe;
  DecryptorUnit dec;
  std::array<std::uint8_t, kWeightsPerRow> x{};

  SUBCASE("x = 0 gives all-zero partial sums") {
    CounterRng rng(8, 0, 0, 0);
    std::vector<std::int32_t> weights(kWeightsPerRow);
    for (auto& w : weights) w = static_cast<std::int32_t>(rng.below(256)) - 128;
    program_weights(pe, weights);
    auto lanes = pe_cycle(pe, dec, 0, x);
    for (auto s : lanes) CHECK(s == 0);
  }
  SUBCASE("one weight = -5, rest 0, x = 1") {
    pe.program_weight(0, 19, -5);
    x.fill(1);
    auto lanes = pe_cycle(pe, dec, 0, x);
    CHECK(lanes[19 / kLaneWidth] == -5);
    for (std::size_t g = 0; g < kLanesPerRow; ++g)
      if (g != 19 / kLaneWidth) CHECK(lanes[g] == 0);
  }
  SUBCASE("random encrypted row matches the software dot product") {
    CounterRng rng(9, 0, 0, 0);
    std::vector<std::int32_t> true_weights(kWeightsPerRow);
    for (auto& w : true_weights) w = static_cast<std::int32_t>(rng.below(256)) - 128;
    // encrypt a random subset of MSBs, store encrypted, key on those columns
    std::vector<std::int32_t> stored = true_weights;
    for (std::size_t s = 0; s < kWeightsPerRow; ++s) {
      if (rng.bernoulli(0.4)) {
        stored[s] = flip_msb(stored[s], 8);
        dec.key_bits[s * 8] = 1;  // MSB column of the slot
      }
      x[s] = rng.bernoulli(0.5) ? 1 : 0;
    }
    program_weights(pe, stored);
    auto lanes = pe_cycle(pe, dec, 0, x);
    for (std::size_t g = 0; g < kLanesPerRow; ++g) {
      std::int32_t expect = 0;
      for (std::size_t s = g * kLaneWidth; s < (g + 1) * kLaneWidth; ++s)
        expect += x[s] ? true_weights[s] : 0;
      REQUIRE(lanes[g] == expect);
    }
  }
}

TEST_CASE("fixed-point LIF neuron") {
  SUBCASE("zero state stays zero") {
    FixedPointLIF n(0.9, 1.0);
    auto s = n.step(0);
    CHECK(s.v == 0.0);
    CHECK(!s.spike);
  }
  SUBCASE("exact leak: lambda 0.5 halves V = 2.0") {
    FixedPointLIF n(0.5, 50.0);
    n.set_raw(512);  // 2.0 at 8 fractional bits
    auto s = n.step(0);
    CHECK(s.v == 1.0);
    CHECK(!s.spike);
  }
  SUBCASE("spike resets the register to exact zero") {
    FixedPointLIF n(0.5, 1.0);
    auto s = n.step(3);
    CHECK(s.spike);
    CHECK(n.raw() == 0);
  }
  SUBCASE("saturates at the register limits instead of wrapping") {
    FixedPointLIF n(0.5, 1000.0);  // threshold out of reach
    n.step(100000);
    CHECK(n.membrane() == doctest::Approx(32767.0 / 256.0));
    n.step(100000);  // would wrap if unsaturated
    CHECK(n.membrane() == doctest::Approx(32767.0 / 256.0));
    n.reset();
    n.step(-100000);
    n.step(-100000);
    CHECK(n.membrane() == doctest::Approx(-32768.0 / 256.0));
  }
  SUBCASE("tracks the float trajectory within 2^-7 per step") {
    for (double lambda : {0.5, 0.8984375, 0.25}) {
      FixedPointLIF n(lambda, 60.0);
      CounterRng rng(5, static_cast<std::uint64_t>(lambda * 1000), 0, 0);
      double v_float = 0.0;
      for (int t = 0; t < 200; ++t) {
        std::int64_t i_ext = static_cast<std::int64_t>(rng.below(7)) - 3;
        // reference float step from the synchronized (quantized) state
        double from = n.membrane();
        double expect = n.lambda_effective() * from + static_cast<double>(i_ext);
        auto s = n.step(i_ext);
        CHECK(std::fabs(s.v - expect) <= 0x1.0p-7);
        v_float = expect;
        (void)v_float;
        if (s.spike) break;
      }
    }
  }
}

namespace {

// Unified oracle: decrypt-on-read with key k must equal the software forward
// pass of the network decrypted with that same k, whatever k is.
void check_hw_equals_sw(const QuantizedNetwork& encrypted, const SecretKey& key,
                        const SpikeTrain& sample) {
  QuantizedNetwork decrypted = key.positions.empty() ? encrypted : apply_key(encrypted, key);
  QuantTrace sw_trace;
  auto sw = forward(decrypted, sample, &sw_trace);
  auto hwr = simulate_inference(encrypted, key, sample, true);
  REQUIRE(hwr.prediction == sw.prediction);
  REQUIRE(hwr.class_spike_counts == sw.class_spike_counts);
  REQUIRE(hwr.trace.sums.size() == sw_trace.sums.size());
  for (std::size_t li = 0; li < sw_trace.sums.size(); ++li)
    REQUIRE(hwr.trace.sums[li] == sw_trace.sums[li]);
}

SecretKey empty_key_for(const QuantizedNetwork& net) {
  SecretKey k;
  k.n_bit = net.n_bit;
  k.genome_length = net.layers[0].weights.size();
  return k;
}

}  // namespace

TEST_CASE("hardware inference equals software inference bit-for-bit") {
  auto net = test::quantized_block_net();
  SecretKey key;
  key.layer = 1;
  key.n_bit = 8;
  key.genome_length = net.layers[1].weights.size();
  key.positions = {0, 3, 5, 10, 15};
  auto encrypted = apply_key(net, key);

  SUBCASE("empty key matches the plaintext run exactly") {
    auto sample = test::random_train(1, 8, 16);
    check_hw_equals_sw(net, empty_key_for(net), sample);
  }
  SUBCASE("the right key restores the plaintext predictions, 100 random samples") {
    for (std::uint64_t s = 0; s < 100; ++s) {
      auto sample = test::random_train(s, 6, 16, 0.4);
      QuantTrace sw_trace;
      auto sw = forward(net, sample, &sw_trace);  // software plaintext oracle
      auto hwr = simulate_inference(encrypted, key, sample, true);
      REQUIRE(hwr.prediction == sw.prediction);
      for (std::size_t li = 0; li < sw_trace.sums.size(); ++li)
        REQUIRE(hwr.trace.sums[li] == sw_trace.sums[li]);
    }
  }
  SUBCASE("a wrong key decrypts to exactly the wrongly-decrypted network") {
    SecretKey wrong = key;
    wrong.positions = {1, 2, 7};
    auto sample = test::random_train(77, 8, 16);
    check_hw_equals_sw(encrypted, wrong, sample);
  }
  SUBCASE("recurrent layers map through the feedback path") {
    auto rnet = test::random_quant_net(21, {10, -9, 4}, 12);
    SecretKey rkey;
    rkey.layer = 1;
    rkey.n_bit = 8;
    rkey.genome_length = rnet.layers[1].weights.size();
    rkey.positions = {2, 8, 31, 55};
    auto renc = apply_key(rnet, rkey);
    for (std::uint64_t s = 0; s < 5; ++s)
      check_hw_equals_sw(renc, rkey, test::random_train(s + 300, 7, 12, 0.5));
  }
  SUBCASE("only 8-bit networks map onto the PE") {
    auto wide = test::random_quant_net(3, {4}, 4, 16);
    CHECK_THROWS_AS(simulate_inference(wide, empty_key_for(wide), SpikeTrain(2, 4)),
                    validation_error);
  }
}

TEST_CASE("cycle accounting follows the one-wordline, 16-pass timing model") {
  auto net = test::quantized_block_net();  // 16->4 and 4->4: one row each
  auto sample = test::random_train(5, 8, 16);
  auto hwr = simulate_inference(net, empty_key_for(net), sample);
  // per timestep: each layer occupies a single wordline -> 16 adder passes
  CHECK(hwr.adder_tree_cycles == 8 * 2 * kLanesPerRow);
}

TEST_CASE("decryption adds zero cycles: keyed and plaintext runs cost the same") {
  auto net = test::quantized_block_net();
  SecretKey key;
  key.layer = 0;
  key.n_bit = 8;
  key.genome_length = net.layers[0].weights.size();
  for (std::uint32_t p = 0; p < key.genome_length; p += 3) key.positions.push_back(p);
  auto encrypted = apply_key(net, key);
  auto sample = test::random_train(9, 8, 16);
  auto plain = simulate_inference(net, empty_key_for(net), sample);
  auto keyed = simulate_inference(encrypted, key, sample);
  CHECK(keyed.adder_tree_cycles == plain.adder_tree_cycles);
  CHECK(keyed.prediction == plain.prediction);
}

TEST_CASE("trace stream emits one line per row activation plus spike lines") {
  auto net = test::quantized_block_net();
  std::ostringstream trace;
  auto sample = test::random_train(6, 3, 16);
  simulate_inference(net, empty_key_for(net), sample, false, &trace);
  std::string text = trace.str();
  std::size_t lines = 0;
  for (char c : text) lines += c == '\n';
  // 3 timesteps x 2 layers x (1 row line + 1 spike line)
  CHECK(lines == 12);
  CHECK(text.find("\"lane_sums\"") != std::string::npos);
}

TEST_CASE("cost model reproduces the published reduction factors") {
  SUBCASE("DVSGesture row") {
    auto c = estimate_cost(1.7e6, 17);
    CHECK(c.energy_factor == doctest::Approx(1.7e6 / (17 * 14.75)));
    CHECK(c.energy_factor == doctest::Approx(6780).epsilon(0.01));
    CHECK(c.latency_factor == doctest::Approx(4250).epsilon(0.05));
  }
  SUBCASE("NMNIST row recomputes to 1502.5") {
    auto c = estimate_cost(8.2e5, 37);
    CHECK(c.energy_factor == doctest::Approx(1502.5).epsilon(0.001));
  }
  SUBCASE("equal unit costs give factor 1") {
    CostModel m;
    m.e_write_pj = m.e_decrypt_pj;
    auto c = estimate_cost(1, 1, 1, m);
    CHECK(c.energy_factor == doctest::Approx(1.0));
  }
  SUBCASE("GD latency is one 25 MHz cycle") {
    auto c = estimate_cost(1024, 10);
    CHECK(c.t_gd_ns == doctest::Approx(40.0));
    CHECK(c.t_rd_ns == doctest::Approx(100.43));  // exactly one parallel write wave
  }
  SUBCASE("counts must be positive") {
    CHECK_THROWS_AS(estimate_cost(0, 10), validation_error);
  }
}
