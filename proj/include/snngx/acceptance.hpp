#pragma once

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "snngx/attack.hpp"
#include "snngx/cost.hpp"
#include "snngx/forward.hpp"
#include "snngx/genetic.hpp"
#include "snngx/hardware.hpp"
#include "snngx/io.hpp"
#include "snngx/quantize.hpp"
#include "snngx/synthetic.hpp"
#include "snngx/train.hpp"

namespace snngx::acceptance {

enum class Status { Pass, Warn, Fail };

struct CriterionResult {
  int id = 0;
  std::string name;
  Status status = Status::Fail;
  std::string detail;
  double seconds = 0.0;
};

struct Options {
  std::filesystem::path output_dir;  // per-criterion CSV artifacts land here
  std::filesystem::path golden_dir;  // committed golden files (criterion 8)
  std::size_t max_workers = 1;
};

// The committed synthetic 4-class task and its training recipe. These values
// are frozen: the protection criteria below assert against them. The hidden
// layer is sized so the target (output) layer holds 512 sign bits and the
// 30-bit budget sits in the sparse regime where random flips are harmless.
struct ToyRecipe {
  SyntheticTaskSpec train_spec() const {
    SyntheticTaskSpec s;
    s.num_classes = 4;
    s.features = 64;
    s.timesteps = 16;
    s.samples_per_class = 40;
    s.contrast = 0.9;
    s.noise = 0.05;
    s.seed = 1001;
    return s;
  }
  SyntheticTaskSpec eval_spec() const {
    SyntheticTaskSpec s = train_spec();
    s.samples_per_class = 20;
    s.seed = 1002;
    return s;
  }
  std::string arch = "64F-128F-4F";
  std::size_t output_sign_bits = 512;  // 128 x 4 readout weights
  std::size_t epochs = 40;
  double learning_rate = 0.01;
  double window = 1.5;
  std::uint64_t train_seed = 2024;
  std::size_t enc_samples = 16;
  // The closed-form drift estimate undershoots on this very robust toy
  // readout, so the generation count is pinned explicitly.
  std::size_t ga_generations = 200;
  std::size_t epsilon() const {
    return std::max<std::size_t>(30, (output_sign_bits * 5 + 500) / 1000);
  }
};

/// Trained-and-quantized toy model shared by the protection criteria.
struct ToyFixture {
  Dataset train_set;
  Dataset eval_set;
  Dataset enc_set;
  FloatNetwork trained;
  double train_accuracy = 0.0;
  QuantizedNetwork quantized;
  double baseline_accuracy = 0.0;  // quantized plaintext accuracy on eval_set

  static ToyFixture build(const ToyRecipe& recipe, std::size_t max_workers) {
    (void)max_workers;
    ToyFixture fx;
    fx.train_set = generate_synthetic(recipe.train_spec());
    fx.eval_set = generate_synthetic(recipe.eval_spec());
    TrainConfig cfg;
    cfg.epochs = recipe.epochs;
    cfg.learning_rate = recipe.learning_rate;
    cfg.surrogate_window = recipe.window;
    cfg.seed = recipe.train_seed;
    auto result = train_toy(ToyArch::parse(recipe.arch), fx.train_set, cfg);
    fx.trained = std::move(result.net);
    fx.train_accuracy = result.train_accuracy;
    fx.quantized = quantize(fx.trained, 8);
    fx.baseline_accuracy = evaluate_accuracy(fx.quantized, fx.eval_set);
    fx.enc_set = stratified_subset(fx.eval_set, recipe.enc_samples);
    return fx;
  }
};

namespace detail {

class Runner {
public:
  explicit Runner(std::vector<CriterionResult>& out) : out_(out) {}

  void run(int id, const std::string& name, double time_limit_s,
           const std::function<Status(std::ostringstream&)>& body) {
    CriterionResult r;
    r.id = id;
    r.name = name;
    std::ostringstream detail;
    auto t0 = std::chrono::steady_clock::now();
    try {
      r.status = body(detail);
    } catch (const std::exception& e) {
      r.status = Status::Fail;
      detail << "exception: " << e.what();
    }
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (time_limit_s > 0 && r.seconds > time_limit_s && r.status == Status::Pass) {
      r.status = Status::Fail;
      detail << " [exceeded " << time_limit_s << "s runtime limit]";
    }
    r.detail = detail.str();
    out_.push_back(std::move(r));
  }

private:
  std::vector<CriterionResult>& out_;
};

inline bool expect(std::ostringstream& msg, bool ok, const std::string& what) {
  if (!ok) msg << "FAILED: " << what << "; ";
  return ok;
}

inline double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  return v.size() % 2 ? v[v.size() / 2] : 0.5 * (v[v.size() / 2 - 1] + v[v.size() / 2]);
}

inline std::vector<std::uint8_t> slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace detail

/// Random 8-bit toy network generator shared by criteria 2 and 8 (kept here so
/// the acceptance binary and `repro` agree exactly).
inline QuantizedNetwork test_random_net(std::uint64_t seed, const std::vector<int>& widths,
                                        std::size_t n_in) {
  QuantizedNetwork net;
  net.n_bit = 8;
  std::size_t prev = n_in;
  for (std::size_t li = 0; li < widths.size(); ++li) {
    const bool rec = widths[li] < 0;
    const auto n_out = static_cast<std::size_t>(rec ? -widths[li] : widths[li]);
    QuantLayer layer;
    layer.kind = rec ? LayerKind::Recurrent : LayerKind::FullyConnected;
    layer.neuron = {0.9, 1.0};
    layer.delta = 0.02;
    CounterRng rng(seed, li, 0, 0x77);
    layer.weights = Matrix<std::int32_t>(n_out, prev);
    for (auto& w : layer.weights.data()) w = static_cast<std::int32_t>(rng.below(256)) - 128;
    if (rec) {
      layer.recurrent_weights = Matrix<std::int32_t>(n_out, n_out);
      for (auto& w : layer.recurrent_weights.data())
        w = static_cast<std::int32_t>(rng.below(256)) - 128;
    }
    net.layers.push_back(std::move(layer));
    prev = n_out;
  }
  net.num_classes = static_cast<std::uint16_t>(prev);
  return net;
}

inline std::vector<std::uint64_t> attack_sample_distinct(std::uint64_t n, std::uint64_t count,
                                                         CounterRng& rng) {
  std::vector<std::uint64_t> out;
  for (std::uint64_t j = n - count; j < n; ++j) {
    std::uint64_t r = rng.below(j + 1);
    bool seen = std::find(out.begin(), out.end(), r) != out.end();
    out.push_back(seen ? j : r);
  }
  return out;
}

// --- criterion bodies ---------------------------------------------------------

inline Status criterion_decryptor_truth_table(std::ostringstream& msg) {
  bool ok = true;
  for (int weight = 0; weight <= 1; ++weight)
    for (int key = 0; key <= 1; ++key)
      for (int x = 0; x <= 1; ++x) {
        bool w_e = (weight ^ key) != 0;
        bool out = hw::decrypt_mac_bit(x != 0, w_e, key != 0);
        ok &= detail::expect(msg, out == ((x & weight) != 0),
                             "case w=" + std::to_string(weight) + " k=" + std::to_string(key) +
                                 " x=" + std::to_string(x));
      }
  // The four encrypted-path rows, explicitly.
  ok &= detail::expect(msg, hw::decrypt_mac_bit(true, false, true) == true, "row1");
  ok &= detail::expect(msg, hw::decrypt_mac_bit(false, false, true) == false, "row2");
  ok &= detail::expect(msg, hw::decrypt_mac_bit(true, true, true) == false, "row3");
  ok &= detail::expect(msg, hw::decrypt_mac_bit(false, true, true) == false, "row4");
  if (ok) msg << "8/8 exhaustive cases and 4/4 truth-table rows";
  return ok ? Status::Pass : Status::Fail;
}

inline Status criterion_end_to_end_bit_exact(std::ostringstream& msg) {
  std::size_t passed = 0;
  for (std::uint64_t trial = 0; trial < 100; ++trial) {
    CounterRng rng(trial, 0xb17, 0, 0);
    const std::size_t depth = 1 + rng.below(3);
    std::vector<int> widths;
    for (std::size_t i = 0; i < depth; ++i) {
      int w = static_cast<int>(1 + rng.below(128));
      if (rng.bernoulli(0.3)) w = -w;  // recurrent
      widths.push_back(w);
    }
    const std::size_t n_in = 1 + rng.below(128);
    auto plain = test_random_net(trial, widths, n_in);

    SecretKey key;
    key.layer = static_cast<std::uint32_t>(rng.below(depth));
    key.n_bit = 8;
    key.genome_length = plain.layers[key.layer].weights.size();
    const std::size_t flips = 1 + rng.below(32);
    CounterRng pick(trial, 0x4e1, 0, 0);
    auto positions = attack_sample_distinct(key.genome_length, std::min<std::uint64_t>(flips, key.genome_length), pick);
    std::sort(positions.begin(), positions.end());
    for (auto p : positions) key.positions.push_back(static_cast<std::uint32_t>(p));

    auto encrypted = apply_key(plain, key);
    SpikeTrain sample(1 + rng.below(6), n_in);
    for (auto& b : sample.bits()) b = rng.bernoulli(0.4) ? 1 : 0;

    QuantTrace sw_trace;
    auto sw = forward(plain, sample, &sw_trace);
    auto hwr = hw::simulate_inference(encrypted, key, sample, true);
    bool same = hwr.prediction == sw.prediction && hwr.trace.sums.size() == sw_trace.sums.size();
    if (same)
      for (std::size_t li = 0; li < sw_trace.sums.size(); ++li)
        same = same && hwr.trace.sums[li] == sw_trace.sums[li];
    if (same)
      ++passed;
    else
      msg << "mismatch at trial " << trial << "; ";
  }
  msg << passed << "/100 networks bit-exact (predictions and partial sums)";
  return passed == 100 ? Status::Pass : Status::Fail;
}

inline Status criterion_complexity_oracle(std::ostringstream& msg) {
  bool ok = true;
  ok &= detail::expect(msg, complexity_exact(150, 5).to_string() == "612422930",
                       "complexity_exact(150,5) == 612422930");
  auto full = complexity_exact(150, 150) + BigUint(1);
  ok &= detail::expect(msg, full == BigUint::pow2(150), "complexity_exact(150,150) == 2^150-1");
  double f = full.to_double();
  ok &= detail::expect(msg, std::fabs(f - 1.42e45) / 1.42e45 < 0.01,
                       "2^150 matches 1.42e45 within decimal rounding");
  std::size_t checked = 0;
  for (std::uint64_t n = 2; n <= 200; ++n)
    for (std::uint64_t k = 1; 2 * k < n + 1; ++k, ++checked)
      if (!bound_dominates_exact(n, k)) {
        ok = detail::expect(msg, false,
                            "exact <= bound at n=" + std::to_string(n) + " k=" + std::to_string(k));
        break;
      }
  if (ok) msg << "values exact, bound dominates on " << checked << " (n,k) pairs";
  return ok ? Status::Pass : Status::Fail;
}

inline Status criterion_cost_reproduction(std::ostringstream& msg,
                                          const std::filesystem::path& output_dir) {
  struct Row {
    const char* label;
    double bits_random, bits_snngx, energy, latency;
  };
  const Row rows[] = {{"NMNIST", 8.2e5, 37, 1503, 2050},
                      {"DVSGesture", 1.7e6, 17, 6780, 4250},
                      {"EEGMMIDB", 1.7e6, 77, 1497, 4250},
                      {"BrailleLetter", 7.0e4, 10, 474, 175},
                      {"SHD", 2.0e5, 230, 59, 500}};
  bool ok = true;
  std::vector<hw::CostRow> csv;
  for (const auto& row : rows) {
    auto c = hw::estimate_cost(row.bits_random, row.bits_snngx);
    csv.push_back({row.label, row.bits_random, row.bits_snngx, c});
    double e_err = std::fabs(c.energy_factor - row.energy) / row.energy;
    double l_err = std::fabs(c.latency_factor - row.latency) / row.latency;
    ok &= detail::expect(msg, e_err <= 0.01,
                         std::string(row.label) + " energy factor " +
                             io::format_double(c.energy_factor) + " vs x" +
                             io::format_double(row.energy) + " (err " +
                             io::format_double(e_err) + ")");
    ok &= detail::expect(msg, l_err <= 0.05,
                         std::string(row.label) + " latency factor " +
                             io::format_double(c.latency_factor) + " vs x" +
                             io::format_double(row.latency) + " (err " +
                             io::format_double(l_err) + ")");
  }
  if (!output_dir.empty()) {
    std::filesystem::create_directories(output_dir);
    io::save_cost_csv(csv, output_dir / "cost.csv");
  }
  if (ok) msg << "5/5 energy factors within 1%, 5/5 latency factors within 5%";
  return ok ? Status::Pass : Status::Fail;
}

inline std::vector<GaResult> ga_five_seeds(const ToyFixture& fx, const ToyRecipe& recipe,
                                           std::size_t max_workers) {
  std::vector<GaResult> results;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    GAConfig cfg;
    cfg.target_layer = 1;  // output layer
    cfg.epsilon = recipe.epsilon();
    cfg.generations = recipe.ga_generations;
    cfg.population = 100;
    cfg.mutation_rate = 0.05;
    cfg.elite_fraction = 0.6;
    cfg.seed = seed;
    cfg.max_workers = max_workers;
    results.push_back(run_genetic_encryption(fx.quantized, fx.enc_set, cfg));
  }
  return results;
}

inline Status criterion_protection(std::ostringstream& msg, const ToyFixture& fx,
                                   const ToyRecipe& recipe, const std::vector<GaResult>& runs) {
  bool ok = true;
  ok &= detail::expect(msg, fx.train_accuracy >= 0.9,
                       "train accuracy " + io::format_double(fx.train_accuracy) + " >= 0.9");

  const double chance = 1.0 / 4.0;
  std::vector<double> encrypted_acc;
  for (const auto& run : runs) {
    encrypted_acc.push_back(evaluate_accuracy(run.encrypted, fx.eval_set));
    ok &= detail::expect(msg, run.report.final_distance <= recipe.epsilon(),
                         "distance " + std::to_string(run.report.final_distance) +
                             " <= epsilon " + std::to_string(recipe.epsilon()));
  }
  double med = detail::median(encrypted_acc);
  ok &= detail::expect(msg, med <= chance + 0.10,
                       "median encrypted accuracy " + io::format_double(med) +
                           " <= chance + 10pp = " + io::format_double(chance + 0.10));

  auto rnd = random_bit_baseline(fx.quantized, fx.eval_set, recipe.epsilon(),
                                 BitScope::LayerSignBits, 1, 100, 321);
  ok &= detail::expect(msg, std::fabs(rnd.median - fx.baseline_accuracy) <= 0.10,
                       "random sign-bit median " + io::format_double(rnd.median) +
                           " within 10pp of baseline " +
                           io::format_double(fx.baseline_accuracy));
  if (ok)
    msg << "train " << io::format_double(fx.train_accuracy) << ", baseline "
        << io::format_double(fx.baseline_accuracy) << ", GA median "
        << io::format_double(med) << ", random median " << io::format_double(rnd.median);
  return ok ? Status::Pass : Status::Fail;
}

inline Status criterion_fitness_dominance(std::ostringstream& msg) {
  CounterRng rng(0xd0b, 0, 0, 0);
  for (int i = 0; i < 10000; ++i) {
    const std::size_t epsilon = 1 + rng.below(500);
    double l1 = rng.next_double();
    double l2 = rng.next_double();
    std::size_t d_in = rng.below(epsilon + 1);
    std::size_t d_out = epsilon + 1 + rng.below(5000);
    if (!(ga_fitness(l1, d_in, epsilon) < ga_fitness(l2, d_out, epsilon))) {
      msg << "violated at eps=" << epsilon << " l1=" << l1 << " d_in=" << d_in << " l2=" << l2
          << " d_out=" << d_out;
      return Status::Fail;
    }
  }
  msg << "10000/10000 in-budget individuals outrank out-of-budget ones";
  return Status::Pass;
}

inline Status criterion_recovery_mutation_stats(std::ostringstream& msg) {
  SignBitVector raw(2000, 1);
  SignBitVector x = raw;
  for (std::size_t i = 0; i < 1000; ++i) x[2 * i] = -1;  // d = 1000
  double total = 0.0;
  const int trials = 1000;
  for (int trial = 0; trial < trials; ++trial) {
    CounterRng rng(0xacc7, static_cast<std::uint64_t>(trial), 0, 0);
    auto y = recovery_mutation(x, raw, 0.05, rng);
    for (std::size_t i = 0; i < y.size(); ++i) {
      if (x[i] == raw[i] && y[i] != x[i]) {
        msg << "a correct bit was flipped at index " << i;
        return Status::Fail;
      }
    }
    total += static_cast<double>(hamming_distance(x, raw) - hamming_distance(y, raw));
  }
  double mean = total / trials;
  double sigma_mean = std::sqrt(1000 * 0.05 * 0.95 / static_cast<double>(trials));
  msg << "mean recovered " << io::format_double(mean) << " vs 50 +- "
      << io::format_double(3 * sigma_mean) << ", zero correct-bit flips";
  return std::fabs(mean - 50.0) <= 3.0 * sigma_mean ? Status::Pass : Status::Fail;
}

inline Status criterion_involution_and_roundtrips(std::ostringstream& msg,
                                                  const std::filesystem::path& golden_dir) {
  for (std::uint64_t trial = 0; trial < 1000; ++trial) {
    CounterRng rng(trial, 0x1f1f, 0, 0);
    auto net = test_random_net(trial, {static_cast<int>(2 + rng.below(10))}, 2 + rng.below(10));
    SecretKey key;
    key.layer = 0;
    key.n_bit = 8;
    key.genome_length = net.layers[0].weights.size();
    for (std::uint32_t p = 0; p < key.genome_length; ++p)
      if (rng.bernoulli(0.5)) key.positions.push_back(p);
    if (!(apply_key(apply_key(net, key), key) == net)) {
      msg << "involution broke at trial " << trial;
      return Status::Fail;
    }
  }
  if (golden_dir.empty() || !std::filesystem::exists(golden_dir / "dataset.sngx")) {
    msg << "golden directory not found: " << golden_dir.string();
    return Status::Fail;
  }
  bool ok = true;
  {
    auto path = golden_dir / "dataset.sngx";
    auto loaded = io::load_dataset(path);
    auto bytes = io::dataset_to_bytes(loaded);
    ok &= detail::expect(msg,
                         std::vector<std::uint8_t>(bytes.begin(), bytes.end()) ==
                             detail::slurp(path),
                         "dataset golden roundtrip");
  }
  {
    auto path = golden_dir / "network_quant.json";
    auto loaded = io::load_quantized_network(path);
    auto text = io::network_to_json(loaded).dump(2) + "\n";
    ok &= detail::expect(msg,
                         std::vector<std::uint8_t>(text.begin(), text.end()) ==
                             detail::slurp(path),
                         "quantized network golden roundtrip");
  }
  {
    auto path = golden_dir / "network_float.json";
    auto loaded = io::load_float_network(path);
    auto text = io::network_to_json(loaded).dump(2) + "\n";
    ok &= detail::expect(msg,
                         std::vector<std::uint8_t>(text.begin(), text.end()) ==
                             detail::slurp(path),
                         "float network golden roundtrip");
  }
  {
    auto path = golden_dir / "key.json";
    auto loaded = io::load_key(path);
    auto text = io::key_to_json(loaded).dump(2) + "\n";
    ok &= detail::expect(msg,
                         std::vector<std::uint8_t>(text.begin(), text.end()) ==
                             detail::slurp(path),
                         "key golden roundtrip");
  }
  {
    auto path = golden_dir / "report.json";
    auto loaded = io::load_report_json(path);
    auto text = io::report_to_json(loaded).dump(2) + "\n";
    ok &= detail::expect(msg,
                         std::vector<std::uint8_t>(text.begin(), text.end()) ==
                             detail::slurp(path),
                         "report golden roundtrip");
  }
  if (ok) msg << "1000/1000 involutions, all golden files byte-exact";
  return ok ? Status::Pass : Status::Fail;
}

inline Status criterion_partial_recovery(std::ostringstream& msg, const ToyFixture& fx,
                                         const std::vector<GaResult>& runs,
                                         const std::filesystem::path& output_dir,
                                         std::size_t max_workers) {
  // A 10-bit key found by a tighter genetic run, so the curve spans a real
  // accuracy range. Single bits barely matter on their own (the group
  // effect), which is why a hand-ranked selection would give a flat curve.
  GAConfig cfg;
  cfg.target_layer = 1;
  cfg.epsilon = 10;
  cfg.generations = 320;
  cfg.population = 100;
  cfg.mutation_rate = 0.05;
  cfg.elite_fraction = 0.6;
  cfg.seed = 7;
  cfg.max_workers = max_workers;
  SecretKey key = run_genetic_encryption(fx.quantized, fx.enc_set, cfg).key;
  if (key.positions.size() < 10) {
    // Pad to exactly 10 bits from the 30-bit key's positions.
    for (std::uint32_t p : runs.front().key.positions) {
      if (key.positions.size() == 10) break;
      if (!std::binary_search(key.positions.begin(), key.positions.end(), p)) {
        key.positions.push_back(p);
        std::sort(key.positions.begin(), key.positions.end());
      }
    }
  }
  auto encrypted = apply_key(fx.quantized, key);

  auto curve = partial_key_recovery(encrypted, key, fx.eval_set, 10, RecoveryMode::Exhaustive,
                                    200000, max_workers);
  bool ok = true;
  ok &= detail::expect(msg, !curve.truncated, "curve complete");
  ok &= detail::expect(msg, curve.points.size() == 11, "11 points");
  for (std::size_t i = 1; i < curve.points.size(); ++i)
    ok &= detail::expect(msg,
                         curve.points[i].best_accuracy >= curve.points[i - 1].best_accuracy,
                         "monotone at k=" + std::to_string(i));
  ok &= detail::expect(msg, curve.points.back().best_accuracy == fx.baseline_accuracy,
                       "k=10 restores the full baseline accuracy");
  if (!output_dir.empty()) {
    std::filesystem::create_directories(output_dir);
    io::save_recovery_csv(curve, output_dir / "recovery.csv");
  }
  if (ok)
    msg << "monotone curve from " << io::format_double(curve.points.front().best_accuracy)
        << " to " << io::format_double(curve.points.back().best_accuracy) << ", CSV emitted";
  return ok ? Status::Pass : Status::Fail;
}

inline Status criterion_gradient_ordering(std::ostringstream& msg, const ToyFixture& fx,
                                          const ToyRecipe& recipe,
                                          const std::vector<GaResult>& runs) {
  auto grad = gradient_baseline(fx.trained, fx.enc_set, recipe.epsilon(), 1, 8, recipe.window);
  auto grad_encrypted = apply_key(fx.quantized, grad.key);
  double grad_acc = evaluate_accuracy(grad_encrypted, fx.eval_set);

  std::vector<double> ga_acc;
  for (const auto& run : runs) ga_acc.push_back(evaluate_accuracy(run.encrypted, fx.eval_set));
  double ga_median = detail::median(ga_acc);

  msg << "GA median " << io::format_double(ga_median) << " vs gradient baseline "
      << io::format_double(grad_acc);
  if (grad.degenerate) msg << " (degenerate gradients)";
  // Soft criterion: a violation is reported as WARN, not FAIL.
  return ga_median <= grad_acc ? Status::Pass : Status::Warn;
}

inline Status criterion_determinism(std::ostringstream& msg, const ToyFixture& fx,
                                    const ToyRecipe& recipe,
                                    const std::filesystem::path& output_dir) {
  GAConfig cfg;
  cfg.target_layer = 1;
  cfg.epsilon = recipe.epsilon();
  cfg.generations = recipe.ga_generations;
  cfg.population = 100;
  cfg.mutation_rate = 0.05;
  cfg.elite_fraction = 0.6;
  cfg.seed = 99;
  cfg.max_workers = 1;
  auto serial = run_genetic_encryption(fx.quantized, fx.enc_set, cfg);
  cfg.max_workers = 4;
  auto parallel = run_genetic_encryption(fx.quantized, fx.enc_set, cfg);

  std::string bytes1 = io::key_to_json(serial.key).dump(2) + "\n";
  std::string bytes2 = io::key_to_json(parallel.key).dump(2) + "\n";
  if (!output_dir.empty()) {
    std::filesystem::create_directories(output_dir);
    io::save_key(serial.key, output_dir / "key_workers1.json");
    io::save_key(parallel.key, output_dir / "key_workers4.json");
    auto b1 = detail::slurp(output_dir / "key_workers1.json");
    auto b2 = detail::slurp(output_dir / "key_workers4.json");
    bytes1.assign(b1.begin(), b1.end());
    bytes2.assign(b2.begin(), b2.end());
  }
  if (bytes1 != bytes2) {
    msg << "key files differ between max-workers 1 and 4";
    return Status::Fail;
  }
  msg << "byte-identical key files at max-workers {1, 4} (" << serial.key.positions.size()
      << " positions)";
  return Status::Pass;
}

inline std::vector<CriterionResult> run_all(const Options& opts) {
  std::vector<CriterionResult> results;
  detail::Runner runner(results);

  runner.run(1, "decryptor equivalence (truth table)", 1.0, criterion_decryptor_truth_table);
  runner.run(2, "end-to-end hardware/software bit-exactness", 60.0,
             criterion_end_to_end_bit_exact);
  runner.run(3, "complexity oracle and geometric-series bound", 10.0,
             criterion_complexity_oracle);
  runner.run(4, "cost-model reduction factors", 1.0, [&](std::ostringstream& msg) {
    return criterion_cost_reproduction(msg, opts.output_dir);
  });

  ToyRecipe recipe;
  ToyFixture fx;
  std::vector<GaResult> runs;
  bool fixture_ok = true;
  std::string fixture_error;
  auto t0 = std::chrono::steady_clock::now();
  try {
    fx = ToyFixture::build(recipe, opts.max_workers);
    runs = ga_five_seeds(fx, recipe, opts.max_workers);
  } catch (const std::exception& e) {
    fixture_ok = false;
    fixture_error = e.what();
  }
  double fixture_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  auto with_fixture = [&](int id, const std::string& name, double limit,
                          const std::function<Status(std::ostringstream&)>& body) {
    if (!fixture_ok) {
      results.push_back({id, name, Status::Fail, "toy fixture failed: " + fixture_error, 0.0});
      return;
    }
    runner.run(id, name, limit, body);
  };

  with_fixture(5, "desk-scale protection behavior", 600.0 - fixture_seconds,
               [&](std::ostringstream& msg) {
                 msg << "(fixture: train + 5 genetic runs took "
                     << io::format_double(fixture_seconds) << "s) ";
                 return criterion_protection(msg, fx, recipe, runs);
               });
  runner.run(6, "fitness dominance property", 0.0, criterion_fitness_dominance);
  runner.run(7, "recovery-mutation statistics", 0.0, criterion_recovery_mutation_stats);
  runner.run(8, "XOR involution and golden-file roundtrips", 0.0, [&](std::ostringstream& msg) {
    return criterion_involution_and_roundtrips(msg, opts.golden_dir);
  });
  with_fixture(9, "partial-key recovery curve", 0.0, [&](std::ostringstream& msg) {
    return criterion_partial_recovery(msg, fx, runs, opts.output_dir, opts.max_workers);
  });
  with_fixture(10, "gradient-baseline ordering (soft)", 0.0, [&](std::ostringstream& msg) {
    return criterion_gradient_ordering(msg, fx, recipe, runs);
  });
  with_fixture(11, "encrypt determinism across worker counts", 0.0,
               [&](std::ostringstream& msg) {
                 return criterion_determinism(msg, fx, recipe, opts.output_dir);
               });
  return results;
}

inline const char* to_string(Status s) {
  switch (s) {
    case Status::Pass: return "PASS";
    case Status::Warn: return "WARN";
    default: return "FAIL";
  }
}

/// One line per criterion; returns the number of failures.
inline int print_results(const std::vector<CriterionResult>& results, std::ostream& out) {
  int failures = 0;
  for (const auto& r : results) {
    out << to_string(r.status) << "  criterion " << r.id << ": " << r.name << " ["
        << io::format_double(r.seconds) << "s]";
    if (!r.detail.empty()) out << " -- " << r.detail;
    out << "\n";
    failures += r.status == Status::Fail ? 1 : 0;
  }
  return failures;
}

inline void save_results_csv(const std::vector<CriterionResult>& results,
                             const std::filesystem::path& path) {
  std::string out = "id,name,status,seconds,detail\n";
  for (const auto& r : results) {
    std::string detail = r.detail;
    for (auto& c : detail)
      if (c == ',' || c == '\n') c = ';';
    out += std::to_string(r.id) + ',' + r.name + ',' + to_string(r.status) + ',' +
           io::format_double(r.seconds) + ',' + detail + '\n';
  }
  std::ofstream f(path);
  f << out;
}

}  // namespace snngx::acceptance
