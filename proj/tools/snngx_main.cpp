// snngx: XOR-encryption toolkit for quantized spiking networks.
//
// Pipeline subcommands: gen-data, train, quantize, encrypt, decrypt, eval.
// Analysis subcommands: attack-complexity, attack-recover, baseline-random,
// baseline-gradient, hwsim, cost, repro.
//
// Exit codes: 0 success, 2 validation/format failure, 1 runtime failure.

#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "snngx/acceptance.hpp"
#include "snngx/attack.hpp"
#include "snngx/cost.hpp"
#include "snngx/forward.hpp"
#include "snngx/genetic.hpp"
#include "snngx/hardware.hpp"
#include "snngx/io.hpp"
#include "snngx/quantize.hpp"
#include "snngx/synthetic.hpp"
#include "snngx/train.hpp"

namespace fs = std::filesystem;
using snngx::io::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitValidation = 2;

std::string now_iso8601() {
  auto now = std::chrono::system_clock::now();
  std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

/// Run directory: collects console output into log.txt and persists the merged
/// effective config (with a content hash) beside the outputs.
class RunDir {
public:
  void open(const fs::path& dir) {
    dir_ = dir;
    fs::create_directories(dir_);
    enabled_ = true;
  }
  bool enabled() const { return enabled_; }
  const fs::path& dir() const { return dir_; }
  fs::path file(const std::string& name) const { return dir_ / name; }

  void say(const std::string& line) {
    std::cout << line << "\n";
    log_ << line << "\n";
  }

  void write_config(const std::string& command, json params) {
    if (!enabled_) return;
    json cfg;
    cfg["command"] = command;
    cfg["params"] = std::move(params);
    cfg["hash"] = snngx::io::fnv1a_hex(cfg.dump());
    std::ofstream out(file("config.json"));
    out << cfg.dump(2) << "\n";
  }

  ~RunDir() {
    if (enabled_) {
      std::ofstream out(file("log.txt"));
      out << log_.str();
    }
  }

private:
  fs::path dir_;
  std::ostringstream log_;
  bool enabled_ = false;
};

snngx::Dataset load_dataset_checked(const fs::path& path) {
  if (!fs::exists(path))
    throw snngx::io_error(snngx::io_errc::unreadable, "missing file: " + path.string());
  return snngx::io::load_dataset(path);
}

int run_gen_data(const fs::path& out, const snngx::SyntheticTaskSpec& spec) {
  RunDir run;
  run.open(out);
  auto ds = snngx::generate_synthetic(spec);
  snngx::io::save_dataset(ds, run.file("dataset.sngx"));
  run.write_config("gen-data", json{{"classes", spec.num_classes},
                                    {"features", spec.features},
                                    {"timesteps", spec.timesteps},
                                    {"samples_per_class", spec.samples_per_class},
                                    {"contrast", spec.contrast},
                                    {"noise", spec.noise},
                                    {"seed", spec.seed}});
  run.say("wrote " + run.file("dataset.sngx").string() + " (" +
          std::to_string(ds.samples.size()) + " samples, " + std::to_string(ds.num_classes) +
          " classes)");
  return kExitOk;
}

int run_train(const fs::path& out, const fs::path& data, const std::string& arch,
              const snngx::TrainConfig& cfg) {
  RunDir run;
  run.open(out);
  auto ds = load_dataset_checked(data);
  auto result = snngx::train_toy(snngx::ToyArch::parse(arch), ds, cfg);
  snngx::io::save_network(result.net, run.file("network.json"));
  run.write_config("train", json{{"data", data.string()},
                                 {"arch", arch},
                                 {"epochs", cfg.epochs},
                                 {"learning_rate", cfg.learning_rate},
                                 {"surrogate_window", cfg.surrogate_window},
                                 {"lambda", cfg.neuron.lambda},
                                 {"v_th", cfg.neuron.v_th},
                                 {"seed", cfg.seed}});
  run.say("train accuracy: " + snngx::io::format_double(result.train_accuracy));
  run.say("wrote " + run.file("network.json").string());
  return kExitOk;
}

int run_quantize(const fs::path& out, const fs::path& net_path, int bits) {
  RunDir run;
  run.open(out);
  auto net = snngx::io::load_float_network(net_path);
  auto q = snngx::quantize(net, bits);
  snngx::io::save_network(q, run.file("network.json"));
  run.write_config("quantize", json{{"net", net_path.string()}, {"bits", bits}});
  run.say("wrote " + run.file("network.json").string() + " (n_bit=" + std::to_string(bits) +
          ")");
  return kExitOk;
}

struct EncryptParams {
  snngx::GAConfig ga;
  fs::path net, data, config;
};

void merge_encrypt_config(EncryptParams& p, const CLI::App* cmd) {
  if (p.config.empty()) return;
  json cfg = snngx::io::detail::parse_json(p.config);
  const std::set<std::string> known = {"layer",          "epsilon",     "generations",
                                       "population",     "mutation_rate", "elite_fraction",
                                       "enc_samples",    "seed",        "max_workers"};
  for (const auto& [key, value] : cfg.items()) {
    if (!known.count(key))
      throw snngx::validation_error("config: unknown key '" + key + "'");
    (void)value;
  }
  // A flag given on the command line overrides the config file.
  auto take = [&](const char* flag, const char* key, auto& dst) {
    if (cfg.contains(key) && cmd->count(flag) == 0)
      dst = cfg.at(key).get<std::decay_t<decltype(dst)>>();
  };
  take("--layer", "layer", p.ga.target_layer);
  take("--epsilon", "epsilon", p.ga.epsilon);
  take("--generations", "generations", p.ga.generations);
  take("--population", "population", p.ga.population);
  take("--mutation-rate", "mutation_rate", p.ga.mutation_rate);
  take("--elite-fraction", "elite_fraction", p.ga.elite_fraction);
  take("--enc-samples", "enc_samples", p.ga.enc_samples);
  take("--seed", "seed", p.ga.seed);
  take("--max-workers", "max_workers", p.ga.max_workers);
}

int run_encrypt(const fs::path& out, const EncryptParams& p) {
  RunDir run;
  run.open(out);
  auto net = snngx::io::load_quantized_network(p.net);
  auto data = load_dataset_checked(p.data);

  json params{{"net", p.net.string()},
              {"data", p.data.string()},
              {"layer", p.ga.target_layer},
              {"epsilon", p.ga.epsilon},
              {"generations", p.ga.generations},
              {"population", p.ga.population},
              {"mutation_rate", p.ga.mutation_rate},
              {"elite_fraction", p.ga.elite_fraction},
              {"enc_samples", p.ga.enc_samples},
              {"seed", p.ga.seed},
              {"max_workers", p.ga.max_workers}};
  run.write_config("encrypt", params);

  snngx::ExperimentReport report;
  report.config_hash = snngx::io::fnv1a_hex(params.dump());
  report.seed = p.ga.seed;
  report.started_at = now_iso8601();

  auto result = snngx::run_genetic_encryption(net, data, p.ga);

  report.finished_at = now_iso8601();
  report.rows = result.report.rows;
  report.final_accuracy = result.report.final_accuracy;
  report.final_distance = result.report.final_distance;
  report.generations_run = result.report.generations_run;
  report.genome_length = result.report.genome_length;

  snngx::io::save_key(result.key, run.file("key.json"));
  snngx::io::save_network(result.encrypted, run.file("network.json"));
  snngx::io::save_report_json(report, run.file("report.json"));
  snngx::io::save_report_csv(report, run.file("report.csv"));

  // The returns of the search: encrypted accuracy, distance, genome length, key.
  run.say("final accuracy: " + snngx::io::format_double(result.report.final_accuracy));
  run.say("distance d: " + std::to_string(result.report.final_distance));
  run.say("genome length: " + std::to_string(result.report.genome_length));
  run.say("key: " + run.file("key.json").string());
  return kExitOk;
}

int run_decrypt(const fs::path& out, const fs::path& net_path, const fs::path& key_path) {
  RunDir run;
  run.open(out);
  auto net = snngx::io::load_quantized_network(net_path);
  auto key = snngx::io::load_key(key_path);
  auto decrypted = snngx::apply_key(net, key);
  snngx::io::save_network(decrypted, run.file("network.json"));
  run.write_config("decrypt", json{{"net", net_path.string()}, {"key", key_path.string()}});
  run.say("wrote " + run.file("network.json").string());
  return kExitOk;
}

int run_eval(const fs::path& out, const fs::path& net_path, const fs::path& data,
             const fs::path& events, std::size_t timesteps, std::size_t features) {
  RunDir run;
  if (!out.empty()) run.open(out);
  auto any = snngx::io::load_network(net_path);

  if (!events.empty()) {
    if (timesteps == 0 || features == 0)
      throw snngx::validation_error("eval: --events needs --timesteps and --features");
    auto sample = snngx::io::load_events_csv(events, timesteps, features);
    auto result = std::visit([&](const auto& net) { return snngx::forward(net, sample); }, any);
    std::ostringstream counts;
    for (std::size_t c = 0; c < result.class_spike_counts.size(); ++c)
      counts << (c ? " " : "") << result.class_spike_counts[c];
    std::cout << "prediction: " << result.prediction << "\n";
    std::cout << "spike counts: " << counts.str() << "\n";
    return kExitOk;
  }

  auto ds = load_dataset_checked(data);
  double acc = std::visit([&](const auto& net) { return snngx::evaluate_accuracy(net, ds); }, any);
  std::cout << "accuracy: " << snngx::io::format_double(acc) << "\n";
  if (run.enabled()) {
    run.write_config("eval", json{{"net", net_path.string()}, {"data", data.string()}});
    std::ofstream f(run.file("eval.json"));
    f << json{{"accuracy", acc}}.dump(2) << "\n";
  }
  return kExitOk;
}

int run_attack_complexity(const fs::path& out, std::uint64_t n, std::uint64_t k_max,
                          double rate) {
  auto rows = snngx::feasibility_report(n, k_max, rate);
  std::cout << "k,exact,bound,days\n";
  for (const auto& r : rows) {
    std::cout << r.k << ',' << r.exact.to_string() << ','
              << (std::isnan(r.bound) ? "" : snngx::io::format_double(r.bound)) << ','
              << snngx::io::format_double(r.days) << "\n";
  }
  if (!out.empty()) {
    RunDir run;
    run.open(out);
    snngx::io::save_complexity_csv(n, rows, run.file("complexity.csv"));
    run.write_config("attack-complexity",
                     json{{"n", n}, {"k_max", k_max}, {"rate", rate}});
    run.say("wrote " + run.file("complexity.csv").string());
  }
  return kExitOk;
}

int run_attack_recover(const fs::path& out, const fs::path& net_path, const fs::path& key_path,
                       const fs::path& data, std::size_t k_max, const std::string& mode,
                       std::size_t max_evals, std::size_t max_workers) {
  RunDir run;
  run.open(out);
  auto net = snngx::io::load_quantized_network(net_path);
  auto key = snngx::io::load_key(key_path);
  auto ds = load_dataset_checked(data);
  auto m = mode == "greedy" ? snngx::RecoveryMode::Greedy : snngx::RecoveryMode::Exhaustive;
  auto curve = snngx::partial_key_recovery(net, key, ds, k_max, m, max_evals, max_workers);
  snngx::io::save_recovery_csv(curve, run.file("recovery.csv"));
  run.write_config("attack-recover", json{{"net", net_path.string()},
                                          {"key", key_path.string()},
                                          {"data", data.string()},
                                          {"k_max", k_max},
                                          {"mode", mode},
                                          {"max_evals", max_evals},
                                          {"max_workers", max_workers}});
  for (const auto& p : curve.points)
    run.say("k=" + std::to_string(p.k) +
            " best_accuracy=" + snngx::io::format_double(p.best_accuracy));
  if (curve.truncated) run.say("truncated: evaluation budget exhausted");
  run.say("wrote " + run.file("recovery.csv").string());
  return kExitOk;
}

int run_baseline_random(const fs::path& out, const fs::path& net_path, const fs::path& data,
                        std::size_t budget, const std::string& scope, std::size_t layer,
                        std::size_t trials, std::uint64_t seed, std::size_t max_workers) {
  RunDir run;
  run.open(out);
  auto net = snngx::io::load_quantized_network(net_path);
  auto ds = load_dataset_checked(data);
  auto s = scope == "model-all-bits" ? snngx::BitScope::ModelAllBits
                                     : snngx::BitScope::LayerSignBits;
  auto result = snngx::random_bit_baseline(net, ds, budget, s, layer, trials, seed, max_workers);
  snngx::io::save_baseline_csv(result, run.file("baseline.csv"));
  run.write_config("baseline-random", json{{"net", net_path.string()},
                                           {"data", data.string()},
                                           {"budget", budget},
                                           {"scope", scope},
                                           {"layer", layer},
                                           {"trials", trials},
                                           {"seed", seed},
                                           {"max_workers", max_workers}});
  run.say("min: " + snngx::io::format_double(result.min));
  run.say("median: " + snngx::io::format_double(result.median));
  run.say("max: " + snngx::io::format_double(result.max));
  run.say("wrote " + run.file("baseline.csv").string());
  return kExitOk;
}

int run_baseline_gradient(const fs::path& out, const fs::path& net_path, const fs::path& data,
                          std::size_t budget, std::size_t layer, int bits, double window) {
  RunDir run;
  run.open(out);
  auto net = snngx::io::load_float_network(net_path);
  auto ds = load_dataset_checked(data);
  auto result = snngx::gradient_baseline(net, ds, budget, layer, bits, window);
  snngx::io::save_key(result.key, run.file("key.json"));
  run.write_config("baseline-gradient", json{{"net", net_path.string()},
                                             {"data", data.string()},
                                             {"budget", budget},
                                             {"layer", layer},
                                             {"bits", bits},
                                             {"window", window}});
  if (result.degenerate)
    run.say("warning: all surrogate gradients are zero (vanishing-gradient regime); "
            "ranking fell back to index order");
  run.say("selected " + std::to_string(result.key.positions.size()) + " positions");
  run.say("wrote " + run.file("key.json").string());
  return kExitOk;
}

int run_hwsim(const fs::path& out, const fs::path& net_path, const fs::path& key_path,
              const fs::path& data, std::size_t index, const fs::path& events,
              std::size_t timesteps, std::size_t features, const fs::path& trace_path,
              bool check) {
  RunDir run;
  if (!out.empty()) run.open(out);
  auto net = snngx::io::load_quantized_network(net_path);

  snngx::SecretKey key;
  key.n_bit = net.n_bit;
  key.genome_length = net.layers[0].weights.size();
  if (!key_path.empty()) key = snngx::io::load_key(key_path);

  snngx::SpikeTrain sample;
  if (!events.empty()) {
    if (timesteps == 0 || features == 0)
      throw snngx::validation_error("hwsim: --events needs --timesteps and --features");
    sample = snngx::io::load_events_csv(events, timesteps, features);
  } else {
    auto ds = load_dataset_checked(data);
    if (index >= ds.samples.size())
      throw snngx::validation_error("hwsim: --index beyond dataset size");
    sample = ds.samples[index].input;
  }

  std::ofstream trace_file;
  std::ostream* trace = nullptr;
  if (!trace_path.empty()) {
    trace_file.open(trace_path);
    trace = &trace_file;
  }
  auto result = snngx::hw::simulate_inference(net, key, sample, check, trace);
  std::cout << "prediction: " << result.prediction << "\n";
  std::cout << "adder-tree cycles: " << result.adder_tree_cycles << "\n";
  if (check) {
    auto decrypted = key.positions.empty() ? net : snngx::apply_key(net, key);
    snngx::QuantTrace sw_trace;
    auto sw = snngx::forward(decrypted, sample, &sw_trace);
    bool same = sw.prediction == result.prediction && sw_trace.sums.size() == result.trace.sums.size();
    if (same)
      for (std::size_t li = 0; li < sw_trace.sums.size(); ++li)
        same = same && sw_trace.sums[li] == result.trace.sums[li];
    std::cout << "software check: " << (same ? "bit-exact match" : "MISMATCH") << "\n";
    if (!same) return kExitRuntime;
  }
  return kExitOk;
}

int run_cost(const fs::path& out, const std::string& label, double bits_random,
             double bits_snngx, double decryptions, const snngx::hw::CostModel& model) {
  auto c = snngx::hw::estimate_cost(bits_random, bits_snngx, decryptions, model);
  std::cout << "e_rd_pJ: " << snngx::io::format_double(c.e_rd_pj) << "\n";
  std::cout << "e_gd_pJ: " << snngx::io::format_double(c.e_gd_pj) << "\n";
  std::cout << "energy_factor: " << snngx::io::format_double(c.energy_factor) << "\n";
  std::cout << "t_rd_ns: " << snngx::io::format_double(c.t_rd_ns) << "\n";
  std::cout << "t_gd_ns: " << snngx::io::format_double(c.t_gd_ns) << "\n";
  std::cout << "latency_factor: " << snngx::io::format_double(c.latency_factor) << "\n";
  if (!out.empty()) {
    RunDir run;
    run.open(out);
    std::vector<snngx::hw::CostRow> rows{{label, bits_random, bits_snngx, c}};
    snngx::io::save_cost_csv(rows, run.file("cost.csv"));
    run.write_config("cost", json{{"label", label},
                                  {"bits_random", bits_random},
                                  {"bits_snngx", bits_snngx},
                                  {"decryptions", decryptions}});
    run.say("wrote " + run.file("cost.csv").string());
  }
  return kExitOk;
}

int run_repro(const fs::path& out, const fs::path& golden_dir, std::size_t max_workers) {
  RunDir run;
  run.open(out);
  snngx::acceptance::Options opts;
  opts.output_dir = out;
  opts.golden_dir = golden_dir;
  opts.max_workers = max_workers;
  auto results = snngx::acceptance::run_all(opts);
  std::ostringstream text;
  int failures = snngx::acceptance::print_results(results, text);
  std::istringstream lines(text.str());
  for (std::string line; std::getline(lines, line);) run.say(line);
  snngx::acceptance::save_results_csv(results, run.file("repro_report.csv"));
  run.say("wrote " + run.file("repro_report.csv").string());
  return failures == 0 ? kExitOk : kExitRuntime;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"XOR-encryption toolkit for quantized spiking networks"};
  app.require_subcommand(1);

  // gen-data
  auto* gen = app.add_subcommand("gen-data", "generate a synthetic rate-coded spike dataset");
  fs::path gen_out;
  snngx::SyntheticTaskSpec spec;
  gen->add_option("--out", gen_out, "run directory")->required();
  gen->add_option("--classes", spec.num_classes, "number of classes");
  gen->add_option("--features", spec.features, "features per timestep");
  gen->add_option("--timesteps", spec.timesteps, "timesteps per sample");
  gen->add_option("--samples-per-class", spec.samples_per_class, "samples per class");
  gen->add_option("--contrast", spec.contrast, "in-block firing probability");
  gen->add_option("--noise", spec.noise, "per-bit flip probability");
  gen->add_option("--seed", spec.seed, "generator seed");

  // train
  auto* train = app.add_subcommand("train", "train a toy float network with surrogate gradients");
  fs::path train_out, train_data;
  std::string train_arch = "64F-32F-4F";
  snngx::TrainConfig train_cfg;
  train->add_option("--out", train_out, "run directory")->required();
  train->add_option("--data", train_data, "training dataset (.sngx)")->required();
  train->add_option("--arch", train_arch, "architecture, e.g. 64F-32R-4F");
  train->add_option("--epochs", train_cfg.epochs, "training epochs");
  train->add_option("--lr", train_cfg.learning_rate, "learning rate");
  train->add_option("--window", train_cfg.surrogate_window, "surrogate window half-width");
  train->add_option("--lambda", train_cfg.neuron.lambda, "membrane decay");
  train->add_option("--vth", train_cfg.neuron.v_th, "firing threshold");
  train->add_option("--seed", train_cfg.seed, "init/shuffle seed");

  // quantize
  auto* quant = app.add_subcommand("quantize", "quantize a float network to n-bit fixed point");
  fs::path quant_out, quant_net;
  int quant_bits = 8;
  quant->add_option("--out", quant_out, "run directory")->required();
  quant->add_option("--net", quant_net, "float network JSON")->required();
  quant->add_option("--bits", quant_bits, "bit width")->check(CLI::IsMember({6, 8, 16}));

  // encrypt
  auto* enc = app.add_subcommand("encrypt", "genetic sign-bit search and XOR encryption");
  fs::path enc_out;
  EncryptParams ep;
  enc->add_option("--out", enc_out, "run directory")->required();
  enc->add_option("--net", ep.net, "quantized network JSON")->required();
  enc->add_option("--data", ep.data, "encryption dataset (.sngx)")->required();
  enc->add_option("--config", ep.config, "JSON config file (flags override)");
  enc->add_option("--layer", ep.ga.target_layer, "target layer index");
  enc->add_option("--epsilon", ep.ga.epsilon, "Hamming distance budget");
  enc->add_option("--generations", ep.ga.generations, "generations (0 = estimate)");
  enc->add_option("--population", ep.ga.population, "population size");
  enc->add_option("--mutation-rate", ep.ga.mutation_rate, "recovery mutation probability");
  enc->add_option("--elite-fraction", ep.ga.elite_fraction, "elite retain fraction");
  enc->add_option("--enc-samples", ep.ga.enc_samples, "stratified subset size (0 = all)");
  enc->add_option("--seed", ep.ga.seed, "search seed");
  enc->add_option("--max-workers", ep.ga.max_workers, "parallel fitness evaluations");

  // decrypt
  auto* dec = app.add_subcommand("decrypt", "apply a secret key (XOR is its own inverse)");
  fs::path dec_out, dec_net, dec_key;
  dec->add_option("--out", dec_out, "run directory")->required();
  dec->add_option("--net", dec_net, "quantized network JSON")->required();
  dec->add_option("--key", dec_key, "secret key JSON")->required();

  // eval
  auto* ev = app.add_subcommand("eval", "evaluate accuracy on a dataset or one event-list CSV");
  fs::path ev_out, ev_net, ev_data, ev_events;
  std::size_t ev_t = 0, ev_f = 0;
  ev->add_option("--net", ev_net, "network JSON (float or quantized)")->required();
  ev->add_option("--data", ev_data, "dataset (.sngx)");
  ev->add_option("--events", ev_events, "event-list CSV (t,feature per line)");
  ev->add_option("--timesteps", ev_t, "timesteps for --events");
  ev->add_option("--features", ev_f, "features for --events");
  ev->add_option("--out", ev_out, "optional run directory");

  // attack-complexity
  auto* ac = app.add_subcommand("attack-complexity", "brute-force key recovery cost table");
  fs::path ac_out;
  std::uint64_t ac_n = 0, ac_kmax = 0;
  double ac_rate = 6900.0;
  ac->add_option("--n", ac_n, "layer weight count")->required();
  ac->add_option("--k-max", ac_kmax, "largest flip budget")->required();
  ac->add_option("--rate", ac_rate, "attacker inferences per second");
  ac->add_option("--out", ac_out, "optional run directory");

  // attack-recover
  auto* ar = app.add_subcommand("attack-recover", "partial-key recovery curve");
  fs::path ar_out, ar_net, ar_key, ar_data;
  std::size_t ar_kmax = 0, ar_evals = 200000, ar_workers = 1;
  std::string ar_mode = "exhaustive";
  ar->add_option("--out", ar_out, "run directory")->required();
  ar->add_option("--net", ar_net, "encrypted quantized network JSON")->required();
  ar->add_option("--key", ar_key, "secret key JSON")->required();
  ar->add_option("--data", ar_data, "evaluation dataset (.sngx)")->required();
  ar->add_option("--k-max", ar_kmax, "largest subset size")->required();
  ar->add_option("--mode", ar_mode, "exhaustive | greedy")
      ->check(CLI::IsMember({"exhaustive", "greedy"}));
  ar->add_option("--max-evals", ar_evals, "evaluation budget");
  ar->add_option("--max-workers", ar_workers, "parallel subset evaluations");

  // baseline-random
  auto* br = app.add_subcommand("baseline-random", "random bit-flip encryption control");
  fs::path br_out, br_net, br_data;
  std::size_t br_budget = 0, br_layer = 0, br_trials = 100, br_workers = 1;
  std::uint64_t br_seed = 0;
  std::string br_scope = "layer-sign-bits";
  br->add_option("--out", br_out, "run directory")->required();
  br->add_option("--net", br_net, "quantized network JSON")->required();
  br->add_option("--data", br_data, "evaluation dataset (.sngx)")->required();
  br->add_option("--budget", br_budget, "bits to flip per trial")->required();
  br->add_option("--scope", br_scope, "layer-sign-bits | model-all-bits")
      ->check(CLI::IsMember({"layer-sign-bits", "model-all-bits"}));
  br->add_option("--layer", br_layer, "layer for layer-sign-bits scope");
  br->add_option("--trials", br_trials, "number of trials");
  br->add_option("--seed", br_seed, "trial seed");
  br->add_option("--max-workers", br_workers, "parallel trials");

  // baseline-gradient
  auto* bg = app.add_subcommand("baseline-gradient",
                                "first-order gradient ranking encryption baseline");
  fs::path bg_out, bg_net, bg_data;
  std::size_t bg_budget = 0, bg_layer = 0;
  int bg_bits = 8;
  double bg_window = 0.5;
  bg->add_option("--out", bg_out, "run directory")->required();
  bg->add_option("--net", bg_net, "float network JSON (pre-quantization)")->required();
  bg->add_option("--data", bg_data, "encryption dataset (.sngx)")->required();
  bg->add_option("--budget", bg_budget, "bits to select")->required();
  bg->add_option("--layer", bg_layer, "target layer index");
  bg->add_option("--bits", bg_bits, "n_bit of the key's target network");
  bg->add_option("--window", bg_window, "surrogate window half-width");

  // hwsim
  auto* hs = app.add_subcommand("hwsim", "logic-level RRAM datapath inference");
  fs::path hs_out, hs_net, hs_key, hs_data, hs_events, hs_trace;
  std::size_t hs_index = 0, hs_t = 0, hs_f = 0;
  bool hs_check = false;
  hs->add_option("--net", hs_net, "quantized (possibly encrypted) network JSON")->required();
  hs->add_option("--key", hs_key, "secret key JSON (omit for plaintext run)");
  hs->add_option("--data", hs_data, "dataset (.sngx)");
  hs->add_option("--index", hs_index, "sample index into --data");
  hs->add_option("--events", hs_events, "event-list CSV input");
  hs->add_option("--timesteps", hs_t, "timesteps for --events");
  hs->add_option("--features", hs_f, "features for --events");
  hs->add_option("--trace", hs_trace, "JSON-lines trace output path");
  hs->add_flag("--check", hs_check, "compare against the software forward pass");
  hs->add_option("--out", hs_out, "optional run directory");

  // cost
  auto* co = app.add_subcommand("cost", "decryption energy/latency cost model");
  fs::path co_out;
  std::string co_label = "model";
  double co_br = 0, co_bs = 0, co_dec = 1.0;
  snngx::hw::CostModel co_model;
  co->add_option("--bits-random", co_br, "bits the random-encryption scheme rewrites")
      ->required();
  co->add_option("--bits-snngx", co_bs, "bits the genetic scheme decrypts")->required();
  co->add_option("--decryptions", co_dec, "decryptions per inference");
  co->add_option("--label", co_label, "row label for the CSV");
  co->add_option("--e-write", co_model.e_write_pj, "pJ per RRAM program");
  co->add_option("--t-write", co_model.t_write_ns, "ns per program pulse");
  co->add_option("--parallel-writes", co_model.parallel_writes, "simultaneous rewrites");
  co->add_option("--e-decrypt", co_model.e_decrypt_pj, "pJ per decryption per bit");
  co->add_option("--f-gd", co_model.f_gd_mhz, "decryptor clock, MHz");
  co->add_option("--f-rd", co_model.f_rd_mhz, "rewrite clock, MHz");
  co->add_option("--out", co_out, "optional run directory");

  // repro
  auto* rp = app.add_subcommand("repro", "run the acceptance criteria and report pass/fail");
  fs::path rp_out, rp_golden = "tests/golden";
  std::size_t rp_workers = 4;
  rp->add_option("--out", rp_out, "run directory")->required();
  rp->add_option("--golden-dir", rp_golden, "committed golden files directory");
  rp->add_option("--max-workers", rp_workers, "parallel evaluations");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitValidation;
  }

  try {
    if (*gen) return run_gen_data(gen_out, spec);
    if (*train) return run_train(train_out, train_data, train_arch, train_cfg);
    if (*quant) return run_quantize(quant_out, quant_net, quant_bits);
    if (*enc) {
      merge_encrypt_config(ep, enc);
      return run_encrypt(enc_out, ep);
    }
    if (*dec) return run_decrypt(dec_out, dec_net, dec_key);
    if (*ev) return run_eval(ev_out, ev_net, ev_data, ev_events, ev_t, ev_f);
    if (*ac) return run_attack_complexity(ac_out, ac_n, ac_kmax, ac_rate);
    if (*ar)
      return run_attack_recover(ar_out, ar_net, ar_key, ar_data, ar_kmax, ar_mode, ar_evals,
                                ar_workers);
    if (*br)
      return run_baseline_random(br_out, br_net, br_data, br_budget, br_scope, br_layer,
                                 br_trials, br_seed, br_workers);
    if (*bg)
      return run_baseline_gradient(bg_out, bg_net, bg_data, bg_budget, bg_layer, bg_bits,
                                   bg_window);
    if (*hs)
      return run_hwsim(hs_out, hs_net, hs_key, hs_data, hs_index, hs_events, hs_t, hs_f,
                       hs_trace, hs_check);
    if (*co) return run_cost(co_out, co_label, co_br, co_bs, co_dec, co_model);
    if (*rp) return run_repro(rp_out, rp_golden, rp_workers);
  } catch (const snngx::validation_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const snngx::io_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const snngx::convergence_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitOk;
}
