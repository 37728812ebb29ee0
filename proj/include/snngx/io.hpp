#pragma once

#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "snngx/attack.hpp"
#include "snngx/cost.hpp"
#include "snngx/encryption.hpp"
#include "snngx/network.hpp"
#include "snngx/report.hpp"
#include "snngx/spike_train.hpp"

namespace snngx::io {

using json = nlohmann::ordered_json;

inline constexpr std::uint16_t kDatasetVersion = 1;
inline constexpr std::uint64_t kNetworkVersion = 1;
inline constexpr std::uint64_t kKeyVersion = 1;
inline constexpr std::uint64_t kReportVersion = 1;

/// Shortest decimal that round-trips back to the same double.
inline std::string format_double(double v) {
  char buf[64];
  auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

inline std::string fnv1a_hex(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  static const char* digits = "0123456789abcdef";
  for (int i = 15; i >= 0; --i) {
    buf[i] = digits[h & 0xf];
    h >>= 4;
  }
  return std::string(buf, 16);
}

namespace detail {

inline std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw io_error(io_errc::unreadable, "cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  return bytes;
}

inline void write_file(const std::filesystem::path& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw io_error(io_errc::unreadable, "cannot open " + path.string() + " for writing");
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw io_error(io_errc::unreadable, "short write to " + path.string());
}

struct Cursor {
  const std::vector<std::uint8_t>& bytes;
  std::size_t pos = 0;

  void need(std::size_t n, const char* what) const {
    if (pos + n > bytes.size())
      throw io_error(io_errc::truncated, std::string("truncated file while reading ") + what);
  }
  std::uint16_t u16(const char* what) {
    need(2, what);
    std::uint16_t v = static_cast<std::uint16_t>(bytes[pos] | (bytes[pos + 1] << 8));
    pos += 2;
    return v;
  }
  std::uint32_t u32(const char* what) {
    need(4, what);
    std::uint32_t v = 0;
    for (int i = 3; i >= 0; --i) v = (v << 8) | bytes[pos + static_cast<std::size_t>(i)];
    pos += 4;
    return v;
  }
};

inline void put_u16(std::string& out, std::uint16_t v) {
  out.push_back(static_cast<char>(v & 0xff));
  out.push_back(static_cast<char>((v >> 8) & 0xff));
}

inline void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

inline json parse_json(const std::filesystem::path& path) {
  auto bytes = read_file(path);
  try {
    return json::parse(bytes.begin(), bytes.end());
  } catch (const nlohmann::json::exception& e) {
    throw io_error(io_errc::invalid_field, path.string() + ": " + e.what());
  }
}

template <class T>
T get_field(const json& j, const char* key, const char* context) {
  if (!j.contains(key))
    throw io_error(io_errc::invalid_field,
                   std::string(context) + ": missing field '" + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw io_error(io_errc::invalid_field,
                   std::string(context) + ": field '" + key + "': " + e.what());
  }
}

inline void check_version(const json& j, std::uint64_t supported, const char* context) {
  std::uint64_t v = j.contains("version") ? get_field<std::uint64_t>(j, "version", context) : 1;
  if (v != supported)
    throw io_error(io_errc::bad_version, std::string(context) + ": unsupported version " +
                                             std::to_string(v));
}

}  // namespace detail

// --- dataset: SNGX binary container -----------------------------------------

/// Row-major bit packing, little-endian bit order within each byte.
inline std::vector<std::uint8_t> pack_spike_bits(const SpikeTrain& train) {
  std::vector<std::uint8_t> packed((train.size() + 7) / 8, 0);
  for (std::size_t i = 0; i < train.size(); ++i)
    if (train.bits()[i]) packed[i / 8] |= static_cast<std::uint8_t>(1u << (i % 8));
  return packed;
}

inline SpikeTrain unpack_spike_bits(std::span<const std::uint8_t> packed, std::size_t timesteps,
                                    std::size_t features) {
  SpikeTrain train(timesteps, features);
  for (std::size_t i = 0; i < train.size(); ++i)
    train.bits()[i] = (packed[i / 8] >> (i % 8)) & 1;
  return train;
}

inline std::string dataset_to_bytes(const Dataset& ds) {
  ds.validate();
  std::string out;
  out += "SNGX";
  detail::put_u16(out, kDatasetVersion);
  detail::put_u32(out, static_cast<std::uint32_t>(ds.timesteps));
  detail::put_u32(out, static_cast<std::uint32_t>(ds.features));
  detail::put_u16(out, ds.num_classes);
  detail::put_u32(out, static_cast<std::uint32_t>(ds.samples.size()));
  for (const auto& s : ds.samples) {
    detail::put_u16(out, s.label);
    auto packed = pack_spike_bits(s.input);
    out.append(packed.begin(), packed.end());
  }
  return out;
}

inline void save_dataset(const Dataset& ds, const std::filesystem::path& path) {
  detail::write_file(path, dataset_to_bytes(ds));
}

inline Dataset dataset_from_bytes(const std::vector<std::uint8_t>& bytes) {
  detail::Cursor cur{bytes};
  cur.need(4, "magic");
  if (!(bytes[0] == 'S' && bytes[1] == 'N' && bytes[2] == 'G' && bytes[3] == 'X'))
    throw io_error(io_errc::bad_magic, "dataset: bad magic, expected SNGX");
  cur.pos = 4;
  std::uint16_t version = cur.u16("version");
  if (version != kDatasetVersion)
    throw io_error(io_errc::bad_version,
                   "dataset: unsupported version " + std::to_string(version));
  Dataset ds;
  ds.timesteps = cur.u32("timesteps");
  ds.features = cur.u32("features");
  ds.num_classes = cur.u16("num_classes");
  if (ds.timesteps == 0 || ds.features == 0 || ds.num_classes == 0)
    throw io_error(io_errc::invalid_field, "dataset: zero dimension in header");
  std::uint32_t count = cur.u32("count");
  const std::size_t packed_size = (ds.timesteps * ds.features + 7) / 8;
  ds.samples.reserve(count);
  for (std::uint32_t i = 0; i < count; ++i) {
    std::uint16_t label = cur.u16("sample label");
    if (label >= ds.num_classes)
      throw io_error(io_errc::invalid_field, "dataset: sample " + std::to_string(i) +
                                                 " label out of range");
    cur.need(packed_size, "sample spikes");
    std::span<const std::uint8_t> packed(bytes.data() + cur.pos, packed_size);
    ds.samples.push_back({unpack_spike_bits(packed, ds.timesteps, ds.features), label});
    cur.pos += packed_size;
  }
  if (cur.pos != bytes.size())
    throw io_error(io_errc::invalid_field, "dataset: trailing bytes after last sample");
  return ds;
}

inline Dataset load_dataset(const std::filesystem::path& path) {
  return dataset_from_bytes(detail::read_file(path));
}

/// CSV event list: one "t,feature" pair per line; '#' lines and blank lines
/// are ignored.
inline SpikeTrain load_events_csv(const std::filesystem::path& path, std::size_t timesteps,
                                  std::size_t features) {
  auto bytes = detail::read_file(path);
  SpikeTrain train(timesteps, features);
  std::string text(bytes.begin(), bytes.end());
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::size_t first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::size_t comma = line.find(',');
    if (comma == std::string::npos)
      throw io_error(io_errc::invalid_field,
                     "events: line " + std::to_string(line_no) + " has no comma");
    unsigned long long t = 0, f = 0;
    try {
      t = std::stoull(line.substr(0, comma));
      f = std::stoull(line.substr(comma + 1));
    } catch (const std::exception&) {
      throw io_error(io_errc::invalid_field,
                     "events: line " + std::to_string(line_no) + " is not 't,feature'");
    }
    if (t >= timesteps || f >= features)
      throw io_error(io_errc::invalid_field, "events: line " + std::to_string(line_no) +
                                                 " event (" + std::to_string(t) + "," +
                                                 std::to_string(f) + ") out of range");
    train.set(t, f, true);
  }
  return train;
}

// --- network JSON ------------------------------------------------------------

namespace detail {

template <class Layer, class T>
json layer_to_json(const Layer& l, bool quantized, double delta) {
  json jl;
  jl["kind"] = to_string(l.kind);
  jl["n_in"] = l.n_in();
  jl["n_out"] = l.n_out();
  jl["weights"] = l.weights.data();
  if (l.kind == LayerKind::Recurrent) jl["recurrent_weights"] = l.recurrent_weights.data();
  if (quantized) jl["delta"] = delta;
  jl["lambda"] = l.neuron.lambda;
  jl["v_th"] = l.neuron.v_th;
  return jl;
}

template <class T>
Matrix<T> matrix_from_json(const json& jw, std::size_t rows, std::size_t cols,
                           const char* context) {
  std::vector<T> data;
  try {
    data = jw.get<std::vector<T>>();
  } catch (const nlohmann::json::exception& e) {
    throw io_error(io_errc::invalid_field, std::string(context) + ": " + e.what());
  }
  if (data.size() != rows * cols)
    throw io_error(io_errc::invalid_field,
                   std::string(context) + ": expected " + std::to_string(rows * cols) +
                       " values, got " + std::to_string(data.size()));
  Matrix<T> m(rows, cols);
  m.data() = std::move(data);
  return m;
}

}  // namespace detail

inline json network_to_json(const FloatNetwork& net) {
  net.validate();
  json j;
  j["version"] = kNetworkVersion;
  j["num_classes"] = net.num_classes;
  j["layers"] = json::array();
  for (const auto& l : net.layers)
    j["layers"].push_back(detail::layer_to_json<FloatLayer, double>(l, false, 0.0));
  return j;
}

inline json network_to_json(const QuantizedNetwork& net) {
  net.validate();
  json j;
  j["version"] = kNetworkVersion;
  j["n_bit"] = net.n_bit;
  j["num_classes"] = net.num_classes;
  j["layers"] = json::array();
  for (const auto& l : net.layers)
    j["layers"].push_back(detail::layer_to_json<QuantLayer, std::int32_t>(l, true, l.delta));
  return j;
}

using AnyNetwork = std::variant<FloatNetwork, QuantizedNetwork>;

inline AnyNetwork network_from_json(const json& j) {
  detail::check_version(j, kNetworkVersion, "network");
  const bool quantized = j.contains("n_bit");
  const auto num_classes = detail::get_field<std::uint16_t>(j, "num_classes", "network");
  if (!j.contains("layers") || !j.at("layers").is_array())
    throw io_error(io_errc::invalid_field, "network: missing layers array");

  auto parse_common = [&](const json& jl, auto& layer, std::size_t idx) {
    const std::string ctx = "network: layer " + std::to_string(idx);
    std::string kind = detail::get_field<std::string>(jl, "kind", ctx.c_str());
    try {
      layer.kind = layer_kind_from_string(kind);
    } catch (const validation_error& e) {
      throw io_error(io_errc::invalid_field, ctx + ": " + e.what());
    }
    layer.neuron.lambda = detail::get_field<double>(jl, "lambda", ctx.c_str());
    layer.neuron.v_th = detail::get_field<double>(jl, "v_th", ctx.c_str());
    return std::pair{detail::get_field<std::size_t>(jl, "n_out", ctx.c_str()),
                     detail::get_field<std::size_t>(jl, "n_in", ctx.c_str())};
  };

  try {
    if (quantized) {
      QuantizedNetwork net;
      net.n_bit = detail::get_field<int>(j, "n_bit", "network");
      net.num_classes = num_classes;
      std::size_t idx = 0;
      for (const auto& jl : j.at("layers")) {
        QuantLayer layer;
        auto [n_out, n_in] = parse_common(jl, layer, idx);
        const std::string ctx = "network: layer " + std::to_string(idx);
        layer.weights = detail::matrix_from_json<std::int32_t>(
            detail::get_field<json>(jl, "weights", ctx.c_str()), n_out, n_in, ctx.c_str());
        if (layer.kind == LayerKind::Recurrent)
          layer.recurrent_weights = detail::matrix_from_json<std::int32_t>(
              detail::get_field<json>(jl, "recurrent_weights", ctx.c_str()), n_out, n_out,
              ctx.c_str());
        layer.delta = detail::get_field<double>(jl, "delta", ctx.c_str());
        net.layers.push_back(std::move(layer));
        ++idx;
      }
      net.validate();
      return net;
    }
    FloatNetwork net;
    net.num_classes = num_classes;
    std::size_t idx = 0;
    for (const auto& jl : j.at("layers")) {
      FloatLayer layer;
      auto [n_out, n_in] = parse_common(jl, layer, idx);
      const std::string ctx = "network: layer " + std::to_string(idx);
      layer.weights = detail::matrix_from_json<double>(
          detail::get_field<json>(jl, "weights", ctx.c_str()), n_out, n_in, ctx.c_str());
      if (layer.kind == LayerKind::Recurrent)
        layer.recurrent_weights = detail::matrix_from_json<double>(
            detail::get_field<json>(jl, "recurrent_weights", ctx.c_str()), n_out, n_out,
            ctx.c_str());
      net.layers.push_back(std::move(layer));
      ++idx;
    }
    net.validate();
    return net;
  } catch (const validation_error& e) {
    throw io_error(io_errc::invalid_field, std::string("network: ") + e.what());
  }
}

template <class Net>
void save_network(const Net& net, const std::filesystem::path& path) {
  detail::write_file(path, network_to_json(net).dump(2) + "\n");
}

inline AnyNetwork load_network(const std::filesystem::path& path) {
  return network_from_json(detail::parse_json(path));
}

inline QuantizedNetwork load_quantized_network(const std::filesystem::path& path) {
  AnyNetwork any = load_network(path);
  if (!std::holds_alternative<QuantizedNetwork>(any))
    throw io_error(io_errc::invalid_field,
                   path.string() + ": expected a quantized network (with n_bit)");
  return std::get<QuantizedNetwork>(std::move(any));
}

inline FloatNetwork load_float_network(const std::filesystem::path& path) {
  AnyNetwork any = load_network(path);
  if (!std::holds_alternative<FloatNetwork>(any))
    throw io_error(io_errc::invalid_field,
                   path.string() + ": expected a float network (no n_bit)");
  return std::get<FloatNetwork>(std::move(any));
}

// --- secret key JSON ----------------------------------------------------------

inline json key_to_json(const SecretKey& key) {
  key.validate();
  json j;
  j["version"] = kKeyVersion;
  j["layer"] = key.layer;
  j["n_bit"] = key.n_bit;
  j["genome_length"] = key.genome_length;
  j["positions"] = key.positions;
  j["meta"] = {{"epsilon", key.meta.epsilon},
               {"seed", key.meta.seed},
               {"generations_run", key.meta.generations_run},
               {"final_accuracy", key.meta.final_accuracy}};
  return j;
}

inline SecretKey key_from_json(const json& j) {
  detail::check_version(j, kKeyVersion, "key");
  SecretKey key;
  key.layer = detail::get_field<std::uint32_t>(j, "layer", "key");
  key.n_bit = detail::get_field<int>(j, "n_bit", "key");
  key.genome_length = detail::get_field<std::uint64_t>(j, "genome_length", "key");
  key.positions = detail::get_field<std::vector<std::uint32_t>>(j, "positions", "key");
  if (j.contains("meta")) {
    const json& m = j.at("meta");
    key.meta.epsilon = detail::get_field<std::uint64_t>(m, "epsilon", "key meta");
    key.meta.seed = detail::get_field<std::uint64_t>(m, "seed", "key meta");
    key.meta.generations_run = detail::get_field<std::uint64_t>(m, "generations_run", "key meta");
    key.meta.final_accuracy = detail::get_field<double>(m, "final_accuracy", "key meta");
  }
  try {
    key.validate();
  } catch (const validation_error& e) {
    throw io_error(io_errc::invalid_field, std::string("key: ") + e.what());
  }
  return key;
}

inline void save_key(const SecretKey& key, const std::filesystem::path& path) {
  detail::write_file(path, key_to_json(key).dump(2) + "\n");
}

inline SecretKey load_key(const std::filesystem::path& path) {
  return key_from_json(detail::parse_json(path));
}

// --- experiment report ---------------------------------------------------------

inline json report_to_json(const ExperimentReport& report) {
  report.validate();
  json j;
  j["version"] = kReportVersion;
  j["config_hash"] = report.config_hash;
  j["seed"] = report.seed;
  j["started_at"] = report.started_at;
  j["finished_at"] = report.finished_at;
  j["summary"] = {{"final_accuracy", report.final_accuracy},
                  {"final_distance", report.final_distance},
                  {"generations_run", report.generations_run},
                  {"genome_length", report.genome_length}};
  j["rows"] = json::array();
  for (const auto& r : report.rows)
    j["rows"].push_back({{"generation", r.generation},
                         {"best_fitness", r.best_fitness},
                         {"best_distance", r.best_distance},
                         {"accuracy", r.accuracy}});
  return j;
}

inline ExperimentReport report_from_json(const json& j) {
  detail::check_version(j, kReportVersion, "report");
  ExperimentReport report;
  report.config_hash = detail::get_field<std::string>(j, "config_hash", "report");
  report.seed = detail::get_field<std::uint64_t>(j, "seed", "report");
  report.started_at = detail::get_field<std::string>(j, "started_at", "report");
  report.finished_at = detail::get_field<std::string>(j, "finished_at", "report");
  const json& s = detail::get_field<json>(j, "summary", "report");
  report.final_accuracy = detail::get_field<double>(s, "final_accuracy", "report summary");
  report.final_distance = detail::get_field<std::uint64_t>(s, "final_distance", "report summary");
  report.generations_run =
      detail::get_field<std::uint64_t>(s, "generations_run", "report summary");
  report.genome_length = detail::get_field<std::uint64_t>(s, "genome_length", "report summary");
  if (j.contains("rows"))
    for (const auto& jr : j.at("rows"))
      report.rows.push_back({detail::get_field<std::uint64_t>(jr, "generation", "report row"),
                             detail::get_field<double>(jr, "best_fitness", "report row"),
                             detail::get_field<std::uint64_t>(jr, "best_distance", "report row"),
                             detail::get_field<double>(jr, "accuracy", "report row")});
  try {
    report.validate();
  } catch (const validation_error& e) {
    throw io_error(io_errc::invalid_field, std::string("report: ") + e.what());
  }
  return report;
}

inline void save_report_json(const ExperimentReport& report, const std::filesystem::path& path) {
  detail::write_file(path, report_to_json(report).dump(2) + "\n");
}

inline ExperimentReport load_report_json(const std::filesystem::path& path) {
  return report_from_json(detail::parse_json(path));
}

/// Flat per-generation CSV for plotting.
inline void save_report_csv(const ExperimentReport& report, const std::filesystem::path& path) {
  report.validate();
  std::string out = "generation,best_fitness,best_distance,accuracy\n";
  for (const auto& r : report.rows) {
    out += std::to_string(r.generation) + ',' + format_double(r.best_fitness) + ',' +
           std::to_string(r.best_distance) + ',' + format_double(r.accuracy) + '\n';
  }
  detail::write_file(path, out);
}

// --- attack / cost CSV reports --------------------------------------------------

inline void save_complexity_csv(std::uint64_t n, std::span<const FeasibilityRow> rows,
                                const std::filesystem::path& path) {
  std::string out = "n,k,exact,bound,days\n";
  for (const auto& r : rows) {
    out += std::to_string(n) + ',' + std::to_string(r.k) + ',' + r.exact.to_string() + ',';
    if (!std::isnan(r.bound)) out += format_double(r.bound);
    out += ',' + format_double(r.days) + '\n';
  }
  detail::write_file(path, out);
}

inline void save_recovery_csv(const PartialRecoveryCurve& curve,
                              const std::filesystem::path& path) {
  std::string out = curve.mode == RecoveryMode::Exhaustive ? "# mode: exhaustive\n"
                                                           : "# mode: greedy\n";
  out += "k,best_accuracy,subset\n";
  for (const auto& p : curve.points) {
    out += std::to_string(p.k) + ',' + format_double(p.best_accuracy) + ',';
    for (std::size_t i = 0; i < p.best_subset.size(); ++i) {
      if (i) out += ' ';
      out += std::to_string(p.best_subset[i]);
    }
    out += '\n';
  }
  if (curve.truncated) out += "# truncated: evaluation budget exhausted\n";
  detail::write_file(path, out);
}

inline void save_baseline_csv(const BaselineResult& result, const std::filesystem::path& path) {
  std::string out = "trial,accuracy\n";
  for (std::size_t i = 0; i < result.accuracies.size(); ++i)
    out += std::to_string(i) + ',' + format_double(result.accuracies[i]) + '\n';
  detail::write_file(path, out);
}

inline void save_cost_csv(std::span<const hw::CostRow> rows, const std::filesystem::path& path) {
  std::string out =
      "dataset_label,bits_random,bits_snngx,e_rd_pJ,e_gd_pJ,energy_factor,t_rd_ns,t_gd_ns,"
      "latency_factor\n";
  for (const auto& r : rows) {
    out += r.label + ',' + format_double(r.bits_random) + ',' + format_double(r.bits_snngx) +
           ',' + format_double(r.cost.e_rd_pj) + ',' + format_double(r.cost.e_gd_pj) + ',' +
           format_double(r.cost.energy_factor) + ',' + format_double(r.cost.t_rd_ns) + ',' +
           format_double(r.cost.t_gd_ns) + ',' + format_double(r.cost.latency_factor) + '\n';
  }
  detail::write_file(path, out);
}

}  // namespace snngx::io
