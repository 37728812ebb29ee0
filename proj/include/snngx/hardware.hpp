#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <ostream>
#include <span>
#include <vector>

#include "snngx/encryption.hpp"
#include "snngx/forward.hpp"
#include "snngx/network.hpp"
#include "snngx/spike_train.hpp"

namespace snngx::hw {

/// HRS encodes bit 0, LRS encodes bit 1.
enum class RramCell : std::uint8_t { HRS = 0, LRS = 1 };

inline constexpr std::size_t kPeRows = 32;
inline constexpr std::size_t kPeCols = 1024;
inline constexpr int kBitsPerWeight = 8;
inline constexpr std::size_t kWeightsPerRow = kPeCols / kBitsPerWeight;  // 128
inline constexpr std::size_t kLaneWidth = 8;                             // weights per adder-tree pass
inline constexpr std::size_t kLanesPerRow = kWeightsPerRow / kLaneWidth;  // 16
inline constexpr std::size_t kPesPerTile = 16;
inline constexpr std::size_t kNeuronsPerTile = 64;

/// One 32 x 1024 RRAM crossbar slice. Eight consecutive columns store one
/// 8-bit two's-complement weight, MSB in the lowest column of the group.
class PEArray {
public:
  PEArray() { cells_.fill(RramCell::HRS); }

  RramCell cell(std::size_t row, std::size_t col) const { return cells_[row * kPeCols + col]; }
  void set_cell(std::size_t row, std::size_t col, RramCell c) { cells_[row * kPeCols + col] = c; }

  void program_weight(std::size_t row, std::size_t slot, std::int32_t w) {
    if (row >= kPeRows || slot >= kWeightsPerRow)
      throw validation_error("PEArray: row/slot out of range");
    if (w < -128 || w > 127) throw validation_error("PEArray: weight does not fit in 8 bits");
    const auto u = static_cast<std::uint8_t>(w);
    for (int b = 0; b < kBitsPerWeight; ++b) {
      bool bit = (u >> (kBitsPerWeight - 1 - b)) & 1;  // MSB first
      set_cell(row, slot * kBitsPerWeight + static_cast<std::size_t>(b),
               bit ? RramCell::LRS : RramCell::HRS);
    }
  }

  std::int32_t read_weight(std::size_t row, std::size_t slot) const {
    std::uint8_t u = 0;
    for (int b = 0; b < kBitsPerWeight; ++b) {
      if (cell(row, slot * kBitsPerWeight + static_cast<std::size_t>(b)) == RramCell::LRS)
        u |= static_cast<std::uint8_t>(1u << (kBitsPerWeight - 1 - b));
    }
    return static_cast<std::int32_t>(static_cast<std::int8_t>(u));
  }

private:
  std::array<RramCell, kPeRows * kPeCols> cells_;
};

/// Writes up to 32 x 128 weights row-major. Readback equals the input.
inline void program_weights(PEArray& pe, std::span<const std::int32_t> weights) {
  if (weights.size() > kPeRows * kWeightsPerRow)
    throw validation_error("program_weights: capacity exceeded (32 x 128 weights)");
  for (std::size_t i = 0; i < weights.size(); ++i)
    pe.program_weight(i / kWeightsPerRow, i % kWeightsPerRow, weights[i]);
}

/// Per-column key bits currently latched for the active row. The controller
/// reloads the unit from secret memory on every row activation; a key bit of 0
/// leaves the column on the plain multiply path.
struct DecryptorUnit {
  std::array<std::uint8_t, kPeCols> key_bits{};
};

/// Multiplication first, decryption afterward:
///   key = 0: OUT = x AND w_e
///   key = 1: OUT = (x AND w_e) XOR x
/// Either way OUT equals x AND true_weight_bit.
inline bool decrypt_mac_bit(bool x, bool w_e, bool key) {
  const bool slp = x && w_e;
  return key ? (slp != x) : slp;
}

/// One wordline activation: per weight slot the eight decrypted column bits
/// are reassembled into a two's-complement value gated by the slot's input
/// bit, and the adder tree folds each group of eight weights into one signed
/// lane sum (one adder-tree cycle per lane).
inline std::array<std::int32_t, kLanesPerRow> pe_cycle(const PEArray& pe,
                                                       const DecryptorUnit& dec,
                                                       std::size_t active_row,
                                                       std::span<const std::uint8_t> x) {
  if (active_row >= kPeRows) throw validation_error("pe_cycle: active_row out of range");
  if (x.size() != kWeightsPerRow)
    throw validation_error("pe_cycle: need one input bit per weight slot");
  std::array<std::int32_t, kLanesPerRow> lanes{};
  for (std::size_t slot = 0; slot < kWeightsPerRow; ++slot) {
    const bool xin = x[slot] != 0;
    std::uint8_t value = 0;
    for (int b = 0; b < kBitsPerWeight; ++b) {
      const std::size_t col = slot * kBitsPerWeight + static_cast<std::size_t>(b);
      const bool w_e = pe.cell(active_row, col) == RramCell::LRS;
      if (decrypt_mac_bit(xin, w_e, dec.key_bits[col] != 0))
        value |= static_cast<std::uint8_t>(1u << (kBitsPerWeight - 1 - b));
    }
    lanes[slot / kLaneWidth] += static_cast<std::int32_t>(static_cast<std::int8_t>(value));
  }
  return lanes;
}

/// Digital LIF neuron with a saturating signed fixed-point membrane register
/// (width bits, frac fractional bits). The reset multiplexer writes an exact
/// zero on spike, which realizes the (1 - O_prev) term of the discrete
/// dynamics at the next step.
class FixedPointLIF {
public:
  FixedPointLIF(double lambda, double v_th, int width = 16, int frac = 8)
      : width_(width), frac_(frac) {
    if (width < 2 || width > 62 || frac < 0 || frac >= width)
      throw validation_error("FixedPointLIF: bad width/frac");
    if (!(lambda >= 0.0 && lambda < 1.0))
      throw validation_error("FixedPointLIF: lambda must be in [0, 1)");
    if (!(v_th > 0.0)) throw validation_error("FixedPointLIF: v_th must be > 0");
    const std::int64_t one = std::int64_t(1) << frac_;
    lambda_fx_ = std::min<std::int64_t>(std::llround(lambda * static_cast<double>(one)), one - 1);
    vth_fx_ = std::llround(v_th * static_cast<double>(one));
    hi_ = (std::int64_t(1) << (width_ - 1)) - 1;
    lo_ = -(std::int64_t(1) << (width_ - 1));
  }

  struct Step {
    double v = 0.0;
    bool spike = false;
  };

  /// i_ext is the integer adder-tree sum, added in membrane units.
  Step step(std::int64_t i_ext) {
    const std::int64_t leak = (lambda_fx_ * reg_) >> frac_;  // arithmetic shift
    const std::int64_t vn = sat(leak + sat_shift(i_ext));
    const bool spike = vn >= vth_fx_;
    reg_ = spike ? 0 : vn;
    return {static_cast<double>(vn) / static_cast<double>(std::int64_t(1) << frac_), spike};
  }

  void reset() { reg_ = 0; }

  double membrane() const {
    return static_cast<double>(reg_) / static_cast<double>(std::int64_t(1) << frac_);
  }
  std::int64_t raw() const { return reg_; }
  void set_raw(std::int64_t r) { reg_ = sat(r); }
  double lambda_effective() const {
    return static_cast<double>(lambda_fx_) / static_cast<double>(std::int64_t(1) << frac_);
  }

private:
  std::int64_t sat(std::int64_t v) const { return v > hi_ ? hi_ : (v < lo_ ? lo_ : v); }
  std::int64_t sat_shift(std::int64_t i_ext) const {
    // i_ext << frac with saturation instead of wraparound.
    if (i_ext > (hi_ >> frac_) + 1) return hi_;
    if (i_ext < (lo_ >> frac_) - 1) return lo_;
    return i_ext * (std::int64_t(1) << frac_);
  }

  int width_;
  int frac_;
  std::int64_t lambda_fx_ = 0;
  std::int64_t vth_fx_ = 0;
  std::int64_t hi_ = 0;
  std::int64_t lo_ = 0;
  std::int64_t reg_ = 0;
};

/// One tile: 16 PEs plus the per-PE latched decryptor key patterns for each
/// row. The 64 digital LIF neurons per tile consume the multiplexed lane sums.
struct TileModel {
  std::array<PEArray, kPesPerTile> pes;
  // key_rows[pe][row] = per-column key bits streamed when that row is active
  std::array<std::array<std::array<std::uint8_t, kPeCols>, kPeRows>, kPesPerTile> key_rows{};
};

namespace detail {

struct LaneAssign {
  std::size_t neuron = 0;
  std::array<std::int32_t, kLaneWidth> source{};  // input index, -1 = padding
};

struct RowAssign {
  std::size_t tile = 0, pe = 0, row = 0;
  std::vector<LaneAssign> lanes;  // up to 16
};

struct LayerPlan {
  std::vector<RowAssign> rows;
  std::size_t rows_per_pe_max = 0;  // sequential row activations per timestep
};

struct MappedNetwork {
  std::vector<TileModel> tiles;
  std::vector<LayerPlan> layers;
};

/// Flattens every output neuron's weight stream (feedforward then recurrent)
/// into zero-padded lanes of eight, packs 16 lanes per wordline, and deals the
/// wordlines round-robin across the 16 PEs of as many tiles as needed. The
/// decryptor key bit of an encrypted weight sits on its MSB column.
inline MappedNetwork map_network(const QuantizedNetwork& net, const SecretKey& key) {
  if (net.n_bit != kBitsPerWeight)
    throw validation_error("hardware-sim: only 8-bit quantized networks map onto the PE");
  if (!key.positions.empty()) {
    if (key.layer >= net.layers.size())
      throw validation_error("hardware-sim: key layer out of range");
    if (key.genome_length != net.layers[key.layer].weights.size())
      throw validation_error("hardware-sim: key genome_length does not match the layer");
    key.validate();
  }

  MappedNetwork mapped;
  std::size_t next_row = 0;  // global wordline counter across tiles
  auto place = [&](std::size_t global_row) {
    const std::size_t rows_per_tile = kPesPerTile * kPeRows;
    RowAssign ra;
    ra.tile = global_row / rows_per_tile;
    ra.pe = global_row % kPesPerTile;
    ra.row = (global_row % rows_per_tile) / kPesPerTile;
    return ra;
  };

  for (std::size_t li = 0; li < net.layers.size(); ++li) {
    const QuantLayer& layer = net.layers[li];
    const bool rec = layer.kind == LayerKind::Recurrent;
    const std::size_t n_src = layer.n_in() + (rec ? layer.n_out() : 0);
    LayerPlan plan;

    RowAssign current = place(next_row);
    auto flush_row = [&]() {
      if (current.lanes.empty()) return;
      plan.rows.push_back(current);
      ++next_row;
      current = place(next_row);
    };

    for (std::size_t o = 0; o < layer.n_out(); ++o) {
      for (std::size_t base = 0; base < n_src; base += kLaneWidth) {
        LaneAssign lane;
        lane.neuron = o;
        lane.source.fill(-1);
        for (std::size_t s = 0; s < kLaneWidth && base + s < n_src; ++s)
          lane.source[s] = static_cast<std::int32_t>(base + s);
        current.lanes.push_back(lane);
        if (current.lanes.size() == kLanesPerRow) flush_row();
      }
    }
    flush_row();

    // Program cells and decryptor key patterns.
    for (const RowAssign& ra : plan.rows) {
      if (ra.tile >= mapped.tiles.size()) mapped.tiles.resize(ra.tile + 1);
      TileModel& tile = mapped.tiles[ra.tile];
      for (std::size_t lane_i = 0; lane_i < ra.lanes.size(); ++lane_i) {
        const LaneAssign& lane = ra.lanes[lane_i];
        for (std::size_t s = 0; s < kLaneWidth; ++s) {
          const std::size_t slot = lane_i * kLaneWidth + s;
          std::int32_t w = 0;
          bool encrypted = false;
          if (lane.source[s] >= 0) {
            const auto src = static_cast<std::size_t>(lane.source[s]);
            if (src < layer.n_in()) {
              w = layer.weights(lane.neuron, src);
              const std::uint64_t flat = lane.neuron * layer.n_in() + src;
              if (!key.positions.empty() && key.layer == li)
                encrypted = std::binary_search(key.positions.begin(), key.positions.end(),
                                               static_cast<std::uint32_t>(flat));
            } else {
              w = layer.recurrent_weights(lane.neuron, src - layer.n_in());
            }
          }
          tile.pes[ra.pe].program_weight(ra.row, slot, w);
          tile.key_rows[ra.pe][ra.row][slot * kBitsPerWeight] = encrypted ? 1 : 0;
        }
      }
    }

    // Sequential activations per PE decide the layer's cycle cost.
    std::vector<std::vector<std::size_t>> counts;
    for (const RowAssign& ra : plan.rows) {
      if (ra.tile >= counts.size()) counts.resize(ra.tile + 1);
      if (counts[ra.tile].size() < kPesPerTile) counts[ra.tile].assign(kPesPerTile, 0);
      ++counts[ra.tile][ra.pe];
    }
    for (const auto& tile_counts : counts)
      for (std::size_t c : tile_counts) plan.rows_per_pe_max = std::max(plan.rows_per_pe_max, c);
    mapped.layers.push_back(std::move(plan));
  }
  return mapped;
}

}  // namespace detail

struct HwInferenceResult {
  std::size_t prediction = 0;
  std::vector<std::uint64_t> class_spike_counts;
  std::uint64_t adder_tree_cycles = 0;
  QuantTrace trace;  // filled when record_trace is set
};

/// Bit-exact logic-level inference over the encrypted weights. The decryptor
/// column outputs reassemble into exactly x AND true_weight per bit, so the
/// integer lane sums and the prediction equal the software forward pass of
/// the decrypted network. A wrong key decrypts to whatever that key says:
/// the simulator is faithful to its inputs.
inline HwInferenceResult simulate_inference(const QuantizedNetwork& encrypted,
                                            const SecretKey& key, const SpikeTrain& sample,
                                            bool record_trace = false,
                                            std::ostream* trace_stream = nullptr) {
  encrypted.validate();
  if (sample.features() != encrypted.input_features())
    throw validation_error("simulate_inference: sample features do not match first layer n_in");

  detail::MappedNetwork mapped = detail::map_network(encrypted, key);

  const std::size_t depth = encrypted.layers.size();
  const std::size_t steps = sample.timesteps();
  std::vector<std::vector<double>> v(depth);
  std::vector<std::vector<std::uint8_t>> spikes(depth);
  for (std::size_t i = 0; i < depth; ++i) {
    v[i].assign(encrypted.layers[i].n_out(), 0.0);
    spikes[i].assign(encrypted.layers[i].n_out(), 0);
  }

  HwInferenceResult out;
  out.class_spike_counts.assign(encrypted.num_classes, 0);
  if (record_trace) {
    for (std::size_t i = 0; i < depth; ++i)
      out.trace.sums.emplace_back(steps, encrypted.layers[i].n_out(), 0);
  }

  std::vector<std::uint8_t> sources;
  std::vector<std::int64_t> neuron_sums;
  std::array<std::uint8_t, kWeightsPerRow> x_bits{};
  for (std::size_t t = 0; t < steps; ++t) {
    for (std::size_t li = 0; li < depth; ++li) {
      const QuantLayer& layer = encrypted.layers[li];
      const bool rec = layer.kind == LayerKind::Recurrent;
      const std::uint8_t* in = li == 0 ? sample.row(t) : spikes[li - 1].data();
      sources.assign(in, in + layer.n_in());
      if (rec) sources.insert(sources.end(), spikes[li].begin(), spikes[li].end());

      neuron_sums.assign(layer.n_out(), 0);
      for (const detail::RowAssign& ra : mapped.layers[li].rows) {
        const TileModel& tile = mapped.tiles[ra.tile];
        DecryptorUnit dec;
        dec.key_bits = tile.key_rows[ra.pe][ra.row];
        x_bits.fill(0);
        for (std::size_t lane_i = 0; lane_i < ra.lanes.size(); ++lane_i)
          for (std::size_t s = 0; s < kLaneWidth; ++s) {
            std::int32_t src = ra.lanes[lane_i].source[s];
            if (src >= 0) x_bits[lane_i * kLaneWidth + s] = sources[static_cast<std::size_t>(src)];
          }
        auto lanes = pe_cycle(tile.pes[ra.pe], dec, ra.row, x_bits);
        for (std::size_t lane_i = 0; lane_i < ra.lanes.size(); ++lane_i)
          neuron_sums[ra.lanes[lane_i].neuron] += lanes[lane_i];
        if (trace_stream) {
          *trace_stream << "{\"t\":" << t << ",\"layer\":" << li << ",\"tile\":" << ra.tile
                        << ",\"pe\":" << ra.pe << ",\"row\":" << ra.row << ",\"lane_sums\":[";
          for (std::size_t lane_i = 0; lane_i < ra.lanes.size(); ++lane_i)
            *trace_stream << (lane_i ? "," : "") << lanes[lane_i];
          *trace_stream << "]}\n";
        }
      }
      if (record_trace)
        for (std::size_t o = 0; o < layer.n_out(); ++o) out.trace.sums[li](t, o) = neuron_sums[o];

      snngx::detail::quant_membrane_step(v[li], neuron_sums, layer.delta, spikes[li],
                                         layer.neuron);
      out.adder_tree_cycles +=
          static_cast<std::uint64_t>(mapped.layers[li].rows_per_pe_max) * kLanesPerRow;
      if (trace_stream) {
        *trace_stream << "{\"t\":" << t << ",\"layer\":" << li << ",\"spikes\":[";
        bool first = true;
        for (std::size_t o = 0; o < spikes[li].size(); ++o)
          if (spikes[li][o]) {
            *trace_stream << (first ? "" : ",") << o;
            first = false;
          }
        *trace_stream << "]}\n";
      }
    }
    for (std::size_t c = 0; c < encrypted.num_classes; ++c)
      out.class_spike_counts[c] += spikes.back()[c];
  }
  out.prediction = snngx::detail::argmax_lowest(out.class_spike_counts);
  return out;
}

}  // namespace snngx::hw
