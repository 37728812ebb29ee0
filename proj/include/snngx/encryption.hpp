#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "snngx/network.hpp"

namespace snngx {

/// Flattened sign bits of one layer's weight matrix, row-major; -1 where the
/// two's-complement MSB is set (weight < 0), +1 otherwise.
using SignBitVector = std::vector<std::int8_t>;

/// Flip bit `bit` of the n_bit two's-complement representation of w.
inline std::int32_t flip_bit(std::int32_t w, int bit, int n_bit) {
  const std::uint32_t mask = (n_bit >= 32) ? ~0u : ((1u << n_bit) - 1);
  std::uint32_t u = static_cast<std::uint32_t>(w) & mask;
  u ^= (1u << bit);
  if (u & (1u << (n_bit - 1))) u |= ~mask;  // sign extend
  return static_cast<std::int32_t>(u);
}

inline std::int32_t flip_msb(std::int32_t w, int n_bit) { return flip_bit(w, n_bit - 1, n_bit); }

/// Sparse XOR key over one layer's sign bits. A position listed here means
/// "this MSB is encrypted"; applying the key twice is the identity.
struct SecretKey {
  std::uint32_t layer = 0;
  int n_bit = 8;
  std::uint64_t genome_length = 0;
  std::vector<std::uint32_t> positions;  // strictly increasing flat indices

  struct Meta {
    std::uint64_t epsilon = 0;
    std::uint64_t seed = 0;
    std::uint64_t generations_run = 0;
    double final_accuracy = 0.0;
    bool operator==(const Meta&) const = default;
  } meta;

  bool operator==(const SecretKey&) const = default;

  void validate() const {
    for (std::size_t i = 0; i < positions.size(); ++i) {
      if (positions[i] >= genome_length)
        throw validation_error("SecretKey: positions[" + std::to_string(i) +
                               "] = " + std::to_string(positions[i]) + " >= genome_length");
      if (i > 0 && positions[i] <= positions[i - 1])
        throw validation_error("SecretKey: positions[" + std::to_string(i) +
                               "] is not strictly increasing (duplicate or unsorted)");
    }
  }
};

inline SignBitVector extract_sign_bits(const QuantizedNetwork& net, std::size_t layer) {
  if (layer >= net.layers.size())
    throw validation_error("extract_sign_bits: layer index out of range");
  const auto& weights = net.layers[layer].weights;
  SignBitVector bits(weights.size());
  for (std::size_t i = 0; i < weights.size(); ++i) bits[i] = weights[i] < 0 ? -1 : 1;
  return bits;
}

inline void apply_key_inplace(QuantizedNetwork& net, const SecretKey& key) {
  if (key.layer >= net.layers.size())
    throw validation_error("apply_key: layer index out of range");
  if (key.n_bit != net.n_bit)
    throw validation_error("apply_key: key n_bit does not match the network");
  auto& weights = net.layers[key.layer].weights;
  if (key.genome_length != weights.size())
    throw validation_error("apply_key: genome_length does not match layer weight count");
  key.validate();
  for (std::uint32_t p : key.positions) weights[p] = flip_msb(weights[p], net.n_bit);
}

/// XOR-encrypt (or decrypt, it is the same operation) the key's layer.
inline QuantizedNetwork apply_key(const QuantizedNetwork& net, const SecretKey& key) {
  QuantizedNetwork out = net;
  apply_key_inplace(out, key);
  return out;
}

inline std::size_t hamming_distance(const SignBitVector& a, const SignBitVector& b) {
  if (a.size() != b.size())
    throw validation_error("hamming_distance: length mismatch");
  std::size_t d = 0;
  for (std::size_t i = 0; i < a.size(); ++i) d += a[i] != b[i];
  return d;
}

/// Key = candidate XOR raw: the positions where the two sign vectors differ.
inline SecretKey key_from_difference(const SignBitVector& candidate, const SignBitVector& raw,
                                     std::uint32_t layer, int n_bit) {
  if (candidate.size() != raw.size())
    throw validation_error("key_from_difference: length mismatch");
  SecretKey key;
  key.layer = layer;
  key.n_bit = n_bit;
  key.genome_length = raw.size();
  for (std::size_t i = 0; i < raw.size(); ++i)
    if (candidate[i] != raw[i]) key.positions.push_back(static_cast<std::uint32_t>(i));
  return key;
}

}  // namespace snngx
