#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "snngx/bigint.hpp"
#include "snngx/encryption.hpp"
#include "snngx/forward.hpp"
#include "snngx/parallel.hpp"
#include "snngx/rng.hpp"
#include "snngx/train.hpp"

namespace snngx {

/// Exact number of candidate keys an attacker flipping 1..k of n sign bits
/// must try: sum of binomial coefficients C(n, i) for i = 1..k.
inline BigUint complexity_exact(std::uint64_t n, std::uint64_t k) {
  if (k < 1 || k > n) throw validation_error("complexity_exact: need 1 <= k <= n");
  BigUint sum;
  BigUint c(1);  // C(n, 0)
  for (std::uint64_t i = 1; i <= k; ++i) {
    c *= (n - i + 1);
    c.divmod(i);
    sum += c;
  }
  return sum;
}

/// Geometric-series upper bound C(n,k) * (n-k+1) / (n-2k+1) - 1, valid for
/// k < (n+1)/2. Returned at double precision.
inline double complexity_bound(std::uint64_t n, std::uint64_t k) {
  if (k < 1 || 2 * k >= n + 1)
    throw validation_error("complexity_bound: bound requires 1 <= k < (n+1)/2");
  BigUint num = BigUint::binomial(n, k) * (n - k + 1);
  return num.to_double() / static_cast<double>(n - 2 * k + 1) - 1.0;
}

/// Exact integer check that the geometric-series bound dominates the exact
/// sum: (exact + 1) * (n-2k+1) <= C(n,k) * (n-k+1).
inline bool bound_dominates_exact(std::uint64_t n, std::uint64_t k) {
  BigUint lhs = complexity_exact(n, k) + BigUint(1);
  lhs *= (n - 2 * k + 1);
  BigUint rhs = BigUint::binomial(n, k) * (n - k + 1);
  return lhs <= rhs;
}

struct ComplexityEstimate {
  std::uint64_t n = 0;
  std::uint64_t k = 0;
  BigUint exact_sum;
  double bound = std::numeric_limits<double>::quiet_NaN();  // NaN when k >= (n+1)/2

  double wall_time_seconds(double inferences_per_second) const {
    if (!(inferences_per_second > 0.0))
      throw validation_error("wall_time_estimate: rate must be > 0");
    return exact_sum.to_double() / inferences_per_second;
  }
};

inline ComplexityEstimate estimate_complexity(std::uint64_t n, std::uint64_t k) {
  ComplexityEstimate e;
  e.n = n;
  e.k = k;
  e.exact_sum = k == 0 ? BigUint() : complexity_exact(n, k);
  if (k >= 1 && 2 * k < n + 1) e.bound = complexity_bound(n, k);
  return e;
}

struct FeasibilityRow {
  std::uint64_t k = 0;
  BigUint exact;
  double bound = std::numeric_limits<double>::quiet_NaN();
  double days = 0.0;
};

/// Attack wall-time table: days = exact / rate / 86400 for k = 0..k_max.
inline std::vector<FeasibilityRow> feasibility_report(std::uint64_t n, std::uint64_t k_max,
                                                      double inferences_per_second) {
  if (!(inferences_per_second > 0.0))
    throw validation_error("feasibility_report: rate must be > 0");
  if (k_max > n) throw validation_error("feasibility_report: k_max must be <= n");
  std::vector<FeasibilityRow> rows;
  rows.reserve(k_max + 1);
  for (std::uint64_t k = 0; k <= k_max; ++k) {
    ComplexityEstimate e = estimate_complexity(n, k);
    FeasibilityRow row;
    row.k = k;
    row.exact = e.exact_sum;
    row.bound = e.bound;
    row.days = row.exact.to_double() / inferences_per_second / 86400.0;
    rows.push_back(std::move(row));
  }
  return rows;
}

enum class RecoveryMode { Exhaustive, Greedy };

struct RecoveryPoint {
  std::size_t k = 0;
  double best_accuracy = 0.0;
  std::vector<std::uint32_t> best_subset;  // key positions decrypted
};

struct PartialRecoveryCurve {
  RecoveryMode mode = RecoveryMode::Exhaustive;
  std::vector<RecoveryPoint> points;  // k = 0 .. as far as the budget allowed
  bool truncated = false;
  std::size_t evaluations = 0;
};

namespace detail {

inline SecretKey subkey(const SecretKey& key, const std::vector<std::uint32_t>& positions) {
  SecretKey sk;
  sk.layer = key.layer;
  sk.n_bit = key.n_bit;
  sk.genome_length = key.genome_length;
  sk.positions = positions;
  return sk;
}

// Lexicographic next combination of indices 0..n-1 taken k at a time.
inline bool next_combination(std::vector<std::size_t>& idx, std::size_t n) {
  const std::size_t k = idx.size();
  for (std::size_t i = k; i-- > 0;) {
    if (idx[i] < n - k + i) {
      ++idx[i];
      for (std::size_t j = i + 1; j < k; ++j) idx[j] = idx[j - 1] + 1;
      return true;
    }
  }
  return false;
}

}  // namespace detail

/// Simulates an attacker who knows the encrypted model and guesses subsets of
/// the true key positions. An attacker with budget k tries every subset of
/// size up to k (the same 1..k enumeration the complexity sum counts), so the
/// exhaustive curve records the running best and is monotone by construction.
/// The greedy mode fixes the single best position per step and records the
/// prefix accuracy as-is.
inline PartialRecoveryCurve partial_key_recovery(const QuantizedNetwork& encrypted,
                                                 const SecretKey& key, const Dataset& eval,
                                                 std::size_t k_max, RecoveryMode mode,
                                                 std::size_t max_evaluations = 200000,
                                                 std::size_t max_workers = 1) {
  key.validate();
  eval.validate();
  if (k_max > key.positions.size())
    throw validation_error("partial_key_recovery: k_max exceeds key size");

  PartialRecoveryCurve curve;
  curve.mode = mode;

  double base = evaluate_accuracy(encrypted, eval);
  curve.points.push_back({0, base, {}});

  if (mode == RecoveryMode::Exhaustive) {
    double best = base;
    std::vector<std::uint32_t> best_subset;
    for (std::size_t k = 1; k <= k_max; ++k) {
      BigUint count_big = BigUint::binomial(key.positions.size(), k);
      double count_d = count_big.to_double();
      std::size_t remaining = max_evaluations - curve.evaluations;
      bool room = count_d <= static_cast<double>(remaining);
      std::size_t to_eval = room ? static_cast<std::size_t>(count_d) : remaining;

      // Collect the subsets to evaluate in enumeration order.
      std::vector<std::vector<std::uint32_t>> subsets;
      subsets.reserve(to_eval);
      std::vector<std::size_t> idx(k);
      for (std::size_t i = 0; i < k; ++i) idx[i] = i;
      for (std::size_t s = 0; s < to_eval; ++s) {
        std::vector<std::uint32_t> subset(k);
        for (std::size_t i = 0; i < k; ++i) subset[i] = key.positions[idx[i]];
        subsets.push_back(std::move(subset));
        if (!detail::next_combination(idx, key.positions.size())) break;
      }

      std::vector<double> acc(subsets.size());
      parallel_for(subsets.size(), max_workers, [&](std::size_t i) {
        QuantizedNetwork dec = apply_key(encrypted, detail::subkey(key, subsets[i]));
        acc[i] = evaluate_accuracy(dec, eval);
      });
      curve.evaluations += subsets.size();

      for (std::size_t i = 0; i < subsets.size(); ++i) {
        if (acc[i] > best) {
          best = acc[i];
          best_subset = subsets[i];
        }
      }
      if (!room) {
        curve.truncated = true;  // k-th point would be incomplete, stop here
        return curve;
      }
      curve.points.push_back({k, best, best_subset});
    }
    return curve;
  }

  // Greedy: extend the fixed set by the position that helps most, ties by
  // lowest position value.
  std::vector<std::uint32_t> fixed;
  std::vector<std::uint32_t> remaining_pos = key.positions;
  for (std::size_t k = 1; k <= k_max; ++k) {
    if (curve.evaluations + remaining_pos.size() > max_evaluations) {
      curve.truncated = true;
      return curve;
    }
    std::vector<double> acc(remaining_pos.size());
    parallel_for(remaining_pos.size(), max_workers, [&](std::size_t i) {
      std::vector<std::uint32_t> trial = fixed;
      trial.push_back(remaining_pos[i]);
      std::sort(trial.begin(), trial.end());
      QuantizedNetwork dec = apply_key(encrypted, detail::subkey(key, trial));
      acc[i] = evaluate_accuracy(dec, eval);
    });
    curve.evaluations += remaining_pos.size();
    std::size_t pick = 0;
    for (std::size_t i = 1; i < remaining_pos.size(); ++i)
      if (acc[i] > acc[pick]) pick = i;
    fixed.push_back(remaining_pos[pick]);
    std::sort(fixed.begin(), fixed.end());
    double chosen = acc[pick];
    remaining_pos.erase(remaining_pos.begin() + static_cast<std::ptrdiff_t>(pick));
    curve.points.push_back({k, chosen, fixed});
  }
  return curve;
}

enum class BitScope { LayerSignBits, ModelAllBits };

struct BaselineResult {
  std::vector<double> accuracies;  // one per trial
  double min = 0.0;
  double median = 0.0;
  double max = 0.0;
};

namespace detail {

inline double median_of(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

// Floyd's algorithm: `count` distinct values in [0, n), deterministic in rng.
inline std::vector<std::uint64_t> sample_distinct(std::uint64_t n, std::uint64_t count,
                                                  CounterRng& rng) {
  std::vector<std::uint64_t> out;
  out.reserve(count);
  for (std::uint64_t j = n - count; j < n; ++j) {
    std::uint64_t r = rng.below(j + 1);
    bool seen = std::find(out.begin(), out.end(), r) != out.end();
    out.push_back(seen ? j : r);
  }
  return out;
}

}  // namespace detail

/// Random-encryption control: flip `bit_budget` uniformly chosen bits per
/// trial, either among the sign bits of one layer or among every weight bit of
/// the model (recurrent matrices included), and record the accuracy.
inline BaselineResult random_bit_baseline(const QuantizedNetwork& net, const Dataset& eval,
                                          std::size_t bit_budget, BitScope scope,
                                          std::size_t layer, std::size_t trials,
                                          std::uint64_t seed, std::size_t max_workers = 1) {
  net.validate();
  eval.validate();
  if (trials == 0) throw validation_error("random_bit_baseline: trials must be >= 1");

  // Flattened bit space for the model-wide scope: per layer, the feedforward
  // matrix then the recurrent one, n_bit bits per weight, LSB first.
  std::uint64_t scope_bits = 0;
  if (scope == BitScope::LayerSignBits) {
    if (layer >= net.layers.size())
      throw validation_error("random_bit_baseline: layer index out of range");
    scope_bits = net.layers[layer].weights.size();
  } else {
    for (const auto& l : net.layers)
      scope_bits += (l.weights.size() + l.recurrent_weights.size()) *
                    static_cast<std::uint64_t>(net.n_bit);
  }
  if (bit_budget > scope_bits)
    throw validation_error("random_bit_baseline: budget exceeds available bits in scope");

  BaselineResult result;
  result.accuracies.assign(trials, 0.0);
  parallel_for(trials, max_workers, [&](std::size_t trial) {
    QuantizedNetwork flipped = net;
    if (bit_budget > 0) {
      CounterRng rng(seed, trial, 0, 0x5eed);
      auto picks = detail::sample_distinct(scope_bits, bit_budget, rng);
      for (std::uint64_t p : picks) {
        if (scope == BitScope::LayerSignBits) {
          auto& w = flipped.layers[layer].weights[static_cast<std::size_t>(p)];
          w = flip_msb(w, net.n_bit);
        } else {
          std::uint64_t rest = p;
          for (auto& l : flipped.layers) {
            std::uint64_t ff = l.weights.size() * static_cast<std::uint64_t>(net.n_bit);
            std::uint64_t rec = l.recurrent_weights.size() * static_cast<std::uint64_t>(net.n_bit);
            if (rest < ff) {
              auto& w = l.weights[static_cast<std::size_t>(rest / net.n_bit)];
              w = flip_bit(w, static_cast<int>(rest % net.n_bit), net.n_bit);
              break;
            }
            rest -= ff;
            if (rest < rec) {
              auto& w = l.recurrent_weights[static_cast<std::size_t>(rest / net.n_bit)];
              w = flip_bit(w, static_cast<int>(rest % net.n_bit), net.n_bit);
              break;
            }
            rest -= rec;
          }
        }
      }
    }
    result.accuracies[trial] = evaluate_accuracy(flipped, eval);
  });
  result.min = *std::min_element(result.accuracies.begin(), result.accuracies.end());
  result.max = *std::max_element(result.accuracies.begin(), result.accuracies.end());
  result.median = detail::median_of(result.accuracies);
  return result;
}

struct GradientKeyResult {
  SecretKey key;
  std::vector<double> gradient_magnitudes;  // |dE/dw| per flattened weight
  bool degenerate = false;                  // every gradient was exactly zero
};

/// First-order baseline: rank target-layer weights of the float network by
/// |surrogate gradient| on the encryption set and flip the MSBs of the top
/// `bit_budget` positions. Pre-trained spiking networks often sit outside the
/// surrogate window, in which case the ranking degenerates and the flag is set.
inline GradientKeyResult gradient_baseline(const FloatNetwork& net, const Dataset& enc,
                                           std::size_t bit_budget, std::size_t target_layer,
                                           int n_bit = 8, double surrogate_window = 0.5) {
  net.validate();
  enc.validate();
  if (target_layer >= net.layers.size())
    throw validation_error("gradient_baseline: layer index out of range");
  const std::size_t genome_length = net.layers[target_layer].weights.size();
  if (bit_budget > genome_length)
    throw validation_error("gradient_baseline: budget exceeds layer weight count");

  LossGradient grad = surrogate_gradient(net, enc, surrogate_window);
  GradientKeyResult result;
  result.gradient_magnitudes.resize(genome_length);
  double max_mag = 0.0;
  for (std::size_t i = 0; i < genome_length; ++i) {
    result.gradient_magnitudes[i] = std::fabs(grad.layers[target_layer].weights[i]);
    max_mag = std::max(max_mag, result.gradient_magnitudes[i]);
  }
  result.degenerate = max_mag == 0.0;

  std::vector<std::uint32_t> order(genome_length);
  for (std::size_t i = 0; i < genome_length; ++i) order[i] = static_cast<std::uint32_t>(i);
  std::stable_sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) {
    return result.gradient_magnitudes[a] > result.gradient_magnitudes[b];
  });

  result.key.layer = static_cast<std::uint32_t>(target_layer);
  result.key.n_bit = n_bit;
  result.key.genome_length = genome_length;
  result.key.positions.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(bit_budget));
  std::sort(result.key.positions.begin(), result.key.positions.end());
  result.key.meta.epsilon = bit_budget;
  return result;
}

}  // namespace snngx
