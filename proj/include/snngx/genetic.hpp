#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "snngx/encryption.hpp"
#include "snngx/forward.hpp"
#include "snngx/parallel.hpp"
#include "snngx/report.hpp"
#include "snngx/rng.hpp"

namespace snngx {

struct GAConfig {
  std::uint32_t target_layer = 0;
  std::size_t epsilon = 50;        // Hamming distance budget
  std::size_t generations = 0;     // 0: derived from estimate_generations
  std::size_t population = 100;
  double mutation_rate = 0.05;     // p_m
  double elite_fraction = 0.6;     // r
  std::size_t enc_samples = 0;     // 0: use the whole provided dataset
  std::uint64_t seed = 0;
  std::size_t max_workers = 1;

  void validate(std::size_t genome_length) const {
    if (epsilon == 0 || epsilon >= genome_length)
      throw validation_error("GAConfig: epsilon must satisfy 0 < epsilon < genome length");
    if (!(mutation_rate > 0.0 && mutation_rate < 1.0))
      throw validation_error("GAConfig: mutation_rate must be in (0, 1)");
    if (!(elite_fraction > 0.0 && elite_fraction < 1.0))
      throw validation_error("GAConfig: elite_fraction must be in (0, 1)");
    if (population < 4 || population % 2 != 0)
      throw validation_error("GAConfig: population must be even and >= 4");
    if (elite_count() < 2)
      throw validation_error("GAConfig: elite pool needs at least two parents");
  }

  std::size_t elite_count() const {
    return static_cast<std::size_t>(
        std::lround(elite_fraction * static_cast<double>(population)));
  }
};

struct Individual {
  SignBitVector genome;
  double fitness = 0.0;
  std::size_t distance = 0;
  double accuracy = 0.0;  // cached l on the encryption dataset
};

/// Fitness score, lower is better: the distance term dominates while the
/// candidate is over budget, then only the accuracy term is measured.
inline double ga_fitness(double accuracy, std::size_t distance, std::size_t epsilon) {
  const double d = static_cast<double>(distance);
  if (distance <= epsilon) return static_cast<double>(epsilon) * accuracy;
  return d + d * accuracy;
}

/// Expected generations for the recovery mutation to shrink the distance from
/// the genome length down to epsilon, padded by a 135% reservoir factor.
inline std::size_t estimate_generations(std::size_t genome_length, std::size_t epsilon,
                                        double p_m) {
  if (epsilon == 0 || epsilon >= genome_length)
    throw validation_error("estimate_generations: need 0 < epsilon < genome_length");
  if (!(p_m > 0.0 && p_m < 1.0))
    throw validation_error("estimate_generations: p_m must be in (0, 1)");
  double g = (std::log(static_cast<double>(epsilon)) -
              std::log(static_cast<double>(genome_length))) /
             std::log1p(-p_m) * 1.35;
  return static_cast<std::size_t>(std::ceil(g));
}

/// Flip bits that differ from `raw` back to raw's value, each independently
/// with probability p_m. Bits already equal to raw are never touched, so the
/// Hamming distance to raw never grows.
inline SignBitVector recovery_mutation(const SignBitVector& x, const SignBitVector& raw,
                                       double p_m, CounterRng& rng) {
  if (x.size() != raw.size()) throw validation_error("recovery_mutation: length mismatch");
  SignBitVector out = x;
  for (std::size_t i = 0; i < out.size(); ++i)
    if (out[i] != raw[i] && rng.bernoulli(p_m)) out[i] = raw[i];
  return out;
}

/// Uniform crossover: each bit position swaps the parents' alleles with
/// probability 1/2, independently.
inline std::pair<SignBitVector, SignBitVector> uniform_crossover(const SignBitVector& a,
                                                                 const SignBitVector& b,
                                                                 CounterRng& rng) {
  if (a.size() != b.size()) throw validation_error("uniform_crossover: length mismatch");
  SignBitVector c1 = a;
  SignBitVector c2 = b;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (rng.bernoulli(0.5)) std::swap(c1[i], c2[i]);
  return {std::move(c1), std::move(c2)};
}

/// Sorted-prefix elite selection. `pop` must already be sorted ascending by
/// fitness with ties kept in insertion order.
inline std::span<const Individual> select(const std::vector<Individual>& pop, double r) {
  auto count = static_cast<std::size_t>(std::lround(r * static_cast<double>(pop.size())));
  if (count < 2) throw validation_error("select: elite pool needs at least two parents");
  return {pop.data(), count};
}

/// Accuracy of the network keyed by (candidate XOR raw) on the encryption
/// dataset. Pure: the base network is never mutated.
inline double evaluate_candidate(const QuantizedNetwork& net, const SignBitVector& candidate,
                                 const SignBitVector& raw, std::uint32_t layer,
                                 const Dataset& enc_data) {
  SecretKey key = key_from_difference(candidate, raw, layer, net.n_bit);
  QuantizedNetwork keyed = apply_key(net, key);
  return evaluate_accuracy(keyed, enc_data);
}

/// Stratified subset: floor(count / num_classes) per class, remainder assigned
/// to the lowest class indices, taking the earliest samples in dataset order.
inline Dataset stratified_subset(const Dataset& ds, std::size_t count) {
  if (count == 0 || count > ds.samples.size())
    throw validation_error("stratified_subset: count must be in [1, dataset size]");
  std::vector<std::size_t> quota(ds.num_classes, count / ds.num_classes);
  for (std::size_t c = 0; c < count % ds.num_classes; ++c) ++quota[c];
  Dataset out;
  out.timesteps = ds.timesteps;
  out.features = ds.features;
  out.num_classes = ds.num_classes;
  std::vector<std::size_t> taken(ds.num_classes, 0);
  for (const auto& s : ds.samples) {
    if (taken[s.label] < quota[s.label]) {
      out.samples.push_back(s);
      ++taken[s.label];
    }
  }
  if (out.samples.size() < count)
    throw validation_error("stratified_subset: dataset cannot satisfy the per-class quota");
  return out;
}

namespace detail {

enum GaStreamTag : std::uint64_t {
  kTagInit = 1,
  kTagPairing = 2,
  kTagCrossover = 3,
  kTagMutation = 4,
};

inline const Individual& best_of(const std::vector<Individual>& pop) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < pop.size(); ++i)
    if (pop[i].fitness < pop[best].fitness) best = i;
  return pop[best];
}

}  // namespace detail

using AccuracyFn = std::function<double(const SignBitVector&)>;

/// Initial population: every individual starts as the full complement of the
/// raw sign vector (maximum Hamming distance) and then takes one recovery
/// mutation draw for diversity. Fitness caches are populated.
inline std::vector<Individual> init_population(const SignBitVector& raw, const GAConfig& cfg,
                                               const AccuracyFn& eval) {
  cfg.validate(raw.size());
  SignBitVector complement(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) complement[i] = -raw[i];

  std::vector<Individual> pop(cfg.population);
  for (std::size_t i = 0; i < cfg.population; ++i) {
    CounterRng rng(cfg.seed, 0, i, detail::kTagInit);
    pop[i].genome = recovery_mutation(complement, raw, cfg.mutation_rate, rng);
    pop[i].distance = hamming_distance(pop[i].genome, raw);
  }
  parallel_for(pop.size(), cfg.max_workers, [&](std::size_t i) {
    pop[i].accuracy = eval(pop[i].genome);
    pop[i].fitness = ga_fitness(pop[i].accuracy, pop[i].distance, cfg.epsilon);
  });
  return pop;
}

struct GaReport {
  std::vector<MetricRow> rows;  // one per generation, 0 = initial population
  double final_accuracy = 0.0;
  std::size_t final_distance = 0;
  std::size_t generations_run = 0;
  std::size_t genome_length = 0;
};

struct GaResult {
  QuantizedNetwork encrypted;
  SecretKey key;
  GaReport report;
};

/// Genetic bit search over the target layer's sign bits, then XOR encryption
/// of the best individual's difference with the raw vector.
///
/// Elites are carried unmutated, so the best fitness never worsens across
/// generations; the recovery mutation applies only to crossover children.
/// Every random draw comes from a stream keyed by (seed, generation, slot,
/// operation), which makes the result identical at any worker count.
inline GaResult run_genetic_encryption(const QuantizedNetwork& net, const Dataset& enc_data,
                                       const GAConfig& cfg) {
  net.validate();
  enc_data.validate();
  SignBitVector raw = extract_sign_bits(net, cfg.target_layer);
  cfg.validate(raw.size());

  Dataset enc = (cfg.enc_samples > 0 && cfg.enc_samples < enc_data.samples.size())
                    ? stratified_subset(enc_data, cfg.enc_samples)
                    : enc_data;

  const AccuracyFn eval = [&](const SignBitVector& genome) {
    return evaluate_candidate(net, genome, raw, cfg.target_layer, enc);
  };

  const std::size_t generations =
      cfg.generations > 0 ? cfg.generations
                          : estimate_generations(raw.size(), cfg.epsilon, cfg.mutation_rate);
  const std::size_t elite_count = cfg.elite_count();

  std::vector<Individual> pop = init_population(raw, cfg, eval);

  GaReport report;
  report.genome_length = raw.size();
  report.generations_run = generations;
  auto record = [&](std::size_t gen) {
    const Individual& b = detail::best_of(pop);
    report.rows.push_back({gen, b.fitness, b.distance, b.accuracy});
  };
  record(0);

  for (std::size_t gen = 1; gen <= generations; ++gen) {
    std::stable_sort(pop.begin(), pop.end(),
                     [](const Individual& a, const Individual& b) { return a.fitness < b.fitness; });

    // Random bipartition of the full population into the two parent halves.
    // Parents come from the whole pool, not just the elites: the sub-elite
    // individuals carry the distance/accuracy diversity that lets crossover
    // hop over fitness basins the elite front alone cannot leave.
    std::vector<std::size_t> order(pop.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    CounterRng pair_rng(cfg.seed, gen, 0, detail::kTagPairing);
    for (std::size_t i = order.size(); i > 1; --i)
      std::swap(order[i - 1], order[pair_rng.below(i)]);
    const std::size_t half = order.size() / 2;
    std::span<const std::size_t> males(order.data(), half);
    std::span<const std::size_t> females(order.data() + half, order.size() - half);

    std::vector<Individual> next(pop.begin(), pop.begin() + elite_count);
    next.reserve(cfg.population);
    std::size_t pair_idx = 0;
    while (next.size() < cfg.population) {
      const SignBitVector& p1 = pop[males[pair_idx % males.size()]].genome;
      const SignBitVector& p2 = pop[females[pair_idx % females.size()]].genome;
      CounterRng cross_rng(cfg.seed, gen, pair_idx, detail::kTagCrossover);
      auto [c1, c2] = uniform_crossover(p1, p2, cross_rng);

      CounterRng mut1(cfg.seed, gen, next.size(), detail::kTagMutation);
      Individual child1;
      child1.genome = recovery_mutation(c1, raw, cfg.mutation_rate, mut1);
      child1.distance = hamming_distance(child1.genome, raw);
      next.push_back(std::move(child1));
      if (next.size() < cfg.population) {
        CounterRng mut2(cfg.seed, gen, next.size(), detail::kTagMutation);
        Individual child2;
        child2.genome = recovery_mutation(c2, raw, cfg.mutation_rate, mut2);
        child2.distance = hamming_distance(child2.genome, raw);
        next.push_back(std::move(child2));
      }
      ++pair_idx;
    }

    parallel_for(cfg.population - elite_count, cfg.max_workers, [&](std::size_t i) {
      Individual& ind = next[elite_count + i];
      ind.accuracy = eval(ind.genome);
      ind.fitness = ga_fitness(ind.accuracy, ind.distance, cfg.epsilon);
    });
    pop = std::move(next);
    record(gen);
  }

  const Individual& best = detail::best_of(pop);
  if (best.distance > cfg.epsilon)
    throw convergence_error(best.distance, cfg.epsilon,
                            "genetic search ended with distance " +
                                std::to_string(best.distance) + " above the budget " +
                                std::to_string(cfg.epsilon));

  GaResult result;
  result.key = key_from_difference(best.genome, raw, cfg.target_layer, net.n_bit);
  result.key.meta.epsilon = cfg.epsilon;
  result.key.meta.seed = cfg.seed;
  result.key.meta.generations_run = generations;
  result.key.meta.final_accuracy = best.accuracy;
  result.encrypted = apply_key(net, result.key);
  report.final_accuracy = best.accuracy;
  report.final_distance = best.distance;
  result.report = std::move(report);
  return result;
}

}  // namespace snngx
