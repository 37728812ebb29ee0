#pragma once

#include <cstdint>

#include "snngx/rng.hpp"
#include "snngx/spike_train.hpp"

namespace snngx {

/// Rate-coded synthetic classification task. Each class owns a contiguous
/// feature block; block features fire with probability `contrast`, all other
/// features stay silent, and every bit is then flipped independently with
/// probability `noise`.
struct SyntheticTaskSpec {
  std::uint16_t num_classes = 4;
  std::size_t features = 64;
  std::size_t timesteps = 16;
  std::size_t samples_per_class = 32;
  double contrast = 0.9;
  double noise = 0.05;
  std::uint64_t seed = 0;

  void validate() const {
    if (num_classes < 2) throw validation_error("SyntheticTaskSpec: need at least 2 classes");
    if (features == 0 || timesteps == 0 || samples_per_class == 0)
      throw validation_error("SyntheticTaskSpec: features, timesteps, samples_per_class must be >= 1");
    if (features < num_classes)
      throw validation_error("SyntheticTaskSpec: need at least one feature per class");
    if (!(contrast >= 0.0 && contrast <= 1.0) || !(noise >= 0.0 && noise <= 1.0))
      throw validation_error("SyntheticTaskSpec: probabilities must be in [0, 1]");
  }
};

/// Firing probability of feature f in the template of class c (before noise).
inline double template_probability(const SyntheticTaskSpec& spec, std::uint16_t c, std::size_t f) {
  const std::size_t base = spec.features / spec.num_classes;
  const std::size_t rem = spec.features % spec.num_classes;
  const std::size_t start = c * base + std::min<std::size_t>(c, rem);
  const std::size_t len = base + (c < rem ? 1 : 0);
  return (f >= start && f < start + len) ? spec.contrast : 0.0;
}

/// Samples are interleaved (one per class, then the next round), so any prefix
/// of the dataset is close to class-balanced.
inline Dataset generate_synthetic(const SyntheticTaskSpec& spec) {
  spec.validate();
  Dataset ds;
  ds.timesteps = spec.timesteps;
  ds.features = spec.features;
  ds.num_classes = spec.num_classes;
  ds.samples.reserve(spec.samples_per_class * spec.num_classes);

  for (std::size_t s = 0; s < spec.samples_per_class; ++s) {
    for (std::uint16_t c = 0; c < spec.num_classes; ++c) {
      CounterRng rng(spec.seed, c, s);
      LabeledSample sample{SpikeTrain(spec.timesteps, spec.features), c};
      for (std::size_t t = 0; t < spec.timesteps; ++t) {
        for (std::size_t f = 0; f < spec.features; ++f) {
          bool fire = rng.bernoulli(template_probability(spec, c, f));
          bool flip = rng.bernoulli(spec.noise);
          sample.input.set(t, f, fire != flip);
        }
      }
      ds.samples.push_back(std::move(sample));
    }
  }
  return ds;
}

}  // namespace snngx
