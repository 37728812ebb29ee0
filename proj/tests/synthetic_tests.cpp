#include <doctest.h>

#include <cmath>

#include "snngx/io.hpp"
#include "snngx/synthetic.hpp"
#include "test_support.hpp"

using namespace snngx;

TEST_CASE("noiseless full-contrast classes are separable by block spike counts") {
  auto spec = test::block_task_spec(1, 0.0, 4);
  auto ds = generate_synthetic(spec);
  for (const auto& s : ds.samples) {
    std::vector<std::size_t> block_counts(spec.num_classes, 0);
    for (std::size_t t = 0; t < spec.timesteps; ++t)
      for (std::size_t f = 0; f < spec.features; ++f)
        if (s.input.at(t, f)) ++block_counts[f / 4];  // 16 features, blocks of 4
    std::size_t best = 0;
    for (std::size_t c = 1; c < block_counts.size(); ++c)
      if (block_counts[c] > block_counts[best]) best = c;
    CHECK(best == s.label);
    CHECK(block_counts[s.label] == spec.timesteps * 4);  // always firing
  }
}

TEST_CASE("identical seeds give identical dataset bytes") {
  auto spec = test::block_task_spec(77, 0.2, 3);
  auto a = io::dataset_to_bytes(generate_synthetic(spec));
  auto b = io::dataset_to_bytes(generate_synthetic(spec));
  CHECK(a == b);
  spec.seed = 78;
  CHECK(io::dataset_to_bytes(generate_synthetic(spec)) != a);
}

TEST_CASE("per-feature firing rates match the template within 3 sigma") {
  SyntheticTaskSpec spec;
  spec.num_classes = 2;
  spec.features = 10;
  spec.timesteps = 50;
  spec.samples_per_class = 40;
  spec.contrast = 0.7;
  spec.noise = 0.1;
  spec.seed = 123;
  auto ds = generate_synthetic(spec);

  for (std::uint16_t c = 0; c < spec.num_classes; ++c) {
    for (std::size_t f = 0; f < spec.features; ++f) {
      double p = template_probability(spec, c, f);
      // XOR noise: effective rate p(1-q) + (1-p)q
      double expect = p * (1 - spec.noise) + (1 - p) * spec.noise;
      std::size_t fired = 0, total = 0;
      for (const auto& s : ds.samples) {
        if (s.label != c) continue;
        for (std::size_t t = 0; t < spec.timesteps; ++t) {
          fired += s.input.at(t, f);
          ++total;
        }
      }
      double rate = static_cast<double>(fired) / static_cast<double>(total);
      double sigma = std::sqrt(expect * (1 - expect) / static_cast<double>(total));
      CHECK(std::fabs(rate - expect) <= 3.0 * sigma + 1e-9);
    }
  }
}

TEST_CASE("spec validation") {
  SyntheticTaskSpec spec;
  spec.num_classes = 1;
  CHECK_THROWS_AS(spec.validate(), validation_error);
  spec.num_classes = 4;
  spec.contrast = 1.5;
  CHECK_THROWS_AS(spec.validate(), validation_error);
  spec.contrast = 0.9;
  spec.features = 3;
  CHECK_THROWS_AS(spec.validate(), validation_error);
}
