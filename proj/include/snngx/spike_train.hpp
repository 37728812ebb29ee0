#pragma once

#include <cstdint>
#include <vector>

#include "snngx/errors.hpp"

namespace snngx {

/// Binary spike raster of one sample: timesteps x features, row-major.
/// Elements are stored unpacked (one byte per bit); the on-disk dataset
/// format packs them.
class SpikeTrain {
public:
  SpikeTrain() = default;
  SpikeTrain(std::size_t timesteps, std::size_t features)
      : t_(timesteps), f_(features), bits_(timesteps * features, 0) {
    if (timesteps == 0 || features == 0)
      throw validation_error("SpikeTrain: timesteps and features must be >= 1");
  }

  std::size_t timesteps() const noexcept { return t_; }
  std::size_t features() const noexcept { return f_; }
  std::size_t size() const noexcept { return bits_.size(); }

  std::uint8_t at(std::size_t t, std::size_t f) const { return bits_[t * f_ + f]; }
  void set(std::size_t t, std::size_t f, bool v) { bits_[t * f_ + f] = v ? 1 : 0; }

  /// Pointer to the F spike bits of timestep t.
  const std::uint8_t* row(std::size_t t) const { return bits_.data() + t * f_; }

  const std::vector<std::uint8_t>& bits() const noexcept { return bits_; }
  std::vector<std::uint8_t>& bits() noexcept { return bits_; }

  bool operator==(const SpikeTrain&) const = default;

private:
  std::size_t t_ = 0;
  std::size_t f_ = 0;
  std::vector<std::uint8_t> bits_;
};

struct LabeledSample {
  SpikeTrain input;
  std::uint16_t label = 0;  // 0-based class index

  bool operator==(const LabeledSample&) const = default;
};

struct Dataset {
  std::size_t timesteps = 0;
  std::size_t features = 0;
  std::uint16_t num_classes = 0;
  std::vector<LabeledSample> samples;

  bool operator==(const Dataset&) const = default;

  void validate() const {
    if (timesteps == 0 || features == 0)
      throw validation_error("Dataset: timesteps and features must be >= 1");
    if (num_classes == 0) throw validation_error("Dataset: num_classes must be >= 1");
    for (std::size_t i = 0; i < samples.size(); ++i) {
      const auto& s = samples[i];
      if (s.input.timesteps() != timesteps || s.input.features() != features)
        throw validation_error("Dataset: sample " + std::to_string(i) +
                               " has mismatched dimensions");
      if (s.label >= num_classes)
        throw validation_error("Dataset: sample " + std::to_string(i) + " label " +
                               std::to_string(s.label) + " >= num_classes");
    }
  }
};

}  // namespace snngx
