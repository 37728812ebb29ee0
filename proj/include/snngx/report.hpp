#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "snngx/errors.hpp"

namespace snngx {

/// One per-generation diagnostics row of a genetic run.
struct MetricRow {
  std::uint64_t generation = 0;
  double best_fitness = 0.0;
  std::uint64_t best_distance = 0;
  double accuracy = 0.0;

  bool operator==(const MetricRow&) const = default;
};

struct ExperimentReport {
  std::string config_hash;
  std::uint64_t seed = 0;
  std::string started_at;   // ISO-8601 UTC
  std::string finished_at;
  std::vector<MetricRow> rows;

  double final_accuracy = 0.0;
  std::uint64_t final_distance = 0;
  std::uint64_t generations_run = 0;
  std::uint64_t genome_length = 0;

  bool operator==(const ExperimentReport&) const = default;

  void validate() const {
    for (std::size_t i = 1; i < rows.size(); ++i)
      if (rows[i].generation < rows[i - 1].generation)
        throw validation_error("ExperimentReport: rows must be ordered by generation");
  }
};

}  // namespace snngx
